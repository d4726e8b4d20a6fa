#!/usr/bin/env python3
"""
WSC Toolkit - weighted superimposed codes from the command line.
Generate, verify and decode codebooks, tabulate bounds, run probes and scenarios.
"""

import functools
import logging
import os
import sys

import click
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

# Add src to path for imports
sys.path.append(os.path.join(os.path.dirname(__file__), 'src'))

from config.settings import Settings
from src.application.probes import PATTERNS, PROBES
from src.application.wsc_service import SCENARIOS, WscApplicationService
from src.domain.errors import WscError
from src.infrastructure.gaussian_generators import GENERATORS
from src.infrastructure.json_repository import dumps

console = Console()
err_console = Console(stderr=True)
logger = logging.getLogger(__name__)


def _configure_logging(level: str) -> None:
    logging.basicConfig(
        level=level,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


def handle_errors(fn):
    """Map toolkit errors onto exit codes 1 (validation), 2 (budget), 3 (construction)."""
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except WscError as e:
            console.print(f"[red]❌ {type(e).__name__}: {e}[/red]")
            sys.exit(e.exit_code)
        except (click.ClickException, click.exceptions.Exit, SystemExit):
            raise
        except Exception as e:
            logger.debug("Unexpected failure", exc_info=True)
            raise click.ClickException(str(e))
    return wrapper


def common_options(fn):
    """--seed, --out and --threads, accepted by every command."""
    fn = click.option('--threads', type=click.IntRange(min=1), default=None,
                      help='Worker threads (default: WSC_THREADS or 1)')(fn)
    fn = click.option('--out', '-o', type=click.Path(dir_okay=False), default=None,
                      help='Output file (JSON, or codebook format for gen)')(fn)
    fn = click.option('--seed', type=click.IntRange(min=0), default=0, show_default=True,
                      help='Root random seed')(fn)
    return fn


def _emit(service: WscApplicationService, out, payload, argv_command) -> Console:
    """Write payload to --out, or print it when no file is given.

    Returns the console for the human summary, stderr when stdout carries the JSON.
    """
    if out:
        path = service.write_json(out, payload, argv_command)
        console.print(f"[dim]Results written to {path}[/dim]")
        return console
    click.echo(dumps(payload), nl=False)
    return err_console


def _command_line():
    return [os.path.basename(sys.argv[0])] + sys.argv[1:]


def _parse_floats(text):
    try:
        return [float(x) for x in text.split(',') if x.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated numbers, got '{text}'")


@click.group()
@click.option('--log-level', default=None, help='Logging level (default: WSC_LOG_LEVEL or WARNING)')
@click.pass_context
def cli(ctx, log_level):
    """WSC Toolkit: weighted superimposed codes for integer compressed sensing."""
    ctx.ensure_object(dict)
    try:
        settings = Settings()
    except ValueError as e:
        console.print(f"[red]❌ Configuration error: {e}[/red]")
        sys.exit(1)
    _configure_logging((log_level or settings.log_level).upper())
    ctx.obj['settings'] = settings
    ctx.obj['service'] = WscApplicationService(settings)


@cli.command()
@click.option('--family', type=click.Choice(sorted(GENERATORS)), default='wesc', show_default=True,
              help='Codebook family')
@click.option('--m', 'm', type=int, required=True, help='Codeword length')
@click.option('--n', 'n', type=int, required=True, help='Number of codewords N')
@click.option('--k', 'k', type=int, default=None, help='Maximum support K (needed with --d)')
@click.option('--t', 't', type=int, default=None, help='Weight bound t (needed with --d)')
@click.option('--d', 'd', type=float, default=None, help='Certify minimum distance >= d by rejection')
@click.option('--max-attempts', type=int, default=None, help='Rejection attempts (default: WSC_MAX_ATTEMPTS)')
@click.option('--max-signals', type=int, default=None, help='Enumeration budget (default: WSC_MAX_SIGNALS)')
@common_options
@click.pass_context
@handle_errors
def gen(ctx, family, m, n, k, t, d, max_attempts, max_signals, seed, out, threads):
    """Generate a random codebook, optionally certified at distance d."""
    service = ctx.obj['service']
    if not out:
        raise click.UsageError("gen needs --out for the codebook file")
    codebook, attempts = service.generate_codebook(family, m, n, seed, k, t, d, max_attempts, max_signals, threads)
    path = service.save_codebook(codebook, out)

    console.print(f"[green]✅ {family} codebook {m}x{n} written to {path}[/green]")
    if d is not None:
        console.print(f"  • certified d >= {d} after {attempts} attempt(s)")
    console.print(f"  • provenance: {codebook.provenance()}")


@cli.command()
@click.option('--codebook', type=click.Path(exists=True, dir_okay=False), required=True, help='Codebook file')
@click.option('--k', 'k', type=int, required=True, help='Maximum support K')
@click.option('--t', 't', type=int, required=True, help='Weight bound t')
@click.option('--d', 'd', type=float, default=None, help='Only check min distance >= d (early abort)')
@click.option('--max-signals', type=int, default=None, help='Enumeration budget (default: WSC_MAX_SIGNALS)')
@common_options
@click.pass_context
@handle_errors
def verify(ctx, codebook, k, t, d, max_signals, seed, out, threads):
    """Certify the minimum superposition distance of a codebook file."""
    service = ctx.obj['service']
    payload = service.verify(service.load_codebook(codebook), k, t, d, max_signals, threads)
    summary = _emit(service, out, payload, _command_line())

    if d is None:
        summary.print(f"[green]Minimum distance {payload['value']!r}[/green] over {payload['examined']} differences")
    elif payload['holds']:
        summary.print(f"[green]✅ Minimum distance >= {d}[/green]")
    else:
        summary.print(f"[yellow]Distance below {d}: ||Cv|| = {payload['counterexample_value']!r}[/yellow]")


@cli.command()
@click.option('--codebook', type=click.Path(exists=True, dir_okay=False), required=True, help='Codebook file')
@click.option('--request', type=click.Path(exists=True, dir_okay=False), default=None,
              help='JSON request {"y": [...], "K": k, "t": t}')
@click.option('--y', 'y', default=None, help='Measurement as comma-separated reals (instead of --request)')
@click.option('--k', 'k', type=int, default=None, help='Maximum support K (with --y)')
@click.option('--t', 't', type=int, default=None, help='Weight bound t (with --y)')
@click.option('--method', type=click.Choice(['pruned', 'exhaustive']), default='pruned', show_default=True)
@click.option('--nonneg', is_flag=True, help='Restrict candidates to nonnegative weights')
@click.option('--no-certify', is_flag=True, help='Skip the certified radius computation')
@click.option('--max-signals', type=int, default=None, help='Enumeration budget (default: WSC_MAX_SIGNALS)')
@common_options
@click.pass_context
@handle_errors
def decode(ctx, codebook, request, y, k, t, method, nonneg, no_certify, max_signals, seed, out, threads):
    """Decode a measurement to the nearest superposition of at most K codewords."""
    service = ctx.obj['service']
    if request:
        payload = service.load_json(request)
    elif y is not None and k is not None and t is not None:
        payload = {"y": _parse_floats(y), "K": k, "t": t}
    else:
        raise click.UsageError("give --request, or --y together with --k and --t")
    if nonneg:
        payload["nonnegative"] = True

    result = service.decode(service.load_codebook(codebook), payload, method, not no_certify, max_signals, threads)
    summary = _emit(service, out, result.to_dict(), _command_line())

    status = "[green]certified[/green]" if result.certified else "[yellow]not certified[/yellow]"
    summary.print(f"Estimate {result.estimate.as_dict()} residual {result.residual:.6g} ({status})")


@cli.command()
@click.option('--k', 'k', type=int, required=True, help='Maximum support K (>= 2)')
@click.option('--d', 'd', type=float, required=True, help='Minimum distance in (0, 1)')
@click.option('--t', 't', type=int, required=True, help='Weight bound t')
@click.option('--n', 'n', type=int, default=None, help='Codebook size N (enables counts and E[xi^2])')
@click.option('--m', 'm', type=int, default=None, help='Codeword length m (enables packing checks)')
@click.option('--lam', type=float, default=2.0, show_default=True, help='Markov parameter lambda > 1')
@click.option('--delta', type=float, default=None, help='Random coding delta (delta-dependent lower bounds, union bounds)')
@common_options
@click.pass_context
@handle_errors
def bounds(ctx, k, d, t, n, m, lam, delta, seed, out, threads):
    """Evaluate the rate, packing and random coding bounds."""
    service = ctx.obj['service']
    payload = service.bounds(k, d, t, n, m, lam, delta)
    summary = _emit(service, out, payload, _command_line())

    table = Table(title=f"📐 Bounds (K={k}, d={d}, t={t})")
    table.add_column("Bound", style="cyan")
    table.add_column("Value", style="white")
    table.add_column("o-term", style="yellow")
    for name, tag in [("rate_ub_lp", "o_ub_WSCs"), ("rate_ub_l2", "o_ub_Euclidean"),
                      ("rate_lb_wesc", "o_lb_Euclidean_main"), ("rate_lb_l1", "o_lb_L1_WSC_2"),
                      ("rate_lb_ngl1", "o_lb_ngL1WSC_2")]:
        table.add_row(name, f"{payload[name]:.6g}", f"{payload[tag]:.6g}")
    if delta is not None:
        for name, tag in [("rate_lb_wesc_delta", "o_lb_Euclidean_1"), ("rate_lb_l1_delta", "o_lb_L1_WSC_1")]:
            table.add_row(f"{name} (delta={delta})", f"{payload[name]:.6g}", f"{payload[tag]:.6g}")
    summary.print(table)
    if not payload["rate_lb_ngl1_valid"]:
        summary.print(f"[dim]Nonnegative l1 lower bound is vacuous until K ≈ {payload['ngl1_crossover_K']:.4g}[/dim]")


@cli.command()
@click.argument('name', type=click.Choice(sorted(PROBES)))
@click.option('--m', 'm', type=int, default=None)
@click.option('--n', 'n', type=int, default=None)
@click.option('--k', 'k', type=int, default=None)
@click.option('--t', 't', type=int, default=None)
@click.option('--delta', type=float, default=None)
@click.option('--alpha', type=float, default=None)
@click.option('--c', 'c', type=float, default=None)
@click.option('--pattern', type=click.Choice(PATTERNS), default=None)
@click.option('--m-grid', default=None, help='Comma-separated m values for the fitted probes')
@click.option('--trials', type=int, default=10_000, show_default=True)
@common_options
@click.pass_context
@handle_errors
def probe(ctx, name, m, n, k, t, delta, alpha, c, pattern, m_grid, trials, seed, out, threads):
    """Run a Monte Carlo probe against its theoretical bound."""
    service = ctx.obj['service']
    options = {"m": m, "n": n, "k": k, "t": t, "delta": delta, "alpha": alpha, "c": c, "pattern": pattern,
               "trials": trials, "seed": seed,
               "m_grid": [int(x) for x in _parse_floats(m_grid)] if m_grid else None}
    report = service.probe(name, options, threads)
    summary = _emit(service, out, report.to_dict(), _command_line())

    verdict = "[green]pass[/green]" if report.passed else "[red]fail[/red]"
    if report.vacuous:
        verdict += " [dim](vacuous bound)[/dim]"
    summary.print(f"{name}: statistic {report.statistic:.6g} ± {report.standard_error:.2g} → {verdict}")


@cli.command()
@click.argument('scenario', type=click.Choice(SCENARIOS))
@click.option('--config', 'config_path', type=click.Path(exists=True, dir_okay=False), default=None,
              help='JSON scenario config (overrides the inline options)')
@click.option('--n', 'n', type=int, default=8, show_default=True)
@click.option('--m', 'm', type=int, default=64, show_default=True)
@click.option('--k', 'k', type=int, default=2, show_default=True)
@click.option('--t', 't', type=int, default=1, show_default=True)
@click.option('--d', 'd', type=float, default=0.1, show_default=True)
@click.option('--sigma', type=float, default=0.0, show_default=True)
@click.option('--sigmas', default=None, help='Comma-separated noise sweep')
@click.option('--trials', type=int, default=1000, show_default=True)
@click.option('--compare-unrestricted', is_flag=True, help='Microarray: also decode without the nonnegativity restriction')
@common_options
@click.pass_context
@handle_errors
def simulate(ctx, scenario, config_path, n, m, k, t, d, sigma, sigmas, trials, compare_unrestricted,
             seed, out, threads):
    """Simulate the adder channel or the microarray end to end."""
    service = ctx.obj['service']
    if config_path:
        config = service.load_json(config_path)
    else:
        users = "n_users" if scenario == "adder" else "n_targets"
        config = {users: n, "m": m, "k_max": k, "t": t, "d": d, "sigma": sigma, "trials": trials, "seed": seed,
                  "sigmas": _parse_floats(sigmas) if sigmas else []}
        if scenario == "microarray":
            config["compare_unrestricted"] = compare_unrestricted
    stats = service.simulate(scenario, config, threads)
    summary = _emit(service, out, stats.to_dict(), _command_line())

    table = Table(title=f"📡 {scenario} (certified d={stats.certified_distance:.4g}, attempts={stats.attempts})")
    table.add_column("sigma", style="cyan")
    table.add_column("exact", style="green")
    table.add_column("support", style="green")
    table.add_column("exceed", style="yellow")
    table.add_column("analytic", style="yellow")
    for row in stats.rows:
        analytic = "-" if row.analytic_exceed is None else f"{row.analytic_exceed:.4f}"
        table.add_row(f"{row.sigma:.4g}", f"{row.exact_recovery:.4f}", f"{row.support_recovery:.4f}",
                      f"{row.exceed_rate:.4f}", analytic)
    summary.print(table)


def run(argv=None) -> int:
    """Run the CLI and return its exit code."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.ClickException as e:
        # usage errors are validation errors
        e.show()
        return 1
    except click.exceptions.Abort:
        return 1
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 1
    return 0


if __name__ == '__main__':
    sys.exit(run())
