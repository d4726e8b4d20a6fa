"""
End-to-end simulations: certified construction, noisy measurement, decoding.
"""

import logging
import math
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.stats import chi2

from src.domain.decoding import decode_exhaustive, decode_pruned
from src.domain.distance import min_distance
from src.domain.errors import ParameterError, WscError
from src.domain.models import (
    AdderChannelConfig,
    Codebook,
    MicroarrayConfig,
    ScenarioStatistics,
    SparseIntegerVector,
    SweepPoint,
)
from src.domain.parallel import chunk_plan, ordered_map, resolve_threads
from src.domain.superposition import superpose, vector_norm
from src.infrastructure.gaussian_generators import construct_with_distance
from src.infrastructure.rng import RngSpec

logger = logging.getLogger(__name__)

TRIALS_PER_CHUNK = 256
QUANTILES = (0.05, 0.5, 0.95)

# (recovered exactly, support recovered, noise norm, recovered exactly without restriction)
_Outcome = Tuple[bool, bool, float, Optional[bool]]


def sigma_for_exceedance(m: int, radius: float, p: float) -> float:
    """Per-dimension sigma with Pr(sigma ||g||_2 >= radius) = p for g ~ N(0, I_m)."""
    if not 0.0 < p < 1.0:
        raise ParameterError(f"p must lie in (0, 1) (got {p})")
    if radius <= 0 or m < 1:
        raise ParameterError("radius and m must be positive")
    return radius / math.sqrt(chi2.isf(p, m))


def analytic_exceedance(m: int, radius: float, sigma: float) -> float:
    """Pr(sigma ||g||_2 >= radius) from the chi-square survival function."""
    if sigma == 0.0:
        return 0.0
    return float(chi2.sf((radius / sigma) ** 2, m))


def draw_signal(g: np.random.Generator, n: int, k: int, t: int, nonnegative: bool) -> SparseIntegerVector:
    """Uniform active count in [1, K], uniform support, magnitudes uniform in [1, t]."""
    size = int(g.integers(1, k + 1))
    support = g.choice(n, size, replace=False)
    values = g.integers(1, t + 1, size)
    if not nonnegative:
        values = values * g.choice((-1, 1), size)
    return SparseIntegerVector(n, tuple(zip(support.tolist(), values.tolist())))


def measure(codebook: Codebook, b: SparseIntegerVector) -> np.ndarray:
    patterns = np.array([b.values], dtype=np.int64).reshape(1, b.support_size)
    return superpose(codebook, b.support, patterns)[0]


def _sweep_point(sigma: float, outcomes: List[_Outcome], radius: float, analytic: Optional[float]) -> SweepPoint:
    trials = len(outcomes)
    ratios = np.array([noise / radius if radius > 0 else math.inf for _, _, noise, _ in outcomes])
    unrestricted = [o[3] for o in outcomes if o[3] is not None]
    return SweepPoint(
        sigma=sigma,
        trials=trials,
        exact_recovery=sum(o[0] for o in outcomes) / trials,
        support_recovery=sum(o[1] for o in outcomes) / trials,
        exceed_rate=float(np.count_nonzero(ratios >= 1.0)) / trials,
        analytic_exceed=analytic,
        noise_ratio_quantiles={f"q{int(q * 100):02d}": float(np.quantile(ratios, q)) for q in QUANTILES},
        exact_recovery_unrestricted=sum(unrestricted) / trials if unrestricted else None,
    )


def _run_sweep(name: str, rng: RngSpec, sigmas: List[float], trials: int, threads: int,
               trial: Callable[[np.random.Generator, float], _Outcome]) -> List[List[_Outcome]]:
    rows = []
    for index, sigma in enumerate(sigmas):
        label = f"{name}/sigma{index}"

        def run_chunk(chunk: Tuple[int, int]) -> List[_Outcome]:
            g = rng.generator(label, chunk[0])
            return [trial(g, sigma) for _ in range(chunk[1])]

        chunks = ordered_map(run_chunk, chunk_plan(trials, TRIALS_PER_CHUNK), resolve_threads(threads))
        rows.append([outcome for chunk in chunks for outcome in chunk])
        logger.debug(f"{name}: finished sigma={sigma} over {trials} trials")
    return rows


def simulate_adder(cfg: AdderChannelConfig, threads: int = 1) -> ScenarioStatistics:
    """Active users send integer amplitudes; the receiver decodes with the pruned l2 search."""
    rng = RngSpec(cfg.seed)
    params = cfg.parameters()
    try:
        codebook, attempts = construct_with_distance(params, rng.child("codebook"), cfg.max_attempts,
                                                     cfg.max_signals, threads)
    except WscError as e:
        logger.error(f"Adder channel codebook construction failed: {e}")
        raise
    distance = min_distance(codebook, cfg.k_max, cfg.t, cfg.max_signals, threads).value
    radius = distance / 2.0

    def trial(g: np.random.Generator, sigma: float) -> _Outcome:
        b = draw_signal(g, cfg.n_users, cfg.k_max, cfg.t, nonnegative=False)
        noise = sigma * g.standard_normal(cfg.m)
        y = measure(codebook, b) + noise
        estimate = decode_pruned(codebook, y, cfg.k_max, cfg.t, cfg.max_signals).estimate
        return estimate == b, estimate.support == b.support, vector_norm(noise, codebook.norm), None

    sweep = cfg.sweep()
    outcomes = _run_sweep("adder", rng, sweep, cfg.trials, threads, trial)
    rows = [_sweep_point(sigma, row, radius, analytic_exceedance(cfg.m, radius, sigma))
            for sigma, row in zip(sweep, outcomes)]
    logger.info(f"Adder channel simulation finished: {len(rows)} sweep point(s), certified d={distance!r}")
    return ScenarioStatistics("adder", distance, attempts, codebook.seed, rows)


def simulate_microarray(cfg: MicroarrayConfig, threads: int = 1) -> ScenarioStatistics:
    """Nonnegative integer concentrations measured through a half-Gaussian l1 codebook."""
    rng = RngSpec(cfg.seed)
    params = cfg.parameters()
    try:
        codebook, attempts = construct_with_distance(params, rng.child("codebook"), cfg.max_attempts,
                                                     cfg.max_signals, threads)
    except WscError as e:
        logger.error(f"Microarray codebook construction failed: {e}")
        raise
    distance = min_distance(codebook, cfg.k_max, cfg.t, cfg.max_signals, threads).value
    radius = distance / 2.0

    def trial(g: np.random.Generator, sigma: float) -> _Outcome:
        b = draw_signal(g, cfg.n_targets, cfg.k_max, cfg.t, nonnegative=True)
        noise = sigma * g.standard_normal(cfg.m)
        y = measure(codebook, b) + noise
        estimate = decode_exhaustive(codebook, y, cfg.k_max, cfg.t, cfg.max_signals,
                                     nonnegative=cfg.restrict_nonneg).estimate
        unrestricted = None
        if cfg.compare_unrestricted:
            unrestricted = decode_exhaustive(codebook, y, cfg.k_max, cfg.t, cfg.max_signals).estimate == b
        return estimate == b, estimate.support == b.support, vector_norm(noise, codebook.norm), unrestricted

    sweep = cfg.sweep()
    outcomes = _run_sweep("microarray", rng, sweep, cfg.trials, threads, trial)
    # l1 noise norms have no chi-square reference
    rows = [_sweep_point(sigma, row, radius, None) for sigma, row in zip(sweep, outcomes)]
    logger.info(f"Microarray simulation finished: {len(rows)} sweep point(s), certified d={distance!r}")
    return ScenarioStatistics("microarray", distance, attempts, codebook.seed, rows)
