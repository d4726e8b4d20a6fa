"""
Closed-form rate and packing bounds for weighted superimposed codes.

Natural logarithms throughout. Every rate is returned as a RateBound carrying
the o-term separately; lower-bound factors 1 + o may be negative at small K
and are reported raw together with a validity flag.
"""

import logging
import math
from fractions import Fraction
from typing import Optional, Tuple

from scipy.optimize import brentq
from scipy.special import logsumexp

from src.domain.errors import ParameterError
from src.domain.models import BoundSummary, PackingLimit, RateBound
from src.domain.signals import count_signals, count_signals_2t_plus_1

logger = logging.getLogger(__name__)

DEFAULT_LAMBDA = 2.0
PACKING_CAP = 2 ** 63
EXACT_POWER_LIMIT = 256
NGL1_COEFFICIENTS = {24: "o_lb_ngL1WSC_1", 648: "o_lb_ngL1WSC_2"}


def _require_k(k: int) -> None:
    if k < 2:
        raise ParameterError(f"rate bounds need K >= 2 (got K={k})")


def _require_d(d: float) -> None:
    if not 0.0 < d < 1.0:
        raise ParameterError(f"d must lie in (0, 1) (got {d})")


def _require_t(t: int) -> None:
    if t < 1:
        raise ParameterError(f"t must be >= 1 (got {t})")


def _nonzero_count(n: int, k: int, t: int) -> int:
    """sum_{s=1}^{K} C(N, s) (2t)^s without requiring K <= N."""
    total, comb, power = 0, 1, 1
    for s in range(1, min(k, n) + 1):
        comb = comb * (n - s + 1) // s
        power *= 2 * t
        total += comb * power
    return total


def _log_packing_holds(log_lhs: float, m: int, ratio: float) -> bool:
    return log_lhs <= m * math.log1p(ratio)


def sphere_packing_feasible(n: int, m: int, k: int, d: float, t: int) -> bool:
    """sum_{s<=K} C(N,s)(2t)^s <= ((tK + d/2) / (d/2))^m."""
    if d <= 0:
        raise ParameterError(f"d must be positive (got {d})")
    lhs = _nonzero_count(n, k, t)
    if m <= EXACT_POWER_LIMIT:
        rhs = (1 + Fraction(2 * t * k) / Fraction(d)) ** m
        return lhs <= rhs
    return _log_packing_holds(math.log(lhs), m, 2 * t * k / d)


def max_n_sphere_packing(m: int, k: int, d: float, t: int) -> PackingLimit:
    """Largest N passing sphere_packing_feasible (monotone in N)."""
    _require_d(d)
    lo, hi = 1, 2
    while sphere_packing_feasible(hi, m, k, d, t):
        lo, hi = hi, hi * 2
        if hi > PACKING_CAP:
            logger.warning(f"Packing limit for m={m}, K={k} exceeds 2**63; capping")
            return PackingLimit(PACKING_CAP, True)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if sphere_packing_feasible(mid, m, k, d, t):
            lo = mid
        else:
            hi = mid
    return PackingLimit(lo, False)


def rate_ub_lp(k: int, d: float, t: int) -> RateBound:
    """Sphere packing exponent (log K / K)(1 + o), o = log(2t/d + 1/K) / log K."""
    _require_k(k)
    _require_d(d)
    _require_t(t)
    log_k = math.log(k)
    o_term = math.log(2 * t / d + 1 / k) / log_k
    return RateBound(log_k / k * (1 + o_term), o_term, "o_ub_WSCs")


def rate_ub_l2(k: int, d: float, t: int, lam: float = DEFAULT_LAMBDA) -> RateBound:
    """Improved Euclidean exponent (log K / 2K)(1 + o), o = (2/log K) log(lam(t+1)/d + 1/sqrt K)."""
    _require_k(k)
    _require_d(d)
    _require_t(t)
    if lam <= 1:
        raise ParameterError(f"lambda must exceed 1 (got {lam})")
    log_k = math.log(k)
    o_term = 2.0 / log_k * math.log(lam * (t + 1) / d + 1 / math.sqrt(k))
    return RateBound(log_k / (2 * k) * (1 + o_term), o_term, "o_ub_Euclidean")


def expected_xi_squared(n: int, k: int, t: int) -> Fraction:
    """Exact E||Cb||^2 over nonzero b in the ball, for any unit-l2-column C."""
    if k > n:
        raise ParameterError(f"K must not exceed N (got K={k}, N={n})")
    numerator = Fraction(0)
    denominator = 0
    for s in range(1, k + 1):
        count = math.comb(n, s) * (2 * t) ** s
        numerator += Fraction(count * s * (t + 1) * (2 * t + 1), 6)
        denominator += count
    return numerator / denominator


def mu_squared_bound(k: int, t: int) -> Fraction:
    """(K/3)(t+1)^2, the uniform upper bound on E[xi^2]."""
    return Fraction(k * (t + 1) ** 2, 3)


def improved_packing_feasible(n: int, m: int, k: int, d: float, t: int,
                              lam: float = DEFAULT_LAMBDA) -> bool:
    """(1 - 1/lam)|ball| <= ((lam mu + d/2) / (d/2))^m with mu = sqrt(E[xi^2])."""
    if lam <= 1:
        raise ParameterError(f"lambda must exceed 1 (got {lam})")
    if d <= 0:
        raise ParameterError(f"d must be positive (got {d})")
    mu = math.sqrt(expected_xi_squared(n, k, t))
    log_lhs = math.log1p(-1.0 / lam) + math.log(count_signals(n, k, t, include_zero=False))
    return _log_packing_holds(log_lhs, m, 2 * lam * mu / d)


def max_n_improved_packing(m: int, k: int, d: float, t: int, lam: float = DEFAULT_LAMBDA) -> PackingLimit:
    """Largest N >= K passing improved_packing_feasible; n_max 0 when N = K already fails.

    The ball grows like N^K while mu stays below sqrt(K/3)(t+1), so the
    predicate is searched as if monotone in N.
    """
    _require_d(d)
    if not improved_packing_feasible(k, m, k, d, t, lam):
        return PackingLimit(0, False)
    lo, hi = k, 2 * k
    while improved_packing_feasible(hi, m, k, d, t, lam):
        lo, hi = hi, hi * 2
        if hi > PACKING_CAP:
            logger.warning(f"Improved packing limit for m={m}, K={k} exceeds 2**63; capping")
            return PackingLimit(PACKING_CAP, True)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if improved_packing_feasible(mid, m, k, d, t, lam):
            lo = mid
        else:
            hi = mid
    return PackingLimit(lo, False)


def rate_lb_wesc(k: int) -> RateBound:
    """Gaussian random coding exponent (log K / 4K)(1 + (log 2 - 1)/log K)."""
    _require_k(k)
    log_k = math.log(k)
    o_term = (math.log(2) - 1) / log_k
    return RateBound(log_k / (4 * k) * (1 + o_term), o_term, "o_lb_Euclidean_main")


def rate_lb_wesc_delta(k: int, delta: float) -> RateBound:
    """delta-dependent form: o = (log 2 + delta^2/(2K) - log delta^2 - 1) / log K."""
    _require_k(k)
    if delta <= 0:
        raise ParameterError(f"delta must be positive (got {delta})")
    log_k = math.log(k)
    o_term = (math.log(2) + delta ** 2 / (2 * k) - math.log(delta ** 2) - 1) / log_k
    return RateBound(log_k / (4 * k) * (1 + o_term), o_term, "o_lb_Euclidean_1")


def rate_lb_l1(k: int) -> RateBound:
    """Scaled Gaussian l1 exponent, o = (2/log K)(log pi - 1 - log 2)."""
    _require_k(k)
    log_k = math.log(k)
    o_term = 2.0 / log_k * (math.log(math.pi) - 1 - math.log(2))
    return RateBound(log_k / (4 * k) * (1 + o_term), o_term, "o_lb_L1_WSC_2")


def rate_lb_l1_delta(k: int, delta: float) -> RateBound:
    """delta-dependent l1 form, o = (2/log K)(log(pi/(2 delta)) - 1)."""
    _require_k(k)
    if delta <= 0:
        raise ParameterError(f"delta must be positive (got {delta})")
    log_k = math.log(k)
    o_term = 2.0 / log_k * (math.log(math.pi / (2 * delta)) - 1)
    return RateBound(log_k / (4 * k) * (1 + o_term), o_term, "o_lb_L1_WSC_1")


def _ngl1_o_term(log_2k: float, t: int, coefficient: int) -> float:
    return -(2 + 2 * math.log(1 + log_2k / 4 + coefficient * t ** 3)) / log_2k


def rate_lb_ngl1(k: int, t: int, coefficient: int = 648) -> RateBound:
    """Half-Gaussian nonnegative exponent, o_t = -(2 + 2 log(1 + log(2K)/4 + c t^3)) / log 2K.

    coefficient 648 is the bound for normalized codebooks, 24 the unnormalized one.
    The factor 1 + o_t stays negative until K is very large (t = o(K^(1/3))).
    """
    _require_k(k)
    _require_t(t)
    if coefficient not in NGL1_COEFFICIENTS:
        raise ParameterError(f"coefficient must be one of {sorted(NGL1_COEFFICIENTS)}")
    log_k = math.log(k)
    o_term = _ngl1_o_term(math.log(2 * k), t, coefficient)
    bound = RateBound(log_k / (4 * k) * (1 + o_term), o_term, NGL1_COEFFICIENTS[coefficient])
    if not bound.positive:
        logger.debug(f"Nonnegative l1 lower bound is vacuous at K={k}, t={t} (1 + o = {1 + o_term:.4f})")
    return bound


def ngl1_crossover(t: int, coefficient: int = 648) -> float:
    """Real K at which 1 + o_t turns positive."""
    _require_t(t)

    def factor(log_2k: float) -> float:
        return 1 + _ngl1_o_term(log_2k, t, coefficient)

    lo = math.log(4.0)
    hi = 2 * lo
    while factor(hi) <= 0:
        lo, hi = hi, 2 * hi
    root = brentq(factor, lo, hi, xtol=1e-12)
    return math.exp(root) / 2


def esc_reference_bounds(k: int) -> Tuple[float, float]:
    """Known binary-weight ESC exponents (log K / 4K, log K / 2K), o-terms suppressed."""
    _require_k(k)
    log_k = math.log(k)
    return log_k / (4 * k), log_k / (2 * k)


def union_bound_l2(n: int, m: int, k: int, t: int, delta: float) -> Tuple[float, float]:
    """Random coding failure bound for the Gaussian ensemble at finite (m, N).

    sum_{s=1}^{2K} C(N,s)(4t)^s exp{-(m/2)(log s - log delta^2 + delta^2/s - 1)}.
    Returns (log of the bound, bound clipped to 1).
    """
    if not 0.0 < delta < 1.0:
        raise ParameterError(f"delta must lie in (0, 1) (got {delta})")
    terms = []
    for s in range(1, min(2 * k, n) + 1):
        exponent = math.log(s) - math.log(delta ** 2) + delta ** 2 / s - 1
        terms.append(math.log(math.comb(n, s)) + s * math.log(4 * t) - m / 2 * exponent)
    log_value = float(logsumexp(terms))
    return log_value, min(1.0, math.exp(min(log_value, 0.0)))


def column_tail_chernoff(m: int, delta: float) -> float:
    """2 exp(-(m/2)(delta - log(1 + delta))) bounding Pr(| ||h||^2/m - 1 | > delta)."""
    return 2.0 * math.exp(-m / 2 * (delta - math.log1p(delta)))


def column_union_bound_l2(n: int, m: int, delta: float) -> float:
    """Union bound on some column of an m x N Gaussian matrix leaving the delta band."""
    return n * column_tail_chernoff(m, delta)


def summarize_bounds(k: int, d: float, t: int, n: Optional[int] = None, m: Optional[int] = None,
                     lam: float = DEFAULT_LAMBDA, delta: Optional[float] = None) -> BoundSummary:
    """Evaluate every bound available for the given parameters.

    delta adds the delta-dependent lower-bound forms; m adds both packing limits.
    """
    summary = BoundSummary(
        k=k,
        d=d,
        t=t,
        n=n,
        m=m,
        lam=lam,
        rate_ub_lp=rate_ub_lp(k, d, t),
        rate_ub_l2=rate_ub_l2(k, d, t, lam),
        rate_lb_wesc=rate_lb_wesc(k),
        rate_lb_l1=rate_lb_l1(k),
        rate_lb_ngl1=rate_lb_ngl1(k, t, 648),
        rate_lb_ngl1_24=rate_lb_ngl1(k, t, 24),
        esc_reference=esc_reference_bounds(k),
        mu_squared_bound=float(mu_squared_bound(k, t)),
    )
    if n is not None:
        summary.expected_xi_squared = float(expected_xi_squared(n, k, t))
        summary.count_signals = count_signals(n, k, t, include_zero=False)
        summary.count_signals_2t_plus_1 = count_signals_2t_plus_1(n, k, t)
    if delta is not None:
        summary.delta = delta
        summary.rate_lb_wesc_delta = rate_lb_wesc_delta(k, delta)
        summary.rate_lb_l1_delta = rate_lb_l1_delta(k, delta)
    if m is not None:
        summary.max_n_sphere_packing = max_n_sphere_packing(m, k, d, t)
        summary.max_n_improved_packing = max_n_improved_packing(m, k, d, t, lam)
    if n is not None and m is not None:
        summary.sphere_packing_feasible = sphere_packing_feasible(n, m, k, d, t)
        summary.improved_packing_feasible = improved_packing_feasible(n, m, k, d, t, lam)
    logger.info(f"Bound summary computed for K={k}, d={d}, t={t}")
    return summary
