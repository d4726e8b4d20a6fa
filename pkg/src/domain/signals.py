"""
The integer signal ball: counting, enumeration and the difference set.

Enumeration order is fixed everywhere: support size ascending, supports of one
size in colexicographic order, values in odometer order (last position fastest)
over the alphabet -t, ..., -1, 1, ..., t.
"""

import itertools
import logging
import math
from typing import Iterator, Optional, Tuple

import numpy as np

from src.domain.errors import BudgetExceededError, ParameterError
from src.domain.models import CodeParameters, DifferenceVector, SparseIntegerVector

logger = logging.getLogger(__name__)

# (support, values) with values of shape (patterns, len(support))
Block = Tuple[Tuple[int, ...], np.ndarray]


def validate_parameters(params: CodeParameters) -> None:
    """Raise ParameterError naming every violated constraint."""
    problems = params.violations()
    if problems:
        raise ParameterError("invalid code parameters: " + "; ".join(problems))


def _check_ball(n: int, k: int, t: int) -> None:
    if n < 1 or k < 0 or t < 1:
        raise ParameterError(f"need N >= 1, K >= 0, t >= 1 (got N={n}, K={k}, t={t})")
    if k > n:
        raise ParameterError(f"K must not exceed N (got K={k}, N={n})")


def count_signals(n: int, k: int, t: int, include_zero: bool = True, nonnegative: bool = False) -> int:
    """Exact |l0 ball|: sum over support sizes of C(N, s) * (2t)^s."""
    _check_ball(n, k, t)
    levels = t if nonnegative else 2 * t
    start = 0 if include_zero else 1
    return sum(math.comb(n, s) * levels ** s for s in range(start, k + 1))


def count_signals_2t_plus_1(n: int, k: int, t: int) -> int:
    """The (2t+1)^s variant of the nonzero count, reported alongside count_signals."""
    _check_ball(n, k, t)
    return sum(math.comb(n, s) * (2 * t + 1) ** s for s in range(1, k + 1))


def count_feasible_differences(n: int, k: int, t: int) -> int:
    """Number of sign-reduced nonzero differences b1 - b2 with b1, b2 in the ball."""
    _check_ball(n, k, t)
    total = 0
    for s in range(1, min(2 * k, n) + 1):
        patterns = sum(math.comb(s, j) for j in range(0, min(s, 2 * k - s) + 1))
        total += math.comb(n, s) * (2 * t) ** s * patterns
    return total // 2


def colex_combinations(n: int, size: int) -> Iterator[Tuple[int, ...]]:
    """All size-subsets of range(n) in colexicographic order."""
    if size == 0:
        yield ()
        return
    for top in range(size - 1, n):
        for head in colex_combinations(top, size - 1):
            yield head + (top,)


def signal_alphabet(t: int, nonnegative: bool = False) -> Tuple[int, ...]:
    if nonnegative:
        return tuple(range(1, t + 1))
    return tuple(range(-t, 0)) + tuple(range(1, t + 1))


def _value_patterns(alphabet: Tuple[int, ...], size: int) -> np.ndarray:
    if size == 0:
        return np.zeros((1, 0), dtype=np.int64)
    return np.array(list(itertools.product(alphabet, repeat=size)), dtype=np.int64)


def enforce_budget(what: str, required: int, budget: Optional[int]) -> None:
    if budget is not None and required > budget:
        logger.warning(f"Refusing {what}: {required} > budget {budget}")
        raise BudgetExceededError(what, required, budget)


def signal_blocks(n: int, k: int, t: int, nonnegative: bool = False,
                  max_signals: Optional[int] = None) -> Iterator[Block]:
    """Yield the ball support by support, zero vector first."""
    _check_ball(n, k, t)
    enforce_budget("signal enumeration", count_signals(n, k, t, True, nonnegative), max_signals)
    alphabet = signal_alphabet(t, nonnegative)
    for size in range(0, k + 1):
        patterns = _value_patterns(alphabet, size)
        for support in colex_combinations(n, size):
            yield support, patterns


def enumerate_signals(n: int, k: int, t: int, max_signals: Optional[int] = None,
                      nonnegative: bool = False) -> Iterator[SparseIntegerVector]:
    """Every b in the l0 ball of radius K over B_t exactly once, zero included."""
    for support, patterns in signal_blocks(n, k, t, nonnegative, max_signals):
        for row in patterns:
            yield SparseIntegerVector(n, tuple(zip(support, (int(v) for v in row))))


def difference(b1: SparseIntegerVector, b2: SparseIntegerVector) -> Optional[DifferenceVector]:
    """Entrywise b1 - b2 with zeros dropped; None when b1 == b2."""
    if b1.dimension != b2.dimension:
        raise ParameterError(f"dimension mismatch: {b1.dimension} vs {b2.dimension}")
    values = b1.as_dict()
    for index, value in b2.entries:
        values[index] = values.get(index, 0) - value
    entries = tuple((i, v) for i, v in values.items() if v != 0)
    if not entries:
        return None
    return DifferenceVector(b1.dimension, entries)


def _difference_patterns(k: int, t: int, size: int) -> np.ndarray:
    """Sign-reduced feasible value patterns on a support of the given size."""
    positive = tuple(range(1, 2 * t + 1))
    signed = tuple(range(-2 * t, 0)) + positive
    rows = []
    for first in positive:
        for rest in itertools.product(signed, repeat=size - 1):
            row = (first,) + rest
            large = sum(1 for v in row if abs(v) > t)
            if 2 * large + (size - large) <= 2 * k:
                rows.append(row)
    return np.array(rows, dtype=np.int64).reshape(len(rows), size)


def difference_blocks(n: int, k: int, t: int, max_differences: Optional[int] = None) -> Iterator[Block]:
    """Yield the sign-reduced feasible difference set support by support."""
    _check_ball(n, k, t)
    enforce_budget("difference enumeration", count_feasible_differences(n, k, t), max_differences)
    for size in range(1, min(2 * k, n) + 1):
        patterns = _difference_patterns(k, t, size)
        if not len(patterns):
            continue
        for support in colex_combinations(n, size):
            yield support, patterns


def enumerate_feasible_differences(n: int, k: int, t: int,
                                   max_differences: Optional[int] = None) -> Iterator[DifferenceVector]:
    """One representative (lowest-index entry positive) of each realizable {v, -v}."""
    for support, patterns in difference_blocks(n, k, t, max_differences):
        for row in patterns:
            yield DifferenceVector(n, tuple(zip(support, (int(v) for v in row))))


def split_difference(v: DifferenceVector, k: int, t: int) -> Tuple[SparseIntegerVector, SparseIntegerVector]:
    """Realize a feasible difference as b1 - b2 with b1, b2 in the l0 ball."""
    if not v.is_feasible(k, t):
        raise ParameterError(f"difference {v.entries} is not feasible for K={k}, t={t}")
    first, second = {}, {}
    large, _ = v.weight_counts(t)
    room = k - large
    for index, value in v.entries:
        if abs(value) > t:
            sign = 1 if value > 0 else -1
            first[index] = sign * t
            second[index] = sign * t - value
        elif room > 0:
            first[index] = value
            room -= 1
        else:
            second[index] = -value
    return (SparseIntegerVector.from_dict(v.dimension, first),
            SparseIntegerVector.from_dict(v.dimension, second))
