"""
Exact minimum superposition distance of a codebook.

Both searches evaluate ||C v|| for integer difference vectors v through the
canonical routine in superposition.py, so they agree bit for bit.
"""

import logging
import threading
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.domain.errors import ParameterError
from src.domain.models import Codebook, DifferenceVector, DistanceCertificate, DistanceCheck
from src.domain.parallel import ordered_map, resolve_threads
from src.domain.signals import (
    Block,
    count_feasible_differences,
    count_signals,
    difference,
    difference_blocks,
    enforce_budget,
    enumerate_signals,
)
from src.domain.superposition import row_norms, superpose, superposition_norm

logger = logging.getLogger(__name__)

BLOCKS_PER_CHUNK = 64

# (value, order key, support, pattern row)
_Candidate = Tuple[float, Tuple[int, int], Tuple[int, ...], np.ndarray]


def _check_ball_args(codebook: Codebook, k: int, t: int) -> None:
    if k < 1 or t < 1 or k > codebook.n:
        raise ParameterError(f"need 1 <= K <= N and t >= 1 (got K={k}, N={codebook.n}, t={t})")


def _to_vector(n: int, support: Tuple[int, ...], row: np.ndarray) -> DifferenceVector:
    return DifferenceVector(n, tuple(zip(support, (int(v) for v in row))))


def _chunks(blocks: List[Block]) -> List[Tuple[int, List[Block]]]:
    return [(i // BLOCKS_PER_CHUNK, blocks[i:i + BLOCKS_PER_CHUNK])
            for i in range(0, len(blocks), BLOCKS_PER_CHUNK)]


def _truncate(blocks: List[Block], limit: int) -> List[Block]:
    kept, remaining = [], limit
    for support, patterns in blocks:
        if remaining <= 0:
            break
        kept.append((support, patterns[:remaining]))
        remaining -= len(patterns[:remaining])
    return kept


def min_distance_pairs(codebook: Codebook, k: int, t: int,
                       max_signals: Optional[int] = None) -> DistanceCertificate:
    """Literal double loop over ordered pairs b1 != b2 of the l0 ball."""
    _check_ball_args(codebook, k, t)
    size = count_signals(codebook.n, k, t, include_zero=True)
    enforce_budget("pairwise distance scan", size * size, max_signals)

    signals = list(enumerate_signals(codebook.n, k, t))
    cache: Dict[tuple, float] = {}
    best_value, best_witness = None, None
    examined = 0
    for i, b1 in enumerate(signals):
        for j, b2 in enumerate(signals):
            if i == j:
                continue
            v = difference(b1, b2)
            examined += 1
            value = cache.get(v.entries)
            if value is None:
                value = superposition_norm(codebook, v)
                cache[v.entries] = value
            if best_value is None or value < best_value:
                best_value, best_witness = value, v

    logger.info(f"Pairwise scan of {examined} pairs finished: min distance {best_value!r}")
    return DistanceCertificate(best_value, best_witness, codebook.norm, True, examined)


def min_distance(codebook: Codebook, k: int, t: int, max_differences: Optional[int] = None,
                 threads: int = 1, allow_partial: bool = False) -> DistanceCertificate:
    """Minimum of ||C v|| over the sign-reduced feasible difference set.

    With allow_partial, an over-budget scan covers only the first
    max_differences vectors and the certificate is marked non-exhaustive.
    """
    _check_ball_args(codebook, k, t)
    required = count_feasible_differences(codebook.n, k, t)
    exhaustive = True
    if allow_partial and max_differences is not None and required > max_differences:
        if max_differences < 1:
            raise ParameterError(f"a partial distance scan needs max_differences >= 1 (got {max_differences})")
        logger.warning(f"Partial distance scan: {max_differences} of {required} differences")
        blocks = _truncate(list(difference_blocks(codebook.n, k, t)), max_differences)
        exhaustive = False
    else:
        blocks = list(difference_blocks(codebook.n, k, t, max_differences))

    def scan(chunk: Tuple[int, List[Block]]) -> Tuple[Optional[_Candidate], int]:
        chunk_index, chunk_blocks = chunk
        best: Optional[_Candidate] = None
        count = 0
        for offset, (support, patterns) in enumerate(chunk_blocks):
            norms = row_norms(superpose(codebook, support, patterns), codebook.norm)
            count += len(norms)
            row = int(np.argmin(norms))
            if best is None or norms[row] < best[0]:
                best = (float(norms[row]), (chunk_index, offset), support, patterns[row])
        return best, count

    results = ordered_map(scan, _chunks(blocks), resolve_threads(threads))
    examined = sum(count for _, count in results)
    best = None
    for candidate, _ in results:
        if candidate is not None and (best is None or candidate[0] < best[0]):
            best = candidate

    value, _, support, row = best
    witness = _to_vector(codebook.n, support, row)
    logger.info(f"Distance scan of {examined} differences finished: min distance {value!r}")
    return DistanceCertificate(value, witness, codebook.norm, exhaustive, examined)


def check_distance_at_least(codebook: Codebook, k: int, t: int, d: float,
                            max_differences: Optional[int] = None, threads: int = 1) -> DistanceCheck:
    """Certify min distance >= d, stopping at the first violation found."""
    _check_ball_args(codebook, k, t)
    blocks = list(difference_blocks(codebook.n, k, t, max_differences))
    stop = threading.Event()

    def scan(chunk: Tuple[int, List[Block]]) -> Tuple[Optional[Tuple[float, DifferenceVector]], int]:
        _, chunk_blocks = chunk
        count = 0
        for support, patterns in chunk_blocks:
            if stop.is_set():
                break
            norms = row_norms(superpose(codebook, support, patterns), codebook.norm)
            count += len(norms)
            below = np.flatnonzero(norms < d)
            if below.size:
                stop.set()
                row = int(below[0])
                return (float(norms[row]), _to_vector(codebook.n, support, patterns[row])), count
        return None, count

    results = ordered_map(scan, _chunks(blocks), resolve_threads(threads))
    examined = sum(count for _, count in results)
    for violation, _ in results:
        if violation is not None:
            value, witness = violation
            logger.debug(f"Distance check failed at d={d}: ||Cv||={value!r}")
            return DistanceCheck(False, d, witness, value, examined)
    logger.debug(f"Distance check passed at d={d} after {examined} differences")
    return DistanceCheck(True, d, None, None, examined)
