"""
Nearest-superposition decoding over the l0 ball.

Both decoders return the argmin of ||y - Cb|| with ties broken by enumeration
order, and evaluate residuals through the canonical superposition routine.
"""

import logging
from typing import List, Optional, Tuple

import numpy as np
from scipy.linalg import orth

from src.domain.distance import min_distance
from src.domain.errors import ParameterError
from src.domain.models import Codebook, DecodeResult, NormKind, SparseIntegerVector
from src.domain.parallel import ordered_map, resolve_threads
from src.domain.signals import Block, count_signals, enforce_budget, signal_alphabet, signal_blocks
from src.domain.superposition import row_norms, superpose, vector_norm

logger = logging.getLogger(__name__)

BLOCKS_PER_CHUNK = 64
PRUNE_RELATIVE_SLACK = 1e-9
PRUNE_ABSOLUTE_SLACK = 1e-12


def _check_request(codebook: Codebook, y: np.ndarray, k: int, t: int) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (codebook.m,):
        raise ParameterError(f"measurement must have length m={codebook.m} (got shape {y.shape})")
    if not np.all(np.isfinite(y)):
        raise ParameterError("measurement entries must be finite")
    if k < 1 or t < 1 or k > codebook.n:
        raise ParameterError(f"need 1 <= K <= N and t >= 1 (got K={k}, N={codebook.n}, t={t})")
    return y


def _order_key(support: Tuple[int, ...], values: Tuple[int, ...]) -> tuple:
    """Position in the enumeration order: size, colex support, odometer values."""
    return len(support), tuple(reversed(support)), values


def _certified(residual: float, radius: Optional[float]) -> bool:
    return radius is not None and residual < radius


def decode_exhaustive(codebook: Codebook, y: np.ndarray, k: int, t: int,
                      max_signals: Optional[int] = None, nonnegative: bool = False,
                      radius: Optional[float] = None, threads: int = 1) -> DecodeResult:
    """Scan the whole ball and return the closest superposition."""
    y = _check_request(codebook, y, k, t)
    blocks = list(signal_blocks(codebook.n, k, t, nonnegative, max_signals))
    chunks = [blocks[i:i + BLOCKS_PER_CHUNK] for i in range(0, len(blocks), BLOCKS_PER_CHUNK)]

    def scan(chunk: List[Block]):
        best, count = None, 0
        for support, patterns in chunk:
            residuals = row_norms(y[np.newaxis, :] - superpose(codebook, support, patterns), codebook.norm)
            count += len(residuals)
            row = int(np.argmin(residuals))
            if best is None or residuals[row] < best[0]:
                best = (float(residuals[row]), support, patterns[row])
        return best, count

    results = ordered_map(scan, chunks, resolve_threads(threads))
    best = None
    for candidate, _ in results:
        if best is None or candidate[0] < best[0]:
            best = candidate
    examined = sum(count for _, count in results)

    residual, support, row = best
    estimate = SparseIntegerVector(codebook.n, tuple(zip(support, (int(v) for v in row))))
    logger.debug(f"Exhaustive decode examined {examined} candidates, residual {residual!r}")
    return DecodeResult(estimate, residual, _certified(residual, radius), examined, radius)


class _PrunedSearch:
    """Depth-first search over ascending supports with residual lower bounds.

    A node (support S, last index i) covers every signal extending S with
    indices above i. Its descendants' residuals are bounded below by
    ||r|| - (K - |S|) t and by the distance from r to span{c_j : j > i}.
    """

    def __init__(self, codebook: Codebook, y: np.ndarray, k: int, t: int, nonnegative: bool):
        self.codebook = codebook
        self.y = y
        self.k = k
        self.t = t
        self.alphabet = signal_alphabet(t, nonnegative)
        self.columns = [codebook.values[:, j] for j in range(codebook.n)]
        self.tails = [self._tail_basis(start) for start in range(codebook.n + 1)]
        self.best_residual = float("inf")
        self.best_key: Optional[tuple] = None
        self.examined = 0

    def _tail_basis(self, start: int) -> Optional[np.ndarray]:
        """Orthonormal basis of span{c_j : j >= start}; None when it is the whole space."""
        if start >= self.codebook.n:
            return np.zeros((self.codebook.m, 0))
        basis = orth(self.codebook.values[:, start:])
        return None if basis.shape[1] >= self.codebook.m else basis

    def _distance_to_tail(self, r: np.ndarray, start: int) -> float:
        basis = self.tails[start]
        if basis is None:
            return 0.0
        return float(np.linalg.norm(r - basis @ (basis.T @ r)))

    def _consider(self, support: Tuple[int, ...], values: Tuple[int, ...], residual: float) -> None:
        self.examined += 1
        key = _order_key(support, values)
        if residual < self.best_residual or (residual == self.best_residual and key < self.best_key):
            self.best_residual, self.best_key = residual, key

    def run(self) -> None:
        self.visit(-1, (), (), np.zeros(self.codebook.m))

    def visit(self, last: int, support: Tuple[int, ...], values: Tuple[int, ...], acc: np.ndarray) -> None:
        r = self.y - acc
        residual = vector_norm(r, NormKind.L2)
        self._consider(support, values, residual)
        depth = len(support)
        if depth == self.k or last == self.codebook.n - 1:
            return
        bound = max(residual - (self.k - depth) * self.t, self._distance_to_tail(r, last + 1))
        if bound > self.best_residual * (1 + PRUNE_RELATIVE_SLACK) + PRUNE_ABSOLUTE_SLACK:
            return
        for j in range(last + 1, self.codebook.n):
            column = self.columns[j]
            for v in self.alphabet:
                self.visit(j, support + (j,), values + (v,), acc + v * column)


def decode_pruned(codebook: Codebook, y: np.ndarray, k: int, t: int,
                  max_signals: Optional[int] = None, nonnegative: bool = False,
                  radius: Optional[float] = None) -> DecodeResult:
    """Same answer as decode_exhaustive, usually after far fewer candidates (l2 only)."""
    if codebook.norm is NormKind.L1:
        logger.debug("Pruned decoding needs the l2 norm; falling back to the exhaustive scan")
        return decode_exhaustive(codebook, y, k, t, max_signals, nonnegative, radius)
    y = _check_request(codebook, y, k, t)
    enforce_budget("signal enumeration", count_signals(codebook.n, k, t, True, nonnegative), max_signals)

    search = _PrunedSearch(codebook, y, k, t, nonnegative)
    search.run()
    _, support, values = search.best_key
    estimate = SparseIntegerVector(codebook.n, tuple(zip(tuple(reversed(support)), values)))
    logger.debug(f"Pruned decode examined {search.examined} candidates, residual {search.best_residual!r}")
    return DecodeResult(estimate, search.best_residual, _certified(search.best_residual, radius),
                        search.examined, radius)


def certified_radius(codebook: Codebook, k: int, t: int, max_differences: Optional[int] = None,
                     threads: int = 1) -> float:
    """Half the exact minimum distance: decoding within it is unique."""
    return min_distance(codebook, k, t, max_differences, threads).value / 2.0
