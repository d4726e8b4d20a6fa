"""
Gaussian codebook families.

Column j of every family is drawn from its own stream rng.generator(family, j),
so columns can be produced concurrently and in any order.
"""

import logging
import math
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from src.domain.errors import ParameterError
from src.domain.models import Codebook, CodeParameters, NormKind
from src.domain.parallel import ordered_map, resolve_threads
from src.domain.services import CodebookGenerator, CodeConstructionService
from src.infrastructure.rng import RngSpec

logger = logging.getLogger(__name__)

DEGENERATE_NORM = 1e-300
MAX_REDRAWS = 16
# sqrt(2 pi) / 2 = 1 / E|A| for standard Gaussian A
L1_SCALE = math.sqrt(2.0 * math.pi) / 2.0


def _l1(column: np.ndarray) -> float:
    return math.fsum(np.abs(column))


def _l2(column: np.ndarray) -> float:
    return math.sqrt(math.fsum(column * column))


class GaussianCodebookGenerator(CodebookGenerator):
    """Columns drawn i.i.d. from a transformed standard Gaussian, then normalized."""

    def transform(self, draws: np.ndarray) -> np.ndarray:
        return draws

    def column_norm(self, column: np.ndarray) -> float:
        return _l1(column) if self.norm is NormKind.L1 else _l2(column)

    def raw_column(self, m: int, rng: RngSpec, j: int) -> np.ndarray:
        """Pre-normalization column j; redrawn from a retry stream if degenerate."""
        column = self.transform(rng.generator(self.family, j).standard_normal(m))
        redraw = 0
        while self.column_norm(column) < DEGENERATE_NORM:
            redraw += 1
            if redraw > MAX_REDRAWS:
                raise ParameterError(f"column {j} stayed degenerate after {MAX_REDRAWS} redraws")
            logger.warning(f"Degenerate column {j} in {self.family}; redrawing")
            column = self.transform(rng.generator(f"{self.family}/retry{redraw}", j).standard_normal(m))
        return column

    def raw_matrix(self, m: int, n: int, rng: RngSpec, threads: int = 1) -> np.ndarray:
        """The matrix H before column normalization."""
        _check_dims(m, n)
        columns = ordered_map(lambda j: self.raw_column(m, rng, j), range(n), resolve_threads(threads))
        return np.column_stack(columns)

    def generate(self, m: int, n: int, rng: RngSpec, threads: int = 1) -> Codebook:
        raw = self.raw_matrix(m, n, rng, threads)
        values = np.empty_like(raw)
        for j in range(n):
            values[:, j] = raw[:, j] / self.column_norm(raw[:, j])
        logger.info(f"Generated {self.family} codebook {m}x{n} (seed {rng.seed})")
        return Codebook(values, self.norm, self.nonneg, self.family, rng.seed)


class WescGenerator(GaussianCodebookGenerator):
    """Standard Gaussian columns scaled to unit l2 norm."""
    family = "wesc"
    norm = NormKind.L2


class L1WscGenerator(GaussianCodebookGenerator):
    family = "l1wsc"
    norm = NormKind.L1

    def transform(self, draws: np.ndarray) -> np.ndarray:
        return L1_SCALE * draws


class NonnegL1WscGenerator(GaussianCodebookGenerator):
    """Half-Gaussian entries, so every codeword is nonnegative."""
    family = "nonneg_l1wsc"
    norm = NormKind.L1
    nonneg = True

    def transform(self, draws: np.ndarray) -> np.ndarray:
        return L1_SCALE * np.abs(draws)


GENERATORS: Dict[str, Callable[[], GaussianCodebookGenerator]] = {
    WescGenerator.family: WescGenerator,
    L1WscGenerator.family: L1WscGenerator,
    NonnegL1WscGenerator.family: NonnegL1WscGenerator,
}


def _check_dims(m: int, n: int) -> None:
    if m < 1 or n < 1:
        raise ParameterError(f"need m >= 1 and N >= 1 (got m={m}, N={n})")


def generator_by_name(family: str) -> GaussianCodebookGenerator:
    try:
        return GENERATORS[family]()
    except KeyError:
        raise ParameterError(f"unknown codebook family '{family}' (choose from {sorted(GENERATORS)})") from None


def generator_for_parameters(params: CodeParameters) -> GaussianCodebookGenerator:
    if params.norm is NormKind.L2:
        return WescGenerator()
    return NonnegL1WscGenerator() if params.nonneg else L1WscGenerator()


def family_parameters(family: str, n: int, m: int, k: int, d: float, t: int) -> CodeParameters:
    generator = generator_by_name(family)
    return CodeParameters(n, m, k, d, t, generator.norm, generator.nonneg)


def gen_wesc(m: int, n: int, rng: RngSpec, threads: int = 1) -> Codebook:
    return WescGenerator().generate(m, n, rng, threads)


def gen_l1wsc(m: int, n: int, rng: RngSpec, threads: int = 1) -> Codebook:
    return L1WscGenerator().generate(m, n, rng, threads)


def gen_nonneg_l1wsc(m: int, n: int, rng: RngSpec, threads: int = 1) -> Codebook:
    return NonnegL1WscGenerator().generate(m, n, rng, threads)


def construct_with_distance(params: CodeParameters, rng: RngSpec, max_attempts: int,
                            max_differences: Optional[int] = None, threads: int = 1) -> Tuple[Codebook, int]:
    """Rejection-sample the family matching params until d is certified."""
    service = CodeConstructionService(generator_for_parameters)
    return service.construct_with_distance(params, rng, max_attempts, max_differences, threads)
