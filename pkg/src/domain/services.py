"""
Domain services for codebook construction.
"""

import logging
from abc import ABC, abstractmethod
from typing import TYPE_CHECKING, Callable, Optional, Tuple

from src.domain.bounds import sphere_packing_feasible
from src.domain.distance import check_distance_at_least
from src.domain.errors import ConstructionError, ParameterError
from src.domain.models import Codebook, CodeParameters, NormKind
from src.domain.signals import count_feasible_differences, enforce_budget, validate_parameters

if TYPE_CHECKING:
    from src.infrastructure.rng import RngSpec

logger = logging.getLogger(__name__)


class CodebookGenerator(ABC):
    """Abstract random codebook family."""

    family: str = ""
    norm: NormKind = NormKind.L2
    nonneg: bool = False

    @abstractmethod
    def generate(self, m: int, n: int, rng: "RngSpec", threads: int = 1) -> Codebook:
        """Draw one m x N codebook; a pure function of (m, N, rng)."""
        pass

    def matches(self, params: CodeParameters) -> bool:
        return self.norm is params.norm and self.nonneg == params.nonneg


class CodeConstructionService:
    """Rejection sampling of codebooks with a certified minimum distance."""

    def __init__(self, generator_for: Callable[[CodeParameters], CodebookGenerator]):
        self.generator_for = generator_for

    def packing_explanation(self, params: CodeParameters) -> Optional[str]:
        """Reason the request is provably impossible, or None."""
        if sphere_packing_feasible(params.n, params.m, params.k, params.d, params.t):
            return None
        return (
            f"no code with N={params.n}, m={params.m}, K={params.k}, t={params.t} can reach d={params.d}: "
            f"the sphere packing bound is violated (lower d or N, or raise m)"
        )

    def construct_with_distance(
        self,
        params: CodeParameters,
        rng: "RngSpec",
        max_attempts: int,
        max_differences: Optional[int] = None,
        threads: int = 1,
    ) -> Tuple[Codebook, int]:
        """
        Generate codebooks of the family selected by params until one certifies
        d(C, K, B_t) >= params.d.

        Returns:
            (codebook, attempts used)
        """
        validate_parameters(params)
        if max_attempts < 1:
            raise ParameterError("max_attempts must be at least 1")

        explanation = self.packing_explanation(params)
        if explanation:
            logger.error(f"Construction refused: {explanation}")
            raise ConstructionError(explanation, 0)

        enforce_budget("difference enumeration",
                       count_feasible_differences(params.n, params.k, params.t), max_differences)

        generator = self.generator_for(params)
        best_seen = None
        for attempt in range(1, max_attempts + 1):
            codebook = generator.generate(params.m, params.n, rng.child("attempt", attempt), threads)
            check = check_distance_at_least(codebook, params.k, params.t, params.d, max_differences, threads)
            if check.holds:
                logger.info(f"Certified {generator.family} codebook with d >= {params.d} after {attempt} attempt(s)")
                return codebook, attempt
            logger.debug(f"Attempt {attempt} rejected: ||Cv|| = {check.counterexample_value!r} < {params.d}")
            if best_seen is None or check.counterexample_value > best_seen:
                best_seen = check.counterexample_value

        message = (
            f"no {generator.family} codebook reached d={params.d} in {max_attempts} attempts "
            f"(largest violating distance seen {best_seen!r}); lower d or N, or raise --max-attempts"
        )
        logger.error(message)
        raise ConstructionError(message, max_attempts)
