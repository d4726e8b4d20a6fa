"""
Application service orchestrating generation, verification, decoding, bounds,
probes and scenarios for the CLI.
"""

import inspect
import logging
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from config.settings import Settings
from src.application.probes import PROBES
from src.application.scenarios import simulate_adder, simulate_microarray
from src.domain.bounds import (
    DEFAULT_LAMBDA,
    column_union_bound_l2,
    ngl1_crossover,
    summarize_bounds,
    union_bound_l2,
)
from src.domain.decoding import certified_radius, decode_exhaustive, decode_pruned
from src.domain.distance import check_distance_at_least, min_distance
from src.domain.errors import ParameterError, WscError
from src.domain.models import (
    AdderChannelConfig,
    Codebook,
    DecodeResult,
    MicroarrayConfig,
    ProbeReport,
    ScenarioStatistics,
)
from src.infrastructure.codebook_repository import CodebookRepository
from src.infrastructure.gaussian_generators import construct_with_distance, family_parameters, generator_by_name
from src.infrastructure.json_repository import JsonResultRepository
from src.infrastructure.rng import RngSpec

logger = logging.getLogger(__name__)

SCENARIOS = ("adder", "microarray")


class WscApplicationService:
    """Application service tying the domain operations to files and settings."""

    def __init__(self, settings: Optional[Settings] = None, output_dir: Optional[str] = None):
        self.settings = settings
        self.codebooks = CodebookRepository()
        self.results = JsonResultRepository(output_dir or (settings.output_dir if settings else "."))

    def _threads(self, threads: Optional[int]) -> int:
        if threads is not None:
            return threads
        return self.settings.threads if self.settings else 1

    def _max_signals(self, max_signals: Optional[int]) -> Optional[int]:
        if max_signals is not None:
            return max_signals
        return self.settings.max_signals if self.settings else None

    def _max_attempts(self, max_attempts: Optional[int]) -> int:
        if max_attempts is not None:
            return max_attempts
        return self.settings.max_attempts if self.settings else 20

    # codebooks

    def generate_codebook(self, family: str, m: int, n: int, seed: int, k: Optional[int] = None,
                          t: Optional[int] = None, d: Optional[float] = None, max_attempts: Optional[int] = None,
                          max_signals: Optional[int] = None, threads: Optional[int] = None) -> Tuple[Codebook, int]:
        """Draw one codebook, or rejection-sample one certified at distance d when d is given."""
        rng = RngSpec(seed)
        if d is None:
            return generator_by_name(family).generate(m, n, rng, self._threads(threads)), 1
        if k is None or t is None:
            raise ParameterError("a target distance --d needs --k and --t")
        params = family_parameters(family, n, m, k, d, t)
        try:
            return construct_with_distance(params, rng, self._max_attempts(max_attempts),
                                           self._max_signals(max_signals), self._threads(threads))
        except WscError as e:
            logger.error(f"Codebook construction failed: {e}")
            raise

    def save_codebook(self, codebook: Codebook, path: str) -> str:
        target = self.results.resolve(path)
        self.codebooks.save(codebook, target)
        return target

    def load_codebook(self, path: str) -> Codebook:
        return self.codebooks.load(path)

    # distance and decoding

    def verify(self, codebook: Codebook, k: int, t: int, d: Optional[float] = None,
               max_signals: Optional[int] = None, threads: Optional[int] = None) -> Dict[str, Any]:
        """Full certificate, or an early-abort threshold check when d is given."""
        budget, workers = self._max_signals(max_signals), self._threads(threads)
        if d is None:
            payload = min_distance(codebook, k, t, budget, workers).to_dict()
        else:
            payload = check_distance_at_least(codebook, k, t, d, budget, workers).to_dict()
        payload.update({"K": k, "t": t, "seed": codebook.seed})
        return payload

    def decode(self, codebook: Codebook, request: Dict[str, Any], method: str = "pruned", certify: bool = True,
               max_signals: Optional[int] = None, threads: Optional[int] = None) -> DecodeResult:
        """Decode a request {"y": [...], "K": k, "t": t, "nonnegative": bool}."""
        try:
            y = np.asarray(request["y"], dtype=np.float64)
            k, t = int(request["K"]), int(request["t"])
        except (KeyError, TypeError, ValueError) as e:
            raise ParameterError(f"decode request needs 'y', 'K' and 't': {e}") from e
        nonnegative = bool(request.get("nonnegative", False))
        budget, workers = self._max_signals(max_signals), self._threads(threads)
        radius = certified_radius(codebook, k, t, budget, workers) if certify else None
        if method == "pruned":
            return decode_pruned(codebook, y, k, t, budget, nonnegative, radius)
        if method == "exhaustive":
            return decode_exhaustive(codebook, y, k, t, budget, nonnegative, radius, workers)
        raise ParameterError(f"unknown decoding method '{method}'")

    # bounds

    def bounds(self, k: int, d: float, t: int, n: Optional[int] = None, m: Optional[int] = None,
               lam: float = DEFAULT_LAMBDA, delta: Optional[float] = None) -> Dict[str, Any]:
        payload = summarize_bounds(k, d, t, n, m, lam, delta).to_dict()
        payload["ngl1_crossover_K"] = ngl1_crossover(t, 648)
        payload["ngl1_crossover_K_24"] = ngl1_crossover(t, 24)
        if delta is not None and n is not None and m is not None:
            log_value, clipped = union_bound_l2(n, m, k, t, delta)
            payload.update({
                "union_bound_l2_log": log_value,
                "union_bound_l2": clipped,
                "column_union_bound_l2": column_union_bound_l2(n, m, delta),
            })
        return payload

    # probes and scenarios

    def probe(self, name: str, options: Dict[str, Any], threads: Optional[int] = None) -> ProbeReport:
        """Run a probe, passing the options its signature accepts."""
        if name not in PROBES:
            raise ParameterError(f"unknown probe '{name}' (choose from {sorted(PROBES)})")
        probe = PROBES[name]
        signature = inspect.signature(probe)
        kwargs = {key: value for key, value in options.items() if key in signature.parameters and value is not None}
        if "threads" in signature.parameters:
            kwargs["threads"] = self._threads(threads)
        missing = [
            key for key, parameter in signature.parameters.items()
            if parameter.default is inspect.Parameter.empty and key not in kwargs
        ]
        if missing:
            raise ParameterError(f"probe {name} needs: {', '.join('--' + key.replace('_', '-') for key in missing)}")
        logger.info(f"Running probe {name} with {kwargs}")
        return probe(**kwargs)

    def simulate(self, scenario: str, config: Dict[str, Any], threads: Optional[int] = None) -> ScenarioStatistics:
        config = dict(config)
        config.setdefault("max_attempts", self._max_attempts(None))
        if self._max_signals(None) is not None:
            config.setdefault("max_signals", self._max_signals(None))
        try:
            if scenario == "adder":
                return simulate_adder(AdderChannelConfig.from_dict(config), self._threads(threads))
            if scenario == "microarray":
                return simulate_microarray(MicroarrayConfig.from_dict(config), self._threads(threads))
        except WscError as e:
            logger.error(f"Scenario {scenario} failed: {e}")
            raise
        raise ParameterError(f"unknown scenario '{scenario}' (choose from {SCENARIOS})")

    # output

    def write_json(self, path: str, payload: Dict[str, Any], command: Optional[List[str]] = None) -> str:
        return self.results.save(path, payload, command)

    def load_json(self, path: str) -> Dict[str, Any]:
        return self.results.load(path)
