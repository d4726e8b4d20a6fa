"""
Domain models for weighted superimposed codes.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.domain.errors import ParameterError

COLUMN_NORM_TOLERANCE = 1e-12


class NormKind(Enum):
    """Norm under which codewords are normalized and distances are measured."""
    L1 = "l1"
    L2 = "l2"


@dataclass(frozen=True)
class CodeParameters:
    """Parameters (N, m, K, d, t) of a WSC family instance, with eta fixed to 1."""
    n: int
    m: int
    k: int
    d: float
    t: int
    norm: NormKind = NormKind.L2
    nonneg: bool = False

    def violations(self) -> List[str]:
        """List every violated constraint; empty when the parameters are valid."""
        problems = []
        if self.n < 1:
            problems.append(f"N must be >= 1 (got {self.n})")
        if self.m < 1:
            problems.append(f"m must be >= 1 (got {self.m})")
        if self.k < 1:
            problems.append(f"K must be >= 1 (got {self.k})")
        if self.t < 1:
            problems.append(f"t must be >= 1 (got {self.t})")
        if self.k > self.n:
            problems.append(f"K must not exceed N (got K={self.k}, N={self.n})")
        if not (0.0 < self.d < 1.0):
            problems.append(f"d must lie in (0, 1) (got {self.d})")
        if self.nonneg and self.norm is not NormKind.L1:
            problems.append("nonneg codes require the l1 norm")
        return problems


@dataclass(frozen=True)
class SparseIntegerVector:
    """Sparse integer vector b in B_t^N stored as ascending (index, value) pairs."""
    dimension: int
    entries: Tuple[Tuple[int, int], ...] = ()

    def __post_init__(self):
        cleaned = tuple(sorted((int(i), int(v)) for i, v in self.entries))
        object.__setattr__(self, "entries", cleaned)
        seen = set()
        for index, value in cleaned:
            if not 0 <= index < self.dimension:
                raise ParameterError(f"index {index} outside [0, {self.dimension})")
            if value == 0:
                raise ParameterError(f"stored value at index {index} must be nonzero")
            if index in seen:
                raise ParameterError(f"duplicate index {index}")
            seen.add(index)

    @classmethod
    def from_dict(cls, dimension: int, values: Dict[int, int]) -> "SparseIntegerVector":
        return cls(dimension, tuple((i, v) for i, v in values.items() if v != 0))

    @property
    def support_size(self) -> int:
        return len(self.entries)

    @property
    def support(self) -> Tuple[int, ...]:
        return tuple(i for i, _ in self.entries)

    @property
    def values(self) -> Tuple[int, ...]:
        return tuple(v for _, v in self.entries)

    @property
    def max_magnitude(self) -> int:
        return max((abs(v) for _, v in self.entries), default=0)

    def is_zero(self) -> bool:
        return not self.entries

    def as_dict(self) -> Dict[int, int]:
        return dict(self.entries)

    def to_dense(self) -> np.ndarray:
        dense = np.zeros(self.dimension, dtype=np.int64)
        for index, value in self.entries:
            dense[index] = value
        return dense

    def negated(self):
        return type(self)(self.dimension, tuple((i, -v) for i, v in self.entries))

    def permuted(self, permutation: Sequence[int]):
        """Relabel index i as permutation[i]."""
        return type(self)(self.dimension, tuple((permutation[i], v) for i, v in self.entries))

    def check_within(self, k: int, t: int) -> None:
        """Raise unless the vector lies in the l0 ball of radius k over B_t."""
        if self.support_size > k:
            raise ParameterError(f"support size {self.support_size} exceeds K={k}")
        if self.max_magnitude > t:
            raise ParameterError(f"entry magnitude {self.max_magnitude} exceeds t={t}")

    def to_json_dict(self) -> Dict[str, Any]:
        return {"n": self.dimension, "entries": [[i, v] for i, v in self.entries]}

    @classmethod
    def from_json_dict(cls, data: Dict[str, Any]):
        try:
            return cls(int(data["n"]), tuple((int(i), int(v)) for i, v in data["entries"]))
        except (KeyError, TypeError, ValueError) as e:
            raise ParameterError(f"malformed vector JSON: {e}") from e


@dataclass(frozen=True)
class DifferenceVector(SparseIntegerVector):
    """Nonzero difference b1 - b2 of two signals, entries in [-2t, 2t]."""

    def __post_init__(self):
        super().__post_init__()
        if not self.entries:
            raise ParameterError("a difference vector must have at least one nonzero entry")

    def weight_counts(self, t: int) -> Tuple[int, int]:
        """Return (#entries with |v| > t, #entries with 0 < |v| <= t)."""
        large = sum(1 for _, v in self.entries if abs(v) > t)
        return large, self.support_size - large

    def is_feasible(self, k: int, t: int) -> bool:
        """True iff the vector is realizable as b1 - b2 with b1, b2 in the l0 ball."""
        if self.max_magnitude > 2 * t:
            return False
        large, small = self.weight_counts(t)
        return 2 * large + small <= 2 * k

    def canonical_sign(self) -> "DifferenceVector":
        """Representative of {v, -v} whose lowest-index entry is positive."""
        return self if self.entries[0][1] > 0 else self.negated()


@dataclass(frozen=True, eq=False)
class Codebook:
    """m x N codeword matrix with unit-norm columns."""
    values: np.ndarray
    norm: NormKind
    nonneg: bool = False
    generator: str = "explicit"
    seed: Optional[int] = None

    def __post_init__(self):
        matrix = np.array(self.values, dtype=np.float64, copy=True)
        if matrix.ndim != 2 or matrix.shape[0] < 1 or matrix.shape[1] < 1:
            raise ParameterError(f"codebook must be a non-empty 2-D matrix (got shape {matrix.shape})")
        if not np.all(np.isfinite(matrix)):
            raise ParameterError("codebook entries must be finite")
        matrix.setflags(write=False)
        object.__setattr__(self, "values", matrix)

        norms = self.column_norms()
        bad = np.flatnonzero(np.abs(norms - 1.0) > COLUMN_NORM_TOLERANCE)
        if bad.size:
            raise ParameterError(
                f"column {int(bad[0])} has {self.norm.value} norm {norms[bad[0]]!r}, expected 1"
            )
        if self.nonneg and np.any(matrix < 0):
            raise ParameterError("nonneg codebook contains a negative entry")

    @property
    def m(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]

    def column_norms(self) -> np.ndarray:
        if self.norm is NormKind.L1:
            return np.array([math.fsum(np.abs(col)) for col in self.values.T])
        return np.array([math.sqrt(math.fsum(col * col)) for col in self.values.T])

    def permuted(self, permutation: Sequence[int]) -> "Codebook":
        """Codebook whose column permutation[i] is this codebook's column i."""
        matrix = np.empty_like(self.values)
        for source, target in enumerate(permutation):
            matrix[:, target] = self.values[:, source]
        return Codebook(matrix, self.norm, self.nonneg, self.generator, self.seed)

    def provenance(self) -> str:
        seed = "none" if self.seed is None else str(self.seed)
        return f"{self.generator}/seed={seed}"


@dataclass(frozen=True)
class DistanceCertificate:
    """Minimum superposition distance together with the difference achieving it."""
    value: float
    witness: Optional[DifferenceVector]
    norm: NormKind
    exhaustive: bool
    examined: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "value": self.value,
            "witness": self.witness.to_json_dict() if self.witness else None,
            "norm": self.norm.value,
            "exhaustive": self.exhaustive,
            "examined": str(self.examined),
        }


@dataclass(frozen=True)
class DistanceCheck:
    """Outcome of a threshold check; counterexample is set when the check fails."""
    holds: bool
    threshold: float
    counterexample: Optional[DifferenceVector]
    counterexample_value: Optional[float]
    examined: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "holds": self.holds,
            "threshold": self.threshold,
            "counterexample": self.counterexample.to_json_dict() if self.counterexample else None,
            "counterexample_value": self.counterexample_value,
            "examined": str(self.examined),
        }


@dataclass(frozen=True)
class DecodeResult:
    """Nearest superposition found by a decoder."""
    estimate: SparseIntegerVector
    residual: float
    certified: bool
    examined: int
    radius: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "estimate": self.estimate.to_json_dict(),
            "residual": self.residual,
            "certified": self.certified,
            "radius": self.radius,
            "examined": str(self.examined),
        }


@dataclass(frozen=True)
class RateBound:
    """A rate exponent (log K / cK)(1 + o) with its o-term reported separately."""
    value: float
    o_term: float
    tag: str

    @property
    def positive(self) -> bool:
        """True when the parenthesized factor 1 + o is positive."""
        return 1.0 + self.o_term > 0.0


@dataclass(frozen=True)
class PackingLimit:
    """Largest N passing the sphere packing predicate; capped above 2**63."""
    n_max: int
    capped: bool


@dataclass
class BoundSummary:
    """Evaluated rate and packing formulas for one parameter point."""
    k: int
    d: float
    t: int
    rate_ub_lp: RateBound
    rate_ub_l2: RateBound
    rate_lb_wesc: RateBound
    rate_lb_l1: RateBound
    rate_lb_ngl1: RateBound
    rate_lb_ngl1_24: RateBound
    esc_reference: Tuple[float, float]
    lam: float = 2.0
    mu_squared_bound: float = 0.0
    n: Optional[int] = None
    m: Optional[int] = None
    expected_xi_squared: Optional[float] = None
    sphere_packing_feasible: Optional[bool] = None
    improved_packing_feasible: Optional[bool] = None
    max_n_sphere_packing: Optional[PackingLimit] = None
    max_n_improved_packing: Optional[PackingLimit] = None
    delta: Optional[float] = None
    rate_lb_wesc_delta: Optional[RateBound] = None
    rate_lb_l1_delta: Optional[RateBound] = None
    count_signals: Optional[int] = None
    count_signals_2t_plus_1: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "K": self.k,
            "d": self.d,
            "t": self.t,
            "N": self.n,
            "m": self.m,
            "lambda": self.lam,
            "rate_ub_lp": self.rate_ub_lp.value,
            "o_ub_WSCs": self.rate_ub_lp.o_term,
            "rate_ub_l2": self.rate_ub_l2.value,
            "o_ub_Euclidean": self.rate_ub_l2.o_term,
            "rate_lb_wesc": self.rate_lb_wesc.value,
            "o_lb_Euclidean_main": self.rate_lb_wesc.o_term,
            "rate_lb_l1": self.rate_lb_l1.value,
            "o_lb_L1_WSC_2": self.rate_lb_l1.o_term,
            "rate_lb_ngl1": self.rate_lb_ngl1.value,
            "o_lb_ngL1WSC_2": self.rate_lb_ngl1.o_term,
            "rate_lb_ngl1_valid": self.rate_lb_ngl1.positive,
            "rate_lb_ngl1_24": self.rate_lb_ngl1_24.value,
            "o_lb_ngL1WSC_1": self.rate_lb_ngl1_24.o_term,
            "esc_lower": self.esc_reference[0],
            "esc_upper": self.esc_reference[1],
            "mu_squared_bound": self.mu_squared_bound,
            "expected_xi_squared": self.expected_xi_squared,
            "sphere_packing_feasible": self.sphere_packing_feasible,
            "improved_packing_feasible": self.improved_packing_feasible,
            "count_signals": None if self.count_signals is None else str(self.count_signals),
            "count_signals_2t_plus_1": (
                None if self.count_signals_2t_plus_1 is None else str(self.count_signals_2t_plus_1)
            ),
        }
        if self.max_n_sphere_packing is not None:
            data["max_n_sphere_packing"] = str(self.max_n_sphere_packing.n_max)
            data["max_n_sphere_packing_capped"] = self.max_n_sphere_packing.capped
        if self.max_n_improved_packing is not None:
            data["max_n_improved_packing"] = str(self.max_n_improved_packing.n_max)
            data["max_n_improved_packing_capped"] = self.max_n_improved_packing.capped
        if self.delta is not None:
            data["delta"] = self.delta
            data["rate_lb_wesc_delta"] = self.rate_lb_wesc_delta.value
            data["o_lb_Euclidean_1"] = self.rate_lb_wesc_delta.o_term
            data["rate_lb_l1_delta"] = self.rate_lb_l1_delta.value
            data["o_lb_L1_WSC_1"] = self.rate_lb_l1_delta.o_term
        return data


@dataclass
class ProbeReport:
    """One Monte Carlo experiment: empirical statistic against theoretical bounds."""
    name: str
    parameters: Dict[str, Any]
    trials: int
    seed: int
    statistic: float
    standard_error: float
    bounds: Dict[str, float] = field(default_factory=dict)
    primary_bound: Optional[str] = None
    is_probability: bool = True
    # standard errors of slack allowed above the primary bound
    slack_se: float = 3.0
    passed: bool = False
    notes: List[str] = field(default_factory=list)
    extra: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.trials < 1:
            raise ParameterError("a probe needs at least one trial")
        if self.is_probability and not 0.0 <= self.statistic <= 1.0:
            raise ParameterError(f"probability statistic {self.statistic} outside [0, 1]")

    @property
    def vacuous(self) -> bool:
        """A primary bound >= 1 on a [0, 1] quantity says nothing."""
        if self.primary_bound is None:
            return False
        return self.bounds[self.primary_bound] >= 1.0

    @property
    def informative_pass(self) -> bool:
        return self.passed and not self.vacuous

    def recompute_pass(self) -> bool:
        """Empirical <= bound + slack_se SE; probes without a bound keep their own verdict."""
        if self.primary_bound is None:
            return self.passed
        return self.statistic <= self.bounds[self.primary_bound] + self.slack_se * self.standard_error

    def to_dict(self) -> Dict[str, Any]:
        return {
            "probe": self.name,
            "parameters": self.parameters,
            "trials": self.trials,
            "seed": self.seed,
            "statistic": self.statistic,
            "standard_error": self.standard_error,
            "bounds": self.bounds,
            "primary_bound": self.primary_bound,
            "pass": self.passed,
            "vacuous": self.vacuous,
            "notes": self.notes,
            "extra": self.extra,
        }


def _check_scenario_fields(n: int, m: int, k: int, t: int, sigmas: Sequence[float], trials: int) -> None:
    if not 1 <= k <= n:
        raise ParameterError(f"need 1 <= K <= N (got K={k}, N={n})")
    if m < 1 or t < 1:
        raise ParameterError("m and t must be positive")
    if trials < 1:
        raise ParameterError("trials must be positive")
    if any(s < 0 for s in sigmas):
        raise ParameterError("noise levels must be nonnegative")


@dataclass
class AdderChannelConfig:
    """Multi-access adder channel: active users send integer amplitudes on unit-energy signatures."""
    n_users: int
    m: int
    k_max: int
    t: int
    sigma: float = 0.0
    trials: int = 1000
    seed: int = 0
    d: float = 0.1
    sigmas: List[float] = field(default_factory=list)
    max_attempts: int = 20
    max_signals: int = 200_000

    def __post_init__(self):
        _check_scenario_fields(self.n_users, self.m, self.k_max, self.t, [self.sigma, *self.sigmas], self.trials)

    def sweep(self) -> List[float]:
        return list(self.sigmas) if self.sigmas else [self.sigma]

    def parameters(self) -> CodeParameters:
        return CodeParameters(self.n_users, self.m, self.k_max, self.d, self.t, NormKind.L2, False)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "AdderChannelConfig":
        try:
            return cls(**data)
        except TypeError as e:
            raise ParameterError(f"invalid adder channel config: {e}") from e


@dataclass
class MicroarrayConfig:
    """Compressive sensing microarray: nonnegative unit-l1 probes, integer concentrations."""
    n_targets: int
    m: int
    k_max: int
    t: int
    sigma: float = 0.0
    trials: int = 1000
    seed: int = 0
    d: float = 0.1
    sigmas: List[float] = field(default_factory=list)
    restrict_nonneg: bool = True
    compare_unrestricted: bool = False
    max_attempts: int = 20
    max_signals: int = 200_000

    def __post_init__(self):
        _check_scenario_fields(self.n_targets, self.m, self.k_max, self.t, [self.sigma, *self.sigmas], self.trials)

    def sweep(self) -> List[float]:
        return list(self.sigmas) if self.sigmas else [self.sigma]

    def parameters(self) -> CodeParameters:
        return CodeParameters(self.n_targets, self.m, self.k_max, self.d, self.t, NormKind.L1, True)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "MicroarrayConfig":
        try:
            return cls(**data)
        except TypeError as e:
            raise ParameterError(f"invalid microarray config: {e}") from e


@dataclass
class SweepPoint:
    """Recovery statistics at one noise level."""
    sigma: float
    trials: int
    exact_recovery: float
    support_recovery: float
    exceed_rate: float
    analytic_exceed: Optional[float]
    noise_ratio_quantiles: Dict[str, float]
    exact_recovery_unrestricted: Optional[float] = None

    @property
    def exact_recovery_se(self) -> float:
        p = self.exact_recovery
        return math.sqrt(p * (1.0 - p) / self.trials)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "sigma": self.sigma,
            "trials": self.trials,
            "exact_recovery": self.exact_recovery,
            "exact_recovery_se": self.exact_recovery_se,
            "support_recovery": self.support_recovery,
            "exceed_rate": self.exceed_rate,
            "analytic_exceed": self.analytic_exceed,
            "noise_ratio_quantiles": self.noise_ratio_quantiles,
            "exact_recovery_unrestricted": self.exact_recovery_unrestricted,
        }


@dataclass
class ScenarioStatistics:
    """Scenario output: codebook provenance plus one row per sweep point."""
    scenario: str
    certified_distance: float
    attempts: int
    codebook_seed: Optional[int]
    rows: List[SweepPoint] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "scenario": self.scenario,
            "certified_distance": self.certified_distance,
            "radius": self.certified_distance / 2.0,
            "attempts": self.attempts,
            "codebook_seed": self.codebook_seed,
            "rows": [row.to_dict() for row in self.rows],
        }
