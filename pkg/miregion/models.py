import math
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

Vector3 = tuple[float, float, float]

StructuralName = Literal[
    "indep_x",  # U independent of X
    "indep_y",  # U independent of Y
    "markov_xuy",  # X - U - Y
    "markov_xyu",  # X - Y - U, channel depends on y only
    "markov_uxy",  # U - X - Y, channel depends on x only
    "det_x",  # H(X|Y,U) = 0
    "det_y",  # H(Y|X,U) = 0
    "func_y",  # H(U|Y) = 0
    "func_x",  # H(U|X) = 0
]


class OptimizerConfig(BaseModel):
    """Local-search settings for every optimization over channels p(u|x,y).

    u_size=None means the cardinality bound |X|*|Y|+2.
    """

    u_size: Optional[int] = Field(default=None, ge=1)
    allow_large_u: bool = False
    restarts: int = Field(default=64, ge=1)
    max_iterations: int = Field(default=500, ge=1)
    tolerance: float = Field(default=1e-9, gt=0.0)
    constraint_tolerance: float = Field(default=1e-9, gt=0.0)
    # penalty-only constraints (Markov X-U-Y, determinism) cannot be polished exactly
    entropic_tolerance: float = Field(default=1e-5, gt=0.0)
    penalty_schedule: list[float] = Field(default_factory=lambda: [1.0, 10.0, 100.0, 1000.0])
    multiplier_rounds: int = Field(default=3, ge=0)
    # quasi-Newton passes after the schedule when Markov or determinism constraints are active
    refine_rounds: int = Field(default=3, ge=0)
    argmax_tolerance: float = Field(default=1e-6, gt=0.0)
    deterministic_seeds: int = Field(default=8, ge=0)
    seed_enumeration_cap: int = Field(default=20000, ge=1)
    stable_tolerance: float = Field(default=1e-6, gt=0.0)
    seed: int = 0
    threads: int = Field(default=1, ge=1)

    @field_validator("penalty_schedule")
    @classmethod
    def _positive_increasing(cls, v: list[float]) -> list[float]:
        if not v or any(w <= 0 for w in v):
            raise ValueError("penalty_schedule must be a nonempty list of positive weights")
        if any(b < a for a, b in zip(v, v[1:])):
            raise ValueError("penalty_schedule must be nondecreasing")
        return v


class WitnessConfig(BaseModel):
    # None -> epsilon_fraction of the minimum relevant cell mass
    epsilon: Optional[float] = Field(default=None, gt=0.0)
    epsilon_fraction: float = Field(default=0.25, gt=0.0, le=0.25)
    quantization: int = Field(default=64, ge=2)
    cycle_tolerance: float = Field(default=1e-9, gt=0.0)


class RegionConfig(BaseModel):
    subdivision_level: int = Field(default=2, ge=0, le=4)
    include_table_directions: bool = True
    restarts_per_direction: int = Field(default=8, ge=1)
    enumeration_u_size: int = Field(default=4, ge=1)
    membership_tolerance: float = Field(default=1e-7, gt=0.0)
    membership_rounds: int = Field(default=12, ge=1)
    boundary_band: float = Field(default=1e-6, gt=0.0)
    direction_set_version: str = "icosphere-2+named-v1"


class LimitsConfig(BaseModel):
    product_states: int = Field(default=64, ge=1)
    graph_vertices: int = Field(default=20, ge=1)
    enumeration: int = Field(default=10_000_000, ge=1)
    partition_alphabet: int = Field(default=12, ge=1)
    oracle_cells: int = Field(default=4, ge=1)
    oracle_min_step: float = Field(default=0.005, gt=0.0)
    oracle_tolerance: float = Field(default=1e-7, gt=0.0)
    oracle_candidate_tolerance: float = Field(default=5e-3, gt=0.0)
    oracle_candidates: int = Field(default=64, ge=1)
    bvn_u_size: int = Field(default=4096, ge=1)


class Config(BaseModel):
    optimizer: OptimizerConfig = Field(default_factory=OptimizerConfig)
    witness: WitnessConfig = Field(default_factory=WitnessConfig)
    region: RegionConfig = Field(default_factory=RegionConfig)
    limits: LimitsConfig = Field(default_factory=LimitsConfig)


def _check_vector(v: Vector3, allow_zero: bool) -> Vector3:
    if not all(math.isfinite(c) for c in v):
        raise ValueError("direction must be finite")
    if not allow_zero and all(c == 0 for c in v):
        raise ValueError("direction must not be all zero")
    return v


class ObjectiveSpec(BaseModel):
    """Linear objective b . v on the point (I(X;U), I(Y;U), I(X,Y;U))."""

    model_config = ConfigDict(frozen=True)

    b: Vector3
    sense: Literal["maximize", "minimize"] = "maximize"

    @field_validator("b")
    @classmethod
    def _finite_nonzero(cls, v: Vector3) -> Vector3:
        return _check_vector(v, allow_zero=False)


class LinearConstraint(BaseModel):
    model_config = ConfigDict(frozen=True)

    a: Vector3
    relation: Literal["<=", "==", ">="]
    bound: float

    @field_validator("a")
    @classmethod
    def _finite(cls, v: Vector3) -> Vector3:
        return _check_vector(v, allow_zero=False)


class ConstraintSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    linear: tuple[LinearConstraint, ...] = ()
    structural: tuple[StructuralName, ...] = ()

    @field_validator("structural")
    @classmethod
    def _dedupe(cls, v: tuple[str, ...]) -> tuple[str, ...]:
        return tuple(sorted(set(v)))

    @property
    def is_empty(self) -> bool:
        return not self.linear and not self.structural


class CurveRequest(BaseModel):
    quantity: Literal["information-bottleneck", "privacy-funnel", "channel-synthesis"]
    t_grid: list[float]
    config: OptimizerConfig = Field(default_factory=OptimizerConfig)

    @field_validator("t_grid")
    @classmethod
    def _sorted_nonnegative(cls, v: list[float]) -> list[float]:
        if any(t < 0 for t in v):
            raise ValueError("t-grid values must be >= 0")
        if any(b < a for a, b in zip(v, v[1:])):
            raise ValueError("t-grid must be sorted")
        return v


class PmfDocument(BaseModel):
    """On-disk JSON pmf: {"x_alphabet": [...], "y_alphabet": [...], "pmf": [[...]]}."""

    x_alphabet: list[str]
    y_alphabet: list[str]
    pmf: list[list[float]]


class RunManifest(BaseModel):
    input: Optional[str] = None
    command: str
    config: dict
    tool_version: str
    direction_set_version: str
    stages: dict[str, float] = Field(default_factory=dict)
