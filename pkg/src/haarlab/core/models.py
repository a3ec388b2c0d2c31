"""
Pydantic models for haarlab configuration and reports.

This module defines the lab configuration loaded from YAML, the per-run
experiment configuration assembled by the CLI, and the report types written to
JSON. Numerical value types (matrices, trees, weights) live next to the code
that computes with them; everything here is plain data that validates and
serializes.
"""

from enum import Enum
from typing import Any, Dict, List, NamedTuple, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from .dyadic import DyadicInterval


class LogLevel(str, Enum):
    """Logging levels."""

    DEBUG = "DEBUG"
    INFO = "INFO"
    WARNING = "WARNING"
    ERROR = "ERROR"
    CRITICAL = "CRITICAL"


class Subcommand(str, Enum):
    """Experiment entry points of the CLI."""

    A2 = "a2"
    NORM_SCAN = "norm-scan"
    CARLESON = "carleson"
    BELLMAN = "bellman"
    SCHUR = "schur"
    TRANSFER = "transfer"
    FUZZ = "fuzz"
    REPLAY = "replay"


class OperatorKind(str, Enum):
    MARTINGALE = "martingale"
    SHIFT = "shift"


class SymbolClass(str, Enum):
    """Random martingale symbol families for norm scans."""

    SIGNS = "signs"
    COMMUTING = "commuting"
    GENERAL = "general"


class ToleranceConfig(BaseModel):
    """Numerical tolerances."""

    psd: float = Field(1e-9, description="Relative PSD tolerance for inequality checks")
    hermitian: float = Field(1e-12, description="Absolute Hermitian symmetry tolerance")
    hpd_relative: float = Field(
        1e-12, description="Smallest admissible eigenvalue relative to the largest"
    )
    replay: float = Field(1e-12, description="Replay reproduction tolerance")

    @field_validator("psd", "hermitian", "hpd_relative", "replay")
    @classmethod
    def validate_nonnegative(cls, v):
        if v < 0:
            raise ValueError("tolerances must be nonnegative")
        return v


class LimitsConfig(BaseModel):
    """Size limits for dense and exhaustive computations."""

    max_dim: int = Field(8, description="Largest matrix dimension d")
    max_dense: int = Field(4096, description="Largest dense operator size 2^L * d")
    rank_one_max_size: int = Field(64, description="Largest rank-one alpha search")
    exhaustive_max_size: int = Field(16, description="Largest exhaustive pattern search")
    certified_max_size: int = Field(4, description="Largest certified lambda-norm size")
    transfer_max_p: int = Field(3, description="Largest cube dimension p")
    transfer_max_leaf_bits: int = Field(12, description="Largest p * cube depth")

    @field_validator("max_dim")
    @classmethod
    def validate_max_dim(cls, v):
        if v < 1 or v > 64:
            raise ValueError("max_dim must be between 1 and 64")
        return v


class ConstantsConfig(BaseModel):
    """Configured constants that are never computed."""

    grothendieck: float = Field(
        1.782, description="Complex Grothendieck constant K_G (upper estimate)"
    )

    @field_validator("grothendieck")
    @classmethod
    def validate_grothendieck(cls, v):
        if v < 1:
            raise ValueError("the Grothendieck constant is at least 1")
        return v


class SamplingConfig(BaseModel):
    """Sampling resolutions."""

    theta_samples: int = Field(33, description="Segment samples including endpoints")
    alpha_scan_steps: int = Field(32, description="Convex-combination scan steps")
    phase_resolution: int = Field(64, description="Phase grid for complex quadratic forms")
    power_iterations: int = Field(500, description="Power-iteration cross-check steps")

    @field_validator("theta_samples")
    @classmethod
    def validate_theta_samples(cls, v):
        if v < 2:
            raise ValueError("theta_samples must include both endpoints")
        return v


class RuntimeConfig(BaseModel):
    workers: int = Field(1, description="Worker processes for trial execution")

    @field_validator("workers")
    @classmethod
    def validate_workers(cls, v):
        if v < 1:
            raise ValueError("workers must be at least 1")
        return v


class LoggingConfig(BaseModel):
    """Logging configuration."""

    console_level: LogLevel = Field(LogLevel.INFO, description="Console log level")
    format: str = Field(
        "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        description="Log format string",
    )
    date_format: str = Field("%Y-%m-%d %H:%M:%S", description="Date format string")


class LabConfig(BaseModel):
    """Complete lab configuration."""

    tolerances: ToleranceConfig = Field(default_factory=ToleranceConfig)
    limits: LimitsConfig = Field(default_factory=LimitsConfig)
    constants: ConstantsConfig = Field(default_factory=ConstantsConfig)
    sampling: SamplingConfig = Field(default_factory=SamplingConfig)
    runtime: RuntimeConfig = Field(default_factory=RuntimeConfig)
    logging: LoggingConfig = Field(default_factory=LoggingConfig)


class ProfileConfig(BaseModel):
    """Configuration profile, e.g. a quick CI profile and a thorough one."""

    name: str = Field(description="Profile name")
    description: Optional[str] = Field(None, description="Profile description")
    inherits_from: Optional[str] = Field(
        None, description="Parent profile to inherit from"
    )
    lab_config: LabConfig = Field(
        default_factory=LabConfig, description="Lab configuration for this profile"
    )


class ExperimentConfig(BaseModel):
    """Everything one CLI run depends on; equal configs give equal artifacts."""

    subcommand: Subcommand = Field(description="Experiment to run")
    seed: int = Field(0, description="64-bit master seed")
    trials: int = Field(100, description="Number of trials")
    d: int = Field(2, description="Matrix dimension")
    depth: int = Field(4, description="Dyadic tree depth")
    k: int = Field(2, description="Complexity or subtree depth")
    m: int = Field(0, description="Haar shift parameter m")
    n: int = Field(1, description="Haar shift parameter n")
    p: int = Field(2, description="Cube dimension for transfer runs")
    target_x: float = Field(4.0, description="Target A2 characteristic")
    tol: float = Field(1e-9, description="Inequality tolerance")
    check: Optional[str] = Field(None, description="Check selected within a module")
    op: OperatorKind = Field(OperatorKind.MARTINGALE, description="norm-scan operator")
    symbol_class: SymbolClass = Field(SymbolClass.SIGNS, description="Symbol family")
    t_values: List[float] = Field(
        default_factory=lambda: [0.25, 0.5, 1.0], description="Carleson t values"
    )
    suites: List[str] = Field(default_factory=list, description="Fuzz suites to run")
    csv_path: Optional[str] = Field(None, description="CSV output path")
    json_path: Optional[str] = Field(None, description="JSON output path")
    weight_path: Optional[str] = Field(None, description="Weight JSON input")
    spec_path: Optional[str] = Field(None, description="Shift spec JSON input")
    workers: int = Field(1, description="Worker processes")

    @field_validator("seed")
    @classmethod
    def validate_seed(cls, v):
        if not 0 <= v < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        return v

    @field_validator("trials", "depth", "m", "n")
    @classmethod
    def validate_nonnegative(cls, v):
        if v < 0:
            raise ValueError("must be nonnegative")
        return v

    @field_validator("d", "k", "p", "workers")
    @classmethod
    def validate_positive(cls, v):
        if v < 1:
            raise ValueError("must be at least 1")
        return v

    @field_validator("target_x")
    @classmethod
    def validate_target_x(cls, v):
        if v < 1:
            raise ValueError("target_x must be at least 1")
        return v

    @field_validator("tol")
    @classmethod
    def validate_tol(cls, v):
        if v < 0:
            raise ValueError("tol must be nonnegative")
        return v

    @field_validator("t_values")
    @classmethod
    def validate_t_values(cls, v):
        if not v or any(not 0 < t <= 1 for t in v):
            raise ValueError("t values must lie in (0, 1]")
        return v


class InequalityCheck(NamedTuple):
    """Both sides of an inequality lhs <= rhs."""

    lhs: float
    rhs: float

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    def holds(self, tol: float = 1e-9) -> bool:
        """lhs <= rhs + tol * max(1, |lhs|, |rhs|)."""
        scale = max(1.0, abs(self.lhs), abs(self.rhs))
        return self.lhs <= self.rhs + tol * scale


class A2Report(BaseModel):
    """Dyadic A2 characteristic with the node attaining it."""

    characteristic: float = Field(description="max over nodes of |<W>^{1/2}<W^-1>^{1/2}|^2")
    witness_level: int = Field(description="Level of the maximizing node")
    witness_index: int = Field(description="Index of the maximizing node")
    per_level_maxima: List[float] = Field(description="Maximum per tree level")

    @field_validator("characteristic")
    @classmethod
    def validate_characteristic(cls, v):
        if v < 1 - 1e-9:
            raise ValueError("an A2 characteristic is at least 1")
        return v

    @property
    def witness(self) -> DyadicInterval:
        return DyadicInterval(self.witness_level, self.witness_index)


class NodeDynamics(BaseModel):
    """Per-node quantities of the modified dynamics for one sign."""

    level: int
    index: int
    sign: str = Field(description="'+' or '-'")
    a: Optional[float] = Field(None, description="1 +/- alpha at leaves")
    theta: Optional[float] = Field(None, description="Weight relative to the parent")
    in_domain: bool = Field(True, description="A_I in D_{25X/9}")
    segment_ok: Optional[bool] = Field(None, description="Child segment in D_{100X/9}")
    convexity_residual: float = Field(0.0, description="|A_I - theta A_I+ - theta A_I-|")


class DynamicsReport(BaseModel):
    """Bounds and identities of the modified dynamics on a k-level subtree."""

    k: int
    x: float = Field(description="Domain parameter X of the input points")
    a_bounds_ok: bool
    theta_bounds_ok: bool
    theta_sum_ok: bool
    product_identity_residual: float
    convexity_residual: float
    membership_ok: bool
    segments_ok: bool
    nodes: List[NodeDynamics] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return (
            self.a_bounds_ok
            and self.theta_bounds_ok
            and self.theta_sum_ok
            and self.membership_ok
            and self.segments_ok
        )


class Counterexample(BaseModel):
    """A failing (or worst) instance, replayable from its serialized inputs."""

    module: str
    operation: str
    suite: str
    seed: int
    trial: int
    inputs: Dict[str, Any] = Field(description="Encoded inputs, see serialization")
    observed: float = Field(description="Observed value of the checked quantity")
    bound: float = Field(description="Bound it was checked against")
    tolerance: float
    details: Dict[str, Any] = Field(default_factory=dict)


class FuzzReport(BaseModel):
    """Outcome of one suite of seeded trials."""

    suite: str
    module: str
    operation: str
    seed: int
    trials: int
    violations: int = 0
    errors: int = 0
    max_ratio: Optional[float] = Field(None, description="Largest observed / bound")
    max_ratio_by_dim: Dict[str, float] = Field(default_factory=dict)
    worst: Optional[Counterexample] = None
    failures: List[Counterexample] = Field(default_factory=list)
    rows: List[Dict[str, Any]] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.violations == 0 and self.errors == 0


class RunSummary(BaseModel):
    """Aggregate of several suites, mirrored in the --json output."""

    overall_success: bool
    suites: Dict[str, FuzzReport] = Field(default_factory=dict)
    summary: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def validate_overall(self):
        if self.overall_success and any(not r.passed for r in self.suites.values()):
            raise ValueError("overall_success contradicts suite results")
        return self
