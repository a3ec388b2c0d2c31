"""
Core modules for haarlab.

This package contains the numerical core: Hermitian linear algebra, the dyadic
model, matrix weights and their characteristic, martingale transforms and Haar
shifts, the Bellman domain, Carleson embeddings, Schur multipliers and the
cube transfer, plus the seeded suite runner and configuration.
"""

from .bellman import BellmanPoint, CarlesonBellmanPoint, carleson_bellman, modified_dynamics
from .carleson import CarlesonSequence, embedding_check, telescoping_check
from .config_manager import ConfigManager
from .dyadic import DyadicInterval, GridFunction, MatrixWeight, haar_analyze, haar_synthesize
from .exceptions import (
    ConfigurationError,
    DimensionTooLargeError,
    DomainViolationError,
    HaarLabError,
    NotPositiveDefiniteError,
    PreconditionViolatedError,
    ReportIOError,
    SearchFailedError,
    SizeTooLargeForCertificationError,
    ValidationError,
)
from .fuzz import FuzzOrchestrator, run_fuzz
from .linalg import HermMatrix, HpdMatrix
from .models import (
    A2Report,
    Counterexample,
    ExperimentConfig,
    FuzzReport,
    LabConfig,
    LoggingConfig,
    LogLevel,
    OperatorKind,
    ProfileConfig,
    RunSummary,
    SymbolClass,
)
from .operators import HaarShiftSpec, MartingaleSymbol, weighted_norm
from .schur import LambdaMatrix, alpha_search_rank_one, lambda_norms
from .suite import Suite, TrialOutcome, run_suite
from .transfer import CubeGrid, CubeIntervalMap, build_map
from .weights import a2_characteristic, random_a2_weight, two_point_weight

__all__ = [
    # Linear algebra and the dyadic model
    "HermMatrix",
    "HpdMatrix",
    "DyadicInterval",
    "GridFunction",
    "MatrixWeight",
    "haar_analyze",
    "haar_synthesize",
    # Weights and operators
    "a2_characteristic",
    "random_a2_weight",
    "two_point_weight",
    "MartingaleSymbol",
    "HaarShiftSpec",
    "weighted_norm",
    # Bellman, Carleson, Schur, transfer
    "BellmanPoint",
    "CarlesonBellmanPoint",
    "carleson_bellman",
    "modified_dynamics",
    "CarlesonSequence",
    "embedding_check",
    "telescoping_check",
    "LambdaMatrix",
    "alpha_search_rank_one",
    "lambda_norms",
    "CubeGrid",
    "CubeIntervalMap",
    "build_map",
    # Suites and orchestration
    "Suite",
    "TrialOutcome",
    "run_suite",
    "FuzzOrchestrator",
    "run_fuzz",
    "ConfigManager",
    # Models
    "A2Report",
    "Counterexample",
    "ExperimentConfig",
    "FuzzReport",
    "LabConfig",
    "LoggingConfig",
    "LogLevel",
    "OperatorKind",
    "ProfileConfig",
    "RunSummary",
    "SymbolClass",
    # Exceptions
    "HaarLabError",
    "ConfigurationError",
    "ValidationError",
    "ReportIOError",
    "NotPositiveDefiniteError",
    "DimensionTooLargeError",
    "DomainViolationError",
    "PreconditionViolatedError",
    "SearchFailedError",
    "SizeTooLargeForCertificationError",
]
