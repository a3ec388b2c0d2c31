"""
haarlab - a desk-scale lab for matrix-weighted dyadic harmonic analysis

Seeded, reproducible experiments on matrix A2 weights, martingale transforms,
Haar shifts, Bellman functions, Carleson embeddings and Schur multipliers on
a finite dyadic tree.

Key Features:
- Exact Haar analysis and synthesis of vector-valued grid functions
- Matrix A2 characteristic with witness, two-point weights, moment inversion
- Weighted operator norms of martingale transforms and Haar shifts
- Bellman domain segments, modified dynamics and the Carleson Bellman function
- Matrix Carleson embedding and Schur multiplier norm checks
- Deterministic fuzz suites with replayable counterexamples

Example Usage:
    >>> from haarlab import FuzzOrchestrator
    >>> summary = FuzzOrchestrator().run(seed=0, trials=10)
    >>> print(f"Fuzz run passed: {summary.overall_success}")

CLI Usage:
    $ haarlab a2 --d 2 --depth 6       # A2 characteristic of a random weight
    $ haarlab norm-scan --op martingale  # Weighted norms by A2 bucket
    $ haarlab bellman --check dynamics # Bellman property checks
    $ haarlab fuzz --trials 100        # Every suite, one seed
    $ haarlab-fuzz replay failures.json
"""

from .__version__ import (
    CSV_SCHEMA,
    FEATURES,
    RNG_ALGORITHM,
    __version__,
    __version_info__,
    get_version,
    get_version_info,
    is_feature_enabled,
)
from .core.config_manager import ConfigManager

# Exceptions
from .core.exceptions import (
    ConfigurationError,
    DomainViolationError,
    HaarLabError,
    NotPositiveDefiniteError,
    PreconditionViolatedError,
    ValidationError,
)

# Core components
from .core.dyadic import DyadicInterval, GridFunction, MatrixWeight
from .core.fuzz import FuzzOrchestrator
from .core.linalg import HermMatrix, HpdMatrix

# Configuration and results
from .core.models import Counterexample, FuzzReport, LabConfig, RunSummary
from .core.operators import HaarShiftSpec, MartingaleSymbol
from .core.weights import a2_characteristic

__all__ = [
    # Version information
    "__version__",
    "__version_info__",
    "get_version",
    "get_version_info",
    "is_feature_enabled",
    "FEATURES",
    "RNG_ALGORITHM",
    "CSV_SCHEMA",
    # Core classes
    "FuzzOrchestrator",
    "ConfigManager",
    "HermMatrix",
    "HpdMatrix",
    "DyadicInterval",
    "GridFunction",
    "MatrixWeight",
    "MartingaleSymbol",
    "HaarShiftSpec",
    "a2_characteristic",
    # Exceptions
    "HaarLabError",
    "ConfigurationError",
    "ValidationError",
    "NotPositiveDefiniteError",
    "DomainViolationError",
    "PreconditionViolatedError",
    # Models
    "LabConfig",
    "FuzzReport",
    "RunSummary",
    "Counterexample",
]

# Package metadata
__title__ = "haarlab"
__description__ = "Desk-scale lab for matrix-weighted dyadic harmonic analysis"
__license__ = "MIT"

# Compatibility check
import sys

from .__version__ import MINIMUM_PYTHON_VERSION

if sys.version_info < MINIMUM_PYTHON_VERSION:
    raise RuntimeError(
        f"haarlab requires Python {'.'.join(map(str, MINIMUM_PYTHON_VERSION))} "
        f"or higher. You are using Python {sys.version_info.major}.{sys.version_info.minor}."
    )
