"""
Exception classes for haarlab.

This module defines all custom exceptions used throughout haarlab, providing
a single error hierarchy with machine-readable codes and structured details
that end up in counterexample dumps and CLI output.
"""

from typing import Any, Dict, List, Optional, Sequence, Union


class HaarLabError(Exception):
    """Base exception for all haarlab errors."""

    def __init__(
        self,
        message: str,
        error_code: Optional[str] = None,
        details: Optional[Dict[str, Any]] = None,
    ):
        """Initialize HaarLabError.

        Args:
            message: Human-readable error message
            error_code: Machine-readable error code for programmatic handling
            details: Additional error details and context
        """
        super().__init__(message)
        self.message = message
        self.error_code = error_code or self.__class__.__name__
        self.details = details or {}

    def __str__(self) -> str:
        """Return string representation of the error."""
        if self.details:
            return f"{self.message} (Details: {self.details})"
        return self.message

    def to_dict(self) -> Dict[str, Any]:
        """Convert error to dictionary for serialization."""
        return {
            "error_type": self.__class__.__name__,
            "error_code": self.error_code,
            "message": self.message,
            "details": self.details,
        }


class ConfigurationError(HaarLabError):
    """Raised when a configuration file or experiment config is invalid."""

    def __init__(
        self,
        message: str,
        config_path: Optional[str] = None,
        validation_errors: Optional[List[str]] = None,
    ):
        """Initialize ConfigurationError.

        Args:
            message: Error message
            config_path: Path to the configuration file with issues
            validation_errors: List of specific validation errors
        """
        details: Dict[str, Any] = {}
        if config_path:
            details["config_path"] = config_path
        if validation_errors:
            details["validation_errors"] = validation_errors

        super().__init__(message, "CONFIG_ERROR", details)
        self.config_path = config_path
        self.validation_errors = validation_errors or []


class ValidationError(HaarLabError):
    """Raised when input validation fails."""

    def __init__(
        self,
        message: str,
        field_name: Optional[str] = None,
        field_value: Optional[Any] = None,
        expected_type: Optional[str] = None,
    ):
        """Initialize ValidationError.

        Args:
            message: Error message
            field_name: Name of the field that failed validation
            field_value: Value that failed validation
            expected_type: Expected type or format
        """
        details: Dict[str, Any] = {}
        if field_name:
            details["field_name"] = field_name
        if field_value is not None:
            details["field_value"] = str(field_value)
        if expected_type:
            details["expected_type"] = expected_type

        super().__init__(message, "VALIDATION_ERROR", details)
        self.field_name = field_name
        self.field_value = field_value
        self.expected_type = expected_type


class ReportIOError(HaarLabError):
    """Raised when a weight, spec, report or counterexample file cannot be used."""

    def __init__(self, message: str, path: Optional[str] = None):
        details: Dict[str, Any] = {}
        if path:
            details["path"] = path
        super().__init__(message, "IO_ERROR", details)
        self.path = path


class NotPositiveDefiniteError(HaarLabError):
    """Raised when a matrix that must be positive definite is not."""

    def __init__(
        self,
        message: str,
        min_eigenvalue: Optional[float] = None,
        max_eigenvalue: Optional[float] = None,
    ):
        """Initialize NotPositiveDefiniteError.

        Args:
            message: Error message
            min_eigenvalue: Smallest eigenvalue found
            max_eigenvalue: Largest eigenvalue found
        """
        details: Dict[str, Any] = {}
        if min_eigenvalue is not None:
            details["min_eigenvalue"] = float(min_eigenvalue)
        if max_eigenvalue is not None:
            details["max_eigenvalue"] = float(max_eigenvalue)

        super().__init__(message, "NOT_POSITIVE_DEFINITE", details)
        self.min_eigenvalue = min_eigenvalue
        self.max_eigenvalue = max_eigenvalue


class ShapeMismatchError(HaarLabError):
    """Raised when operands have incompatible shapes."""

    def __init__(
        self,
        message: str,
        expected: Optional[Union[int, Sequence[int]]] = None,
        found: Optional[Union[int, Sequence[Any]]] = None,
    ):
        details: Dict[str, Any] = {}
        if expected is not None:
            details["expected"] = [expected] if isinstance(expected, int) else list(expected)
        if found is not None:
            details["found"] = [found] if isinstance(found, int) else list(found)
        super().__init__(message, "SHAPE_MISMATCH", details)


class OutOfTreeError(HaarLabError):
    """Raised when a dyadic node is outside the finite tree or has no children."""

    def __init__(
        self,
        message: str,
        level: Optional[int] = None,
        index: Optional[int] = None,
        depth: Optional[int] = None,
    ):
        """Initialize OutOfTreeError.

        Args:
            message: Error message
            level: Level of the offending node
            index: Index of the offending node
            depth: Depth of the tree it was looked up in
        """
        details: Dict[str, Any] = {}
        if level is not None:
            details["level"] = level
        if index is not None:
            details["index"] = index
        if depth is not None:
            details["depth"] = depth

        super().__init__(message, "OUT_OF_TREE", details)
        self.level = level
        self.index = index
        self.depth = depth


class MissingCoefficientError(HaarLabError):
    """Raised when Haar synthesis is missing the coefficient of an internal node."""

    def __init__(self, message: str, level: int, index: int):
        super().__init__(
            message, "MISSING_COEFFICIENT", {"level": level, "index": index}
        )
        self.level = level
        self.index = index


class DepthExceededError(HaarLabError):
    """Raised when an operator reaches below the leaves of the tree."""

    def __init__(
        self, message: str, required_depth: Optional[int] = None, depth: Optional[int] = None
    ):
        details: Dict[str, Any] = {}
        if required_depth is not None:
            details["required_depth"] = required_depth
        if depth is not None:
            details["depth"] = depth
        super().__init__(message, "DEPTH_EXCEEDED", details)


class IndexOutOfRangeError(HaarLabError):
    """Raised when a slice index is outside [0, k)."""

    def __init__(self, message: str, index: int, upper: int):
        super().__init__(message, "INDEX_OUT_OF_RANGE", {"index": index, "upper": upper})
        self.index = index
        self.upper = upper


class EigenIndexOutOfRangeError(IndexOutOfRangeError):
    """Raised when an eigenprojection index is not below the dimension."""

    def __init__(self, message: str, index: int, dim: int):
        super().__init__(message, index, dim)
        self.error_code = "EIGEN_INDEX_OUT_OF_RANGE"


class DimensionTooLargeError(HaarLabError):
    """Raised when a dense computation would exceed the configured size."""

    def __init__(self, message: str, size: int, limit: int):
        super().__init__(message, "DIMENSION_TOO_LARGE", {"size": size, "limit": limit})
        self.size = size
        self.limit = limit


class BudgetExceededError(DimensionTooLargeError):
    """Raised when a cube-to-interval map would exceed its leaf budget."""

    def __init__(self, message: str, size: int, limit: int):
        super().__init__(message, size, limit)
        self.error_code = "BUDGET_EXCEEDED"


class DomainViolationError(HaarLabError):
    """Raised when a point lies outside the domain an operation requires."""

    def __init__(
        self,
        message: str,
        quantity: Optional[str] = None,
        value: Optional[float] = None,
        limit: Optional[float] = None,
    ):
        """Initialize DomainViolationError.

        Args:
            message: Error message
            quantity: Name of the violated quantity
            value: Observed value
            limit: Allowed limit
        """
        details: Dict[str, Any] = {}
        if quantity:
            details["quantity"] = quantity
        if value is not None:
            details["value"] = float(value)
        if limit is not None:
            details["limit"] = float(limit)

        super().__init__(message, "DOMAIN_VIOLATION", details)
        self.quantity = quantity
        self.value = value
        self.limit = limit


class InfeasibleMomentsError(DomainViolationError):
    """Raised when (f_avg, F) violates the Cauchy-Schwarz constraint."""

    def __init__(self, message: str, value: float, limit: float):
        super().__init__(message, "F", value, limit)
        self.error_code = "INFEASIBLE_MOMENTS"


class GridTooCoarseError(HaarLabError):
    """Raised when the moment constraints leave no nonzero leaf function."""

    def __init__(self, message: str, leaves: int, dim: int):
        super().__init__(message, "GRID_TOO_COARSE", {"leaves": leaves, "dim": dim})


class PreconditionViolatedError(HaarLabError):
    """Raised when inputs fail a documented precondition."""

    def __init__(self, message: str, condition: Optional[str] = None, **context: Any):
        details: Dict[str, Any] = dict(context)
        if condition:
            details["condition"] = condition
        super().__init__(message, "PRECONDITION_VIOLATED", details)
        self.condition = condition


class DynamicsViolatedError(PreconditionViolatedError):
    """Raised when a point tree does not satisfy the martingale midpoint identity."""

    def __init__(self, message: str, level: int, index: int, residual: float):
        super().__init__(
            message,
            "martingale_midpoint",
            level=level,
            index=index,
            residual=float(residual),
        )
        self.error_code = "DYNAMICS_VIOLATED"


class MidpointMismatchError(PreconditionViolatedError):
    """Raised when a parent point is not the midpoint of its children."""

    def __init__(self, message: str, field: str, residual: float):
        super().__init__(message, "midpoint", field=field, residual=float(residual))
        self.error_code = "MIDPOINT_MISMATCH"


class ConditionViolatedError(PreconditionViolatedError):
    """Raised when a sequence fails the matrix Carleson condition."""

    def __init__(self, message: str, level: int, index: int, excess: float):
        super().__init__(
            message, "carleson", level=level, index=index, excess=float(excess)
        )
        self.error_code = "CONDITION_VIOLATED"


class SearchFailedError(HaarLabError):
    """Raised when an extremal sequence search misses a guaranteed bound."""

    def __init__(self, message: str, achieved: float, required: float):
        super().__init__(
            message,
            "SEARCH_FAILED",
            {"achieved": float(achieved), "required": float(required)},
        )


class SizeTooLargeForCertificationError(HaarLabError):
    """Raised in strict mode when certified norm enclosures are unavailable."""

    def __init__(self, message: str, size: int, limit: int):
        super().__init__(
            message, "SIZE_TOO_LARGE_FOR_CERTIFICATION", {"size": size, "limit": limit}
        )
