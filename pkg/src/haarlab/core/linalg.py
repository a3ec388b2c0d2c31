"""
Small dense complex Hermitian matrix algebra.

Every other module builds on the two value types defined here: ``HermMatrix``
for d x d complex Hermitian matrices and ``HpdMatrix`` for the positive
definite ones, which carry a cached eigendecomposition. Square roots, inverses
and powers go through that eigendecomposition; eigenvalues below
``HPD_RELATIVE_TOL`` times the largest one are rejected rather than clamped.

The ``stack_*`` helpers apply the same operations to arrays of shape
(..., d, d) and are what the dyadic tree code uses on whole levels at once.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
import scipy.linalg

from .exceptions import NotPositiveDefiniteError, ShapeMismatchError, ValidationError

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-12
HPD_RELATIVE_TOL = 1e-12
DEFAULT_PSD_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class HermMatrix:
    """A d x d complex Hermitian matrix, immutable after construction."""

    entries: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.entries, dtype=np.complex128)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
            raise ShapeMismatchError(
                "Hermitian matrix must be square and non-empty", found=arr.shape
            )
        if not np.all(np.isfinite(arr)):
            raise ValidationError("Matrix has non-finite entries", field_name="entries")

        scale = max(1.0, float(np.max(np.abs(arr))))
        asymmetry = float(np.max(np.abs(arr - arr.conj().T)))
        if asymmetry > HERMITIAN_TOL * scale:
            raise ValidationError(
                f"Matrix is not Hermitian (asymmetry {asymmetry:.3e})",
                field_name="entries",
                expected_type="Hermitian matrix",
            )

        arr = (arr + arr.conj().T) / 2
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def dim(self) -> int:
        return int(self.entries.shape[0])

    def __array__(self, dtype=None, copy=None) -> np.ndarray:
        if dtype is None:
            return self.entries
        return self.entries.astype(dtype)

    def __add__(self, other: "MatrixLike") -> "HermMatrix":
        return HermMatrix(self.entries + as_array(other))

    def __sub__(self, other: "MatrixLike") -> "HermMatrix":
        return HermMatrix(self.entries - as_array(other))

    def __mul__(self, scalar: float) -> "HermMatrix":
        return HermMatrix(self.entries * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "HermMatrix":
        return HermMatrix(-self.entries)

    def eigenvalues(self) -> np.ndarray:
        """Real eigenvalues in descending order."""
        return scipy.linalg.eigvalsh(self.entries)[::-1]

    def to_hpd(self) -> "HpdMatrix":
        return HpdMatrix(self.entries)

    @classmethod
    def identity(cls, dim: int) -> "HermMatrix":
        return cls(np.eye(dim))

    @classmethod
    def diag(cls, values) -> "HermMatrix":
        return cls(np.diag(np.asarray(values, dtype=float)))


@dataclass(frozen=True, eq=False)
class HpdMatrix(HermMatrix):
    """A Hermitian positive definite matrix with cached eigendecomposition.

    Eigenvalues are stored in descending order; column ``i`` of
    ``eigenvectors`` spans the i-th eigenprojection.
    """

    def __post_init__(self) -> None:
        super().__post_init__()
        values, vectors = scipy.linalg.eigh(self.entries)
        values = values[::-1].copy()
        vectors = vectors[:, ::-1].copy()
        largest = float(values[0])
        smallest = float(values[-1])
        if largest <= 0 or smallest <= HPD_RELATIVE_TOL * largest:
            raise NotPositiveDefiniteError(
                "Matrix is not positive definite",
                min_eigenvalue=smallest,
                max_eigenvalue=largest,
            )
        values.setflags(write=False)
        vectors.setflags(write=False)
        object.__setattr__(self, "_values", values)
        object.__setattr__(self, "_vectors", vectors)

    def eigenvalues(self) -> np.ndarray:
        return self._values  # type: ignore[attr-defined]

    @property
    def eigenvectors(self) -> np.ndarray:
        return self._vectors  # type: ignore[attr-defined]

    def power_array(self, p: float) -> np.ndarray:
        vecs = self.eigenvectors
        return (vecs * self.eigenvalues() ** p) @ vecs.conj().T

    def power(self, p: float) -> "HpdMatrix":
        return HpdMatrix(self.power_array(p))

    def sqrt(self) -> "HpdMatrix":
        return self.power(0.5)

    def inv_sqrt(self) -> "HpdMatrix":
        return self.power(-0.5)

    def inverse(self) -> "HpdMatrix":
        return self.power(-1.0)

    def condition_number(self) -> float:
        values = self.eigenvalues()
        return float(values[0] / values[-1])


MatrixLike = Union[HermMatrix, np.ndarray]


def as_array(a: MatrixLike) -> np.ndarray:
    """Return the entries of a matrix-like value as a complex ndarray."""
    if isinstance(a, HermMatrix):
        return a.entries
    return np.asarray(a, dtype=np.complex128)


def as_hpd(a: MatrixLike) -> HpdMatrix:
    """Coerce to HpdMatrix, raising NotPositiveDefiniteError when impossible."""
    if isinstance(a, HpdMatrix):
        return a
    return HpdMatrix(as_array(a))


def herm_sqrt(a: MatrixLike) -> HpdMatrix:
    """Positive definite square root through the eigendecomposition."""
    return as_hpd(a).sqrt()


def inverse(a: MatrixLike) -> HpdMatrix:
    return as_hpd(a).inverse()


def herm_power(a: MatrixLike, p: float) -> HpdMatrix:
    return as_hpd(a).power(p)


def eigh_descending(a: MatrixLike) -> Tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and matching orthonormal eigenvectors."""
    if isinstance(a, HpdMatrix):
        return a.eigenvalues(), a.eigenvectors
    values, vectors = scipy.linalg.eigh(HermMatrix(as_array(a)).entries)
    return values[::-1], vectors[:, ::-1]


def op_norm(a: MatrixLike) -> float:
    """Largest singular value."""
    arr = as_array(a)
    if arr.size == 0:
        return 0.0
    return float(scipy.linalg.svdvals(arr)[0])


def min_eigenvalue(a: MatrixLike) -> float:
    arr = as_array(a)
    return float(scipy.linalg.eigvalsh((arr + arr.conj().T) / 2)[0])


def is_psd(a: MatrixLike, tol: float = DEFAULT_PSD_TOL) -> bool:
    """True iff the smallest eigenvalue is at least -tol * max(1, max |eigenvalue|)."""
    arr = as_array(a)
    values = scipy.linalg.eigvalsh((arr + arr.conj().T) / 2)
    scale = max(1.0, float(np.max(np.abs(values))))
    return bool(values[0] >= -tol * scale)


def congruence(a: MatrixLike, b: MatrixLike) -> HermMatrix:
    """Return B^{1/2} A B^{1/2}."""
    a_arr = as_array(a)
    b_hpd = as_hpd(b)
    if a_arr.shape != b_hpd.entries.shape:
        raise ShapeMismatchError(
            "congruence operands must have matching dimensions",
            expected=b_hpd.entries.shape,
            found=a_arr.shape,
        )
    root = b_hpd.power_array(0.5)
    return HermMatrix(root @ a_arr @ root)


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar-distributed unitary from a complex Gaussian QR with phase fixing."""
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    phases = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * phases


def random_hpd(
    rng: np.random.Generator,
    dim: int,
    log_spread: float = 1.0,
    frame: Optional[np.ndarray] = None,
) -> HpdMatrix:
    """Random HPD matrix with eigenvalues exp(U[-log_spread, log_spread])."""
    if frame is None:
        frame = random_unitary(rng, dim)
    values = np.exp(rng.uniform(-log_spread, log_spread, size=dim))
    return HpdMatrix((frame * values) @ frame.conj().T)


# Batched helpers on stacks of shape (..., d, d).


def hermitian_part(stack: np.ndarray) -> np.ndarray:
    return (stack + np.swapaxes(stack.conj(), -1, -2)) / 2


def stack_power(stack: np.ndarray, p: float) -> np.ndarray:
    """Matrix power of every HPD matrix in the stack."""
    values, vectors = np.linalg.eigh(hermitian_part(stack))
    if np.any(values <= 0):
        raise NotPositiveDefiniteError(
            "Stack contains a matrix that is not positive definite",
            min_eigenvalue=float(values.min()),
            max_eigenvalue=float(values.max()),
        )
    scaled = vectors * (values**p)[..., None, :]
    return scaled @ np.swapaxes(vectors.conj(), -1, -2)


def stack_inverse(stack: np.ndarray) -> np.ndarray:
    return stack_power(stack, -1.0)


def stack_op_norm(stack: np.ndarray) -> np.ndarray:
    """Largest singular value of every matrix in the stack."""
    return np.linalg.svd(stack, compute_uv=False)[..., 0]


def stack_eigvalsh(stack: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of the Hermitian part of every matrix in the stack."""
    return np.linalg.eigvalsh(hermitian_part(stack))


def stack_check_hpd(stack: np.ndarray, what: str = "matrix") -> None:
    """Validate a stack of Hermitian positive definite matrices."""
    arr = np.asarray(stack)
    scale = np.maximum(1.0, np.max(np.abs(arr), axis=(-1, -2)))
    asymmetry = np.max(np.abs(arr - np.swapaxes(arr.conj(), -1, -2)), axis=(-1, -2))
    if np.any(asymmetry > HERMITIAN_TOL * scale):
        raise ValidationError(
            f"Every {what} must be Hermitian", expected_type="Hermitian matrices"
        )
    values = stack_eigvalsh(arr)
    smallest = values[..., 0]
    largest = values[..., -1]
    if np.any(largest <= 0) or np.any(smallest <= HPD_RELATIVE_TOL * largest):
        raise NotPositiveDefiniteError(
            f"Every {what} must be positive definite",
            min_eigenvalue=float(smallest.min()),
            max_eigenvalue=float(largest.max()),
        )
