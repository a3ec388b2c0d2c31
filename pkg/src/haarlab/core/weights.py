"""
A2 characteristics and explicit weight constructions.

``a2_characteristic`` scans every node of a weight's tree. ``two_point_weight``
splits an admissible pair (U, V) into two child values whose averages
reproduce U and V, and ``function_with_averages`` builds a function with
prescribed mean and weighted energy on a given weight. ``random_a2_weight``
generates the seeded weights every experiment runs on.
"""

import logging
import math
from typing import NamedTuple, Tuple, Union

import numpy as np
import scipy.linalg

from .dyadic import GridFunction, MatrixWeight
from .exceptions import (
    DomainViolationError,
    GridTooCoarseError,
    InfeasibleMomentsError,
    NotPositiveDefiniteError,
    ValidationError,
)
from .linalg import (
    DEFAULT_PSD_TOL,
    HermMatrix,
    HpdMatrix,
    MatrixLike,
    as_hpd,
    random_unitary,
    stack_eigvalsh,
    stack_power,
)
from .models import A2Report
from .rng import substream

logger = logging.getLogger(__name__)

# Generated weights are shrunk until their characteristic is at most this
# multiple of the requested target.
TARGET_OVERSHOOT = 4.0
_SHRINK_STEPS = 40


class TwoPointSplit(NamedTuple):
    """Child values of the two-point construction.

    ``degenerate`` is set when I - N has a zero eigenvalue, i.e. the split is
    trivial along some direction; ``w_minus`` falls back to a plain Hermitian
    matrix if rounding leaves it only semidefinite.
    """

    w_plus: HpdMatrix
    w_minus: Union[HpdMatrix, HermMatrix]
    degenerate: bool


def characteristic_values(averages: np.ndarray, inverse_averages: np.ndarray) -> np.ndarray:
    """lambda_max(<W>^{1/2} <W^{-1}> <W>^{1/2}) for stacks of node averages."""
    root = stack_power(averages, 0.5)
    return stack_eigvalsh(root @ inverse_averages @ root)[..., -1]


def level_characteristics(weight: MatrixWeight) -> list:
    """Per level, the vector of node characteristics."""
    return [
        characteristic_values(avg, inv)
        for avg, inv in zip(weight.avg_levels, weight.avg_inv_levels)
    ]


def a2_characteristic(weight: MatrixWeight) -> A2Report:
    """[W]_{A2} over all nodes of the tree, with the first node attaining it.

    Nodes are scanned coarsest level first; a finer node only replaces the
    witness when it is larger beyond rounding.
    """
    maxima = []
    best_value = -math.inf
    witness = (0, 0)
    for level, values in enumerate(level_characteristics(weight)):
        index = int(np.argmax(values))
        value = float(values[index])
        maxima.append(value)
        if value > best_value + 1e-12 * max(1.0, abs(best_value)):
            best_value = value
            witness = (level, index)

    return A2Report(
        characteristic=best_value,
        witness_level=witness[0],
        witness_index=witness[1],
        per_level_maxima=maxima,
    )


def two_point_weight(
    u: MatrixLike, v: MatrixLike, tol: float = DEFAULT_PSD_TOL
) -> TwoPointSplit:
    """W1,2 = U^{1/2} (I +/- (I - N)^{1/2}) U^{1/2} with N = U^{-1/2} V^{-1} U^{-1/2}."""
    u_hpd = as_hpd(u)
    v_hpd = as_hpd(v)
    u_half = u_hpd.power_array(0.5)
    u_inv_half = u_hpd.power_array(-0.5)
    n = u_inv_half @ v_hpd.power_array(-1.0) @ u_inv_half
    n = (n + n.conj().T) / 2

    n_values, n_vectors = scipy.linalg.eigh(n)
    if n_values[-1] > 1 + tol:
        raise DomainViolationError(
            "V^{1/2} U V^{1/2} is not above the identity",
            quantity="max eigenvalue of N",
            value=float(n_values[-1]),
            limit=1.0,
        )

    gap = np.clip(1 - n_values, 0.0, None)
    degenerate = bool(np.any(gap <= tol))
    root = (n_vectors * np.sqrt(gap)) @ n_vectors.conj().T
    identity = np.eye(u_hpd.dim)

    w_plus = HpdMatrix(u_half @ (identity + root) @ u_half)
    minus = u_half @ (identity - root) @ u_half
    try:
        w_minus: Union[HpdMatrix, HermMatrix] = HpdMatrix(minus)
    except NotPositiveDefiniteError:
        logger.warning("Two-point split is only semidefinite on the minus side")
        w_minus = HermMatrix(minus)
        degenerate = True

    if degenerate:
        logger.debug("Two-point split is degenerate along at least one direction")
    return TwoPointSplit(w_plus, w_minus, degenerate)


def _moment_nullspace(weight: MatrixWeight) -> np.ndarray:
    """Orthonormal basis of leaf functions phi with sum phi = 0 and sum W phi = 0."""
    leaves, dim = weight.num_leaves, weight.dim
    sums = np.tile(np.eye(dim), (1, leaves))
    weighted = weight.leaf_values.transpose(1, 0, 2).reshape(dim, leaves * dim)
    return scipy.linalg.null_space(np.vstack([sums, weighted]))


def function_with_averages(
    weight: MatrixWeight, f_avg, big_f: float, tol: float = DEFAULT_PSD_TOL
) -> GridFunction:
    """A function with <f> = f_avg and <|W^{1/2} f|^2> = F.

    f = W^{-1} V^{-1} f_avg + (F - |V^{-1/2} f_avg|^2)^{1/2} phi with V the
    root average of W^{-1}, and phi a unit-energy direction orthogonal to both
    the constants and W times the constants.
    """
    f_avg = np.atleast_1d(np.asarray(f_avg, dtype=np.complex128))
    if f_avg.shape != (weight.dim,):
        raise ValidationError(
            "f_avg must be a vector of the weight's dimension",
            field_name="f_avg",
            expected_type=f"vector of length {weight.dim}",
        )

    v_inv = HpdMatrix(weight.avg_inv_levels[0][0]).power_array(-1.0)
    target = v_inv @ f_avg
    floor = float(np.real(f_avg.conj() @ target))
    if big_f < floor - tol * max(1.0, floor):
        raise InfeasibleMomentsError(
            f"F = {big_f} is below the Cauchy-Schwarz floor {floor}", big_f, floor
        )
    if weight.num_leaves < 2 * weight.dim + 1:
        raise GridTooCoarseError(
            f"{weight.num_leaves} leaves cannot carry {2 * weight.dim} moment constraints",
            weight.num_leaves,
            weight.dim,
        )

    base = np.einsum("kab,b->ka", weight.inverse_leaves, target)
    slack = max(big_f - floor, 0.0)
    if slack == 0.0:
        return GridFunction(base)

    basis = _moment_nullspace(weight)
    if basis.shape[1] == 0:
        raise GridTooCoarseError(
            "Moment constraints admit only the zero function",
            weight.num_leaves,
            weight.dim,
        )
    phi = basis[:, 0].reshape(weight.num_leaves, weight.dim)
    energy = float(
        np.mean(np.einsum("ka,kab,kb->k", phi.conj(), weight.leaf_values, phi).real)
    )
    phi = phi / math.sqrt(energy)
    return GridFunction(base + math.sqrt(slack) * phi)


def walk_amplitude(target_x: float, depth: int) -> float:
    """Per-level step bound a with depth * a^2 / 3 = log(target_x)."""
    if depth == 0 or target_x <= 1:
        return 0.0
    return math.sqrt(3 * math.log(target_x) / depth)


def _frame_weight(frame: np.ndarray, log_values: np.ndarray) -> MatrixWeight:
    return MatrixWeight(
        np.einsum("ab,kb,cb->kac", frame, np.exp(log_values), frame.conj())
    )


def _max_characteristic(weight: MatrixWeight) -> float:
    return max(float(values.max()) for values in level_characteristics(weight))


def random_a2_weight_from_rng(
    rng: np.random.Generator, dim: int, depth: int, target_x: float
) -> MatrixWeight:
    """Seeded weight Q diag(exp(walk)) Q* with a dyadic log-scale random walk.

    Each eigenvalue index follows its own walk; every node below the root adds
    a step uniform in [-a, a] to all leaves under it. A walk whose measured
    characteristic exceeds TARGET_OVERSHOOT * target_x is shrunk by bisection
    on its scale.
    """
    if target_x < 1:
        raise ValidationError("target_x must be at least 1", field_name="target_x")
    leaves = 1 << depth
    frame = random_unitary(rng, dim)
    offsets = rng.uniform(-0.5, 0.5, size=dim)
    amplitude = walk_amplitude(target_x, depth)

    walk = np.zeros((leaves, dim))
    for level in range(1, depth + 1):
        steps = rng.uniform(-amplitude, amplitude, size=(1 << level, dim))
        walk += np.repeat(steps, 1 << (depth - level), axis=0)

    weight = _frame_weight(frame, offsets + walk)
    limit = TARGET_OVERSHOOT * target_x
    if _max_characteristic(weight) <= limit:
        return weight

    lo, hi = 0.0, 1.0
    for _ in range(_SHRINK_STEPS):
        mid = (lo + hi) / 2
        if _max_characteristic(_frame_weight(frame, offsets + mid * walk)) <= limit:
            lo = mid
        else:
            hi = mid
    logger.debug(f"Shrunk random weight walk to scale {lo:.6f}")
    return _frame_weight(frame, offsets + lo * walk)


def random_a2_weight(
    seed: int, dim: int, depth: int, target_x: float, stream: int = 0
) -> MatrixWeight:
    """Deterministic in (seed, stream)."""
    return random_a2_weight_from_rng(substream(seed, 0, stream), dim, depth, target_x)


def characteristic_bucket(value: float) -> Tuple[float, float]:
    """Power-of-two bucket [2^j, 2^{j+1}) containing a characteristic."""
    exponent = max(0, int(math.floor(math.log2(max(value, 1.0)))))
    return float(2**exponent), float(2 ** (exponent + 1))
