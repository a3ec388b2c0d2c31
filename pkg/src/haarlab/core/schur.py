"""
Lambda coefficient matrices, extremal alpha sequences and Schur multipliers.

Two kinds of coefficient matrix come out of a k-level martingale subtree:

* rank-one: lambda_KL = m_K n_L, the projected deviations on one eigenvector
  of the top average U;
* symmetric: lambda_KL = <a_K, b_L> + <a_L, b_K>, symmetric with zero row sums.

For a coefficient matrix the searches look for a real alpha with
|alpha_I| <= 1/4 and sum alpha = 0 making |sum alpha_K alpha_L lambda_KL|
large compared to sum |lambda_KL|.

Norms of symmetric matrices:

    ||L||_1 = sup |alpha^T L alpha| over that polytope
    ||L||_2 = sup |alpha^T L beta| over the unit cube in each argument

``lambda_norms`` returns enclosing intervals. ||L||_2 is exact by vertex
enumeration; ||L||_1 is certified for small sizes by enumerating the faces of
the polytope on a phase grid.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Dict, Iterator, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .bellman import BellmanPoint, check_martingale, points_from_weight
from .dyadic import GridFunction, MatrixWeight
from .exceptions import (
    DimensionTooLargeError,
    EigenIndexOutOfRangeError,
    SearchFailedError,
    ShapeMismatchError,
    SizeTooLargeForCertificationError,
    ValidationError,
)
from .linalg import eigh_descending, op_norm
from .models import InequalityCheck
from .suite import Params, Suite, TrialOutcome
from .weights import random_a2_weight_from_rng

logger = logging.getLogger(__name__)

ALPHA_LIMIT = 0.25
RANK_ONE_CONSTANT = 4.0**-5
SUMMABILITY_FACTOR = 384.0
DEFAULT_GROTHENDIECK = 1.782
STATED_EQUIVALENCE = (64.0, 192.0)
PROVABLE_EQUIVALENCE = (16.0, 128.0)
STRUCTURE_TOL = 1e-10
DEFAULT_PHASE_RESOLUTION = 64
DEFAULT_SCAN_STEPS = 32
CERTIFIED_MAX_SIZE = 4
EXHAUSTIVE_MAX_SIZE = 16
RANK_ONE_MAX_SIZE = 64
_KKT_COND_LIMIT = 1e12
_SIGN_CHUNK = 4096


def _check_square_power_of_two(entries: np.ndarray, what: str) -> int:
    if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
        raise ShapeMismatchError(f"{what} must be square", found=entries.shape)
    size = entries.shape[0]
    if size < 2 or size & (size - 1):
        raise ShapeMismatchError(
            f"{what} size must be a power of two of at least 2", found=size
        )
    return size.bit_length() - 1


@dataclass(frozen=True, eq=False)
class LambdaMatrix:
    """2^k x 2^k coefficient matrix with its structure kind."""

    entries: np.ndarray
    kind: str
    m: Optional[np.ndarray] = None
    n: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        entries = np.array(self.entries, dtype=np.complex128)
        _check_square_power_of_two(entries, "Lambda matrix")
        if self.kind not in ("rank_one", "symmetric"):
            raise ValidationError(
                f"Unknown lambda kind {self.kind!r}",
                field_name="kind",
                expected_type="rank_one or symmetric",
            )
        scale = STRUCTURE_TOL * max(1.0, float(np.max(np.abs(entries))))
        if self.kind == "rank_one":
            if self.m is None or self.n is None:
                raise ValidationError("Rank-one lambda needs its factors m and n", field_name="m")
            m = np.array(self.m, dtype=np.complex128)
            n = np.array(self.n, dtype=np.complex128)
            if float(np.max(np.abs(np.outer(m, n) - entries))) > scale:
                raise ValidationError("Entries do not equal m_K n_L", field_name="entries")
            object.__setattr__(self, "m", m)
            object.__setattr__(self, "n", n)
        else:
            if float(np.max(np.abs(entries - entries.T))) > scale:
                raise ValidationError("Symmetric lambda is not symmetric", field_name="entries")
            if float(np.max(np.abs(entries.sum(axis=1)))) > scale:
                raise ValidationError("Symmetric lambda has nonzero row sums", field_name="entries")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @classmethod
    def rank_one(cls, m, n) -> "LambdaMatrix":
        m = np.asarray(m, dtype=np.complex128)
        n = np.asarray(n, dtype=np.complex128)
        return cls(np.outer(m, n), "rank_one", m, n)

    @classmethod
    def symmetric(cls, entries) -> "LambdaMatrix":
        return cls(np.asarray(entries, dtype=np.complex128), "symmetric")

    @property
    def size(self) -> int:
        return int(self.entries.shape[0])

    @property
    def k(self) -> int:
        return self.size.bit_length() - 1

    @cached_property
    def total(self) -> float:
        """sum |lambda_KL|."""
        return float(np.sum(np.abs(self.entries)))

    def quadratic(self, alpha: np.ndarray) -> complex:
        alpha = np.asarray(alpha, dtype=float)
        return complex(alpha @ self.entries @ alpha)

    def row_sum_residual(self) -> float:
        return float(max(np.max(np.abs(self.entries.sum(axis=0))), np.max(np.abs(self.entries.sum(axis=1)))))

    def is_zero(self) -> bool:
        return self.total == 0.0


def build_lambda(
    points: Sequence[Sequence[BellmanPoint]],
    index: Optional[int] = None,
    tol: float = 1e-9,
) -> LambdaMatrix:
    """Coefficients of a k-level martingale subtree.

    With a_K = (f_K - f_top) / 2^k and b_L = (g_L - g_top) / 2^k over the
    2^k bottom points, ``index`` i selects the rank-one matrix
    <P^i a_K, P^i b_L> for the i-th eigenvector (descending) of the top U;
    ``index=None`` gives the symmetric <a_K, b_L> + <a_L, b_K>.
    """
    k = check_martingale(points, tol)
    top = points[0][0]
    bottom = points[k]
    a = np.array([p.f - top.f for p in bottom]) / 2**k
    b = np.array([p.g - top.g for p in bottom]) / 2**k
    if index is None:
        gram = a @ b.conj().T
        return LambdaMatrix.symmetric(gram + gram.T)

    if not 0 <= index < top.dim:
        raise EigenIndexOutOfRangeError(
            f"Eigen-index {index} is outside 0..{top.dim - 1}", index, top.dim
        )
    _, vectors = eigh_descending(top.u)
    e = vectors[:, index]
    return LambdaMatrix.rank_one(a @ e.conj(), b.conj() @ e)


def balanced_sign_patterns(n: int) -> np.ndarray:
    """All +-1 vectors of length n with n/2 entries of each sign."""
    if n < 2 or n % 2:
        raise ValidationError("Balanced patterns need an even length", field_name="n", field_value=n)
    patterns = []
    for plus in itertools.combinations(range(n), n // 2):
        row = -np.ones(n)
        row[list(plus)] = 1.0
        patterns.append(row)
    return np.array(patterns)


def sign_vectors(n: int, fix_first: bool = True) -> np.ndarray:
    """All +-1 vectors of length n, optionally with the first entry fixed to +1."""
    free = n - 1 if fix_first else n
    bits = (np.arange(1 << free)[:, None] >> np.arange(free)) & 1
    signs = 1.0 - 2.0 * bits
    if fix_first:
        signs = np.hstack([np.ones((signs.shape[0], 1)), signs])
    return signs


def greedy_vertex(c: np.ndarray) -> np.ndarray:
    """Maximizer of <c, alpha> over |alpha| <= 1/4, sum alpha = 0 (even length)."""
    c = np.asarray(c, dtype=float)
    order = np.argsort(-c, kind="stable")
    alpha = np.full(c.shape[0], -ALPHA_LIMIT)
    alpha[order[: c.shape[0] // 2]] = ALPHA_LIMIT
    return alpha


def _scan(
    objectives: Sequence[np.ndarray], steps: int
) -> Iterator[np.ndarray]:
    """Convex combinations of greedy optima for every ordered pair and sign."""
    vertices = [greedy_vertex(c) for c in objectives if np.any(c)]
    vertices += [greedy_vertex(-c) for c in objectives if np.any(c)]
    if not vertices:
        return
    for first, second in itertools.combinations_with_replacement(vertices, 2):
        for t in np.linspace(0.0, 1.0, steps + 1):
            yield (1.0 - t) * first + t * second


class AlphaSearchResult(NamedTuple):
    """A feasible alpha with |sum alpha alpha lambda| = achieved >= required."""

    alpha: np.ndarray
    achieved: float
    total: float
    required: float
    method: str

    @property
    def ratio(self) -> float:
        """achieved / sum |lambda|; 0/0 counts as a pass and reports inf."""
        if self.total == 0:
            return math.inf
        return self.achieved / self.total

    @property
    def certificate(self) -> InequalityCheck:
        return InequalityCheck(self.required, self.achieved)

    @property
    def passed(self) -> bool:
        return self.achieved >= self.required * (1 - 1e-12)


def _trivial_alpha(size: int) -> np.ndarray:
    return greedy_vertex(np.arange(size, 0, -1, dtype=float))


def alpha_search_rank_one(
    lam: LambdaMatrix,
    steps: int = DEFAULT_SCAN_STEPS,
    exhaustive_max: int = EXHAUSTIVE_MAX_SIZE,
    max_size: int = RANK_ONE_MAX_SIZE,
) -> AlphaSearchResult:
    """Alpha with |sum alpha_K alpha_L lambda_KL| >= 4^-5 sum |lambda_KL|.

    Scans convex combinations of the greedy optima of Re m, Im m, Re n, Im n;
    falls back to every balanced +-1/4 pattern for sizes up to ``exhaustive_max``.
    """
    if lam.kind != "rank_one":
        raise ValidationError("alpha_search_rank_one needs a rank-one lambda", field_name="kind")
    if lam.size > max_size:
        raise DimensionTooLargeError(
            f"Rank-one search supports sizes up to {max_size}", lam.size, max_size
        )
    required = RANK_ONE_CONSTANT * lam.total
    if lam.is_zero():
        return AlphaSearchResult(_trivial_alpha(lam.size), 0.0, 0.0, 0.0, "trivial")

    def value(alpha: np.ndarray) -> float:
        return float(abs(alpha @ lam.m) * abs(alpha @ lam.n))

    objectives = [lam.m.real, lam.m.imag, lam.n.real, lam.n.imag]
    best_alpha, best = _trivial_alpha(lam.size), -1.0
    for alpha in _scan(objectives, steps):
        current = value(alpha)
        if current > best:
            best_alpha, best = alpha, current
    method = "scan"

    if best < required and lam.size <= exhaustive_max:
        patterns = balanced_sign_patterns(lam.size) * ALPHA_LIMIT
        values = np.abs(patterns @ lam.m) * np.abs(patterns @ lam.n)
        index = int(np.argmax(values))
        if values[index] > best:
            best_alpha, best, method = patterns[index], float(values[index]), "exhaustive"

    result = AlphaSearchResult(best_alpha, best, lam.total, required, method)
    if not result.passed:
        raise SearchFailedError(
            f"Rank-one alpha search reached {best:.6g}, below 4^-5 sum|lambda| = {required:.6g}",
            achieved=best,
            required=required,
        )
    logger.debug(f"Rank-one alpha search ({method}): ratio {result.ratio:.6g}")
    return result


class NormInterval(NamedTuple):
    lower: float
    upper: float
    certified: bool

    def contains(self, value: float, rtol: float = 1e-9) -> bool:
        slack = rtol * max(1.0, abs(value))
        return self.lower - slack <= value <= self.upper + slack

    @property
    def width(self) -> float:
        return self.upper - self.lower


def _best_sign_values(vectors: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """max over beta in {+-1}^n of |<beta, v>| for each row v, with the maximizers.

    The maximizing pattern is sign(Re(e^{-i phi} v)) for some phase phi; it only
    changes where phi crosses arg v_L + pi/2, so one phase per arc suffices.
    """
    vectors = np.atleast_2d(np.asarray(vectors, dtype=np.complex128))
    rows = np.arange(vectors.shape[0])
    breaks = np.sort(np.mod(np.angle(vectors) + np.pi / 2, np.pi), axis=1)
    following = np.concatenate([breaks[:, 1:], breaks[:, :1] + np.pi], axis=1)
    mids = (breaks + following) / 2
    proj = np.real(np.exp(-1j * mids)[:, :, None] * vectors[:, None, :])
    signs = np.where(proj >= 0, 1.0, -1.0)
    values = np.abs(np.einsum("pmn,pn->pm", signs, vectors))
    best = np.argmax(values, axis=1)
    return values[rows, best], signs[rows, best]


def _norm2_exact(entries: np.ndarray) -> Tuple[float, np.ndarray, np.ndarray]:
    """||L||_2 with maximizing sign vectors alpha, beta."""
    size = entries.shape[0]
    alphas = sign_vectors(size)
    best, best_alpha, best_beta = -1.0, alphas[0], alphas[0]
    for start in range(0, alphas.shape[0], _SIGN_CHUNK):
        chunk = alphas[start : start + _SIGN_CHUNK]
        values, betas = _best_sign_values(chunk @ entries)
        index = int(np.argmax(values))
        if values[index] > best:
            best, best_alpha, best_beta = float(values[index]), chunk[index], betas[index]
    return best, best_alpha, best_beta


def _norm2_alternating(entries: np.ndarray, rounds: int = 16) -> float:
    """Lower bound for ||L||_2 by alternating exact sign maximization."""
    u, _, vh = np.linalg.svd(entries)
    parts = (u[:, 0].real, u[:, 0].imag, vh[0].real, vh[0].imag)
    best = 0.0
    for part in parts:
        alpha = np.where(part >= 0, 1.0, -1.0)
        value = 0.0
        for _ in range(rounds):
            _, betas = _best_sign_values(alpha @ entries)
            values, alphas = _best_sign_values(entries @ betas[0])
            if values[0] <= value:
                break
            value, alpha = float(values[0]), alphas[0]
        best = max(best, value)
    return best


def _kkt_faces(size: int) -> List[Tuple[np.ndarray, np.ndarray, np.ndarray, float]]:
    """Faces of the alpha polytope: (fixed indices, fixed values, free indices, free sum)."""
    faces = []
    for pattern in itertools.product((-1, 0, 1), repeat=size):
        signs = np.array(pattern, dtype=float)
        fixed = np.flatnonzero(signs != 0)
        free = np.flatnonzero(signs == 0)
        values = ALPHA_LIMIT * signs[fixed]
        faces.append((fixed, values, free, -float(values.sum())))
    return faces


def quadratic_polytope_max(q_stack: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """max alpha^T Q alpha over |alpha| <= 1/4, sum alpha = 0, per real symmetric Q.

    Every maximizer can be moved to a face on which it solves the restricted
    KKT system, so enumerating the faces is exact. Returns values and maximizers.
    """
    q_stack = np.asarray(q_stack, dtype=float)
    count, size = q_stack.shape[0], q_stack.shape[1]
    best = np.full(count, -np.inf)
    best_alpha = np.zeros((count, size))
    for fixed, values, free, free_sum in _kkt_faces(size):
        alpha = np.zeros((count, size))
        alpha[:, fixed] = values
        t = free.size
        if t == 0:
            if abs(free_sum) > 1e-15:
                continue
            feasible = np.ones(count, dtype=bool)
        else:
            kkt = np.zeros((count, t + 1, t + 1))
            kkt[:, :t, :t] = 2 * q_stack[:, free][:, :, free]
            kkt[:, :t, t] = 1.0
            kkt[:, t, :t] = 1.0
            rhs = np.zeros((count, t + 1))
            rhs[:, :t] = -2 * q_stack[:, free][:, :, fixed] @ values
            rhs[:, t] = free_sum
            with np.errstate(divide="ignore", invalid="ignore"):
                solvable = np.linalg.cond(kkt) < _KKT_COND_LIMIT
            if not solvable.any():
                continue
            solution = np.zeros((count, t + 1))
            solution[solvable] = np.linalg.solve(kkt[solvable], rhs[solvable][..., None])[..., 0]
            inside = np.all(np.abs(solution[:, :t]) <= ALPHA_LIMIT + 1e-12, axis=1)
            feasible = solvable & inside
            alpha[:, free] = np.clip(solution[:, :t], -ALPHA_LIMIT, ALPHA_LIMIT)
        values_here = np.einsum("ri,rij,rj->r", alpha, q_stack, alpha)
        better = feasible & (values_here > best)
        best[better] = values_here[better]
        best_alpha[better] = alpha[better]
    return best, best_alpha


def _norm1_certified(entries: np.ndarray, resolution: int) -> Tuple[NormInterval, np.ndarray]:
    """Phase-grid enclosure of ||L||_1 and the alpha attaining the lower end.

    |z| = max over phi of Re(e^{-i phi} z); a grid of spacing 2 pi / res misses
    the optimal phase by at most pi / res, so the upper end is lower / cos(pi / res).
    Real matrices only need the phases 0 and pi.
    """
    real, imag = entries.real, entries.imag
    exact = not np.any(imag)
    phases = np.array([0.0, np.pi]) if exact else 2 * np.pi * np.arange(resolution) / resolution
    q_stack = np.cos(phases)[:, None, None] * real + np.sin(phases)[:, None, None] * imag
    values, alphas = quadratic_polytope_max(q_stack)
    index = int(np.argmax(values))
    lower = max(0.0, float(values[index]))
    upper = lower if exact else lower / math.cos(math.pi / resolution)
    return NormInterval(lower, upper, True), alphas[index]


def _norm1_heuristic(lam: LambdaMatrix, steps: int) -> Tuple[float, np.ndarray]:
    entries = lam.entries
    objectives = []
    for part in (entries.real, entries.imag):
        if not np.any(part):
            continue
        values, vectors = np.linalg.eigh(part)
        for index in np.argsort(-np.abs(values))[:2]:
            objectives.append(vectors[:, index])
    best_alpha, best = _trivial_alpha(lam.size), abs(lam.quadratic(_trivial_alpha(lam.size)))
    for alpha in _scan(objectives, steps):
        current = abs(lam.quadratic(alpha))
        if current > best:
            best_alpha, best = alpha, current
    return best, best_alpha


class LambdaNorms(NamedTuple):
    norm1: NormInterval
    norm2: NormInterval
    alpha: np.ndarray


def lambda_norms(
    lam: LambdaMatrix,
    resolution: int = DEFAULT_PHASE_RESOLUTION,
    certified_max: int = CERTIFIED_MAX_SIZE,
    exhaustive_max: int = EXHAUSTIVE_MAX_SIZE,
    strict: bool = False,
    steps: int = DEFAULT_SCAN_STEPS,
) -> LambdaNorms:
    """Enclosures of ||L||_1 and ||L||_2 for a symmetric zero-sum lambda.

    Above ``certified_max`` the ||L||_1 interval runs from a scan lower bound
    to ||L||_2 / 16 and is flagged uncertified; ``strict`` raises instead.
    """
    if lam.kind != "symmetric":
        raise ValidationError("lambda_norms needs a symmetric lambda", field_name="kind")
    if resolution < 3:
        raise ValidationError("Phase resolution must be at least 3", field_name="resolution")
    if lam.size > certified_max and strict:
        raise SizeTooLargeForCertificationError(
            f"Certified norms are available up to size {certified_max}", lam.size, certified_max
        )

    if lam.size <= exhaustive_max:
        value, _, _ = _norm2_exact(lam.entries)
        norm2 = NormInterval(value, value, True)
    else:
        norm2 = NormInterval(_norm2_alternating(lam.entries), lam.total, False)

    if lam.size <= certified_max:
        norm1, alpha = _norm1_certified(lam.entries, resolution)
    else:
        lower, alpha = _norm1_heuristic(lam, steps)
        norm1 = NormInterval(lower, max(lower, norm2.upper / PROVABLE_EQUIVALENCE[0]), False)
        logger.debug(f"Lambda of size {lam.size} gets heuristic ||L||_1 bounds")
    return LambdaNorms(norm1, norm2, alpha)


class NormEquivalence(NamedTuple):
    """Ratio ||L||_2 / ||L||_1 against the stated and the provable constants."""

    norm1: NormInterval
    norm2: NormInterval
    ratio_lower: float
    ratio_upper: float
    stated_lower_holds: bool
    stated_upper_holds: bool
    provable_holds: bool
    certified: bool

    @property
    def passed(self) -> bool:
        """Provable constants and the stated upper constant; report-only uncertified."""
        if not self.certified:
            return True
        return self.provable_holds and self.stated_upper_holds


def norm_equivalence_check(
    lam: LambdaMatrix,
    resolution: int = DEFAULT_PHASE_RESOLUTION,
    slack: float = 0.05,
    certified_max: int = CERTIFIED_MAX_SIZE,
) -> NormEquivalence:
    norms = lambda_norms(lam, resolution, certified_max)
    n1, n2 = norms.norm1, norms.norm2
    if n1.upper == 0:
        ratio_lower = ratio_upper = math.nan
        holds = (n2.lower == 0, n2.lower == 0, n2.lower == 0)
    else:
        ratio_lower = n2.lower / n1.upper
        ratio_upper = n2.upper / n1.lower if n1.lower > 0 else math.inf

        def low(c: float) -> bool:
            return n2.upper >= c * n1.lower * (1 - slack)

        def high(c: float) -> bool:
            return n2.lower <= c * n1.upper * (1 + slack)

        holds = (
            low(STATED_EQUIVALENCE[0]),
            high(STATED_EQUIVALENCE[1]),
            low(PROVABLE_EQUIVALENCE[0]) and high(PROVABLE_EQUIVALENCE[1]),
        )
    return NormEquivalence(
        n1, n2, ratio_lower, ratio_upper, *holds, certified=n1.certified and n2.certified
    )


def schur_multiply(a, m) -> np.ndarray:
    """Entrywise product (a_ij m_ij)."""
    a = np.asarray(a)
    m = np.asarray(m)
    if a.shape != m.shape:
        raise ShapeMismatchError("Schur multiplication needs equal shapes", expected=a.shape, found=m.shape)
    return a * m


def sign_multiplier_check(a, m) -> InequalityCheck:
    """op_norm(A o M) / op_norm(M) against 2^{k/2} for a +-1 matrix A of size 2^k."""
    a = np.asarray(a, dtype=float)
    k = _check_square_power_of_two(a, "Sign matrix")
    if not np.all(np.abs(a) == 1.0):
        raise ValidationError("Sign matrix entries must be +1 or -1", field_name="a")
    base = op_norm(np.asarray(m))
    ratio = op_norm(schur_multiply(a, m)) / base if base > 0 else 0.0
    return InequalityCheck(ratio, 2.0 ** (k / 2))


def rank_one_multiplier_check(s, t, m) -> InequalityCheck:
    """op_norm(Phi o M) <= ||s||_inf ||t||_inf op_norm(M) for Phi_ij = s_i t_j."""
    s = np.asarray(s)
    t = np.asarray(t)
    m = np.asarray(m)
    phi = np.outer(s, t)
    return InequalityCheck(
        op_norm(schur_multiply(phi, m)),
        float(np.max(np.abs(s)) * np.max(np.abs(t))) * op_norm(m),
    )


def summability_factor(k: int, grothendieck: float = DEFAULT_GROTHENDIECK) -> float:
    """384 K_G 2^{k/2}."""
    return SUMMABILITY_FACTOR * grothendieck * 2.0 ** (k / 2)


def summability_check(
    lam: LambdaMatrix,
    grothendieck: float = DEFAULT_GROTHENDIECK,
    resolution: int = DEFAULT_PHASE_RESOLUTION,
    certified_max: int = CERTIFIED_MAX_SIZE,
) -> InequalityCheck:
    """sum |lambda| against 384 K_G 2^{k/2} times the lower end of ||L||_1."""
    norms = lambda_norms(lam, resolution, certified_max)
    return InequalityCheck(lam.total, summability_factor(lam.k, grothendieck) * norms.norm1.lower)


def alpha_search_even(
    lam: LambdaMatrix,
    grothendieck: float = DEFAULT_GROTHENDIECK,
    resolution: int = DEFAULT_PHASE_RESOLUTION,
    steps: int = DEFAULT_SCAN_STEPS,
    certified_max: int = CERTIFIED_MAX_SIZE,
    exhaustive_max: int = EXHAUSTIVE_MAX_SIZE,
) -> AlphaSearchResult:
    """Alpha with sum |lambda| <= 384 K_G 2^{k/2} |sum alpha_K alpha_L lambda_KL|.

    Small sizes take the alpha attaining the certified ||L||_1; otherwise the
    eigenvector scan runs first and balanced +-1/4 patterns are the fallback.
    """
    if lam.kind != "symmetric":
        raise ValidationError("alpha_search_even needs a symmetric lambda", field_name="kind")
    if lam.size > exhaustive_max:
        raise DimensionTooLargeError(
            f"Even alpha search supports sizes up to {exhaustive_max}", lam.size, exhaustive_max
        )
    required = lam.total / summability_factor(lam.k, grothendieck)
    if lam.is_zero():
        return AlphaSearchResult(_trivial_alpha(lam.size), 0.0, 0.0, 0.0, "trivial")

    if lam.size <= certified_max:
        _, alpha = _norm1_certified(lam.entries, resolution)
        best, method = abs(lam.quadratic(alpha)), "certified"
    else:
        best, alpha = _norm1_heuristic(lam, steps)
        method = "scan"

    if best < required:
        patterns = balanced_sign_patterns(lam.size) * ALPHA_LIMIT
        values = np.abs(np.einsum("pi,ij,pj->p", patterns, lam.entries, patterns))
        index = int(np.argmax(values))
        if values[index] > best:
            alpha, best, method = patterns[index], float(values[index]), "exhaustive"

    result = AlphaSearchResult(alpha, best, lam.total, required, method)
    if not result.passed:
        raise SearchFailedError(
            f"Even alpha search reached {best:.6g}, below the required {required:.6g}",
            achieved=best,
            required=required,
        )
    return result


def random_rank_one_lambda(
    rng: np.random.Generator, k: int, zero_sum: bool = True
) -> LambdaMatrix:
    size = 1 << k
    m = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    n = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    if zero_sum:
        m -= m.mean()
        n -= n.mean()
    return LambdaMatrix.rank_one(m, n)


def random_symmetric_lambda(rng: np.random.Generator, k: int) -> LambdaMatrix:
    """P (G + G^T) P with P the projection onto zero-sum vectors."""
    size = 1 << k
    g = rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))
    projection = np.eye(size) - np.full((size, size), 1.0 / size)
    entries = projection @ (g + g.T) @ projection
    return LambdaMatrix.symmetric((entries + entries.T) / 2)


def random_sign_matrix(rng: np.random.Generator, k: int) -> np.ndarray:
    size = 1 << k
    return np.where(rng.random((size, size)) < 0.5, -1.0, 1.0)


def _pick_k(rng: np.random.Generator, params: Params) -> int:
    return int(rng.integers(params.get("k_min", 1), params["k_max"] + 1))


def _generate_sign(rng: np.random.Generator, params: Params) -> Dict[str, Any]:
    k = _pick_k(rng, params)
    size = 1 << k
    return {"a": random_sign_matrix(rng, k), "m": rng.standard_normal((size, size))}


def _evaluate_sign(inputs: Dict[str, Any], params: Params) -> TrialOutcome:
    check = sign_multiplier_check(inputs["a"], inputs["m"])
    k = int(inputs["a"].shape[0]).bit_length() - 1
    passed = check.holds(params.get("tol", 1e-9))
    return TrialOutcome(
        observed=check.lhs,
        bound=check.rhs,
        passed=passed,
        row={"k": k, "ratio": check.lhs, "bound": check.rhs, "passed": passed},
        ratio=check.lhs / check.rhs,
    )


def _generate_rank_one_multiplier(rng: np.random.Generator, params: Params) -> Dict[str, Any]:
    size = 1 << _pick_k(rng, params)
    return {
        "s": rng.uniform(-1.0, 1.0, size),
        "t": rng.uniform(-1.0, 1.0, size),
        "m": rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size)),
    }


def _evaluate_rank_one_multiplier(inputs: Dict[str, Any], params: Params) -> TrialOutcome:
    check = rank_one_multiplier_check(inputs["s"], inputs["t"], inputs["m"])
    k = int(inputs["m"].shape[0]).bit_length() - 1
    passed = check.holds(params.get("tol", 1e-9))
    ratio = check.lhs / check.rhs if check.rhs > 0 else 0.0
    return TrialOutcome(
        observed=check.lhs,
        bound=check.rhs,
        passed=passed,
        row={"k": k, "ratio": ratio, "bound": 1.0, "passed": passed},
        ratio=ratio,
    )


def _generate_rank_one_lambda(rng: np.random.Generator, params: Params) -> Dict[str, Any]:
    lam = random_rank_one_lambda(rng, _pick_k(rng, params))
    return {"m": lam.m, "n": lam.n}


def _evaluate_alpha_rank_one(inputs: Dict[str, Any], params: Params) -> TrialOutcome:
    lam = LambdaMatrix.rank_one(inputs["m"], inputs["n"])
    result = alpha_search_rank_one(lam, steps=params.get("steps", DEFAULT_SCAN_STEPS))
    feasible = _alpha_feasible(result.alpha)
    passed = result.passed and feasible
    return TrialOutcome(
        observed=result.achieved,
        bound=result.required,
        passed=passed,
        row={
            "k": lam.k,
            "achieved": result.achieved,
            "required": result.required,
            "ratio": result.ratio,
            "method": result.method,
            "passed": passed,
        },
        details={"alpha": result.alpha},
    )


def _alpha_feasible(alpha: np.ndarray, tol: float = 1e-12) -> bool:
    return bool(np.all(np.abs(alpha) <= ALPHA_LIMIT + tol) and abs(alpha.sum()) <= tol)


def _generate_symmetric_lambda(rng: np.random.Generator, params: Params) -> Dict[str, Any]:
    return {"entries": random_symmetric_lambda(rng, _pick_k(rng, params)).entries}


def _evaluate_alpha_even(inputs: Dict[str, Any], params: Params) -> TrialOutcome:
    lam = LambdaMatrix.symmetric(inputs["entries"])
    grothendieck = params.get("grothendieck", DEFAULT_GROTHENDIECK)
    result = alpha_search_even(lam, grothendieck, params.get("resolution", DEFAULT_PHASE_RESOLUTION))
    summability = summability_check(lam, grothendieck, params.get("resolution", DEFAULT_PHASE_RESOLUTION))
    passed = result.passed and _alpha_feasible(result.alpha) and summability.holds(params.get("tol", 1e-9))
    return TrialOutcome(
        observed=result.achieved,
        bound=result.required,
        passed=passed,
        row={
            "k": lam.k,
            "achieved": result.achieved,
            "required": result.required,
            "ratio": result.ratio,
            "method": result.method,
            "passed": passed,
        },
        details={"alpha": result.alpha, "total": lam.total},
    )


def _evaluate_norms(inputs: Dict[str, Any], params: Params) -> TrialOutcome:
    lam = LambdaMatrix.symmetric(inputs["entries"])
    check = norm_equivalence_check(
        lam, params.get("resolution", DEFAULT_PHASE_RESOLUTION), params.get("slack", 0.05)
    )
    return TrialOutcome(
        observed=check.ratio_upper,
        bound=STATED_EQUIVALENCE[1],
        passed=check.passed,
        row={
            "k": lam.k,
            "norm1_lower": check.norm1.lower,
            "norm1_upper": check.norm1.upper,
            "norm2": check.norm2.lower,
            "ratio_lower": check.ratio_lower,
            "ratio_upper": check.ratio_upper,
            "stated_lower": check.stated_lower_holds,
            "stated_upper": check.stated_upper_holds,
            "provable": check.provable_holds,
            "passed": check.passed,
        },
    )


def _generate_dynamics(rng: np.random.Generator, params: Params) -> Dict[str, Any]:
    dim, k = int(params["d"]), int(params["k_max"])
    weight = random_a2_weight_from_rng(rng, dim, k, float(params.get("target_x", 4.0)))
    shape = (1 << k, dim)
    f = GridFunction(rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    g = GridFunction(rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    return {"weight": weight, "f": f, "g": g}


def _evaluate_lambda_structure(inputs: Dict[str, Any], params: Params) -> TrialOutcome:
    weight: MatrixWeight = inputs["weight"]
    points = points_from_weight(weight, inputs["f"], inputs["g"], weight.depth)
    worst_rank = worst_sum = 0.0
    for index in range(weight.dim):
        lam = build_lambda(points, index)
        singular = np.linalg.svd(lam.entries, compute_uv=False)
        if singular[0] > 0:
            worst_rank = max(worst_rank, float(singular[1] / singular[0]))
        worst_sum = max(worst_sum, lam.row_sum_residual())
    even = build_lambda(points)
    worst_sum = max(worst_sum, even.row_sum_residual())
    passed = worst_rank <= STRUCTURE_TOL and worst_sum <= STRUCTURE_TOL
    return TrialOutcome(
        observed=worst_rank,
        bound=STRUCTURE_TOL,
        passed=passed,
        row={
            "d": weight.dim,
            "k": weight.depth,
            "rank_residual": worst_rank,
            "row_sum_residual": worst_sum,
            "passed": passed,
        },
    )


SIGN_SUITE = Suite(
    name="schur-sign-bound",
    module="schur",
    operation="sign_multiplier_check",
    stream=50,
    generate=_generate_sign,
    evaluate=_evaluate_sign,
    columns=("k", "ratio", "bound", "passed"),
    defaults={"k_min": 1, "k_max": 6},
    description="op_norm(A o M) <= 2^{k/2} op_norm(M) for +-1 matrices A",
)

RANK_ONE_MULTIPLIER_SUITE = Suite(
    name="schur-rank-one-multiplier",
    module="schur",
    operation="rank_one_multiplier_check",
    stream=51,
    generate=_generate_rank_one_multiplier,
    evaluate=_evaluate_rank_one_multiplier,
    columns=("k", "ratio", "bound", "passed"),
    defaults={"k_min": 1, "k_max": 5},
    description="Rank-one Schur multipliers have norm at most ||s|| ||t||",
)

ALPHA_RANK_ONE_SUITE = Suite(
    name="schur-alpha-rank-one",
    module="schur",
    operation="alpha_search_rank_one",
    stream=52,
    generate=_generate_rank_one_lambda,
    evaluate=_evaluate_alpha_rank_one,
    columns=("k", "achieved", "required", "ratio", "method", "passed"),
    defaults={"k_min": 1, "k_max": 4, "steps": DEFAULT_SCAN_STEPS},
    description="Rank-one alpha search meets 4^-5 sum |lambda|",
)

ALPHA_EVEN_SUITE = Suite(
    name="schur-alpha-even",
    module="schur",
    operation="alpha_search_even",
    stream=53,
    generate=_generate_symmetric_lambda,
    evaluate=_evaluate_alpha_even,
    columns=("k", "achieved", "required", "ratio", "method", "passed"),
    defaults={"k_min": 1, "k_max": 2, "grothendieck": DEFAULT_GROTHENDIECK},
    description="Even alpha search and summability against 384 K_G 2^{k/2}",
)

NORMS_SUITE = Suite(
    name="schur-norms",
    module="schur",
    operation="norm_equivalence_check",
    stream=54,
    generate=_generate_symmetric_lambda,
    evaluate=_evaluate_norms,
    columns=(
        "k",
        "norm1_lower",
        "norm1_upper",
        "norm2",
        "ratio_lower",
        "ratio_upper",
        "stated_lower",
        "stated_upper",
        "provable",
        "passed",
    ),
    defaults={"k_min": 2, "k_max": 2, "resolution": DEFAULT_PHASE_RESOLUTION, "slack": 0.05},
    description="||L||_2 / ||L||_1 against stated and provable constants",
)

LAMBDA_STRUCTURE_SUITE = Suite(
    name="schur-lambda-structure",
    module="schur",
    operation="build_lambda",
    stream=55,
    generate=_generate_dynamics,
    evaluate=_evaluate_lambda_structure,
    columns=("d", "k", "rank_residual", "row_sum_residual", "passed"),
    defaults={"d": 2, "k_max": 2, "target_x": 4.0},
    description="Projected lambdas have rank one and vanishing row sums",
)

SUITES = (
    SIGN_SUITE,
    RANK_ONE_MULTIPLIER_SUITE,
    ALPHA_RANK_ONE_SUITE,
    ALPHA_EVEN_SUITE,
    NORMS_SUITE,
    LAMBDA_STRUCTURE_SUITE,
)

CHECK_SUITES = {
    "sign-bound": (SIGN_SUITE, RANK_ONE_MULTIPLIER_SUITE),
    "alpha": (ALPHA_RANK_ONE_SUITE, ALPHA_EVEN_SUITE, LAMBDA_STRUCTURE_SUITE),
    "norms": (NORMS_SUITE,),
}
