"""
Bellman-domain geometry and the explicit Carleson Bellman function.

A ``BellmanPoint`` (f, F, U, g, G, V) lies in the domain D_X when U, V > 0,
I <= V^{1/2} U V^{1/2} <= X I, ||V^{-1/2} f||^2 <= F and ||U^{-1/2} g||^2 <= G.
The domain is not convex, but a segment whose endpoints and midpoint lie in
D_X stays inside D_{4X}; ``segment_in_4X`` samples that claim and
``modified_dynamics`` checks the reweighted martingale built on top of it.

``carleson_bellman`` is B(f, F, W, M) = 4 (F - <(W + M)^{-1} f, f>) on the
domain <W^{-1} f, f> <= F, M <= W.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .dyadic import DyadicInterval, GridFunction, MatrixWeight
from .exceptions import (
    DomainViolationError,
    DynamicsViolatedError,
    MidpointMismatchError,
    PreconditionViolatedError,
    ShapeMismatchError,
)
from .linalg import (
    DEFAULT_PSD_TOL,
    HermMatrix,
    HpdMatrix,
    MatrixLike,
    as_array,
    as_hpd,
    is_psd,
)
from .models import DynamicsReport, NodeDynamics

logger = logging.getLogger(__name__)

DEFAULT_THETA_SAMPLES = 33
SEGMENT_FACTOR = 4.0
# Reweighted points stay in D_{25X/9}; their segments in D_{100X/9}.
MEMBERSHIP_FACTOR = 25.0 / 9.0
DYNAMICS_SEGMENT_FACTOR = 100.0 / 9.0
ALPHA_LIMIT = 0.25
A_BOUNDS = (0.75, 1.25)
THETA_BOUNDS = (0.3, 5.0 / 6.0)


def _scale(*values: float) -> float:
    return max([1.0] + [abs(v) for v in values])


def _quadratic(matrix: np.ndarray, x: np.ndarray) -> float:
    return float(np.real(np.vdot(x, matrix @ x)))


@dataclass(frozen=True, eq=False)
class BellmanPoint:
    """Point (f, F, U, g, G, V) of the Bellman domain."""

    f: np.ndarray
    big_f: float
    u: HpdMatrix
    g: np.ndarray
    big_g: float
    v: HpdMatrix

    def __post_init__(self) -> None:
        f = np.atleast_1d(np.asarray(self.f, dtype=np.complex128))
        g = np.atleast_1d(np.asarray(self.g, dtype=np.complex128))
        u = as_hpd(self.u)
        v = as_hpd(self.v)
        if not (f.shape == g.shape == (u.dim,) and v.dim == u.dim):
            raise ShapeMismatchError(
                "Bellman point coordinates disagree on d",
                expected=u.dim,
                found=[f.shape, g.shape, v.dim],
            )
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "big_f", float(self.big_f))
        object.__setattr__(self, "big_g", float(self.big_g))

    @property
    def dim(self) -> int:
        return self.u.dim

    @classmethod
    def from_weight(
        cls,
        weight: MatrixWeight,
        f: GridFunction,
        g: GridFunction,
        node: Optional[DyadicInterval] = None,
    ) -> "BellmanPoint":
        """(<f>_I, <|W^{1/2} f|^2>_I, <W>_I, <g>_I, <|W^{-1/2} g|^2>_I, <W^{-1}>_I)."""
        node = DyadicInterval.root() if node is None else node
        u, v = weight.averages(node)
        rows = node.leaf_slice(weight.depth)
        f_energy = np.einsum(
            "ka,kab,kb->k",
            f.leaf_values[rows].conj(),
            weight.leaf_values[rows],
            f.leaf_values[rows],
        )
        g_energy = np.einsum(
            "ka,kab,kb->k",
            g.leaf_values[rows].conj(),
            weight.inverse_leaves[rows],
            g.leaf_values[rows],
        )
        return cls(
            f.average(node),
            float(np.mean(f_energy.real)),
            u,
            g.average(node),
            float(np.mean(g_energy.real)),
            v,
        )

    def as_vector(self) -> np.ndarray:
        """All coordinates flattened, for residuals between points."""
        return np.concatenate(
            [
                self.f,
                [self.big_f],
                self.u.entries.ravel(),
                self.g,
                [self.big_g],
                self.v.entries.ravel(),
            ]
        )

    def a2_value(self) -> float:
        """Largest eigenvalue of V^{1/2} U V^{1/2}."""
        return float(self._product_eigenvalues()[-1])

    def _product_eigenvalues(self) -> np.ndarray:
        root = self.v.power_array(0.5)
        product = root @ self.u.entries @ root
        return np.linalg.eigvalsh((product + product.conj().T) / 2)


def convex_combination(
    first: BellmanPoint, second: BellmanPoint, theta: float
) -> BellmanPoint:
    """theta * first + (1 - theta) * second."""
    rest = 1.0 - theta
    return BellmanPoint(
        theta * first.f + rest * second.f,
        theta * first.big_f + rest * second.big_f,
        theta * first.u.entries + rest * second.u.entries,
        theta * first.g + rest * second.g,
        theta * first.big_g + rest * second.big_g,
        theta * first.v.entries + rest * second.v.entries,
    )


def midpoint(first: BellmanPoint, second: BellmanPoint) -> BellmanPoint:
    return convex_combination(first, second, 0.5)


def weighted_combination(
    points: Sequence[BellmanPoint], weights: Sequence[float]
) -> BellmanPoint:
    """sum_i w_i A_i / sum_i w_i."""
    w = np.asarray(weights, dtype=float)
    w = w / w.sum()
    return BellmanPoint(
        sum(c * p.f for c, p in zip(w, points)),
        float(sum(c * p.big_f for c, p in zip(w, points))),
        sum(c * p.u.entries for c, p in zip(w, points)),
        sum(c * p.g for c, p in zip(w, points)),
        float(sum(c * p.big_g for c, p in zip(w, points))),
        sum(c * p.v.entries for c, p in zip(w, points)),
    )


def domain_check(point: BellmanPoint, x: float, tol: float = DEFAULT_PSD_TOL) -> bool:
    """Membership of a point in D_X, every constraint relaxed by tol."""
    if x < 1:
        raise PreconditionViolatedError("X must be at least 1", condition="X >= 1", x=x)
    values = point._product_eigenvalues()
    if values[0] < 1 - tol * _scale(values[0]):
        return False
    if values[-1] > x + tol * _scale(x, values[-1]):
        return False
    f_energy = _quadratic(point.v.power_array(-1.0), point.f)
    if f_energy > point.big_f + tol * _scale(point.big_f, f_energy):
        return False
    g_energy = _quadratic(point.u.power_array(-1.0), point.g)
    return g_energy <= point.big_g + tol * _scale(point.big_g, g_energy)


def theta_grid(samples: int = DEFAULT_THETA_SAMPLES) -> np.ndarray:
    """``samples`` values in [0, 1] including both endpoints and 1/2."""
    return np.unique(np.append(np.linspace(0.0, 1.0, max(samples, 2)), 0.5))


def segment_failures(
    a_plus: BellmanPoint,
    a_minus: BellmanPoint,
    x: float,
    samples: int = DEFAULT_THETA_SAMPLES,
    tol: float = DEFAULT_PSD_TOL,
    factor: float = SEGMENT_FACTOR,
) -> List[float]:
    """theta values whose combination theta A+ + (1 - theta) A- leaves D_{factor X}."""
    return [
        float(theta)
        for theta in theta_grid(samples)
        if not domain_check(convex_combination(a_plus, a_minus, theta), factor * x, tol)
    ]


def segment_in_4X(
    a_plus: BellmanPoint,
    a_minus: BellmanPoint,
    x: float,
    samples: int = DEFAULT_THETA_SAMPLES,
    tol: float = DEFAULT_PSD_TOL,
) -> bool:
    """Endpoints and midpoint in D_X put every sampled segment point in D_{4X}."""
    for name, point in (
        ("A+", a_plus),
        ("A-", a_minus),
        ("midpoint", midpoint(a_plus, a_minus)),
    ):
        if not domain_check(point, x, tol):
            raise PreconditionViolatedError(
                f"{name} is not in D_X", condition=f"{name} in D_X", x=x
            )
    failures = segment_failures(a_plus, a_minus, x, samples, tol)
    if failures:
        logger.debug(f"Segment leaves D_4X at theta = {failures}")
    return not failures


def cauchy_schwarz_midpoint_check(
    v1: MatrixLike,
    f1,
    big_f1: float,
    v2: MatrixLike,
    f2,
    big_f2: float,
    tol: float = DEFAULT_PSD_TOL,
) -> bool:
    """The constraint ||V^{-1/2} f||^2 <= F survives taking midpoints."""
    pairs = []
    for v, f, big_f in ((v1, f1, big_f1), (v2, f2, big_f2)):
        v_hpd = as_hpd(v)
        vec = np.atleast_1d(np.asarray(f, dtype=np.complex128))
        energy = _quadratic(v_hpd.power_array(-1.0), vec)
        if energy > big_f + tol * _scale(big_f, energy):
            raise PreconditionViolatedError(
                "Endpoint violates ||V^{-1/2} f||^2 <= F",
                condition="Cauchy-Schwarz",
                energy=energy,
                big_f=big_f,
            )
        pairs.append((v_hpd.entries, vec, big_f))

    v_mid = HpdMatrix((pairs[0][0] + pairs[1][0]) / 2)
    f_mid = (pairs[0][1] + pairs[1][1]) / 2
    big_f_mid = (pairs[0][2] + pairs[1][2]) / 2
    energy = _quadratic(v_mid.power_array(-1.0), f_mid)
    return energy <= big_f_mid + tol * _scale(big_f_mid, energy)


class C0Factorization(NamedTuple):
    """T^3 + I - T^2 - T against (T - I)(T + I)(T - I) for T = V1^{1/2} V2^{-1} V1^{1/2}."""

    residual: float
    psd: bool


def c0_factorization_residual(
    v1: MatrixLike, v2: MatrixLike, tol: float = DEFAULT_PSD_TOL
) -> C0Factorization:
    root = as_hpd(v1).power_array(0.5)
    t = root @ as_hpd(v2).power_array(-1.0) @ root
    t = (t + t.conj().T) / 2
    eye = np.eye(t.shape[0])
    expanded = t @ t @ t + eye - t @ t - t
    factored = (t - eye) @ (t + eye) @ (t - eye)
    residual = float(np.max(np.abs(expanded - factored)))
    return C0Factorization(residual / _scale(float(np.max(np.abs(expanded)))), is_psd(factored, tol))


def in_c0(u: MatrixLike, v: MatrixLike, tol: float = DEFAULT_PSD_TOL) -> bool:
    """I <= V^{1/2} U V^{1/2}."""
    root = as_hpd(v).power_array(0.5)
    product = root @ as_hpd(u).entries @ root
    return is_psd(product - np.eye(product.shape[0]), tol)


def c0_midpoint_check(
    u1: MatrixLike,
    v1: MatrixLike,
    u2: MatrixLike,
    v2: MatrixLike,
    tol: float = DEFAULT_PSD_TOL,
) -> bool:
    """Midpoint of two pairs with V^{1/2} U V^{1/2} >= I satisfies the same."""
    if not (in_c0(u1, v1, tol) and in_c0(u2, v2, tol)):
        raise PreconditionViolatedError(
            "Endpoints must satisfy V^{1/2} U V^{1/2} >= I", condition="C0 membership"
        )
    u_mid = (as_array(u1) + as_array(u2)) / 2
    v_mid = (as_array(v1) + as_array(v2)) / 2
    return in_c0(u_mid, v_mid, tol)


def _check_alpha(alpha: np.ndarray, k: int, tol: float) -> None:
    if alpha.shape != (1 << k,):
        raise ShapeMismatchError(
            f"alpha must have one entry per node of D_{k}", expected=1 << k, found=alpha.shape
        )
    if np.any(np.abs(alpha) > ALPHA_LIMIT + tol):
        raise PreconditionViolatedError(
            "alpha entries must lie in [-1/4, 1/4]",
            condition="|alpha| <= 1/4",
            max_abs=float(np.max(np.abs(alpha))),
        )
    if abs(alpha.sum()) > tol * max(1.0, float(np.sum(np.abs(alpha)))):
        raise PreconditionViolatedError(
            "alpha must sum to zero", condition="sum alpha = 0", total=float(alpha.sum())
        )


def check_martingale(points: Sequence[Sequence[BellmanPoint]], tol: float) -> int:
    k = len(points) - 1
    if k < 1:
        raise ShapeMismatchError("Dynamics need at least one level below the root", found=k)
    for level, row in enumerate(points):
        if len(row) != 1 << level:
            raise ShapeMismatchError(
                f"Level {level} must hold 2^{level} points", expected=1 << level, found=len(row)
            )
    for level in range(k):
        for index, parent in enumerate(points[level]):
            mid = midpoint(points[level + 1][2 * index], points[level + 1][2 * index + 1])
            target = parent.as_vector()
            residual = float(np.max(np.abs(mid.as_vector() - target)))
            if residual > tol * _scale(float(np.max(np.abs(target)))):
                raise DynamicsViolatedError(
                    f"Point at ({level}, {index}) is not the midpoint of its children",
                    level,
                    index,
                    residual,
                )
    return k


def points_from_weight(
    weight: MatrixWeight,
    f: GridFunction,
    g: GridFunction,
    k: int,
    top: Optional[DyadicInterval] = None,
) -> List[List[BellmanPoint]]:
    """Bellman points of every node of the k-level subtree below ``top``."""
    top = DyadicInterval.root() if top is None else top
    return [
        [BellmanPoint.from_weight(weight, f, g, node) for node in top.descendants(n)]
        for n in range(k + 1)
    ]


def modified_points(
    points: Sequence[Sequence[BellmanPoint]], alpha, sign: int
) -> Tuple[List[List[BellmanPoint]], List[np.ndarray]]:
    """Reweighted points A_I^{+/-} and probabilities theta_I^{+/-} per level.

    With a = 1 + sign * alpha on the leaves, A_I is the a-weighted average of
    the leaf points below I and theta_I the share of a below I within its
    parent. ``thetas[0]`` is the trivial [1.0] at the top node.
    """
    k = len(points) - 1
    a = 1.0 + sign * np.asarray(alpha, dtype=float)
    leaves = list(points[k])
    reweighted, thetas = [], []
    parent_sums = np.array([a.sum()])
    for n in range(k + 1):
        span = 1 << (k - n)
        sums = a.reshape(1 << n, span).sum(axis=1)
        reweighted.append(
            [
                weighted_combination(leaves[i * span : (i + 1) * span], a[i * span : (i + 1) * span])
                for i in range(1 << n)
            ]
        )
        thetas.append(sums / np.repeat(parent_sums, 2) if n else np.ones(1))
        parent_sums = sums
    return reweighted, thetas


def modified_dynamics(
    points: Sequence[Sequence[BellmanPoint]],
    alpha,
    x: Optional[float] = None,
    tol: float = DEFAULT_PSD_TOL,
    samples: int = DEFAULT_THETA_SAMPLES,
) -> DynamicsReport:
    """Bounds and identities of the alpha-reweighted martingale on a k-level subtree.

    ``points[n]`` lists the 2^n points of relative level n. ``x`` defaults to
    the largest V^{1/2} U V^{1/2} eigenvalue among the inputs.
    """
    k = check_martingale(points, tol)
    alpha = np.asarray(alpha, dtype=float)
    _check_alpha(alpha, k, tol)
    if x is None:
        x = max(1.0, max(p.a2_value() for row in points for p in row))

    a_ok = theta_ok = sum_ok = membership_ok = segments_ok = True
    product_residual = 0.0
    convexity_residual = 0.0
    nodes: List[NodeDynamics] = []

    for sign, label in ((1, "+"), (-1, "-")):
        a = 1.0 + sign * alpha
        a_ok &= bool(np.all(a >= A_BOUNDS[0] - tol) and np.all(a <= A_BOUNDS[1] + tol))
        reweighted, thetas = modified_points(points, alpha, sign)

        path = np.ones(1 << k)
        for n in range(1, k + 1):
            theta = thetas[n]
            theta_ok &= bool(
                np.all(theta >= THETA_BOUNDS[0] - tol) and np.all(theta <= THETA_BOUNDS[1] + tol)
            )
            sum_ok &= bool(np.all(np.abs(theta[0::2] + theta[1::2] - 1.0) <= tol))
            path *= np.repeat(theta, 1 << (k - n))
        product_residual = max(
            product_residual, float(np.max(np.abs(path - a / (1 << k))))
        )

        for n in range(k + 1):
            for index, point in enumerate(reweighted[n]):
                in_domain = domain_check(point, MEMBERSHIP_FACTOR * x, tol)
                membership_ok &= in_domain
                entry = NodeDynamics(
                    level=n,
                    index=index,
                    sign=label,
                    a=float(a[index]) if n == k else None,
                    theta=float(thetas[n][index]) if n > 0 else None,
                    in_domain=in_domain,
                )
                if n < k:
                    left = reweighted[n + 1][2 * index]
                    right = reweighted[n + 1][2 * index + 1]
                    combo = convex_combination(left, right, float(thetas[n + 1][2 * index]))
                    residual = float(np.max(np.abs(combo.as_vector() - point.as_vector())))
                    convexity_residual = max(convexity_residual, residual)
                    failures = segment_failures(
                        left, right, x, samples, tol, factor=DYNAMICS_SEGMENT_FACTOR
                    )
                    segments_ok &= not failures
                    entry.segment_ok = not failures
                    entry.convexity_residual = residual
                nodes.append(entry)

    return DynamicsReport(
        k=k,
        x=float(x),
        a_bounds_ok=a_ok,
        theta_bounds_ok=theta_ok,
        theta_sum_ok=sum_ok,
        product_identity_residual=product_residual,
        convexity_residual=convexity_residual,
        membership_ok=membership_ok,
        segments_ok=segments_ok,
        nodes=nodes,
    )


@dataclass(frozen=True, eq=False)
class CarlesonBellmanPoint:
    """Point (f, F, W, M) with <W^{-1} f, f> <= F and 0 <= M <= W."""

    f: np.ndarray
    big_f: float
    w: HpdMatrix
    m: HermMatrix

    def __post_init__(self) -> None:
        f = np.atleast_1d(np.asarray(self.f, dtype=np.complex128))
        w = as_hpd(self.w)
        m = self.m if isinstance(self.m, HermMatrix) else HermMatrix(as_array(self.m))
        if f.shape != (w.dim,) or m.dim != w.dim:
            raise ShapeMismatchError(
                "Carleson point coordinates disagree on d",
                expected=w.dim,
                found=[f.shape, m.dim],
            )
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "big_f", float(self.big_f))

    def domain_violation(self, tol: float = DEFAULT_PSD_TOL) -> Optional[str]:
        energy = _quadratic(self.w.power_array(-1.0), self.f)
        if energy > self.big_f + tol * _scale(self.big_f, energy):
            return f"<W^-1 f, f> = {energy} exceeds F = {self.big_f}"
        if not is_psd(self.m, tol):
            return "M is not positive semidefinite"
        if not is_psd(self.w.entries - self.m.entries, tol):
            return "M is not below W"
        return None

    def in_domain(self, tol: float = DEFAULT_PSD_TOL) -> bool:
        return self.domain_violation(tol) is None


def carleson_bellman(point: CarlesonBellmanPoint, tol: float = DEFAULT_PSD_TOL) -> float:
    """B = 4 (F - <(W + M)^{-1} f, f>), in [0, 4F] on the domain."""
    problem = point.domain_violation(tol)
    if problem:
        raise DomainViolationError(problem, quantity="carleson bellman point")
    total = HpdMatrix(point.w.entries + point.m.entries)
    return 4.0 * (point.big_f - _quadratic(total.power_array(-1.0), point.f))


def carleson_range_check(point: CarlesonBellmanPoint, tol: float = DEFAULT_PSD_TOL) -> bool:
    value = carleson_bellman(point, tol)
    slack = tol * _scale(point.big_f, value)
    return -slack <= value <= 4.0 * point.big_f + slack


class ConcavityGap(NamedTuple):
    """B(A) - (B(A+) + B(A-))/2 against 1/2 <(W+M~)^{-1} m (W+M~)^{-1} f, f>."""

    gap: float
    quad: float
    value: float

    def holds(self, tol: float = DEFAULT_PSD_TOL) -> bool:
        return self.gap >= self.quad - tol * _scale(self.value, self.quad)


def carleson_concavity_gap(
    point: CarlesonBellmanPoint,
    plus: CarlesonBellmanPoint,
    minus: CarlesonBellmanPoint,
    m: MatrixLike,
    tol: float = DEFAULT_PSD_TOL,
) -> ConcavityGap:
    m_arr = as_array(m)
    mtilde = (plus.m.entries + minus.m.entries) / 2
    expected: Dict[str, Tuple[np.ndarray, np.ndarray]] = {
        "f": (point.f, (plus.f + minus.f) / 2),
        "F": (np.array([point.big_f]), np.array([(plus.big_f + minus.big_f) / 2])),
        "W": (point.w.entries, (plus.w.entries + minus.w.entries) / 2),
        "M": (point.m.entries, m_arr + mtilde),
    }
    for name, (actual, wanted) in expected.items():
        residual = float(np.max(np.abs(actual - wanted)))
        if residual > tol * _scale(float(np.max(np.abs(wanted)))):
            raise MidpointMismatchError(
                f"{name} is not the midpoint of its children", field=name, residual=residual
            )

    value = carleson_bellman(point, tol)
    gap = value - (carleson_bellman(plus, tol) + carleson_bellman(minus, tol)) / 2
    resolvent = HpdMatrix(point.w.entries + mtilde).power_array(-1.0)
    quad = 0.5 * _quadratic(resolvent @ m_arr @ resolvent, point.f)
    return ConcavityGap(gap, quad, value)


class ResolventCheck(NamedTuple):
    difference_psd: bool
    e_below_identity: bool

    @property
    def passed(self) -> bool:
        return self.difference_psd and self.e_below_identity


def resolvent_check(
    w: MatrixLike, mtilde: MatrixLike, m: MatrixLike, tol: float = DEFAULT_PSD_TOL
) -> ResolventCheck:
    """(W+M~)^{-1} - (W+M~+m)^{-1} >= 1/2 (W+M~)^{-1} m (W+M~)^{-1}, and E <= I."""
    w_arr, mt_arr, m_arr = as_array(as_hpd(w)), as_array(mtilde), as_array(m)
    base = HpdMatrix(w_arr + mt_arr)
    inv = base.power_array(-1.0)
    full = HpdMatrix(w_arr + mt_arr + m_arr).power_array(-1.0)
    difference = inv - full - 0.5 * inv @ m_arr @ inv

    root = base.power_array(-0.5)
    e = root @ m_arr @ root
    return ResolventCheck(
        is_psd(difference, tol), is_psd(np.eye(e.shape[0]) - e, tol)
    )


def resolvent_inequality_check(
    w: MatrixLike, mtilde: MatrixLike, m: MatrixLike, tol: float = DEFAULT_PSD_TOL
) -> bool:
    return resolvent_check(w, mtilde, m, tol).passed
