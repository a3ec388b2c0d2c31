"""
Martingale transforms, cancellative Haar shifts and weighted operator norms.

Both operator types act on per-level Haar coefficient arrays through
``transform_levels(coeffs, depth)``; the arrays may carry trailing batch
dimensions, so the dense matrix of an operator is obtained by pushing a block
of leaf basis vectors through the same code path that applies it to a single
function. Operators annihilate constants, so outputs always have mean zero.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple, Union

import numpy as np
import scipy.linalg

from .dyadic import (
    MAX_DENSE_SIZE,
    DyadicInterval,
    GridFunction,
    MatrixWeight,
    check_dense_budget,
    check_node,
    haar_levels,
    level_averages,
    synthesize_levels,
)
from .exceptions import (
    DepthExceededError,
    IndexOutOfRangeError,
    MissingCoefficientError,
    ShapeMismatchError,
    ValidationError,
)
from .linalg import MatrixLike, as_array, stack_op_norm, stack_power
from .models import InequalityCheck, SymbolClass
from .rng import substream

logger = logging.getLogger(__name__)

SHIFT_BOUND_SLACK = 1e-15
POWER_CHECK_RTOL = 1e-6
_DENSE_CHUNK = 512


def _eigh_descending_stack(stack: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    values, vectors = np.linalg.eigh(stack)
    return values[..., ::-1], vectors[..., ::-1]


@dataclass(frozen=True, eq=False)
class MartingaleSymbol:
    """Matrices sigma_I on every internal node; ``levels[j]`` has shape (2^j, d, d)."""

    levels: Tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        checked = []
        for level, values in enumerate(self.levels):
            arr = np.array(values, dtype=np.complex128)
            if arr.ndim != 3 or arr.shape[0] != 1 << level or arr.shape[1] != arr.shape[2]:
                raise ShapeMismatchError(
                    f"Symbol level {level} must have shape (2^{level}, d, d)",
                    expected=[1 << level, "d", "d"],
                    found=arr.shape,
                )
            arr.setflags(write=False)
            checked.append(arr)
        dims = {arr.shape[1] for arr in checked}
        if len(dims) > 1:
            raise ShapeMismatchError("Symbol levels disagree on d", found=sorted(dims))
        object.__setattr__(self, "levels", tuple(checked))

    @property
    def depth(self) -> int:
        """Depth of the tree whose internal nodes carry the symbol."""
        return len(self.levels)

    @property
    def dim(self) -> int:
        return int(self.levels[0].shape[1]) if self.levels else 0

    @classmethod
    def constant(cls, matrix: MatrixLike, depth: int) -> "MartingaleSymbol":
        arr = np.atleast_2d(np.asarray(matrix, dtype=np.complex128))
        return cls(tuple(np.tile(arr, (1 << level, 1, 1)) for level in range(depth)))

    @classmethod
    def identity(cls, dim: int, depth: int) -> "MartingaleSymbol":
        return cls.constant(np.eye(dim), depth)

    @classmethod
    def scalar(cls, values: Sequence[np.ndarray], dim: int) -> "MartingaleSymbol":
        """sigma_I = values[j][k] * I_d."""
        eye = np.eye(dim)
        return cls(tuple(np.asarray(v)[:, None, None] * eye for v in values))

    @classmethod
    def from_mapping(
        cls, mapping: Mapping[DyadicInterval, MatrixLike], depth: int
    ) -> "MartingaleSymbol":
        levels = []
        for level in range(depth):
            rows = []
            for index in range(1 << level):
                node = DyadicInterval(level, index)
                if node not in mapping:
                    raise MissingCoefficientError(
                        f"No symbol matrix for node {node.key}", level, index
                    )
                rows.append(as_array(mapping[node]))
            levels.append(np.array(rows))
        return cls(tuple(levels))

    @classmethod
    def commuting(
        cls, weight: MatrixWeight, entries: Sequence[np.ndarray]
    ) -> "MartingaleSymbol":
        """sigma_I diagonal in the eigenbasis of <W>_I.

        ``entries[j]`` has shape (2^j, d) and lists the diagonal in order of
        descending eigenvalue.
        """
        levels = []
        for level in range(weight.depth):
            _, vectors = _eigh_descending_stack(weight.avg_levels[level])
            diag = np.asarray(entries[level], dtype=np.complex128)
            scaled = vectors * diag[:, None, :]
            levels.append(scaled @ np.swapaxes(vectors.conj(), -1, -2))
        return cls(tuple(levels))

    def at(self, node: DyadicInterval) -> np.ndarray:
        check_node(node, self.depth, internal=True)
        return self.levels[node.level][node.index]

    def to_mapping(self) -> Dict[DyadicInterval, np.ndarray]:
        return {
            DyadicInterval(level, index): values[index]
            for level, values in enumerate(self.levels)
            for index in range(values.shape[0])
        }

    def adjoint(self) -> "MartingaleSymbol":
        return MartingaleSymbol(tuple(np.swapaxes(v.conj(), -1, -2) for v in self.levels))

    def scaled(self, factor: complex) -> "MartingaleSymbol":
        return MartingaleSymbol(tuple(v * factor for v in self.levels))

    def transform_levels(self, coeffs: Sequence[np.ndarray], depth: int) -> List[np.ndarray]:
        if depth != self.depth:
            raise ShapeMismatchError(
                "Symbol and function trees differ in depth",
                expected=self.depth,
                found=depth,
            )
        return [
            np.einsum("kab,kb...->ka...", sigma, c) for sigma, c in zip(self.levels, coeffs)
        ]


@dataclass(frozen=True, eq=False)
class HaarShiftSpec:
    """Cancellative Haar shift of parameters (m, n).

    ``coefficients[L]`` is a (2^m, 2^n) array whose entry (a, b) multiplies
    <f, h_I> h_J for I the a-th descendant of L at level m below it and J the
    b-th descendant at level n below it.
    """

    m: int
    n: int
    coefficients: Dict[DyadicInterval, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.m < 0 or self.n < 0:
            raise ValidationError(
                "Shift parameters must be nonnegative",
                field_name="m,n",
                field_value=[self.m, self.n],
            )
        bound = self.coefficient_bound + SHIFT_BOUND_SLACK
        checked: Dict[DyadicInterval, np.ndarray] = {}
        for node in sorted(self.coefficients):
            arr = np.array(self.coefficients[node], dtype=np.complex128)
            if arr.shape != (1 << self.m, 1 << self.n):
                raise ShapeMismatchError(
                    f"Coefficients at {node.key} must have shape (2^m, 2^n)",
                    expected=(1 << self.m, 1 << self.n),
                    found=arr.shape,
                )
            largest = float(np.max(np.abs(arr))) if arr.size else 0.0
            if largest > bound:
                raise ValidationError(
                    f"Coefficient of modulus {largest} at {node.key} exceeds "
                    f"2^(-(m+n)/2) = {self.coefficient_bound}",
                    field_name="coefficients",
                    field_value=largest,
                )
            arr.setflags(write=False)
            checked[node] = arr
        object.__setattr__(self, "coefficients", checked)

    @property
    def complexity(self) -> int:
        return max(self.m, self.n) + 1

    @property
    def coefficient_bound(self) -> float:
        return 2.0 ** (-(self.m + self.n) / 2)

    @property
    def anchors(self) -> List[DyadicInterval]:
        return list(self.coefficients)

    @property
    def required_depth(self) -> int:
        """Smallest tree depth on which every anchor's k-subtree fits."""
        if not self.coefficients:
            return 0
        return max(node.level for node in self.coefficients) + self.complexity

    def slice(self, j: int) -> "HaarShiftSpec":
        """Anchors whose level is congruent to j modulo the complexity."""
        k = self.complexity
        if not 0 <= j < k:
            raise IndexOutOfRangeError(f"Slice index {j} outside [0, {k})", j, k)
        kept = {node: c for node, c in self.coefficients.items() if node.level % k == j}
        return HaarShiftSpec(self.m, self.n, kept)

    def slices(self) -> List["HaarShiftSpec"]:
        return [self.slice(j) for j in range(self.complexity)]

    def adjoint(self) -> "HaarShiftSpec":
        return HaarShiftSpec(
            self.n, self.m, {node: c.conj().T for node, c in self.coefficients.items()}
        )

    def self_adjoint_part(self) -> "HaarShiftSpec":
        """(S + S*) / 2; coefficients then satisfy c_IJ = conj(c_JI)."""
        if self.m != self.n:
            raise ValidationError(
                "Only shifts with m = n have a self-adjoint part of the same type",
                field_name="m,n",
                field_value=[self.m, self.n],
            )
        return HaarShiftSpec(
            self.m,
            self.n,
            {node: (c + c.conj().T) / 2 for node, c in self.coefficients.items()},
        )

    def scaled(self, factor: complex) -> "HaarShiftSpec":
        if abs(factor) > 1:
            raise ValidationError(
                "Scaling a shift by more than 1 breaks the coefficient bound",
                field_name="factor",
                field_value=abs(factor),
            )
        return HaarShiftSpec(
            self.m, self.n, {node: c * factor for node, c in self.coefficients.items()}
        )

    def transform_levels(self, coeffs: Sequence[np.ndarray], depth: int) -> List[np.ndarray]:
        if self.required_depth > depth:
            raise DepthExceededError(
                f"Shift needs depth {self.required_depth}, tree has {depth}",
                required_depth=self.required_depth,
                depth=depth,
            )
        out = [np.zeros_like(c) for c in coeffs]
        m, n = self.m, self.n
        for node, c in self.coefficients.items():
            source = coeffs[node.level + m][node.index << m : (node.index + 1) << m]
            target = slice(node.index << n, (node.index + 1) << n)
            out[node.level + n][target] += np.einsum("ij,i...->j...", c, source)
        return out


OperatorSpec = Union[MartingaleSymbol, HaarShiftSpec]


def _apply(op: OperatorSpec, f: GridFunction) -> GridFunction:
    coeffs = op.transform_levels(f.coefficients, f.depth)
    return GridFunction(synthesize_levels(np.zeros(f.dim, dtype=np.complex128), coeffs))


def apply_martingale_transform(sigma: MartingaleSymbol, f: GridFunction) -> GridFunction:
    """T_sigma f = sum over I of sigma_I <f, h_I> h_I."""
    if sigma.dim != f.dim and sigma.depth > 0:
        raise ShapeMismatchError(
            "Symbol and function dimensions differ", expected=sigma.dim, found=f.dim
        )
    return _apply(sigma, f)


def apply_haar_shift(spec: HaarShiftSpec, f: GridFunction) -> GridFunction:
    """S f = sum over anchors L and I, J below L of c^L_{I,J} <f, h_I> h_J."""
    return _apply(spec, f)


def apply_operator(op: OperatorSpec, f: GridFunction) -> GridFunction:
    if isinstance(op, MartingaleSymbol):
        return apply_martingale_transform(op, f)
    return apply_haar_shift(op, f)


def shift_slice(spec: HaarShiftSpec, j: int) -> HaarShiftSpec:
    """S_j, the part of S anchored on levels congruent to j modulo k."""
    return spec.slice(j)


def sigma_norm(sigma: MartingaleSymbol, weight: MatrixWeight) -> float:
    """max over I of ||<W>_I^{1/2} sigma_I <W>_I^{-1/2}||."""
    if sigma.depth != weight.depth:
        raise ShapeMismatchError(
            "Symbol and weight trees differ in depth",
            expected=weight.depth,
            found=sigma.depth,
        )
    best = 0.0
    for level, values in enumerate(sigma.levels):
        avg = weight.avg_levels[level]
        conjugated = stack_power(avg, 0.5) @ values @ stack_power(avg, -0.5)
        best = max(best, float(stack_op_norm(conjugated).max()))
    return best


def random_martingale_symbol(
    rng: np.random.Generator,
    weight: MatrixWeight,
    symbol_class: Union[SymbolClass, str] = SymbolClass.SIGNS,
) -> MartingaleSymbol:
    """Random symbol with sigma_norm at most one on ``weight``.

    ``signs`` draws a scalar +/-1 per node; ``commuting`` draws diagonal
    entries in the closed unit disk in the eigenbasis of <W>_I; ``general``
    conjugates a random contraction by <W>_I^{-1/2} so its weighted norm is 1.
    """
    symbol_class = SymbolClass(symbol_class)
    dim, depth = weight.dim, weight.depth
    if symbol_class is SymbolClass.SIGNS:
        signs = [rng.choice([-1.0, 1.0], size=1 << level) for level in range(depth)]
        return MartingaleSymbol.scalar(signs, dim)

    if symbol_class is SymbolClass.COMMUTING:
        entries = []
        for level in range(depth):
            shape = (1 << level, dim)
            radius = np.sqrt(rng.uniform(0.0, 1.0, size=shape))
            entries.append(radius * np.exp(2j * np.pi * rng.uniform(size=shape)))
        return MartingaleSymbol.commuting(weight, entries)

    levels = []
    for level in range(depth):
        count = 1 << level
        raw = rng.standard_normal((count, dim, dim)) + 1j * rng.standard_normal(
            (count, dim, dim)
        )
        contraction = raw / stack_op_norm(raw)[:, None, None]
        avg = weight.avg_levels[level]
        levels.append(stack_power(avg, -0.5) @ contraction @ stack_power(avg, 0.5))
    return MartingaleSymbol(tuple(levels))


def random_haar_shift(
    rng: np.random.Generator, m: int, n: int, depth: int, density: float = 1.0
) -> HaarShiftSpec:
    """Shift anchored at nodes whose k-subtree fits in the tree.

    Each eligible anchor is kept with probability ``density``; coefficients are
    uniform on the disk of radius 2^(-(m+n)/2).
    """
    k = max(m, n) + 1
    radius = 2.0 ** (-(m + n) / 2)
    coefficients = {}
    for level in range(max(depth - k + 1, 0)):
        for index in range(1 << level):
            if density < 1.0 and rng.uniform() >= density:
                continue
            shape = (1 << m, 1 << n)
            modulus = radius * np.sqrt(rng.uniform(0.0, 1.0, size=shape))
            phase = np.exp(2j * np.pi * rng.uniform(size=shape))
            coefficients[DyadicInterval(level, index)] = modulus * phase
    return HaarShiftSpec(m, n, coefficients)


def dense_matrix(op: OperatorSpec, weight: MatrixWeight) -> np.ndarray:
    """Matrix of W^{1/2} T W^{-1/2} on leaf basis vectors, index = leaf * d + a."""
    depth, dim = weight.depth, weight.dim
    size = (1 << depth) * dim
    columns = []
    for start in range(0, size, _DENSE_CHUNK):
        stop = min(start + _DENSE_CHUNK, size)
        basis = np.zeros((size, stop - start), dtype=np.complex128)
        basis[np.arange(start, stop), np.arange(stop - start)] = 1.0
        basis = basis.reshape(1 << depth, dim, stop - start)

        x = np.einsum("kab,kbn->kan", weight.inv_sqrt_leaves, basis)
        coeffs = op.transform_levels(haar_levels(level_averages(x)), depth)
        y = synthesize_levels(np.zeros((dim, stop - start), dtype=np.complex128), coeffs)
        z = np.einsum("kab,kbn->kan", weight.sqrt_leaves, y)
        columns.append(z.reshape(size, stop - start))
    return np.hstack(columns)


def power_iteration_norm(matrix: np.ndarray, iterations: int = 500) -> float:
    """Largest singular value estimated by power iteration on M* M."""
    rng = substream(0, 0, matrix.shape[1])
    v = rng.standard_normal(matrix.shape[1]) + 1j * rng.standard_normal(matrix.shape[1])
    v /= np.linalg.norm(v)
    estimate = 0.0
    for _ in range(iterations):
        mv = matrix @ v
        estimate = float(np.linalg.norm(mv))
        w = matrix.conj().T @ mv
        norm = np.linalg.norm(w)
        if norm == 0:
            return 0.0
        v = w / norm
    return estimate


def weighted_norm(
    op: OperatorSpec,
    weight: MatrixWeight,
    max_dense: int = MAX_DENSE_SIZE,
    power_iterations: int = 500,
) -> float:
    """||T|| on L^2(W), the largest singular value of W^{1/2} T W^{-1/2}."""
    check_dense_budget(weight.depth, weight.dim, max_dense)
    if isinstance(op, MartingaleSymbol) and op.dim not in (0, weight.dim):
        raise ShapeMismatchError(
            "Symbol and weight dimensions differ", expected=weight.dim, found=op.dim
        )
    matrix = dense_matrix(op, weight)
    norm = float(scipy.linalg.svdvals(matrix)[0])

    if power_iterations > 0:
        estimate = power_iteration_norm(matrix, power_iterations)
        if abs(estimate - norm) > POWER_CHECK_RTOL * max(norm, 1.0):
            logger.warning(
                f"Power iteration gives {estimate:.9g}, SVD gives {norm:.9g} "
                f"after {power_iterations} steps"
            )
    return norm


def _projected(vectors: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Coordinates e_i* x of per-node vectors in per-node eigenframes."""
    return np.einsum("kai,ka->ki", vectors.conj(), values)


def _check_pair(f: GridFunction, g: GridFunction, weight: MatrixWeight) -> None:
    for h in (f, g):
        if h.depth != weight.depth or h.dim != weight.dim:
            raise ShapeMismatchError(
                "Functions and weight must share dimension and depth",
                expected=[weight.depth, weight.dim],
                found=[h.depth, h.dim],
            )


def linearization_check(
    f: GridFunction, g: GridFunction, weight: MatrixWeight
) -> InequalityCheck:
    """Eigenprojected coefficient pairing against its weighted bound.

    lhs = sum over I and i of |<P_I^i <f,h_I>, P_I^i <g,h_I>>| with P_I^i the
    eigenprojections of <W>_I; rhs = d * sum over I of
    ||<W>_I^{1/2} <f,h_I>|| ||<W>_I^{-1/2} <g,h_I>||.
    """
    _check_pair(f, g, weight)
    lhs = 0.0
    rhs = 0.0
    for level in range(weight.depth):
        values, vectors = _eigh_descending_stack(weight.avg_levels[level])
        pf = _projected(vectors, f.coefficients[level])
        pg = _projected(vectors, g.coefficients[level])
        lhs += float(np.sum(np.abs(pf) * np.abs(pg)))
        norm_f = np.sqrt(np.sum(values * np.abs(pf) ** 2, axis=1))
        norm_g = np.sqrt(np.sum(np.abs(pg) ** 2 / values, axis=1))
        rhs += float(np.sum(norm_f * norm_g))
    return InequalityCheck(lhs, weight.dim * rhs)


def linearization_average_form(
    f: GridFunction, g: GridFunction, weight: MatrixWeight
) -> float:
    """sum over I, i of |<P(<f>_{I+} - <f>_{I-}), P(<g>_{I+} - <g>_{I-})>| |I|."""
    _check_pair(f, g, weight)
    total = 0.0
    for level in range(weight.depth):
        _, vectors = _eigh_descending_stack(weight.avg_levels[level])
        finer_f = f.averages[level + 1]
        finer_g = g.averages[level + 1]
        pf = _projected(vectors, finer_f[0::2] - finer_f[1::2])
        pg = _projected(vectors, finer_g[0::2] - finer_g[1::2])
        total += float(np.sum(np.abs(pf) * np.abs(pg))) * 2.0**-level
    return total


def slice_bound_check(
    spec: HaarShiftSpec, f: GridFunction, g: GridFunction, weight: MatrixWeight
) -> InequalityCheck:
    """|<S f, g>| against the averaged bound over each anchor's k-subtree.

    rhs = sum over anchors L of |L| sum over i, P, Q of
    |P_L^i (<f>_P - <f>_L) / 2^k| |P_L^i (<g>_Q - <g>_L) / 2^k| with P, Q the
    descendants of L k levels down.
    """
    _check_pair(f, g, weight)
    k = spec.complexity
    if spec.required_depth > weight.depth:
        raise DepthExceededError(
            f"Slice bound needs depth {spec.required_depth}, tree has {weight.depth}",
            required_depth=spec.required_depth,
            depth=weight.depth,
        )
    lhs = abs(apply_haar_shift(spec, f).inner(g))

    rhs = 0.0
    scale = 2.0**-k
    for node in spec.anchors:
        _, vectors = _eigh_descending_stack(weight.avg_levels[node.level][node.index])
        below = slice(node.index << k, (node.index + 1) << k)
        df = (f.averages[node.level + k][below] - f.average(node)) * scale
        dg = (g.averages[node.level + k][below] - g.average(node)) * scale
        pf = np.abs(df @ vectors.conj())
        pg = np.abs(dg @ vectors.conj())
        rhs += node.length * float(np.sum(pf.sum(axis=0) * pg.sum(axis=0)))
    return InequalityCheck(float(lhs), rhs)


def iter_slice_checks(
    spec: HaarShiftSpec, f: GridFunction, g: GridFunction, weight: MatrixWeight
) -> Iterable[Tuple[int, InequalityCheck]]:
    for j, part in enumerate(spec.slices()):
        yield j, slice_bound_check(part, f, g, weight)

