"""
Finite dyadic tree over [0,1) with leaf-constant functions and matrix weights.

Node (j, k) is the interval [k 2^{-j}, (k+1) 2^{-j}); its left child (j+1, 2k)
is I+ and its right child (j+1, 2k+1) is I-. The Haar function of I is
h_I = |I|^{-1/2} (chi_{I+} - chi_{I-}).

Functions and weights keep their leaf values in one array and compute whole
levels at a time. ``level_averages`` builds the pyramid of node averages
bottom-up; ``haar_levels`` and ``synthesize_levels`` move between that pyramid
and per-level Haar coefficient arrays. All three accept arbitrary trailing
dimensions, which is how the operator module pushes a full basis through a
transform in one pass.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .exceptions import (
    DimensionTooLargeError,
    MissingCoefficientError,
    OutOfTreeError,
    ShapeMismatchError,
    ValidationError,
)
from .linalg import HpdMatrix, MatrixLike, as_array, stack_check_hpd, stack_power

logger = logging.getLogger(__name__)

MAX_DENSE_SIZE = 4096


@dataclass(frozen=True, order=True)
class DyadicInterval:
    """Node of the dyadic tree: level j and index k in [0, 2^j)."""

    level: int
    index: int

    def __post_init__(self) -> None:
        if self.level < 0 or not 0 <= self.index < (1 << self.level):
            raise ValidationError(
                f"Invalid dyadic interval ({self.level}, {self.index})",
                field_name="index",
                field_value=self.index,
                expected_type=f"integer in [0, 2^{self.level})",
            )

    @classmethod
    def root(cls) -> "DyadicInterval":
        return cls(0, 0)

    @property
    def length(self) -> float:
        return 2.0 ** (-self.level)

    @property
    def start(self) -> float:
        return self.index * self.length

    @property
    def plus(self) -> "DyadicInterval":
        """Left child I+."""
        return DyadicInterval(self.level + 1, 2 * self.index)

    @property
    def minus(self) -> "DyadicInterval":
        """Right child I-."""
        return DyadicInterval(self.level + 1, 2 * self.index + 1)

    @property
    def children(self) -> Tuple["DyadicInterval", "DyadicInterval"]:
        return self.plus, self.minus

    @property
    def parent(self) -> "DyadicInterval":
        if self.level == 0:
            raise OutOfTreeError("The root has no parent", level=0, index=0)
        return DyadicInterval(self.level - 1, self.index // 2)

    def ancestor(self, level: int) -> "DyadicInterval":
        if not 0 <= level <= self.level:
            raise OutOfTreeError(
                f"No ancestor at level {level}", level=self.level, index=self.index
            )
        return DyadicInterval(level, self.index >> (self.level - level))

    def descendants(self, n: int) -> List["DyadicInterval"]:
        """D_n(I): the 2^n descendants n levels down, left to right."""
        base = self.index << n
        return [DyadicInterval(self.level + n, base + i) for i in range(1 << n)]

    def contains(self, other: "DyadicInterval") -> bool:
        if other.level < self.level:
            return False
        return other.index >> (other.level - self.level) == self.index

    def leaf_slice(self, depth: int) -> slice:
        """Slice of leaf indices of a depth-``depth`` tree lying under this node."""
        shift = depth - self.level
        return slice(self.index << shift, (self.index + 1) << shift)

    @property
    def key(self) -> str:
        return f"{self.level}:{self.index}"

    def __repr__(self) -> str:
        return f"DyadicInterval({self.level}, {self.index})"


def iter_nodes(depth: int, include_leaves: bool = True) -> Iterator[DyadicInterval]:
    """All nodes in level order, coarsest first."""
    last = depth if include_leaves else depth - 1
    for level in range(last + 1):
        for index in range(1 << level):
            yield DyadicInterval(level, index)


def depth_first(depth: int, root: Optional[DyadicInterval] = None) -> Iterator[DyadicInterval]:
    """Pre-order traversal, left child first."""
    stack = [root or DyadicInterval.root()]
    while stack:
        node = stack.pop()
        yield node
        if node.level < depth:
            stack.append(node.minus)
            stack.append(node.plus)


def check_node(node: DyadicInterval, depth: int, internal: bool = False) -> None:
    """Raise OutOfTreeError unless ``node`` is in the tree (and has children)."""
    limit = depth - 1 if internal else depth
    if node.level > limit:
        what = "an internal node" if internal else "in the tree"
        raise OutOfTreeError(
            f"Node {node.key} is not {what} of depth {depth}",
            level=node.level,
            index=node.index,
            depth=depth,
        )


def depth_of(count: int) -> int:
    """log2 of a leaf count, validating that it is a power of two."""
    if count < 1 or count & (count - 1):
        raise ShapeMismatchError(
            f"Leaf count must be a power of two, got {count}", found=[count]
        )
    return count.bit_length() - 1


def check_dense_budget(depth: int, dim: int, limit: int = MAX_DENSE_SIZE) -> None:
    size = (1 << depth) * dim
    if size > limit:
        raise DimensionTooLargeError(
            f"Dense dimension 2^{depth} * {dim} = {size} exceeds {limit}",
            size=size,
            limit=limit,
        )


def level_averages(leaf_values: np.ndarray) -> List[np.ndarray]:
    """Node averages per level; entry j has shape (2^j, *leaf_values.shape[1:])."""
    depth = depth_of(leaf_values.shape[0])
    levels: List[np.ndarray] = [leaf_values] * (depth + 1)
    for level in range(depth - 1, -1, -1):
        finer = levels[level + 1]
        levels[level] = (finer[0::2] + finer[1::2]) / 2
    return levels


def haar_levels(averages: Sequence[np.ndarray]) -> List[np.ndarray]:
    """Haar coefficients per internal level from an averages pyramid.

    <f, h_I> = (|I|^{1/2} / 2) (<f>_{I+} - <f>_{I-}).
    """
    coeffs = []
    for level in range(len(averages) - 1):
        finer = averages[level + 1]
        coeffs.append((finer[0::2] - finer[1::2]) * (2.0 ** (-level / 2) / 2))
    return coeffs


def synthesize_levels(mean: np.ndarray, coeffs: Sequence[np.ndarray]) -> np.ndarray:
    """Leaf values from the global mean and per-level Haar coefficients."""
    values = np.asarray(mean)[None, ...]
    for level, level_coeffs in enumerate(coeffs):
        step = (2.0 ** (level / 2)) * level_coeffs
        left = values + step
        right = values - step
        values = np.stack([left, right], axis=1).reshape(
            (2 * values.shape[0],) + values.shape[1:]
        )
    return values


@dataclass(frozen=True, eq=False)
class GridFunction:
    """C^d-valued function, constant on the 2^L leaves of the tree."""

    leaf_values: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.leaf_values, dtype=np.complex128)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2:
            raise ShapeMismatchError(
                "Grid function leaves must have shape (2^L, d)", found=arr.shape
            )
        depth_of(arr.shape[0])
        arr.setflags(write=False)
        object.__setattr__(self, "leaf_values", arr)

    @classmethod
    def constant(cls, value, depth: int) -> "GridFunction":
        vec = np.atleast_1d(np.asarray(value, dtype=np.complex128))
        return cls(np.tile(vec, (1 << depth, 1)))

    @classmethod
    def zeros(cls, dim: int, depth: int) -> "GridFunction":
        return cls(np.zeros((1 << depth, dim), dtype=np.complex128))

    @property
    def dim(self) -> int:
        return int(self.leaf_values.shape[1])

    @property
    def depth(self) -> int:
        return depth_of(self.leaf_values.shape[0])

    @property
    def num_leaves(self) -> int:
        return int(self.leaf_values.shape[0])

    @cached_property
    def averages(self) -> List[np.ndarray]:
        return level_averages(self.leaf_values)

    @cached_property
    def coefficients(self) -> List[np.ndarray]:
        return haar_levels(self.averages)

    @property
    def mean(self) -> np.ndarray:
        return self.averages[0][0]

    def average(self, node: DyadicInterval) -> np.ndarray:
        check_node(node, self.depth)
        return self.averages[node.level][node.index]

    def haar_coeff(self, node: DyadicInterval) -> np.ndarray:
        check_node(node, self.depth, internal=True)
        return self.coefficients[node.level][node.index]

    def l2_norm_sq(self) -> float:
        return float(np.mean(np.sum(np.abs(self.leaf_values) ** 2, axis=1)))

    def inner(self, other: "GridFunction") -> complex:
        """Unweighted pairing <f, g> = integral of <f(t), g(t)> over [0,1)."""
        if other.leaf_values.shape != self.leaf_values.shape:
            raise ShapeMismatchError(
                "Grid functions must share dimension and depth",
                expected=self.leaf_values.shape,
                found=other.leaf_values.shape,
            )
        return complex(np.mean(np.sum(self.leaf_values * other.leaf_values.conj(), axis=1)))

    def __add__(self, other: "GridFunction") -> "GridFunction":
        return GridFunction(self.leaf_values + other.leaf_values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        return GridFunction(self.leaf_values - other.leaf_values)

    def scaled(self, factor: complex) -> "GridFunction":
        return GridFunction(self.leaf_values * factor)


@dataclass(frozen=True, eq=False)
class MatrixWeight:
    """HPD-matrix-valued leaf-constant weight with cached node averages."""

    leaf_values: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.leaf_values, dtype=np.complex128)
        if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
            raise ShapeMismatchError(
                "Weight leaves must have shape (2^L, d, d)", found=arr.shape
            )
        depth_of(arr.shape[0])
        stack_check_hpd(arr, "weight leaf")
        arr = (arr + np.swapaxes(arr.conj(), 1, 2)) / 2
        arr.setflags(write=False)
        object.__setattr__(self, "leaf_values", arr)

    @classmethod
    def constant(cls, matrix: MatrixLike, depth: int) -> "MatrixWeight":
        return cls(np.tile(as_array(matrix), ((1 << depth), 1, 1)))

    @classmethod
    def identity(cls, dim: int, depth: int) -> "MatrixWeight":
        return cls.constant(np.eye(dim), depth)

    @property
    def dim(self) -> int:
        return int(self.leaf_values.shape[1])

    @property
    def depth(self) -> int:
        return depth_of(self.leaf_values.shape[0])

    @property
    def num_leaves(self) -> int:
        return int(self.leaf_values.shape[0])

    @cached_property
    def inverse_leaves(self) -> np.ndarray:
        return stack_power(self.leaf_values, -1.0)

    @cached_property
    def sqrt_leaves(self) -> np.ndarray:
        return stack_power(self.leaf_values, 0.5)

    @cached_property
    def inv_sqrt_leaves(self) -> np.ndarray:
        return stack_power(self.leaf_values, -0.5)

    @cached_property
    def avg_levels(self) -> List[np.ndarray]:
        """<W>_I per level."""
        return level_averages(self.leaf_values)

    @cached_property
    def avg_inv_levels(self) -> List[np.ndarray]:
        """<W^{-1}>_I per level, from exact leaf-wise inverses."""
        return level_averages(self.inverse_leaves)

    def leaf(self, index: int) -> HpdMatrix:
        return HpdMatrix(self.leaf_values[index])

    def averages(self, node: DyadicInterval) -> Tuple[HpdMatrix, HpdMatrix]:
        check_node(node, self.depth)
        return (
            HpdMatrix(self.avg_levels[node.level][node.index]),
            HpdMatrix(self.avg_inv_levels[node.level][node.index]),
        )

    def apply_power(self, f: GridFunction, power: float) -> GridFunction:
        """Leaf-wise W^power f for power in {1, -1, 1/2, -1/2}."""
        _check_compatible(self, f)
        table = {
            1.0: self.leaf_values,
            -1.0: self.inverse_leaves,
            0.5: self.sqrt_leaves,
            -0.5: self.inv_sqrt_leaves,
        }
        if power not in table:
            raise ValidationError(
                f"Unsupported weight power {power}",
                field_name="power",
                expected_type="one of 1, -1, 1/2, -1/2",
            )
        return GridFunction(np.einsum("kab,kb->ka", table[power], f.leaf_values))


def _check_compatible(weight: MatrixWeight, f: GridFunction) -> None:
    if weight.depth != f.depth or weight.dim != f.dim:
        raise ShapeMismatchError(
            "Weight and function must share dimension and depth",
            expected=[weight.depth, weight.dim],
            found=[f.depth, f.dim],
        )


def average(f: GridFunction, node: DyadicInterval) -> np.ndarray:
    """<f>_I."""
    return f.average(node)


def haar_coeff(f: GridFunction, node: DyadicInterval) -> np.ndarray:
    """<f, h_I>."""
    return f.haar_coeff(node)


def haar_analyze(f: GridFunction) -> Tuple[np.ndarray, Dict[DyadicInterval, np.ndarray]]:
    """Global mean and the Haar coefficient of every internal node."""
    coeffs = {
        DyadicInterval(level, index): values[index]
        for level, values in enumerate(f.coefficients)
        for index in range(values.shape[0])
    }
    return f.mean.copy(), coeffs


def haar_synthesize(
    mean, coeffs: Mapping[DyadicInterval, np.ndarray], depth: int
) -> GridFunction:
    """f = <f> + sum over internal I of <f, h_I> h_I."""
    mean_vec = np.atleast_1d(np.asarray(mean, dtype=np.complex128))
    levels = []
    for level in range(depth):
        rows = []
        for index in range(1 << level):
            node = DyadicInterval(level, index)
            if node not in coeffs:
                raise MissingCoefficientError(
                    f"No Haar coefficient for node {node.key}", level, index
                )
            rows.append(np.atleast_1d(np.asarray(coeffs[node], dtype=np.complex128)))
        levels.append(np.array(rows))
    return GridFunction(synthesize_levels(mean_vec, levels))


def weight_averages(weight: MatrixWeight, node: DyadicInterval) -> Tuple[HpdMatrix, HpdMatrix]:
    """(<W>_I, <W^{-1}>_I)."""
    return weight.averages(node)


def pairing(f: GridFunction, g: GridFunction) -> complex:
    return f.inner(g)


def weighted_energy(f: GridFunction, weight: MatrixWeight) -> float:
    """<|W^{1/2} f|^2> over [0,1), i.e. mean of f* W f over the leaves."""
    _check_compatible(weight, f)
    values = np.einsum(
        "ka,kab,kb->k", f.leaf_values.conj(), weight.leaf_values, f.leaf_values
    )
    return float(np.mean(values.real))

