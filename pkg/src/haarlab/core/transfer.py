"""
Dyadic cubes of [0,1)^p arranged on dyadic intervals of [0,1).

Each cube generation is split one axis at a time, axis 0 first, low half to
the left child. A cube of generation g is the interval node at level g * p;
the interval nodes at levels g * p + r with 0 < r < p are the "almost
children": boxes with the first r axes split once more. The interval index of
a leaf is the Morton interleaving of its cube coordinates.

Averages over mapped pairs agree, so a weight moved to the line keeps its
cube characteristic on cube nodes and loses at most a factor 2^{2(p-1)} on
the almost children.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Dict, List, NamedTuple, Tuple

import numpy as np
import scipy.linalg

from .dyadic import DyadicInterval, GridFunction, MatrixWeight, check_node
from .exceptions import BudgetExceededError, ShapeMismatchError, ValidationError
from .linalg import DEFAULT_PSD_TOL, is_psd, random_unitary, stack_check_hpd
from .serialization import matrix_from_json, matrix_to_json, read_json
from .suite import Params, Suite, TrialOutcome
from .weights import a2_characteristic, characteristic_values

logger = logging.getLogger(__name__)

MAX_CUBE_DIMENSION = 3
MAX_LEAF_BITS = 12


@dataclass(frozen=True)
class CubeIntervalMap:
    """Bijection between cube nodes (and almost children) and interval nodes."""

    p: int
    cube_depth: int

    @property
    def interval_depth(self) -> int:
        return self.p * self.cube_depth

    @property
    def side(self) -> int:
        """Leaves per axis."""
        return 1 << self.cube_depth

    @cached_property
    def leaf_order(self) -> np.ndarray:
        """Flat (C-order) cube leaf index of every interval leaf."""
        depth = self.interval_depth
        intervals = np.arange(1 << depth)
        coords = np.zeros((self.p, intervals.size), dtype=np.int64)
        for position in range(depth):
            bit = (intervals >> (depth - 1 - position)) & 1
            axis = position % self.p
            coords[axis] = 2 * coords[axis] + bit
        order = np.ravel_multi_index(tuple(coords), (self.side,) * self.p)
        order.setflags(write=False)
        return order

    def region(self, node: DyadicInterval) -> Tuple[Tuple[int, int], ...]:
        """Leaf-coordinate range [lo, hi) on every axis covered by an interval node."""
        check_node(node, self.interval_depth)
        prefixes = [0] * self.p
        splits = [0] * self.p
        for position in range(node.level):
            bit = (node.index >> (node.level - 1 - position)) & 1
            axis = position % self.p
            prefixes[axis] = 2 * prefixes[axis] + bit
            splits[axis] += 1
        ranges = []
        for prefix, count in zip(prefixes, splits):
            width = 1 << (self.cube_depth - count)
            ranges.append((prefix * width, (prefix + 1) * width))
        return tuple(ranges)

    def is_cube(self, node: DyadicInterval) -> bool:
        return node.level % self.p == 0

    def cube_of(self, node: DyadicInterval) -> DyadicInterval:
        """The cube node an almost child belongs to (the node itself for cubes)."""
        return node.ancestor(node.level - node.level % self.p)

    def generation(self, node: DyadicInterval) -> int:
        return node.level // self.p

    def almost_children(self, cube: DyadicInterval) -> List[DyadicInterval]:
        """Interval nodes D_n(I) for 0 < n < p below a cube node I."""
        if not self.is_cube(cube) or self.generation(cube) >= self.cube_depth:
            raise ValidationError(
                f"{cube.key} is not a cube node with children", field_name="cube"
            )
        return [node for n in range(1, self.p) for node in cube.descendants(n)]

    def children(self, cube: DyadicInterval) -> List[DyadicInterval]:
        return cube.descendants(self.p)

    def measure(self, node: DyadicInterval) -> float:
        """Volume of the region in [0,1)^p."""
        volume = 1.0
        for lo, hi in self.region(node):
            volume *= (hi - lo) / self.side
        return volume


def build_map(
    p: int,
    cube_depth: int,
    max_p: int = MAX_CUBE_DIMENSION,
    max_leaf_bits: int = MAX_LEAF_BITS,
) -> CubeIntervalMap:
    if p < 1 or cube_depth < 0:
        raise ValidationError(
            "p must be at least 1 and the cube depth nonnegative", field_name="p", field_value=p
        )
    if p > max_p:
        raise BudgetExceededError(f"Cube dimension {p} exceeds {max_p}", p, max_p)
    if p * cube_depth > max_leaf_bits:
        raise BudgetExceededError(
            f"p * depth = {p * cube_depth} exceeds the leaf budget 2^{max_leaf_bits}",
            p * cube_depth,
            max_leaf_bits,
        )
    logger.debug(f"Built cube map p={p}, cube depth {cube_depth}")
    return CubeIntervalMap(p, cube_depth)


@dataclass(frozen=True, eq=False)
class CubeGrid:
    """Values on the 2^{p D} leaf cubes, shaped (2^D,)*p + value shape."""

    values: np.ndarray
    p: int

    def __post_init__(self) -> None:
        arr = np.array(self.values)
        if arr.ndim < self.p:
            raise ShapeMismatchError("Cube grid has fewer axes than p", expected=self.p, found=arr.ndim)
        sides = arr.shape[: self.p]
        side = sides[0]
        if any(s != side for s in sides) or side < 1 or side & (side - 1):
            raise ShapeMismatchError(
                "Cube grid sides must be equal powers of two", found=sides
            )
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def depth(self) -> int:
        return self.values.shape[0].bit_length() - 1

    @property
    def value_shape(self) -> Tuple[int, ...]:
        return tuple(self.values.shape[self.p :])

    def flat_leaves(self) -> np.ndarray:
        """Leaf values in C order, shape (2^{p D},) + value shape."""
        return self.values.reshape((-1,) + self.value_shape)

    def box_average(self, ranges: Tuple[Tuple[int, int], ...]) -> np.ndarray:
        box = self.values[tuple(slice(lo, hi) for lo, hi in ranges)]
        return box.mean(axis=tuple(range(self.p)))

    def generation_averages(self, generation: int) -> np.ndarray:
        """Averages over all cubes of a generation, shape (2^{p g},) + value shape."""
        per_axis = 1 << generation
        block = self.values.shape[0] // per_axis
        shape: List[int] = []
        for _ in range(self.p):
            shape.extend([per_axis, block])
        blocks = self.values.reshape(tuple(shape) + self.value_shape)
        averages = blocks.mean(axis=tuple(range(1, 2 * self.p, 2)))
        return averages.reshape((-1,) + self.value_shape)


def _check_grid(cmap: CubeIntervalMap, grid: CubeGrid) -> None:
    if grid.p != cmap.p or grid.depth != cmap.cube_depth:
        raise ShapeMismatchError(
            "Cube grid does not match the map",
            expected=[cmap.p, cmap.cube_depth],
            found=[grid.p, grid.depth],
        )


def transfer_function(cmap: CubeIntervalMap, f: CubeGrid) -> GridFunction:
    """g on the line with <g>_I = <f>_Q for every mapped pair."""
    _check_grid(cmap, f)
    return GridFunction(f.flat_leaves()[cmap.leaf_order])


def transfer_weight(cmap: CubeIntervalMap, w: CubeGrid) -> MatrixWeight:
    _check_grid(cmap, w)
    return MatrixWeight(w.flat_leaves()[cmap.leaf_order])


def transfer_residual(cmap: CubeIntervalMap, f: CubeGrid) -> float:
    """Largest |<g>_I - <f>_R| over all interval nodes, R summed directly on the cube."""
    g = transfer_function(cmap, f)
    values = f.values if f.value_shape else f.values[..., None]
    grid = CubeGrid(values, f.p)
    worst = 0.0
    for level, averages in enumerate(g.averages):
        for index in range(1 << level):
            direct = grid.box_average(cmap.region(DyadicInterval(level, index)))
            worst = max(worst, float(np.max(np.abs(averages[index] - direct))))
    return worst


def cube_characteristic(w: CubeGrid) -> float:
    """[W]_{A2} over the true dyadic cubes only."""
    inverse = CubeGrid(np.linalg.inv(w.values), w.p)
    best = 1.0
    for generation in range(w.depth + 1):
        values = characteristic_values(
            w.generation_averages(generation), inverse.generation_averages(generation)
        )
        best = max(best, float(values.max()))
    return best


class InflationReport(NamedTuple):
    cube_x: float
    line_x: float
    bound: float
    witness: Tuple[int, int]

    @property
    def ratio(self) -> float:
        return self.line_x / self.cube_x

    def holds(self, tol: float = DEFAULT_PSD_TOL) -> bool:
        return self.line_x <= self.bound + tol * max(1.0, self.bound)


def inflation_factor(p: int) -> float:
    return 2.0 ** (2 * (p - 1))


def inflation_check(cmap: CubeIntervalMap, w: CubeGrid) -> InflationReport:
    """Line characteristic against 2^{2(p-1)} times the cube characteristic."""
    _check_grid(cmap, w)
    cube_x = cube_characteristic(w)
    report = a2_characteristic(transfer_weight(cmap, w))
    return InflationReport(
        cube_x,
        report.characteristic,
        inflation_factor(cmap.p) * cube_x,
        (report.witness_level, report.witness_index),
    )


class AlmostChildReport(NamedTuple):
    checked: int
    size_ok: bool
    order_ok: bool
    measure_ok: bool

    @property
    def passed(self) -> bool:
        return self.size_ok and self.order_ok and self.measure_ok


def almost_child_check(
    cmap: CubeIntervalMap, w: CubeGrid, tol: float = DEFAULT_PSD_TOL
) -> AlmostChildReport:
    """|R| >= 2^{-p+1} |Q| and the integrals of W and W^{-1} over R stay below those over Q."""
    weight = transfer_weight(cmap, w)
    sums = [avg * 2.0**-level for level, avg in enumerate(weight.avg_levels)]
    inv_sums = [avg * 2.0**-level for level, avg in enumerate(weight.avg_inv_levels)]
    checked = 0
    size_ok = order_ok = measure_ok = True
    for generation in range(cmap.cube_depth):
        for index in range(1 << (generation * cmap.p)):
            cube = DyadicInterval(generation * cmap.p, index)
            cube_measure = cmap.measure(cube)
            measure_ok &= abs(cube_measure - cube.length) <= 1e-15
            for child in cmap.almost_children(cube):
                checked += 1
                measure = cmap.measure(child)
                measure_ok &= abs(measure - child.length) <= 1e-15
                size_ok &= measure >= 2.0 ** (1 - cmap.p) * cube_measure
                for table in (sums, inv_sums):
                    gap = table[cube.level][cube.index] - table[child.level][child.index]
                    order_ok &= is_psd(gap, tol)
    return AlmostChildReport(checked, bool(size_ok), bool(order_ok), bool(measure_ok))


def random_cube_weight(
    rng: np.random.Generator,
    p: int,
    depth: int,
    dim: int,
    amplitude: float = 0.5,
    jitter: float = 0.1,
) -> CubeGrid:
    """Q J_leaf diag(exp(walk)) J_leaf* Q* on the cube leaves.

    The log eigenvalues follow a dyadic walk over cube generations; J_leaf is
    the exponential of a small skew-Hermitian matrix drawn per leaf.
    """
    side = 1 << depth
    leaves = side**p
    frame = random_unitary(rng, dim)
    walk = np.zeros((side,) * p + (dim,))
    for generation in range(1, depth + 1):
        steps = rng.uniform(-amplitude, amplitude, size=(1 << generation,) * p + (dim,))
        for axis in range(p):
            steps = np.repeat(steps, 1 << (depth - generation), axis=axis)
        walk += steps
    walk = walk.reshape(leaves, dim)

    g = rng.standard_normal((leaves, dim, dim)) + 1j * rng.standard_normal((leaves, dim, dim))
    skew = jitter * (g - np.swapaxes(g.conj(), 1, 2)) / 2
    rotations = np.array([frame @ scipy.linalg.expm(s) for s in skew])
    leaf_values = np.einsum("kab,kb,kcb->kac", rotations, np.exp(walk), rotations.conj())
    leaf_values = (leaf_values + np.swapaxes(leaf_values.conj(), 1, 2)) / 2
    stack_check_hpd(leaf_values, "cube weight leaf")
    return CubeGrid(leaf_values.reshape((side,) * p + (dim, dim)), p)


def cube_weight_to_json(w: CubeGrid) -> Dict[str, Any]:
    """``{"p", "depth", "d", "leaves": [matrix, ...]}`` with leaves in C order."""
    return {
        "p": w.p,
        "depth": w.depth,
        "d": int(w.value_shape[0]),
        "leaves": [matrix_to_json(leaf) for leaf in w.flat_leaves()],
    }


def cube_weight_from_json(data: Dict[str, Any]) -> CubeGrid:
    for key in ("p", "depth", "leaves"):
        if key not in data:
            raise ValidationError(f"Cube weight JSON is missing {key}", field_name=key)
    p, depth = int(data["p"]), int(data["depth"])
    leaves = np.array([matrix_from_json(leaf) for leaf in data["leaves"]])
    if leaves.shape[0] != 1 << (p * depth):
        raise ShapeMismatchError(
            "Cube weight leaf count does not match p and depth",
            expected=1 << (p * depth),
            found=leaves.shape[0],
        )
    stack_check_hpd(leaves, "cube weight leaf")
    side = 1 << depth
    return CubeGrid(leaves.reshape((side,) * p + leaves.shape[1:]), p)


def load_cube_weight(path) -> CubeGrid:
    return cube_weight_from_json(read_json(path))


def _pick_shape(rng: np.random.Generator, params: Params) -> Tuple[int, int, int]:
    p = int(rng.choice(params["p_values"]))
    dim = int(rng.integers(1, params["max_d"] + 1))
    depth = min(int(params["depth"]), params.get("max_leaf_bits", MAX_LEAF_BITS) // p)
    return p, depth, dim


def _generate_cube_weight(rng: np.random.Generator, params: Params) -> Dict[str, Any]:
    p, depth, dim = _pick_shape(rng, params)
    w = random_cube_weight(rng, p, depth, dim, params.get("amplitude", 0.5), params.get("jitter", 0.1))
    return {"p": p, "values": w.values}


def _evaluate_inflation(inputs: Dict[str, Any], params: Params) -> TrialOutcome:
    w = CubeGrid(inputs["values"], int(inputs["p"]))
    cmap = build_map(w.p, w.depth)
    report = inflation_check(cmap, w)
    almost = almost_child_check(cmap, w)
    tol = params.get("tol", DEFAULT_PSD_TOL)
    passed = report.holds(tol) and almost.passed
    factor = inflation_factor(w.p)
    return TrialOutcome(
        observed=report.line_x,
        bound=report.bound,
        passed=passed,
        row={
            "p": w.p,
            "d": int(w.value_shape[0]),
            "depth": w.depth,
            "cube_x": report.cube_x,
            "line_x": report.line_x,
            "ratio": report.ratio,
            "bound": factor,
            "almost_children": almost.passed,
            "passed": passed,
        },
        details={"witness": list(report.witness)},
        ratio=report.ratio / factor,
        dim=int(w.value_shape[0]),
    )


def _generate_cube_function(rng: np.random.Generator, params: Params) -> Dict[str, Any]:
    p, depth, dim = _pick_shape(rng, params)
    shape = (1 << depth,) * p + (dim,)
    return {"p": p, "values": rng.standard_normal(shape) + 1j * rng.standard_normal(shape)}


def _evaluate_averages(inputs: Dict[str, Any], params: Params) -> TrialOutcome:
    f = CubeGrid(inputs["values"], int(inputs["p"]))
    residual = transfer_residual(build_map(f.p, f.depth), f)
    limit = params.get("average_tol", 1e-12)
    passed = residual <= limit
    return TrialOutcome(
        observed=residual,
        bound=limit,
        passed=passed,
        row={"p": f.p, "depth": f.depth, "residual": residual, "passed": passed},
    )


_TRANSFER_DEFAULTS: Params = {"p_values": (2, 3), "max_d": 3, "depth": 3}

INFLATION_SUITE = Suite(
    name="transfer-inflation",
    module="transfer",
    operation="inflation_check",
    stream=60,
    generate=_generate_cube_weight,
    evaluate=_evaluate_inflation,
    columns=("p", "d", "depth", "cube_x", "line_x", "ratio", "bound", "almost_children", "passed"),
    defaults=_TRANSFER_DEFAULTS,
    description="Line characteristic <= 2^{2(p-1)} cube characteristic",
)

AVERAGES_SUITE = Suite(
    name="transfer-averages",
    module="transfer",
    operation="transfer_function",
    stream=61,
    generate=_generate_cube_function,
    evaluate=_evaluate_averages,
    columns=("p", "depth", "residual", "passed"),
    defaults=_TRANSFER_DEFAULTS,
    description="Averages agree on every cube, almost child and interval",
)

SUITES = (INFLATION_SUITE, AVERAGES_SUITE)
