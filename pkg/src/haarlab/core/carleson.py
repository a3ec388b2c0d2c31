"""
Matrix Carleson embedding on a finite dyadic tree.

For PSD matrices A_I on every node (leaves included) and a weight W, the
embedding states

    t * sum_I <(I + t <W>_I^{-1} M~_I)^{-1} A_I (I + t M~_I <W>_I^{-1})^{-1} x_I, x_I>
        <= 8 ||f||^2,    x_I = <W^{1/2} f>_I,

whenever (1/|I|) sum_{J in I} <W>_J A_J <W>_J <= <W>_I at every node, with
M~_I = (1/|I|) sum over strict descendants J of <W>_J A_J <W>_J.
"""

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .bellman import CarlesonBellmanPoint, carleson_bellman, carleson_concavity_gap
from .dyadic import DyadicInterval, GridFunction, MatrixWeight, depth_first, level_averages
from .exceptions import ConditionViolatedError, ShapeMismatchError, ValidationError
from .linalg import (
    DEFAULT_PSD_TOL,
    HermMatrix,
    HpdMatrix,
    hermitian_part,
    stack_eigvalsh,
    stack_power,
)
from .models import FuzzReport, InequalityCheck
from .suite import Params, Suite, TrialOutcome, run_suite
from .weights import random_a2_weight_from_rng

logger = logging.getLogger(__name__)

EMBEDDING_CONSTANT = 8.0
IMAGINARY_RESIDUE_TOL = 1e-12


def _check_blocks(blocks: Sequence[np.ndarray], weight: MatrixWeight) -> Tuple[np.ndarray, ...]:
    if len(blocks) != weight.depth + 1:
        raise ShapeMismatchError(
            "A Carleson sequence needs one block array per level, leaves included",
            expected=weight.depth + 1,
            found=len(blocks),
        )
    checked = []
    for level, values in enumerate(blocks):
        arr = np.array(values, dtype=np.complex128)
        if arr.shape != (1 << level, weight.dim, weight.dim):
            raise ShapeMismatchError(
                f"Level {level} blocks must have shape (2^{level}, d, d)",
                expected=(1 << level, weight.dim, weight.dim),
                found=arr.shape,
            )
        arr = hermitian_part(arr)
        smallest = stack_eigvalsh(arr)[:, 0]
        scale = np.maximum(1.0, np.max(np.abs(arr), axis=(1, 2)))
        if np.any(smallest < -DEFAULT_PSD_TOL * scale):
            raise ValidationError(
                f"Level {level} contains a block that is not positive semidefinite",
                field_name="blocks",
                field_value=float(smallest.min()),
            )
        arr.setflags(write=False)
        checked.append(arr)
    return tuple(checked)


@dataclass(frozen=True, eq=False)
class CarlesonSequence:
    """PSD blocks A_I on every node of a weight's tree, with cached node sums."""

    weight: MatrixWeight
    blocks: Tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "blocks", _check_blocks(self.blocks, self.weight))

    @property
    def depth(self) -> int:
        return self.weight.depth

    @property
    def dim(self) -> int:
        return self.weight.dim

    @cached_property
    def conjugated(self) -> List[np.ndarray]:
        """<W>_I A_I <W>_I per level."""
        return [
            hermitian_part(avg @ block @ avg)
            for avg, block in zip(self.weight.avg_levels, self.blocks)
        ]

    @cached_property
    def subtree_sums(self) -> List[np.ndarray]:
        """S_I = sum over J in I of <W>_J A_J <W>_J, accumulated bottom-up."""
        sums: List[np.ndarray] = list(self.conjugated)
        for level in range(self.depth - 1, -1, -1):
            below = sums[level + 1]
            sums[level] = self.conjugated[level] + below[0::2] + below[1::2]
        return sums

    @cached_property
    def normalized_sums(self) -> List[np.ndarray]:
        """M_I = S_I / |I|."""
        return [s * float(1 << level) for level, s in enumerate(self.subtree_sums)]

    @cached_property
    def mtilde(self) -> List[np.ndarray]:
        """M~_I = (S_I - <W>_I A_I <W>_I) / |I|; zero on leaves."""
        levels = []
        for level in range(self.depth + 1):
            if level == self.depth:
                levels.append(np.zeros_like(self.conjugated[level]))
            else:
                below = self.subtree_sums[level + 1]
                levels.append((below[0::2] + below[1::2]) * float(1 << level))
        return levels

    @cached_property
    def condition_levels(self) -> List[np.ndarray]:
        """lambda_max(<W>_I^{-1/2} M_I <W>_I^{-1/2}) per node."""
        values = []
        for avg, m in zip(self.weight.avg_levels, self.normalized_sums):
            root = stack_power(avg, -0.5)
            values.append(stack_eigvalsh(root @ m @ root)[:, -1])
        return values

    def worst_node(self) -> Tuple[DyadicInterval, float]:
        """Node with the largest condition ratio, coarsest level first on ties."""
        best = (DyadicInterval.root(), -math.inf)
        for level, values in enumerate(self.condition_levels):
            index = int(np.argmax(values))
            if values[index] > best[1]:
                best = (DyadicInterval(level, index), float(values[index]))
        return best

    def satisfies_condition(self, tol: float = DEFAULT_PSD_TOL) -> bool:
        return self.worst_node()[1] <= 1.0 + tol

    def check_condition(self, tol: float = DEFAULT_PSD_TOL) -> None:
        node, ratio = self.worst_node()
        if ratio > 1.0 + tol:
            raise ConditionViolatedError(
                f"Carleson condition fails at {node.key} by a factor {ratio:.6g}",
                level=node.level,
                index=node.index,
                excess=ratio - 1.0,
            )

    def scaled(self, factor: float) -> "CarlesonSequence":
        if factor < 0:
            raise ValidationError("Scale factor must be nonnegative", field_name="factor")
        return CarlesonSequence(self.weight, tuple(b * factor for b in self.blocks))

    def mtilde_recursion_residual(self) -> float:
        """Largest gap between M~ and a direct sum over strict descendants.

        The direct sum adds <W>_J A_J <W>_J over each lower level by reshaping,
        independently of the bottom-up accumulation.
        """
        worst = 0.0
        for level in range(self.depth + 1):
            direct = np.zeros_like(self.conjugated[level])
            for lower in range(level + 1, self.depth + 1):
                group = 1 << (lower - level)
                terms = self.conjugated[lower].reshape(
                    (1 << level, group) + self.conjugated[lower].shape[1:]
                )
                direct = direct + terms.sum(axis=1)
            direct = direct * float(1 << level)
            scale = max(1.0, float(np.max(np.abs(direct))) if direct.size else 1.0)
            worst = max(worst, float(np.max(np.abs(direct - self.mtilde[level]))) / scale)
        return worst


def carleson_scale(
    weight: MatrixWeight, blocks: Union[CarlesonSequence, Sequence[np.ndarray]]
) -> float:
    """Largest c with {c A_I} Carleson; +inf when every node sum vanishes."""
    sequence = blocks if isinstance(blocks, CarlesonSequence) else CarlesonSequence(weight, tuple(blocks))
    _, ratio = sequence.worst_node()
    if ratio <= 0.0:
        return math.inf
    return 1.0 / ratio


def random_carleson_blocks(
    rng: np.random.Generator, dim: int, depth: int, rank: int = 0
) -> List[np.ndarray]:
    """Wishart-style PSD blocks G G* scaled by |I|; ``rank`` 0 means full rank."""
    columns = rank or dim
    blocks = []
    for level in range(depth + 1):
        shape = (1 << level, dim, columns)
        g = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        blocks.append((g @ np.swapaxes(g.conj(), -1, -2)) * 2.0**-level / columns)
    return blocks


def random_carleson_sequence(
    rng: np.random.Generator, weight: MatrixWeight, rank: int = 0
) -> CarlesonSequence:
    """Random sequence rescaled to sit on the boundary of the Carleson condition."""
    raw = CarlesonSequence(weight, tuple(random_carleson_blocks(rng, weight.dim, weight.depth, rank)))
    scale = carleson_scale(weight, raw)
    return raw if math.isinf(scale) else raw.scaled(scale)


def _node_terms(sequence: CarlesonSequence, f: GridFunction, t: float) -> List[np.ndarray]:
    """Per level, the embedding summand at each node (without the factor t)."""
    weight = sequence.weight
    if f.depth != weight.depth or f.dim != weight.dim:
        raise ShapeMismatchError(
            "Function and weight must share dimension and depth",
            expected=[weight.depth, weight.dim],
            found=[f.depth, f.dim],
        )
    x_levels = weight.apply_power(f, 0.5).averages
    terms = []
    eye = np.eye(weight.dim)
    for level in range(weight.depth + 1):
        inv_avg = stack_power(weight.avg_levels[level], -1.0)
        resolvent = eye + t * sequence.mtilde[level] @ inv_avg
        y = np.linalg.solve(resolvent, x_levels[level][..., None])[..., 0]
        values = np.einsum("ka,kab,kb->k", y.conj(), sequence.blocks[level], y)
        residue = np.max(np.abs(values.imag)) if values.size else 0.0
        if residue > IMAGINARY_RESIDUE_TOL * max(1.0, float(np.max(np.abs(values)))):
            logger.warning(f"Embedding terms at level {level} carry imaginary part {residue:.3g}")
        terms.append(values.real)
    return terms


def _sum_depth_first(levels: Sequence[np.ndarray], depth: int) -> float:
    total = 0.0
    for node in depth_first(depth):
        total += float(levels[node.level][node.index])
    return total


def embedding_check(
    sequence: CarlesonSequence,
    f: GridFunction,
    t: float = 1.0,
    tol: float = DEFAULT_PSD_TOL,
) -> InequalityCheck:
    """Both sides of the embedding: lhs as above, rhs = 8 ||f||^2."""
    if not 0 < t <= 1:
        raise ValidationError("t must lie in (0, 1]", field_name="t", field_value=t)
    sequence.check_condition(tol)
    terms = _node_terms(sequence, f, t)
    lhs = t * _sum_depth_first(terms, sequence.depth)
    return InequalityCheck(lhs, EMBEDDING_CONSTANT * f.l2_norm_sq())


def _bellman_points(
    sequence: CarlesonSequence, f: GridFunction
) -> Tuple[List[np.ndarray], List[np.ndarray]]:
    """Per level, f_I = <W^{1/2} f>_I and F_I = <|f|^2>_I."""
    x_levels = sequence.weight.apply_power(f, 0.5).averages
    energy = level_averages(np.sum(np.abs(f.leaf_values) ** 2, axis=1))
    return x_levels, energy


def telescoping_check(
    sequence: CarlesonSequence, f: GridFunction, tol: float = DEFAULT_PSD_TOL
) -> Dict[DyadicInterval, InequalityCheck]:
    """Bellman concavity at every node of the actual tree.

    Internal nodes compare (|I|/2) <(W_I + M~_I)^{-1} m_I (W_I + M~_I)^{-1} f_I, f_I>
    with |I| B_I - |I+| B_{I+} - |I-| B_{I-}; leaves compare the same left side
    (M~ = 0) with |I| (B(f, F, W, m) - B(f, F, W, 0)). Summed over the tree the
    right sides telescope to at most B_root <= 4 ||f||^2.
    """
    sequence.check_condition(tol)
    x_levels, energy = _bellman_points(sequence, f)
    avg = sequence.weight.avg_levels

    def point(node: DyadicInterval, m: np.ndarray) -> CarlesonBellmanPoint:
        return CarlesonBellmanPoint(
            x_levels[node.level][node.index],
            float(energy[node.level][node.index]),
            HpdMatrix(avg[node.level][node.index]),
            HermMatrix(m),
        )

    def node_point(node: DyadicInterval) -> CarlesonBellmanPoint:
        return point(node, sequence.normalized_sums[node.level][node.index])

    checks: Dict[DyadicInterval, InequalityCheck] = {}
    for node in depth_first(sequence.depth):
        size = node.length
        m = sequence.conjugated[node.level][node.index] / size
        if node.level < sequence.depth:
            gap = carleson_concavity_gap(
                node_point(node), node_point(node.plus), node_point(node.minus), m, tol
            )
            checks[node] = InequalityCheck(size * gap.quad, size * gap.gap)
            continue
        full = node_point(node)
        empty = point(node, np.zeros_like(m))
        inv = full.w.power_array(-1.0)
        quad = 0.5 * float(np.real(np.vdot(full.f, inv @ m @ inv @ full.f)))
        gap = carleson_bellman(full, tol) - carleson_bellman(empty, tol)
        checks[node] = InequalityCheck(size * quad, size * gap)
    return checks


def telescoping_passed(
    checks: Dict[DyadicInterval, InequalityCheck], tol: float = DEFAULT_PSD_TOL
) -> bool:
    return all(check.holds(tol) for check in checks.values())


def random_grid_function(rng: np.random.Generator, dim: int, depth: int) -> GridFunction:
    shape = (1 << depth, dim)
    return GridFunction(rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def _generate_embedding(rng: np.random.Generator, params: Params) -> Dict[str, Any]:
    dim = int(rng.choice(params["dims"]))
    depth = int(params["depth"])
    weight = random_a2_weight_from_rng(rng, dim, depth, float(params["target_x"]))
    sequence = random_carleson_sequence(rng, weight, int(params.get("rank", 0)))
    f = random_grid_function(rng, dim, depth)
    t = float(rng.choice(params["t_values"]))
    return {"weight": weight, "blocks": list(sequence.blocks), "f": f, "t": t}


def _sequence(inputs: Dict[str, Any]) -> CarlesonSequence:
    return CarlesonSequence(inputs["weight"], tuple(inputs["blocks"]))


def _evaluate_embedding(inputs: Dict[str, Any], params: Params) -> TrialOutcome:
    tol = float(params.get("tol", DEFAULT_PSD_TOL))
    sequence = _sequence(inputs)
    f: GridFunction = inputs["f"]
    check = embedding_check(sequence, f, float(inputs["t"]), tol)
    energy = f.l2_norm_sq()
    ratio = check.lhs / energy if energy > 0 else 0.0
    passed = check.holds(tol)
    return TrialOutcome(
        observed=ratio,
        bound=EMBEDDING_CONSTANT,
        passed=passed,
        row={
            "d": sequence.dim,
            "depth": sequence.depth,
            "t": float(inputs["t"]),
            "lhs": check.lhs,
            "rhs": check.rhs,
            "ratio": ratio,
            "mtilde_residual": sequence.mtilde_recursion_residual(),
            "passed": passed,
        },
        details={"lhs": check.lhs, "rhs": check.rhs},
        ratio=ratio,
        dim=sequence.dim,
    )


def _evaluate_telescoping(inputs: Dict[str, Any], params: Params) -> TrialOutcome:
    tol = float(params.get("tol", DEFAULT_PSD_TOL))
    sequence = _sequence(inputs)
    checks = telescoping_check(sequence, inputs["f"], tol)
    node, worst = max(checks.items(), key=lambda item: item[1].lhs - item[1].rhs)
    excess = worst.lhs - worst.rhs
    passed = telescoping_passed(checks, tol)
    return TrialOutcome(
        observed=excess,
        bound=0.0,
        passed=passed,
        row={
            "d": sequence.dim,
            "depth": sequence.depth,
            "nodes": len(checks),
            "worst_node": node.key,
            "worst_excess": excess,
            "passed": passed,
        },
        details={"node": node, "lhs": worst.lhs, "rhs": worst.rhs},
        dim=sequence.dim,
    )


_EMBEDDING_DEFAULTS: Params = {
    "dims": (1, 2, 4),
    "depth": 4,
    "target_x": 4.0,
    "t_values": (0.25, 0.5, 1.0),
    "rank": 0,
    "tol": DEFAULT_PSD_TOL,
}

EMBEDDING_SUITE = Suite(
    name="carleson-embedding",
    module="carleson",
    operation="embedding_check",
    stream=40,
    generate=_generate_embedding,
    evaluate=_evaluate_embedding,
    columns=("d", "depth", "t", "lhs", "rhs", "ratio", "mtilde_residual", "passed"),
    defaults=_EMBEDDING_DEFAULTS,
    description="lhs / ||f||^2 <= 8 on boundary Carleson sequences",
)

TELESCOPING_SUITE = Suite(
    name="carleson-telescoping",
    module="carleson",
    operation="telescoping_check",
    stream=41,
    generate=_generate_embedding,
    evaluate=_evaluate_telescoping,
    columns=("d", "depth", "nodes", "worst_node", "worst_excess", "passed"),
    defaults=_EMBEDDING_DEFAULTS,
    description="Bellman concavity at every node of random embedding instances",
)

SUITES = (EMBEDDING_SUITE, TELESCOPING_SUITE)


def embedding_fuzz(
    seed: int,
    trials: int,
    dims: Iterable[int] = (1, 2, 4),
    depth: int = 4,
    workers: int = 1,
    progress_callback: Optional[Callable[[int], None]] = None,
    **overrides: Any,
) -> FuzzReport:
    """Fuzz the embedding; the report keeps the largest ratio per dimension."""
    params = {"dims": tuple(int(d) for d in dims), "depth": depth, **overrides}
    return run_suite(EMBEDDING_SUITE, seed, trials, params, workers, progress_callback)
