"""
Seeded suites for the Haar model, weights, operators and Bellman geometry.

The Carleson, Schur and transfer suites live next to the code they exercise;
the ones here cover modules that the serialization layer itself imports.
Every generator only emits encodable values (arrays, weights, grid functions,
shifts), so each failing trial can be replayed from its counterexample.
"""

import logging
import math
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from .bellman import (
    DEFAULT_THETA_SAMPLES,
    BellmanPoint,
    CarlesonBellmanPoint,
    carleson_concavity_gap,
    carleson_range_check,
    midpoint,
    modified_dynamics,
    points_from_weight,
    resolvent_check,
    segment_failures,
    segment_in_4X,
)
from .carleson import random_grid_function
from .dyadic import GridFunction, MatrixWeight, haar_analyze, haar_synthesize, weighted_energy
from .linalg import DEFAULT_PSD_TOL, HpdMatrix, as_array, random_hpd, random_unitary
from .models import FuzzReport, OperatorKind, SymbolClass
from .operators import (
    apply_haar_shift,
    iter_slice_checks,
    linearization_average_form,
    linearization_check,
    random_haar_shift,
    random_martingale_symbol,
    sigma_norm,
    weighted_norm,
)
from .suite import Params, Suite, TrialOutcome, run_suite
from .weights import (
    a2_characteristic,
    characteristic_bucket,
    function_with_averages,
    random_a2_weight_from_rng,
    two_point_weight,
)

logger = logging.getLogger(__name__)

EXACT_TOL = 1e-10
SLICE_TOL = 1e-12
PRODUCT_TOL = 1e-12


def _relative(residual: float, *scales: float) -> float:
    return residual / max(1.0, *(abs(s) for s in scales))


def _dim(rng: np.random.Generator, params: Params) -> int:
    return int(rng.integers(1, int(params["max_d"]) + 1))


def _contraction(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Random PSD matrix R with 0 <= R <= I."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    r = g @ g.conj().T
    return r / np.linalg.eigvalsh(r)[-1]


def _below(rng: np.random.Generator, ceiling: np.ndarray) -> np.ndarray:
    """Random PSD matrix between 0 and ``ceiling``."""
    values, vectors = np.linalg.eigh((ceiling + ceiling.conj().T) / 2)
    root = (vectors * np.sqrt(np.clip(values, 0.0, None))) @ vectors.conj().T
    m = rng.uniform(0.0, 1.0) * root @ _contraction(rng, ceiling.shape[0]) @ root
    return (m + m.conj().T) / 2


# Haar model


def _generate_haar(rng: np.random.Generator, params: Params) -> Dict[str, Any]:
    depth = int(rng.integers(0, int(params["max_depth"]) + 1))
    return {"f": random_grid_function(rng, _dim(rng, params), depth)}


def _evaluate_haar(inputs: Dict[str, Any], params: Params) -> TrialOutcome:
    f: GridFunction = inputs["f"]
    mean, coeffs = haar_analyze(f)
    rebuilt = haar_synthesize(mean, coeffs, f.depth)
    energy = f.l2_norm_sq()
    reconstruction = _relative(
        float(np.max(np.abs(rebuilt.leaf_values - f.leaf_values))),
        float(np.max(np.abs(f.leaf_values))),
    )
    parseval = float(np.sum(np.abs(mean) ** 2)) + sum(
        float(np.sum(np.abs(c) ** 2)) for c in coeffs.values()
    )
    parseval_error = _relative(abs(parseval - energy), energy)
    observed = max(reconstruction, parseval_error)
    passed = observed <= EXACT_TOL
    return TrialOutcome(
        observed=observed,
        bound=EXACT_TOL,
        passed=passed,
        row={
            "d": f.dim,
            "depth": f.depth,
            "reconstruction": reconstruction,
            "parseval": parseval_error,
            "passed": passed,
        },
        dim=f.dim,
    )


HAAR_SUITE = Suite(
    name="haar-roundtrip",
    module="dyadic-model",
    operation="haar_synthesize",
    stream=1,
    generate=_generate_haar,
    evaluate=_evaluate_haar,
    columns=("d", "depth", "reconstruction", "parseval", "passed"),
    defaults={"max_d": 4, "max_depth": 8},
    description="Haar reconstruction and Parseval within 1e-10",
)


# Weights


def _generate_two_point(rng: np.random.Generator, params: Params) -> Dict[str, Any]:
    """Admissible (U, V): V = U^{-1/2} N^{-1} U^{-1/2} with 0 < N <= I."""
    dim = _dim(rng, params)
    u = random_hpd(rng, dim, float(params["log_spread"]))
    frame = random_unitary(rng, dim)
    values = rng.uniform(float(params["min_gap"]), 1.0, size=dim)
    if rng.uniform() < float(params["degenerate_rate"]):
        values[rng.integers(dim)] = 1.0
    n = (frame * values) @ frame.conj().T
    inv_half = u.power_array(-0.5)
    v = inv_half @ np.linalg.inv((n + n.conj().T) / 2) @ inv_half
    return {"u": u, "v": HpdMatrix((v + v.conj().T) / 2)}


def _evaluate_two_point(inputs: Dict[str, Any], params: Params) -> TrialOutcome:
    u = as_array(inputs["u"])
    v = as_array(inputs["v"])
    split = two_point_weight(u, v, float(params.get("tol", DEFAULT_PSD_TOL)))
    plus, minus = as_array(split.w_plus), as_array(split.w_minus)
    u_residual = _relative(float(np.max(np.abs((plus + minus) / 2 - u))), float(np.max(np.abs(u))))
    inv_mean = (np.linalg.inv(plus) + np.linalg.inv(minus)) / 2
    v_residual = _relative(float(np.max(np.abs(inv_mean - v))), float(np.max(np.abs(v))))
    observed = max(u_residual, v_residual)
    passed = observed <= EXACT_TOL
    return TrialOutcome(
        observed=observed,
        bound=EXACT_TOL,
        passed=passed,
        row={
            "d": u.shape[0],
            "u_residual": u_residual,
            "v_residual": v_residual,
            "degenerate": split.degenerate,
            "passed": passed,
        },
        dim=u.shape[0],
    )


TWO_POINT_SUITE = Suite(
    name="weights-two-point",
    module="weights",
    operation="two_point_weight",
    stream=10,
    generate=_generate_two_point,
    evaluate=_evaluate_two_point,
    columns=("d", "u_residual", "v_residual", "degenerate", "passed"),
    defaults={"max_d": 6, "log_spread": 1.0, "min_gap": 0.05, "degenerate_rate": 0.1},
    description="Averages of the two-point split reproduce (U, V)",
)


def _generate_moments(rng: np.random.Generator, params: Params) -> Dict[str, Any]:
    dim = _dim(rng, params)
    depth = int(params["depth"])
    weight = random_a2_weight_from_rng(rng, dim, depth, float(params["target_x"]))
    f_avg = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    floor = float(np.real(f_avg.conj() @ np.linalg.solve(weight.avg_inv_levels[0][0], f_avg)))
    big_f = floor * (1.0 + rng.exponential(1.0))
    return {"weight": weight, "f_avg": f_avg, "big_f": big_f}


def _evaluate_moments(inputs: Dict[str, Any], params: Params) -> TrialOutcome:
    weight: MatrixWeight = inputs["weight"]
    f_avg = np.asarray(inputs["f_avg"])
    big_f = float(inputs["big_f"])
    f = function_with_averages(weight, f_avg, big_f, float(params.get("tol", DEFAULT_PSD_TOL)))
    mean_residual = _relative(float(np.max(np.abs(f.mean - f_avg))), float(np.max(np.abs(f_avg))))
    energy_residual = _relative(abs(weighted_energy(f, weight) - big_f), big_f)
    observed = max(mean_residual, energy_residual)
    passed = observed <= EXACT_TOL
    return TrialOutcome(
        observed=observed,
        bound=EXACT_TOL,
        passed=passed,
        row={
            "d": weight.dim,
            "depth": weight.depth,
            "mean_residual": mean_residual,
            "energy_residual": energy_residual,
            "passed": passed,
        },
        dim=weight.dim,
    )


MOMENTS_SUITE = Suite(
    name="weights-moments",
    module="weights",
    operation="function_with_averages",
    stream=11,
    generate=_generate_moments,
    evaluate=_evaluate_moments,
    columns=("d", "depth", "mean_residual", "energy_residual", "passed"),
    defaults={"max_d": 4, "depth": 4, "target_x": 4.0},
    description="Prescribed mean and weighted energy are reproduced",
)


# Operators


def _shift_params(rng: np.random.Generator, params: Params):
    max_k = int(params["max_k"])
    m = int(rng.integers(0, max_k))
    n = int(rng.integers(0, max_k))
    return m, n, max(m, n) + 1


def _generate_partition(rng: np.random.Generator, params: Params) -> Dict[str, Any]:
    m, n, k = _shift_params(rng, params)
    depth = k + int(rng.integers(0, int(params["extra_depth"]) + 1))
    dim = _dim(rng, params)
    spec = random_haar_shift(rng, m, n, depth, float(params["density"]))
    return {"spec": spec, "f": random_grid_function(rng, dim, depth)}


def _evaluate_partition(inputs: Dict[str, Any], params: Params) -> TrialOutcome:
    spec = inputs["spec"]
    f: GridFunction = inputs["f"]
    whole = apply_haar_shift(spec, f).leaf_values
    parts = sum(apply_haar_shift(part, f).leaf_values for part in spec.slices())
    residual = float(np.max(np.abs(parts - whole)))
    passed = residual <= SLICE_TOL * max(1.0, float(np.max(np.abs(whole))))
    return TrialOutcome(
        observed=residual,
        bound=SLICE_TOL,
        passed=passed,
        row={
            "m": spec.m,
            "n": spec.n,
            "k": spec.complexity,
            "depth": f.depth,
            "anchors": len(spec.anchors),
            "residual": residual,
            "passed": passed,
        },
        dim=f.dim,
    )


PARTITION_SUITE = Suite(
    name="operators-slice-partition",
    module="operators",
    operation="slice",
    stream=20,
    generate=_generate_partition,
    evaluate=_evaluate_partition,
    columns=("m", "n", "k", "depth", "anchors", "residual", "passed"),
    defaults={"max_k": 4, "max_d": 2, "extra_depth": 2, "density": 0.7},
    description="Slices of a Haar shift sum to the shift",
)


def _generate_pair(rng: np.random.Generator, params: Params) -> Dict[str, Any]:
    dim = _dim(rng, params)
    depth = int(params["depth"])
    weight = random_a2_weight_from_rng(rng, dim, depth, float(params["target_x"]))
    return {
        "weight": weight,
        "f": random_grid_function(rng, dim, depth),
        "g": random_grid_function(rng, dim, depth),
    }


def _evaluate_linearization(inputs: Dict[str, Any], params: Params) -> TrialOutcome:
    tol = float(params.get("tol", DEFAULT_PSD_TOL))
    weight: MatrixWeight = inputs["weight"]
    check = linearization_check(inputs["f"], inputs["g"], weight)
    average_form = linearization_average_form(inputs["f"], inputs["g"], weight)
    form_residual = _relative(abs(average_form - 4.0 * check.lhs), average_form)
    ratio = check.lhs / check.rhs if check.rhs > 0 else 0.0
    passed = check.holds(tol) and form_residual <= EXACT_TOL
    return TrialOutcome(
        observed=check.lhs,
        bound=check.rhs,
        passed=passed,
        row={
            "d": weight.dim,
            "depth": weight.depth,
            "lhs": check.lhs,
            "rhs": check.rhs,
            "ratio": ratio,
            "average_form_residual": form_residual,
            "passed": passed,
        },
        ratio=ratio,
        dim=weight.dim,
    )


LINEARIZATION_SUITE = Suite(
    name="operators-linearization",
    module="operators",
    operation="linearization_check",
    stream=21,
    generate=_generate_pair,
    evaluate=_evaluate_linearization,
    columns=("d", "depth", "lhs", "rhs", "ratio", "average_form_residual", "passed"),
    defaults={"max_d": 3, "depth": 4, "target_x": 4.0},
    description="Eigenprojected pairing below d times its weighted bound",
)


def _generate_slice_bound(rng: np.random.Generator, params: Params) -> Dict[str, Any]:
    m, n, k = _shift_params(rng, params)
    dim = _dim(rng, params)
    depth = k + int(rng.integers(0, int(params["extra_depth"]) + 1))
    weight = random_a2_weight_from_rng(rng, dim, depth, float(params["target_x"]))
    return {
        "spec": random_haar_shift(rng, m, n, depth, float(params["density"])),
        "weight": weight,
        "f": random_grid_function(rng, dim, depth),
        "g": random_grid_function(rng, dim, depth),
    }


def _evaluate_slice_bound(inputs: Dict[str, Any], params: Params) -> TrialOutcome:
    tol = float(params.get("tol", DEFAULT_PSD_TOL))
    spec = inputs["spec"]
    weight: MatrixWeight = inputs["weight"]
    checks = list(iter_slice_checks(spec, inputs["f"], inputs["g"], weight))
    worst_j, worst = max(checks, key=lambda item: item[1].lhs - item[1].rhs)
    ratios = [c.lhs / c.rhs for _, c in checks if c.rhs > 0]
    ratio = max(ratios) if ratios else 0.0
    passed = all(c.holds(tol) for _, c in checks)
    return TrialOutcome(
        observed=worst.lhs,
        bound=worst.rhs,
        passed=passed,
        row={
            "d": weight.dim,
            "depth": weight.depth,
            "k": spec.complexity,
            "worst_slice": worst_j,
            "lhs": worst.lhs,
            "rhs": worst.rhs,
            "ratio": ratio,
            "passed": passed,
        },
        details={"slice": worst_j},
        ratio=ratio,
        dim=weight.dim,
    )


SLICE_BOUND_SUITE = Suite(
    name="operators-slice-bound",
    module="operators",
    operation="slice_bound_check",
    stream=22,
    generate=_generate_slice_bound,
    evaluate=_evaluate_slice_bound,
    columns=("d", "depth", "k", "worst_slice", "lhs", "rhs", "ratio", "passed"),
    defaults={"max_k": 3, "max_d": 3, "extra_depth": 1, "target_x": 4.0, "density": 1.0},
    description="|<S_j f, g>| below the averaged bound for every slice",
)


def _generate_norm_scan(rng: np.random.Generator, params: Params) -> Dict[str, Any]:
    dim = int(params["d"])
    depth = int(params["depth"])
    targets = params["target_x_values"]
    target = float(targets[int(rng.integers(len(targets)))])
    weight = random_a2_weight_from_rng(rng, dim, depth, target)
    kind = OperatorKind(params["op"])
    if kind is OperatorKind.SHIFT:
        op = random_haar_shift(rng, int(params["m"]), int(params["n"]), depth)
    else:
        op = random_martingale_symbol(rng, weight, params["symbol_class"])
    return {"weight": weight, "op": op, "target_x": target}


def _evaluate_norm_scan(inputs: Dict[str, Any], params: Params) -> TrialOutcome:
    weight: MatrixWeight = inputs["weight"]
    op = inputs["op"]
    x = a2_characteristic(weight).characteristic
    lo, hi = characteristic_bucket(x)
    norm = weighted_norm(
        op,
        weight,
        int(params.get("max_dense", 4096)),
        int(params.get("power_iterations", 500)),
    )
    row: Dict[str, Any] = {
        "d": weight.dim,
        "depth": weight.depth,
        "op": OperatorKind(params["op"]).value,
        "m": None,
        "n": None,
        "symbol_class": params.get("symbol_class", ""),
        "target_x": float(inputs["target_x"]),
        "a2": x,
        "bucket_lo": lo,
        "bucket_hi": hi,
        "norm": norm,
        "sigma_norm": None,
        "norm_over_x": norm / x,
        "passed": True,
    }
    if OperatorKind(params["op"]) is OperatorKind.MARTINGALE:
        row["sigma_norm"] = sigma_norm(op, weight)
    else:
        row["symbol_class"] = ""
        row["m"], row["n"] = op.m, op.n
    return TrialOutcome(observed=norm, bound=math.inf, passed=True, row=row, dim=weight.dim)


NORM_SCAN_SUITE = Suite(
    name="operators-norm-scan",
    module="operators",
    operation="weighted_norm",
    stream=23,
    generate=_generate_norm_scan,
    evaluate=_evaluate_norm_scan,
    columns=(
        "d",
        "depth",
        "op",
        "m",
        "n",
        "symbol_class",
        "target_x",
        "a2",
        "bucket_lo",
        "bucket_hi",
        "norm",
        "sigma_norm",
        "norm_over_x",
        "passed",
    ),
    defaults={
        "op": OperatorKind.MARTINGALE.value,
        "symbol_class": SymbolClass.SIGNS.value,
        "d": 1,
        "depth": 6,
        "m": 0,
        "n": 1,
        "target_x_values": (1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0),
    },
    description="Report-only weighted operator norms bucketed by characteristic",
)


# Bellman geometry


def _generate_segment(rng: np.random.Generator, params: Params) -> Dict[str, Any]:
    """A two-level tree; the root and its children give a triple with A = midpoint.

    Each child averages two leaves, so the endpoints sit inside D_X rather
    than on its boundary.
    """
    dim = _dim(rng, params)
    spread = float(params["log_spread"])
    leaves = np.stack([random_hpd(rng, dim, spread).entries for _ in range(4)])
    return {
        "weight": MatrixWeight(leaves),
        "f": random_grid_function(rng, dim, 2),
        "g": random_grid_function(rng, dim, 2),
    }


def _triple(inputs: Dict[str, Any]):
    weight: MatrixWeight = inputs["weight"]
    points = points_from_weight(weight, inputs["f"], inputs["g"], 2)
    a_plus, a_minus = points[1]
    x = max(1.0, *(p.a2_value() for p in (points[0][0], a_plus, a_minus)))
    return a_plus, a_minus, x


def _evaluate_segment(inputs: Dict[str, Any], params: Params) -> TrialOutcome:
    tol = float(params.get("tol", DEFAULT_PSD_TOL))
    samples = int(params.get("theta_samples", DEFAULT_THETA_SAMPLES))
    a_plus, a_minus, x = _triple(inputs)
    passed = segment_in_4X(a_plus, a_minus, x, samples, tol)
    failures = [] if passed else segment_failures(a_plus, a_minus, x, samples, tol)
    worst = max(
        midpoint(a_plus, a_minus).a2_value(), a_plus.a2_value(), a_minus.a2_value()
    )
    return TrialOutcome(
        observed=float(len(failures)),
        bound=0.0,
        passed=passed,
        row={
            "d": a_plus.dim,
            "x": x,
            "max_a2": worst,
            "failures": len(failures),
            "passed": passed,
        },
        details={"failing_theta": failures},
        dim=a_plus.dim,
    )


SEGMENT_SUITE = Suite(
    name="bellman-segment",
    module="bellman",
    operation="segment_in_4X",
    stream=30,
    generate=_generate_segment,
    evaluate=_evaluate_segment,
    columns=("d", "x", "max_a2", "failures", "passed"),
    defaults={"max_d": 3, "log_spread": 1.5, "theta_samples": DEFAULT_THETA_SAMPLES},
    description="Segments with endpoints and midpoint in D_X stay in D_4X",
)


def random_alpha(rng: np.random.Generator, k: int, limit: float = 0.25) -> np.ndarray:
    """alpha on D_k with |alpha| <= limit and zero sum."""
    alpha = rng.uniform(-limit, limit, size=1 << k)
    alpha -= alpha.mean()
    peak = float(np.max(np.abs(alpha)))
    if peak > limit:
        alpha *= limit / peak
    return alpha


def _generate_dynamics(rng: np.random.Generator, params: Params) -> Dict[str, Any]:
    dim = _dim(rng, params)
    k = int(rng.integers(1, int(params["max_k"]) + 1))
    weight = random_a2_weight_from_rng(rng, dim, k, float(params["target_x"]))
    return {
        "weight": weight,
        "f": random_grid_function(rng, dim, k),
        "g": random_grid_function(rng, dim, k),
        "alpha": random_alpha(rng, k),
    }


def _evaluate_dynamics(inputs: Dict[str, Any], params: Params) -> TrialOutcome:
    tol = float(params.get("tol", DEFAULT_PSD_TOL))
    weight: MatrixWeight = inputs["weight"]
    points = points_from_weight(weight, inputs["f"], inputs["g"], weight.depth)
    report = modified_dynamics(
        points,
        np.asarray(inputs["alpha"], dtype=float),
        tol=tol,
        samples=int(params.get("theta_samples", DEFAULT_THETA_SAMPLES)),
    )
    residual = report.product_identity_residual
    passed = report.passed and residual <= PRODUCT_TOL
    return TrialOutcome(
        observed=residual,
        bound=PRODUCT_TOL,
        passed=passed,
        row={
            "d": weight.dim,
            "k": report.k,
            "x": report.x,
            "a_bounds": report.a_bounds_ok,
            "theta_bounds": report.theta_bounds_ok,
            "membership": report.membership_ok,
            "segments": report.segments_ok,
            "product_residual": residual,
            "convexity_residual": report.convexity_residual,
            "passed": passed,
        },
        dim=weight.dim,
    )


DYNAMICS_SUITE = Suite(
    name="bellman-dynamics",
    module="bellman",
    operation="modified_dynamics",
    stream=31,
    generate=_generate_dynamics,
    evaluate=_evaluate_dynamics,
    columns=(
        "d",
        "k",
        "x",
        "a_bounds",
        "theta_bounds",
        "membership",
        "segments",
        "product_residual",
        "convexity_residual",
        "passed",
    ),
    defaults={"max_d": 3, "max_k": 3, "target_x": 4.0, "theta_samples": 9},
    description="Reweighted martingale bounds, product identity and memberships",
)


def _generate_concavity(rng: np.random.Generator, params: Params) -> Dict[str, Any]:
    """Children (f, F, W, M) in the domain and an m with m + M~ <= W."""
    dim = _dim(rng, params)
    spread = float(params["log_spread"])
    data: Dict[str, Any] = {}
    for side in ("plus", "minus"):
        w = random_hpd(rng, dim, spread).entries
        f = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        floor = float(np.real(f.conj() @ np.linalg.solve(w, f)))
        data[f"w_{side}"] = HpdMatrix(w)
        data[f"m_{side}"] = _below(rng, w)
        data[f"f_{side}"] = f
        data[f"big_f_{side}"] = floor * (1.0 + rng.exponential(0.5))
    w = (as_array(data["w_plus"]) + as_array(data["w_minus"])) / 2
    mtilde = (data["m_plus"] + data["m_minus"]) / 2
    data["m"] = _below(rng, w - mtilde)
    return data


def _carleson_points(inputs: Dict[str, Any]):
    children = {
        side: CarlesonBellmanPoint(
            np.asarray(inputs[f"f_{side}"]),
            float(inputs[f"big_f_{side}"]),
            inputs[f"w_{side}"],
            np.asarray(inputs[f"m_{side}"]),
        )
        for side in ("plus", "minus")
    }
    plus, minus = children["plus"], children["minus"]
    m = np.asarray(inputs["m"])
    parent = CarlesonBellmanPoint(
        (plus.f + minus.f) / 2,
        (plus.big_f + minus.big_f) / 2,
        HpdMatrix((plus.w.entries + minus.w.entries) / 2),
        m + (plus.m.entries + minus.m.entries) / 2,
    )
    return parent, plus, minus, m


def _evaluate_concavity(inputs: Dict[str, Any], params: Params) -> TrialOutcome:
    tol = float(params.get("tol", DEFAULT_PSD_TOL))
    parent, plus, minus, m = _carleson_points(inputs)
    gap = carleson_concavity_gap(parent, plus, minus, m, tol)
    in_range = all(carleson_range_check(p, tol) for p in (parent, plus, minus))
    passed = gap.holds(tol) and in_range
    return TrialOutcome(
        observed=gap.quad,
        bound=gap.gap,
        passed=passed,
        row={
            "d": parent.w.dim,
            "value": gap.value,
            "gap": gap.gap,
            "quad": gap.quad,
            "in_range": in_range,
            "passed": passed,
        },
        dim=parent.w.dim,
    )


CONCAVITY_SUITE = Suite(
    name="bellman-carleson-concavity",
    module="bellman",
    operation="carleson_concavity_gap",
    stream=32,
    generate=_generate_concavity,
    evaluate=_evaluate_concavity,
    columns=("d", "value", "gap", "quad", "in_range", "passed"),
    defaults={"max_d": 4, "log_spread": 1.0},
    description="B(A) - (B(A+) + B(A-))/2 >= quad and 0 <= B <= 4F",
)


def _generate_resolvent(rng: np.random.Generator, params: Params) -> Dict[str, Any]:
    dim = _dim(rng, params)
    w = random_hpd(rng, dim, float(params["log_spread"])).entries
    mtilde = _below(rng, w)
    return {"w": HpdMatrix(w), "mtilde": mtilde, "m": _below(rng, w - mtilde)}


def _evaluate_resolvent(inputs: Dict[str, Any], params: Params) -> TrialOutcome:
    tol = float(params.get("tol", DEFAULT_PSD_TOL))
    w = as_array(inputs["w"])
    mtilde = np.asarray(inputs["mtilde"])
    m = np.asarray(inputs["m"])
    check = resolvent_check(w, mtilde, m, tol)
    base = HpdMatrix(w + mtilde)
    inv = base.power_array(-1.0)
    full = HpdMatrix(w + mtilde + m).power_array(-1.0)
    difference = inv - full - 0.5 * inv @ m @ inv
    margin = float(np.linalg.eigvalsh((difference + difference.conj().T) / 2)[0])
    return TrialOutcome(
        observed=-margin,
        bound=0.0,
        passed=check.passed,
        row={
            "d": w.shape[0],
            "min_eigenvalue": margin,
            "difference_psd": check.difference_psd,
            "e_below_identity": check.e_below_identity,
            "passed": check.passed,
        },
        dim=w.shape[0],
    )


RESOLVENT_SUITE = Suite(
    name="bellman-resolvent",
    module="bellman",
    operation="resolvent_inequality_check",
    stream=33,
    generate=_generate_resolvent,
    evaluate=_evaluate_resolvent,
    columns=("d", "min_eigenvalue", "difference_psd", "e_below_identity", "passed"),
    defaults={"max_d": 4, "log_spread": 1.0},
    description="(W+M~)^-1 - (W+M~+m)^-1 >= 1/2 (W+M~)^-1 m (W+M~)^-1",
)

SUITES = (
    HAAR_SUITE,
    TWO_POINT_SUITE,
    MOMENTS_SUITE,
    PARTITION_SUITE,
    LINEARIZATION_SUITE,
    SLICE_BOUND_SUITE,
    NORM_SCAN_SUITE,
    SEGMENT_SUITE,
    DYNAMICS_SUITE,
    CONCAVITY_SUITE,
    RESOLVENT_SUITE,
)


def norm_scan(
    seed: int,
    trials: int,
    op: str = OperatorKind.MARTINGALE.value,
    symbol_class: str = SymbolClass.SIGNS.value,
    dim: int = 1,
    depth: int = 6,
    target_x_values: Optional[Sequence[float]] = None,
    workers: int = 1,
    progress_callback: Optional[Callable[[int], None]] = None,
    **overrides: Any,
) -> FuzzReport:
    """Weighted norms of random operators across characteristic buckets."""
    params: Dict[str, Any] = {
        "op": OperatorKind(op).value,
        "symbol_class": SymbolClass(symbol_class).value,
        "d": dim,
        "depth": depth,
        "target_x_values": tuple(target_x_values) if target_x_values else None,
        **overrides,
    }
    return run_suite(NORM_SCAN_SUITE, seed, trials, params, workers, progress_callback)


def bucket_table(rows: List[Dict[str, Any]]) -> List[Dict[str, Any]]:
    """Per-bucket trial count and largest norm and norm / characteristic."""
    buckets: Dict[tuple, Dict[str, Any]] = {}
    for row in rows:
        key = (row["bucket_lo"], row["bucket_hi"])
        entry = buckets.setdefault(
            key,
            {"bucket_lo": key[0], "bucket_hi": key[1], "trials": 0, "max_norm": 0.0, "max_norm_over_x": 0.0},
        )
        entry["trials"] += 1
        entry["max_norm"] = max(entry["max_norm"], row["norm"])
        entry["max_norm_over_x"] = max(entry["max_norm_over_x"], row["norm_over_x"])
    return [buckets[key] for key in sorted(buckets)]
