"""
Seeded trial suites.

A ``Suite`` pairs a ``generate(rng, params)`` function, which draws the inputs
of one trial from that trial's own substream, with an ``evaluate(inputs,
params)`` function that checks them. Inputs are encoded into every
counterexample, so a failure can be replayed without regenerating it.

Trials may run in a process pool; results are always collected in trial order.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .exceptions import HaarLabError, ValidationError
from .models import Counterexample, FuzzReport
from .rng import check_seed, substream
from .serialization import decode_value, encode_value

logger = logging.getLogger(__name__)

Params = Dict[str, Any]

# Numerical failures that become error records alongside library errors.
TRIAL_ERRORS = (HaarLabError, np.linalg.LinAlgError, ValueError, FloatingPointError)


def error_record(error: Exception) -> Dict[str, Any]:
    if isinstance(error, HaarLabError):
        return error.to_dict()
    return {
        "error_type": type(error).__name__,
        "error_code": "NUMERICAL_ERROR",
        "message": str(error),
        "details": {},
    }


@dataclass
class TrialOutcome:
    """Result of evaluating one trial's inputs.

    ``observed`` is checked against ``bound``; ``ratio`` is observed / bound
    where that quotient is meaningful and feeds the max-ratio statistics.
    """

    observed: float
    bound: float
    passed: bool
    row: Dict[str, Any] = field(default_factory=dict)
    details: Dict[str, Any] = field(default_factory=dict)
    ratio: Optional[float] = None
    dim: Optional[int] = None


@dataclass(frozen=True)
class Suite:
    name: str
    module: str
    operation: str
    stream: int
    generate: Callable[[np.random.Generator, Params], Dict[str, Any]]
    evaluate: Callable[[Dict[str, Any], Params], TrialOutcome]
    columns: Tuple[str, ...]
    defaults: Params = field(default_factory=dict)
    description: str = ""

    def params(self, overrides: Optional[Params] = None) -> Params:
        merged = dict(self.defaults)
        merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
        return merged

    @property
    def header(self) -> List[str]:
        return ["suite", "seed", "trial", *self.columns]


@dataclass
class TrialRecord:
    trial: int
    inputs: Dict[str, Any]
    outcome: Optional[TrialOutcome] = None
    error: Optional[Dict[str, Any]] = None


def run_trial(suite: Suite, seed: int, trial: int, params: Params) -> TrialRecord:
    """Generate and evaluate trial ``trial``; library and numerical errors become records."""
    rng = substream(seed, trial, suite.stream)
    inputs: Dict[str, Any] = {}
    try:
        inputs = suite.generate(rng, params)
        outcome = suite.evaluate(inputs, params)
        return TrialRecord(trial, encode_value(inputs), outcome=outcome)
    except TRIAL_ERRORS as e:
        error = error_record(e)
        logger.debug(
            f"{suite.name} trial {trial} raised {error['error_code']}: {error['message']}"
        )
        encoded = encode_value(inputs) if inputs else {}
        return TrialRecord(trial, encoded, error=error)


def _run_trial_args(args: Tuple[Suite, int, int, Params]) -> TrialRecord:
    return run_trial(*args)


def _counterexample(
    suite: Suite, seed: int, record: TrialRecord, params: Params, tol: float
) -> Counterexample:
    details: Dict[str, Any] = {"params": encode_value(params)}
    if record.error is not None:
        details["error"] = record.error
        observed = bound = math.nan
    else:
        outcome = record.outcome
        details.update(encode_value(outcome.details))
        observed, bound = outcome.observed, outcome.bound
    return Counterexample(
        module=suite.module,
        operation=suite.operation,
        suite=suite.name,
        seed=seed,
        trial=record.trial,
        inputs=record.inputs,
        observed=observed,
        bound=bound,
        tolerance=tol,
        details=details,
    )


def iter_records(
    suite: Suite, seed: int, trials: int, params: Params, workers: int = 1
):
    """Trial records in trial order, computed serially or in a process pool."""
    if workers <= 1 or trials <= 1:
        for trial in range(trials):
            yield run_trial(suite, seed, trial, params)
        return
    jobs = ((suite, seed, trial, params) for trial in range(trials))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(_run_trial_args, jobs, chunksize=max(1, trials // (4 * workers)))


def run_suite(
    suite: Suite,
    seed: int,
    trials: int,
    overrides: Optional[Params] = None,
    workers: int = 1,
    progress_callback: Optional[Callable[[int], None]] = None,
) -> FuzzReport:
    """Run trials 0..trials-1 of a suite and aggregate them into a report."""
    check_seed(seed)
    params = suite.params(overrides)
    tol = float(params.get("tol", 1e-9))
    logger.info(f"Running suite {suite.name}: {trials} trials, seed {seed}")

    report = FuzzReport(
        suite=suite.name,
        module=suite.module,
        operation=suite.operation,
        seed=seed,
        trials=trials,
    )
    worst_ratio = -math.inf
    worst_record: Optional[TrialRecord] = None

    for record in iter_records(suite, seed, trials, params, workers):
        row: Dict[str, Any] = {"suite": suite.name, "seed": seed, "trial": record.trial}
        if record.error is not None:
            report.errors += 1
            report.failures.append(_counterexample(suite, seed, record, params, tol))
            row["passed"] = False
        else:
            outcome = record.outcome
            row.update(encode_value(outcome.row))
            row.setdefault("passed", outcome.passed)
            if not outcome.passed:
                report.violations += 1
                report.failures.append(_counterexample(suite, seed, record, params, tol))
            if outcome.ratio is not None and math.isfinite(outcome.ratio):
                if outcome.ratio > worst_ratio:
                    worst_ratio = outcome.ratio
                    worst_record = record
                if outcome.dim is not None:
                    key = str(outcome.dim)
                    report.max_ratio_by_dim[key] = max(
                        report.max_ratio_by_dim.get(key, -math.inf), outcome.ratio
                    )
        report.rows.append(row)
        if progress_callback:
            progress_callback(record.trial)

    if worst_record is not None:
        report.max_ratio = worst_ratio
        report.worst = _counterexample(suite, seed, worst_record, params, tol)

    level = logging.INFO if report.passed else logging.WARNING
    logger.log(
        level,
        f"Suite {suite.name} finished: {report.violations} violations, "
        f"{report.errors} errors in {trials} trials",
    )
    return report


@dataclass
class ReplayResult:
    counterexample: Counterexample
    observed: float
    reproduced: bool
    passed: Optional[bool] = None
    error: Optional[Dict[str, Any]] = None


def replay(
    example: Counterexample, suites: Dict[str, Suite], tol: float = 1e-12
) -> ReplayResult:
    """Re-evaluate a counterexample's decoded inputs and compare the observed value."""
    if example.suite not in suites:
        raise ValidationError(
            f"Unknown suite {example.suite!r}",
            field_name="suite",
            field_value=example.suite,
        )
    suite = suites[example.suite]
    params = decode_value(example.details.get("params", {})) or suite.params()
    inputs = decode_value(example.inputs)
    try:
        outcome = suite.evaluate(inputs, params)
    except TRIAL_ERRORS as e:
        error = error_record(e)
        recorded = example.details.get("error", {})
        reproduced = recorded.get("error_code") == error["error_code"]
        return ReplayResult(example, math.nan, reproduced, error=error)

    if math.isnan(example.observed):
        return ReplayResult(example, outcome.observed, False, passed=outcome.passed)
    scale = max(1.0, abs(example.observed))
    reproduced = abs(outcome.observed - example.observed) <= tol * scale
    return ReplayResult(example, outcome.observed, reproduced, passed=outcome.passed)


def merge_rows(reports: Sequence[FuzzReport]) -> List[Dict[str, Any]]:
    return [row for report in reports for row in report.rows]
