"""
Fuzz orchestration for haarlab.

This module keeps the registry of every seeded suite, runs a selection of them
with lab-configured tolerances and sampling, and replays counterexample files.
"""

import logging
from functools import partial
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from . import carleson, experiments, schur, transfer
from .config_manager import ConfigManager
from .exceptions import ValidationError
from .models import Counterexample, FuzzReport, LabConfig, RunSummary
from .reporting import load_counterexamples, summarize
from .suite import Params, ReplayResult, Suite, replay, run_suite

ALL_SUITES: Tuple[Suite, ...] = (
    *experiments.SUITES,
    *carleson.SUITES,
    *schur.SUITES,
    *transfer.SUITES,
)

SUITES: Dict[str, Suite] = {suite.name: suite for suite in ALL_SUITES}

# Exploratory suites never fail and are left out of the default fuzz run.
REPORT_ONLY = frozenset({experiments.NORM_SCAN_SUITE.name})

# Checks selectable with --check on the per-module commands.
MODULE_CHECKS: Dict[str, Dict[str, Tuple[Suite, ...]]] = {
    "bellman": {
        "segment": (experiments.SEGMENT_SUITE,),
        "dynamics": (experiments.DYNAMICS_SUITE,),
        "carleson": (experiments.CONCAVITY_SUITE,),
        "resolvent": (experiments.RESOLVENT_SUITE,),
    },
    "schur": dict(schur.CHECK_SUITES),
    "carleson": {
        "embedding": (carleson.EMBEDDING_SUITE,),
        "telescoping": (carleson.TELESCOPING_SUITE,),
    },
}


def _check_registry() -> None:
    streams: Dict[int, str] = {}
    for suite in ALL_SUITES:
        if suite.stream in streams:
            raise ValidationError(
                f"Suites {streams[suite.stream]} and {suite.name} share stream {suite.stream}",
                field_name="stream",
                field_value=suite.stream,
            )
        streams[suite.stream] = suite.name


_check_registry()


def default_suite_names() -> List[str]:
    return [suite.name for suite in ALL_SUITES if suite.name not in REPORT_ONLY]


def resolve_suites(names: Optional[Iterable[str]] = None) -> List[Suite]:
    """Suites by name or module name, in registry order; None selects the default run."""
    if not names:
        return [SUITES[name] for name in default_suite_names()]
    wanted = set(names)
    unknown = wanted - set(SUITES) - {suite.module for suite in ALL_SUITES}
    if unknown:
        raise ValidationError(
            f"Unknown suites: {', '.join(sorted(unknown))}",
            field_name="suites",
            expected_type="one of: " + ", ".join(SUITES),
        )
    return [s for s in ALL_SUITES if s.name in wanted or s.module in wanted]


def lab_params(config: LabConfig) -> Params:
    """Suite parameters driven by the lab configuration."""
    return {
        "tol": config.tolerances.psd,
        "theta_samples": config.sampling.theta_samples,
        "steps": config.sampling.alpha_scan_steps,
        "resolution": config.sampling.phase_resolution,
        "power_iterations": config.sampling.power_iterations,
        "max_dense": config.limits.max_dense,
        "max_leaf_bits": config.limits.transfer_max_leaf_bits,
        "grothendieck": config.constants.grothendieck,
    }


class FuzzOrchestrator:
    """Runs seeded suites and aggregates their reports."""

    def __init__(self, config: Optional[LabConfig] = None):
        self.config = config or LabConfig()
        self.logger = logging.getLogger(__name__)

    @classmethod
    def from_config_file(
        cls, config_path: Optional[str] = None, profile: Optional[str] = None
    ) -> "FuzzOrchestrator":
        """Create orchestrator from configuration file."""
        config_manager = ConfigManager(config_path)
        return cls(config_manager.get_config(profile))

    def params(self, overrides: Optional[Params] = None) -> Params:
        merged = lab_params(self.config)
        merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
        return merged

    def run_suite(
        self,
        suite: Suite,
        seed: int,
        trials: int,
        overrides: Optional[Params] = None,
        workers: Optional[int] = None,
        progress_callback: Optional[Callable[[int], None]] = None,
    ) -> FuzzReport:
        workers = workers or self.config.runtime.workers
        return run_suite(
            suite, seed, trials, self.params(overrides), workers, progress_callback
        )

    def run(
        self,
        seed: int,
        trials: int,
        suites: Optional[Sequence[str]] = None,
        overrides: Optional[Params] = None,
        workers: Optional[int] = None,
        progress_callback: Optional[Callable[[str, int], None]] = None,
    ) -> RunSummary:
        """Run ``trials`` trials of every selected suite with the same seed.

        Suites draw from disjoint streams, so sharing the seed never correlates
        their inputs.
        """
        selected = resolve_suites(suites)
        self.logger.info(
            f"Fuzzing {len(selected)} suites with {trials} trials each, seed {seed}"
        )
        reports: Dict[str, FuzzReport] = {}
        for suite in selected:
            callback = partial(progress_callback, suite.name) if progress_callback else None
            reports[suite.name] = self.run_suite(
                suite, seed, trials, overrides, workers, callback
            )

        summary = summarize(reports, {"seed": seed, "trials_per_suite": trials})
        if summary.overall_success:
            self.logger.info("Fuzz run finished without violations")
        else:
            self.logger.warning(
                f"Fuzz run failed in: {', '.join(summary.summary['failed_suites'])}"
            )
        return summary

    def replay(self, example: Counterexample) -> ReplayResult:
        return replay(example, SUITES, self.config.tolerances.replay)

    def replay_file(self, path: str) -> List[ReplayResult]:
        """Replay every counterexample in a failures file."""
        results = [self.replay(example) for example in load_counterexamples(path)]
        reproduced = sum(result.reproduced for result in results)
        self.logger.info(f"Reproduced {reproduced} of {len(results)} counterexamples")
        return results


def run_fuzz(seed: int, trials: int, **kwargs: Any) -> RunSummary:
    """Default-configured fuzz run."""
    return FuzzOrchestrator().run(seed, trials, **kwargs)
