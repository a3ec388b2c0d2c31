#!/usr/bin/env python3
"""
Tests for the seeded suites and the weighted norm scan.
"""

import os
import sys

import numpy as np
import pytest

# Add src to path for testing
sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from haarlab.core import experiments
from haarlab.core.bellman import points_from_weight
from haarlab.core.experiments import bucket_table, norm_scan, random_alpha
from haarlab.core.rng import substream
from haarlab.core.suite import Suite, TrialOutcome, replay, run_suite, run_trial

CHECKING_SUITES = [s for s in experiments.SUITES if s is not experiments.NORM_SCAN_SUITE]


class TestSuites:
    """Every checking suite passes a few seeded trials."""

    @pytest.mark.parametrize("suite", CHECKING_SUITES, ids=lambda s: s.name)
    def test_suite_passes(self, suite):
        report = run_suite(suite, 11, 3)

        assert report.passed, [f.details for f in report.failures]
        assert len(report.rows) == 3
        for row in report.rows:
            assert set(row) <= set(suite.header)

    def test_trials_are_independent_of_count(self):
        """Trial t draws the same inputs however many trials run."""
        suite = experiments.TWO_POINT_SUITE
        short = run_suite(suite, 5, 2)
        long = run_suite(suite, 5, 4)
        assert long.rows[:2] == short.rows

    def test_trial_record(self):
        record = run_trial(experiments.HAAR_SUITE, 0, 0, experiments.HAAR_SUITE.params())
        assert record.error is None
        assert record.outcome.passed
        assert record.inputs["f"]["__type__"] == "function"

    def test_suite_params(self):
        params = experiments.HAAR_SUITE.params({"max_depth": 2, "max_d": None})
        assert params["max_depth"] == 2
        assert params["max_d"] == 4


def _singular_inputs(rng, params):
    return {"matrix": np.zeros((2, 2))}


def _invert(inputs, params):
    value = float(np.linalg.inv(inputs["matrix"])[0, 0])
    return TrialOutcome(observed=value, bound=0.0, passed=True)


SINGULAR_SUITE = Suite(
    name="singular-inverse",
    module="linalg",
    operation="inverse",
    stream=999,
    generate=_singular_inputs,
    evaluate=_invert,
    columns=("passed",),
)


class TestNumericalErrors:
    """numpy errors inside a trial become replayable counterexamples."""

    def test_linalg_error_is_recorded(self):
        report = run_suite(SINGULAR_SUITE, 4, 2)

        assert not report.passed
        assert report.errors == 2
        failure = report.failures[0]
        assert failure.details["error"]["error_type"] == "LinAlgError"
        assert failure.details["error"]["error_code"] == "NUMERICAL_ERROR"
        assert failure.inputs["matrix"]["__type__"] == "array"

    def test_error_replays(self):
        failure = run_suite(SINGULAR_SUITE, 4, 1).failures[0]
        result = replay(failure, {SINGULAR_SUITE.name: SINGULAR_SUITE})

        assert result.reproduced
        assert result.error["error_type"] == "LinAlgError"


class TestSegmentTriples:
    def test_endpoints_are_off_the_boundary(self):
        """Each endpoint averages two leaves, so its characteristic exceeds 1."""
        suite = experiments.SEGMENT_SUITE
        params = suite.params()
        for trial in range(20):
            inputs = suite.generate(substream(0, trial, suite.stream), params)
            points = points_from_weight(inputs["weight"], inputs["f"], inputs["g"], 2)
            assert len(points[1]) == 2
            assert max(p.a2_value() for p in points[1]) > 1 + 1e-6


class TestRandomAlpha:
    def test_bounds(self):
        alpha = random_alpha(substream(3), 3)
        assert alpha.shape == (8,)
        assert abs(alpha.sum()) < 1e-12
        assert max(abs(alpha)) <= 0.25 + 1e-12


class TestNormScan:
    """Test the report-only norm scan."""

    def test_martingale_scan(self):
        report = norm_scan(0, 4, depth=3, target_x_values=[1.0, 4.0])

        assert report.passed
        assert len(report.rows) == 4
        for row in report.rows:
            assert row["bucket_lo"] <= row["a2"] < row["bucket_hi"]
            assert row["sigma_norm"] is not None
            assert row["norm_over_x"] == pytest.approx(row["norm"] / row["a2"])

    def test_shift_scan(self):
        report = norm_scan(1, 2, op="shift", depth=3, target_x_values=[2.0])
        assert all(row["symbol_class"] == "" for row in report.rows)
        assert all(row["sigma_norm"] is None for row in report.rows)
        assert all((row["m"], row["n"]) == (0, 1) for row in report.rows)

    def test_bucket_table(self):
        rows = [
            {"bucket_lo": 1.0, "bucket_hi": 2.0, "norm": 1.0, "norm_over_x": 0.9},
            {"bucket_lo": 1.0, "bucket_hi": 2.0, "norm": 1.5, "norm_over_x": 0.8},
            {"bucket_lo": 4.0, "bucket_hi": 8.0, "norm": 3.0, "norm_over_x": 0.5},
        ]
        table = bucket_table(rows)

        assert [entry["trials"] for entry in table] == [2, 1]
        assert table[0]["max_norm"] == 1.5
        assert table[0]["max_norm_over_x"] == 0.9
        assert table[1]["bucket_lo"] == 4.0


if __name__ == "__main__":
    pytest.main([__file__])
