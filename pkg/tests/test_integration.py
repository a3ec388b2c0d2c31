#!/usr/bin/env python3
"""
Integration tests for haarlab.

This module verifies the workflow from configuration files through fuzz runs
to replaying the counterexample files they write.
"""

import math
import os
import shutil
import sys
import tempfile

import pytest
import yaml

# Add src to path for testing
sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from haarlab.core import ConfigManager, FuzzOrchestrator
from haarlab.core.exceptions import ConfigurationError, ValidationError
from haarlab.core.fuzz import (
    ALL_SUITES,
    MODULE_CHECKS,
    REPORT_ONLY,
    SUITES,
    default_suite_names,
    lab_params,
    resolve_suites,
)
from haarlab.core.models import LabConfig
from haarlab.core.reporting import load_counterexamples, write_failures


class TestConfigurationWorkflow:
    """Test the complete configuration workflow."""

    def setup_method(self):
        """Set up test environment."""
        self.temp_dir = tempfile.mkdtemp()
        self.config_file = os.path.join(self.temp_dir, "haarlab.yaml")

        self.test_config = {
            "tolerances": {"psd": 1e-8},
            "sampling": {"theta_samples": 9, "phase_resolution": 16},
            "runtime": {"workers": 1},
        }
        with open(self.config_file, "w") as f:
            yaml.dump(self.test_config, f)

    def teardown_method(self):
        """Clean up test environment."""
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def test_config_loading(self):
        """Test configuration loading and defaults for missing sections."""
        config = ConfigManager(self.config_file).get_config()

        assert config.tolerances.psd == 1e-8
        assert config.sampling.theta_samples == 9
        assert config.limits.max_dense == 4096
        assert config.constants.grothendieck == 1.782

    def test_missing_explicit_path(self):
        """An explicit path that does not exist is an error."""
        with pytest.raises(ConfigurationError):
            ConfigManager(os.path.join(self.temp_dir, "missing.yaml"))

    def test_invalid_values(self):
        """Pydantic validation failures surface as configuration errors."""
        bad_file = os.path.join(self.temp_dir, "bad.yaml")
        with open(bad_file, "w") as f:
            yaml.dump({"sampling": {"theta_samples": 1}}, f)

        with pytest.raises(ConfigurationError):
            ConfigManager(bad_file)
        issues = ConfigManager(self.config_file).validate_config(bad_file)
        assert issues

    def test_profiles_and_inheritance(self):
        """Test profile inheritance merges nested sections."""
        profile_file = os.path.join(self.temp_dir, "profiles.yaml")
        with open(profile_file, "w") as f:
            yaml.dump(
                {
                    "active_profile": "base",
                    "profiles": {
                        "fine": {
                            "inherits_from": "base",
                            "lab_config": {"sampling": {"theta_samples": 65}},
                        },
                        "base": {"lab_config": {"sampling": {"phase_resolution": 32}}},
                    },
                },
                f,
            )

        manager = ConfigManager(profile_file)
        assert manager.get_active_profile() == "base"
        assert sorted(manager.list_profiles()) == ["base", "fine"]

        fine = manager.get_config("fine")
        assert fine.sampling.theta_samples == 65
        assert fine.sampling.phase_resolution == 32
        assert manager.get_config().sampling.theta_samples == 33

        with pytest.raises(ConfigurationError):
            manager.get_config("missing")

    def test_inheritance_cycle(self):
        """Test cyclic inherits_from chains are rejected."""
        cycle_file = os.path.join(self.temp_dir, "cycle.yaml")
        with open(cycle_file, "w") as f:
            yaml.dump(
                {
                    "active_profile": "a",
                    "profiles": {
                        "a": {"inherits_from": "b"},
                        "b": {"inherits_from": "a"},
                    },
                },
                f,
            )

        with pytest.raises(ConfigurationError, match="cycle"):
            ConfigManager(cycle_file)

    @pytest.mark.parametrize("template", ["basic", "ci", "thorough"])
    def test_templates_load(self, template):
        """Every generated template loads back cleanly."""
        path = os.path.join(self.temp_dir, "nested", f"{template}.yaml")
        manager = ConfigManager(self.config_file)
        manager.create_default_config(path, template)

        assert manager.validate_config(path) == []
        assert isinstance(ConfigManager(path).get_config(), LabConfig)

    def test_thorough_template_profiles(self):
        path = os.path.join(self.temp_dir, "thorough.yaml")
        ConfigManager(self.config_file).create_default_config(path, "thorough")

        manager = ConfigManager(path)
        thorough = manager.get_config("thorough")
        assert thorough.runtime.workers == 4
        assert thorough.tolerances.psd == LabConfig().tolerances.psd

    def test_unknown_template(self):
        with pytest.raises(ValidationError):
            ConfigManager(self.config_file).create_default_config(
                os.path.join(self.temp_dir, "x.yaml"), "nonexistent"
            )

    def test_orchestrator_from_config(self):
        """Test orchestrator picks up configured parameters."""
        orchestrator = FuzzOrchestrator.from_config_file(self.config_file)

        params = orchestrator.params()
        assert params["tol"] == 1e-8
        assert params["theta_samples"] == 9
        assert params["resolution"] == 16
        assert orchestrator.params({"tol": 1e-6, "steps": None})["tol"] == 1e-6
        assert lab_params(LabConfig())["max_dense"] == 4096


class TestSuiteRegistry:
    """Test the suite registry and selection."""

    def test_streams_are_unique(self):
        streams = [suite.stream for suite in ALL_SUITES]
        assert len(streams) == len(set(streams))
        assert len(SUITES) == len(ALL_SUITES)

    def test_default_run_skips_report_only(self):
        names = default_suite_names()
        assert "operators-norm-scan" in REPORT_ONLY
        assert "operators-norm-scan" not in names
        assert [s.name for s in resolve_suites()] == names

    def test_resolve_by_module(self):
        names = [s.name for s in resolve_suites(["carleson"])]
        assert names == ["carleson-embedding", "carleson-telescoping"]

        mixed = resolve_suites(["transfer-inflation", "carleson-embedding"])
        assert [s.name for s in mixed] == ["carleson-embedding", "transfer-inflation"]

    def test_resolve_unknown(self):
        with pytest.raises(ValidationError):
            resolve_suites(["no-such-suite"])

    def test_module_checks_registered(self):
        for checks in MODULE_CHECKS.values():
            for suites in checks.values():
                for suite in suites:
                    assert SUITES[suite.name] is suite


class TestFuzzWorkflow:
    """Test fuzz runs and replay."""

    def setup_method(self):
        """Set up test environment."""
        self.temp_dir = tempfile.mkdtemp()
        self.orchestrator = FuzzOrchestrator()

    def teardown_method(self):
        """Clean up test environment."""
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def test_zero_trials(self):
        summary = self.orchestrator.run(0, 0, suites=["carleson"])

        assert summary.overall_success
        assert summary.summary["trials"] == 0
        assert all(not report.rows for report in summary.suites.values())

    def test_run_is_deterministic(self):
        first = self.orchestrator.run(7, 3, suites=["carleson-embedding"])
        second = self.orchestrator.run(7, 3, suites=["carleson-embedding"])

        assert first.overall_success
        assert first.suites["carleson-embedding"].rows == second.suites["carleson-embedding"].rows
        assert first.summary["seed"] == 7

    def test_progress_callback(self):
        seen = []
        self.orchestrator.run(
            1,
            2,
            suites=["transfer-averages"],
            progress_callback=lambda name, trial: seen.append((name, trial)),
        )
        assert seen == [("transfer-averages", 0), ("transfer-averages", 1)]

    def test_replay_worst_counterexample(self):
        """The worst trial of a run reproduces from its file."""
        report = self.orchestrator.run(3, 4, suites=["carleson-embedding"]).suites[
            "carleson-embedding"
        ]
        assert report.worst is not None
        assert math.isfinite(report.max_ratio)

        path = write_failures(os.path.join(self.temp_dir, "worst.json"), [report.worst])
        assert len(load_counterexamples(path)) == 1

        results = self.orchestrator.replay_file(str(path))
        assert len(results) == 1
        assert results[0].reproduced
        assert results[0].observed == pytest.approx(report.worst.observed)

    @pytest.mark.slow
    def test_default_run_passes(self):
        """Every default suite passes an acceptance-sized run."""
        summary = self.orchestrator.run(0, 25)

        assert summary.overall_success, summary.summary["failed_suites"]
        assert summary.summary["suites"] == len(default_suite_names())

    def test_replay_unknown_suite(self):
        report = self.orchestrator.run(3, 1, suites=["carleson-embedding"]).suites[
            "carleson-embedding"
        ]
        example = report.worst.model_copy(update={"suite": "gone"})
        with pytest.raises(ValidationError):
            self.orchestrator.replay(example)


if __name__ == "__main__":
    pytest.main([__file__])
