#!/usr/bin/env python3
"""
Test suite for CLI commands in haarlab.

This module runs every command through click's test runner and checks exit
codes and the artifacts they write.
"""

import json
import os
import shutil
import sys
import tempfile

import numpy as np
import pytest
from click.testing import CliRunner

# Add src to path for testing
sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from haarlab.cli.fuzz import fuzz_cli
from haarlab.cli.main import cli
from haarlab.core import FuzzOrchestrator
from haarlab.core.dyadic import MatrixWeight
from haarlab.core.reporting import write_failures
from haarlab.core.serialization import weight_to_json


class TestMainCLI:
    """Test the top-level command group."""

    def setup_method(self):
        """Set up test environment."""
        self.runner = CliRunner()
        self.temp_dir = tempfile.mkdtemp()

    def teardown_method(self):
        """Clean up test environment."""
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def test_version(self):
        result = self.runner.invoke(cli, ["--version"])
        assert result.exit_code == 0
        assert "haarlab version" in result.output

    def test_help(self):
        result = self.runner.invoke(cli, ["--help"])
        assert result.exit_code == 0
        for command in ("a2", "norm-scan", "bellman", "schur", "carleson", "transfer", "fuzz"):
            assert command in result.output

    def test_missing_config_file(self):
        """An explicit --config that does not exist is a configuration error."""
        missing = os.path.join(self.temp_dir, "missing.yaml")
        result = self.runner.invoke(cli, ["--config", missing, "a2"])
        assert result.exit_code == 2
        assert "not found" in result.output


class TestA2CLI:
    """Test the a2 command."""

    def setup_method(self):
        """Set up test environment."""
        self.runner = CliRunner()
        self.temp_dir = tempfile.mkdtemp()

    def teardown_method(self):
        """Clean up test environment."""
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def test_random_weight(self):
        json_path = os.path.join(self.temp_dir, "a2.json")
        result = self.runner.invoke(cli, ["a2", "--seed", "3", "--depth", "3", "--json", json_path])

        assert result.exit_code == 0
        assert "[W]_A2" in result.output
        with open(json_path) as f:
            report = json.load(f)
        assert 1.0 <= report["characteristic"] <= 16.0 + 1e-9

    def test_weight_file(self):
        weight_path = os.path.join(self.temp_dir, "w.json")
        with open(weight_path, "w") as f:
            json.dump(weight_to_json(MatrixWeight(np.array([[[4.0]], [[1.0]]]))), f)
        csv_path = os.path.join(self.temp_dir, "levels.csv")

        result = self.runner.invoke(cli, ["a2", "--weight", weight_path, "--csv", csv_path])

        assert result.exit_code == 0
        assert "1.5625" in result.output
        with open(csv_path) as f:
            assert f.readline().strip() == "# haarlab-csv v1"

    def test_missing_weight_file(self):
        result = self.runner.invoke(
            cli, ["a2", "--weight", os.path.join(self.temp_dir, "none.json")]
        )
        assert result.exit_code == 2

    def test_invalid_option(self):
        result = self.runner.invoke(cli, ["a2", "--target-x", "0.5"])
        assert result.exit_code == 2


class TestCheckCommands:
    """Test the per-module check commands."""

    def setup_method(self):
        """Set up test environment."""
        self.runner = CliRunner()
        self.temp_dir = tempfile.mkdtemp()

    def teardown_method(self):
        """Clean up test environment."""
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def test_schur_sign_bound(self):
        result = self.runner.invoke(cli, ["schur", "--check", "sign-bound", "--trials", "3"])
        assert result.exit_code == 0
        assert "schur-sign-bound" in result.output

    def test_bellman_resolvent(self):
        result = self.runner.invoke(cli, ["bellman", "--check", "resolvent", "--trials", "3"])
        assert result.exit_code == 0

    def test_bellman_carleson(self):
        csv_path = os.path.join(self.temp_dir, "concavity.csv")
        result = self.runner.invoke(
            cli, ["bellman", "--check", "carleson", "--trials", "2", "--csv", csv_path]
        )
        assert result.exit_code == 0

        with open(csv_path) as f:
            rows = f.read().splitlines()[2:]
        assert len(rows) == 2
        assert all(row.startswith("bellman-carleson-concavity,") for row in rows)

    def test_bellman_dimension_limit(self):
        result = self.runner.invoke(cli, ["bellman", "--d", "50", "--trials", "1"])
        assert result.exit_code == 1
        assert "exceeds the configured limit" in result.output

    def test_norm_scan_complexity(self):
        csv_path = os.path.join(self.temp_dir, "scan.csv")
        result = self.runner.invoke(
            cli,
            ["norm-scan", "--op", "shift", "--k", "2", "--depth", "3", "--trials", "2", "--csv", csv_path],
        )
        assert result.exit_code == 0

        with open(csv_path) as f:
            lines = f.read().splitlines()
        header = lines[1].split(",")
        for line in lines[2:]:
            cells = dict(zip(header, line.split(",")))
            assert (cells["m"], cells["n"]) == ("1", "1")

    def test_norm_scan_martingale_complexity(self):
        result = self.runner.invoke(cli, ["norm-scan", "--k", "3", "--trials", "1"])
        assert result.exit_code == 2

    def test_carleson(self):
        json_path = os.path.join(self.temp_dir, "failures.json")
        result = self.runner.invoke(
            cli, ["carleson", "--trials", "3", "--depth", "3", "--json", json_path]
        )

        assert result.exit_code == 0
        with open(json_path) as f:
            assert json.load(f) == []

    def test_unknown_check(self):
        result = self.runner.invoke(cli, ["schur", "--check", "nonsense"])
        assert result.exit_code == 2

    def test_transfer(self):
        csv_path = os.path.join(self.temp_dir, "transfer.csv")
        result = self.runner.invoke(
            cli, ["transfer", "--p", "2", "--depth", "2", "--d", "2", "--trials", "2", "--csv", csv_path]
        )
        assert result.exit_code == 0
        assert os.path.exists(csv_path)

    def test_transfer_budget(self):
        result = self.runner.invoke(cli, ["transfer", "--p", "4", "--trials", "1"])
        assert result.exit_code != 0
        assert "exceeds" in result.output


class TestFuzzCLI:
    """Test fuzz, replay and the standalone haarlab-fuzz group."""

    def setup_method(self):
        """Set up test environment."""
        self.runner = CliRunner()
        self.temp_dir = tempfile.mkdtemp()

    def teardown_method(self):
        """Clean up test environment."""
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def test_zero_trials(self):
        result = self.runner.invoke(cli, ["fuzz", "--trials", "0", "--suite", "carleson"])
        assert result.exit_code == 0

    def test_list(self):
        result = self.runner.invoke(cli, ["fuzz", "--list"])
        assert result.exit_code == 0
        assert "carleson-embedding" in result.output

    def test_unknown_suite(self):
        result = self.runner.invoke(cli, ["fuzz", "--suite", "nonexistent"])
        assert result.exit_code == 2

    def test_same_seed_same_bytes(self):
        """Two runs with one seed write identical CSV files."""
        outputs = []
        for name in ("first.csv", "second.csv"):
            path = os.path.join(self.temp_dir, name)
            result = self.runner.invoke(
                cli,
                ["fuzz", "--trials", "2", "--seed", "5", "--suite", "transfer", "--csv", path],
            )
            assert result.exit_code == 0
            with open(path, "rb") as f:
                outputs.append(f.read())
        assert outputs[0] == outputs[1]

    def test_summary_and_failures(self):
        summary_path = os.path.join(self.temp_dir, "summary.json")
        failures_path = os.path.join(self.temp_dir, "failures.json")
        result = self.runner.invoke(
            cli,
            [
                "fuzz",
                "--trials",
                "1",
                "--suite",
                "carleson-embedding",
                "--json",
                summary_path,
                "--failures",
                failures_path,
            ],
        )

        assert result.exit_code == 0
        with open(summary_path) as f:
            summary = json.load(f)
        assert summary["overall_success"] is True
        with open(failures_path) as f:
            assert json.load(f) == []

    def test_replay_empty_file(self):
        path = os.path.join(self.temp_dir, "empty.json")
        with open(path, "w") as f:
            f.write("[]")
        result = self.runner.invoke(cli, ["replay", path])
        assert result.exit_code == 0

    def test_replay_round_trip(self):
        report = FuzzOrchestrator().run(2, 3, suites=["carleson-embedding"]).suites[
            "carleson-embedding"
        ]
        path = str(write_failures(os.path.join(self.temp_dir, "worst.json"), [report.worst]))

        result = self.runner.invoke(cli, ["replay", path])
        assert result.exit_code == 0
        assert "reproduced" in result.output

    def test_replay_tampered(self):
        report = FuzzOrchestrator().run(2, 1, suites=["carleson-embedding"]).suites[
            "carleson-embedding"
        ]
        tampered = report.worst.model_copy(update={"observed": report.worst.observed + 1.0})
        path = str(write_failures(os.path.join(self.temp_dir, "bad.json"), [tampered]))

        result = self.runner.invoke(cli, ["replay", path])
        assert result.exit_code == 1

    def test_fuzz_group(self):
        result = self.runner.invoke(fuzz_cli, ["--version"])
        assert result.exit_code == 0

        result = self.runner.invoke(
            fuzz_cli, ["run", "--trials", "1", "--suite", "transfer-averages"]
        )
        assert result.exit_code == 0


class TestConfigCLI:
    """Test the config command group."""

    def setup_method(self):
        """Set up test environment."""
        self.runner = CliRunner()
        self.temp_dir = tempfile.mkdtemp()
        self.config_file = os.path.join(self.temp_dir, "haarlab.yaml")

    def teardown_method(self):
        """Clean up test environment."""
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def test_init_and_validate(self):
        result = self.runner.invoke(cli, ["config", "init", "--template", "ci", "--output", self.config_file])
        assert result.exit_code == 0
        assert os.path.exists(self.config_file)

        result = self.runner.invoke(cli, ["config", "validate", self.config_file])
        assert result.exit_code == 0
        assert "valid" in result.output

    def test_init_refuses_overwrite(self):
        self.runner.invoke(cli, ["config", "init", "--output", self.config_file])
        result = self.runner.invoke(cli, ["config", "init", "--output", self.config_file])
        assert result.exit_code == 2

        result = self.runner.invoke(
            cli, ["config", "init", "--output", self.config_file, "--force"]
        )
        assert result.exit_code == 0

    def test_validate_bad_file(self):
        with open(self.config_file, "w") as f:
            f.write("sampling:\n  theta_samples: 1\n")
        result = self.runner.invoke(cli, ["config", "validate", self.config_file])
        assert result.exit_code == 2

    def test_profile_option(self):
        self.runner.invoke(
            cli, ["config", "init", "--template", "thorough", "--output", self.config_file]
        )
        result = self.runner.invoke(
            cli,
            ["--config", self.config_file, "--profile", "quick", "bellman", "--check", "resolvent", "--trials", "2"],
        )
        assert result.exit_code == 0


if __name__ == "__main__":
    pytest.main([__file__])
