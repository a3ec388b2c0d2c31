#!/usr/bin/env python3
"""
Tests for the JSON codecs and the CSV/JSON artifacts.
"""

import json
import math
import os
import shutil
import sys
import tempfile

import numpy as np
import pytest

# Add src to path for testing
sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from haarlab.core.dyadic import DyadicInterval, GridFunction, MatrixWeight
from haarlab.core.exceptions import ReportIOError, ValidationError
from haarlab.core.linalg import HpdMatrix
from haarlab.core.models import Counterexample, FuzzReport
from haarlab.core.operators import HaarShiftSpec
from haarlab.core.reporting import (
    csv_text,
    json_text,
    load_counterexamples,
    read_csv,
    summarize,
    write_csv,
    write_failures,
)
from haarlab.core.serialization import (
    decode_value,
    encode_value,
    load_weight,
    matrix_from_json,
    shift_from_json,
    weight_from_json,
    weight_to_json,
)


def _example(**updates) -> Counterexample:
    data = dict(
        module="weights",
        operation="a2_characteristic",
        suite="weights-two-point",
        seed=1,
        trial=0,
        inputs={},
        observed=0.5,
        bound=1.0,
        tolerance=1e-9,
    )
    data.update(updates)
    return Counterexample(**data)


class TestCodecs:
    """Test the tagged JSON encodings used for counterexample inputs."""

    def setup_method(self):
        """Set up test environment."""
        self.temp_dir = tempfile.mkdtemp()

    def teardown_method(self):
        """Clean up test environment."""
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def test_mixed_inputs(self):
        weight = MatrixWeight(np.array([[[4.0]], [[1.0]]]))
        f = GridFunction(np.array([1.0 + 2j, -0.5]))
        inputs = {
            "weight": weight,
            "f": f,
            "node": DyadicInterval(2, 3),
            "z": 1 - 1j,
            "scale": np.float64(0.1),
            "blocks": [np.eye(2)],
        }

        text = json.dumps(encode_value(inputs))
        decoded = decode_value(json.loads(text))

        np.testing.assert_array_equal(decoded["weight"].leaf_values, weight.leaf_values)
        np.testing.assert_array_equal(decoded["f"].leaf_values, f.leaf_values)
        assert decoded["node"] == DyadicInterval(2, 3)
        assert decoded["z"] == 1 - 1j
        assert decoded["scale"] == 0.1
        assert not np.iscomplexobj(decoded["blocks"][0])

    def test_hpd_tag(self):
        encoded = encode_value(HpdMatrix(np.diag([2.0, 3.0])))
        assert encoded["__type__"] == "hpd"
        assert isinstance(decode_value(encoded), HpdMatrix)

    def test_shift_json(self):
        root = DyadicInterval.root()
        spec = HaarShiftSpec(1, 0, {root: np.array([[0.5], [-0.5j]])})
        decoded = decode_value(encode_value(spec))
        np.testing.assert_array_equal(decoded.coefficients[root], spec.coefficients[root])

    def test_shift_levels_checked(self):
        data = {
            "m": 1,
            "n": 0,
            "coeffs": [{"L": [0, 0], "I": [2, 0], "J": [0, 0], "re": 1.0, "im": 0.0}],
        }
        with pytest.raises(ValidationError):
            shift_from_json(data)

    def test_header_mismatch(self):
        data = weight_to_json(MatrixWeight(np.array([[[4.0]], [[1.0]]])))
        data["depth"] = 3
        with pytest.raises(ValidationError):
            weight_from_json(data)

    def test_non_square_matrix(self):
        with pytest.raises(ValidationError):
            matrix_from_json({"re": [[1.0, 2.0]], "im": [[0.0, 0.0]]})

    def test_unknown_tag(self):
        with pytest.raises(ValidationError):
            decode_value({"__type__": "tensor"})
        with pytest.raises(ValidationError):
            encode_value(object())

    def test_load_weight_errors(self):
        with pytest.raises(ReportIOError):
            load_weight(os.path.join(self.temp_dir, "missing.json"))

        broken = os.path.join(self.temp_dir, "broken.json")
        with open(broken, "w") as f:
            f.write("{not json")
        with pytest.raises(ReportIOError):
            load_weight(broken)


class TestArtifacts:
    """Test CSV and JSON report files."""

    def setup_method(self):
        """Set up test environment."""
        self.temp_dir = tempfile.mkdtemp()

    def teardown_method(self):
        """Clean up test environment."""
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def test_csv_cells(self):
        text = csv_text(
            ["suite", "ratio", "passed", "note"],
            [{"suite": "s", "ratio": 0.1, "passed": True}, {"suite": "s", "ratio": math.inf}],
        )
        lines = text.splitlines()
        assert lines[0] == "# haarlab-csv v1"
        assert lines[1] == "suite,ratio,passed,note"
        assert lines[2] == "s,0.1,true,"
        assert lines[3] == "s,inf,,"

    def test_csv_rejects_extra_columns(self):
        with pytest.raises(ValidationError):
            csv_text(["a"], [{"a": 1, "b": 2}])

    def test_csv_file(self):
        path = os.path.join(self.temp_dir, "out", "rows.csv")
        write_csv(path, ["suite", "value"], [{"suite": "x", "value": 1.5}])

        assert read_csv(path) == [{"suite": "x", "value": "1.5"}]
        with open(path, "rb") as f:
            first = f.read()
        write_csv(path, ["suite", "value"], [{"suite": "x", "value": 1.5}])
        with open(path, "rb") as f:
            assert f.read() == first

    def test_csv_schema_checked(self):
        path = os.path.join(self.temp_dir, "plain.csv")
        with open(path, "w") as f:
            f.write("a,b\n1,2\n")
        with pytest.raises(ReportIOError):
            read_csv(path)

    def test_json_sorted(self):
        assert json_text({"b": 1, "a": [2]}) == '{\n  "a": [\n    2\n  ],\n  "b": 1\n}\n'

    def test_failures_file(self):
        path = write_failures(os.path.join(self.temp_dir, "f.json"), [_example(), _example(trial=4)])

        loaded = load_counterexamples(path)
        assert [example.trial for example in loaded] == [0, 4]

    def test_single_counterexample_file(self):
        path = os.path.join(self.temp_dir, "one.json")
        with open(path, "w") as f:
            f.write(json_text(_example()))
        assert len(load_counterexamples(path)) == 1

    def test_not_counterexamples(self):
        path = os.path.join(self.temp_dir, "other.json")
        with open(path, "w") as f:
            json.dump([{"suite": "x"}], f)
        with pytest.raises(ReportIOError):
            load_counterexamples(path)

    def test_summarize(self):
        good = FuzzReport(suite="a", module="m", operation="o", seed=0, trials=3)
        bad = FuzzReport(suite="b", module="m", operation="o", seed=0, trials=2, violations=1)

        summary = summarize({"a": good, "b": bad}, {"seed": 0})
        assert not summary.overall_success
        assert summary.summary["trials"] == 5
        assert summary.summary["failed_suites"] == ["b"]
        assert summary.summary["seed"] == 0
        assert summarize({"a": good}).overall_success


if __name__ == "__main__":
    pytest.main([__file__])
