#!/usr/bin/env python3
"""
Tests for Carleson sequences and the matrix Carleson embedding.
"""

import math
import os
import sys

import numpy as np
import pytest

# Add src to path for testing
sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from haarlab.core.carleson import (
    EMBEDDING_CONSTANT,
    EMBEDDING_SUITE,
    CarlesonSequence,
    carleson_scale,
    embedding_check,
    embedding_fuzz,
    random_carleson_sequence,
    random_grid_function,
    telescoping_check,
    telescoping_passed,
)
from haarlab.core.dyadic import DyadicInterval, GridFunction, MatrixWeight
from haarlab.core.exceptions import ConditionViolatedError, ShapeMismatchError, ValidationError
from haarlab.core.rng import substream
from haarlab.core.weights import random_a2_weight


def _root_only(weight: MatrixWeight, value: float):
    blocks = [value * np.eye(weight.dim)[None, ...]]
    for level in range(1, weight.depth + 1):
        blocks.append(np.zeros((1 << level, weight.dim, weight.dim)))
    return blocks


class TestCarlesonSequence:
    """Node sums, the Carleson condition and rescaling."""

    def test_scale_of_single_node(self):
        weight = MatrixWeight.identity(1, 0)
        assert carleson_scale(weight, [np.array([[[2.0]]])]) == pytest.approx(0.5)

    def test_scale_of_zero_sequence(self):
        weight = MatrixWeight.identity(2, 2)
        assert math.isinf(carleson_scale(weight, _root_only(weight, 0.0)))

    def test_random_sequence_is_on_the_boundary(self):
        weight = random_a2_weight(60, 2, 3, 4.0)
        sequence = random_carleson_sequence(substream(61), weight)
        assert sequence.worst_node()[1] == pytest.approx(1.0)
        assert sequence.satisfies_condition()

    def test_mtilde_recursion(self):
        weight = random_a2_weight(62, 2, 4, 4.0)
        sequence = random_carleson_sequence(substream(63), weight)
        assert sequence.mtilde_recursion_residual() < 1e-12
        np.testing.assert_array_equal(sequence.mtilde[-1], 0.0)

    def test_condition_violation(self):
        weight = random_a2_weight(64, 1, 2, 4.0)
        sequence = random_carleson_sequence(substream(65), weight).scaled(2.0)
        with pytest.raises(ConditionViolatedError):
            sequence.check_condition()

    def test_block_validation(self):
        weight = MatrixWeight.identity(1, 1)
        with pytest.raises(ShapeMismatchError):
            CarlesonSequence(weight, (np.zeros((1, 1, 1)),))
        with pytest.raises(ValidationError):
            CarlesonSequence(weight, (-np.ones((1, 1, 1)), np.zeros((2, 1, 1))))
        with pytest.raises(ValidationError):
            CarlesonSequence(weight, (np.ones((1, 1, 1)), np.zeros((2, 1, 1)))).scaled(-1.0)


class TestEmbedding:
    """Both sides of the embedding inequality."""

    def test_indicator_example(self):
        weight = MatrixWeight.identity(1, 1)
        sequence = CarlesonSequence(weight, tuple(_root_only(weight, 1.0)))
        f = GridFunction(np.array([1.0, 0.0]))
        check = embedding_check(sequence, f)
        assert check.lhs == pytest.approx(0.25)
        assert check.rhs == pytest.approx(EMBEDDING_CONSTANT * 0.5)
        assert check.lhs / f.l2_norm_sq() == pytest.approx(0.5)

    def test_t_equals_rescaling(self):
        weight = random_a2_weight(66, 2, 3, 4.0)
        sequence = random_carleson_sequence(substream(67), weight)
        f = random_grid_function(substream(68), 2, 3)
        direct = embedding_check(sequence, f, 0.5)
        rescaled = embedding_check(sequence.scaled(0.5), f, 1.0)
        assert direct.lhs == pytest.approx(rescaled.lhs, rel=1e-12)

    @pytest.mark.parametrize("dim", [1, 2, 3])
    def test_embedding_holds(self, dim):
        weight = random_a2_weight(69 + dim, dim, 4, 8.0)
        sequence = random_carleson_sequence(substream(70 + dim), weight)
        f = random_grid_function(substream(71 + dim), dim, 4)
        assert embedding_check(sequence, f).holds()

    def test_t_range(self):
        weight = MatrixWeight.identity(1, 1)
        sequence = CarlesonSequence(weight, tuple(_root_only(weight, 1.0)))
        with pytest.raises(ValidationError):
            embedding_check(sequence, GridFunction.zeros(1, 1), t=0.0)

    def test_condition_is_required(self):
        weight = MatrixWeight.identity(1, 1)
        sequence = CarlesonSequence(weight, tuple(_root_only(weight, 2.0)))
        with pytest.raises(ConditionViolatedError):
            embedding_check(sequence, GridFunction(np.array([1.0, 0.0])))


class TestTelescoping:
    """Bellman concavity at every node of the tree."""

    def test_every_node_is_checked(self):
        weight = random_a2_weight(72, 2, 3, 4.0)
        sequence = random_carleson_sequence(substream(73), weight)
        checks = telescoping_check(sequence, random_grid_function(substream(74), 2, 3))
        assert len(checks) == 15
        assert DyadicInterval(3, 7) in checks
        assert telescoping_passed(checks)


class TestEmbeddingFuzz:
    """The seeded embedding suite."""

    def test_report(self):
        report = embedding_fuzz(5, 6, dims=(1, 2), depth=3)
        assert report.trials == 6
        assert report.passed
        assert set(report.max_ratio_by_dim) <= {"1", "2"}
        assert report.max_ratio <= EMBEDDING_CONSTANT

    def test_deterministic(self):
        a = embedding_fuzz(9, 3, dims=(2,), depth=2)
        b = embedding_fuzz(9, 3, dims=(2,), depth=2)
        assert a.rows == b.rows

    def test_suite_metadata(self):
        assert EMBEDDING_SUITE.stream == 40
        assert "ratio" in EMBEDDING_SUITE.header


if __name__ == "__main__":
    pytest.main([__file__])
