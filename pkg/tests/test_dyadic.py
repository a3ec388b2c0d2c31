#!/usr/bin/env python3
"""
Tests for the dyadic tree, grid functions and matrix weights.
"""

import os
import sys

import numpy as np
import pytest

# Add src to path for testing
sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from haarlab.core.dyadic import (
    DyadicInterval,
    GridFunction,
    MatrixWeight,
    check_dense_budget,
    depth_first,
    haar_analyze,
    haar_synthesize,
    iter_nodes,
    weighted_energy,
)
from haarlab.core.exceptions import (
    DimensionTooLargeError,
    MissingCoefficientError,
    NotPositiveDefiniteError,
    OutOfTreeError,
    ShapeMismatchError,
    ValidationError,
)
from haarlab.core.linalg import random_hpd
from haarlab.core.rng import substream


class TestDyadicInterval:
    """Node arithmetic on the tree."""

    def test_children_and_parent(self):
        node = DyadicInterval(2, 1)
        assert node.plus == DyadicInterval(3, 2)
        assert node.minus == DyadicInterval(3, 3)
        assert node.plus.parent == node
        assert node.minus.parent == node

    def test_geometry(self):
        node = DyadicInterval(2, 3)
        assert node.length == 0.25
        assert node.start == 0.75

    def test_root_has_no_parent(self):
        with pytest.raises(OutOfTreeError):
            DyadicInterval.root().parent

    def test_invalid_index(self):
        with pytest.raises(ValidationError):
            DyadicInterval(1, 2)

    def test_descendants(self):
        assert DyadicInterval(1, 1).descendants(2) == [
            DyadicInterval(3, 4),
            DyadicInterval(3, 5),
            DyadicInterval(3, 6),
            DyadicInterval(3, 7),
        ]

    def test_contains_and_ancestor(self):
        node = DyadicInterval(3, 5)
        assert node.ancestor(1) == DyadicInterval(1, 1)
        assert DyadicInterval(1, 1).contains(node)
        assert not DyadicInterval(1, 0).contains(node)

    def test_leaf_slice(self):
        assert DyadicInterval(1, 1).leaf_slice(3) == slice(4, 8)

    def test_traversals(self):
        assert len(list(iter_nodes(3))) == 15
        assert len(list(iter_nodes(3, include_leaves=False))) == 7
        order = list(depth_first(2))
        assert order[:3] == [DyadicInterval(0, 0), DyadicInterval(1, 0), DyadicInterval(2, 0)]
        assert len(order) == 7


class TestGridFunction:
    """Haar analysis and synthesis of grid functions."""

    def test_scalar_leaves_become_columns(self):
        f = GridFunction(np.array([1.0, 2.0, 3.0, 4.0]))
        assert f.dim == 1
        assert f.depth == 2

    def test_rejects_non_power_of_two(self):
        with pytest.raises(ShapeMismatchError):
            GridFunction(np.ones((3, 2)))

    def test_averages_and_coefficients(self):
        f = GridFunction(np.array([1.0, 3.0]))
        assert f.mean[0] == pytest.approx(2.0)
        # <f, h_[0,1)> = (1/2)(1 - 3)
        assert f.haar_coeff(DyadicInterval.root())[0] == pytest.approx(-1.0)

    def test_leaf_has_no_coefficient(self):
        f = GridFunction.zeros(1, 2)
        with pytest.raises(OutOfTreeError):
            f.haar_coeff(DyadicInterval(2, 0))

    def test_analysis_synthesis_identity(self):
        rng = substream(11)
        values = rng.standard_normal((16, 3)) + 1j * rng.standard_normal((16, 3))
        f = GridFunction(values)
        mean, coeffs = haar_analyze(f)
        g = haar_synthesize(mean, coeffs, f.depth)
        np.testing.assert_allclose(g.leaf_values, f.leaf_values, atol=1e-12)

    def test_parseval(self):
        rng = substream(12)
        f = GridFunction(rng.standard_normal((8, 2)))
        mean, coeffs = haar_analyze(f)
        energy = np.sum(np.abs(mean) ** 2) + sum(np.sum(np.abs(c) ** 2) for c in coeffs.values())
        assert energy == pytest.approx(f.l2_norm_sq())

    def test_synthesis_needs_every_coefficient(self):
        with pytest.raises(MissingCoefficientError):
            haar_synthesize(np.zeros(1), {DyadicInterval.root(): np.zeros(1)}, 2)

    def test_inner(self):
        f = GridFunction(np.array([[1.0], [1j]]))
        assert f.inner(f) == pytest.approx(1.0)
        with pytest.raises(ShapeMismatchError):
            f.inner(GridFunction.zeros(1, 2))


class TestMatrixWeight:
    """Matrix weights and their averages."""

    def test_identity_averages(self):
        weight = MatrixWeight.identity(2, 3)
        avg, avg_inv = weight.averages(DyadicInterval(1, 0))
        np.testing.assert_allclose(avg.entries, np.eye(2))
        np.testing.assert_allclose(avg_inv.entries, np.eye(2))

    def test_averages_of_inverses(self):
        weight = MatrixWeight(np.array([[[4.0]], [[1.0]]]))
        avg, avg_inv = weight.averages(DyadicInterval.root())
        assert avg.entries[0, 0].real == pytest.approx(2.5)
        assert avg_inv.entries[0, 0].real == pytest.approx(0.625)

    def test_rejects_singular_leaf(self):
        with pytest.raises(NotPositiveDefiniteError):
            MatrixWeight(np.array([np.eye(2), np.diag([1.0, 0.0])]))

    def test_apply_power(self):
        w = random_hpd(substream(13), 2)
        weight = MatrixWeight.constant(w, 1)
        f = GridFunction(np.array([[1.0, 0.0], [0.0, 1.0]]))
        back = weight.apply_power(weight.apply_power(f, 0.5), -0.5)
        np.testing.assert_allclose(back.leaf_values, f.leaf_values, atol=1e-12)
        with pytest.raises(ValidationError):
            weight.apply_power(f, 2.0)

    def test_weighted_energy(self):
        weight = MatrixWeight(np.array([[[4.0]], [[1.0]]]))
        f = GridFunction(np.array([1.0, 2.0]))
        # (4 * 1 + 1 * 4) / 2
        assert weighted_energy(f, weight) == pytest.approx(4.0)

    def test_weighted_energy_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            weighted_energy(GridFunction.zeros(2, 1), MatrixWeight.identity(1, 1))


class TestDenseBudget:
    def test_budget(self):
        check_dense_budget(10, 4)
        with pytest.raises(DimensionTooLargeError):
            check_dense_budget(11, 4)
        with pytest.raises(DimensionTooLargeError):
            check_dense_budget(3, 2, limit=15)


if __name__ == "__main__":
    pytest.main([__file__])
