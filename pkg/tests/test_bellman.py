#!/usr/bin/env python3
"""
Tests for the Bellman domain, the modified dynamics and the Carleson Bellman function.
"""

import os
import sys

import numpy as np
import pytest

# Add src to path for testing
sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from haarlab.core.bellman import (
    BellmanPoint,
    CarlesonBellmanPoint,
    c0_factorization_residual,
    c0_midpoint_check,
    carleson_bellman,
    carleson_concavity_gap,
    carleson_range_check,
    cauchy_schwarz_midpoint_check,
    check_martingale,
    domain_check,
    midpoint,
    modified_dynamics,
    points_from_weight,
    resolvent_check,
    segment_in_4X,
    theta_grid,
)
from haarlab.core.dyadic import GridFunction, MatrixWeight
from haarlab.core.exceptions import (
    DomainViolationError,
    DynamicsViolatedError,
    MidpointMismatchError,
    PreconditionViolatedError,
    ShapeMismatchError,
)
from haarlab.core.rng import substream
from haarlab.core.weights import random_a2_weight


def _function(seed: int, dim: int, depth: int) -> GridFunction:
    rng = substream(seed)
    shape = (1 << depth, dim)
    return GridFunction(rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def _points(seed: int, dim: int, depth: int, k: int):
    weight = random_a2_weight(seed, dim, depth, 4.0)
    f = _function(seed + 1, dim, depth)
    g = _function(seed + 2, dim, depth)
    return points_from_weight(weight, f, g, k)


class TestBellmanDomain:
    """Membership in D_X and the segment property."""

    def test_points_from_weight_are_in_domain(self):
        points = _points(40, 2, 3, 3)
        x = max(p.a2_value() for row in points for p in row)
        assert all(domain_check(p, x) for row in points for p in row)

    def test_leaf_points_sit_on_the_identity(self):
        points = _points(41, 2, 2, 2)
        for leaf in points[2]:
            assert leaf.a2_value() == pytest.approx(1.0)

    def test_rejects_x_below_one(self):
        point = _points(42, 1, 1, 1)[0][0]
        with pytest.raises(PreconditionViolatedError):
            domain_check(point, 0.5)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            BellmanPoint(np.zeros(2), 1.0, np.eye(2), np.zeros(3), 1.0, np.eye(2))

    def test_midpoint_of_children_is_parent(self):
        points = _points(43, 2, 1, 1)
        mid = midpoint(points[1][0], points[1][1])
        np.testing.assert_allclose(mid.as_vector(), points[0][0].as_vector(), atol=1e-12)

    def test_segment_in_4x(self):
        points = _points(44, 3, 1, 1)
        x = max(p.a2_value() for row in points for p in row)
        assert segment_in_4X(points[1][0], points[1][1], x)

    def test_segment_needs_midpoint_in_domain(self):
        weight = MatrixWeight(np.array([[[4.0]], [[1.0]]]))
        f = GridFunction(np.array([1.0, 1.0]))
        points = points_from_weight(weight, f, f, 1)
        with pytest.raises(PreconditionViolatedError):
            segment_in_4X(points[1][0], points[1][1], 1.0)

    def test_theta_grid(self):
        grid = theta_grid(4)
        assert grid[0] == 0.0 and grid[-1] == 1.0
        assert 0.5 in grid


class TestMidpointLemmas:
    """Convexity facts the segment property is built from."""

    def test_c0_midpoint(self):
        assert c0_midpoint_check(2 * np.eye(1), np.eye(1), np.eye(1), 2 * np.eye(1))

    def test_c0_midpoint_needs_members(self):
        with pytest.raises(PreconditionViolatedError):
            c0_midpoint_check(np.eye(1), 0.5 * np.eye(1), np.eye(1), np.eye(1))

    def test_c0_factorization(self):
        weight = random_a2_weight(45, 3, 1, 4.0)
        result = c0_factorization_residual(weight.leaf_values[0], weight.leaf_values[1])
        assert result.residual < 1e-10
        assert result.psd

    def test_cauchy_schwarz_midpoint(self):
        assert cauchy_schwarz_midpoint_check(
            np.eye(2), np.array([1.0, 0.0]), 1.0, 2 * np.eye(2), np.array([0.0, 1.0]), 0.5
        )


class TestModifiedDynamics:
    """The alpha-reweighted martingale on a k-level subtree."""

    def test_one_level_thetas(self):
        points = _points(46, 2, 1, 1)
        report = modified_dynamics(points, [0.25, -0.25])
        plus = {n.index: n.theta for n in report.nodes if n.sign == "+" and n.level == 1}
        minus = {n.index: n.theta for n in report.nodes if n.sign == "-" and n.level == 1}
        assert plus[0] == pytest.approx(5 / 8)
        assert plus[1] == pytest.approx(3 / 8)
        assert minus[0] == pytest.approx(3 / 8)
        assert report.product_identity_residual < 1e-12

    def test_report_passes(self):
        points = _points(47, 2, 2, 2)
        report = modified_dynamics(points, [0.25, -0.1, 0.1, -0.25])
        assert report.passed
        assert report.convexity_residual < 1e-9

    def test_alpha_must_sum_to_zero(self):
        points = _points(48, 1, 1, 1)
        with pytest.raises(PreconditionViolatedError):
            modified_dynamics(points, [0.25, 0.0])

    def test_alpha_must_be_small(self):
        points = _points(49, 1, 1, 1)
        with pytest.raises(PreconditionViolatedError):
            modified_dynamics(points, [0.5, -0.5])

    def test_broken_martingale(self):
        points = _points(50, 1, 1, 1)
        other = _points(51, 1, 1, 1)
        broken = [[other[0][0]], points[1]]
        with pytest.raises(DynamicsViolatedError):
            check_martingale(broken, 1e-9)


class TestCarlesonBellman:
    """B(f, F, W, M) = 4 (F - <(W + M)^{-1} f, f>)."""

    def test_value(self):
        point = CarlesonBellmanPoint(np.array([1.0]), 2.0, np.eye(1), np.eye(1))
        assert carleson_bellman(point) == pytest.approx(6.0)
        assert carleson_range_check(point)

    def test_domain(self):
        point = CarlesonBellmanPoint(np.array([1.0]), 2.0, np.eye(1), 2 * np.eye(1))
        assert not point.in_domain()
        with pytest.raises(DomainViolationError):
            carleson_bellman(point)

    def test_concavity_gap(self):
        plus = CarlesonBellmanPoint(np.array([1.0]), 2.0, np.eye(1), np.zeros((1, 1)))
        minus = CarlesonBellmanPoint(np.array([1.0]), 2.0, np.eye(1), np.zeros((1, 1)))
        point = CarlesonBellmanPoint(np.array([1.0]), 2.0, np.eye(1), 0.5 * np.eye(1))
        gap = carleson_concavity_gap(point, plus, minus, 0.5 * np.eye(1))
        assert gap.gap == pytest.approx(4 / 3)
        assert gap.quad == pytest.approx(0.25)
        assert gap.holds()

    def test_concavity_needs_midpoint(self):
        child = CarlesonBellmanPoint(np.array([1.0]), 2.0, np.eye(1), np.zeros((1, 1)))
        point = CarlesonBellmanPoint(np.array([0.5]), 2.0, np.eye(1), np.zeros((1, 1)))
        with pytest.raises(MidpointMismatchError):
            carleson_concavity_gap(point, child, child, np.zeros((1, 1)))

    def test_resolvent_equality_case(self):
        result = resolvent_check(np.eye(1), np.zeros((1, 1)), np.eye(1))
        assert result.passed

    def test_resolvent_fails_above_identity(self):
        result = resolvent_check(np.eye(1), np.zeros((1, 1)), 2 * np.eye(1))
        assert not result.difference_psd
        assert not result.e_below_identity


if __name__ == "__main__":
    pytest.main([__file__])
