#!/usr/bin/env python3
"""
Tests for the cube-to-interval transfer.
"""

import os
import sys

import numpy as np
import pytest

# Add src to path for testing
sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from haarlab.core.dyadic import DyadicInterval
from haarlab.core.exceptions import BudgetExceededError, ShapeMismatchError, ValidationError
from haarlab.core.rng import substream
from haarlab.core.transfer import (
    CubeGrid,
    almost_child_check,
    build_map,
    cube_characteristic,
    cube_weight_from_json,
    inflation_check,
    inflation_factor,
    random_cube_weight,
    transfer_function,
    transfer_residual,
)


def _identity_grid(p: int, depth: int, dim: int) -> CubeGrid:
    side = 1 << depth
    return CubeGrid(np.broadcast_to(np.eye(dim), (side,) * p + (dim, dim)).copy(), p)


class TestCubeIntervalMap:
    """Morton ordering of cube leaves on the line."""

    def test_one_dimensional_map_is_identity(self):
        cmap = build_map(1, 4)
        np.testing.assert_array_equal(cmap.leaf_order, np.arange(16))

    def test_axis_order(self):
        cmap = build_map(2, 2)
        # interval leaf 0010: axis 0 gets bits 0,1 and axis 1 gets 0,0
        assert cmap.leaf_order[2] == 4
        assert sorted(cmap.leaf_order) == list(range(16))

    def test_region_and_measure(self):
        cmap = build_map(2, 1)
        node = DyadicInterval(1, 1)
        assert cmap.region(node) == ((1, 2), (0, 2))
        assert cmap.measure(node) == pytest.approx(0.5)
        assert not cmap.is_cube(node)
        assert cmap.cube_of(node) == DyadicInterval.root()

    @pytest.mark.parametrize("p,count", [(2, 2), (3, 6)])
    def test_almost_children(self, p, count):
        cmap = build_map(p, 1)
        assert len(cmap.almost_children(DyadicInterval.root())) == count
        assert len(cmap.children(DyadicInterval.root())) == 1 << p

    def test_leaf_cube_has_no_almost_children(self):
        cmap = build_map(2, 1)
        with pytest.raises(ValidationError):
            cmap.almost_children(DyadicInterval(2, 0))

    def test_budgets(self):
        with pytest.raises(BudgetExceededError):
            build_map(4, 1)
        with pytest.raises(BudgetExceededError):
            build_map(3, 5)
        with pytest.raises(ValidationError):
            build_map(0, 1)


class TestTransfer:
    """Averages and characteristics after transfer."""

    def test_identity_weight(self):
        for p in (1, 2, 3):
            cmap = build_map(p, 1)
            report = inflation_check(cmap, _identity_grid(p, 1, 2))
            assert report.cube_x == pytest.approx(1.0)
            assert report.line_x == pytest.approx(1.0)
            assert report.bound == pytest.approx(4.0 ** (p - 1))

    def test_inflation_factor(self):
        assert inflation_factor(1) == 1.0
        assert inflation_factor(3) == 16.0

    @pytest.mark.parametrize("p", [2, 3])
    def test_averages_agree(self, p):
        rng = substream(90, p)
        values = rng.standard_normal((4,) * p + (2,))
        f = CubeGrid(values, p)
        assert transfer_residual(build_map(p, 2), f) < 1e-12
        g = transfer_function(build_map(p, 2), f)
        np.testing.assert_allclose(g.mean, values.reshape(-1, 2).mean(axis=0), atol=1e-12)

    @pytest.mark.parametrize("p", [2, 3])
    def test_random_weight(self, p):
        w = random_cube_weight(substream(91, p), p, 2, 2)
        cmap = build_map(p, 2)
        report = inflation_check(cmap, w)
        assert report.holds()
        assert report.cube_x == pytest.approx(cube_characteristic(w))
        assert almost_child_check(cmap, w).passed

    def test_grid_shape(self):
        with pytest.raises(ShapeMismatchError):
            CubeGrid(np.zeros((3, 3)), 2)
        with pytest.raises(ShapeMismatchError):
            inflation_check(build_map(2, 2), _identity_grid(2, 1, 1))

    def test_json_missing_key(self):
        with pytest.raises(ValidationError):
            cube_weight_from_json({"p": 2, "depth": 1})


if __name__ == "__main__":
    pytest.main([__file__])
