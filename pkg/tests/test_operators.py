#!/usr/bin/env python3
"""
Tests for martingale transforms, Haar shifts and weighted norms.
"""

import os
import sys

import numpy as np
import pytest

# Add src to path for testing
sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from haarlab.core.dyadic import DyadicInterval, GridFunction, MatrixWeight
from haarlab.core.exceptions import (
    DepthExceededError,
    DimensionTooLargeError,
    IndexOutOfRangeError,
    MissingCoefficientError,
    ShapeMismatchError,
    ValidationError,
)
from haarlab.core.models import SymbolClass
from haarlab.core.operators import (
    HaarShiftSpec,
    MartingaleSymbol,
    apply_haar_shift,
    apply_martingale_transform,
    linearization_average_form,
    linearization_check,
    random_haar_shift,
    random_martingale_symbol,
    sigma_norm,
    slice_bound_check,
    weighted_norm,
)
from haarlab.core.rng import substream
from haarlab.core.weights import random_a2_weight


def _random_function(seed: int, dim: int, depth: int) -> GridFunction:
    rng = substream(seed)
    shape = (1 << depth, dim)
    return GridFunction(rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


class TestMartingaleTransform:
    """T_sigma on grid functions."""

    def test_identity_symbol_removes_mean(self):
        f = _random_function(1, 2, 3)
        g = apply_martingale_transform(MartingaleSymbol.identity(2, 3), f)
        np.testing.assert_allclose(g.leaf_values, f.leaf_values - f.mean, atol=1e-12)

    def test_minus_identity(self):
        f = _random_function(2, 1, 2)
        g = apply_martingale_transform(MartingaleSymbol.constant(-np.eye(1), 2), f)
        np.testing.assert_allclose(g.leaf_values, f.mean - f.leaf_values, atol=1e-12)

    def test_adjoint_pairing(self):
        rng = substream(3)
        weight = random_a2_weight(3, 2, 3, 4.0)
        sigma = random_martingale_symbol(rng, weight, SymbolClass.GENERAL)
        f = _random_function(4, 2, 3)
        g = _random_function(5, 2, 3)
        lhs = apply_martingale_transform(sigma, f).inner(g)
        rhs = f.inner(apply_martingale_transform(sigma.adjoint(), g))
        assert lhs == pytest.approx(rhs, abs=1e-10)

    def test_from_mapping_requires_every_node(self):
        with pytest.raises(MissingCoefficientError):
            MartingaleSymbol.from_mapping({DyadicInterval.root(): np.eye(1)}, 2)

    def test_at(self):
        sigma = MartingaleSymbol.scalar([np.array([2.0]), np.array([3.0, 4.0])], 1)
        assert sigma.at(DyadicInterval(1, 1))[0, 0] == pytest.approx(4.0)


class TestSymbols:
    """Random symbols and the weighted symbol norm."""

    def setup_method(self):
        self.weight = random_a2_weight(8, 3, 3, 8.0)

    @pytest.mark.parametrize("symbol_class", list(SymbolClass))
    def test_random_symbols_are_contractive(self, symbol_class):
        sigma = random_martingale_symbol(substream(9), self.weight, symbol_class)
        assert sigma.depth == self.weight.depth
        assert sigma_norm(sigma, self.weight) <= 1 + 1e-9

    def test_commuting_symbol_commutes_with_averages(self):
        sigma = random_martingale_symbol(substream(10), self.weight, SymbolClass.COMMUTING)
        for level in range(self.weight.depth):
            avg = self.weight.avg_levels[level]
            np.testing.assert_allclose(
                sigma.levels[level] @ avg, avg @ sigma.levels[level], atol=1e-10
            )

    def test_identity_has_norm_one(self):
        assert sigma_norm(MartingaleSymbol.identity(3, 3), self.weight) == pytest.approx(1.0)


class TestHaarShift:
    """Cancellative Haar shifts."""

    def test_coefficient_bound(self):
        with pytest.raises(ValidationError):
            HaarShiftSpec(0, 0, {DyadicInterval.root(): np.array([[1.5]])})
        with pytest.raises(ValidationError):
            HaarShiftSpec(1, 1, {DyadicInterval.root(): np.full((2, 2), 0.6)})

    def test_coefficient_shape(self):
        with pytest.raises(ShapeMismatchError):
            HaarShiftSpec(1, 0, {DyadicInterval.root(): np.zeros((1, 1))})

    def test_full_zero_shift_is_projection(self):
        depth = 3
        spec = HaarShiftSpec(
            0,
            0,
            {
                DyadicInterval(level, index): np.ones((1, 1))
                for level in range(depth)
                for index in range(1 << level)
            },
        )
        f = _random_function(11, 2, depth)
        np.testing.assert_allclose(
            apply_haar_shift(spec, f).leaf_values, f.leaf_values - f.mean, atol=1e-12
        )

    def test_depth_exceeded(self):
        spec = HaarShiftSpec(1, 0, {DyadicInterval.root(): np.full((2, 1), 0.5)})
        assert spec.required_depth == 2
        with pytest.raises(DepthExceededError):
            apply_haar_shift(spec, _random_function(12, 1, 1))

    def test_slices_partition_the_shift(self):
        rng = substream(13)
        spec = random_haar_shift(rng, 1, 2, 6, density=0.8)
        f = _random_function(14, 2, 6)
        total = sum(
            (apply_haar_shift(part, f).leaf_values for part in spec.slices()),
            np.zeros_like(f.leaf_values),
        )
        np.testing.assert_allclose(total, apply_haar_shift(spec, f).leaf_values, atol=1e-12)

    def test_slice_index_range(self):
        spec = random_haar_shift(substream(15), 1, 1, 3)
        with pytest.raises(IndexOutOfRangeError):
            spec.slice(2)

    def test_adjoint_pairing(self):
        spec = random_haar_shift(substream(16), 2, 1, 5)
        f = _random_function(17, 1, 5)
        g = _random_function(18, 1, 5)
        lhs = apply_haar_shift(spec, f).inner(g)
        rhs = f.inner(apply_haar_shift(spec.adjoint(), g))
        assert lhs == pytest.approx(rhs, abs=1e-10)

    def test_output_has_mean_zero(self):
        spec = random_haar_shift(substream(19), 0, 2, 4)
        out = apply_haar_shift(spec, _random_function(20, 2, 4))
        np.testing.assert_allclose(out.mean, 0.0, atol=1e-12)

    def test_self_adjoint_part_is_symmetric(self):
        spec = random_haar_shift(substream(23), 1, 1, 5).self_adjoint_part()
        for c in spec.coefficients.values():
            np.testing.assert_allclose(c, c.conj().T, atol=1e-15)

        f = _random_function(24, 2, 5)
        g = _random_function(25, 2, 5)
        lhs = apply_haar_shift(spec, f).inner(g)
        rhs = f.inner(apply_haar_shift(spec, g))
        assert lhs == pytest.approx(rhs, abs=1e-10)

    def test_self_adjoint_part_needs_square_type(self):
        with pytest.raises(ValidationError):
            random_haar_shift(substream(26), 1, 2, 5).self_adjoint_part()


class TestWeightedNorm:
    """Dense weighted operator norms."""

    def test_two_leaf_projection(self):
        weight = MatrixWeight(np.array([[[4.0]], [[1.0]]]))
        assert weighted_norm(MartingaleSymbol.identity(1, 1), weight) == pytest.approx(1.25)

    def test_unweighted_sign_transform_is_unitary_on_mean_zero(self):
        weight = MatrixWeight.identity(2, 4)
        sigma = random_martingale_symbol(substream(21), weight, SymbolClass.SIGNS)
        assert weighted_norm(sigma, weight) == pytest.approx(1.0)

    def test_dense_budget(self):
        weight = MatrixWeight.identity(2, 4)
        with pytest.raises(DimensionTooLargeError):
            weighted_norm(MartingaleSymbol.identity(2, 4), weight, max_dense=16)

    def test_norm_scales_with_symbol(self):
        weight = random_a2_weight(27, 2, 3, 8.0)
        sigma = random_martingale_symbol(substream(28), weight, SymbolClass.GENERAL)
        factor = -2.0 + 1.5j
        assert weighted_norm(sigma.scaled(factor), weight) == pytest.approx(
            abs(factor) * weighted_norm(sigma, weight), rel=1e-10
        )


class TestLinearization:
    """Eigenprojected pairings against their weighted bounds."""

    def test_scalar_case_is_equality(self):
        weight = random_a2_weight(22, 1, 4, 8.0)
        f = _random_function(23, 1, 4)
        g = _random_function(24, 1, 4)
        check = linearization_check(f, g, weight)
        assert check.lhs == pytest.approx(check.rhs, rel=1e-10)

    def test_matrix_case_holds(self):
        weight = random_a2_weight(25, 3, 4, 8.0)
        f = _random_function(26, 3, 4)
        g = _random_function(27, 3, 4)
        assert linearization_check(f, g, weight).holds()

    def test_average_form_is_four_times_pairing(self):
        weight = random_a2_weight(28, 2, 3, 4.0)
        f = _random_function(29, 2, 3)
        g = _random_function(30, 2, 3)
        lhs = linearization_check(f, g, weight).lhs
        assert linearization_average_form(f, g, weight) == pytest.approx(4 * lhs, rel=1e-10)


class TestSliceBound:
    """The averaged bound for one slice of a shift."""

    def test_single_root_coefficient_is_sharp(self):
        spec = HaarShiftSpec(0, 0, {DyadicInterval.root(): np.ones((1, 1))})
        weight = MatrixWeight.identity(1, 1)
        f = GridFunction(np.array([1.0, 0.0]))
        g = GridFunction(np.array([0.0, 1.0]))
        check = slice_bound_check(spec, f, g, weight)
        assert check.lhs == pytest.approx(0.25)
        assert check.rhs == pytest.approx(0.25)

    def test_constants_give_zero(self):
        spec = random_haar_shift(substream(31), 1, 0, 3)
        weight = MatrixWeight.identity(1, 3)
        f = GridFunction.constant([1.0], 3)
        check = slice_bound_check(spec, f, f, weight)
        assert check.lhs == pytest.approx(0.0, abs=1e-12)
        assert check.rhs == pytest.approx(0.0, abs=1e-12)


if __name__ == "__main__":
    pytest.main([__file__])
