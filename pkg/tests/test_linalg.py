#!/usr/bin/env python3
"""
Tests for the Hermitian matrix layer.
"""

import os
import sys

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

# Add src to path for testing
sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from haarlab.core.exceptions import NotPositiveDefiniteError, ShapeMismatchError, ValidationError
from haarlab.core.linalg import (
    HermMatrix,
    HpdMatrix,
    congruence,
    eigh_descending,
    herm_power,
    inverse,
    is_psd,
    op_norm,
    random_hpd,
    random_unitary,
    stack_check_hpd,
    stack_power,
)
from haarlab.core.rng import substream


class TestHermMatrix:
    """Construction and validation of Hermitian matrices."""

    def test_accepts_hermitian(self):
        m = HermMatrix(np.array([[1.0, 2j], [-2j, 3.0]]))
        assert m.dim == 2
        assert m.entries.dtype == np.complex128

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValidationError):
            HermMatrix(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_tolerates_rounding_asymmetry(self):
        m = HermMatrix(np.array([[1.0, 1.0 + 1e-14], [1.0, 1.0]]))
        np.testing.assert_array_equal(m.entries, m.entries.conj().T)

    def test_rejects_non_square(self):
        with pytest.raises(ShapeMismatchError):
            HermMatrix(np.ones((2, 3)))

    def test_rejects_nan(self):
        with pytest.raises(ValidationError):
            HermMatrix(np.array([[np.nan]]))

    def test_entries_are_read_only(self):
        m = HermMatrix(np.eye(2))
        with pytest.raises(ValueError):
            m.entries[0, 0] = 5.0

    def test_arithmetic(self):
        a = HermMatrix.diag([1.0, 2.0])
        b = HermMatrix.identity(2)
        np.testing.assert_allclose((a + b).entries, np.diag([2.0, 3.0]))
        np.testing.assert_allclose((a - b).entries, np.diag([0.0, 1.0]))
        np.testing.assert_allclose((2 * a).entries, np.diag([2.0, 4.0]))

    def test_eigenvalues_descending(self):
        m = HermMatrix.diag([1.0, 3.0, 2.0])
        np.testing.assert_allclose(m.eigenvalues(), [3.0, 2.0, 1.0])


class TestHpdMatrix:
    """Positive definite matrices and their functional calculus."""

    def test_rejects_semidefinite(self):
        with pytest.raises(NotPositiveDefiniteError):
            HpdMatrix(np.array([[1.0, 1.0], [1.0, 1.0]]))

    def test_rejects_negative(self):
        with pytest.raises(NotPositiveDefiniteError):
            HpdMatrix(-np.eye(2))

    def test_sqrt_squares_back(self):
        a = random_hpd(substream(1), 3)
        root = a.sqrt().entries
        np.testing.assert_allclose(root @ root, a.entries, atol=1e-12)

    def test_inverse(self):
        a = random_hpd(substream(2), 4)
        np.testing.assert_allclose(a.inverse().entries @ a.entries, np.eye(4), atol=1e-10)

    def test_inv_sqrt(self):
        a = HpdMatrix(np.diag([4.0, 9.0]))
        np.testing.assert_allclose(a.inv_sqrt().entries, np.diag([0.5, 1 / 3]))

    def test_condition_number(self):
        assert HpdMatrix(np.diag([1.0, 8.0])).condition_number() == pytest.approx(8.0)

    def test_eigenvectors_match_eigenvalues(self):
        a = random_hpd(substream(3), 3)
        vecs = a.eigenvectors
        np.testing.assert_allclose(
            vecs.conj().T @ a.entries @ vecs, np.diag(a.eigenvalues()), atol=1e-12
        )


class TestHelpers:
    """Free functions on matrices and stacks."""

    def test_op_norm(self):
        assert op_norm(np.array([[3.0, 0.0], [0.0, -5.0]])) == pytest.approx(5.0)

    def test_is_psd(self):
        assert is_psd(np.array([[1.0, 1.0], [1.0, 1.0]]))
        assert not is_psd(np.diag([1.0, -0.1]))

    def test_congruence(self):
        a = HermMatrix.identity(2)
        b = HpdMatrix(np.diag([4.0, 1.0]))
        np.testing.assert_allclose(congruence(a, b).entries, np.diag([4.0, 1.0]))

    def test_congruence_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            congruence(np.eye(3), HpdMatrix(np.eye(2)))

    def test_eigh_descending(self):
        values, vectors = eigh_descending(np.diag([1.0, 2.0]))
        np.testing.assert_allclose(values, [2.0, 1.0])
        assert abs(vectors[1, 0]) == pytest.approx(1.0)

    def test_random_unitary(self):
        u = random_unitary(substream(4), 5)
        np.testing.assert_allclose(u.conj().T @ u, np.eye(5), atol=1e-12)

    def test_random_hpd_spread(self):
        a = random_hpd(substream(5), 4, log_spread=0.5)
        values = a.eigenvalues()
        assert values.max() <= np.exp(0.5) + 1e-12
        assert values.min() >= np.exp(-0.5) - 1e-12

    def test_stack_power_matches_single(self):
        a = random_hpd(substream(6), 3)
        stack = np.stack([a.entries, a.entries])
        powered = stack_power(stack, -0.5)
        np.testing.assert_allclose(powered[1], a.inv_sqrt().entries, atol=1e-12)

    def test_stack_check_hpd(self):
        stack_check_hpd(np.stack([np.eye(2), 2 * np.eye(2)]))
        with pytest.raises(NotPositiveDefiniteError):
            stack_check_hpd(np.stack([np.eye(2), np.diag([1.0, 0.0])]))


MAX_DIM = 4


@st.composite
def hpd_matrices(draw):
    """HPD matrices with eigenvalues in [1e-2, 1e2] in a random unitary frame."""
    dim = draw(st.integers(min_value=1, max_value=MAX_DIM))
    values = draw(
        arrays(np.float64, (dim,), elements=st.floats(min_value=1e-2, max_value=1e2))
    )
    frame = random_unitary(substream(draw(st.integers(0, 2**32))), dim)
    return (frame * values) @ frame.conj().T


class TestHermitianProperties:
    """Algebraic identities on random HPD matrices."""

    @seed(1)
    @settings(max_examples=50, deadline=None)
    @given(a=hpd_matrices())
    def test_powers_compose(self, a):
        root = herm_power(a, 0.5).entries
        np.testing.assert_allclose(root @ root, a, atol=1e-9 * op_norm(a))
        np.testing.assert_allclose(inverse(a).entries @ a, np.eye(a.shape[0]), atol=1e-8)

    @seed(1)
    @settings(max_examples=50, deadline=None)
    @given(a=hpd_matrices(), b=hpd_matrices())
    def test_congruence_is_positive(self, a, b):
        if a.shape != b.shape:
            b = np.eye(a.shape[0])
        assert is_psd(congruence(a, b))
        assert op_norm(congruence(np.eye(a.shape[0]), b)) == pytest.approx(op_norm(b))


if __name__ == "__main__":
    pytest.main([__file__])
