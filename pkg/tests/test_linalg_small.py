"""Tests for the small dense linear-algebra kernel."""

from __future__ import annotations

import math

from hypothesis import given, settings, strategies as st
import numpy as np
import pytest
from scipy.stats import unitary_group

from b92_keyrate.exceptions import InvalidInputError, NonHermitianError
from b92_keyrate.linalg_small import (
    ComplexVector,
    HermitianMatrix,
    hermitian_eigenvalues,
    inner_product,
    jacobi_eigh,
    von_neumann_entropy,
)


def _random_density(gen: np.random.Generator, dim: int, rank: int) -> HermitianMatrix:
    a = gen.normal(size=(dim, rank)) + 1j * gen.normal(size=(dim, rank))
    rho = a @ a.conj().T
    rho /= np.trace(rho).real
    return HermitianMatrix((rho + rho.conj().T) / 2.0)


class TestComplexVector:
    """Tests for ComplexVector."""

    def test_norm_and_inner_product(self) -> None:
        """Test ⟨a|b⟩ conjugates the left argument."""
        a = ComplexVector.of([1j, 0])
        b = ComplexVector.of([1, 1])
        assert inner_product(a, b) == pytest.approx(-1j)
        assert a.norm_squared() == pytest.approx(1.0)

    def test_arithmetic(self) -> None:
        """Test addition and scalar multiplication."""
        a = ComplexVector.basis(2, 0)
        b = ComplexVector.basis(2, 1)
        assert (2 * a - b).allclose(ComplexVector.of([2, -1]))

    def test_immutable(self) -> None:
        """Test entries cannot be written."""
        v = ComplexVector.zeros(3)
        with pytest.raises(ValueError):
            v.entries[0] = 1.0

    def test_dimension_mismatch(self) -> None:
        """Test mixing dimensions raises."""
        with pytest.raises(InvalidInputError):
            inner_product(ComplexVector.zeros(2), ComplexVector.zeros(3))

    def test_dimension_limit(self) -> None:
        """Test vectors beyond dimension 16 are rejected."""
        with pytest.raises(InvalidInputError):
            ComplexVector.zeros(17)


class TestHermitianMatrix:
    """Tests for HermitianMatrix."""

    def test_rejects_non_hermitian(self) -> None:
        """Test a non-Hermitian matrix raises."""
        with pytest.raises(NonHermitianError):
            HermitianMatrix(np.array([[0, 1], [0, 0]]))

    def test_projector_trace(self) -> None:
        """Test tr |v⟩⟨v| = ⟨v|v⟩."""
        v = ComplexVector.of([1, 1j, 2])
        assert HermitianMatrix.projector(v).trace() == pytest.approx(6.0)


class TestJacobi:
    """Tests for the Jacobi eigensolver."""

    def test_diagonal_input(self) -> None:
        """Test an already diagonal matrix is returned sorted."""
        values = hermitian_eigenvalues(HermitianMatrix.diagonal([0.1, 0.7, 0.2]))
        assert values == pytest.approx((0.7, 0.2, 0.1))

    def test_pauli_y(self) -> None:
        """Test a purely imaginary off-diagonal pivot."""
        y = HermitianMatrix(np.array([[0, -1j], [1j, 0]]))
        assert hermitian_eigenvalues(y) == pytest.approx((1.0, -1.0), abs=1e-13)

    @pytest.mark.parametrize("dim", [2, 4, 8, 16])
    def test_matches_reference(self, rng: np.random.Generator, dim: int) -> None:
        """Test eigenpairs against numpy's solver and reconstruction."""
        a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        m = HermitianMatrix((a + a.conj().T) / 2.0)
        values, vectors = jacobi_eigh(m)
        reference = np.sort(np.linalg.eigvalsh(m.entries))[::-1]
        assert values == pytest.approx(reference, abs=1e-10)
        rebuilt = vectors @ np.diag(values) @ vectors.conj().T
        assert np.allclose(rebuilt, m.entries, atol=1e-10)


class TestVonNeumannEntropy:
    """Tests for von_neumann_entropy."""

    def test_pure_state(self) -> None:
        """Test a pure state has zero entropy."""
        rho = HermitianMatrix.projector(ComplexVector.of([0.6, 0.8j]))
        assert von_neumann_entropy(rho) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("dim", [2, 4, 8])
    def test_maximally_mixed(self, dim: int) -> None:
        """Test I/d has entropy log2 d."""
        rho = HermitianMatrix.diagonal([1.0 / dim] * dim)
        assert von_neumann_entropy(rho) == pytest.approx(math.log2(dim), abs=1e-12)

    def test_trace_check(self) -> None:
        """Test a trace away from one raises."""
        with pytest.raises(InvalidInputError):
            von_neumann_entropy(HermitianMatrix.diagonal([0.5, 0.4]))

    def test_negative_eigenvalue(self) -> None:
        """Test a non-PSD matrix raises."""
        with pytest.raises(InvalidInputError):
            von_neumann_entropy(HermitianMatrix.diagonal([1.1, -0.1]))

    @settings(max_examples=25, deadline=None)
    @given(st.integers(min_value=0, max_value=2**32 - 1), st.sampled_from([2, 4, 8]))
    def test_unitary_invariance(self, seed: int, dim: int) -> None:
        """Test S(UρU†) = S(ρ)."""
        gen = np.random.Generator(np.random.Philox(seed))
        rho = _random_density(gen, dim, rank=max(1, dim // 2))
        u = unitary_group.rvs(dim, random_state=gen)
        assert von_neumann_entropy(rho.conjugated_by(u)) == pytest.approx(
            von_neumann_entropy(rho), abs=1e-9
        )
