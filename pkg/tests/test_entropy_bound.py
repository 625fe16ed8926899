"""Tests for the entropy lower bound."""

from __future__ import annotations

from hypothesis import given, settings, strategies as st
import numpy as np
import pytest

from b92_keyrate.attack_model import (
    AttackVectors,
    direct_overlaps,
    exact_conditional_entropy,
    g_vectors,
    identity_attack,
    induced_statistics,
)
from b92_keyrate.channel_model import ChannelStatistics, symmetric_statistics
from b92_keyrate.entropy_bound import (
    BoundArrays,
    LambdaForm,
    bound_surface,
    build_arrays,
    entropy_lower_bound,
    feasible_statistics,
    min_entropy_over_free_variable,
    minimize_free_variable,
)
from b92_keyrate.estimation import estimate_overlaps
from b92_keyrate.exceptions import InvalidInputError, NonPhysicalBoundError
from b92_keyrate.helpers import binary_entropy
from b92_keyrate.linalg_small import inner_product


def _true_arrays(attack: AttackVectors, alpha: float) -> BoundArrays | None:
    stats = induced_statistics(attack, alpha)
    _, re_e1e2 = direct_overlaps(attack)
    return build_arrays(stats, estimate_overlaps(stats, alpha), re_e1e2, alpha)


class TestBuildArrays:
    """Tests for build_arrays."""

    def test_matches_g_vectors(self, random_attacks: list[tuple[AttackVectors, float]]) -> None:
        """Test E and Λ equal the norms and overlaps of Eve's conditional states."""
        for attack, alpha in random_attacks:
            arrays = _true_arrays(attack, alpha)
            assert arrays is not None
            g00, g01, g10, g11 = g_vectors(attack, alpha)
            e0 = (g00.norm_squared(), g01.norm_squared())
            e1 = (g10.norm_squared(), g11.norm_squared())
            assert arrays.e0_arr == pytest.approx(e0, abs=1e-9)
            assert arrays.e1_arr == pytest.approx(e1, abs=1e-9)
            assert arrays.lambda_arr[0] == pytest.approx(inner_product(g00, g10).real, abs=1e-9)
            assert arrays.lambda_arr[1] == pytest.approx(inner_product(g01, g11).real, abs=1e-9)

    def test_infeasible_free_variable(self, noisy_stats: ChannelStatistics) -> None:
        """Test an out-of-range free variable gives None."""
        overlaps = estimate_overlaps(noisy_stats, 0.6)
        assert build_arrays(noisy_stats, overlaps, 0.5, 0.6) is None

    def test_non_physical_arrays(self) -> None:
        """Test |Λ| beyond Cauchy-Schwarz is refused by the difference form."""
        arrays = BoundArrays(
            e0_arr=(0.1, 0.1), e1_arr=(0.1, 0.1), lambda_arr=(0.5, 0.0), m_norm=0.4
        )
        with pytest.raises(NonPhysicalBoundError):
            entropy_lower_bound(arrays)


class TestSoundness:
    """The bound never exceeds the exact conditional entropy."""

    def test_random_attacks(self, random_attacks: list[tuple[AttackVectors, float]]) -> None:
        """Test bound ≤ S(A|E) at the true free variable."""
        for attack, alpha in random_attacks:
            arrays = _true_arrays(attack, alpha)
            assert arrays is not None
            exact = exact_conditional_entropy(attack, alpha)
            assert entropy_lower_bound(arrays) <= exact + 1e-9

    def test_minimum_below_exact(self, random_attacks: list[tuple[AttackVectors, float]]) -> None:
        """Test the minimum over the free variable is also below S(A|E)."""
        for attack, alpha in random_attacks[:40]:
            stats = induced_statistics(attack, alpha)
            exact = exact_conditional_entropy(attack, alpha)
            assert min_entropy_over_free_variable(stats, alpha) <= exact + 1e-9

    def test_printed_form_violates(self, random_attacks: list[tuple[AttackVectors, float]]) -> None:
        """Test the (E0+E1)² form overshoots the exact entropy on some attack."""
        overshoot = []
        for attack, alpha in random_attacks:
            arrays = _true_arrays(attack, alpha)
            assert arrays is not None
            bound = entropy_lower_bound(arrays, LambdaForm.PRINTED)
            overshoot.append(bound - exact_conditional_entropy(attack, alpha))
        assert max(overshoot) > 1e-6


class TestTightness:
    """The bound is exact for the noiseless channel."""

    @pytest.mark.parametrize("alpha", [0.2, 0.5, 0.6, 0.8])
    def test_identity(self, alpha: float) -> None:
        """Test bound = S(A|E) = 1 for the identity attack."""
        arrays = _true_arrays(identity_attack(), alpha)
        assert arrays is not None
        assert entropy_lower_bound(arrays) == pytest.approx(1.0, abs=1e-6)

    def test_noiseless_minimum(self, noiseless_stats: ChannelStatistics) -> None:
        """Test the noiseless minimum over the free variable is one bit."""
        assert min_entropy_over_free_variable(noiseless_stats, 0.6) == pytest.approx(1.0, abs=1e-9)


class TestMinimization:
    """Tests for the vectorized free-variable search."""

    def test_infeasible_row(self) -> None:
        """Test rows with no physical channel are +inf / nan."""
        stats = np.array(
            [
                symmetric_statistics(0.05, 0.6).as_array(),
                [0.0, 0.0, 0.0, 0.64, 0.36, 0.0],
            ]
        )
        values, argmins = minimize_free_variable(stats, 0.6)
        assert np.isfinite(values[0])
        assert values[1] == np.inf
        assert np.isnan(argmins[1])

    def test_zero_when_nothing_feasible(self) -> None:
        """Test the scalar wrapper reports 0 for infeasible statistics."""
        stats = ChannelStatistics(0.0, 0.0, 0.0, 0.64, 0.36, 0.0)
        assert min_entropy_over_free_variable(stats, 0.6) == 0.0

    def test_below_grid(self, noisy_stats: ChannelStatistics) -> None:
        """Test the refined minimum is at most every grid value."""
        row = noisy_stats.as_array()[None, :]
        grid = np.linspace(-0.05, 0.05, 101)[None, :]
        values, argmins = minimize_free_variable(row, 0.6)
        assert values[0] <= np.min(bound_surface(row, 0.6, grid)) + 1e-12
        assert -0.05 <= argmins[0] <= 0.05

    def test_finer_grid_not_higher(
        self, random_attacks: list[tuple[AttackVectors, float]]
    ) -> None:
        """Test doubling the grid never raises the minimum beyond refinement noise."""
        rows = np.stack([induced_statistics(a, 0.5).as_array() for a, _ in random_attacks[:20]])
        coarse, _ = minimize_free_variable(rows, 0.5, grid=33)
        fine, _ = minimize_free_variable(rows, 0.5, grid=65)
        assert np.all(fine <= coarse + 1e-7)

    def test_batch_independent(self, random_attacks: list[tuple[AttackVectors, float]]) -> None:
        """Test a row's result does not depend on the rest of the batch."""
        rows = np.stack([induced_statistics(a, 0.5).as_array() for a, _ in random_attacks[:12]])
        batch, _ = minimize_free_variable(rows, 0.5)
        for i in (0, 5, 11):
            alone, _ = minimize_free_variable(rows[i : i + 1], 0.5)
            assert alone[0] == pytest.approx(batch[i], abs=1e-15)

    def test_decreasing_in_noise(self) -> None:
        """Test the bound falls as depolarizing noise grows."""
        values = [
            min_entropy_over_free_variable(symmetric_statistics(q, 0.6), 0.6)
            for q in (0.0, 0.01, 0.03, 0.05, 0.08)
        ]
        assert all(a > b for a, b in zip(values, values[1:], strict=False))

    def test_grid_too_small(self, noisy_stats: ChannelStatistics) -> None:
        """Test fewer than three grid points is rejected."""
        with pytest.raises(InvalidInputError):
            minimize_free_variable(noisy_stats.as_array(), 0.6, grid=2)

    def test_feasible_statistics(self) -> None:
        """Test the feasibility mask agrees with the minimization."""
        stats = np.array(
            [
                symmetric_statistics(0.05, 0.6).as_array(),
                [0.0, 0.0, 0.0, 0.64, 0.36, 0.0],
            ]
        )
        assert feasible_statistics(stats, 0.6).tolist() == [True, False]


class TestMonotonicity:
    """The bound grows with the overlap of Eve's conditional states."""

    @settings(max_examples=60, deadline=None)
    @given(
        st.lists(st.floats(min_value=0.01, max_value=1.0), min_size=4, max_size=4),
        st.floats(min_value=0.0, max_value=1.0),
        st.floats(min_value=0.0, max_value=1.0),
    )
    def test_larger_lambda_never_lowers(self, norms: list[float], s: float, t: float) -> None:
        """Test raising Λ² at fixed E-arrays never lowers the bound."""
        e0_arr = (norms[0], norms[1])
        e1_arr = (norms[2], norms[3])
        limits = [np.sqrt(a * b) for a, b in zip(e0_arr, e1_arr, strict=True)]
        low, high = sorted((s, t))

        def bound(scale: float) -> float:
            arrays = BoundArrays(
                e0_arr=e0_arr,
                e1_arr=e1_arr,
                lambda_arr=(scale * limits[0], scale * limits[1]),
                m_norm=sum(norms),
            )
            return entropy_lower_bound(arrays)

        assert bound(high) >= bound(low) - 1e-12


class TestDepolarizingMinimum:
    """The depolarizing minimum sits on the edge of the free-variable range."""

    def test_closed_form(self) -> None:
        """Test the q=0.05, α=0.6 minimum against its closed form at Re⟨e1|e2⟩ = q."""
        q, alpha = 0.05, 0.6
        a2, b2 = alpha * alpha, 1.0 - alpha * alpha
        stats = symmetric_statistics(q, alpha)
        miss = 1.0 - stats.p0a
        m_norm = 2.0 * q + 2.0 * miss
        lambda0 = abs(b2 * q - a2 * q)
        lambda1 = abs(b2 * (1.0 - 2.0 * q - q) - a2 * q)
        expected = (2.0 * q / m_norm) * (1.0 - binary_entropy(0.5 + lambda0 / (4.0 * q))) + (
            2.0 * miss / m_norm
        ) * (1.0 - binary_entropy(0.5 + lambda1 / (4.0 * miss)))
        values, argmins = minimize_free_variable(stats.as_array()[None, :], alpha)
        assert values[0] == pytest.approx(expected, abs=1e-9)
        assert values[0] == pytest.approx(0.5582598, abs=1e-6)
        assert argmins[0] == pytest.approx(q, abs=1e-9)
