"""Tests for overlap estimation."""

from __future__ import annotations

from hypothesis import given, strategies as st
import numpy as np
import pytest

from b92_keyrate.attack_model import (
    AttackVectors,
    depolarizing_attack,
    direct_overlaps,
    induced_statistics,
)
from b92_keyrate.channel_model import ChannelStatistics, symmetric_statistics
from b92_keyrate.estimation import (
    basis_factor,
    estimate_overlaps,
    feasible_rows,
    free_variable_interval,
    overlap_columns,
    resolve_e0e3,
)
from b92_keyrate.exceptions import DegenerateBasisError
from b92_keyrate.linalg_small import inner_product

_STAT = st.floats(min_value=0.0, max_value=1.0)


class TestEstimateOverlaps:
    """Tests for estimate_overlaps."""

    def test_round_trip(self, random_attacks: list[tuple[AttackVectors, float]]) -> None:
        """Test estimation recovers the true overlaps of random attacks."""
        for attack, alpha in random_attacks:
            truth, _ = direct_overlaps(attack)
            est = estimate_overlaps(induced_statistics(attack, alpha), alpha)
            assert est.re_e0e1 == pytest.approx(truth.re_e0e1, abs=1e-9)
            assert est.re_e2e3 == pytest.approx(truth.re_e2e3, abs=1e-9)
            assert est.re_e0e2 == pytest.approx(truth.re_e0e2, abs=1e-9)
            assert est.re_e1e3 == pytest.approx(truth.re_e1e3, abs=1e-9)
            assert est.sum_e0e3_e1e2 == pytest.approx(truth.sum_e0e3_e1e2, abs=1e-9)
            assert est.is_feasible()

    def test_depolarizing_zero_overlap(self) -> None:
        """Test Re⟨e0|e1⟩ = 0 for depolarizing statistics at α=0.6."""
        est = estimate_overlaps(symmetric_statistics(0.05, 0.6), 0.6)
        assert est.re_e0e1 == pytest.approx(0.0, abs=1e-12)
        assert est.sum_e0e3_e1e2 == pytest.approx(0.9, abs=1e-12)

    def test_noiseless(self) -> None:
        """Test the ideal channel estimates ⟨e0|e3⟩ = 1 and no cross terms."""
        est = estimate_overlaps(symmetric_statistics(0.0, 0.3), 0.3)
        assert est.sum_e0e3_e1e2 == pytest.approx(1.0, abs=1e-12)
        assert est.norms == (1.0, 0.0, 0.0, 1.0)

    @given(_STAT, _STAT, _STAT, _STAT, _STAT, _STAT, st.floats(0.0, 1.0))
    def test_affine(
        self, p01: float, p10: float, p0a: float, p1a: float, pa0: float, paa: float, t: float
    ) -> None:
        """Test estimates are affine in the statistics."""
        a = np.array([p01, p10, p0a, p1a, pa0, paa])
        b = symmetric_statistics(0.03, 0.5).as_array()
        mixed = overlap_columns(t * a + (1 - t) * b, 0.5)
        combined = t * overlap_columns(a, 0.5) + (1 - t) * overlap_columns(b, 0.5)
        assert mixed == pytest.approx(combined, abs=1e-9)

    def test_batch_matches_scalar(self, random_attacks: list[tuple[AttackVectors, float]]) -> None:
        """Test the batched form agrees row by row."""
        alpha = 0.45
        stats = [induced_statistics(attack, alpha) for attack, _ in random_attacks[:20]]
        batch = overlap_columns(np.stack([s.as_array() for s in stats]), alpha)
        for row, s in zip(batch, stats, strict=True):
            est = estimate_overlaps(s, alpha)
            assert row[0] == pytest.approx(est.re_e0e1)
            assert row[4] == pytest.approx(est.sum_e0e3_e1e2)


class TestBasisFactor:
    """Tests for basis_factor."""

    def test_value(self) -> None:
        """Test 2αβ at α=0.6."""
        assert basis_factor(0.6) == pytest.approx(0.96)

    def test_degenerate(self) -> None:
        """Test α so small that 2αβ vanishes."""
        with pytest.raises(DegenerateBasisError):
            basis_factor(1e-10)


class TestFeasibility:
    """Tests for Cauchy-Schwarz feasibility checks."""

    def test_infeasible_statistics(self) -> None:
        """Test statistics with no physical attack are flagged."""
        stats = ChannelStatistics(0.0, 0.0, 0.0, 0.64, 0.36, 0.0)
        est = estimate_overlaps(stats, 0.6)
        assert not est.is_feasible()
        rows = stats.as_array()[None, :]
        assert not feasible_rows(rows, overlap_columns(rows, 0.6))[0]

    def test_free_variable_interval(self, noisy_stats: ChannelStatistics) -> None:
        """Test the interval is ±√(P01·P10)."""
        interval = free_variable_interval(noisy_stats)
        assert interval.hi == pytest.approx(0.05)
        assert interval.width == pytest.approx(0.1)
        assert 0.0 in interval
        assert 0.06 not in interval

    def test_resolve_e0e3(self) -> None:
        """Test the true free variable resolves to the true ⟨e0|e3⟩."""
        attack = depolarizing_attack(0.05)
        truth, re_e1e2 = direct_overlaps(attack)
        resolved = resolve_e0e3(truth, re_e1e2)
        assert resolved == pytest.approx(inner_product(attack.e0, attack.e3).real)

    def test_resolve_out_of_range(self) -> None:
        """Test a free-variable value pushing ⟨e0|e3⟩ past Cauchy-Schwarz gives None."""
        est = estimate_overlaps(symmetric_statistics(0.05, 0.6), 0.6)
        assert resolve_e0e3(est, -0.2) is None
