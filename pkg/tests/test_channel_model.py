"""Tests for the channel model."""

from __future__ import annotations

import pytest

from b92_keyrate.channel_model import (
    STAT_FIELDS,
    ChannelStatistics,
    ProtocolParams,
    SampleCounts,
    counts_from_statistics,
    expected_conclusive_count,
    expected_counts,
    symmetric_statistics,
)
from b92_keyrate.exceptions import InvalidInputError

from .conftest import TEST_ALPHA, TEST_Q


class TestSymmetricStatistics:
    """Tests for symmetric_statistics."""

    def test_noiseless(self) -> None:
        """Test q=0 gives the ideal projection probabilities."""
        s = symmetric_statistics(0.0, TEST_ALPHA)
        assert s.p01 == 0.0
        assert s.p10 == 0.0
        assert s.pa_abar == 0.0
        assert s.p0a == pytest.approx(0.36)
        assert s.pa0 == pytest.approx(0.36)
        assert s.p1a == pytest.approx(0.64)

    def test_noisy(self, noisy_stats: ChannelStatistics) -> None:
        """Test q=0.05, α=0.6 values."""
        assert noisy_stats.p01 == TEST_Q
        assert noisy_stats.p0a == pytest.approx(0.05 + 0.9 * 0.36)
        assert noisy_stats.p1a == pytest.approx(0.05 + 0.9 * 0.64)
        assert noisy_stats.pa1 == pytest.approx(1.0 - noisy_stats.pa0)

    def test_noise_range(self) -> None:
        """Test q above 1/2 is rejected."""
        with pytest.raises(InvalidInputError):
            symmetric_statistics(0.6, TEST_ALPHA)


class TestChannelStatistics:
    """Tests for ChannelStatistics."""

    def test_from_mapping(self, noisy_stats: ChannelStatistics) -> None:
        """Test a mapping with all six fields."""
        assert ChannelStatistics.from_mapping(noisy_stats.as_dict()) == noisy_stats

    def test_missing_field(self) -> None:
        """Test a missing statistic is named."""
        with pytest.raises(InvalidInputError, match="pa_abar"):
            ChannelStatistics.from_mapping({name: 0.1 for name in STAT_FIELDS[:-1]})

    def test_out_of_range(self) -> None:
        """Test probabilities outside [0, 1] raise."""
        with pytest.raises(InvalidInputError):
            ChannelStatistics(1.2, 0.0, 0.0, 0.0, 0.0, 0.0)


class TestCounts:
    """Tests for expected sample counts."""

    def test_expected_counts(self, params: ProtocolParams) -> None:
        """Test each count against its formula."""
        counts = expected_counts(params, TEST_Q)
        n, pe, a2 = params.n_signals, params.p_enc, TEST_ALPHA**2
        assert counts.c01 == pytest.approx(pe * TEST_Q * n / 4)
        assert counts.c10 == pytest.approx((1 - pe) * TEST_Q * n / 2)
        assert counts.c0a == pytest.approx(pe * (TEST_Q + (1 - 2 * TEST_Q) * a2) * n / 4)
        assert counts.c1a == pytest.approx((1 - pe) * (TEST_Q + (1 - 2 * TEST_Q) * (1 - a2)) * n / 2)
        assert counts.ca_abar == pytest.approx(pe * TEST_Q * n / 4)
        assert counts.c_k == pytest.approx(pe * (TEST_Q + (1 - 2 * TEST_Q) * (1 - a2)) * n / 2)

    def test_general_channel_matches_symmetric(
        self, params: ProtocolParams, noisy_stats: ChannelStatistics
    ) -> None:
        """Test counts from statistics reproduce the depolarizing counts."""
        assert counts_from_statistics(params, noisy_stats) == expected_counts(params, TEST_Q)

    def test_conclusive_count_excess(self, params: ProtocolParams) -> None:
        """Test the summed-outcome count exceeds C_k by P_enc·q·N/2."""
        c_k = expected_counts(params, TEST_Q).c_k
        summed = expected_conclusive_count(params, TEST_Q)
        assert summed - c_k == pytest.approx(params.p_enc * TEST_Q * params.n_signals / 2)

    def test_conclusive_count_closed_form(self, params: ProtocolParams) -> None:
        """Test the summed count equals P_enc(2q + (1−2q)β²)N/2 on depolarizing statistics."""
        beta2 = 1.0 - params.alpha**2
        expected = params.p_enc * (2 * TEST_Q + (1 - 2 * TEST_Q) * beta2) * params.n_signals / 2
        assert expected_conclusive_count(params, TEST_Q) == pytest.approx(expected)

    def test_negative_count(self) -> None:
        """Test negative counts raise."""
        with pytest.raises(InvalidInputError):
            SampleCounts(-1.0, 0, 0, 0, 0, 0, 0)


class TestProtocolParams:
    """Tests for ProtocolParams."""

    def test_beta(self, params: ProtocolParams) -> None:
        """Test β = √(1−α²)."""
        assert params.beta == pytest.approx(0.8)

    @pytest.mark.parametrize(
        ("alpha", "penc", "n"), [(0.0, 0.5, 10), (1.0, 0.5, 10), (0.5, 1.0, 10), (0.5, 0.5, 0.5)]
    )
    def test_invalid(self, alpha: float, penc: float, n: float) -> None:
        """Test boundary values are rejected."""
        with pytest.raises(InvalidInputError):
            ProtocolParams(alpha=alpha, p_enc=penc, n_signals=n)
