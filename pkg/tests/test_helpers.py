"""Tests for helper functions."""

from __future__ import annotations

import math

from hypothesis import given, strategies as st
import numpy as np
import pytest

from b92_keyrate.helpers import (
    binary_entropy,
    binary_entropy_array,
    clamp,
    float_grid,
    format_float,
    linspace,
    one_minus_root,
)


class TestBinaryEntropy:
    """Tests for binary_entropy."""

    def test_endpoints(self) -> None:
        """Test h(0) = h(1) = 0."""
        assert binary_entropy(0.0) == 0.0
        assert binary_entropy(1.0) == 0.0

    def test_half(self) -> None:
        """Test h(1/2) = 1."""
        assert binary_entropy(0.5) == pytest.approx(1.0, abs=1e-15)

    def test_known_value(self) -> None:
        """Test h(0.11) against the closed form."""
        p = 0.11
        expected = -p * math.log2(p) - (1 - p) * math.log2(1 - p)
        assert binary_entropy(p) == pytest.approx(expected, rel=1e-12)

    def test_array_matches_scalar(self) -> None:
        """Test the vectorized form agrees elementwise."""
        ps = np.array([0.0, 0.01, 0.3, 0.5, 0.9, 1.0])
        out = binary_entropy_array(ps)
        assert out == pytest.approx([binary_entropy(float(p)) for p in ps], abs=1e-15)

    @given(st.floats(min_value=0.0, max_value=1.0))
    def test_symmetric(self, p: float) -> None:
        """Test h(p) = h(1−p)."""
        assert binary_entropy(p) == pytest.approx(binary_entropy(1.0 - p), abs=1e-12)


class TestOneMinusRoot:
    """Tests for one_minus_root."""

    def test_tiny_eps(self) -> None:
        """Test 1 − (1−ε)^(1/k) ≈ ε/k without cancellation."""
        assert one_minus_root(7e-10, 6) == pytest.approx(7e-10 / 6, rel=1e-8)

    def test_k_one(self) -> None:
        """Test k = 1 returns ε."""
        assert one_minus_root(0.25, 1) == pytest.approx(0.25, rel=1e-14)


class TestFormatting:
    """Tests for format_float."""

    def test_significant_digits(self) -> None:
        """Test ten significant digits."""
        assert format_float(1 / 3) == "0.3333333333"

    def test_none(self) -> None:
        """Test None renders empty."""
        assert format_float(None) == ""

    def test_large(self) -> None:
        """Test signal counts render compactly."""
        assert format_float(1e8) == "100000000"


class TestGrids:
    """Tests for grid construction."""

    def test_float_grid_inclusive(self) -> None:
        """Test the optimizer axis has 19 points from 0.05 to 0.95."""
        axis = float_grid(0.05, 0.95, 0.05)
        assert len(axis) == 19
        assert axis[0] == 0.05
        assert axis[-1] == 0.95
        assert axis[5] == 0.3

    def test_linspace_single(self) -> None:
        """Test one step returns the start."""
        assert linspace(0.1, 0.2, 1) == [0.1]

    def test_linspace_endpoints(self) -> None:
        """Test endpoints are included."""
        values = linspace(0.0, 1.0, 5)
        assert values == [0.0, 0.25, 0.5, 0.75, 1.0]

    def test_clamp(self) -> None:
        """Test clamp limits both sides."""
        assert clamp(-1.0, 0.0, 1.0) == 0.0
        assert clamp(2.0, 0.0, 1.0) == 1.0
        assert clamp(0.3, 0.0, 1.0) == 0.3
