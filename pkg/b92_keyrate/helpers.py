"""Helper functions for the key-rate toolkit."""

from __future__ import annotations

import math

import numpy as np
import numpy.typing as npt
from scipy.special import entr

from .const import SIGNIFICANT_DIGITS

LN2 = math.log(2.0)


def binary_entropy(p: float) -> float:
    """Return h(p) in bits; h(0) = h(1) = 0."""
    return float(binary_entropy_array(np.asarray(p, dtype=float)))


def binary_entropy_array(p: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    """Elementwise binary entropy in bits, with 0·log 0 taken as 0."""
    p = np.clip(p, 0.0, 1.0)
    return (entr(p) + entr(1.0 - p)) / LN2


def one_minus_root(eps: float, k: int) -> float:
    """Return 1 − (1 − eps)^(1/k) without cancellation for tiny eps."""
    return -math.expm1(math.log1p(-eps) / k)


def format_float(value: float | None) -> str:
    """Format with a fixed number of significant digits; None becomes empty."""
    if value is None:
        return ""
    return f"{value:.{SIGNIFICANT_DIGITS}g}"


def float_grid(start: float, stop: float, step: float) -> list[float]:
    """Return points from start to stop (inclusive) spaced by step.

    Points are rounded to 12 decimals so that repeated refinements produce
    bit-identical grids.
    """
    count = round((stop - start) / step)
    return [round(start + i * step, 12) for i in range(count + 1)]


def linspace(start: float, stop: float, steps: int) -> list[float]:
    """Return `steps` equally spaced points, endpoints included."""
    if steps == 1:
        return [start]
    return [float(v) for v in np.linspace(start, stop, steps)]


def clamp(value: float, lo: float, hi: float) -> float:
    """Clamp value into [lo, hi]."""
    return min(max(value, lo), hi)
