"""Recover Eve's ancilla overlaps from mismatched-basis statistics."""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
import numpy.typing as npt

from .channel_model import ChannelStatistics, check_alpha
from .const import BASIS_SINGULARITY_TOL, CAUCHY_SCHWARZ_SLACK
from .exceptions import DegenerateBasisError

type FloatArray = npt.NDArray[np.float64]

# Column order of overlap arrays returned by overlap_columns.
OVERLAP_FIELDS = ("re_e0e1", "re_e2e3", "re_e0e2", "re_e1e3", "sum_e0e3_e1e2")


@dataclass(frozen=True, slots=True)
class EstimatedOverlaps:
    """Real parts of the ancilla overlaps implied by the observed statistics.

    `norms` holds ⟨e_i|e_i⟩ for i = 0..3, i.e. (P00, P01, P10, P11).
    """

    re_e0e1: float
    re_e2e3: float
    re_e0e2: float
    re_e1e3: float
    sum_e0e3_e1e2: float
    norms: tuple[float, float, float, float]

    def is_feasible(self, slack: float = CAUCHY_SCHWARZ_SLACK) -> bool:
        """Return True when every estimated overlap obeys Cauchy-Schwarz within slack."""
        n0, n1, n2, n3 = self.norms
        return (
            abs(self.re_e0e1) <= math.sqrt(n0 * n1) + slack
            and abs(self.re_e2e3) <= math.sqrt(n2 * n3) + slack
            and abs(self.re_e0e2) <= math.sqrt(n0 * n2) + slack
            and abs(self.re_e1e3) <= math.sqrt(n1 * n3) + slack
        )


@dataclass(frozen=True, slots=True)
class FreeVariableInterval:
    """Cauchy-Schwarz interval for the unobservable Re⟨e1|e2⟩."""

    lo: float
    hi: float

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def __contains__(self, value: float) -> bool:
        return self.lo <= value <= self.hi


def basis_factor(alpha: float) -> float:
    """Return 2αβ, raising when the mismatched-basis identities become singular."""
    check_alpha(alpha)
    two_ab = 2.0 * alpha * math.sqrt(1.0 - alpha * alpha)
    if two_ab < BASIS_SINGULARITY_TOL:
        raise DegenerateBasisError(f"degenerate basis: 2αβ = {two_ab:.3e} at alpha={alpha!r}")
    return two_ab


def overlap_columns(stats: FloatArray, alpha: float) -> FloatArray:
    """Estimate overlaps for a batch of statistics.

    Args:
        stats: array of shape (..., 6) in `STAT_FIELDS` column order.
        alpha: state-overlap parameter.

    Returns:
        Array of shape (..., 5) in `OVERLAP_FIELDS` column order. Values are
        not clamped; infeasible rows are detected by `feasible_rows`.

    """
    two_ab = basis_factor(alpha)
    ab = two_ab / 2.0
    a2 = alpha * alpha
    b2 = 1.0 - a2
    p01, p10, p0a, p1a, pa0, pa_abar = np.moveaxis(np.asarray(stats, dtype=float), -1, 0)
    p00 = 1.0 - p01
    p11 = 1.0 - p10
    pa1 = 1.0 - pa0

    re01 = (p0a - a2 * p00 - b2 * p01) / two_ab
    re23 = (p1a - a2 * p10 - b2 * p11) / two_ab
    re02 = (pa0 - a2 * p00 - b2 * p10) / two_ab
    re13 = (pa1 - a2 * p01 - b2 * p11) / two_ab
    total = (
        a2 * b2 * (p00 + p11)
        + b2 * b2 * p10
        + a2 * a2 * p01
        + 2.0 * a2 * ab * (re13 - re01)
        + 2.0 * ab * b2 * (re02 - re23)
        - pa_abar
    ) / (2.0 * a2 * b2)
    return np.stack([re01, re23, re02, re13, total], axis=-1)


def feasible_rows(stats: FloatArray, overlaps: FloatArray) -> npt.NDArray[np.bool_]:
    """Return which rows have all four observable overlaps inside Cauchy-Schwarz."""
    p01, p10 = stats[..., 0], stats[..., 1]
    p00, p11 = 1.0 - p01, 1.0 - p10
    bounds = np.stack(
        [
            np.sqrt(np.clip(p00 * p01, 0.0, None)),
            np.sqrt(np.clip(p10 * p11, 0.0, None)),
            np.sqrt(np.clip(p00 * p10, 0.0, None)),
            np.sqrt(np.clip(p01 * p11, 0.0, None)),
        ],
        axis=-1,
    )
    return np.all(np.abs(overlaps[..., :4]) <= bounds + CAUCHY_SCHWARZ_SLACK, axis=-1)


def estimate_overlaps(stats: ChannelStatistics, alpha: float) -> EstimatedOverlaps:
    """Estimate Re⟨e_i|e_j⟩ and Re(⟨e0|e3⟩+⟨e1|e2⟩) from observed statistics."""
    re01, re23, re02, re13, total = (
        float(v) for v in overlap_columns(stats.as_array(), alpha)
    )
    return EstimatedOverlaps(
        re_e0e1=re01,
        re_e2e3=re23,
        re_e0e2=re02,
        re_e1e3=re13,
        sum_e0e3_e1e2=total,
        norms=(stats.p00, stats.p01, stats.p10, stats.p11),
    )


def free_variable_interval(stats: ChannelStatistics) -> FreeVariableInterval:
    """Return [−√(P01·P10), +√(P01·P10)]."""
    half = math.sqrt(stats.p01 * stats.p10)
    return FreeVariableInterval(lo=-half, hi=half)


def resolve_e0e3(overlaps: EstimatedOverlaps, re_e1e2: float) -> float | None:
    """Return Re⟨e0|e3⟩ given a value of the free variable, or None if unphysical."""
    re_e0e3 = overlaps.sum_e0e3_e1e2 - re_e1e2
    n0, _, _, n3 = overlaps.norms
    if abs(re_e0e3) > math.sqrt(n0 * n3) + CAUCHY_SCHWARZ_SLACK:
        return None
    return re_e0e3
