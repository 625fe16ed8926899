"""Lower bound on S(A|E) from observable statistics and the free overlap Re⟨e1|e2⟩."""

from __future__ import annotations

from dataclasses import dataclass
from enum import StrEnum
import logging
import math

import numpy as np
import numpy.typing as npt

from .channel_model import ChannelStatistics
from .const import (
    CAUCHY_SCHWARZ_SLACK,
    DEFAULT_FREE_VAR_GRID,
    GOLDEN_SECTION_TOL,
    LAMBDA_CLAMP_TOL,
    LAMBDA_SLACK,
    ZERO_WEIGHT_TOL,
)
from .estimation import (
    EstimatedOverlaps,
    feasible_rows,
    overlap_columns,
    resolve_e0e3,
)
from .exceptions import InvalidInputError, NonPhysicalBoundError
from .helpers import binary_entropy_array

_LOGGER = logging.getLogger(__name__)

type FloatArray = npt.NDArray[np.float64]

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class LambdaForm(StrEnum):
    """Which λ_i expression to evaluate."""

    DIFFERENCE = "difference"
    # (E0+E1)² under the root; kept only to show that it fails the exact-entropy oracle
    PRINTED = "printed"


@dataclass(frozen=True, slots=True)
class BoundArrays:
    """Norms E0 = (⟨g0^0⟩, ⟨g0^1⟩), E1 = (⟨g1^0⟩, ⟨g1^1⟩) and cross terms Λ."""

    e0_arr: tuple[float, float]
    e1_arr: tuple[float, float]
    lambda_arr: tuple[float, float]
    m_norm: float


def _lambda_eigen(
    e0: FloatArray, e1: FloatArray, lam: FloatArray, form: LambdaForm
) -> FloatArray:
    weight = e0 + e1
    spread = e0 - e1 if form is LambdaForm.DIFFERENCE else weight
    with np.errstate(divide="ignore", invalid="ignore"):
        value = 0.5 + np.sqrt(spread * spread + 4.0 * lam * lam) / (2.0 * weight)
    return np.where(weight < ZERO_WEIGHT_TOL, 1.0, value)


def _weighted_entropy(
    e0: FloatArray, e1: FloatArray, eig: FloatArray, m_norm: FloatArray
) -> FloatArray:
    """Sum over the trailing axis of ((E0+E1)/M)·(h(E0/(E0+E1)) − h(λ))."""
    weight = e0 + e1
    active = (e0 > 0.0) & (e1 > 0.0) & (weight >= ZERO_WEIGHT_TOL)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(active, e0 / weight, 0.0)
        terms = binary_entropy_array(ratio) - binary_entropy_array(np.clip(eig, 0.5, 1.0))
        total = np.sum(np.where(active, weight * terms, 0.0), axis=-1) / m_norm
    total = np.where(m_norm < ZERO_WEIGHT_TOL, 0.0, total)
    return np.clip(total, 0.0, 1.0)


def build_arrays(
    stats: ChannelStatistics,
    overlaps: EstimatedOverlaps,
    re_e1e2: float,
    alpha: float,
) -> BoundArrays | None:
    """Assemble the bound arrays for one value of the free variable.

    Returns None when the point admits no physical attack: Re⟨e0|e3⟩ outside
    Cauchy-Schwarz, an observable overlap outside Cauchy-Schwarz, or
    |Λ_i| > √(E0_i·E1_i).
    """
    re_e0e3 = resolve_e0e3(overlaps, re_e1e2)
    if re_e0e3 is None or not overlaps.is_feasible():
        return None
    a2 = alpha * alpha
    b2 = 1.0 - a2
    ab = alpha * math.sqrt(b2)
    common = ab * (overlaps.re_e0e1 - overlaps.re_e1e3) - a2 * stats.p01
    e0_arr = (stats.p01, 1.0 - stats.p0a)
    e1_arr = (stats.pa_abar, 1.0 - stats.pa0)
    lambda_arr = (common + b2 * re_e1e2, common + b2 * re_e0e3)
    for lam, x0, x1 in zip(lambda_arr, e0_arr, e1_arr, strict=True):
        if abs(lam) > math.sqrt(max(x0 * x1, 0.0)) + LAMBDA_SLACK:
            return None
    return BoundArrays(
        e0_arr=e0_arr,
        e1_arr=e1_arr,
        lambda_arr=lambda_arr,
        m_norm=sum(e0_arr) + sum(e1_arr),
    )


def entropy_lower_bound(arrays: BoundArrays, form: LambdaForm = LambdaForm.DIFFERENCE) -> float:
    """Return Σ_i ((E0_i+E1_i)/M)·(h(E0_i/(E0_i+E1_i)) − h(λ_i)), clamped to [0, 1].

    Raises:
        NonPhysicalBoundError: λ_i > 1 + 1e-9 with the difference form.

    """
    e0 = np.asarray(arrays.e0_arr, dtype=float)
    e1 = np.asarray(arrays.e1_arr, dtype=float)
    lam = np.asarray(arrays.lambda_arr, dtype=float)
    eig = _lambda_eigen(e0, e1, lam, form)
    if form is LambdaForm.DIFFERENCE and float(eig.max()) > 1.0 + LAMBDA_CLAMP_TOL:
        raise NonPhysicalBoundError(
            f"non-physical bound arrays (λ = {eig.max():.12f}); check feasibility filtering"
        )
    return float(_weighted_entropy(e0, e1, np.minimum(eig, 1.0), np.float64(arrays.m_norm)))


def bound_surface(
    stats: FloatArray,
    alpha: float,
    free: FloatArray,
    form: LambdaForm = LambdaForm.DIFFERENCE,
) -> FloatArray:
    """Evaluate the bound for many statistics rows and free-variable values at once.

    Args:
        stats: shape (P, 6) statistics rows.
        alpha: state-overlap parameter.
        free: shape (P, G) values of Re⟨e1|e2⟩ per row.
        form: λ expression.

    Returns:
        Shape (P, G) bound values, +inf where the point is infeasible.

    """
    stats = np.asarray(stats, dtype=float)
    overlaps = overlap_columns(stats, alpha)
    rows_ok = feasible_rows(stats, overlaps)[:, None]

    a2 = alpha * alpha
    b2 = 1.0 - a2
    ab = alpha * math.sqrt(b2)
    col = stats.T[:, :, None]
    p01, p10, p0a, _, pa0, pa_abar = col
    re01, _, _, re13, total = overlaps.T[:, :, None]

    re03 = total - free
    corr_ok = np.abs(re03) <= np.sqrt(np.clip((1.0 - p01) * (1.0 - p10), 0.0, None)) + (
        CAUCHY_SCHWARZ_SLACK
    )
    common = ab * (re01 - re13) - a2 * p01
    shape = np.broadcast_shapes(free.shape, p01.shape)
    e0 = np.broadcast_to(np.stack([p01, 1.0 - p0a], axis=-1), (*shape, 2))
    e1 = np.broadcast_to(np.stack([pa_abar, 1.0 - pa0], axis=-1), (*shape, 2))
    lam = np.stack([common + b2 * free, common + b2 * re03], axis=-1)
    m_norm = np.sum(e0 + e1, axis=-1)

    lam_ok = np.all(np.abs(lam) <= np.sqrt(np.clip(e0 * e1, 0.0, None)) + LAMBDA_SLACK, axis=-1)
    eig = _lambda_eigen(e0, e1, lam, form)
    if form is LambdaForm.DIFFERENCE:
        eig_ok = np.all(eig <= 1.0 + LAMBDA_CLAMP_TOL, axis=-1)
    else:
        eig_ok = np.ones(shape, dtype=bool)
    values = _weighted_entropy(e0, e1, np.minimum(eig, 1.0), m_norm)
    feasible = rows_ok & corr_ok & lam_ok & eig_ok
    return np.where(feasible, values, np.inf)


def _golden_section(
    stats: FloatArray,
    alpha: float,
    lo: FloatArray,
    hi: FloatArray,
    form: LambdaForm,
    max_width: float,
) -> tuple[FloatArray, FloatArray]:
    """Golden-section search on every row's bracket [lo, hi]; returns best value and argmin.

    The step count depends only on `max_width`, so a row's result does not
    depend on which other rows share the batch.
    """
    best = np.full(lo.shape, np.inf)
    best_x = (lo + hi) / 2.0
    if max_width <= GOLDEN_SECTION_TOL:
        return best, best_x
    steps = math.ceil(math.log(GOLDEN_SECTION_TOL / max_width) / math.log(_INV_PHI))

    def evaluate(x: FloatArray) -> FloatArray:
        return bound_surface(stats, alpha, x[:, None], form)[:, 0]

    a, b = lo.copy(), hi.copy()
    for _ in range(steps):
        c = b - _INV_PHI * (b - a)
        d = a + _INV_PHI * (b - a)
        fc, fd = evaluate(c), evaluate(d)
        for x, fx in ((c, fc), (d, fd)):
            better = fx < best
            best = np.where(better, fx, best)
            best_x = np.where(better, x, best_x)
        keep_left = fc <= fd
        b = np.where(keep_left, d, b)
        a = np.where(keep_left, a, c)
    mid = (a + b) / 2.0
    fm = evaluate(mid)
    better = fm < best
    return np.where(better, fm, best), np.where(better, mid, best_x)


def minimize_free_variable(
    stats: FloatArray,
    alpha: float,
    grid: int = DEFAULT_FREE_VAR_GRID,
    form: LambdaForm = LambdaForm.DIFFERENCE,
) -> tuple[FloatArray, FloatArray]:
    """Minimize the bound over Re⟨e1|e2⟩ for each statistics row.

    A uniform grid over [−√(P01·P10), √(P01·P10)] locates the minimum, then a
    golden-section search refines it inside the neighbouring grid cells.

    Returns:
        (values, argmins) of shape (P,); rows with no feasible point get +inf
        and nan.

    """
    if grid < 3:
        raise InvalidInputError(f"free-variable grid must be ≥ 3, got {grid}")
    stats = np.atleast_2d(np.asarray(stats, dtype=float))
    half = np.sqrt(np.clip(stats[:, 0] * stats[:, 1], 0.0, None))
    t = np.linspace(-1.0, 1.0, grid)
    points = half[:, None] * t[None, :]
    values = bound_surface(stats, alpha, points, form)

    idx = np.argmin(values, axis=1)
    rows = np.arange(stats.shape[0])
    grid_best = values[rows, idx]
    grid_x = points[rows, idx]
    lo = points[rows, np.maximum(idx - 1, 0)]
    hi = points[rows, np.minimum(idx + 1, grid - 1)]

    # two grid cells of width 2·√(P01·P10)/(grid−1) ≤ 2/(grid−1)
    refined, refined_x = _golden_section(stats, alpha, lo, hi, form, 4.0 / (grid - 1))
    use_refined = refined < grid_best
    best = np.where(use_refined, refined, grid_best)
    best_x = np.where(use_refined, refined_x, grid_x)
    best_x = np.where(np.isfinite(best), best_x, np.nan)
    return best, best_x


def feasible_statistics(
    stats: FloatArray,
    alpha: float,
    grid: int = DEFAULT_FREE_VAR_GRID,
    form: LambdaForm = LambdaForm.DIFFERENCE,
) -> npt.NDArray[np.bool_]:
    """Return which statistics rows admit a physical attack at some free-variable grid value."""
    stats = np.atleast_2d(np.asarray(stats, dtype=float))
    half = np.sqrt(np.clip(stats[:, 0] * stats[:, 1], 0.0, None))
    points = half[:, None] * np.linspace(-1.0, 1.0, grid)[None, :]
    return np.any(np.isfinite(bound_surface(stats, alpha, points, form)), axis=1)


def min_entropy_over_free_variable(
    stats: ChannelStatistics,
    alpha: float,
    grid: int = DEFAULT_FREE_VAR_GRID,
    form: LambdaForm = LambdaForm.DIFFERENCE,
) -> float:
    """Return the worst-case bound for exactly known statistics (0 if nothing is feasible)."""
    values, _ = minimize_free_variable(stats.as_array()[None, :], alpha, grid, form)
    value = float(values[0])
    if not math.isfinite(value):
        _LOGGER.debug("No feasible free-variable value for %s", stats)
        return 0.0
    return value
