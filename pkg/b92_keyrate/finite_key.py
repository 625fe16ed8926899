"""Finite-size accounting: confidence intervals, worst-case entropy, leakage and key rate."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
import itertools
import logging
import math

import numpy as np
import numpy.typing as npt

from .channel_model import ChannelStatistics, ProtocolParams, SampleCounts, check_alpha
from .const import (
    BOUNDARY_BISECTION_STEPS,
    DEFAULT_EFFICIENCY,
    DEFAULT_EPS,
    DEFAULT_EPS_BAR,
    DEFAULT_EPS_EC,
    DEFAULT_EPS_PE,
    DEFAULT_FREE_VAR_GRID,
    DEFAULT_GRID_PER_AXIS,
    DEFAULT_JOBS,
    DEFAULT_PACC_VARIANT,
    DEFAULT_PROFILE,
    MAX_INFEASIBLE_FRACTION,
    MAX_QBER,
    MIN_PACC,
    MIN_SAMPLE_COUNT,
    NUM_STATISTICS,
    PACC_NORMALIZATION,
    PACC_VARIANTS,
    PROFILE_FAST,
    PROFILES,
    WARN_INFEASIBLE_FRACTION,
)
from .entropy_bound import LambdaForm, feasible_statistics, minimize_free_variable
from .exceptions import InfeasibleRegionError, InvalidInputError
from .helpers import binary_entropy, one_minus_root

_LOGGER = logging.getLogger(__name__)

type FloatArray = npt.NDArray[np.float64]


@dataclass(frozen=True, slots=True)
class SecurityEpsilons:
    """Security budget: ε, ε_EC, ε̄ and ε_PE with ε − ε_EC > ε̄ > ε_PE ≥ 0."""

    eps: float = DEFAULT_EPS
    eps_ec: float = DEFAULT_EPS_EC
    eps_bar: float = DEFAULT_EPS_BAR
    eps_pe: float = DEFAULT_EPS_PE

    def __post_init__(self) -> None:
        for name in ("eps", "eps_ec", "eps_bar", "eps_pe"):
            value = getattr(self, name)
            if not (math.isfinite(value) and 0.0 < value < 1.0):
                raise InvalidInputError(f"{name} must be in (0, 1), got {value!r}")
        if not self.eps - self.eps_ec > self.eps_bar:
            raise InvalidInputError("eps − eps_ec must exceed eps_bar")
        if not self.eps_bar > self.eps_pe:
            raise InvalidInputError("eps_bar must exceed eps_pe")


@dataclass(frozen=True, slots=True)
class SearchConfig:
    """How hard to look for the worst case inside the confidence box."""

    profile: str = DEFAULT_PROFILE
    grid_per_axis: int = DEFAULT_GRID_PER_AXIS
    free_var_grid: int = DEFAULT_FREE_VAR_GRID
    jobs: int = DEFAULT_JOBS
    lambda_form: LambdaForm = LambdaForm.DIFFERENCE

    def __post_init__(self) -> None:
        if self.profile not in PROFILES:
            raise InvalidInputError(f"profile must be one of {PROFILES}, got {self.profile!r}")
        if self.grid_per_axis < 2:
            raise InvalidInputError(f"grid_per_axis must be ≥ 2, got {self.grid_per_axis}")
        if self.free_var_grid < 3:
            raise InvalidInputError(f"free_var_grid must be ≥ 3, got {self.free_var_grid}")
        if self.jobs < 1:
            raise InvalidInputError(f"jobs must be ≥ 1, got {self.jobs}")


@dataclass(frozen=True, slots=True)
class WorstCaseDiagnostics:
    """Where the adversarial minimum was found and how much of the box was unphysical."""

    points: int
    infeasible: int
    xi_values: tuple[float, ...]
    worst_stats: ChannelStatistics | None
    optimal_free_var: float

    @property
    def infeasible_fraction(self) -> float:
        return self.infeasible / self.points if self.points else 0.0


@dataclass(frozen=True, slots=True)
class KeyRateReport:
    """Every intermediate and final quantity of one key-rate evaluation."""

    s_xi: float
    qber: float
    leak_per_bit: float
    delta_bits: float
    n_raw: float
    n_signals: float
    r_prime: float
    r_effective: float
    optimal_free_var: float
    infeasible_fraction: float
    asymptotic: bool = False
    worst_case: WorstCaseDiagnostics | None = field(default=None, compare=False)

    @property
    def positive(self) -> bool:
        return self.r_effective > 0.0


def xi(m: float, k: int, eps_pe: float) -> float:
    """Return the Hoeffding half-width √(ln(2/(1−(1−ε_PE)^(1/k))) / (2m))."""
    if not (math.isfinite(m) and m >= 1.0):
        raise InvalidInputError(f"sample count must be ≥ 1, got {m!r}")
    if k < 1:
        raise InvalidInputError(f"number of statistics must be ≥ 1, got {k!r}")
    if not 0.0 < eps_pe < 1.0:
        raise InvalidInputError(f"eps_pe must be in (0, 1), got {eps_pe!r}")
    return math.sqrt(math.log(2.0 / one_minus_root(eps_pe, k)) / (2.0 * m))


def xi_vector(counts: SampleCounts, eps_pe: float) -> FloatArray:
    """Return ξ for each of the six statistics, in STAT_FIELDS order.

    Statistics with fewer than one expected sample (zero noise) are treated as
    having one, which spans the whole unit interval.
    """
    return np.array(
        [xi(_sample_count(c), NUM_STATISTICS, eps_pe) for c in counts.statistic_counts()],
        dtype=float,
    )


def _sample_count(count: float) -> float:
    return max(float(count), MIN_SAMPLE_COUNT)


def perturbation_signs(search: SearchConfig) -> FloatArray:
    """Return unit offsets in [−1, 1]^6 to visit inside the confidence box.

    The fast profile takes the 64 corners plus the centre; the thorough
    profile takes a full grid of `grid_per_axis` points per axis.
    """
    if search.profile == PROFILE_FAST:
        corners = np.array(list(itertools.product((-1.0, 1.0), repeat=NUM_STATISTICS)))
        return np.vstack([np.zeros((1, NUM_STATISTICS)), corners])
    axis = np.linspace(-1.0, 1.0, search.grid_per_axis)
    mesh = np.meshgrid(*([axis] * NUM_STATISTICS), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def _minimize_points(
    points: FloatArray, alpha: float, search: SearchConfig
) -> tuple[FloatArray, FloatArray]:
    if search.jobs == 1 or points.shape[0] < 2 * search.jobs:
        return minimize_free_variable(points, alpha, search.free_var_grid, search.lambda_form)
    chunks = np.array_split(points, search.jobs)
    worker = partial(
        minimize_free_variable,
        alpha=alpha,
        grid=search.free_var_grid,
        form=search.lambda_form,
    )
    with ProcessPoolExecutor(max_workers=search.jobs) as executor:
        results = list(executor.map(worker, chunks))
    values = np.concatenate([r[0] for r in results])
    argmins = np.concatenate([r[1] for r in results])
    return values, argmins


def pull_to_boundary(
    centre: FloatArray, points: FloatArray, alpha: float, search: SearchConfig
) -> FloatArray:
    """Move each point toward `centre` until it admits a physical channel.

    Bisects t ∈ [0, 1] along centre + t·(point − centre) for the last feasible
    t; `centre` itself must be feasible. Each row is handled independently.
    """
    direction = points - centre
    lo = np.zeros(points.shape[0])
    hi = np.ones(points.shape[0])
    for _ in range(BOUNDARY_BISECTION_STEPS):
        mid = (lo + hi) / 2.0
        ok = feasible_statistics(
            centre + mid[:, None] * direction, alpha, search.free_var_grid, search.lambda_form
        )
        lo = np.where(ok, mid, lo)
        hi = np.where(ok, hi, mid)
    return centre + lo[:, None] * direction


def worst_case_entropy(
    stats: ChannelStatistics,
    counts: SampleCounts | None,
    alpha: float,
    eps_pe: float,
    search: SearchConfig,
) -> tuple[float, WorstCaseDiagnostics]:
    """Minimize the entropy bound over statistics within their confidence intervals.

    `counts=None` collapses the box to the observed point. Box points that
    admit no physical channel are pulled back along the ray from the observed
    statistics to the edge of the physical region, so the search covers the
    box intersected with that region.

    Raises:
        InfeasibleRegionError: the observed statistics admit no physical
            channel and every box point, or more than 99% of them, is
            infeasible too.

    """
    check_alpha(alpha)
    centre = stats.as_array()
    if counts is None:
        radii = np.zeros(NUM_STATISTICS)
        points = centre[None, :]
    else:
        radii = xi_vector(counts, eps_pe)
        points = np.clip(centre + perturbation_signs(search) * radii, 0.0, 1.0)

    values, argmins = _minimize_points(points, alpha, search)
    outside = ~np.isfinite(values)
    infeasible = int(np.count_nonzero(outside))
    total = int(points.shape[0])
    if counts is not None and infeasible:
        centre_value, _ = minimize_free_variable(
            centre[None, :], alpha, search.free_var_grid, search.lambda_form
        )
        if np.isfinite(centre_value[0]):
            pulled = pull_to_boundary(centre, points[outside], alpha, search)
            pulled_values, pulled_argmins = _minimize_points(pulled, alpha, search)
            points = points.copy()
            points[outside] = pulled
            values[outside] = pulled_values
            argmins[outside] = pulled_argmins
        else:
            _LOGGER.warning(
                "Observed statistics admit no physical channel at alpha=%.6g; "
                "infeasible box points are skipped",
                alpha,
            )
    _LOGGER.debug(
        "Worst-case search at alpha=%.6g: %d points, %d outside the physical region",
        alpha,
        total,
        infeasible,
    )

    remaining = int(np.count_nonzero(~np.isfinite(values)))
    fraction = remaining / total
    if remaining == total or fraction > MAX_INFEASIBLE_FRACTION:
        raise InfeasibleRegionError(
            f"confidence region contains no physical channel ({remaining}/{total} infeasible)"
        )
    if fraction >= WARN_INFEASIBLE_FRACTION:
        _LOGGER.warning(
            "%.0f%% of the confidence box is infeasible at alpha=%.6g", 100 * fraction, alpha
        )

    best = int(np.argmin(values))
    diagnostics = WorstCaseDiagnostics(
        points=total,
        infeasible=infeasible,
        xi_values=tuple(float(r) for r in radii),
        worst_stats=ChannelStatistics.from_array(points[best]),
        optimal_free_var=float(argmins[best]),
    )
    return float(values[best]), diagnostics


def qber_bound(
    stats: ChannelStatistics,
    counts: SampleCounts | None,
    k: int,
    eps_pe: float,
    variant: str = DEFAULT_PACC_VARIANT,
) -> float:
    """Return the worst-case QBER upper bound, clamped to [0, 0.5].

    `counts=None` drops the confidence terms. The `normalization` variant uses
    P_α0 in the acceptance probability instead of P_α1.
    """
    if variant not in PACC_VARIANTS:
        raise InvalidInputError(f"pacc_variant must be one of {PACC_VARIANTS}, got {variant!r}")
    if counts is None:
        x01 = xaa = x0a = xa0 = 0.0
    else:
        x01 = xi(_sample_count(counts.c01), k, eps_pe)
        xaa = xi(_sample_count(counts.ca_abar), k, eps_pe)
        x0a = xi(_sample_count(counts.c0a), k, eps_pe)
        xa0 = xi(_sample_count(counts.ca0), k, eps_pe)

    numerator = stats.p01 + x01 + stats.pa_abar + xaa
    partner = stats.pa0 if variant == PACC_NORMALIZATION else stats.pa1
    p_acc = numerator + 2.0 - (stats.p0a + x0a + partner + xa0)
    if p_acc <= MIN_PACC:
        raise InvalidInputError(f"acceptance probability {p_acc!r} is not positive")
    return min(max(numerator / p_acc, 0.0), MAX_QBER)


def leak_ec(qber: float, n: float, efficiency: float = DEFAULT_EFFICIENCY) -> float:
    """Return the error-correction leakage n · efficiency · h(qber) in bits."""
    if not 0.0 <= qber <= MAX_QBER:
        raise InvalidInputError(f"qber must be in [0, 0.5], got {qber!r}")
    if n < 0.0:
        raise InvalidInputError(f"raw key length must be ≥ 0, got {n!r}")
    if efficiency < 1.0:
        raise InvalidInputError(f"efficiency must be ≥ 1, got {efficiency!r}")
    return n * efficiency * binary_entropy(qber)


def delta_correction(n: float, eps: SecurityEpsilons) -> float:
    """Return the finite-size penalty Δ in bits (ε′_EC taken equal to ε_EC)."""
    if not (math.isfinite(n) and n >= 1.0):
        raise InvalidInputError(f"raw key length must be ≥ 1, got {n!r}")
    smoothing_gap = eps.eps - eps.eps_bar - eps.eps_ec
    ec_gap = eps.eps_bar - eps.eps_ec
    if smoothing_gap <= 0.0:
        raise InvalidInputError("eps − eps_bar − eps_ec must be positive")
    if ec_gap <= 0.0:
        raise InvalidInputError("eps_bar − eps_ec must be positive")
    return 2.0 * math.log2(1.0 / smoothing_gap) + 7.0 * math.sqrt(n * math.log2(2.0 / ec_gap))


def key_rate(
    params: ProtocolParams,
    stats: ChannelStatistics,
    counts: SampleCounts,
    eps: SecurityEpsilons,
    search: SearchConfig,
    asymptotic: bool = False,
    *,
    efficiency: float = DEFAULT_EFFICIENCY,
    pacc_variant: str = DEFAULT_PACC_VARIANT,
) -> KeyRateReport:
    """Assemble r′ = S_ξ − (leakEC + Δ)/n and r = r′·n/N.

    In asymptotic mode ξ and Δ vanish and leakage is taken per raw-key bit.
    """
    n = counts.c_k
    if not asymptotic and n < 1.0:
        raise InvalidInputError(f"expected raw key length {n!r} is below one bit")

    box = None if asymptotic else counts
    s_xi, diagnostics = worst_case_entropy(stats, box, params.alpha, eps.eps_pe, search)
    qber = qber_bound(stats, box, NUM_STATISTICS, eps.eps_pe, pacc_variant)

    if asymptotic:
        leak_per_bit = leak_ec(qber, 1.0, efficiency)
        delta = 0.0
        r_prime = s_xi - leak_per_bit
    else:
        leak_per_bit = leak_ec(qber, n, efficiency) / n
        delta = delta_correction(n, eps)
        r_prime = s_xi - leak_per_bit - delta / n
    r_effective = r_prime * n / params.n_signals

    _LOGGER.debug(
        "Key rate alpha=%.6g penc=%.6g N=%.6g: s_xi=%.9f qber=%.6f r'=%.6g r=%.6g",
        params.alpha,
        params.p_enc,
        params.n_signals,
        s_xi,
        qber,
        r_prime,
        r_effective,
    )
    return KeyRateReport(
        s_xi=s_xi,
        qber=qber,
        leak_per_bit=leak_per_bit,
        delta_bits=delta,
        n_raw=n,
        n_signals=params.n_signals,
        r_prime=r_prime,
        r_effective=r_effective,
        optimal_free_var=diagnostics.optimal_free_var,
        infeasible_fraction=diagnostics.infeasible_fraction,
        asymptotic=asymptotic,
        worst_case=diagnostics,
    )
