"""Maximize the key rate over α and P_enc, and run the figure sweeps."""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import partial
import logging
import math

from .channel_model import ProtocolParams, expected_counts, symmetric_statistics
from .const import (
    ASYMPTOTIC_TOLERANCE_SOFT_RANGE,
    DEFAULT_EFFICIENCY,
    DEFAULT_PACC_VARIANT,
    DEFAULT_TOLERANCE_RESOLUTION,
    FIG1_NOISE,
    FIG1_SIGNALS,
    FIG2_NOISE,
    FIG2_SIGNALS,
    FIG3_ALPHAS,
    FIG3_NOISE,
    FIG3_PENC,
    FIG3_SIGNALS,
    MIN_OPT_SIGNALS,
    MIN_TOLERANCE_RESOLUTION,
    OBJECTIVE_EFFECTIVE,
    OBJECTIVE_RAW,
    OBJECTIVES,
    OPT_RANGE_MAX,
    OPT_RANGE_MIN,
    OPT_REFINE_FACTOR,
    OPT_REFINE_HALF_WIDTH,
    OPT_REFINE_ROUNDS,
    OPT_STEP,
    PACC_VARIANTS,
    TOLERANCE_SCAN_MAX,
    TOLERANCE_SCAN_STEP,
)
from .exceptions import B92KeyRateError, InfeasibleRegionError, InvalidInputError
from .finite_key import KeyRateReport, SearchConfig, SecurityEpsilons, key_rate
from .helpers import clamp, float_grid

_LOGGER = logging.getLogger(__name__)

# Stand-in signal count for asymptotic runs; r depends only on the ratio n/N there.
ASYMPTOTIC_SIGNALS = 1.0


@dataclass(frozen=True, slots=True)
class OptimizerConfig:
    """Grid bounds, refinement schedule and rate accounting for the optimizer."""

    range_min: float = OPT_RANGE_MIN
    range_max: float = OPT_RANGE_MAX
    step: float = OPT_STEP
    refine_rounds: int = OPT_REFINE_ROUNDS
    refine_factor: int = OPT_REFINE_FACTOR
    refine_half_width: int = OPT_REFINE_HALF_WIDTH
    objective: str = OBJECTIVE_EFFECTIVE
    efficiency: float = DEFAULT_EFFICIENCY
    pacc_variant: str = DEFAULT_PACC_VARIANT
    keep_trace: bool = False

    def __post_init__(self) -> None:
        if not 0.0 < self.range_min < self.range_max < 1.0:
            raise InvalidInputError("optimizer range must satisfy 0 < min < max < 1")
        if self.step <= 0.0:
            raise InvalidInputError(f"optimizer step must be positive, got {self.step!r}")
        if self.objective not in OBJECTIVES:
            raise InvalidInputError(f"objective must be one of {OBJECTIVES}")
        if self.pacc_variant not in PACC_VARIANTS:
            raise InvalidInputError(f"pacc_variant must be one of {PACC_VARIANTS}")


@dataclass(frozen=True, slots=True)
class OptimizationResult:
    best_alpha: float
    best_penc: float
    best_report: KeyRateReport
    evaluations: int
    trace: tuple[tuple[float, float, float], ...] | None = None

    @property
    def best_value(self) -> float:
        return self.best_report.r_effective


@dataclass(frozen=True, slots=True)
class SweepRow:
    """One CSV row: inputs, the report (None on failure) and the failure reason."""

    q: float
    n_signals: float
    alpha: float | None
    penc: float | None
    report: KeyRateReport | None
    reason: str = ""


def objective_value(report: KeyRateReport, objective: str) -> float:
    return report.r_prime if objective == OBJECTIVE_RAW else report.r_effective


def evaluate_point(
    point: tuple[float, float],
    q: float,
    n_signals: float,
    eps: SecurityEpsilons,
    search: SearchConfig,
    cfg: OptimizerConfig,
    asymptotic: bool,
) -> KeyRateReport:
    """Return the key-rate report of the depolarizing channel at (α, P_enc)."""
    alpha, penc = point
    params = ProtocolParams(alpha=alpha, p_enc=penc, n_signals=n_signals)
    return key_rate(
        params,
        symmetric_statistics(q, alpha),
        expected_counts(params, q),
        eps,
        search,
        asymptotic,
        efficiency=cfg.efficiency,
        pacc_variant=cfg.pacc_variant,
    )


def _safe_evaluate(
    point: tuple[float, float],
    q: float,
    n_signals: float,
    eps: SecurityEpsilons,
    search: SearchConfig,
    cfg: OptimizerConfig,
    asymptotic: bool,
) -> KeyRateReport | str:
    try:
        return evaluate_point(point, q, n_signals, eps, search, cfg, asymptotic)
    except B92KeyRateError as err:
        return err.translation_key


class _Incumbent:
    """Evaluation cache plus deterministic argmax (ties: lower α, then higher P_enc)."""

    def __init__(
        self,
        q: float,
        n_signals: float,
        eps: SecurityEpsilons,
        search: SearchConfig,
        cfg: OptimizerConfig,
        asymptotic: bool,
    ) -> None:
        self._cfg = cfg
        self._jobs = search.jobs
        self._evaluate = partial(
            _safe_evaluate,
            q=q,
            n_signals=n_signals,
            eps=eps,
            search=replace(search, jobs=1) if search.jobs > 1 else search,
            cfg=cfg,
            asymptotic=asymptotic,
        )
        self.results: dict[tuple[float, float], KeyRateReport | str] = {}
        self.trace: list[tuple[float, float, float]] = []
        self.best: tuple[float, float] | None = None

    def _key(self, point: tuple[float, float]) -> tuple[float, float, float]:
        result = self.results[point]
        value = (
            -math.inf
            if isinstance(result, str)
            else objective_value(result, self._cfg.objective)
        )
        return (value, -point[0], point[1])

    def visit(self, points: Iterable[tuple[float, float]]) -> None:
        fresh = list(dict.fromkeys(p for p in points if p not in self.results))
        if not fresh:
            return
        if self._jobs > 1 and len(fresh) > 1:
            with ProcessPoolExecutor(max_workers=self._jobs) as executor:
                outcomes = list(executor.map(self._evaluate, fresh))
        else:
            outcomes = [self._evaluate(p) for p in fresh]
        for point, outcome in zip(fresh, outcomes, strict=True):
            self.results[point] = outcome
            self.trace.append((*point, self._key(point)[0]))
            if self.best is None or self._key(point) > self._key(self.best):
                self.best = point

    @property
    def best_point(self) -> tuple[float, float]:
        if self.best is None:
            raise InfeasibleRegionError("optimizer grid is empty")
        return self.best


def _neighbourhood(centre: float, step: float, cfg: OptimizerConfig) -> list[float]:
    """Return the refinement axis around centre, clipped to the search range."""
    offsets = range(-cfg.refine_half_width, cfg.refine_half_width + 1)
    return sorted(
        {round(clamp(centre + i * step, cfg.range_min, cfg.range_max), 12) for i in offsets}
    )


def optimize(
    q: float,
    n_signals: float,
    eps: SecurityEpsilons,
    search: SearchConfig,
    opt_cfg: OptimizerConfig,
    asymptotic: bool = False,
) -> OptimizationResult:
    """Grid search over (α, P_enc) followed by local refinement around the incumbent.

    Raises:
        InfeasibleRegionError: no grid point produced a key rate.

    """
    if not asymptotic and n_signals < MIN_OPT_SIGNALS:
        raise InvalidInputError(f"n must be ≥ {MIN_OPT_SIGNALS:g} to optimize, got {n_signals!r}")
    if not 0.0 <= q < 0.5:
        raise InvalidInputError(f"q must be in [0, 0.5), got {q!r}")

    incumbent = _Incumbent(q, n_signals, eps, search, opt_cfg, asymptotic)
    axis = float_grid(opt_cfg.range_min, opt_cfg.range_max, opt_cfg.step)
    incumbent.visit((a, p) for a in axis for p in axis)

    step = opt_cfg.step
    for round_index in range(opt_cfg.refine_rounds):
        step /= opt_cfg.refine_factor
        ca, cp = incumbent.best_point
        alphas = _neighbourhood(ca, step, opt_cfg)
        pencs = _neighbourhood(cp, step, opt_cfg)
        incumbent.visit((a, p) for a in alphas for p in pencs)
        _LOGGER.debug(
            "Refinement %d at q=%.4g: incumbent alpha=%.6g penc=%.6g",
            round_index + 1,
            q,
            *incumbent.best_point,
        )

    best_alpha, best_penc = incumbent.best_point
    best = incumbent.results[(best_alpha, best_penc)]
    if isinstance(best, str):
        raise InfeasibleRegionError(f"no grid point produced a key rate at q={q!r} ({best})")

    _LOGGER.info(
        "Optimum at q=%.4g N=%s: alpha=%.6g penc=%.6g r=%.6g",
        q,
        "asymptotic" if asymptotic else f"{n_signals:g}",
        best_alpha,
        best_penc,
        best.r_effective,
    )
    return OptimizationResult(
        best_alpha=best_alpha,
        best_penc=best_penc,
        best_report=best,
        evaluations=len(incumbent.results),
        trace=tuple(incumbent.trace) if opt_cfg.keep_trace else None,
    )


def sweep_alpha(
    q: float,
    penc: float,
    n_signals: float,
    alphas: Sequence[float],
    eps: SecurityEpsilons,
    search: SearchConfig,
    opt_cfg: OptimizerConfig,
    asymptotic: bool = False,
) -> list[SweepRow]:
    """Evaluate the key rate at fixed (q, P_enc, N) for each α, in order."""
    n_eval = ASYMPTOTIC_SIGNALS if asymptotic else n_signals
    rows: list[SweepRow] = []
    for alpha in alphas:
        n_out = math.inf if asymptotic else n_signals
        try:
            report = evaluate_point((alpha, penc), q, n_eval, eps, search, opt_cfg, asymptotic)
        except B92KeyRateError as err:
            _LOGGER.debug("Sweep point alpha=%.6g failed: %s", alpha, err)
            rows.append(SweepRow(q, n_out, alpha, penc, None, err.translation_key))
        else:
            rows.append(SweepRow(q, n_out, alpha, penc, report))
    return rows


def sweep_optimized(
    points: Iterable[tuple[float, float | None]],
    eps: SecurityEpsilons,
    search: SearchConfig,
    opt_cfg: OptimizerConfig,
) -> list[SweepRow]:
    """Optimize over (α, P_enc) at each (q, N); N = None means asymptotic."""
    rows: list[SweepRow] = []
    for q, n_signals in points:
        asymptotic = n_signals is None
        n_eval = ASYMPTOTIC_SIGNALS if n_signals is None else n_signals
        n_out = math.inf if n_signals is None else n_signals
        try:
            result = optimize(q, n_eval, eps, search, opt_cfg, asymptotic)
        except B92KeyRateError as err:
            _LOGGER.debug("Sweep point q=%.4g N=%s failed: %s", q, n_signals, err)
            rows.append(SweepRow(q, n_out, None, None, None, err.translation_key))
        else:
            rows.append(
                SweepRow(q, n_out, result.best_alpha, result.best_penc, result.best_report)
            )
    return rows


def run_preset(
    name: str,
    eps: SecurityEpsilons,
    search: SearchConfig,
    opt_cfg: OptimizerConfig,
) -> list[SweepRow]:
    """Run one of the built-in figure sweeps (`fig1`, `fig2`, `fig3`)."""
    if name == "fig1":
        return sweep_optimized(
            ((q, n) for q in FIG1_NOISE for n in FIG1_SIGNALS), eps, search, opt_cfg
        )
    if name == "fig2":
        series: list[float | None] = [*FIG2_SIGNALS, None]
        return sweep_optimized(
            ((q, n) for n in series for q in FIG2_NOISE), eps, search, opt_cfg
        )
    if name == "fig3":
        return [
            row
            for n in FIG3_SIGNALS
            for row in sweep_alpha(
                FIG3_NOISE, FIG3_PENC, n, FIG3_ALPHAS, eps, search, opt_cfg
            )
        ]
    raise InvalidInputError(f"unknown preset {name!r}")


def _is_positive(
    q: float,
    n_signals: float | None,
    eps: SecurityEpsilons,
    search: SearchConfig,
    opt_cfg: OptimizerConfig,
) -> bool:
    asymptotic = n_signals is None
    n_eval = ASYMPTOTIC_SIGNALS if n_signals is None else n_signals
    try:
        result = optimize(q, n_eval, eps, search, opt_cfg, asymptotic)
    except B92KeyRateError as err:
        _LOGGER.debug("Tolerance check at q=%.6g failed: %s", q, err)
        return False
    return objective_value(result.best_report, opt_cfg.objective) > 0.0


def noise_tolerance(
    n_signals: float | None,
    eps: SecurityEpsilons,
    search: SearchConfig,
    opt_cfg: OptimizerConfig,
    resolution: float = DEFAULT_TOLERANCE_RESOLUTION,
) -> float:
    """Return the largest q in [0, 0.2] with a positive optimized rate, to `resolution`.

    A coarse scan locates the sign change; bisection refines it assuming one
    change. With more than one change the scan result is returned instead.
    `n_signals=None` runs in asymptotic mode.
    """
    if resolution < MIN_TOLERANCE_RESOLUTION:
        raise InvalidInputError(
            f"resolution must be ≥ {MIN_TOLERANCE_RESOLUTION:g}, got {resolution!r}"
        )
    positive = partial(_is_positive, n_signals=n_signals, eps=eps, search=search, opt_cfg=opt_cfg)
    scan = float_grid(TOLERANCE_SCAN_STEP, TOLERANCE_SCAN_MAX, TOLERANCE_SCAN_STEP)
    signs = [positive(q) for q in scan]
    changes = sum(1 for a, b in zip(signs, signs[1:], strict=False) if a != b)
    positives = [q for q, ok in zip(scan, signs, strict=True) if ok]

    if not positives:
        tolerance = 0.0
    elif changes > 1 or positives[-1] == scan[-1]:
        if changes > 1:
            _LOGGER.warning("Rate changes sign %d times in q; returning scan result", changes)
        tolerance = positives[-1]
    else:
        lo = positives[-1]
        hi = round(lo + TOLERANCE_SCAN_STEP, 12)
        while hi - lo > resolution:
            mid = (lo + hi) / 2.0
            if positive(mid):
                lo = mid
            else:
                hi = mid
            _LOGGER.info("Tolerance bracket [%.6f, %.6f]", lo, hi)
        tolerance = lo

    if n_signals is None:
        low, high = ASYMPTOTIC_TOLERANCE_SOFT_RANGE
        if not low <= tolerance <= high:
            _LOGGER.warning(
                "Asymptotic noise tolerance %.4f lies outside [%.2f, %.2f]", tolerance, low, high
            )
    return tolerance
