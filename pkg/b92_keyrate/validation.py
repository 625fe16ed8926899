"""Oracle suites: analytic formulas checked against exact linear algebra on random attacks."""

from __future__ import annotations

from collections.abc import Callable, Iterator
from dataclasses import dataclass, field
from functools import cached_property
import logging
import math

import numpy as np

from .attack_model import (
    AttackVectors,
    depolarizing_attack,
    direct_overlaps,
    exact_conditional_entropy,
    g_vectors,
    identity_attack,
    induced_statistics,
    random_attack,
)
from .channel_model import ChannelStatistics
from .const import (
    DEFAULT_SEED,
    DEFAULT_TRIALS,
    OPT_RANGE_MAX,
    OPT_RANGE_MIN,
    ORACLE_TOL,
    TIGHTNESS_TOL,
    UNITARITY_TOL,
)
from .entropy_bound import BoundArrays, LambdaForm, build_arrays, entropy_lower_bound
from .estimation import EstimatedOverlaps, estimate_overlaps, resolve_e0e3
from .exceptions import B92KeyRateError
from .linalg_small import inner_product

_LOGGER = logging.getLogger(__name__)

TIGHTNESS_ALPHAS = (0.2, 0.5, 0.6, 0.8)


@dataclass(frozen=True, slots=True)
class Witness:
    """Attack and α at which a suite found its worst margin."""

    attack: AttackVectors
    alpha: float

    def as_dict(self) -> dict[str, object]:
        return {"alpha": self.alpha, "attack": self.attack.to_dict()}


@dataclass(slots=True)
class SuiteResult:
    """Worst observed deviation of one property against its tolerance."""

    name: str
    tolerance: float
    worst_margin: float = 0.0
    witness: Witness | None = None
    errors: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.errors and self.worst_margin <= self.tolerance

    def record(self, margin: float, trial: Trial) -> None:
        if self.witness is None or margin > self.worst_margin:
            self.worst_margin = max(margin, self.worst_margin)
            self.witness = Witness(trial.attack, trial.alpha)

    def fail(self, message: str, trial: Trial) -> None:
        self.errors.append(message)
        self.worst_margin = math.inf
        self.witness = Witness(trial.attack, trial.alpha)


@dataclass(frozen=True, slots=True)
class ValidationReport:
    trials: int
    seed: int
    lambda_form: LambdaForm
    suites: tuple[SuiteResult, ...]

    @property
    def passed(self) -> bool:
        return all(suite.passed for suite in self.suites)


class Trial:
    """One attack at one α, with derived quantities computed on first use."""

    def __init__(self, attack: AttackVectors, alpha: float) -> None:
        self.attack = attack
        self.alpha = alpha

    @cached_property
    def stats(self) -> ChannelStatistics:
        return induced_statistics(self.attack, self.alpha)

    @cached_property
    def truth(self) -> tuple[EstimatedOverlaps, float]:
        return direct_overlaps(self.attack)

    @cached_property
    def estimate(self) -> EstimatedOverlaps:
        return estimate_overlaps(self.stats, self.alpha)

    @cached_property
    def arrays(self) -> BoundArrays | None:
        return build_arrays(self.stats, self.estimate, self.truth[1], self.alpha)

    @cached_property
    def exact(self) -> float:
        return exact_conditional_entropy(self.attack, self.alpha)


type Check = Callable[[SuiteResult, Trial], None]


def _unitarity(suite: SuiteResult, trial: Trial) -> None:
    e0, e1, e2, e3 = trial.attack.vectors()
    margin = max(
        abs(e0.norm_squared() + e1.norm_squared() - 1.0),
        abs(e2.norm_squared() + e3.norm_squared() - 1.0),
        abs(inner_product(e0, e2) + inner_product(e1, e3)),
        abs(trial.stats.p00 - e0.norm_squared()),
        abs(trial.stats.p11 - e3.norm_squared()),
    )
    suite.record(margin, trial)


def _round_trip(suite: SuiteResult, trial: Trial) -> None:
    truth, re_e1e2 = trial.truth
    estimate = trial.estimate
    resolved = resolve_e0e3(estimate, re_e1e2)
    if resolved is None:
        suite.fail("true Re⟨e0|e3⟩ resolved as infeasible", trial)
        return
    margin = max(
        abs(estimate.re_e0e1 - truth.re_e0e1),
        abs(estimate.re_e2e3 - truth.re_e2e3),
        abs(estimate.re_e0e2 - truth.re_e0e2),
        abs(estimate.re_e1e3 - truth.re_e1e3),
        abs(estimate.sum_e0e3_e1e2 - truth.sum_e0e3_e1e2),
        abs(resolved - inner_product(trial.attack.e0, trial.attack.e3).real),
    )
    suite.record(margin, trial)


def _bound_arrays(suite: SuiteResult, trial: Trial) -> None:
    arrays = trial.arrays
    if arrays is None:
        suite.fail("bound arrays of a physical attack marked infeasible", trial)
        return
    g00, g01, g10, g11 = g_vectors(trial.attack, trial.alpha)
    margin = max(
        abs(arrays.e0_arr[0] - g00.norm_squared()),
        abs(arrays.e0_arr[1] - g01.norm_squared()),
        abs(arrays.e1_arr[0] - g10.norm_squared()),
        abs(arrays.e1_arr[1] - g11.norm_squared()),
        abs(arrays.lambda_arr[0] - inner_product(g00, g10).real),
        abs(arrays.lambda_arr[1] - inner_product(g01, g11).real),
    )
    suite.record(margin, trial)


def _exact_range(suite: SuiteResult, trial: Trial) -> None:
    suite.record(max(-trial.exact, trial.exact - 1.0, 0.0), trial)


def _soundness(form: LambdaForm) -> Check:
    def check(suite: SuiteResult, trial: Trial) -> None:
        if trial.arrays is None:
            suite.fail("bound arrays of a physical attack marked infeasible", trial)
            return
        suite.record(entropy_lower_bound(trial.arrays, form) - trial.exact, trial)

    return check


def _tightness(form: LambdaForm) -> SuiteResult:
    suite = SuiteResult("tightness", TIGHTNESS_TOL)
    for attack in (identity_attack(), depolarizing_attack(0.0)):
        for alpha in TIGHTNESS_ALPHAS:
            trial = Trial(attack, alpha)
            if trial.arrays is None:
                suite.fail("noiseless bound arrays marked infeasible", trial)
                continue
            suite.record(abs(trial.exact - entropy_lower_bound(trial.arrays, form)), trial)
    return suite


def random_trials(trials: int, seed: int) -> Iterator[Trial]:
    """Yield seeded Haar-random attacks, each with α uniform in the optimizer range."""
    rng = np.random.Generator(np.random.Philox(seed))
    for _ in range(trials):
        attack = random_attack(rng)
        yield Trial(attack, float(rng.uniform(OPT_RANGE_MIN, OPT_RANGE_MAX)))


def run_validation(
    trials: int = DEFAULT_TRIALS,
    seed: int = DEFAULT_SEED,
    form: LambdaForm = LambdaForm.DIFFERENCE,
) -> ValidationReport:
    """Run every oracle suite over `trials` seeded random attacks."""
    checks: list[tuple[SuiteResult, Check]] = [
        (SuiteResult("unitarity", UNITARITY_TOL), _unitarity),
        (SuiteResult("estimation_round_trip", ORACLE_TOL), _round_trip),
        (SuiteResult("bound_arrays", ORACLE_TOL), _bound_arrays),
        (SuiteResult("exact_entropy_range", ORACLE_TOL), _exact_range),
        (SuiteResult("bound_soundness", ORACLE_TOL), _soundness(form)),
    ]
    for trial in random_trials(trials, seed):
        for suite, check in checks:
            try:
                check(suite, trial)
            except B92KeyRateError as err:
                suite.fail(f"{err.translation_key}: {err}", trial)

    suites = (*(suite for suite, _ in checks), _tightness(form))
    for suite in suites:
        _LOGGER.info(
            "Suite %s: %s (worst margin %.3e, tolerance %.1e)",
            suite.name,
            "pass" if suite.passed else "FAIL",
            suite.worst_margin,
            suite.tolerance,
        )
    return ValidationReport(trials=trials, seed=seed, lambda_form=form, suites=suites)
