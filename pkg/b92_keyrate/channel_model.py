"""Observable statistics and expected sample counts of the extended B92 protocol."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import astuple, dataclass, fields
import math
from typing import Any, Final

import numpy as np
import numpy.typing as npt

from .exceptions import InvalidInputError

# Column order of every statistics array in the package.
STAT_FIELDS: Final = ("p01", "p10", "p0a", "p1a", "pa0", "pa_abar")
COUNT_FIELDS: Final = ("c01", "c10", "c0a", "c1a", "ca0", "ca_abar")


def _check_unit(name: str, value: float) -> None:
    if not (math.isfinite(value) and 0.0 <= value <= 1.0):
        raise InvalidInputError(f"{name} must be in [0, 1], got {value!r}")


def _check_open_unit(name: str, value: float) -> None:
    if not (math.isfinite(value) and 0.0 < value < 1.0):
        raise InvalidInputError(f"{name} must be in (0, 1), got {value!r}")


def check_noise(q: float) -> None:
    """Raise unless q is a depolarizing noise level in [0, 0.5]."""
    if not (math.isfinite(q) and 0.0 <= q <= 0.5):
        raise InvalidInputError(f"q must be in [0, 0.5], got {q!r}")


def check_alpha(alpha: float) -> None:
    _check_open_unit("alpha", alpha)


@dataclass(frozen=True, slots=True)
class ChannelStatistics:
    """The six independently observed conditional probabilities.

    P_ij is the probability that Bob observes |j⟩ given Alice sent |i⟩, with
    `a` standing for |α⟩ and `a_abar` for the |α⟩→|ᾱ⟩ error. The partner
    statistics p00, p11 and pa1 are derived, never stored.
    """

    p01: float
    p10: float
    p0a: float
    p1a: float
    pa0: float
    pa_abar: float

    def __post_init__(self) -> None:
        for field in fields(self):
            _check_unit(field.name, getattr(self, field.name))

    @property
    def p00(self) -> float:
        return 1.0 - self.p01

    @property
    def p11(self) -> float:
        return 1.0 - self.p10

    @property
    def pa1(self) -> float:
        return 1.0 - self.pa0

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> ChannelStatistics:
        """Build statistics from user-supplied probabilities keyed by field name."""
        missing = [name for name in STAT_FIELDS if name not in data]
        if missing:
            raise InvalidInputError(f"missing statistics: {', '.join(missing)}")
        unknown = sorted(set(data) - set(STAT_FIELDS))
        if unknown:
            raise InvalidInputError(f"unknown statistics: {', '.join(unknown)}")
        try:
            values = {name: float(data[name]) for name in STAT_FIELDS}
        except (TypeError, ValueError) as err:
            raise InvalidInputError(f"statistics must be numbers: {err}") from err
        return cls(**values)

    @classmethod
    def from_array(cls, values: npt.ArrayLike) -> ChannelStatistics:
        arr = np.asarray(values, dtype=float)
        if arr.shape != (len(STAT_FIELDS),):
            raise InvalidInputError(f"expected {len(STAT_FIELDS)} statistics, got shape {arr.shape}")
        return cls(*(float(v) for v in arr))

    def as_array(self) -> npt.NDArray[np.float64]:
        """Return the statistics in STAT_FIELDS column order."""
        return np.array(astuple(self), dtype=float)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(STAT_FIELDS, astuple(self), strict=True))


@dataclass(frozen=True, slots=True)
class SampleCounts:
    """Expected (or observed) sample counts behind each statistic plus raw-key length."""

    c01: float
    c10: float
    c0a: float
    c1a: float
    ca0: float
    ca_abar: float
    c_k: float

    def __post_init__(self) -> None:
        for field in fields(self):
            value = getattr(self, field.name)
            if not (math.isfinite(value) and value >= 0.0):
                raise InvalidInputError(f"{field.name} must be a non-negative count, got {value!r}")

    def statistic_counts(self) -> npt.NDArray[np.float64]:
        """Return the six statistic counts in STAT_FIELDS column order."""
        return np.array([getattr(self, name) for name in COUNT_FIELDS], dtype=float)

    def as_dict(self) -> dict[str, float]:
        return {field.name: getattr(self, field.name) for field in fields(self)}


@dataclass(frozen=True, slots=True)
class ProtocolParams:
    """User-tunable protocol knobs: α, P_enc and the total round count N."""

    alpha: float
    p_enc: float
    n_signals: float

    def __post_init__(self) -> None:
        check_alpha(self.alpha)
        _check_open_unit("penc", self.p_enc)
        if not (math.isfinite(self.n_signals) and self.n_signals >= 1.0):
            raise InvalidInputError(f"n must be ≥ 1, got {self.n_signals!r}")

    @property
    def beta(self) -> float:
        return math.sqrt(1.0 - self.alpha * self.alpha)


def symmetric_statistics(q: float, alpha: float) -> ChannelStatistics:
    """Return the statistics induced by the depolarizing channel with noise q.

    The channel maps ρ to (1−2q)ρ + q·I, so each P_ij is q plus (1−2q) times
    the noiseless projection probability.
    """
    check_noise(q)
    check_alpha(alpha)
    a2 = alpha * alpha
    overlap = q + (1.0 - 2.0 * q) * a2
    return ChannelStatistics(
        p01=q,
        p10=q,
        p0a=overlap,
        p1a=q + (1.0 - 2.0 * q) * (1.0 - a2),
        pa0=overlap,
        pa_abar=q,
    )


def counts_from_statistics(params: ProtocolParams, stats: ChannelStatistics) -> SampleCounts:
    """Return the expected sample counts of an arbitrary channel after N rounds.

    Key states are each sent with probability P_enc/2 and measured in either
    basis; the test state |1⟩ is sent with probability 1−P_enc. The raw key
    length is P_enc·P_1α·N/2, which is the usual C_k for depolarizing statistics.
    """
    n = params.n_signals
    pe = params.p_enc
    return SampleCounts(
        c01=pe * stats.p01 * n / 4.0,
        c10=(1.0 - pe) * stats.p10 * n / 2.0,
        c0a=pe * stats.p0a * n / 4.0,
        c1a=(1.0 - pe) * stats.p1a * n / 2.0,
        ca0=pe * stats.pa0 * n / 4.0,
        ca_abar=pe * stats.pa_abar * n / 4.0,
        c_k=pe * stats.p1a * n / 2.0,
    )


def expected_counts(params: ProtocolParams, q: float) -> SampleCounts:
    """Return the expected sample count behind each statistic after N rounds."""
    return counts_from_statistics(params, symmetric_statistics(q, params.alpha))


def expected_conclusive_count(params: ProtocolParams, q: float) -> float:
    """Return the expected number of conclusive key rounds.

    Sums the four conclusive outcomes (|1⟩ or |ᾱ⟩ on either key state), which
    exceeds `expected_counts(...).c_k` by P_enc·q·N/2.
    """
    return conclusive_count_from_statistics(params, symmetric_statistics(q, params.alpha))


def conclusive_count_from_statistics(params: ProtocolParams, stats: ChannelStatistics) -> float:
    """Return the expected number of conclusive key rounds of an arbitrary channel.

    Each key state and basis pair occurs with probability P_enc/4, and the
    conclusive outcomes are |1⟩ in the Z basis and |ᾱ⟩ in the other.
    """
    conclusive = stats.p01 + (1.0 - stats.p0a) + stats.pa1 + stats.pa_abar
    return params.p_enc * conclusive * params.n_signals / 4.0
