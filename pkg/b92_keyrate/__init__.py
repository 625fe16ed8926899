"""Finite-key rate bounds for the extended B92 quantum key distribution protocol."""

from __future__ import annotations

from .channel_model import ChannelStatistics, ProtocolParams, SampleCounts
from .const import VERSION
from .exceptions import B92KeyRateError
from .finite_key import KeyRateReport, SearchConfig, SecurityEpsilons, key_rate
from .optimizer import OptimizerConfig, noise_tolerance, optimize

__version__ = VERSION

__all__ = [
    "B92KeyRateError",
    "ChannelStatistics",
    "KeyRateReport",
    "OptimizerConfig",
    "ProtocolParams",
    "SampleCounts",
    "SearchConfig",
    "SecurityEpsilons",
    "key_rate",
    "noise_tolerance",
    "optimize",
]
