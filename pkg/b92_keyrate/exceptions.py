"""Exceptions raised by the key-rate toolkit."""

from __future__ import annotations


class B92KeyRateError(Exception):
    """Base error; `translation_key` is a stable machine-readable reason."""

    translation_key = "unknown"

    def __init__(self, message: str, *, translation_key: str | None = None) -> None:
        super().__init__(message)
        if translation_key is not None:
            self.translation_key = translation_key


class InvalidInputError(B92KeyRateError, ValueError):
    translation_key = "invalid_input"


class NonHermitianError(InvalidInputError):
    translation_key = "non_hermitian"


class ConvergenceError(B92KeyRateError):
    translation_key = "no_convergence"


class UnitarityError(InvalidInputError):
    translation_key = "non_unitary_attack"


class DegenerateBasisError(InvalidInputError):
    translation_key = "degenerate_basis"


class UndefinedEntropyError(B92KeyRateError):
    translation_key = "undefined_entropy"


class NonPhysicalBoundError(B92KeyRateError):
    translation_key = "non_physical_bound"


class InfeasibleRegionError(B92KeyRateError):
    translation_key = "infeasible_region"


class GoldenThresholdError(B92KeyRateError):
    translation_key = "golden_threshold"


class ProfileGuardError(B92KeyRateError):
    translation_key = "profile_guard"


class ConfigError(InvalidInputError):
    """A setting from a flag or config file failed validation."""

    translation_key = "invalid_config"
