"""Command settings: built-in defaults, then a config file, then flags."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass
import logging
import os
from pathlib import Path
from typing import Any

import voluptuous as vol

from .const import (
    CONF_ALPHA,
    CONF_ASYMPTOTIC,
    CONF_ATTACK_FILE,
    CONF_CHECK_ONLY,
    CONF_DIAGNOSTICS,
    CONF_EFFICIENCY,
    CONF_EPS,
    CONF_EPS_BAR,
    CONF_EPS_EC,
    CONF_EPS_PE,
    CONF_FORMAT,
    CONF_FREE_VAR_GRID,
    CONF_FROM,
    CONF_GNUPLOT_STYLE,
    CONF_GOLDENS_PATH,
    CONF_GRID_PER_AXIS,
    CONF_JOBS,
    CONF_LAMBDA_FORM,
    CONF_N,
    CONF_OBJECTIVE,
    CONF_OUT,
    CONF_PACC_VARIANT,
    CONF_PENC,
    CONF_PRESET,
    CONF_PROFILE,
    CONF_Q,
    CONF_RESOLUTION,
    CONF_ROUNDS,
    CONF_SEED,
    CONF_STATS_FILE,
    CONF_STEPS,
    CONF_TO,
    CONF_TRACE,
    CONF_TRIALS,
    CONF_VALUES,
    CONF_VARY,
    DEFAULT_EFFICIENCY,
    DEFAULT_EPS,
    DEFAULT_EPS_BAR,
    DEFAULT_EPS_EC,
    DEFAULT_EPS_PE,
    DEFAULT_FREE_VAR_GRID,
    DEFAULT_GRID_PER_AXIS,
    DEFAULT_PACC_VARIANT,
    DEFAULT_PROFILE,
    DEFAULT_SEED,
    DEFAULT_TRIALS,
    FORMAT_CSV,
    FORMAT_JSON,
    GOLDEN_FILE,
    MAX_SEED,
    MIN_TOLERANCE_RESOLUTION,
    OBJECTIVE_EFFECTIVE,
    OBJECTIVES,
    PACC_VARIANTS,
    PRESETS,
    PROFILES,
    VARY_ALPHA,
    VARY_N,
    VARY_Q,
)
from .entropy_bound import LambdaForm
from .exceptions import ConfigError, InvalidInputError
from .finite_key import SearchConfig, SecurityEpsilons
from .optimizer import OptimizerConfig

_LOGGER = logging.getLogger(__name__)

CMD_RATE = "rate"
CMD_OPTIMIZE = "optimize"
CMD_SWEEP = "sweep"
CMD_SIMULATE = "simulate"
CMD_VALIDATE = "validate"
CMD_GOLDENS = "goldens"

_OPEN_UNIT = vol.All(
    vol.Coerce(float), vol.Range(min=0.0, max=1.0, min_included=False, max_included=False)
)
_NOISE = vol.All(vol.Coerce(float), vol.Range(min=0.0, max=0.5))
_SIGNALS = vol.All(vol.Coerce(float), vol.Range(min=1.0))
_POSITIVE_INT = vol.All(vol.Coerce(int), vol.Range(min=1))


def _float_list(value: Any) -> list[float]:
    """Accept `0.01,0.02` text or an already split sequence."""
    items = value.split(",") if isinstance(value, str) else list(value)
    try:
        floats = [float(item) for item in items if str(item).strip()]
    except ValueError as err:
        raise vol.Invalid(f"expected comma-separated numbers: {err}") from err
    if not floats:
        raise vol.Invalid("expected at least one value")
    return floats


def _default_jobs() -> int:
    return os.cpu_count() or 1


OUTPUT_SCHEMA = {
    vol.Optional(CONF_JOBS, default=_default_jobs): _POSITIVE_INT,
    vol.Optional(CONF_OUT): vol.Coerce(str),
    vol.Optional(CONF_GNUPLOT_STYLE, default=False): vol.Boolean(),
}

EVALUATION_SCHEMA = {
    **OUTPUT_SCHEMA,
    vol.Optional(CONF_PROFILE, default=DEFAULT_PROFILE): vol.In(PROFILES),
    vol.Optional(CONF_GRID_PER_AXIS, default=DEFAULT_GRID_PER_AXIS): vol.All(
        vol.Coerce(int), vol.Range(min=2)
    ),
    vol.Optional(CONF_FREE_VAR_GRID, default=DEFAULT_FREE_VAR_GRID): vol.All(
        vol.Coerce(int), vol.Range(min=3)
    ),
    vol.Optional(CONF_EPS, default=DEFAULT_EPS): _OPEN_UNIT,
    vol.Optional(CONF_EPS_EC, default=DEFAULT_EPS_EC): _OPEN_UNIT,
    vol.Optional(CONF_EPS_BAR, default=DEFAULT_EPS_BAR): _OPEN_UNIT,
    vol.Optional(CONF_EPS_PE, default=DEFAULT_EPS_PE): _OPEN_UNIT,
    vol.Optional(CONF_EFFICIENCY, default=DEFAULT_EFFICIENCY): vol.All(
        vol.Coerce(float), vol.Range(min=1.0)
    ),
    vol.Optional(CONF_PACC_VARIANT, default=DEFAULT_PACC_VARIANT): vol.In(PACC_VARIANTS),
    vol.Optional(CONF_LAMBDA_FORM, default=LambdaForm.DIFFERENCE.value): vol.All(
        vol.In([form.value for form in LambdaForm]), LambdaForm
    ),
    vol.Optional(CONF_OBJECTIVE, default=OBJECTIVE_EFFECTIVE): vol.In(OBJECTIVES),
}

POINT_SCHEMA = {
    vol.Optional(CONF_N): _SIGNALS,
    vol.Optional(CONF_ASYMPTOTIC, default=False): vol.Boolean(),
}

RATE_SCHEMA = vol.Schema(
    {
        **EVALUATION_SCHEMA,
        **POINT_SCHEMA,
        vol.Optional(CONF_Q): _NOISE,
        vol.Optional(CONF_ALPHA): _OPEN_UNIT,
        vol.Optional(CONF_PENC): _OPEN_UNIT,
        vol.Optional(CONF_STATS_FILE): vol.Coerce(str),
        vol.Optional(CONF_DIAGNOSTICS, default=False): vol.Boolean(),
    }
)

OPTIMIZE_SCHEMA = vol.Schema(
    {
        **EVALUATION_SCHEMA,
        **POINT_SCHEMA,
        vol.Optional(CONF_Q): _NOISE,
        vol.Optional(CONF_TRACE, default=False): vol.Boolean(),
        vol.Optional(CONF_RESOLUTION): vol.All(
            vol.Coerce(float), vol.Range(min=MIN_TOLERANCE_RESOLUTION)
        ),
    }
)

SWEEP_SCHEMA = vol.Schema(
    {
        **EVALUATION_SCHEMA,
        **POINT_SCHEMA,
        vol.Optional(CONF_PRESET): vol.In(PRESETS),
        vol.Optional(CONF_VARY): vol.In((VARY_N, VARY_Q, VARY_ALPHA)),
        vol.Optional(CONF_FROM): vol.Coerce(float),
        vol.Optional(CONF_TO): vol.Coerce(float),
        vol.Optional(CONF_STEPS): _POSITIVE_INT,
        vol.Optional(CONF_VALUES): _float_list,
        vol.Optional(CONF_Q): _NOISE,
        vol.Optional(CONF_PENC): _OPEN_UNIT,
    }
)

SIMULATE_SCHEMA = vol.Schema(
    {
        **OUTPUT_SCHEMA,
        vol.Optional(CONF_Q): _NOISE,
        vol.Optional(CONF_ATTACK_FILE): vol.Coerce(str),
        vol.Required(CONF_ALPHA): _OPEN_UNIT,
        vol.Required(CONF_PENC): _OPEN_UNIT,
        vol.Required(CONF_ROUNDS): vol.All(vol.Coerce(float), vol.Range(min=1), vol.Coerce(int)),
        vol.Optional(CONF_SEED, default=DEFAULT_SEED): vol.All(
            vol.Coerce(int), vol.Range(min=0, max=MAX_SEED)
        ),
        vol.Optional(CONF_FORMAT, default=FORMAT_JSON): vol.In((FORMAT_JSON, FORMAT_CSV)),
    }
)

VALIDATE_SCHEMA = vol.Schema(
    {
        **OUTPUT_SCHEMA,
        vol.Optional(CONF_TRIALS, default=DEFAULT_TRIALS): _POSITIVE_INT,
        vol.Optional(CONF_SEED, default=DEFAULT_SEED): vol.All(
            vol.Coerce(int), vol.Range(min=0, max=MAX_SEED)
        ),
        vol.Optional(CONF_LAMBDA_FORM, default=LambdaForm.DIFFERENCE.value): vol.All(
            vol.In([form.value for form in LambdaForm]), LambdaForm
        ),
    }
)

GOLDENS_SCHEMA = vol.Schema(
    {
        **EVALUATION_SCHEMA,
        vol.Optional(CONF_GOLDENS_PATH, default=GOLDEN_FILE): vol.Coerce(str),
        vol.Optional(CONF_CHECK_ONLY, default=False): vol.Boolean(),
        vol.Optional(CONF_TRIALS, default=100): _POSITIVE_INT,
    }
)

SCHEMAS: dict[str, vol.Schema] = {
    CMD_RATE: RATE_SCHEMA,
    CMD_OPTIMIZE: OPTIMIZE_SCHEMA,
    CMD_SWEEP: SWEEP_SCHEMA,
    CMD_SIMULATE: SIMULATE_SCHEMA,
    CMD_VALIDATE: VALIDATE_SCHEMA,
    CMD_GOLDENS: GOLDENS_SCHEMA,
}

KNOWN_KEYS = frozenset(str(key) for schema in SCHEMAS.values() for key in schema.schema)


def as_flag(key: str) -> str:
    return "--" + key.replace("_", "-")


def _normalize_key(key: str) -> str:
    return key.strip().lstrip("-").replace("-", "_")


def parse_config_file(path: Path) -> dict[str, str]:
    """Read `key = value` lines; blank lines and `#` comments are skipped."""
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as err:
        raise ConfigError(f"cannot read config file {path}: {err}") from err
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"{path}:{lineno}: expected `key = value`, got {raw.strip()!r}")
        name = _normalize_key(key)
        if name not in KNOWN_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown setting {name!r}")
        values[name] = value.strip()
    return values


def _check_point(settings: Mapping[str, Any]) -> None:
    if settings.get(CONF_N) is None and not settings[CONF_ASYMPTOTIC]:
        raise ConfigError(f"{as_flag(CONF_N)} is required unless {as_flag(CONF_ASYMPTOTIC)}")


def _check_rate(settings: Mapping[str, Any]) -> None:
    _check_point(settings)
    if (settings.get(CONF_ALPHA) is None) != (settings.get(CONF_PENC) is None):
        raise ConfigError(f"give both {as_flag(CONF_ALPHA)} and {as_flag(CONF_PENC)} or neither")
    if settings.get(CONF_STATS_FILE) is not None:
        if settings.get(CONF_ALPHA) is None:
            raise ConfigError(
                f"{as_flag(CONF_STATS_FILE)} needs {as_flag(CONF_ALPHA)} and {as_flag(CONF_PENC)}"
            )
    elif settings.get(CONF_Q) is None:
        raise ConfigError(f"{as_flag(CONF_Q)} is required unless {as_flag(CONF_STATS_FILE)}")


def _check_optimize(settings: Mapping[str, Any]) -> None:
    _check_point(settings)
    if settings.get(CONF_Q) is None and settings.get(CONF_RESOLUTION) is None:
        raise ConfigError(f"{as_flag(CONF_Q)} is required unless {as_flag(CONF_RESOLUTION)}")


def _check_sweep(settings: Mapping[str, Any]) -> None:
    if settings.get(CONF_PRESET) is not None:
        return
    vary = settings.get(CONF_VARY)
    if vary is None:
        raise ConfigError(f"give {as_flag(CONF_PRESET)} or {as_flag(CONF_VARY)}")
    explicit = settings.get(CONF_VALUES) is not None
    ranged = all(settings.get(key) is not None for key in (CONF_FROM, CONF_TO, CONF_STEPS))
    if not explicit and not ranged:
        raise ConfigError(
            f"{as_flag(CONF_VARY)} needs {as_flag(CONF_VALUES)} or "
            f"{as_flag(CONF_FROM)}/{as_flag(CONF_TO)}/{as_flag(CONF_STEPS)}"
        )
    if vary != VARY_Q and settings.get(CONF_Q) is None:
        raise ConfigError(f"{as_flag(CONF_VARY)} {vary} needs {as_flag(CONF_Q)}")
    if vary != VARY_N:
        _check_point(settings)
    if vary == VARY_ALPHA and settings.get(CONF_PENC) is None:
        raise ConfigError(f"{as_flag(CONF_VARY)} alpha needs {as_flag(CONF_PENC)}")


def _check_simulate(settings: Mapping[str, Any]) -> None:
    if (settings.get(CONF_Q) is None) == (settings.get(CONF_ATTACK_FILE) is None):
        raise ConfigError(f"give exactly one of {as_flag(CONF_Q)} or {as_flag(CONF_ATTACK_FILE)}")


_CROSS_CHECKS = {
    CMD_RATE: _check_rate,
    CMD_OPTIMIZE: _check_optimize,
    CMD_SWEEP: _check_sweep,
    CMD_SIMULATE: _check_simulate,
}


def _describe(err: vol.MultipleInvalid) -> str:
    messages = []
    for error in err.errors:
        key = str(error.path[0]) if error.path else "?"
        messages.append(f"{as_flag(key)}: {error.msg}")
    return "; ".join(messages)


@dataclass(frozen=True, slots=True)
class RunConfig:
    """Validated settings of one command plus the derived configuration objects."""

    command: str
    settings: Mapping[str, Any]
    eps: SecurityEpsilons | None = None
    search: SearchConfig | None = None
    optimizer: OptimizerConfig | None = None

    def evaluation(self) -> tuple[SecurityEpsilons, SearchConfig, OptimizerConfig]:
        if self.eps is None or self.search is None or self.optimizer is None:
            raise ConfigError(f"{self.command} takes no key-rate settings")
        return self.eps, self.search, self.optimizer

    def get(self, key: str, default: Any = None) -> Any:
        return self.settings.get(key, default)

    def __getitem__(self, key: str) -> Any:
        return self.settings[key]


def build_run_config(
    command: str,
    file_values: Mapping[str, Any] | None = None,
    flag_values: Mapping[str, Any] | None = None,
) -> RunConfig:
    """Merge and validate the settings of `command`.

    Config-file keys the command does not use are ignored; flags set to None
    count as not given.

    Raises:
        ConfigError: a setting is missing, malformed or out of range.

    """
    schema = SCHEMAS.get(command)
    if schema is None:
        raise ConfigError(f"unknown command {command!r}")
    accepted = {str(key) for key in schema.schema}
    merged: dict[str, Any] = {}
    for key, value in (file_values or {}).items():
        if key in accepted:
            merged[key] = value
        else:
            _LOGGER.debug("Config key %s not used by %s", key, command)
    merged.update(
        {key: value for key, value in (flag_values or {}).items() if value is not None}
    )

    try:
        settings = schema(merged)
    except vol.MultipleInvalid as err:
        raise ConfigError(_describe(err)) from err
    if check := _CROSS_CHECKS.get(command):
        check(settings)

    eps = search = optimizer = None
    try:
        if CONF_EPS in settings:
            eps = SecurityEpsilons(
                eps=settings[CONF_EPS],
                eps_ec=settings[CONF_EPS_EC],
                eps_bar=settings[CONF_EPS_BAR],
                eps_pe=settings[CONF_EPS_PE],
            )
            search = SearchConfig(
                profile=settings[CONF_PROFILE],
                grid_per_axis=settings[CONF_GRID_PER_AXIS],
                free_var_grid=settings[CONF_FREE_VAR_GRID],
                jobs=settings[CONF_JOBS],
                lambda_form=settings[CONF_LAMBDA_FORM],
            )
            optimizer = OptimizerConfig(
                objective=settings[CONF_OBJECTIVE],
                efficiency=settings[CONF_EFFICIENCY],
                pacc_variant=settings[CONF_PACC_VARIANT],
                keep_trace=bool(settings.get(CONF_TRACE, False)),
            )
    except InvalidInputError as err:
        raise ConfigError(f"invalid security parameters: {err}") from err

    _LOGGER.debug("Settings for %s: %s", command, settings)
    return RunConfig(command, settings, eps, search, optimizer)
