"""Constants for the extended B92 key-rate toolkit."""

from __future__ import annotations

from typing import Final

PACKAGE_NAME: Final = "b92_keyrate"
VERSION: Final = "0.1.0"

# Linear algebra
MAX_DIM: Final = 16
HERMITIAN_TOL: Final = 1e-12
JACOBI_OFFDIAG_TOL: Final = 1e-12
JACOBI_MAX_SWEEPS: Final = 100
PSD_TOL: Final = 1e-10
TRACE_TOL: Final = 1e-9

# Attack model
ANCILLA_DIM: Final = 4
UNITARITY_TOL: Final = 1e-10
STATISTIC_TOL: Final = 1e-10
MIN_NORMALIZATION: Final = 1e-12

# Estimation and bound
BASIS_SINGULARITY_TOL: Final = 1e-9
CAUCHY_SCHWARZ_SLACK: Final = 1e-12
LAMBDA_SLACK: Final = 1e-9
LAMBDA_CLAMP_TOL: Final = 1e-9
ZERO_WEIGHT_TOL: Final = 1e-12
GOLDEN_SECTION_TOL: Final = 1e-6

# Finite-key accounting
NUM_STATISTICS: Final = 6
MIN_PACC: Final = 1e-12
MAX_QBER: Final = 0.5
MAX_INFEASIBLE_FRACTION: Final = 0.99
WARN_INFEASIBLE_FRACTION: Final = 0.5
BOUNDARY_BISECTION_STEPS: Final = 30
MIN_SAMPLE_COUNT: Final = 1.0

PROFILE_FAST: Final = "fast"
PROFILE_THOROUGH: Final = "thorough"
PROFILES: Final = (PROFILE_FAST, PROFILE_THOROUGH)

PACC_PAPER: Final = "paper"
PACC_NORMALIZATION: Final = "normalization"
PACC_VARIANTS: Final = (PACC_PAPER, PACC_NORMALIZATION)

OBJECTIVE_EFFECTIVE: Final = "effective"
OBJECTIVE_RAW: Final = "raw"
OBJECTIVES: Final = (OBJECTIVE_EFFECTIVE, OBJECTIVE_RAW)

# Defaults (evaluation setup of the extended B92 finite-key analysis)
DEFAULT_EPS: Final = 1e-9
DEFAULT_EPS_EC: Final = 1e-10
DEFAULT_EPS_BAR: Final = 8e-10
DEFAULT_EPS_PE: Final = 7e-10
DEFAULT_EFFICIENCY: Final = 1.2
DEFAULT_FREE_VAR_GRID: Final = 33
DEFAULT_GRID_PER_AXIS: Final = 5
DEFAULT_PROFILE: Final = PROFILE_FAST
DEFAULT_PACC_VARIANT: Final = PACC_NORMALIZATION
DEFAULT_JOBS: Final = 1

# Optimizer
OPT_RANGE_MIN: Final = 0.05
OPT_RANGE_MAX: Final = 0.95
OPT_STEP: Final = 0.05
OPT_REFINE_ROUNDS: Final = 2
OPT_REFINE_FACTOR: Final = 5
OPT_REFINE_HALF_WIDTH: Final = 2
MIN_OPT_SIGNALS: Final = 1e3
TOLERANCE_SCAN_MAX: Final = 0.2
TOLERANCE_SCAN_STEP: Final = 0.01
MIN_TOLERANCE_RESOLUTION: Final = 1e-4
DEFAULT_TOLERANCE_RESOLUTION: Final = 1e-3
ASYMPTOTIC_TOLERANCE_SOFT_RANGE: Final = (0.08, 0.12)

# Monte Carlo
SHARD_ROUNDS: Final = 1 << 18
MAX_SEED: Final = (1 << 64) - 1
CONCORDANCE_SIGMAS: Final = 4.0

# Validation
DEFAULT_TRIALS: Final = 1000
DEFAULT_SEED: Final = 0
ORACLE_TOL: Final = 1e-9
TIGHTNESS_TOL: Final = 1e-6

# Exit codes
EXIT_OK: Final = 0
EXIT_USAGE: Final = 1
EXIT_COMPUTATION: Final = 2
EXIT_VALIDATION: Final = 3

# Output
SIGNIFICANT_DIGITS: Final = 10
CSV_COLUMNS: Final = (
    "q",
    "n",
    "alpha",
    "penc",
    "s_xi",
    "qber",
    "leak_per_bit",
    "delta_bits",
    "r_prime",
    "r_eff",
    "reason",
)

# Configuration keys (mirror CLI flag names without leading dashes)
CONF_Q: Final = "q"
CONF_N: Final = "n"
CONF_ALPHA: Final = "alpha"
CONF_PENC: Final = "penc"
CONF_ASYMPTOTIC: Final = "asymptotic"
CONF_PROFILE: Final = "profile"
CONF_GRID_PER_AXIS: Final = "grid_per_axis"
CONF_FREE_VAR_GRID: Final = "free_var_grid"
CONF_JOBS: Final = "jobs"
CONF_EPS: Final = "eps"
CONF_EPS_EC: Final = "eps_ec"
CONF_EPS_BAR: Final = "eps_bar"
CONF_EPS_PE: Final = "eps_pe"
CONF_EFFICIENCY: Final = "efficiency"
CONF_PACC_VARIANT: Final = "pacc_variant"
CONF_OBJECTIVE: Final = "objective"
CONF_OUT: Final = "out"
CONF_GNUPLOT_STYLE: Final = "gnuplot_style"
CONF_VARY: Final = "vary"
CONF_FROM: Final = "from"
CONF_TO: Final = "to"
CONF_STEPS: Final = "steps"
CONF_VALUES: Final = "values"
CONF_PRESET: Final = "preset"
CONF_ROUNDS: Final = "rounds"
CONF_SEED: Final = "seed"
CONF_ATTACK_FILE: Final = "attack_file"
CONF_STATS_FILE: Final = "stats_file"
CONF_FORMAT: Final = "format"
CONF_TRIALS: Final = "trials"
CONF_LAMBDA_FORM: Final = "lambda_form"
CONF_TRACE: Final = "trace"
CONF_DIAGNOSTICS: Final = "diagnostics"
CONF_RESOLUTION: Final = "resolution"
CONF_GOLDENS_PATH: Final = "path"
CONF_CHECK_ONLY: Final = "check"

VARY_N: Final = "n"
VARY_Q: Final = "q"
VARY_ALPHA: Final = "alpha"
PRESETS: Final = ("fig1", "fig2", "fig3")

FORMAT_JSON: Final = "json"
FORMAT_CSV: Final = "csv"

# Figure presets
FIG1_NOISE: Final = (0.01, 0.03, 0.05)
FIG1_SIGNALS: Final = tuple(m * 10.0**e for e in (6, 7, 8, 9) for m in (1, 5))
FIG2_SIGNALS: Final = (1e6, 1e7, 1e8, 1e9)
FIG2_NOISE: Final = tuple(round(0.01 * i, 2) for i in range(1, 11))
FIG3_NOISE: Final = 0.02
FIG3_PENC: Final = 0.8
FIG3_SIGNALS: Final = (1e6, 1e7, 1e8, 1e9)
FIG3_ALPHAS: Final = tuple(round(0.02 * i, 2) for i in range(1, 50))

# Goldens
GOLDEN_FILE: Final = "docs/goldens.tsv"
GOLDEN_COLUMNS: Final = (
    "scenario",
    "provenance",
    "profile",
    "q",
    "n",
    "alpha",
    "penc",
    "asymptotic",
    "pacc_variant",
    "r_prime",
    "r_eff",
    "s_xi",
    "qber",
)
PROVENANCE_PAPER: Final = "PAPER"
PROVENANCE_TRIVIAL: Final = "TRIVIAL"
PROVENANCE_DERIVED: Final = "DERIVED"
PROVENANCES: Final = (PROVENANCE_PAPER, PROVENANCE_TRIVIAL, PROVENANCE_DERIVED)
