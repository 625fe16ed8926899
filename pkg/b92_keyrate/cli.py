"""Command-line front end: rate, optimize, sweep, simulate, validate, goldens."""

from __future__ import annotations

import argparse
from collections.abc import Callable, Iterable, Iterator, Sequence
from contextlib import contextmanager
import csv
import json
import logging
import math
from pathlib import Path
import sys
from typing import Any, NoReturn, TextIO

import numpy as np

from .attack_model import AttackVectors
from .channel_model import (
    ChannelStatistics,
    ProtocolParams,
    counts_from_statistics,
    expected_counts,
    symmetric_statistics,
)
from .config import (
    CMD_GOLDENS,
    CMD_OPTIMIZE,
    CMD_RATE,
    CMD_SIMULATE,
    CMD_SWEEP,
    CMD_VALIDATE,
    RunConfig,
    build_run_config,
    parse_config_file,
)
from .const import (
    CONF_ALPHA,
    CONF_ASYMPTOTIC,
    CONF_ATTACK_FILE,
    CONF_CHECK_ONLY,
    CONF_DIAGNOSTICS,
    CONF_FORMAT,
    CONF_FROM,
    CONF_GNUPLOT_STYLE,
    CONF_GOLDENS_PATH,
    CONF_JOBS,
    CONF_LAMBDA_FORM,
    CONF_N,
    CONF_OUT,
    CONF_PENC,
    CONF_PRESET,
    CONF_Q,
    CONF_RESOLUTION,
    CONF_ROUNDS,
    CONF_SEED,
    CONF_STATS_FILE,
    CONF_STEPS,
    CONF_TO,
    CONF_TRIALS,
    CONF_VALUES,
    CONF_VARY,
    CSV_COLUMNS,
    EXIT_COMPUTATION,
    EXIT_OK,
    EXIT_USAGE,
    EXIT_VALIDATION,
    FORMAT_CSV,
    FORMAT_JSON,
    OBJECTIVES,
    PACC_VARIANTS,
    PRESETS,
    PROFILES,
    VARY_ALPHA,
    VARY_N,
    VARY_Q,
    VERSION,
)
from .diagnostics import get_rate_diagnostics, get_simulation_diagnostics
from .entropy_bound import LambdaForm
from .exceptions import (
    B92KeyRateError,
    ConfigError,
    GoldenThresholdError,
    ProfileGuardError,
)
from .finite_key import KeyRateReport, key_rate
from .goldens import regenerate_goldens
from .helpers import format_float, linspace
from .mc_sim import concordance, simulate
from .optimizer import (
    ASYMPTOTIC_SIGNALS,
    SweepRow,
    evaluate_point,
    noise_tolerance,
    optimize,
    run_preset,
    sweep_alpha,
    sweep_optimized,
)
from .validation import run_validation

_LOGGER = logging.getLogger(__name__)

NO_POSITIVE_RATE = "no positive rate"
_BUCKET_COLUMNS = ("bucket", "observed", "expected", "sigma", "z")


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with EXIT_USAGE."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# Flags default to None so that unset flags do not override config-file values.


def _add_output_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="key = value settings file")
    parser.add_argument("--jobs", type=int, help="worker processes (default: all cores)")
    parser.add_argument("--verbose", "-v", action="store_true", help="debug logging on stderr")
    parser.add_argument("--out", help="write CSV/JSON here instead of stdout")
    parser.add_argument(
        "--gnuplot-style",
        action="store_true",
        default=None,
        help="whitespace-separated columns, 'nan' for missing values",
    )


def _add_evaluation_flags(parser: argparse.ArgumentParser) -> None:
    _add_output_flags(parser)
    parser.add_argument("--profile", choices=PROFILES)
    parser.add_argument("--grid-per-axis", type=int, help="thorough-profile points per statistic")
    parser.add_argument("--free-var-grid", type=int, help="grid points for the free variable")
    parser.add_argument("--eps", type=float, help="total security parameter")
    parser.add_argument("--eps-ec", type=float, help="error-correction failure probability")
    parser.add_argument("--eps-bar", type=float, help="smoothing parameter")
    parser.add_argument("--eps-pe", type=float, help="parameter-estimation failure probability")
    parser.add_argument("--efficiency", type=float, help="error-correction efficiency factor")
    parser.add_argument("--pacc-variant", choices=PACC_VARIANTS)
    parser.add_argument("--lambda-form", choices=[form.value for form in LambdaForm])
    parser.add_argument("--objective", choices=OBJECTIVES)


def _add_point_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--q", type=float, help="depolarizing noise level")
    parser.add_argument("--n", type=float, help="number of signals N")
    parser.add_argument("--asymptotic", action="store_true", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="b92-keyrate",
        description="Finite-key rate bounds for the extended B92 protocol.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")
    commands = parser.add_subparsers(dest="command", required=True)

    rate = commands.add_parser(CMD_RATE, help="key rate at one point")
    _add_evaluation_flags(rate)
    _add_point_flags(rate)
    rate.add_argument("--alpha", type=float, help="overlap ⟨0|α⟩ (optimized when omitted)")
    rate.add_argument("--penc", type=float, help="key-round probability (optimized when omitted)")
    rate.add_argument("--stats-file", help="JSON with the six observed statistics")
    rate.add_argument("--diagnostics", action="store_true", default=None)

    opt = commands.add_parser(CMD_OPTIMIZE, help="best α and P_enc, or the noise tolerance")
    _add_evaluation_flags(opt)
    _add_point_flags(opt)
    opt.add_argument("--trace", action="store_true", default=None)
    opt.add_argument("--resolution", type=float, help="find the noise tolerance to this step")

    sweep = commands.add_parser(CMD_SWEEP, help="CSV sweep over N, q or α")
    _add_evaluation_flags(sweep)
    _add_point_flags(sweep)
    sweep.add_argument("--preset", choices=PRESETS)
    sweep.add_argument("--vary", choices=(VARY_N, VARY_Q, VARY_ALPHA))
    sweep.add_argument("--from", type=float, help="first value of the swept parameter")
    sweep.add_argument("--to", type=float, help="last value of the swept parameter")
    sweep.add_argument("--steps", type=int, help="number of values (N is spaced geometrically)")
    sweep.add_argument("--values", help="explicit comma-separated values")
    sweep.add_argument("--penc", type=float)

    sim = commands.add_parser(CMD_SIMULATE, help="Monte Carlo run of the protocol")
    _add_output_flags(sim)
    sim.add_argument("--q", type=float, help="depolarizing noise level")
    sim.add_argument("--attack-file", help="JSON attack vectors instead of --q")
    sim.add_argument("--alpha", type=float)
    sim.add_argument("--penc", type=float)
    sim.add_argument("--rounds", type=float)
    sim.add_argument("--seed", type=int)
    sim.add_argument("--format", choices=(FORMAT_JSON, FORMAT_CSV))

    val = commands.add_parser(CMD_VALIDATE, help="oracle suites on random attacks")
    _add_output_flags(val)
    val.add_argument("--trials", type=int)
    val.add_argument("--seed", type=int)
    val.add_argument("--lambda-form", choices=[form.value for form in LambdaForm])

    gold = commands.add_parser(CMD_GOLDENS, help="check or regenerate the golden records")
    _add_evaluation_flags(gold)
    gold.add_argument("--path", help="golden TSV file")
    gold.add_argument("--check", action="store_true", default=None, help="do not rewrite")
    gold.add_argument("--trials", type=int, help="validation trials run first")
    return parser


@contextmanager
def _output(path: str | None) -> Iterator[TextIO]:
    if path is None:
        yield sys.stdout
        return
    try:
        handle = Path(path).open("w", encoding="utf-8", newline="")
    except OSError as err:
        raise ConfigError(f"--out: cannot write {path}: {err}") from err
    with handle:
        yield handle


def _read_json(path: str, flag: str) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as err:
        raise ConfigError(f"{flag}: cannot read {path}: {err}") from err


class TableWriter:
    """CSV rows, or whitespace-separated columns with `nan` for empty cells."""

    def __init__(self, handle: TextIO, gnuplot_style: bool) -> None:
        self._handle = handle
        self._gnuplot = gnuplot_style
        self._csv = csv.writer(handle, lineterminator="\n")

    def header(self, columns: Sequence[str]) -> None:
        if self._gnuplot:
            self._handle.write("# " + " ".join(columns) + "\n")
        else:
            self._csv.writerow(columns)

    def row(self, cells: Sequence[str]) -> None:
        if self._gnuplot:
            self._handle.write(" ".join(c.replace(" ", "_") or "nan" for c in cells) + "\n")
        else:
            self._csv.writerow(cells)


def report_cells(row: SweepRow) -> list[str]:
    report = row.report
    values: list[float | None] = (
        [None] * 6
        if report is None
        else [
            report.s_xi,
            report.qber,
            report.leak_per_bit,
            report.delta_bits,
            report.r_prime,
            report.r_effective,
        ]
    )
    return [
        format_float(row.q),
        format_float(row.n_signals),
        format_float(row.alpha),
        format_float(row.penc),
        *(format_float(v) for v in values),
        row.reason,
    ]


def write_rows(cfg: RunConfig, rows: Iterable[SweepRow], handle: TextIO) -> None:
    table = TableWriter(handle, cfg[CONF_GNUPLOT_STYLE])
    table.header(CSV_COLUMNS)
    for row in rows:
        table.row(report_cells(row))


def _write_row_file(cfg: RunConfig, row: SweepRow) -> None:
    if cfg.get(CONF_OUT) is not None:
        with _output(cfg[CONF_OUT]) as handle:
            write_rows(cfg, [row], handle)


def _print_summary(row: SweepRow, report: KeyRateReport) -> None:
    lines = [
        ("q", format_float(row.q)),
        ("n", format_float(row.n_signals)),
        ("alpha", format_float(row.alpha)),
        ("penc", format_float(row.penc)),
        ("s_xi", format_float(report.s_xi)),
        ("qber", format_float(report.qber)),
        ("leak_per_bit", format_float(report.leak_per_bit)),
        ("delta_bits", format_float(report.delta_bits)),
        ("n_raw", format_float(report.n_raw)),
        ("r_prime", format_float(report.r_prime)),
    ]
    if report.positive:
        lines.append(("r_eff", format_float(report.r_effective)))
    else:
        lines.append(
            ("r_eff", f"0 ({NO_POSITIVE_RATE}; bound {format_float(report.r_effective)})")
        )
    if report.infeasible_fraction > 0.0:
        lines.append(("infeasible", format_float(report.infeasible_fraction)))
    for name, value in lines:
        print(f"{name:<14}{value}")


def _signal_count(cfg: RunConfig) -> tuple[float, float]:
    """Return (N used in the computation, N reported)."""
    if cfg[CONF_ASYMPTOTIC]:
        return ASYMPTOTIC_SIGNALS, math.inf
    return cfg[CONF_N], cfg[CONF_N]


def cmd_rate(cfg: RunConfig) -> int:
    eps, search, opt_cfg = cfg.evaluation()
    n_eval, n_out = _signal_count(cfg)
    asymptotic = cfg[CONF_ASYMPTOTIC]
    q = cfg.get(CONF_Q)

    if cfg.get(CONF_STATS_FILE) is not None:
        stats = ChannelStatistics.from_mapping(_read_json(cfg[CONF_STATS_FILE], "--stats-file"))
        params = ProtocolParams(cfg[CONF_ALPHA], cfg[CONF_PENC], n_eval)
        counts = counts_from_statistics(params, stats)
        report = key_rate(
            params,
            stats,
            counts,
            eps,
            search,
            asymptotic,
            efficiency=opt_cfg.efficiency,
            pacc_variant=opt_cfg.pacc_variant,
        )
    else:
        if cfg.get(CONF_ALPHA) is None:
            result = optimize(q, n_eval, eps, search, opt_cfg, asymptotic)
            point = (result.best_alpha, result.best_penc)
            report = result.best_report
        else:
            point = (cfg[CONF_ALPHA], cfg[CONF_PENC])
            report = evaluate_point(
                point, q, n_eval, eps, search, opt_cfg, asymptotic
            )
        params = ProtocolParams(point[0], point[1], n_eval)
        stats = symmetric_statistics(q, params.alpha)
        counts = expected_counts(params, q)

    row = SweepRow(q if q is not None else math.nan, n_out, params.alpha, params.p_enc, report)
    if cfg[CONF_DIAGNOSTICS]:
        options = {key: str(value) for key, value in cfg.settings.items()}
        data = get_rate_diagnostics(
            params, q, stats, counts, eps, search, report, options
        )
        print(json.dumps(data, indent=2))
    else:
        _print_summary(row, report)
    _write_row_file(cfg, row)
    return EXIT_OK


def cmd_optimize(cfg: RunConfig) -> int:
    eps, search, opt_cfg = cfg.evaluation()
    n_eval, n_out = _signal_count(cfg)
    asymptotic = cfg[CONF_ASYMPTOTIC]

    if cfg.get(CONF_RESOLUTION) is not None:
        tolerance = noise_tolerance(
            None if asymptotic else n_eval,
            eps,
            search,
            opt_cfg,
            cfg[CONF_RESOLUTION],
        )
        print(f"{'n':<14}{format_float(n_out)}")
        print(f"{'tolerance':<14}{format_float(tolerance)}")
        return EXIT_OK

    result = optimize(cfg[CONF_Q], n_eval, eps, search, opt_cfg, asymptotic)
    row = SweepRow(cfg[CONF_Q], n_out, result.best_alpha, result.best_penc, result.best_report)
    _print_summary(row, result.best_report)
    print(f"{'evaluations':<14}{result.evaluations}")
    if result.trace is not None:
        print("# alpha penc value")
        for alpha, penc, value in result.trace:
            print(f"{format_float(alpha)} {format_float(penc)} {format_float(value)}")
    _write_row_file(cfg, row)
    return EXIT_OK


def _swept_values(cfg: RunConfig) -> list[float]:
    if cfg.get(CONF_VALUES) is not None:
        return list(cfg[CONF_VALUES])
    start, stop, steps = cfg[CONF_FROM], cfg[CONF_TO], cfg[CONF_STEPS]
    if cfg[CONF_VARY] == VARY_N:
        if start <= 0.0 or stop <= 0.0:
            raise ConfigError("--from and --to must be positive when varying n")
        return [float(v) for v in np.geomspace(start, stop, steps)]
    return linspace(start, stop, steps)


def cmd_sweep(cfg: RunConfig) -> int:
    eps, search, opt_cfg = cfg.evaluation()
    preset = cfg.get(CONF_PRESET)
    if preset is not None:
        rows = run_preset(preset, eps, search, opt_cfg)
    else:
        vary = cfg[CONF_VARY]
        values = _swept_values(cfg)
        if vary == VARY_ALPHA:
            n_eval, _ = _signal_count(cfg)
            rows = sweep_alpha(
                cfg[CONF_Q],
                cfg[CONF_PENC],
                n_eval,
                values,
                eps,
                search,
                opt_cfg,
                cfg[CONF_ASYMPTOTIC],
            )
        else:
            if vary == VARY_N:
                points = [(cfg[CONF_Q], n) for n in values]
            else:
                fixed = None if cfg[CONF_ASYMPTOTIC] else cfg[CONF_N]
                points = [(q, fixed) for q in values]
            rows = sweep_optimized(points, eps, search, opt_cfg)

    with _output(cfg.get(CONF_OUT)) as handle:
        write_rows(cfg, rows, handle)
    failed = sum(1 for row in rows if row.report is None)
    if failed:
        _LOGGER.warning("%d of %d sweep points failed; see the reason column", failed, len(rows))
    return EXIT_OK


def cmd_simulate(cfg: RunConfig) -> int:
    rounds = cfg[CONF_ROUNDS]
    params = ProtocolParams(cfg[CONF_ALPHA], cfg[CONF_PENC], float(rounds))
    q = cfg.get(CONF_Q)
    channel: float | AttackVectors
    if q is None:
        channel = AttackVectors.from_dict(_read_json(cfg[CONF_ATTACK_FILE], "--attack-file"))
    else:
        channel = q
    outcome = simulate(params, channel, rounds, cfg[CONF_SEED], cfg[CONF_JOBS])
    buckets = concordance(outcome, params, channel)

    with _output(cfg.get(CONF_OUT)) as handle:
        if cfg[CONF_FORMAT] == FORMAT_CSV:
            table = TableWriter(handle, cfg[CONF_GNUPLOT_STYLE])
            table.header(_BUCKET_COLUMNS)
            for b in buckets:
                table.row(
                    [
                        b.name,
                        str(b.observed),
                        format_float(b.expected),
                        format_float(b.sigma),
                        format_float(b.z),
                    ]
                )
        else:
            data = get_simulation_diagnostics(outcome, params, channel, buckets)
            handle.write(json.dumps(data, indent=2) + "\n")
    return EXIT_OK


def cmd_validate(cfg: RunConfig) -> int:
    report = run_validation(cfg[CONF_TRIALS], cfg[CONF_SEED], cfg[CONF_LAMBDA_FORM])
    with _output(cfg.get(CONF_OUT)) as handle:
        handle.write(
            f"# trials={report.trials} seed={report.seed} lambda_form={report.lambda_form}\n"
        )
        for suite in report.suites:
            status = "pass" if suite.passed else "FAIL"
            handle.write(
                f"{suite.name:<24}{status:<6}worst={suite.worst_margin:.3e} "
                f"tolerance={suite.tolerance:.1e}\n"
            )
            if not suite.passed and suite.witness is not None:
                for message in suite.errors[:3]:
                    handle.write(f"  error: {message}\n")
                handle.write(f"  witness: {json.dumps(suite.witness.as_dict())}\n")
    return EXIT_OK if report.passed else EXIT_VALIDATION


def cmd_goldens(cfg: RunConfig) -> int:
    eps, search, opt_cfg = cfg.evaluation()
    check_only = cfg[CONF_CHECK_ONLY]
    diffs = regenerate_goldens(
        Path(cfg[CONF_GOLDENS_PATH]),
        search,
        eps,
        check_only=check_only,
        validation_trials=cfg[CONF_TRIALS],
        efficiency=opt_cfg.efficiency,
    )
    with _output(cfg.get(CONF_OUT)) as handle:
        for diff in diffs:
            handle.write(f"{diff}\n")
    if check_only and diffs:
        return EXIT_VALIDATION
    return EXIT_OK


HANDLERS: dict[str, Callable[[RunConfig], int]] = {
    CMD_RATE: cmd_rate,
    CMD_OPTIMIZE: cmd_optimize,
    CMD_SWEEP: cmd_sweep,
    CMD_SIMULATE: cmd_simulate,
    CMD_VALIDATE: cmd_validate,
    CMD_GOLDENS: cmd_goldens,
}

_NOT_SETTINGS = ("command", "config", "verbose")


def main(argv: Sequence[str] | None = None) -> int:
    """Run one command and return its exit code."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
        force=True,
    )
    flags = {k: v for k, v in vars(args).items() if k not in _NOT_SETTINGS}

    try:
        file_values = parse_config_file(args.config) if args.config else {}
        cfg = build_run_config(args.command, file_values, flags)
        return HANDLERS[args.command](cfg)
    except (ConfigError, ProfileGuardError) as err:
        print(f"b92-keyrate: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except GoldenThresholdError as err:
        print(f"b92-keyrate: {err.translation_key}: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except B92KeyRateError as err:
        _LOGGER.debug("Computation failed", exc_info=True)
        print(f"b92-keyrate: {err.translation_key}: {err}", file=sys.stderr)
        return EXIT_COMPUTATION


if __name__ == "__main__":
    sys.exit(main())
