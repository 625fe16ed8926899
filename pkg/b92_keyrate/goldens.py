"""Golden regression records: load, check and regenerate the tab-separated golden file."""

from __future__ import annotations

from collections.abc import Iterable
import csv
from dataclasses import dataclass, replace
import logging
import math
from pathlib import Path

from .const import (
    DEFAULT_EFFICIENCY,
    GOLDEN_COLUMNS,
    ORACLE_TOL,
    PACC_VARIANTS,
    PROFILE_THOROUGH,
    PROFILES,
    PROVENANCE_DERIVED,
    PROVENANCE_PAPER,
    PROVENANCE_TRIVIAL,
    PROVENANCES,
)
from .exceptions import GoldenThresholdError, InvalidInputError, ProfileGuardError
from .finite_key import KeyRateReport, SearchConfig, SecurityEpsilons
from .helpers import format_float
from .optimizer import ASYMPTOTIC_SIGNALS, OptimizerConfig, evaluate_point, optimize
from .validation import run_validation

_LOGGER = logging.getLogger(__name__)

THRESHOLD_POSITIVE = ">0"
THRESHOLD_NON_POSITIVE = "<=0"
THRESHOLDS = (THRESHOLD_POSITIVE, THRESHOLD_NON_POSITIVE)
OUTPUT_COLUMNS = ("r_prime", "r_eff", "s_xi", "qber")

GOLDEN_PREAMBLE = (
    "# Golden key-rate records, one per line, sorted by scenario.\n"
    "# provenance: PAPER = published threshold (r_eff holds >0 or <=0, never regenerated),\n"
    "#   TRIVIAL = closed-form value, DERIVED = computed by this package with `profile`.\n"
    "# Empty alpha/penc means the point is optimized over both. Empty DERIVED outputs\n"
    "#   have not been frozen yet.\n"
)


def _optional_float(cell: str) -> float | None:
    return float(cell) if cell.strip() else None


@dataclass(frozen=True, slots=True)
class GoldenRecord:
    scenario: str
    provenance: str
    profile: str
    q: float
    n: float
    alpha: float | None
    penc: float | None
    asymptotic: bool
    pacc_variant: str
    r_prime: float | None = None
    r_eff: float | None = None
    s_xi: float | None = None
    qber: float | None = None
    threshold: str | None = None

    def __post_init__(self) -> None:
        if self.provenance not in PROVENANCES:
            raise InvalidInputError(f"{self.scenario}: unknown provenance {self.provenance!r}")
        if self.profile not in PROFILES:
            raise InvalidInputError(f"{self.scenario}: unknown profile {self.profile!r}")
        if self.pacc_variant not in PACC_VARIANTS:
            raise InvalidInputError(f"{self.scenario}: unknown pacc_variant {self.pacc_variant!r}")
        if (self.alpha is None) != (self.penc is None):
            raise InvalidInputError(f"{self.scenario}: give both alpha and penc or neither")
        if self.provenance == PROVENANCE_PAPER and self.threshold not in THRESHOLDS:
            raise InvalidInputError(f"{self.scenario}: PAPER records need a threshold in r_eff")

    @property
    def frozen(self) -> bool:
        return self.provenance == PROVENANCE_PAPER or self.r_eff is not None

    @classmethod
    def from_row(cls, row: dict[str, str]) -> GoldenRecord:
        provenance = row["provenance"]
        paper = provenance == PROVENANCE_PAPER
        return cls(
            scenario=row["scenario"],
            provenance=provenance,
            profile=row["profile"],
            q=float(row["q"]),
            n=float(row["n"]),
            alpha=_optional_float(row["alpha"]),
            penc=_optional_float(row["penc"]),
            asymptotic=row["asymptotic"] == "true",
            pacc_variant=row["pacc_variant"],
            r_prime=None if paper else _optional_float(row["r_prime"]),
            r_eff=None if paper else _optional_float(row["r_eff"]),
            s_xi=None if paper else _optional_float(row["s_xi"]),
            qber=None if paper else _optional_float(row["qber"]),
            threshold=row["r_eff"] if paper else None,
        )

    def to_row(self) -> list[str]:
        return [
            self.scenario,
            self.provenance,
            self.profile,
            format_float(self.q),
            format_float(self.n),
            format_float(self.alpha),
            format_float(self.penc),
            "true" if self.asymptotic else "false",
            self.pacc_variant,
            format_float(self.r_prime),
            self.threshold or format_float(self.r_eff),
            format_float(self.s_xi),
            format_float(self.qber),
        ]

    def with_report(self, report: KeyRateReport, profile: str) -> GoldenRecord:
        return replace(
            self,
            profile=profile,
            r_prime=report.r_prime,
            r_eff=report.r_effective,
            s_xi=report.s_xi,
            qber=report.qber,
        )


@dataclass(frozen=True, slots=True)
class GoldenDiff:
    scenario: str
    column: str
    old: str
    new: str

    def __str__(self) -> str:
        return f"{self.scenario}\t{self.column}\t{self.old} -> {self.new}"


def load_goldens(path: Path) -> list[GoldenRecord]:
    """Parse the golden file; `#` lines are comments."""
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as err:
        raise InvalidInputError(f"cannot read golden file {path}: {err}") from err
    reader = csv.DictReader((ln for ln in lines if not ln.startswith("#")), delimiter="\t")
    if tuple(reader.fieldnames or ()) != GOLDEN_COLUMNS:
        raise InvalidInputError(f"golden file header must be {GOLDEN_COLUMNS}")
    try:
        return [GoldenRecord.from_row(row) for row in reader]
    except (KeyError, ValueError) as err:
        raise InvalidInputError(f"malformed golden record: {err}") from err


def write_goldens(path: Path, records: Iterable[GoldenRecord]) -> None:
    ordered = sorted(records, key=lambda r: r.scenario)
    with path.open("w", encoding="utf-8", newline="") as handle:
        handle.write(GOLDEN_PREAMBLE)
        writer = csv.writer(handle, delimiter="\t", lineterminator="\n")
        writer.writerow(GOLDEN_COLUMNS)
        writer.writerows(record.to_row() for record in ordered)


def evaluate_record(
    record: GoldenRecord,
    eps: SecurityEpsilons,
    search: SearchConfig,
    efficiency: float = DEFAULT_EFFICIENCY,
) -> KeyRateReport:
    """Recompute the report a record describes, optimizing when α and P_enc are absent."""
    cfg = OptimizerConfig(efficiency=efficiency, pacc_variant=record.pacc_variant)
    n = ASYMPTOTIC_SIGNALS if record.asymptotic else record.n
    if record.alpha is None or record.penc is None:
        return optimize(record.q, n, eps, search, cfg, record.asymptotic).best_report
    return evaluate_point(
        (record.alpha, record.penc), record.q, n, eps, search, cfg, record.asymptotic
    )


def _diffs(old: GoldenRecord, new: GoldenRecord) -> list[GoldenDiff]:
    out = []
    for column in OUTPUT_COLUMNS:
        before = format_float(getattr(old, column))
        after = format_float(getattr(new, column))
        if before != after:
            out.append(GoldenDiff(old.scenario, column, before, after))
    return out


def _threshold_holds(threshold: str | None, report: KeyRateReport) -> bool:
    if threshold == THRESHOLD_POSITIVE:
        return report.r_effective > 0.0
    return report.r_effective <= 0.0


def _trivial_holds(record: GoldenRecord, report: KeyRateReport) -> bool:
    for column, value in zip(
        OUTPUT_COLUMNS,
        (report.r_prime, report.r_effective, report.s_xi, report.qber),
        strict=True,
    ):
        expected = getattr(record, column)
        if expected is not None and not math.isclose(value, expected, abs_tol=ORACLE_TOL):
            return False
    return True


def regenerate_goldens(
    path: Path,
    search: SearchConfig,
    eps: SecurityEpsilons | None = None,
    *,
    check_only: bool = False,
    validation_trials: int = 100,
    efficiency: float = DEFAULT_EFFICIENCY,
) -> list[GoldenDiff]:
    """Recompute DERIVED records and check PAPER and TRIVIAL ones.

    Raises:
        ProfileGuardError: a non-thorough profile would overwrite thorough records.
        GoldenThresholdError: the oracle suites fail, or a PAPER threshold or
            TRIVIAL value no longer holds.

    """
    eps = eps or SecurityEpsilons()
    records = load_goldens(path)
    if not check_only and search.profile != PROFILE_THOROUGH:
        guarded = [
            r.scenario
            for r in records
            if r.provenance == PROVENANCE_DERIVED and r.profile == PROFILE_THOROUGH
        ]
        if guarded:
            raise ProfileGuardError(
                f"refusing to overwrite thorough-profile goldens with {search.profile!r}: "
                + ", ".join(guarded)
            )

    validation = run_validation(trials=validation_trials)
    if not validation.passed:
        failed = [s.name for s in validation.suites if not s.passed]
        raise GoldenThresholdError(
            f"oracle suites failed: {', '.join(failed)}", translation_key="validation_failed"
        )

    updated: list[GoldenRecord] = []
    diffs: list[GoldenDiff] = []
    violations: list[str] = []
    for record in records:
        report = evaluate_record(record, eps, search, efficiency)
        if record.provenance == PROVENANCE_PAPER:
            if not _threshold_holds(record.threshold, report):
                violations.append(
                    f"{record.scenario}: r_eff {record.threshold} expected, "
                    f"got {format_float(report.r_effective)}"
                )
            updated.append(record)
        elif record.provenance == PROVENANCE_TRIVIAL:
            if not _trivial_holds(record, report):
                candidate = record.with_report(report, record.profile)
                violations.extend(str(d) for d in _diffs(record, candidate))
            updated.append(record)
        else:
            fresh = record.with_report(report, search.profile)
            diffs.extend(_diffs(record, fresh))
            updated.append(fresh)

    if violations:
        raise GoldenThresholdError("golden thresholds violated:\n" + "\n".join(violations))
    _LOGGER.info("Golden check: %d records, %d diffs", len(records), len(diffs))
    if not check_only:
        write_goldens(path, updated)
    return diffs
