"""JSON-safe dumps of one evaluation or simulation."""

from __future__ import annotations

from dataclasses import asdict
import math
from typing import Any

from .attack_model import AttackVectors
from .channel_model import ChannelStatistics, ProtocolParams, SampleCounts
from .const import PACKAGE_NAME, VERSION
from .finite_key import KeyRateReport, SearchConfig, SecurityEpsilons
from .mc_sim import BucketConcordance, SimulationOutcome, empirical_qber


def _finite(value: float) -> float | None:
    """JSON has no inf/nan."""
    return value if math.isfinite(value) else None


def get_rate_diagnostics(
    params: ProtocolParams,
    q: float | None,
    stats: ChannelStatistics,
    counts: SampleCounts,
    eps: SecurityEpsilons,
    search: SearchConfig,
    report: KeyRateReport,
    options: dict[str, Any],
) -> dict[str, Any]:
    """Return diagnostics for one key-rate evaluation."""
    config_data = {
        "package": PACKAGE_NAME,
        "version": VERSION,
        "options": options,
        "eps": asdict(eps),
        "search": {**asdict(search), "lambda_form": str(search.lambda_form)},
    }

    protocol_data = {
        "alpha": params.alpha,
        "beta": params.beta,
        "penc": params.p_enc,
        "n_signals": params.n_signals,
        "q": q,
    }

    report_data = {
        "s_xi": report.s_xi,
        "qber": report.qber,
        "leak_per_bit": report.leak_per_bit,
        "delta_bits": report.delta_bits,
        "n_raw": report.n_raw,
        "r_prime": report.r_prime,
        "r_effective": report.r_effective,
        "asymptotic": report.asymptotic,
    }

    worst = report.worst_case
    worst_data = None
    if worst is not None:
        worst_data = {
            "points": worst.points,
            "infeasible": worst.infeasible,
            "infeasible_fraction": worst.infeasible_fraction,
            "xi": list(worst.xi_values),
            "statistics": worst.worst_stats.as_dict() if worst.worst_stats else None,
            "optimal_free_var": _finite(worst.optimal_free_var),
        }

    return {
        "config": config_data,
        "protocol": protocol_data,
        "statistics": stats.as_dict(),
        "counts": counts.as_dict(),
        "report": report_data,
        "worst_case": worst_data,
    }


def get_simulation_diagnostics(
    outcome: SimulationOutcome,
    params: ProtocolParams,
    channel: float | AttackVectors,
    buckets: list[BucketConcordance],
) -> dict[str, Any]:
    """Return the simulate command's JSON document."""
    counts = outcome.observed_counts
    qber = empirical_qber(outcome) if counts.conclusive else None
    channel_data: dict[str, Any] = (
        {"attack": channel.to_dict()}
        if isinstance(channel, AttackVectors)
        else {"q": channel}
    )
    return {
        "version": VERSION,
        "rounds": outcome.rounds,
        "seed": outcome.seed,
        "protocol": {"alpha": params.alpha, "penc": params.p_enc},
        "channel": channel_data,
        "observed_counts": counts.as_dict(),
        "empirical_stats": outcome.empirical_stats.as_dict(),
        "raw_key_errors": outcome.raw_key_errors,
        "empirical_qber": qber,
        "concordance": [
            {
                "name": b.name,
                "observed": b.observed,
                "expected": b.expected,
                "sigma": b.sigma,
                "z": _finite(b.z),
            }
            for b in buckets
        ],
    }
