"""Round-by-round Monte Carlo simulation of the protocol.

Each shard of `SHARD_ROUNDS` rounds draws from its own Philox stream seeded by
`SeedSequence(seed, spawn_key=(shard,))`, so results do not depend on how
shards are distributed over workers. Per round the uniforms are drawn in a
fixed order: key-round flag, Alice's state, Bob's basis, channel, outcome.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from functools import partial
import logging
import math

import numpy as np
import numpy.typing as npt

from .attack_model import AttackVectors, induced_statistics
from .channel_model import (
    STAT_FIELDS,
    ChannelStatistics,
    ProtocolParams,
    SampleCounts,
    check_noise,
    conclusive_count_from_statistics,
    counts_from_statistics,
    symmetric_statistics,
)
from .const import CONCORDANCE_SIGMAS, DEFAULT_JOBS, MAX_SEED, SHARD_ROUNDS
from .exceptions import InvalidInputError

_LOGGER = logging.getLogger(__name__)

type Channel = float | AttackVectors

# Alice's states
STATE_ZERO = 0
STATE_ALPHA = 1
STATE_ONE = 2

# Tally layout: six hit counts, six trial counts, conclusive, raw errors, key rounds.
_HITS = slice(0, 6)
_TRIALS = slice(6, 12)
_CONCLUSIVE = 12
_ERRORS = 13
_KEY_ROUNDS = 14
_TALLY_SIZE = 15


@dataclass(frozen=True, slots=True)
class ObservedCounts:
    """Integer counts per statistic bucket, with the number of trials behind each."""

    c01: int
    c10: int
    c0a: int
    c1a: int
    ca0: int
    ca_abar: int
    n01: int
    n10: int
    n0a: int
    n1a: int
    na0: int
    na_abar: int
    conclusive: int
    key_rounds: int

    def hits(self) -> tuple[int, ...]:
        return (self.c01, self.c10, self.c0a, self.c1a, self.ca0, self.ca_abar)

    def trials(self) -> tuple[int, ...]:
        return (self.n01, self.n10, self.n0a, self.n1a, self.na0, self.na_abar)

    def as_sample_counts(self) -> SampleCounts:
        c01, c10, c0a, c1a, ca0, ca_abar = (float(c) for c in self.hits())
        return SampleCounts(c01, c10, c0a, c1a, ca0, ca_abar, float(self.conclusive))

    def as_dict(self) -> dict[str, int]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True, slots=True)
class SimulationOutcome:
    observed_counts: ObservedCounts
    empirical_stats: ChannelStatistics
    raw_key_errors: int
    rounds: int
    seed: int


@dataclass(frozen=True, slots=True)
class BucketConcordance:
    """Observed vs. expected count of one bucket, with its binomial z-score."""

    name: str
    observed: int
    expected: float
    sigma: float
    z: float

    @property
    def within(self) -> bool:
        return abs(self.z) <= CONCORDANCE_SIGMAS


def outcome_table(params: ProtocolParams, channel: Channel) -> npt.NDArray[np.float64]:
    """Return Pr(outcome |1⟩ or |ᾱ⟩) indexed by [state, basis], basis 0 = Z and 1 = A.

    For the depolarizing channel this is the noiseless table; the mixing step
    is applied per round by `_run_shard`.
    """
    a2 = params.alpha * params.alpha
    if isinstance(channel, AttackVectors):
        s = induced_statistics(channel, params.alpha)
        return np.array(
            [
                [s.p01, 1.0 - s.p0a],
                [1.0 - s.pa0, s.pa_abar],
                [1.0 - s.p10, 1.0 - s.p1a],
            ]
        )
    return np.array([[0.0, 1.0 - a2], [1.0 - a2, 0.0], [1.0, a2]])


def _run_shard(
    shard: int,
    rounds: int,
    seed: int,
    p_enc: float,
    table: npt.NDArray[np.float64],
    mix_probability: float,
) -> npt.NDArray[np.int64]:
    start = shard * SHARD_ROUNDS
    size = min(SHARD_ROUNDS, rounds - start)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(shard,))))

    key = rng.random(size) < p_enc
    alice_alpha = rng.random(size) < 0.5
    basis_a = rng.random(size) < 0.5
    u = rng.random(size)
    v = rng.random(size)

    state = np.where(key, np.where(alice_alpha, STATE_ALPHA, STATE_ZERO), STATE_ONE)
    prob_one = table[state, basis_a.astype(np.intp)]
    prob_one = np.where(u < mix_probability, 0.5, prob_one)
    out_one = v < prob_one

    s0, s1, s2 = state == STATE_ZERO, state == STATE_ALPHA, state == STATE_ONE
    z = ~basis_a
    selectors = (
        (s0 & z, out_one),  # P01
        (s2 & z, ~out_one),  # P10
        (s0 & basis_a, ~out_one),  # P0α
        (s2 & basis_a, ~out_one),  # P1α
        (s1 & z, ~out_one),  # Pα0
        (s1 & basis_a, out_one),  # Pαᾱ
    )
    tally = np.zeros(_TALLY_SIZE, dtype=np.int64)
    for i, (trial, hit) in enumerate(selectors):
        tally[_HITS.start + i] = np.count_nonzero(trial & hit)
        tally[_TRIALS.start + i] = np.count_nonzero(trial)
    tally[_CONCLUSIVE] = np.count_nonzero(key & out_one)
    tally[_ERRORS] = tally[0] + tally[5]
    tally[_KEY_ROUNDS] = np.count_nonzero(key)
    return tally


def simulate(
    params: ProtocolParams,
    channel: Channel,
    rounds: int,
    seed: int,
    jobs: int = DEFAULT_JOBS,
) -> SimulationOutcome:
    """Simulate `rounds` protocol rounds under a depolarizing noise level or an attack."""
    if rounds < 1:
        raise InvalidInputError(f"rounds must be ≥ 1, got {rounds!r}")
    if not 0 <= seed <= MAX_SEED:
        raise InvalidInputError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    if isinstance(channel, AttackVectors):
        mix_probability = 0.0
    else:
        check_noise(channel)
        mix_probability = 2.0 * channel
    table = outcome_table(params, channel)

    shards = range(math.ceil(rounds / SHARD_ROUNDS))
    worker = partial(
        _run_shard,
        rounds=rounds,
        seed=seed,
        p_enc=params.p_enc,
        table=table,
        mix_probability=mix_probability,
    )
    if jobs > 1 and len(shards) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            tallies = list(executor.map(worker, shards))
    else:
        tallies = [worker(shard) for shard in shards]
    total = np.sum(tallies, axis=0)
    _LOGGER.debug("Merged %d shards for %d rounds (seed %d)", len(shards), rounds, seed)

    hits = [int(c) for c in total[_HITS]]
    trials = [int(c) for c in total[_TRIALS]]
    counts = ObservedCounts(
        *hits,
        *trials,
        conclusive=int(total[_CONCLUSIVE]),
        key_rounds=int(total[_KEY_ROUNDS]),
    )
    frequencies = {
        name: (h / n if n else 0.0)
        for name, h, n in zip(STAT_FIELDS, hits, trials, strict=True)
    }
    return SimulationOutcome(
        observed_counts=counts,
        empirical_stats=ChannelStatistics(**frequencies),
        raw_key_errors=int(total[_ERRORS]),
        rounds=rounds,
        seed=seed,
    )


def empirical_qber(outcome: SimulationOutcome) -> float:
    """Return the raw-key error fraction over conclusive key rounds."""
    conclusive = outcome.observed_counts.conclusive
    if conclusive < 1:
        raise InvalidInputError("no conclusive key rounds; QBER undefined")
    return outcome.raw_key_errors / conclusive


def _bucket(name: str, observed: int, expected: float, rounds: int) -> BucketConcordance:
    p = min(max(expected / rounds, 0.0), 1.0)
    sigma = math.sqrt(rounds * p * (1.0 - p))
    if sigma > 0.0:
        z = (observed - expected) / sigma
    else:
        z = 0.0 if observed == round(expected) else math.inf
    return BucketConcordance(name=name, observed=observed, expected=expected, sigma=sigma, z=z)


def concordance(
    outcome: SimulationOutcome, params: ProtocolParams, channel: Channel
) -> list[BucketConcordance]:
    """Compare observed bucket counts with the analytic expectations of the channel.

    The conclusive count is compared with both the raw-key count formula
    (`c_k`) and the summed conclusive-outcome count (`c_k_summed`).
    """
    n = outcome.rounds
    planned = ProtocolParams(alpha=params.alpha, p_enc=params.p_enc, n_signals=float(n))
    if isinstance(channel, AttackVectors):
        stats = induced_statistics(channel, params.alpha)
    else:
        stats = symmetric_statistics(channel, params.alpha)
    expected = counts_from_statistics(planned, stats)
    observed = outcome.observed_counts
    rows = [
        _bucket(name, hit, getattr(expected, name), n)
        for name, hit in zip(
            ("c01", "c10", "c0a", "c1a", "ca0", "ca_abar"), observed.hits(), strict=True
        )
    ]
    c_k = _bucket("c_k", observed.conclusive, expected.c_k, n)
    summed_expected = conclusive_count_from_statistics(planned, stats)
    summed = _bucket("c_k_summed", observed.conclusive, summed_expected, n)
    if not c_k.within:
        _LOGGER.warning(
            "Conclusive count %d departs from c_k formula (z=%.2f); summed-outcome z=%.2f",
            observed.conclusive,
            c_k.z,
            summed.z,
        )
    return [*rows, c_k, summed]
