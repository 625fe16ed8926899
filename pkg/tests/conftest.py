"""Fixtures for key-rate tests."""

from __future__ import annotations

import numpy as np
import pytest

from b92_keyrate.attack_model import AttackVectors, random_attack
from b92_keyrate.channel_model import ChannelStatistics, ProtocolParams, symmetric_statistics
from b92_keyrate.finite_key import SearchConfig, SecurityEpsilons

TEST_SEED = 20240917
TEST_ALPHA = 0.6
TEST_PENC = 0.8
TEST_Q = 0.05
RANDOM_ATTACKS = 150


@pytest.fixture
def rng() -> np.random.Generator:
    """Return a seeded generator."""
    return np.random.Generator(np.random.Philox(TEST_SEED))


@pytest.fixture(scope="session")
def random_attacks() -> list[tuple[AttackVectors, float]]:
    """Return seeded Haar-random attacks paired with an α in [0.05, 0.95]."""
    gen = np.random.Generator(np.random.Philox(TEST_SEED))
    out = []
    for _ in range(RANDOM_ATTACKS):
        attack = random_attack(gen)
        out.append((attack, float(gen.uniform(0.05, 0.95))))
    return out


@pytest.fixture
def eps() -> SecurityEpsilons:
    """Return the default security budget."""
    return SecurityEpsilons()


@pytest.fixture
def fast_search() -> SearchConfig:
    """Return the fast profile, sequential."""
    return SearchConfig(jobs=1)


@pytest.fixture
def params() -> ProtocolParams:
    """Return protocol parameters at α=0.6, P_enc=0.8, N=1e8."""
    return ProtocolParams(alpha=TEST_ALPHA, p_enc=TEST_PENC, n_signals=1e8)


@pytest.fixture
def noisy_stats() -> ChannelStatistics:
    """Return depolarizing statistics at q=0.05, α=0.6."""
    return symmetric_statistics(TEST_Q, TEST_ALPHA)


@pytest.fixture
def noiseless_stats() -> ChannelStatistics:
    """Return noiseless statistics at α=0.6."""
    return symmetric_statistics(0.0, TEST_ALPHA)
