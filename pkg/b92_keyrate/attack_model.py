"""Concrete collective attacks, their induced statistics and exact conditional entropy."""

from __future__ import annotations

from dataclasses import dataclass
import logging
import math
from typing import Any

import numpy as np
from scipy.stats import unitary_group

from .channel_model import ChannelStatistics, check_alpha, check_noise
from .const import ANCILLA_DIM, MIN_NORMALIZATION, STATISTIC_TOL, UNITARITY_TOL
from .estimation import EstimatedOverlaps
from .exceptions import InvalidInputError, UndefinedEntropyError, UnitarityError
from .linalg_small import ComplexVector, HermitianMatrix, inner_product, von_neumann_entropy

_LOGGER = logging.getLogger(__name__)

_VECTOR_NAMES = ("e0", "e1", "e2", "e3")


@dataclass(frozen=True, eq=False)
class AttackVectors:
    """Eve's ancilla states for U|0,χ⟩ = |0,e0⟩+|1,e1⟩ and U|1,χ⟩ = |0,e2⟩+|1,e3⟩.

    Unitarity is checked on construction; violating attacks are rejected,
    never renormalized.
    """

    e0: ComplexVector
    e1: ComplexVector
    e2: ComplexVector
    e3: ComplexVector

    def __post_init__(self) -> None:
        dims = {v.dim for v in self.vectors()}
        if len(dims) != 1:
            raise InvalidInputError(f"ancilla vectors must share a dimension, got {sorted(dims)}")
        if self.dim > ANCILLA_DIM:
            raise InvalidInputError(f"ancilla dimension must be ≤ {ANCILLA_DIM}, got {self.dim}")

        row0 = self.e0.norm_squared() + self.e1.norm_squared()
        row1 = self.e2.norm_squared() + self.e3.norm_squared()
        cross = inner_product(self.e0, self.e2) + inner_product(self.e1, self.e3)
        if abs(row0 - 1.0) > UNITARITY_TOL:
            raise UnitarityError(f"⟨e0|e0⟩+⟨e1|e1⟩ = {row0!r}, expected 1")
        if abs(row1 - 1.0) > UNITARITY_TOL:
            raise UnitarityError(f"⟨e2|e2⟩+⟨e3|e3⟩ = {row1!r}, expected 1")
        if abs(cross) > UNITARITY_TOL:
            raise UnitarityError(f"⟨e0|e2⟩+⟨e1|e3⟩ = {cross!r}, expected 0")

    @property
    def dim(self) -> int:
        return self.e0.dim

    def vectors(self) -> tuple[ComplexVector, ComplexVector, ComplexVector, ComplexVector]:
        return (self.e0, self.e1, self.e2, self.e3)

    def to_dict(self) -> dict[str, list[list[float]]]:
        """Serialize as {name: [[re, im], ...]} for JSON."""
        return {
            name: [[float(z.real), float(z.imag)] for z in vec.entries]
            for name, vec in zip(_VECTOR_NAMES, self.vectors(), strict=True)
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> AttackVectors:
        try:
            vectors = [
                ComplexVector.of([complex(re, im) for re, im in data[name]])
                for name in _VECTOR_NAMES
            ]
        except (KeyError, TypeError, ValueError) as err:
            raise InvalidInputError(f"malformed attack description: {err}") from err
        return cls(*vectors)


@dataclass(frozen=True, eq=False)
class PostSelectedState:
    """Normalized classical-quantum state ρ_AE conditioned on a conclusive key round."""

    rho_ae: HermitianMatrix
    m_norm: float

    @property
    def ancilla_dim(self) -> int:
        return self.rho_ae.dim // 2

    def rho_e(self) -> HermitianMatrix:
        d = self.ancilla_dim
        block = self.rho_ae.entries
        return HermitianMatrix(block[:d, :d] + block[d:, d:])

    def key_bit_probability(self) -> float:
        """Return Pr(A = 0) on the conclusive rounds."""
        d = self.ancilla_dim
        return float(np.trace(self.rho_ae.entries[:d, :d]).real)


def identity_attack(dim: int = ANCILLA_DIM) -> AttackVectors:
    """Return the attack that leaves the qubit untouched."""
    chi = ComplexVector.basis(dim, 0)
    zero = ComplexVector.zeros(dim)
    return AttackVectors(e0=chi, e1=zero, e2=zero, e3=chi)


def bit_flip_attack(dim: int = ANCILLA_DIM) -> AttackVectors:
    """Return the attack that applies X to every qubit."""
    chi = ComplexVector.basis(dim, 0)
    zero = ComplexVector.zeros(dim)
    return AttackVectors(e0=zero, e1=chi, e2=chi, e3=zero)


def depolarizing_attack(q: float) -> AttackVectors:
    """Return an isometric dilation of the depolarizing channel with noise q.

    Kraus operators √(1−3q/2)·I, √(q/2)·X, √(q/2)·Y and √(q/2)·Z, one ancilla
    basis state each.
    """
    check_noise(q)
    a = math.sqrt(1.0 - 1.5 * q)
    c = math.sqrt(q / 2.0)
    return AttackVectors(
        e0=ComplexVector.of([a, 0, 0, c]),
        e1=ComplexVector.of([0, c, 1j * c, 0]),
        e2=ComplexVector.of([0, c, -1j * c, 0]),
        e3=ComplexVector.of([a, 0, 0, -c]),
    )


def random_attack(rng: np.random.Generator) -> AttackVectors:
    """Sample an attack from a Haar-random unitary on qubit ⊗ ancilla.

    The columns for |0,χ⟩ and |1,χ⟩ (indices 0 and ANCILLA_DIM) give the four
    ancilla vectors.
    """
    d = ANCILLA_DIM
    u = unitary_group.rvs(2 * d, random_state=rng)
    col0 = u[:, 0]
    col1 = u[:, d]
    return AttackVectors(
        e0=ComplexVector(col0[:d]),
        e1=ComplexVector(col0[d:]),
        e2=ComplexVector(col1[:d]),
        e3=ComplexVector(col1[d:]),
    )


def f_vectors(attack: AttackVectors, alpha: float) -> tuple[ComplexVector, ComplexVector]:
    """Return (f0, f1) with U|α,χ⟩ = |α,f0⟩ + |ᾱ,f1⟩."""
    check_alpha(alpha)
    beta = math.sqrt(1.0 - alpha * alpha)
    e0, e1, e2, e3 = (v.entries for v in attack.vectors())
    ab = alpha * beta
    f0 = alpha * alpha * e0 + ab * e2 + ab * e1 + beta * beta * e3
    f1 = ab * e0 + beta * beta * e2 - alpha * alpha * e1 - ab * e3
    return ComplexVector(f0), ComplexVector(f1)


def g_vectors(
    attack: AttackVectors, alpha: float
) -> tuple[ComplexVector, ComplexVector, ComplexVector, ComplexVector]:
    """Return Eve's conditional states on conclusive rounds: (g0^0, g0^1, g1^0, g1^1).

    The subscript is Alice's key bit; the superscript pairs Bob's Z-basis
    outcome |1⟩ for bit 0 with his A-basis outcome |ᾱ⟩ for bit 1, and vice
    versa.
    """
    beta = math.sqrt(1.0 - alpha * alpha)
    _, f1 = f_vectors(attack, alpha)
    g00 = attack.e1
    g01 = beta * attack.e0 - alpha * attack.e1
    g11 = alpha * attack.e1 + beta * attack.e3
    return g00, g01, f1, g11


def induced_statistics(attack: AttackVectors, alpha: float) -> ChannelStatistics:
    """Return the six statistics the attack produces on Bob's measurements."""
    check_alpha(alpha)
    beta = math.sqrt(1.0 - alpha * alpha)
    e0, e1, e2, e3 = attack.vectors()
    _, f1 = f_vectors(attack, alpha)
    raw = {
        "p01": e1.norm_squared(),
        "p10": e2.norm_squared(),
        "p0a": (alpha * e0 + beta * e1).norm_squared(),
        "p1a": (alpha * e2 + beta * e3).norm_squared(),
        "pa0": (alpha * e0 + beta * e2).norm_squared(),
        "pa_abar": f1.norm_squared(),
    }
    for name, value in raw.items():
        if not -STATISTIC_TOL <= value <= 1.0 + STATISTIC_TOL:
            raise InvalidInputError(f"induced {name} = {value!r} outside [0, 1]")
    return ChannelStatistics(**{k: min(max(v, 0.0), 1.0) for k, v in raw.items()})


def direct_overlaps(attack: AttackVectors) -> tuple[EstimatedOverlaps, float]:
    """Return the true overlaps of an attack and the true Re⟨e1|e2⟩."""
    e0, e1, e2, e3 = attack.vectors()
    re_e1e2 = inner_product(e1, e2).real
    overlaps = EstimatedOverlaps(
        re_e0e1=inner_product(e0, e1).real,
        re_e2e3=inner_product(e2, e3).real,
        re_e0e2=inner_product(e0, e2).real,
        re_e1e3=inner_product(e1, e3).real,
        sum_e0e3_e1e2=inner_product(e0, e3).real + re_e1e2,
        norms=(e0.norm_squared(), e1.norm_squared(), e2.norm_squared(), e3.norm_squared()),
    )
    return overlaps, re_e1e2


def post_selected_state(attack: AttackVectors, alpha: float) -> PostSelectedState:
    """Build ρ_AE on conclusive key rounds.

    Raises:
        UndefinedEntropyError: no conclusive events (normalization ≤ 1e-12).

    """
    g00, g01, g10, g11 = g_vectors(attack, alpha)
    sigma0 = HermitianMatrix.projector(g00) + HermitianMatrix.projector(g01)
    sigma1 = HermitianMatrix.projector(g10) + HermitianMatrix.projector(g11)
    m_norm = sigma0.trace() + sigma1.trace()
    if m_norm <= MIN_NORMALIZATION:
        raise UndefinedEntropyError("no conclusive events; entropy undefined")

    d = attack.dim
    rho = np.zeros((2 * d, 2 * d), dtype=np.complex128)
    rho[:d, :d] = sigma0.entries
    rho[d:, d:] = sigma1.entries
    return PostSelectedState(rho_ae=HermitianMatrix(rho / m_norm), m_norm=m_norm)


def exact_conditional_entropy(attack: AttackVectors, alpha: float) -> float:
    """Return S(A|E) = S(AE) − S(E) of the post-selected state, in bits."""
    state = post_selected_state(attack, alpha)
    s_ae = von_neumann_entropy(state.rho_ae)
    s_e = von_neumann_entropy(state.rho_e())
    _LOGGER.debug("Exact entropy: S(AE)=%.12f S(E)=%.12f M=%.6f", s_ae, s_e, state.m_norm)
    return s_ae - s_e
