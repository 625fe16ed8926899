"""Dense complex linear algebra for small (dim ≤ 16) vectors and Hermitian matrices."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
import logging
import math

import numpy as np
import numpy.typing as npt
from scipy.special import entr

from .const import (
    HERMITIAN_TOL,
    JACOBI_MAX_SWEEPS,
    JACOBI_OFFDIAG_TOL,
    MAX_DIM,
    PSD_TOL,
    TRACE_TOL,
)
from .exceptions import ConvergenceError, InvalidInputError, NonHermitianError
from .helpers import LN2

_LOGGER = logging.getLogger(__name__)

type ComplexArray = npt.NDArray[np.complex128]


def _frozen(values: npt.ArrayLike) -> ComplexArray:
    arr = np.array(values, dtype=np.complex128)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ComplexVector:
    """Immutable coordinate vector of complex amplitudes."""

    entries: ComplexArray

    def __post_init__(self) -> None:
        arr = _frozen(self.entries)
        if arr.ndim != 1 or not 1 <= arr.shape[0] <= MAX_DIM:
            raise InvalidInputError(f"vector dimension must be in [1, {MAX_DIM}], got {arr.shape}")
        object.__setattr__(self, "entries", arr)

    @classmethod
    def of(cls, values: Sequence[complex]) -> ComplexVector:
        return cls(np.asarray(values, dtype=np.complex128))

    @classmethod
    def zeros(cls, dim: int) -> ComplexVector:
        return cls(np.zeros(dim, dtype=np.complex128))

    @classmethod
    def basis(cls, dim: int, index: int) -> ComplexVector:
        arr = np.zeros(dim, dtype=np.complex128)
        arr[index] = 1.0
        return cls(arr)

    @property
    def dim(self) -> int:
        return int(self.entries.shape[0])

    def norm_squared(self) -> float:
        return float(np.vdot(self.entries, self.entries).real)

    def __add__(self, other: ComplexVector) -> ComplexVector:
        _check_same_dim(self, other)
        return ComplexVector(self.entries + other.entries)

    def __sub__(self, other: ComplexVector) -> ComplexVector:
        _check_same_dim(self, other)
        return ComplexVector(self.entries - other.entries)

    def __mul__(self, scalar: complex) -> ComplexVector:
        return ComplexVector(self.entries * scalar)

    __rmul__ = __mul__

    def allclose(self, other: ComplexVector, atol: float = 1e-10) -> bool:
        return self.dim == other.dim and bool(np.allclose(self.entries, other.entries, atol=atol))


@dataclass(frozen=True, eq=False)
class HermitianMatrix:
    """Immutable Hermitian matrix; Hermiticity is checked on construction."""

    entries: ComplexArray

    def __post_init__(self) -> None:
        arr = _frozen(self.entries)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or not 1 <= arr.shape[0] <= MAX_DIM:
            raise InvalidInputError(f"matrix must be square with dim ≤ {MAX_DIM}, got {arr.shape}")
        deviation = float(np.max(np.abs(arr - arr.conj().T)))
        if deviation > HERMITIAN_TOL:
            raise NonHermitianError(f"matrix is not Hermitian (max deviation {deviation:.3e})")
        object.__setattr__(self, "entries", arr)

    @classmethod
    def projector(cls, vector: ComplexVector) -> HermitianMatrix:
        """Return the (unnormalized) projector |v⟩⟨v|."""
        return cls(np.outer(vector.entries, vector.entries.conj()))

    @classmethod
    def diagonal(cls, values: Sequence[float]) -> HermitianMatrix:
        return cls(np.diag(np.asarray(values, dtype=np.complex128)))

    @property
    def dim(self) -> int:
        return int(self.entries.shape[0])

    def trace(self) -> float:
        return float(np.trace(self.entries).real)

    def conjugated_by(self, unitary: npt.ArrayLike) -> HermitianMatrix:
        """Return U ρ U†."""
        u = np.asarray(unitary, dtype=np.complex128)
        out = u @ self.entries @ u.conj().T
        return HermitianMatrix((out + out.conj().T) / 2.0)

    def __add__(self, other: HermitianMatrix) -> HermitianMatrix:
        if self.dim != other.dim:
            raise InvalidInputError(f"dimension mismatch: {self.dim} vs {other.dim}")
        return HermitianMatrix(self.entries + other.entries)

    def __mul__(self, scalar: float) -> HermitianMatrix:
        return HermitianMatrix(self.entries * scalar)

    __rmul__ = __mul__


def _check_same_dim(a: ComplexVector, b: ComplexVector) -> None:
    if a.dim != b.dim:
        raise InvalidInputError(f"dimension mismatch: {a.dim} vs {b.dim}")


def inner_product(a: ComplexVector, b: ComplexVector) -> complex:
    """Return ⟨a|b⟩ = Σ conj(a_i)·b_i."""
    _check_same_dim(a, b)
    return complex(np.vdot(a.entries, b.entries))


def _off_diagonal_norm(a: ComplexArray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.linalg.norm(off))


def jacobi_eigh(m: HermitianMatrix) -> tuple[npt.NDArray[np.float64], ComplexArray]:
    """Diagonalize a Hermitian matrix with cyclic complex Jacobi rotations.

    Each rotation first removes the phase of the pivot a_pq, then applies the
    real symmetric Jacobi rotation that zeroes it.

    Returns:
        Eigenvalues in non-increasing order and the matching eigenvectors as
        columns, so that m = V diag(w) V†.

    Raises:
        ConvergenceError: off-diagonal norm still above tolerance after the
            maximum number of sweeps.

    """
    a = np.array(m.entries, dtype=np.complex128)
    n = m.dim
    v = np.eye(n, dtype=np.complex128)

    for sweep in range(JACOBI_MAX_SWEEPS + 1):
        off = _off_diagonal_norm(a)
        if off <= JACOBI_OFFDIAG_TOL:
            _LOGGER.debug("Jacobi converged after %d sweeps (dim %d)", sweep, n)
            break
        if sweep == JACOBI_MAX_SWEEPS:
            raise ConvergenceError(
                f"Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps (off-norm {off:.3e})"
            )
        for p in range(n - 1):
            for q in range(p + 1, n):
                magnitude = abs(a[p, q])
                if magnitude == 0.0:
                    continue
                phase = a[p, q] / magnitude
                theta = (a[q, q].real - a[p, p].real) / (2.0 * magnitude)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot = np.array(
                    [[c, s], [-s * phase.conjugate(), c * phase.conjugate()]],
                    dtype=np.complex128,
                )
                idx = [p, q]
                a[:, idx] = a[:, idx] @ rot
                a[idx, :] = rot.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                v[:, idx] = v[:, idx] @ rot

    eigenvalues = np.real(np.diag(a)).copy()
    order = np.argsort(-eigenvalues, kind="stable")
    return eigenvalues[order], v[:, order]


def hermitian_eigenvalues(m: HermitianMatrix) -> tuple[float, ...]:
    """Return all eigenvalues of m in non-increasing order."""
    eigenvalues, _ = jacobi_eigh(m)
    return tuple(float(x) for x in eigenvalues)


def von_neumann_entropy(m: HermitianMatrix) -> float:
    """Return −Σ λ log2 λ over the spectrum of a density matrix.

    Raises:
        InvalidInputError: an eigenvalue below −1e-10 or a trace outside
            1 ± 1e-9.

    """
    trace = m.trace()
    if abs(trace - 1.0) > TRACE_TOL:
        raise InvalidInputError(f"density matrix trace {trace!r} is not 1")
    eigenvalues, _ = jacobi_eigh(m)
    if eigenvalues.min() < -PSD_TOL:
        raise InvalidInputError(f"density matrix has negative eigenvalue {eigenvalues.min():.3e}")
    clamped = np.clip(eigenvalues, 0.0, None)
    return float(np.sum(entr(clamped)) / LN2)
