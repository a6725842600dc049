"""Dense complex operator algebra: observables, states, and measurement contexts.

All operators are small (d <= 64) square complex matrices carried as numpy
arrays.  Every type is immutable after construction and every operation is a
pure function, so everything here is safe to share across threads.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    IncompleteContext,
    NotHermitian,
    ZeroProbabilityBranch,
)

__all__ = [
    "default_tol",
    "is_hermitian",
    "Observable",
    "spectral_decompose",
    "DensityOperator",
    "MeasurementContext",
    "context_from_kraus",
    "outcome_probabilities",
    "state_update",
    "polar_decompose",
    "minimal_disturbance_check",
    "pure_state_density",
    "operator_norm",
]

#: Pauli matrices, used throughout the qubit scenarios.
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


def default_tol() -> float:
    """Global absolute tolerance floor, overridable via CVTOOL_DEFAULT_TOL."""
    value = os.environ.get("CVTOOL_DEFAULT_TOL")
    if value:
        return float(value)
    return 1e-10


def _as_square(M) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M.view(float))):
        raise ValueError("matrix entries must be finite")
    return M


def operator_norm(M) -> float:
    """Spectral norm (largest singular value)."""
    return float(np.linalg.norm(np.asarray(M, dtype=complex), 2))


def is_hermitian(M, tol: float | None = None) -> bool:
    """True iff max |M - M†| entry is within ``tol``."""
    M = _as_square(M)
    if tol is None:
        tol = default_tol()
    return bool(np.max(np.abs(M - M.conj().T)) <= tol)


def pure_state_density(psi) -> "DensityOperator":
    """Density operator |psi><psi| of a (normalized on entry) state vector."""
    psi = np.asarray(psi, dtype=complex).ravel()
    psi = psi / np.linalg.norm(psi)
    return DensityOperator(np.outer(psi, psi.conj()))


@dataclass(frozen=True)
class Observable:
    """Hermitian operator together with its spectral decomposition.

    ``eigenvalues`` are the distinct eigenvalues, sorted in decreasing order;
    ``projectors[k]`` projects onto the full (possibly degenerate) eigenspace
    of ``eigenvalues[k]``.
    """

    matrix: np.ndarray
    eigenvalues: np.ndarray
    projectors: tuple

    def __post_init__(self):
        object.__setattr__(self, "matrix", _as_square(self.matrix))
        object.__setattr__(
            self, "eigenvalues", np.asarray(self.eigenvalues, dtype=float)
        )
        object.__setattr__(
            self,
            "projectors",
            tuple(np.asarray(P, dtype=complex) for P in self.projectors),
        )

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def spectral_decompose(M, group_tol: float | None = None) -> Observable:
    """Spectral decomposition of a Hermitian matrix with degeneracy grouping.

    Eigenvalues closer than ``group_tol`` (default 1e-8 * ||M||) are merged
    into a single degenerate eigenspace projector.  Raises :class:`NotHermitian`
    if ``M`` fails the Hermiticity check.
    """
    M = _as_square(M)
    scale = max(operator_norm(M), 1.0)
    if not is_hermitian(M, default_tol() * scale):
        raise NotHermitian("matrix is not Hermitian within tolerance")
    if group_tol is None:
        group_tol = 1e-8 * scale
    w, V = np.linalg.eigh((M + M.conj().T) / 2)
    # group ascending eigenvalues, then report in decreasing order
    groups: list[list[int]] = [[0]]
    for i in range(1, len(w)):
        if w[i] - w[groups[-1][-1]] <= group_tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    eigenvalues = []
    projectors = []
    for idx in reversed(groups):
        cols = V[:, idx]
        projectors.append(cols @ cols.conj().T)
        eigenvalues.append(float(np.mean(w[idx])))
    return Observable(M, np.array(eigenvalues), tuple(projectors))


@dataclass(frozen=True)
class DensityOperator:
    """Hermitian, positive-semidefinite, unit-trace operator."""

    matrix: np.ndarray

    def __post_init__(self):
        M = _as_square(self.matrix)
        scale = max(operator_norm(M), 1.0)
        tol = default_tol() * scale
        if not is_hermitian(M, tol):
            raise NotHermitian("density operator must be Hermitian")
        w = np.linalg.eigvalsh((M + M.conj().T) / 2)
        if w.min() < -tol:
            raise ValueError(f"density operator not PSD (min eigenvalue {w.min():.3e})")
        tr = float(np.trace(M).real)
        if abs(tr - 1.0) > tol:
            raise ValueError(f"density operator trace {tr} != 1")
        object.__setattr__(self, "matrix", M)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class MeasurementContext:
    """Ordered Kraus operators {M_j} and the POVM {E_j = M_j† M_j} they generate."""

    kraus: tuple
    povm: tuple = field(default=())

    def __post_init__(self):
        kraus = tuple(_as_square(M) for M in self.kraus)
        object.__setattr__(self, "kraus", kraus)
        if not self.povm:
            object.__setattr__(
                self, "povm", tuple(M.conj().T @ M for M in kraus)
            )

    @property
    def n_outcomes(self) -> int:
        return len(self.kraus)

    @property
    def dim(self) -> int:
        return self.kraus[0].shape[0]

    def kraus_stack(self) -> np.ndarray:
        """All Kraus operators as a (N, d, d) array."""
        return np.stack(self.kraus)

    def povm_stack(self) -> np.ndarray:
        """All POVM elements as a (N, d, d) array."""
        return np.stack(self.povm)


def context_from_kraus(kraus, tol: float | None = None) -> MeasurementContext:
    """Build a MeasurementContext, verifying POVM completeness to ``tol``."""
    kraus = [_as_square(M) for M in kraus]
    if not kraus:
        raise DimensionMismatch("need at least one Kraus operator")
    d = kraus[0].shape[0]
    if any(M.shape[0] != d for M in kraus):
        raise DimensionMismatch("Kraus operators must share one dimension")
    if tol is None:
        tol = default_tol()
    total = sum(M.conj().T @ M for M in kraus)
    defect = operator_norm(total - np.eye(d))
    if defect > tol:
        raise IncompleteContext(defect)
    return MeasurementContext(tuple(kraus))


def outcome_probabilities(ctx: MeasurementContext, rho: DensityOperator) -> np.ndarray:
    """Outcome probabilities P_j = Tr[E_j rho], clamped to [0, 1]."""
    if ctx.dim != rho.dim:
        raise DimensionMismatch("context and state dimensions differ")
    E = ctx.povm_stack()
    probs = np.einsum("jab,ba->j", E, rho.matrix).real
    total = probs.sum()
    if abs(total - 1.0) > 1e-10:
        raise IncompleteContext(abs(total - 1.0))
    return np.clip(probs, 0.0, 1.0)


def state_update(M, rho: DensityOperator, tol: float = 1e-12):
    """Kraus update rho -> M rho M† / p with branch probability p = Tr[M rho M†]."""
    M = _as_square(M)
    if M.shape[0] != rho.dim:
        raise DimensionMismatch("operator and state dimensions differ")
    out = M @ rho.matrix @ M.conj().T
    p = float(np.trace(out).real)
    if p <= tol:
        raise ZeroProbabilityBranch(f"branch probability {p:.3e}")
    return DensityOperator(out / p), p


def polar_decompose(M, rank_tol: float = 1e-12):
    """Polar factorization M = U P with P = (M†M)^(1/2) PSD and U unitary.

    On the kernel of P the unitary is completed deterministically by
    orthonormalizing identity columns against the range of M.
    """
    M = _as_square(M)
    d = M.shape[0]
    W, s, Vh = np.linalg.svd(M)
    P = (Vh.conj().T * s) @ Vh
    cutoff = rank_tol * (s[0] if s.size and s[0] > 0 else 1.0)
    rank = int(np.sum(s > cutoff))
    U = W[:, :rank] @ Vh[:rank]
    if rank < d:
        # complete the range basis from identity columns, Gram-Schmidt style
        basis = [W[:, i] for i in range(rank)]
        extra = []
        for i in range(d):
            v = np.zeros(d, dtype=complex)
            v[i] = 1.0
            for b in basis:
                v = v - b * (b.conj() @ v)
            nrm = np.linalg.norm(v)
            if nrm > 1e-8:
                v = v / nrm
                basis.append(v)
                extra.append(v)
            if len(basis) == d:
                break
        kernel = np.stack(extra, axis=1)
        U = U + kernel @ Vh[rank:]
    return U, P


def minimal_disturbance_check(
    ctx: MeasurementContext, rho: DensityOperator, tol: float | None = None
) -> bool:
    """True iff every polar unitary of the Kraus operators leaves rho invariant."""
    if tol is None:
        tol = default_tol()
    for M in ctx.kraus:
        U, _ = polar_decompose(M)
        if operator_norm(U @ rho.matrix @ U.conj().T - rho.matrix) > tol:
            return False
    return True
