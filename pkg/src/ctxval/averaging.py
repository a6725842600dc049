"""Observable statistics reconstructed from contextual values.

Averages, higher moments via repeated-measurement sequences, postselected
conditioned averages, and the weak-value limit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    NonCommutingContext,
    OrthogonalPostselection,
    ZeroPostselectionProbability,
)
from .operators import (
    DensityOperator,
    MeasurementContext,
    Observable,
    default_tol,
    operator_norm,
    outcome_probabilities,
)

__all__ = [
    "ConditionedSetup",
    "reconstructed_average",
    "sequence_probabilities",
    "moment",
    "cv_moment",
    "conditioned_average",
    "weak_value",
    "aav_weak_value",
]

POSTSELECTION_FLOOR = 1e-12
MAX_MOMENT_ORDER = 8


@dataclass(frozen=True)
class ConditionedSetup:
    """Sequential measurement: a valued first context, then a postselected second."""

    first: MeasurementContext
    cv: np.ndarray
    second: MeasurementContext
    postselect: int

    def __post_init__(self):
        object.__setattr__(self, "cv", np.asarray(self.cv, dtype=float))
        if len(self.cv) != self.first.n_outcomes:
            raise DimensionMismatch("cv length must match first context outcomes")
        if not 0 <= self.postselect < self.second.n_outcomes:
            raise DimensionMismatch("postselection index out of range")
        if self.first.dim != self.second.dim:
            raise DimensionMismatch("first and second context dimensions differ")


def reconstructed_average(cv, ctx: MeasurementContext, rho: DensityOperator) -> float:
    """sum_j alpha_j Tr[E_j rho]; equals Tr[A rho] when cv solves the identity."""
    cv = np.asarray(cv, dtype=float)
    if len(cv) != ctx.n_outcomes:
        raise DimensionMismatch("cv length must match context outcomes")
    return float(cv @ outcome_probabilities(ctx, rho))


def sequence_probabilities(
    ctx: MeasurementContext, rho: DensityOperator, n: int
) -> np.ndarray:
    """Joint probabilities of all N^n outcome sequences of n repeated measurements.

    Entry [j1, ..., jn] is Tr[M_jn ... M_j1 rho M_j1† ... M_jn†], computed by
    chained Kraus updates; zero-probability branches contribute 0.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    if n > MAX_MOMENT_ORDER:
        raise ValueError(f"sequence length capped at {MAX_MOMENT_ORDER}")
    if ctx.dim != rho.dim:
        raise DimensionMismatch("context and state dimensions differ")
    N = ctx.n_outcomes
    K = ctx.kraus_stack()
    out = np.zeros((N,) * n)

    def descend(state, prefix):
        if len(prefix) == n:
            out[prefix] = max(float(np.trace(state).real), 0.0)
            return
        for j in range(N):
            descend(K[j] @ state @ K[j].conj().T, prefix + (j,))

    descend(rho.matrix, ())
    return out


def _require_commuting(obs: Observable, ctx: MeasurementContext, tol=None):
    if tol is None:
        tol = default_tol()
    ops = [obs.matrix] + list(ctx.kraus)
    scale = max(1.0, max(operator_norm(X) for X in ops))
    for i in range(len(ops)):
        for j in range(i + 1, len(ops)):
            c = operator_norm(ops[i] @ ops[j] - ops[j] @ ops[i])
            if c > tol * scale:
                raise NonCommutingContext(
                    f"commutator norm {c:.3e} exceeds tolerance"
                )


def moment(
    cv,
    ctx: MeasurementContext,
    rho: DensityOperator,
    n: int,
    obs: Observable | None = None,
) -> float:
    """n-th moment Tr[A^n rho] from length-n outcome sequences.

    Valid only when the measurement operators (and the observable, when
    supplied for the check) all commute.
    """
    cv = np.asarray(cv, dtype=float)
    if obs is not None:
        _require_commuting(obs, ctx)
    else:
        # still reject non-commuting Kraus sets
        K = list(ctx.kraus)
        scale = max(1.0, max(operator_norm(M) for M in K))
        for i in range(len(K)):
            for j in range(i + 1, len(K)):
                if operator_norm(K[i] @ K[j] - K[j] @ K[i]) > default_tol() * scale:
                    raise NonCommutingContext("measurement operators do not commute")
    probs = sequence_probabilities(ctx, rho, n)
    for _ in range(n):
        probs = np.tensordot(cv, probs, axes=([0], [0]))
    return float(probs)


def cv_moment(cv, ctx: MeasurementContext, rho: DensityOperator, n: int) -> float:
    """Moment of the contextual values themselves, sum_j alpha_j^n P_j.

    Coincides with the observable moment only for n = 1.
    """
    cv = np.asarray(cv, dtype=float)
    return float((cv**n) @ outcome_probabilities(ctx, rho))


def joint_postselection_probabilities(
    setup: ConditionedSetup, rho: DensityOperator
) -> np.ndarray:
    """P_jf for f = setup.postselect, via E_jf = M1_j† M2_f† M2_f M1_j."""
    if setup.first.dim != rho.dim:
        raise DimensionMismatch("setup and state dimensions differ")
    E2f = setup.second.povm[setup.postselect]
    K1 = setup.first.kraus_stack()
    # Tr[E2f M_j rho M_j†] for all j at once
    probs = np.einsum("ab,jbc,cd,jad->j", E2f, K1, rho.matrix, K1.conj()).real
    return np.clip(probs, 0.0, None)


def conditioned_average(setup: ConditionedSetup, rho: DensityOperator) -> float:
    """CV-weighted average of first-measurement outcomes, postselected on f."""
    probs = joint_postselection_probabilities(setup, rho)
    pf = probs.sum()
    if pf <= POSTSELECTION_FLOOR:
        raise ZeroPostselectionProbability(f"postselection probability {pf:.3e}")
    return float(setup.cv @ probs / pf)


def weak_value(obs: Observable, E_f, rho: DensityOperator) -> float:
    """Generalized weak value Tr[E_f {A, rho}] / (2 Tr[E_f rho]).

    The anticommutator form guarantees a real result; the (checked, tiny)
    imaginary residue is discarded.
    """
    E_f = np.asarray(E_f, dtype=complex)
    if E_f.shape != rho.matrix.shape:
        raise DimensionMismatch("postselection operator dimension mismatch")
    denom = np.trace(E_f @ rho.matrix)
    if denom.real <= POSTSELECTION_FLOOR:
        raise ZeroPostselectionProbability(
            f"postselection probability {denom.real:.3e}"
        )
    anti = obs.matrix @ rho.matrix + rho.matrix @ obs.matrix
    value = np.trace(E_f @ anti) / (2 * denom)
    if abs(value.imag) > 1e-12 * max(1.0, abs(value.real)):
        raise ValueError(f"weak value has imaginary residue {value.imag:.3e}")
    return float(value.real)


def aav_weak_value(obs: Observable, psi_i, psi_f) -> complex:
    """<psi_f|A|psi_i> / <psi_f|psi_i>, the original pre/postselected weak value."""
    psi_i = np.asarray(psi_i, dtype=complex).ravel()
    psi_f = np.asarray(psi_f, dtype=complex).ravel()
    overlap = psi_f.conj() @ psi_i
    if abs(overlap) <= POSTSELECTION_FLOOR:
        raise OrthogonalPostselection("pre- and postselection are orthogonal")
    return complex((psi_f.conj() @ obs.matrix @ psi_i) / overlap)
