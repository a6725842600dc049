"""Minimum-norm contextual values via the SVD pseudoinverse.

Solves the operator identity  A = sum_j alpha_j E_j  for the value vector
alpha.  When the observable and all POVM elements commute this reduces to the
matrix equation  a = F alpha  with F_kj = Tr[Pi_k E_j]; otherwise the identity
is vectorized over an orthonormal Hermitian operator basis and the same
pseudoinverse selection rule is applied (an extension of the commuting-case
construction; see README).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NonCommutingContext, NotReconstructable
from .operators import (
    MeasurementContext,
    Observable,
    default_tol,
    operator_norm,
)

__all__ = [
    "build_contrast_matrix",
    "pseudoinverse",
    "null_space",
    "solve_contextual_values",
    "ContextualValueSolution",
    "hermitian_basis",
]

DEFAULT_SVD_TOL = 1e-10


@dataclass(frozen=True)
class ContextualValueSolution:
    """Minimum-norm contextual values plus the solution-space geometry."""

    alpha0: np.ndarray
    null_basis: tuple
    residual: float
    singular_values: np.ndarray
    truncation_tol: float
    mode: str  # "commuting-F" or "general-operator-space"
    exact: bool


def _commutator_norm(X, Y) -> float:
    return operator_norm(X @ Y - Y @ X)


def build_contrast_matrix(
    obs: Observable, ctx: MeasurementContext, tol: float | None = None
) -> np.ndarray:
    """F_kj = Tr[Pi_k E_j] over distinct eigenvalues k and outcomes j.

    Requires the observable and every POVM element to commute pairwise;
    raises :class:`NonCommutingContext` otherwise.
    """
    if obs.dim != ctx.dim:
        raise DimensionMismatch("observable and context dimensions differ")
    if tol is None:
        tol = default_tol()
    E = list(ctx.povm)
    ops = [obs.matrix] + E
    scale = max(1.0, max(operator_norm(X) for X in ops))
    # Frobenius prefilter (an upper bound on the spectral norm) over all
    # pairs at once; only suspects get the exact spectral-norm check.  This
    # keeps fine-grained detector contexts (thousands of outcomes) cheap.
    stack = np.stack(ops)
    n_ops = len(ops)
    for lo in range(0, n_ops, 64):
        block = stack[lo : lo + 64]
        prod_ij = np.einsum("iab,jbc->ijac", block, stack)
        prod_ji = np.einsum("jab,ibc->ijac", stack, block)
        fro = np.sqrt(np.sum(np.abs(prod_ij - prod_ji) ** 2, axis=(2, 3)))
        for i, j in np.argwhere(fro > tol * scale):
            c = _commutator_norm(block[i], stack[j])
            if c > tol * scale:
                raise NonCommutingContext(
                    f"commutator norm {c:.3e} exceeds tolerance"
                )
    F = np.array(
        [[np.trace(P @ Ej) for Ej in E] for P in obs.projectors], dtype=complex
    )
    if np.max(np.abs(F.imag)) > 1e-12 * scale:
        raise NonCommutingContext("contrast matrix has nonreal entries")
    return F.real


def pseudoinverse(F, svd_tol: float = DEFAULT_SVD_TOL) -> np.ndarray:
    """Moore-Penrose pseudoinverse F+ = V Sigma+ U^T.

    Singular values at or below ``svd_tol`` times the largest are treated as
    zero; all remaining ones are inverted.
    """
    F = np.asarray(F, dtype=float)
    U, s, Vh = np.linalg.svd(F, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return F.T * 0.0
    inv = np.where(s > svd_tol * s[0], 1.0 / np.where(s > 0, s, 1.0), 0.0)
    return (Vh.conj().T * inv) @ U.conj().T


def _fix_sign(v: np.ndarray) -> np.ndarray:
    # reproducible sign: largest-magnitude entry made positive
    i = int(np.argmax(np.abs(v)))
    return -v if v[i] < 0 else v


def null_space(F, svd_tol: float = DEFAULT_SVD_TOL) -> list:
    """Orthonormal basis of {x : F x = 0} from the right singular vectors."""
    F = np.asarray(F, dtype=float)
    _, s, Vh = np.linalg.svd(F)
    n = F.shape[1]
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > svd_tol * smax)) if smax > 0 else 0
    return [_fix_sign(Vh[i]) for i in range(rank, n)]


def hermitian_basis(d: int) -> list:
    """Orthonormal (trace inner product) basis of d x d Hermitian matrices."""
    basis = []
    for i in range(d):
        B = np.zeros((d, d), dtype=complex)
        B[i, i] = 1.0
        basis.append(B)
    for i in range(d):
        for j in range(i + 1, d):
            B = np.zeros((d, d), dtype=complex)
            B[i, j] = B[j, i] = 1.0 / np.sqrt(2)
            basis.append(B)
            B = np.zeros((d, d), dtype=complex)
            B[i, j] = -1.0j / np.sqrt(2)
            B[j, i] = 1.0j / np.sqrt(2)
            basis.append(B)
    return basis


def solve_contextual_values(
    obs: Observable,
    ctx: MeasurementContext,
    svd_tol: float = DEFAULT_SVD_TOL,
    strict: bool = True,
) -> ContextualValueSolution:
    """Least-redundant contextual values of ``obs`` under ``ctx``.

    Commuting contexts go through the contrast matrix F; non-commuting ones
    through the operator-space vectorization.  The minimum-norm solution is
    selected by the SVD pseudoinverse in both modes.  With ``strict`` the
    residual of the operator identity must be within tolerance or
    :class:`NotReconstructable` is raised; otherwise the inexact solution is
    returned with its residual.
    """
    if obs.dim != ctx.dim:
        raise DimensionMismatch("observable and context dimensions differ")
    try:
        F = build_contrast_matrix(obs, ctx)
        a = obs.eigenvalues
        mode = "commuting-F"
    except NonCommutingContext:
        basis = hermitian_basis(obs.dim)
        F = np.array(
            [[np.trace(B @ Ej).real for Ej in ctx.povm] for B in basis]
        )
        a = np.array([np.trace(B @ obs.matrix).real for B in basis])
        mode = "general-operator-space"
    alpha0 = pseudoinverse(F, svd_tol) @ a
    basis_vecs = null_space(F, svd_tol)
    s = np.linalg.svd(F, compute_uv=False)
    recon = np.einsum("j,jab->ab", alpha0, ctx.povm_stack())
    residual = operator_norm(recon - obs.matrix)
    exact = residual <= 1e-9 * max(1.0, operator_norm(obs.matrix))
    sol = ContextualValueSolution(
        alpha0=alpha0,
        null_basis=tuple(basis_vecs),
        residual=residual,
        singular_values=s,
        truncation_tol=svd_tol,
        mode=mode,
        exact=exact,
    )
    if strict and not exact:
        raise NotReconstructable(residual)
    return sol
