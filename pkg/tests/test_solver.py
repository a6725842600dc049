"""Contextual-value solver: pseudoinverse selection, null spaces, modes."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ctxval.errors import NonCommutingContext, NotReconstructable
from ctxval.operators import (
    SIGMA_X,
    SIGMA_Z,
    MeasurementContext,
    context_from_kraus,
    operator_norm,
    spectral_decompose,
)
from ctxval.scenarios import (
    DetectorModel,
    detector_context,
    detector_cv_grid,
    polarization_context,
    projective_context,
)
from ctxval.solver import (
    build_contrast_matrix,
    hermitian_basis,
    null_space,
    pseudoinverse,
    solve_contextual_values,
)

SZ = spectral_decompose(SIGMA_Z)


def trine_context():
    """Symmetric three-outcome qubit POVM E_k = (2/3)|phi_k><phi_k|."""
    kraus = []
    for k in range(3):
        theta = 2 * math.pi * k / 3
        phi = np.array([math.cos(theta / 2), math.sin(theta / 2)], dtype=complex)
        kraus.append(math.sqrt(2.0 / 3.0) * np.outer(phi, phi.conj()))
    return context_from_kraus(kraus)


@pytest.mark.parametrize("g", [0.1, 0.25, 0.5, 0.9, 1.0])
def test_polarization_cv_is_inverse_strength(g):
    gamma = math.sqrt((1 + g) / 2)
    sol = solve_contextual_values(SZ, polarization_context(gamma))
    assert sol.mode == "commuting-F"
    assert sol.exact
    assert np.allclose(sol.alpha0, [1.0 / g, -1.0 / g], atol=1e-10)
    assert len(sol.null_basis) == 0


def test_projective_context_echoes_eigenvalues():
    obs = spectral_decompose(np.diag([2.0, -0.5]).astype(complex))
    ctx = MeasurementContext(
        (np.diag([1.0, 0.0]).astype(complex), np.diag([0.0, 1.0]).astype(complex))
    )
    sol = solve_contextual_values(obs, ctx)
    assert np.allclose(sol.alpha0, [2.0, -0.5], atol=1e-12)


def test_trine_povm_solution():
    sol = solve_contextual_values(SZ, trine_context())
    # non-commuting POVM elements force the operator-space route
    assert sol.mode == "general-operator-space"
    assert sol.exact
    assert np.allclose(sol.alpha0, [2.0, -1.0, -1.0], atol=1e-10)
    recon = sum(a * E for a, E in zip(sol.alpha0, trine_context().povm))
    assert operator_norm(recon - SIGMA_Z) < 1e-12


def test_contrast_matrix_polarization():
    ctx = polarization_context(math.sqrt(0.75))  # g = 0.5
    F = build_contrast_matrix(SZ, ctx)
    assert np.allclose(F, [[0.75, 0.25], [0.25, 0.75]], atol=1e-12)


def test_contrast_matrix_rejects_noncommuting():
    with pytest.raises(NonCommutingContext):
        build_contrast_matrix(SZ, trine_context())
    with pytest.raises(NonCommutingContext):
        build_contrast_matrix(spectral_decompose(SIGMA_X), polarization_context(0.8))


@settings(deadline=None, max_examples=60)
@given(
    st.integers(min_value=0, max_value=10_000),
    st.integers(min_value=1, max_value=4),
    st.integers(min_value=1, max_value=4),
)
def test_pseudoinverse_moore_penrose_conditions(seed, m, n):
    F = np.random.default_rng(seed).normal(size=(m, n))
    Fp = pseudoinverse(F)
    atol = 1e-9 * max(1.0, operator_norm(F)) ** 2
    assert np.allclose(F @ Fp @ F, F, atol=atol)
    assert np.allclose(Fp @ F @ Fp, Fp, atol=atol)
    assert np.allclose((F @ Fp).T, F @ Fp, atol=atol)
    assert np.allclose((Fp @ F).T, Fp @ F, atol=atol)


def test_pseudoinverse_zero_matrix():
    Z = np.zeros((2, 3))
    assert np.allclose(pseudoinverse(Z), np.zeros((3, 2)))


def test_null_space_annihilates():
    F = np.array([[2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0], [0.0, 0.5, 0.5]])
    basis = null_space(F)
    assert len(basis) == 1
    v = basis[0]
    assert np.allclose(F @ v, 0.0, atol=1e-12)
    assert abs(np.linalg.norm(v) - 1.0) < 1e-12
    # deterministic sign: largest entry positive
    assert v[np.argmax(np.abs(v))] > 0


def test_null_space_full_rank_empty():
    assert null_space(np.eye(3)) == []


@pytest.mark.parametrize("d", [2, 3, 4])
def test_hermitian_basis_orthonormal(d):
    basis = hermitian_basis(d)
    assert len(basis) == d * d
    G = np.array(
        [[np.trace(A @ B).real for B in basis] for A in basis]
    )
    assert np.allclose(G, np.eye(d * d), atol=1e-12)
    for B in basis:
        assert np.allclose(B, B.conj().T)


def test_not_reconstructable_strict_raises():
    # a z-diagonal POVM carries no information about sigma_x
    obs = spectral_decompose(SIGMA_X)
    ctx = polarization_context(0.8)
    with pytest.raises(NotReconstructable):
        solve_contextual_values(obs, ctx, strict=True)
    sol = solve_contextual_values(obs, ctx, strict=False)
    assert not sol.exact
    assert sol.residual > 0.5


def test_svd_tol_truncates_weak_directions():
    # nearly unbiased context: the contrast matrix is almost singular
    gamma = math.sqrt((1 + 1e-6) / 2)
    ctx = polarization_context(gamma)
    sol = solve_contextual_values(SZ, ctx)
    assert sol.exact  # default tolerance keeps the small singular value
    coarse = solve_contextual_values(SZ, ctx, svd_tol=1e-3, strict=False)
    assert not coarse.exact  # truncated: minimum-norm inexact solution
    assert np.linalg.norm(coarse.alpha0) < np.linalg.norm(sol.alpha0)


def test_solution_reports_singular_values():
    sol = solve_contextual_values(SZ, polarization_context(0.9))
    assert len(sol.singular_values) == 2
    assert sol.singular_values[0] >= sol.singular_values[-1] > 0
    assert sol.truncation_tol == 1e-10


def test_detector_solver_matches_closed_form():
    model = DetectorModel.with_default_grid("gaussian", 0.3, 0.15, n_points=201)
    sol = solve_contextual_values(SZ, detector_context(model))
    assert sol.exact
    assert np.allclose(sol.alpha0, detector_cv_grid(model), atol=1e-6)


def test_dimension_mismatch():
    from ctxval.errors import DimensionMismatch

    obs = spectral_decompose(np.diag([1.0, 0.0, -1.0]).astype(complex))
    with pytest.raises(DimensionMismatch):
        solve_contextual_values(obs, polarization_context(0.8))


def test_projective_second_context_helper():
    ctx = projective_context(np.array([1.0, 1.0]) / math.sqrt(2))
    total = sum(ctx.povm)
    assert np.allclose(total, np.eye(2), atol=1e-12)
