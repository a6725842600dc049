"""Operator algebra: spectral decomposition, states, contexts, polar parts."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ctxval.errors import (
    DimensionMismatch,
    IncompleteContext,
    NotHermitian,
    ZeroProbabilityBranch,
)
from ctxval.operators import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    DensityOperator,
    context_from_kraus,
    default_tol,
    is_hermitian,
    minimal_disturbance_check,
    operator_norm,
    outcome_probabilities,
    polar_decompose,
    pure_state_density,
    spectral_decompose,
    state_update,
)
from ctxval.scenarios import polarization_context


def random_complex_matrix(seed, d=3):
    g = np.random.default_rng(seed)
    return g.normal(size=(d, d)) + 1j * g.normal(size=(d, d))


def test_sigma_z_spectral_decomposition():
    obs = spectral_decompose(SIGMA_Z)
    assert np.allclose(obs.eigenvalues, [1.0, -1.0])
    assert np.allclose(obs.projectors[0], np.diag([1.0, 0.0]))
    assert np.allclose(obs.projectors[1], np.diag([0.0, 1.0]))
    # projectors resolve the identity and reassemble the matrix
    assert np.allclose(sum(obs.projectors), np.eye(2))
    assert np.allclose(
        sum(w * P for w, P in zip(obs.eigenvalues, obs.projectors)), SIGMA_Z
    )


def test_spectral_decompose_orders_descending():
    obs = spectral_decompose(np.diag([-3.0, 7.0, 2.0]).astype(complex))
    assert np.allclose(obs.eigenvalues, [7.0, 2.0, -3.0])


def test_degenerate_eigenvalues_grouped():
    obs = spectral_decompose(np.eye(2, dtype=complex))
    assert len(obs.eigenvalues) == 1
    assert np.allclose(obs.projectors[0], np.eye(2))
    # near-degenerate pair merges into a rank-2 projector
    obs = spectral_decompose(np.diag([1.0, 1.0 + 1e-12, 5.0]).astype(complex))
    assert len(obs.eigenvalues) == 2
    assert abs(np.trace(obs.projectors[1]).real - 2.0) < 1e-12


def test_non_hermitian_rejected():
    with pytest.raises(NotHermitian):
        spectral_decompose(np.array([[0.0, 1.0], [0.0, 0.0]]))
    assert not is_hermitian(np.array([[0.0, 1.0], [2.0, 0.0]]))
    assert is_hermitian(SIGMA_Y)


def test_density_operator_validation():
    with pytest.raises(ValueError):
        DensityOperator(np.diag([0.7, 0.7]).astype(complex))  # trace 1.4
    with pytest.raises(ValueError):
        DensityOperator(np.diag([1.5, -0.5]).astype(complex))  # not PSD
    with pytest.raises(NotHermitian):
        DensityOperator(np.array([[0.5, 0.5], [0.0, 0.5]]))
    rho = DensityOperator(np.eye(2) / 2)
    assert rho.dim == 2


def test_pure_state_density_normalizes():
    rho = pure_state_density([3.0, 4.0j])
    assert abs(np.trace(rho.matrix).real - 1.0) < 1e-14
    assert abs(rho.matrix[0, 0].real - 0.36) < 1e-14
    # rank one
    w = np.linalg.eigvalsh(rho.matrix)
    assert abs(w[-1] - 1.0) < 1e-14


def test_context_from_kraus_checks_completeness():
    ctx = polarization_context(0.8)
    assert ctx.n_outcomes == 2
    with pytest.raises(IncompleteContext):
        context_from_kraus([ctx.kraus[0]])
    with pytest.raises(DimensionMismatch):
        context_from_kraus([])
    with pytest.raises(DimensionMismatch):
        context_from_kraus([np.eye(2), np.eye(3)])


def test_outcome_probabilities():
    ctx = polarization_context(0.8)
    rho = pure_state_density([1.0, 0.0])
    probs = outcome_probabilities(ctx, rho)
    g = 2 * 0.8**2 - 1
    assert np.allclose(probs, [(1 + g) / 2, (1 - g) / 2], atol=1e-14)
    assert abs(probs.sum() - 1.0) < 1e-12
    with pytest.raises(DimensionMismatch):
        outcome_probabilities(ctx, DensityOperator(np.eye(3) / 3))


def test_state_update_projective():
    P0 = np.diag([1.0, 0.0]).astype(complex)
    rho = pure_state_density([0.6, 0.8])
    updated, p = state_update(P0, rho)
    assert abs(p - 0.36) < 1e-14
    assert np.allclose(updated.matrix, np.diag([1.0, 0.0]))
    with pytest.raises(ZeroProbabilityBranch):
        state_update(np.diag([0.0, 1.0]).astype(complex), pure_state_density([1.0, 0.0]))


@settings(deadline=None, max_examples=40)
@given(st.integers(min_value=0, max_value=10_000), st.integers(min_value=2, max_value=5))
def test_polar_decompose_properties(seed, d):
    M = random_complex_matrix(seed, d)
    U, P = polar_decompose(M)
    assert operator_norm(U @ U.conj().T - np.eye(d)) < 1e-10
    assert is_hermitian(P, 1e-10)
    assert np.linalg.eigvalsh(P).min() > -1e-10
    assert operator_norm(U @ P - M) < 1e-9 * max(1.0, operator_norm(M))


def test_polar_decompose_rank_deficient():
    M = np.diag([2.0, 0.0]).astype(complex)
    U, P = polar_decompose(M)
    assert operator_norm(U @ U.conj().T - np.eye(2)) < 1e-12
    assert operator_norm(U @ P - M) < 1e-12


def test_minimal_disturbance_check():
    ctx = polarization_context(0.8)  # PSD Kraus operators: trivial unitary parts
    assert minimal_disturbance_check(ctx, pure_state_density([0.3, 0.954]))
    # attach a nontrivial unitary part to one branch
    theta = 0.7
    R = math.cos(theta / 2) * np.eye(2) - 1j * math.sin(theta / 2) * SIGMA_X
    kraus = (R @ ctx.kraus[0], ctx.kraus[1])
    rho = pure_state_density([1.0, 0.0])
    assert not minimal_disturbance_check(context_from_kraus(kraus), rho)


def test_operator_norm_is_spectral():
    assert abs(operator_norm(SIGMA_Z) - 1.0) < 1e-14
    assert abs(operator_norm(np.diag([3.0, -1.0])) - 3.0) < 1e-14
    # differs from the Frobenius norm for rank > 1
    assert operator_norm(np.eye(2)) == pytest.approx(1.0)


def test_default_tol_env_override(monkeypatch):
    monkeypatch.delenv("CVTOOL_DEFAULT_TOL", raising=False)
    assert default_tol() == 1e-10
    monkeypatch.setenv("CVTOOL_DEFAULT_TOL", "1e-6")
    assert default_tol() == 1e-6
