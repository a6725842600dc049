"""Named verification suites behind the ``verify`` CLI command.

Each suite re-derives a closed-form result through the generic conditioned
average machinery and checks agreement at a fixed tolerance.  Suites return
a list of (check name, passed, detail) tuples.
"""

from __future__ import annotations

import math

import numpy as np

from .averaging import conditioned_average, weak_value
from .operators import DensityOperator, pure_state_density, spectral_decompose
from .operators import SIGMA_Z
from .scenarios import (
    DetectorModel,
    aav_conditioned_oracle,
    detector_conditioned_setup,
    f_state,
    polarization_conditioned_oracle,
    polarization_conditioned_setup,
    polarization_context,
    psi_state,
    qpc_conditioned_oracle,
    qpc_full_pipeline,
)
from .solver import solve_contextual_values

__all__ = ["run_suite", "SUITES"]


def random_density(rng, dim: int = 2, pure: bool = False) -> DensityOperator:
    """Haar-ish random state: pure from a Gaussian vector, mixed from Ginibre."""
    if pure:
        v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        return pure_state_density(v)
    G = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    M = G @ G.conj().T
    return DensityOperator(M / np.trace(M).real)


def _suite_eq8(rng) -> list:
    obs = spectral_decompose(SIGMA_Z)
    worst = 0.0
    for _ in range(1000):
        theta = rng.uniform(0, math.pi)
        phi = rng.uniform(0, 2 * math.pi)
        alpha = math.cos(theta / 2)
        beta = math.sin(theta / 2) * np.exp(1j * phi)
        gamma = math.sqrt(rng.uniform(0.05, 0.95))
        sol = solve_contextual_values(obs, polarization_context(gamma))
        setup = polarization_conditioned_setup(gamma, sol.alpha0)
        rho = pure_state_density(np.array([alpha, beta]))
        got = conditioned_average(setup, rho)
        want = polarization_conditioned_oracle(alpha, beta, gamma)
        worst = max(worst, abs(got - want))
    return [("polarization closed form vs generic", worst <= 1e-12, f"max |diff| = {worst:.3e}")]

def _suite_eq10(rng) -> list:
    checks = []
    sigma = 0.3
    for alpha in (math.pi / 6, math.pi / 3, 47 * math.pi / 32):
        for ratio in (0.3, 1.0, 3.0):
            g = ratio * sigma
            model = DetectorModel.with_default_grid("gaussian", sigma, g)
            setup = detector_conditioned_setup(model, f_state(math.pi / 2))
            got = conditioned_average(setup, pure_state_density(psi_state(alpha)))
            want = aav_conditioned_oracle(alpha, g, sigma)
            ok = abs(got - want) <= 1e-5
            checks.append(
                (
                    f"gaussian pointer alpha={alpha:.4f} g/sigma={ratio}",
                    ok,
                    f"|diff| = {abs(got - want):.3e}",
                )
            )
    return checks


def _suite_eq11(rng) -> list:
    checks = []
    for theta in (0.0, math.pi / 6, math.pi / 3, math.pi / 2):
        for tau in (0.1, 1.0, 5.0):
            rho = random_density(rng)
            got = qpc_full_pipeline(tau, rho, theta)
            want = qpc_conditioned_oracle(rho, theta, tau)
            ok = abs(got - want) <= 1e-4
            checks.append(
                (
                    f"qpc theta={theta:.4f} tau={tau}",
                    ok,
                    f"|diff| = {abs(got - want):.3e}",
                )
            )
    return checks


def _suite_weak_limit(rng) -> list:
    obs = spectral_decompose(SIGMA_Z)
    rho = pure_state_density(psi_state(math.pi / 3))
    f = np.array([1.0, -1.0]) / math.sqrt(2.0)
    wv = weak_value(obs, np.outer(f, f.conj()), rho)
    diffs = []
    for g in (0.2, 0.1, 0.05, 0.025):
        gamma = math.sqrt((1 + g) / 2)
        sol = solve_contextual_values(obs, polarization_context(gamma))
        setup = polarization_conditioned_setup(gamma, sol.alpha0)
        diffs.append(abs(conditioned_average(setup, rho) - wv))
    ratios = [diffs[i] / diffs[i + 1] for i in range(len(diffs) - 1)]
    # |diff| <= C g: each halving of g must at least halve the gap.  (This
    # family happens to converge quadratically: the closed form depends on
    # g only through g^2, so ratios come out near 4.)
    ok = all(d1 > d2 for d1, d2 in zip(diffs, diffs[1:])) and all(
        r >= 1.8 for r in ratios
    )
    return [
        (
            "polarization weak limit converges at least linearly",
            ok,
            "diff ratios per halving: " + ", ".join(f"{r:.3f}" for r in ratios),
        )
    ]


SUITES = {
    "eq8": _suite_eq8,
    "eq10": _suite_eq10,
    "eq11": _suite_eq11,
    "weak-limit": _suite_weak_limit,
}


def run_suite(name: str, seed: int = 12345) -> list:
    """Run one named suite (or "all"); unknown names raise KeyError."""
    rng = np.random.default_rng(seed)
    if name == "all":
        results = []
        for suite in SUITES.values():
            results.extend(suite(rng))
        return results
    return SUITES[name](rng)
