"""Frequency-based reconstruction: sample outcomes, estimate averages.

Randomness comes from a counter-based Philox generator seeded explicitly, so
a fixed :class:`RunConfig` reproduces results byte for byte.  All uniforms
for a run are drawn up front and the counting kernels consume per-trial
slices, which makes the counts independent of how trials are sharded.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .averaging import ConditionedSetup, sequence_probabilities
from .errors import NoPostselectedTrials, NonCommutingContext
from .operators import (
    DensityOperator,
    MeasurementContext,
    default_tol,
    operator_norm,
    outcome_probabilities,
    state_update,
)

__all__ = [
    "RunConfig",
    "EmpiricalResult",
    "sample_outcome",
    "empirical_average",
    "empirical_conditioned_average",
    "empirical_moment",
]


@dataclass(frozen=True)
class RunConfig:
    """Trial count, RNG seed, and shard partitioning for a Monte Carlo run."""

    trials: int
    seed: int
    shards: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("need at least one trial")
        if self.shards < 1:
            raise ValueError("need at least one shard")


@dataclass(frozen=True)
class EmpiricalResult:
    """Outcome counts and the derived estimate with its standard error."""

    counts: np.ndarray
    estimate: float
    stderr: float
    postselection_rate: float | None = None


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def _uniforms(cfg: RunConfig, ncols: int) -> np.ndarray:
    return _rng(cfg.seed).random((cfg.trials, ncols))


def _shard_slices(trials: int, shards: int):
    bounds = np.linspace(0, trials, shards + 1).astype(int)
    return [slice(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def _cumulative(probs: np.ndarray) -> np.ndarray:
    cum = np.cumsum(probs, axis=-1)
    cum[..., -1] = 1.0
    return cum


def _mean_stderr(counts, values):
    n = counts.sum()
    mean = float(counts @ values) / n
    if n > 1:
        var = float(counts @ (values - mean) ** 2) / (n - 1)
    else:
        var = 0.0
    return mean, float(np.sqrt(var / n))


def sample_outcome(probabilities, rng: np.random.Generator) -> int:
    """One inverse-CDF draw from a discrete distribution; advances ``rng``."""
    probabilities = np.asarray(probabilities, dtype=float)
    if abs(probabilities.sum() - 1.0) > 1e-9:
        raise ValueError("probabilities must sum to 1")
    cum = _cumulative(probabilities)
    j = int(np.searchsorted(cum, rng.random(), side="right"))
    return min(j, len(cum) - 1)


def empirical_average(
    cv, ctx: MeasurementContext, rho: DensityOperator, cfg: RunConfig
) -> EmpiricalResult:
    """Relative-frequency estimate of the CV-weighted average."""
    cv = np.asarray(cv, dtype=float)
    cum = _cumulative(outcome_probabilities(ctx, rho))
    u = _uniforms(cfg, 1)[:, 0]
    counts = np.zeros(ctx.n_outcomes, dtype=np.int64)
    for sl in _shard_slices(cfg.trials, cfg.shards):
        counts += _kernels.count_outcomes(u[sl], cum)
    estimate, stderr = _mean_stderr(counts, cv)
    return EmpiricalResult(counts, estimate, stderr)


def _conditional_second_stage(setup: ConditionedSetup, rho: DensityOperator):
    """Per-first-outcome cumulative distributions of the second outcome."""
    n1 = setup.first.n_outcomes
    n2 = setup.second.n_outcomes
    cond = np.zeros((n1, n2))
    probs1 = outcome_probabilities(setup.first, rho)
    for j in range(n1):
        if probs1[j] <= 0.0:
            cond[j, -1] = 1.0  # unreachable branch, any valid row will do
            continue
        updated, _ = state_update(setup.first.kraus[j], rho)
        cond[j] = outcome_probabilities(setup.second, updated)
    return probs1, _cumulative(cond)


def empirical_conditioned_average(
    setup: ConditionedSetup, rho: DensityOperator, cfg: RunConfig
) -> EmpiricalResult:
    """Trajectory sampling of the conditioned average.

    Each trial draws a first outcome, updates the state, draws the second
    outcome, and is kept only when the second outcome hits the postselection
    target.
    """
    probs1, cond_cum = _conditional_second_stage(setup, rho)
    cum1 = _cumulative(probs1)
    u = _uniforms(cfg, 2)
    counts = np.zeros((setup.first.n_outcomes, setup.second.n_outcomes), dtype=np.int64)
    for sl in _shard_slices(cfg.trials, cfg.shards):
        counts += _kernels.count_pairs(u[sl, 0], u[sl, 1], cum1, cond_cum)
    kept = counts[:, setup.postselect]
    n_kept = int(kept.sum())
    if n_kept == 0:
        raise NoPostselectedTrials("no trials passed postselection")
    estimate, stderr = _mean_stderr(kept, setup.cv)
    return EmpiricalResult(
        counts, estimate, stderr, postselection_rate=n_kept / cfg.trials
    )


def _sequence_tree(joint: np.ndarray, n_outcomes: int, n_steps: int):
    """Stacked cumulative conditionals P(j_k | prefix) for the sampling walk."""
    rows = []
    offsets = []
    offset = 0
    for k in range(n_steps):
        marg_prefix = joint.reshape((n_outcomes**k, -1)).sum(axis=1)
        marg_next = joint.reshape((n_outcomes ** (k + 1), -1)).sum(axis=1)
        cond = marg_next.reshape(n_outcomes**k, n_outcomes)
        safe = np.where(marg_prefix > 0.0, marg_prefix, 1.0)
        cond = cond / safe[:, None]
        cond[marg_prefix <= 0.0, -1] = 1.0
        rows.append(_cumulative(cond))
        offsets.append(offset)
        offset += n_outcomes**k
    return np.concatenate(rows, axis=0), np.array(offsets, dtype=np.int64)


def empirical_moment(
    cv, ctx: MeasurementContext, rho: DensityOperator, n: int, cfg: RunConfig
) -> EmpiricalResult:
    """Estimate of the n-th observable moment from sampled outcome sequences."""
    cv = np.asarray(cv, dtype=float)
    K = list(ctx.kraus)
    scale = max(1.0, max(operator_norm(M) for M in K))
    for i in range(len(K)):
        for j in range(i + 1, len(K)):
            if operator_norm(K[i] @ K[j] - K[j] @ K[i]) > default_tol() * scale:
                raise NonCommutingContext("measurement operators do not commute")
    joint = sequence_probabilities(ctx, rho, n)
    cond_cum, offsets = _sequence_tree(joint, ctx.n_outcomes, n)
    values = cv.copy()
    for _ in range(n - 1):
        values = np.outer(values, cv).ravel()
    u = _uniforms(cfg, n)
    counts = np.zeros(ctx.n_outcomes**n, dtype=np.int64)
    for sl in _shard_slices(cfg.trials, cfg.shards):
        counts += _kernels.count_sequences(u[sl], cond_cum, offsets, ctx.n_outcomes)
    estimate, stderr = _mean_stderr(counts, values)
    return EmpiricalResult(counts, estimate, stderr)
