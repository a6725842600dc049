"""Hot counting kernels for Monte Carlo sampling.

Each kernel exists twice: a numba ``@njit`` loop and a vectorized numpy
fallback.  Both take pre-drawn uniforms and cumulative distributions and
return integer outcome counts.  The inverse-CDF convention is bisect-right
(count of cumulative entries <= u) in both paths, so counts are identical
bit for bit whichever backend runs.
"""

from __future__ import annotations

import numpy as np

from .backend import HAVE_NUMBA, numba_enabled

if HAVE_NUMBA:
    from numba import njit


# --- numpy paths ----------------------------------------------------------


def _count_outcomes_np(u, cum):
    n = cum.shape[0]
    j = np.searchsorted(cum, u, side="right")
    np.minimum(j, n - 1, out=j)
    return np.bincount(j, minlength=n).astype(np.int64)


def _count_pairs_np(u1, u2, cum1, cum2):
    n1, n2 = cum2.shape
    j = np.searchsorted(cum1, u1, side="right")
    np.minimum(j, n1 - 1, out=j)
    f = np.sum(cum2[j] <= u2[:, None], axis=1)
    np.minimum(f, n2 - 1, out=f)
    counts = np.zeros((n1, n2), dtype=np.int64)
    np.add.at(counts, (j, f), 1)
    return counts


def _count_sequences_np(u, cond_cum, offsets, n_outcomes):
    trials, n_steps = u.shape
    nodes = np.zeros(trials, dtype=np.int64)
    for k in range(n_steps):
        rows = cond_cum[offsets[k] + nodes]
        j = np.sum(rows <= u[:, k : k + 1], axis=1)
        np.minimum(j, n_outcomes - 1, out=j)
        nodes = nodes * n_outcomes + j
    total = n_outcomes**n_steps
    return np.bincount(nodes, minlength=total).astype(np.int64)


# --- numba paths ----------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True)
    def _bisect_right(cum, x):
        lo = 0
        hi = cum.shape[0]
        while lo < hi:
            mid = (lo + hi) // 2
            if cum[mid] <= x:
                lo = mid + 1
            else:
                hi = mid
        return lo

    @njit(cache=True)
    def _count_outcomes_nb(u, cum):
        n = cum.shape[0]
        counts = np.zeros(n, dtype=np.int64)
        for i in range(u.shape[0]):
            j = _bisect_right(cum, u[i])
            if j > n - 1:
                j = n - 1
            counts[j] += 1
        return counts

    @njit(cache=True)
    def _count_pairs_nb(u1, u2, cum1, cum2):
        n1 = cum2.shape[0]
        n2 = cum2.shape[1]
        counts = np.zeros((n1, n2), dtype=np.int64)
        for i in range(u1.shape[0]):
            j = _bisect_right(cum1, u1[i])
            if j > n1 - 1:
                j = n1 - 1
            f = _bisect_right(cum2[j], u2[i])
            if f > n2 - 1:
                f = n2 - 1
            counts[j, f] += 1
        return counts

    @njit(cache=True)
    def _count_sequences_nb(u, cond_cum, offsets, n_outcomes):
        trials = u.shape[0]
        n_steps = u.shape[1]
        total = 1
        for _ in range(n_steps):
            total *= n_outcomes
        counts = np.zeros(total, dtype=np.int64)
        for i in range(trials):
            node = 0
            for k in range(n_steps):
                j = _bisect_right(cond_cum[offsets[k] + node], u[i, k])
                if j > n_outcomes - 1:
                    j = n_outcomes - 1
                node = node * n_outcomes + j
            counts[node] += 1
        return counts


# --- dispatch -------------------------------------------------------------


def count_outcomes(u, cum):
    """Counts per outcome for uniforms ``u`` against cumulative probs ``cum``."""
    if numba_enabled():
        return _count_outcomes_nb(u, cum)
    return _count_outcomes_np(u, cum)


def count_pairs(u1, u2, cum1, cum2):
    """Counts over (first outcome, second outcome) for two-stage sampling."""
    if numba_enabled():
        return _count_pairs_nb(u1, u2, cum1, cum2)
    return _count_pairs_np(u1, u2, cum1, cum2)


def count_sequences(u, cond_cum, offsets, n_outcomes):
    """Counts over flattened length-n outcome sequences.

    ``cond_cum`` stacks, level by level, the cumulative conditional
    distribution of the next outcome for every prefix node; ``offsets[k]`` is
    the row of the first node of level k.
    """
    if numba_enabled():
        return _count_sequences_nb(u, cond_cum, offsets, n_outcomes)
    return _count_sequences_np(u, cond_cum, offsets, n_outcomes)
