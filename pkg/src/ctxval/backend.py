"""Numba/numpy backend selection for the Monte Carlo counting kernels.

The jitted and the pure-numpy kernels consume identical uniform-variate
arrays and perform bitwise-identical comparisons, so switching backends never
changes results, only speed.  Selection order:

1. :func:`force_backend` override, if set;
2. the ``CTXVAL_DISABLE_NUMBA`` environment variable (any of 1/true/yes);
3. whether numba imports successfully.
"""

from __future__ import annotations

import os

try:
    from numba import njit  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - depends on environment
    HAVE_NUMBA = False

_FORCED: bool | None = None


def force_backend(use_numba: bool | None) -> None:
    """Force the numba (True) or numpy (False) path; None restores auto."""
    global _FORCED
    if use_numba and not HAVE_NUMBA:
        raise RuntimeError("numba is not available")
    _FORCED = use_numba


def numba_enabled() -> bool:
    if _FORCED is not None:
        return _FORCED
    if os.environ.get("CTXVAL_DISABLE_NUMBA", "").lower() in ("1", "true", "yes"):
        return False
    return HAVE_NUMBA
