"""Kernel backend selection.

The hot ODE kernels (geodesic batches with variational equations) exist in
two interchangeable implementations: a numba-jitted one and a pure numpy
one.  Selection order:

  1. WILLMORE_BACKEND=numpy or WILLMORE_BACKEND=numba forces a backend;
     forcing numba when it is not importable raises at first use.
  2. Otherwise numba is used when importable, numpy as fallback.

Thread count for the numba backend comes from --threads on the CLI or the
WILLMORE_THREADS env var.  The numpy backend is single-threaded apart from
whatever BLAS does.
"""
from __future__ import annotations

import os

_selected: str | None = None


def _probe_numba() -> bool:
    try:
        import numba  # noqa: F401
        return True
    except Exception:
        return False


def backend_name() -> str:
    """Resolve the active backend name, once, and cache it."""
    global _selected
    if _selected is not None:
        return _selected
    forced = os.environ.get("WILLMORE_BACKEND", "").strip().lower()
    if forced == "numpy":
        _selected = "numpy"
    elif forced == "numba":
        if not _probe_numba():
            raise RuntimeError(
                "WILLMORE_BACKEND=numba but numba is not importable")
        _selected = "numba"
    elif forced:
        raise RuntimeError(f"unknown WILLMORE_BACKEND value: {forced!r}")
    else:
        _selected = "numba" if _probe_numba() else "numpy"
    return _selected


def set_threads(n: int | None) -> None:
    """Limit numba's thread pool.  No effect on the numpy backend."""
    if n is None:
        env = os.environ.get("WILLMORE_THREADS", "").strip()
        if not env:
            return
        n = int(env)
    if n < 1:
        raise ValueError("thread count must be >= 1")
    if backend_name() == "numba":
        import numba
        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))
