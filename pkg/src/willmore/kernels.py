"""Dispatch layer over the numpy / numba kernel twins."""
from __future__ import annotations

import math

import numpy as np

from . import _kernels_numpy
from .backend import backend_name

PAIRS = _kernels_numpy.PAIRS
expand_pairs = _kernels_numpy.expand_pairs
u_scalar = _kernels_numpy.u_scalar
u_tensors = _kernels_numpy.u_tensors

_impl = None


def _module():
    global _impl
    if _impl is None:
        if backend_name() == "numba":
            from . import _kernels_numba
            _impl = _kernels_numba
        else:
            _impl = _kernels_numpy
    return _impl


def steps_for(vmax: float) -> int:
    """Fixed RK4 step count: 256 steps per unit of geodesic arclength,
    floored at 32 so short geodesics keep their full order."""
    return max(32, int(math.ceil(256.0 * vmax)))


def chart_ode_batch(kind, params, x0, v0, n_steps, order=2):
    """Geodesic + variational batch on the selected backend.

    See _kernels_numpy.chart_ode_batch for the array contract.  The numba
    path requires contiguous float64 inputs; coerced here.
    """
    params = np.ascontiguousarray(np.asarray(params, dtype=np.float64).ravel())
    x0 = np.ascontiguousarray(np.asarray(x0, dtype=np.float64).ravel())
    if x0.size != 3:
        raise ValueError("x0 must be a single base point of shape (3,)")
    v0 = np.ascontiguousarray(np.atleast_2d(np.asarray(v0, dtype=np.float64)))
    mod = _module()
    return mod.chart_ode_batch(int(kind), params, x0, v0, int(n_steps), int(order))
