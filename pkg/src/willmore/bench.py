"""Benchmark the kernel twins on a production-sized geodesic batch.

Run as `python -m willmore.bench [--L 16] [--repeats 5]`.  Imports both
implementations directly, so the WILLMORE_BACKEND switch does not
matter here; the dispatch layer is bypassed on purpose.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from . import _kernels_numpy
from .kernels import steps_for
from .providers import make_provider
from .spectral import get_grid


def _batch(L, eps):
    grid = get_grid(L)
    provider = make_provider("conformal_bump", eta=0.1, sigma=1.0)
    v0 = eps * grid.qhat
    return provider.kind, provider.kparams, np.zeros(3), v0, steps_for(eps)


def _time(fn, args, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args, order=2)
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    parser = argparse.ArgumentParser(prog="python -m willmore.bench")
    parser.add_argument("--L", type=int, default=16)
    parser.add_argument("--eps", type=float, default=0.1)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args(argv)

    kind, params, x0, v0, n_steps = _batch(args.L, args.eps)
    print(f"batch: {len(v0)} geodesics, {n_steps} steps, order 2")

    rows = []
    t_np = _time(_kernels_numpy.chart_ode_batch,
                 (kind, params, x0, v0, n_steps), args.repeats)
    rows.append(("numpy", t_np))
    try:
        from . import _kernels_numba
    except ImportError:
        print("numba backend unavailable; numpy only")
        _kernels_numba = None
    if _kernels_numba is not None:
        # first call compiles; time it separately so the jit cost is visible
        t0 = time.perf_counter()
        out_nb = _kernels_numba.chart_ode_batch(kind, params, x0, v0,
                                                n_steps, order=2)
        t_compile = time.perf_counter() - t0
        t_nb = _time(_kernels_numba.chart_ode_batch,
                     (kind, params, x0, v0, n_steps), args.repeats)
        rows.append(("numba", t_nb))
        out_np = _kernels_numpy.chart_ode_batch(kind, params, x0, v0,
                                                n_steps, order=2)
        gap = max(float(np.abs(a - b).max())
                  for a, b in zip(out_np, out_nb))
        print(f"first numba call (includes jit): {t_compile:.3f} s")
        print(f"twin agreement: max abs gap {gap:.3e}")

    print(f"{'backend':<8} {'best of ' + str(args.repeats):>12}")
    for name, t in rows:
        print(f"{name:<8} {t:>10.4f} s")
    if len(rows) == 2:
        print(f"speedup: {rows[0][1] / rows[1][1]:.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
