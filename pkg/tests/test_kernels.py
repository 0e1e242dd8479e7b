"""Kernel twins: the numba implementation must match the numpy one to
roundoff, and both must match independent finite-difference derivatives
of the endpoint map."""
import numpy as np
import pytest

from willmore import _kernels_numpy as knp
from willmore.kernels import chart_ode_batch, expand_pairs, steps_for
from willmore.providers import (conformal_bump, conformal_quadratic,
                                conformal_two_bump, round_s3, schwarzschild)

numba_kernels = pytest.importorskip("willmore._kernels_numba")

PROVIDERS = [
    round_s3(1.0),
    schwarzschild(1.0),
    conformal_quadratic(-0.02),
    conformal_bump(0.1, 1.0),
    conformal_two_bump(0.1, 0.05, 1.0, (1.0, 0.0, 0.0)),
]


def _directions(n=14, scale=0.15, seed=7):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((n, 3))
    v *= scale / np.linalg.norm(v, axis=1)[:, None]
    return v


@pytest.mark.parametrize("prov", PROVIDERS, ids=lambda p: p.name)
def test_twins_agree(prov):
    x0 = np.array([0.15, -0.1, 0.2])
    if prov.name.startswith("schwarzschild"):
        x0 = np.array([3.0, 0.1, -0.2])
    v0 = _directions()
    out_np = knp.chart_ode_batch(prov.kind, prov.kparams, x0, v0, 32, order=2)
    out_nb = numba_kernels.chart_ode_batch(prov.kind, prov.kparams, x0, v0,
                                           32, order=2)
    for a, b in zip(out_np, out_nb):
        assert np.abs(a - b).max() <= 1.0e-12


def test_euclidean_exact():
    x0 = np.array([0.3, 0.1, -0.2])
    v0 = _directions()
    X, V, U, Vm, S, T = chart_ode_batch(0, np.zeros(1), x0, v0, 32, order=2)
    assert np.abs(X - (x0 + v0)).max() == 0.0
    assert np.abs(V - v0).max() == 0.0
    assert np.abs(U - np.eye(3)).max() == 0.0
    assert np.abs(S).max() == 0.0


def test_first_variation_matches_fd():
    prov = conformal_bump(0.1, 1.0)
    x0 = np.zeros(3)
    v0 = _directions(6)
    _, _, U, _, _, _ = chart_ode_batch(prov.kind, prov.kparams, x0, v0, 64,
                                       order=1)
    h = 1.0e-6
    for j in range(3):
        dv = np.zeros(3)
        dv[j] = h
        Xp, _, _, _, _, _ = chart_ode_batch(prov.kind, prov.kparams, x0,
                                            v0 + dv, 64, order=0)
        Xm, _, _, _, _, _ = chart_ode_batch(prov.kind, prov.kparams, x0,
                                            v0 - dv, 64, order=0)
        fd = (Xp - Xm) / (2.0 * h)
        assert np.abs(U[:, :, j] - fd).max() <= 1.0e-8


def test_second_variation_matches_fd():
    prov = conformal_quadratic(-0.02)
    x0 = np.zeros(3)
    v0 = _directions(4)
    _, _, _, _, S, _ = chart_ode_batch(prov.kind, prov.kparams, x0, v0, 64,
                                       order=2)
    S_full = expand_pairs(S)
    h = 1.0e-4
    for a in range(3):
        for b in range(3):
            da = np.zeros(3)
            da[a] = h
            db = np.zeros(3)
            db[b] = h
            Xpp, *_ = chart_ode_batch(prov.kind, prov.kparams, x0,
                                      v0 + da + db, 64, order=0)
            Xpm, *_ = chart_ode_batch(prov.kind, prov.kparams, x0,
                                      v0 + da - db, 64, order=0)
            Xmp, *_ = chart_ode_batch(prov.kind, prov.kparams, x0,
                                      v0 - da + db, 64, order=0)
            Xmm, *_ = chart_ode_batch(prov.kind, prov.kparams, x0,
                                      v0 - da - db, 64, order=0)
            fd = (Xpp - Xpm - Xmp + Xmm) / (4.0 * h * h)
            assert np.abs(S_full[:, :, a, b] - fd).max() <= 1.0e-6


def test_order_truncation_keeps_slots():
    prov = round_s3(1.0)
    v0 = _directions(5)
    _, _, U, Vm, S, T = chart_ode_batch(prov.kind, prov.kparams, np.zeros(3),
                                        v0, 32, order=0)
    assert np.abs(U).max() == 0.0
    assert np.abs(Vm - np.eye(3)).max() == 0.0
    assert np.abs(S).max() == 0.0 and np.abs(T).max() == 0.0


def test_u_scalar_consistent_with_tensors():
    prov = conformal_two_bump(0.1, 0.05, 1.0, (1.0, 0.0, 0.0))
    rng = np.random.default_rng(3)
    X = 0.3 * rng.standard_normal((20, 3))
    u0 = knp.u_scalar(prov.kind, prov.kparams, X)
    u1, _, _ = knp.u_tensors(prov.kind, prov.kparams, X)
    h = 1.0e-6
    for j in range(3):
        dX = np.zeros_like(X)
        dX[:, j] = h
        fd = (knp.u_scalar(prov.kind, prov.kparams, X + dX)
              - knp.u_scalar(prov.kind, prov.kparams, X - dX)) / (2.0 * h)
        assert np.abs(u1[:, j] - fd).max() <= 1.0e-8
    assert np.all(np.isfinite(u0))


def test_steps_floor():
    assert steps_for(0.01) == 32
    assert steps_for(0.125) == 32
    assert steps_for(1.0) == 256
