"""Curvature bundles, geodesics, charts."""
import math

import numpy as np
import pytest

from willmore.ambient import (AffineChart, NormalChart, curvature_bundle,
                              exp_map, find_sc_critical, orthonormal_frame)
from willmore.errors import DomainError
from willmore.providers import CallableProvider

pytestmark = []


def _points(seed=11, n=12, scale=0.3):
    rng = np.random.default_rng(seed)
    return scale * rng.standard_normal((n, 3))


def test_closed_vs_fd_routes(quad, bump, sphere3):
    for prov in (quad, bump, sphere3):
        X = _points()
        a = curvature_bundle(prov, X, route="closed")
        b = curvature_bundle(prov, X, route="fd")
        assert np.abs(a.g - b.g).max() <= 1.0e-10
        assert np.abs(a.christoffel - b.christoffel).max() <= 1.0e-7
        assert np.abs(a.ricci - b.ricci).max() <= 1.0e-5
        assert np.abs(a.scalar - b.scalar).max() <= 1.0e-5


def test_riemann_symmetries(two_bump):
    R = curvature_bundle(two_bump, _points(3)).riemann
    scale = np.abs(R).max()
    assert np.abs(R + np.swapaxes(R, 1, 2)).max() <= 1.0e-12 * scale
    assert np.abs(R + np.swapaxes(R, 3, 4)).max() <= 1.0e-12 * scale
    assert np.abs(R - np.transpose(R, (0, 3, 4, 1, 2))).max() <= 1.0e-12 * scale
    bianchi = R + np.transpose(R, (0, 1, 3, 4, 2)) + np.transpose(R, (0, 1, 4, 2, 3))
    assert np.abs(bianchi).max() <= 1.0e-12 * scale


def test_traces(bump):
    b = curvature_bundle(bump, _points(5))
    tr = np.einsum("nab,nab->n", b.ginv, b.ricci)
    assert np.abs(tr - b.scalar).max() <= 1.0e-11 * (1.0 + np.abs(b.scalar).max())
    # Einstein trace is -Sc/2 in three dimensions
    tre = np.einsum("nab,nab->n", b.ginv, b.einstein)
    assert np.abs(tre + 0.5 * b.scalar).max() <= 1.0e-11 * (1.0 + np.abs(b.scalar).max())


def test_space_form_curvatures(sphere3, schw):
    X = _points(7, scale=0.2)
    sc = curvature_bundle(sphere3, X).scalar
    assert np.abs(sc - 6.0).max() <= 1.0e-10
    Xs = np.array([[3.0, 0.5, -0.2], [2.0, 0.0, 1.0]])
    assert np.abs(curvature_bundle(schw, Xs).scalar).max() <= 1.0e-10


def test_exp_map_basics(bump):
    P = np.array([0.1, -0.2, 0.05])
    assert np.abs(exp_map(bump, P, np.zeros(3)) - P).max() <= 1.0e-14
    # geodesics preserve their g-speed
    V = np.array([0.11, 0.07, -0.05])
    X, Vend = exp_map(bump, P, V, with_velocity=True)
    g0 = bump.eval(P[None, :])[0]
    g1 = bump.eval(X[None, :])[0]
    s0 = float(V @ g0 @ V)
    s1 = float(Vend @ g1 @ Vend)
    assert abs(s1 - s0) <= 1.0e-10 * s0


def test_exp_map_semigroup(quad):
    P = np.array([0.2, 0.1, 0.0])
    V = np.array([0.08, -0.03, 0.06])
    X1, V1 = exp_map(quad, P, 0.4 * V, with_velocity=True)
    X2 = exp_map(quad, X1, 0.6 * (V1 / 0.4))
    X = exp_map(quad, P, V)
    assert np.abs(X2 - X).max() <= 1.0e-10


def test_orthonormal_frame(two_bump):
    P = np.array([0.3, -0.1, 0.2])
    F = orthonormal_frame(two_bump, P)
    g = two_bump.eval(P[None, :])[0]
    assert np.abs(F.T @ g @ F - np.eye(3)).max() <= 1.0e-13
    with pytest.raises(DomainError):
        orthonormal_frame(two_bump, P, rotation=np.diag([1.0, 2.0, 1.0]))


def test_normal_chart_is_normal(bump, grid8):
    # metric identity at the center, first derivatives vanishing there
    chart = NormalChart(bump, np.array([0.2, 0.0, -0.1]), 0.1)
    f = chart.fields(np.zeros((1, 3)))
    assert np.abs(f.G[0] - np.eye(3)).max() <= 1.0e-11
    assert np.abs(f.dG[0]).max() <= 1.0e-9


def test_normal_chart_radial_gauge(bump):
    # Gauss lemma: G(y) y = y along every ray, at finite radius
    chart = NormalChart(bump, np.zeros(3), 0.15)
    rng = np.random.default_rng(2)
    Y = rng.standard_normal((10, 3))
    Y /= np.linalg.norm(Y, axis=1)[:, None]
    G = chart.metric_at(Y)
    res = np.einsum("nab,nb->na", G, Y) - Y
    assert np.abs(res).max() <= 1.0e-10


def test_normal_chart_h_scaling(bump):
    # the chart deviation from flat scales like radius^2
    h1 = NormalChart(bump, np.zeros(3), 0.1).h_bound
    h2 = NormalChart(bump, np.zeros(3), 0.05).h_bound
    slope = math.log(h1 / h2) / math.log(2.0)
    assert 1.8 <= slope <= 2.2


def test_normal_chart_rejects(bump, sphere3, schw):
    with pytest.raises(DomainError):
        NormalChart(bump, np.zeros(3), -0.1)
    with pytest.raises(DomainError):
        NormalChart(sphere3, np.array([50.0, 0.0, 0.0]), 0.1)
    with pytest.raises(DomainError):
        NormalChart(schw, np.zeros(3), 0.1)  # center inside the excluded ball
    fd_only = CallableProvider(lambda X: np.broadcast_to(np.eye(3), (len(X), 3, 3)).copy())
    with pytest.raises(DomainError):
        NormalChart(fd_only, np.zeros(3), 0.1)


def test_affine_chart(schw):
    # center may be outside the provider domain; mapped points must not be
    chart = AffineChart(schw, np.zeros(3), 2.0)
    Y = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, -1.0]])
    X = chart.map_points(Y)
    assert np.abs(X - 2.0 * Y).max() == 0.0
    with pytest.raises(DomainError):
        AffineChart(schw, np.zeros(3), 0.05).map_points(Y)


def test_frame_rotation_cancels_in_chart(bump, grid8):
    # the chart metric pulled back through a rotated frame is the rotation
    # conjugate of the unrotated one
    th = 0.7
    Q = np.array([[math.cos(th), -math.sin(th), 0.0],
                  [math.sin(th), math.cos(th), 0.0],
                  [0.0, 0.0, 1.0]])
    P = np.array([0.1, 0.2, 0.0])
    Y = _points(9, n=8, scale=1.0)
    Y /= np.linalg.norm(Y, axis=1)[:, None]
    G1 = NormalChart(bump, P, 0.1).metric_at(Y @ Q.T)
    G2 = NormalChart(bump, P, 0.1, rotation=Q).metric_at(Y)
    conj = np.einsum("ab,nbc,dc->nad", Q.T, G1, Q.T)
    assert np.abs(conj - G2).max() <= 1.0e-11


def test_find_sc_critical(bump, two_bump):
    P = find_sc_critical(bump, np.array([0.2, -0.1, 0.1]))
    assert np.linalg.norm(P) <= 1.0e-10
    P2 = find_sc_critical(two_bump, np.zeros(3))
    assert abs(P2[0] - (-0.14224757)) <= 1.0e-6
    assert abs(P2[1]) <= 1.0e-10 and abs(P2[2]) <= 1.0e-10
