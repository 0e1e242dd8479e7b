"""Ambient differential geometry: curvature, geodesics, normal charts.

The chart machinery is what the surface solver actually consumes.  A
NormalChart at center P with radius eps maps the unit ball through
y -> exp_P(eps F y), where F orthonormalizes g(P), and reports the
pulled-back metric rescaled by eps^{-2}.  In those coordinates the
ambient space is a perturbation of flat R^3 of size O(eps^2), which is
the regime every expansion in this package lives in.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError, IntegratorError, NoConvergenceError
from .kernels import chart_ode_batch, expand_pairs, steps_for
from .providers import CallableProvider

_EYE3 = np.eye(3)


# ---------------------------------------------------------------------------
# curvature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CurvatureBundle:
    """Pointwise curvature data in coordinate components, batched over N."""

    g: np.ndarray          # (N,3,3)
    ginv: np.ndarray       # (N,3,3)
    christoffel: np.ndarray  # (N,3,3,3), Gamma^a_{bc}
    ricci: np.ndarray      # (N,3,3)
    scalar: np.ndarray     # (N,)
    riemann: np.ndarray    # (N,3,3,3,3), fully covariant R_{abcd}
    einstein: np.ndarray   # (N,3,3)


def _riemann_from_ricci(g, ric, sc):
    """Fully covariant Riemann tensor from Ricci data, valid in dimension 3.

    R_abcd = g_ac R_bd + g_bd R_ac - g_ad R_bc - g_bc R_ad
             - (Sc/2)(g_ac g_bd - g_ad g_bc)
    """
    gr = np.einsum("nac,nbd->nabcd", g, ric)
    rg = np.einsum("nac,nbd->nabcd", ric, g)
    gg = np.einsum("nac,nbd->nabcd", g, g)
    riem = gr + rg
    riem -= np.swapaxes(gr, 3, 4) + np.swapaxes(rg, 3, 4)
    riem -= 0.5 * sc[:, None, None, None, None] * (gg - np.swapaxes(gg, 3, 4))
    return riem


def curvature_bundle(provider, X, route="closed"):
    """Evaluate the full curvature package at points X.

    route="closed" uses the provider's exact formulas (conformal
    providers only); route="fd" re-derives everything from metric values
    by finite differences and is the independent cross-check.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    provider.check_domain(X)
    if route == "fd" or not getattr(provider, "is_conformal", False):
        src = provider if isinstance(provider, CallableProvider) else CallableProvider(
            provider.eval, name=f"fd[{provider.name}]",
            validity_radius=provider.validity_radius,
            inner_radius=provider.inner_radius,
        )
        g = src.eval(X)
        gam = src.christoffel(X)
        ric = src.ricci(X)
        sc = np.einsum("nbc,nbc->n", np.linalg.inv(g), ric)
    elif route == "closed":
        g = provider.eval(X)
        gam = provider.christoffel(X)
        ric = provider.ricci(X)
        sc = provider.scalar_curvature(X)
    else:
        raise ValueError(f"unknown curvature route: {route}")
    ginv = np.linalg.inv(g)
    riem = _riemann_from_ricci(g, ric, sc)
    ein = ric - 0.5 * sc[:, None, None] * g
    return CurvatureBundle(g, ginv, gam, ric, sc, riem, ein)


# ---------------------------------------------------------------------------
# geodesics
# ---------------------------------------------------------------------------

def _generic_exp(provider, x0, v0, n_steps):
    """RK4 on the geodesic system with finite-difference Christoffels."""
    x = np.array(x0, dtype=np.float64)
    v = np.array(v0, dtype=np.float64)
    h = 1.0 / n_steps

    def acc(xx, vv):
        gam = provider.christoffel(xx)
        return -np.einsum("nabc,nb,nc->na", gam, vv, vv)

    for _ in range(n_steps):
        k1x, k1v = v, acc(x, v)
        k2x, k2v = v + 0.5 * h * k1v, acc(x + 0.5 * h * k1x, v + 0.5 * h * k1v)
        k3x, k3v = v + 0.5 * h * k2v, acc(x + 0.5 * h * k2x, v + 0.5 * h * k2v)
        k4x, k4v = v + h * k3v, acc(x + h * k3x, v + h * k3v)
        x = x + (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        v = v + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    return x, v


def exp_map(provider, P, V, with_velocity=False):
    """Geodesic exponential: endpoint of the unit-time geodesic from P
    with initial velocity row(s) V.  Accepts V of shape (3,) or (N,3).
    """
    P = np.asarray(P, dtype=np.float64).reshape(3)
    V = np.asarray(V, dtype=np.float64)
    single = V.ndim == 1
    V2 = np.atleast_2d(V)
    provider.check_domain(P)
    vmax = float(np.sqrt(np.einsum("na,na->n", V2, V2).max(initial=0.0)))
    n_steps = steps_for(vmax)
    if getattr(provider, "is_conformal", False):
        X, Vend, _, _, _, _ = chart_ode_batch(provider.kind, provider.kparams, P, V2, n_steps, order=0)
    else:
        x0 = np.broadcast_to(P, V2.shape).copy()
        X, Vend = _generic_exp(provider, x0, V2, n_steps)
    if not np.all(np.isfinite(X)):
        raise IntegratorError("geodesic integration produced non-finite points")
    provider.check_domain(X)
    if single:
        X, Vend = X[0], Vend[0]
    return (X, Vend) if with_velocity else X


def orthonormal_frame(provider, P, rotation=None):
    """Columns form a g(P)-orthonormal frame: F^T g(P) F = I.

    Built from the Cholesky factor of g(P), so for a conformal metric it
    is the scalar e^{-u(P)} I and commutes with every rotation.  An
    optional rotation in O(3) post-composes the frame.
    """
    P = np.asarray(P, dtype=np.float64).reshape(3)
    g = provider.eval(P[None, :])[0]
    L = np.linalg.cholesky(g)
    F = np.linalg.inv(L).T
    if rotation is not None:
        Q = np.asarray(rotation, dtype=np.float64)
        if not np.allclose(Q.T @ Q, _EYE3, atol=1.0e-12):
            raise DomainError("frame rotation must be orthogonal")
        F = F @ Q
    return F


# ---------------------------------------------------------------------------
# charts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChartFields:
    """Everything the surface machinery needs at a batch of chart points.

    G is the eps^{-2}-rescaled pullback metric (identity at the chart
    center), dG[...,c] its chart-coordinate derivative, Dc the full
    differential of the chart map (scale included), ric the pullback of
    the ambient Ricci tensor, sc the rescaled ambient scalar curvature.
    X and gX are the ambient positions and the ambient metric there.
    """

    X: np.ndarray      # (N,3)
    G: np.ndarray      # (N,3,3)
    dG: np.ndarray     # (N,3,3,3)
    Dc: np.ndarray     # (N,3,3)
    ric: np.ndarray    # (N,3,3)
    sc: np.ndarray     # (N,)
    gX: np.ndarray     # (N,3,3)


def christoffel_from_metric(G, dG):
    """Chart Christoffels Gamma^a_{bc} from metric values and derivatives."""
    Ginv = np.linalg.inv(G)
    t = dG + np.swapaxes(dG, 2, 3) - np.moveaxis(dG, 3, 1)
    return 0.5 * np.einsum("nad,ndbc->nabc", Ginv, t)


class NormalChart:
    """Rescaled geodesic normal chart of radius eps about P.

    Only closed-form conformal providers are supported; the variational
    ODE system that supplies exact chart derivatives needs the metric's
    third derivative chain, which a bare callback cannot give.
    """

    def __init__(self, provider, center, radius, rotation=None):
        if not getattr(provider, "is_conformal", False):
            raise DomainError(
                "normal charts need a closed-form conformal provider; "
                f"got {provider.name}"
            )
        if radius <= 0.0:
            raise DomainError(f"chart radius must be positive, got {radius}")
        self.provider = provider
        self.center = np.asarray(center, dtype=np.float64).reshape(3).copy()
        provider.check_domain(self.center)
        self.scale = float(radius)
        self.frame = orthonormal_frame(provider, self.center, rotation)

    def map_points(self, Y):
        """Ambient positions of chart points, no derivative data."""
        Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
        v0 = self.scale * Y @ self.frame.T
        vmax = float(np.sqrt(np.einsum("na,na->n", v0, v0).max(initial=0.0)))
        X, _, _, _, _, _ = chart_ode_batch(
            self.provider.kind, self.provider.kparams, self.center, v0, steps_for(vmax), order=0
        )
        self.provider.check_domain(X)
        return X

    def fields(self, Y):
        """Full order-2 chart data at points Y, shape (N,3)."""
        Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
        eps = self.scale
        F = self.frame
        v0 = eps * Y @ F.T
        vmax = float(np.sqrt(np.einsum("na,na->n", v0, v0).max(initial=0.0)))
        X, _, U, _, S6, _ = chart_ode_batch(
            self.provider.kind, self.provider.kparams, self.center, v0, steps_for(vmax), order=2
        )
        if not np.all(np.isfinite(X)):
            raise IntegratorError("chart integration produced non-finite points")
        self.provider.check_domain(X)
        gX = self.provider.eval(X)
        u1, _, _ = self.provider.u_derivs(X, order=1)

        # Dc[:, mu, a] = U[:, mu, i] (eps F)[i, a]
        Dc = eps * np.einsum("nmi,ia->nma", U, F)
        S = expand_pairs(S6)  # (N,3,3,3): d^2 x^mu / d v0^i d v0^j
        D2c = eps * eps * np.einsum("nmij,ia,jb->nmab", S, F, F)

        gDc = np.einsum("nmk,nka->nma", gX, Dc)
        G = np.einsum("nma,nmb->nab", Dc, gDc) / (eps * eps)
        # dG_ab,c = eps^{-2} [D2c_ac . g Dc_b + Dc_a . g D2c_bc]
        #           + 2 (u1 . Dc_c) G_ab              (conformal dg term)
        t = np.einsum("nmac,nmb->nabc", D2c, gDc)
        dG = (t + np.swapaxes(t, 1, 2)) / (eps * eps)
        dG += 2.0 * np.einsum("nm,nmc->nc", u1, Dc)[:, None, None, :] * G[:, :, :, None]

        ric = np.einsum("nma,nmk,nkb->nab", Dc, self.provider.ricci(X), Dc)
        sc = eps * eps * self.provider.scalar_curvature(X)
        return ChartFields(X=X, G=G, dG=dG, Dc=Dc, ric=ric, sc=sc, gX=gX)

    def metric_at(self, Y):
        return self.fields(Y).G

    @cached_property
    def h_bound(self):
        """Max deviation of (G, dG) from the flat chart over the unit sphere."""
        n = 64
        idx = np.arange(n, dtype=np.float64) + 0.5
        th = np.arccos(1.0 - 2.0 * idx / n)
        ph = np.pi * (1.0 + 5.0**0.5) * idx
        Y = np.stack(
            [np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=1
        )
        f = self.fields(Y)
        dev = np.abs(f.G - _EYE3).max() + np.abs(f.dG).max()
        return float(dev)


class AffineChart:
    """Plain rescaling chart y -> x0 + scale * y, no geodesic structure.

    Useful for evaluating surface functionals on coordinate spheres of a
    given radius: the pulled-back metric is just the ambient metric at
    the mapped point, and areas scale by scale^2.
    """

    def __init__(self, provider, center, scale):
        if scale <= 0.0:
            raise DomainError(f"chart scale must be positive, got {scale}")
        self.provider = provider
        self.center = np.asarray(center, dtype=np.float64).reshape(3).copy()
        self.scale = float(scale)
        self.frame = _EYE3.copy()

    def map_points(self, Y):
        Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
        X = self.center + self.scale * Y
        self.provider.check_domain(X)
        return X

    def fields(self, Y):
        Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
        lam = self.scale
        X = self.center + lam * Y
        self.provider.check_domain(X)
        gX = self.provider.eval(X)
        G = gX.copy()
        n = X.shape[0]
        if getattr(self.provider, "is_conformal", False):
            u1, _, _ = self.provider.u_derivs(X, order=1)
            dG = 2.0 * lam * np.einsum("nc,nab->nabc", u1, gX)
            ric = lam * lam * self.provider.ricci(X)
            sc = lam * lam * self.provider.scalar_curvature(X)
        else:
            dG = lam * self.provider.metric_derivs(X)
            ric = lam * lam * self.provider.ricci(X)
            sc = np.einsum("nbc,nbc->n", np.linalg.inv(gX), ric)
        Dc = np.broadcast_to(lam * _EYE3, (n, 3, 3)).copy()
        return ChartFields(X=X, G=G, dG=dG, Dc=Dc, ric=ric, sc=sc, gX=gX)

    def metric_at(self, Y):
        return self.fields(Y).G

    @cached_property
    def h_bound(self):
        f = self.fields(np.zeros((1, 3)))
        return float(np.abs(f.G - _EYE3).max() + np.abs(f.dG).max())


# ---------------------------------------------------------------------------
# scalar-curvature critical points
# ---------------------------------------------------------------------------

def find_sc_critical(provider, start, tol=1.0e-12, max_iter=60):
    """Newton iteration on grad Sc using the provider's exact derivatives."""
    P = np.asarray(start, dtype=np.float64).reshape(3).copy()
    hist = []
    for _ in range(max_iter):
        gradv = provider.grad_scalar_curvature(P[None, :])[0]
        res = float(np.linalg.norm(gradv))
        hist.append(res)
        if res <= tol:
            return P
        H = provider.hess_scalar_curvature(P[None, :])[0]
        try:
            step = np.linalg.solve(H, gradv)
        except np.linalg.LinAlgError:
            raise DomainError(
                "scalar curvature Hessian singular during critical point search"
            ) from None
        if not np.all(np.isfinite(step)):
            raise DomainError("critical point search diverged")
        P -= step
    raise NoConvergenceError(
        f"critical point search stalled at |grad Sc| = {hist[-1]:.3e}", hist
    )
