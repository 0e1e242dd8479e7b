"""Ambient metric providers.

A provider hands the rest of the package a Riemannian metric on (a region
of) R^3 together with whatever closed-form curvature data it can supply.
The built-in family is conformally flat, g = e^{2u} delta, with u either
radial in s = |x|^2 or a sum of Gaussian bumps; those get exact
Christoffel symbols, Ricci, scalar curvature and (for the radial ones)
exact gradient and Hessian of the scalar curvature.

CallableProvider wraps an arbitrary vectorized metric callback and fills
in everything by finite differences.  It is slow and meant for
cross-checks, not production sweeps.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import DomainError, MetricError
from .kernels import u_scalar, u_tensors

KIND_EUCLIDEAN = 0
KIND_ROUND_S3 = 1
KIND_SCHWARZSCHILD = 2
KIND_QUADRATIC = 3
KIND_BUMP = 4
KIND_TWO_BUMP = 5

_EYE3 = np.eye(3)


def _w_chain(kind, kp, s):
    """Radial profile w(s) and derivatives w1..w4 for the radial kinds.

    s is an array of squared radii.  Only kinds 1..4 are radial; kind 0
    returns zeros.
    """
    s = np.asarray(s, dtype=np.float64)
    z = np.zeros_like(s)
    if kind == KIND_EUCLIDEAN:
        return z, z, z, z, z
    if kind == KIND_ROUND_S3:
        a = kp[0]
        t = 1.0 + a * s
        w = -np.log(t)
        return w, -a / t, a**2 / t**2, -2.0 * a**3 / t**3, 6.0 * a**4 / t**4
    if kind == KIND_SCHWARZSCHILD:
        c = kp[0]
        r = np.sqrt(s)
        cr = c + r
        w = 2.0 * np.log1p(c / r)
        w1 = -c / (r**2 * cr)
        w2 = c * (2.0 * c + 3.0 * r) / (2.0 * r**4 * cr**2)
        w3 = -c * (8.0 * c**2 + 21.0 * c * r + 15.0 * r**2) / (4.0 * r**6 * cr**3)
        w4 = 3.0 * c * (16.0 * c**3 + 59.0 * c**2 * r + 76.0 * c * r**2 + 35.0 * r**3) / (
            8.0 * r**8 * cr**4
        )
        return w, w1, w2, w3, w4
    if kind == KIND_QUADRATIC:
        eta = kp[0]
        return eta * s, np.full_like(s, eta), z, z, z
    if kind == KIND_BUMP:
        eta, q = kp[0], kp[1]
        e = eta * np.exp(-q * s)
        return e, -q * e, q**2 * e, -q**3 * e, q**4 * e
    raise ValueError(f"not a radial kind: {kind}")


def _sigma_chain(kind, kp, s):
    """Scalar curvature as a function of s for radial kinds.

    Returns (sigma, sigma', sigma'') where Sc(x) = sigma(|x|^2), so that
    grad Sc = 2 sigma' x and Hess Sc = 2 sigma' I + 4 sigma'' x x^T.
    Constant-curvature kinds are special-cased to avoid cancellation.
    """
    s = np.asarray(s, dtype=np.float64)
    z = np.zeros_like(s)
    if kind in (KIND_EUCLIDEAN, KIND_SCHWARZSCHILD):
        return z, z, z
    if kind == KIND_ROUND_S3:
        return np.full_like(s, 24.0 * kp[0]), z, z
    w, w1, w2, w3, w4 = _w_chain(kind, kp, s)
    e = np.exp(-2.0 * w)
    p = -24.0 * w1 - 16.0 * s * w2 - 8.0 * s * w1**2
    dp = -40.0 * w2 - 16.0 * s * w3 - 8.0 * w1**2 - 16.0 * s * w1 * w2
    ddp = -56.0 * w3 - 16.0 * s * w4 - 32.0 * w1 * w2 - 16.0 * s * (w2**2 + w1 * w3)
    sig = e * p
    dsig = e * (dp - 2.0 * w1 * p)
    ddsig = e * (ddp - 4.0 * w1 * dp + (4.0 * w1**2 - 2.0 * w2) * p)
    return sig, dsig, ddsig


class ConformalProvider:
    """Metric g = e^{2u} delta with closed-form derivative chains.

    kind selects the profile (module-level KIND_* constants), kparams is
    the flat parameter vector the compute kernels consume.  params keeps
    the user-facing constructor arguments for echoing into manifests.
    """

    is_conformal = True

    def __init__(self, name, kind, kparams, params, validity_radius, inner_radius=0.0):
        self.name = name
        self.kind = int(kind)
        self.kparams = np.asarray(kparams, dtype=np.float64)
        self.params = dict(params)
        self.validity_radius = float(validity_radius)
        self.inner_radius = float(inner_radius)

    def __repr__(self):
        args = ", ".join(f"{k}={v}" for k, v in self.params.items())
        return f"{self.name}({args})"

    # -- domain ---------------------------------------------------------

    def check_domain(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        r = np.sqrt(np.einsum("na,na->n", X, X))
        if np.any(r > self.validity_radius):
            raise DomainError(
                f"point at radius {float(r.max()):.6g} outside validity radius "
                f"{self.validity_radius:.6g} of {self.name}"
            )
        if self.inner_radius > 0.0 and np.any(r < self.inner_radius):
            raise DomainError(
                f"point at radius {float(r.min()):.6g} inside excluded ball "
                f"{self.inner_radius:.6g} of {self.name}"
            )

    # -- conformal factor ----------------------------------------------

    def u(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return u_scalar(self.kind, self.kparams, X)

    def u_derivs(self, X, order=3):
        """Conformal exponent derivative tensors (u1, u2, u3)."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return u_tensors(self.kind, self.kparams, X)

    # -- metric and connection -----------------------------------------

    def eval(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        f = np.exp(2.0 * self.u(X))
        return f[:, None, None] * _EYE3

    def christoffel(self, X):
        """Gamma^a_{bc} = d_ab u_c + d_ac u_b - d_bc u_a, shape (N,3,3,3)."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        u1, _, _ = self.u_derivs(X, order=1)
        n = X.shape[0]
        G = np.zeros((n, 3, 3, 3))
        G += np.einsum("ab,nc->nabc", _EYE3, u1)
        G += np.einsum("ac,nb->nabc", _EYE3, u1)
        G -= np.einsum("bc,na->nabc", _EYE3, u1)
        return G

    # -- curvature ------------------------------------------------------

    def ricci(self, X):
        """Ricci tensor in coordinate components, shape (N,3,3)."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        u1, u2, _ = self.u_derivs(X, order=2)
        lap = np.einsum("naa->n", u2)
        nsq = np.einsum("na,na->n", u1, u1)
        ric = -(u2 - np.einsum("na,nb->nab", u1, u1))
        ric -= (lap + nsq)[:, None, None] * _EYE3
        return ric

    def scalar_curvature(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if self.kind != KIND_TWO_BUMP:
            s = np.einsum("na,na->n", X, X)
            sig, _, _ = _sigma_chain(self.kind, self.kparams, s)
            return sig
        u1, u2, _ = self.u_derivs(X, order=2)
        lap = np.einsum("naa->n", u2)
        nsq = np.einsum("na,na->n", u1, u1)
        return np.exp(-2.0 * self.u(X)) * (-4.0 * lap - 2.0 * nsq)

    def grad_scalar_curvature(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if self.kind != KIND_TWO_BUMP:
            s = np.einsum("na,na->n", X, X)
            _, dsig, _ = _sigma_chain(self.kind, self.kparams, s)
            return 2.0 * dsig[:, None] * X
        # grad of e^{-2u}(-4 lap u - 2 |du|^2) via the third derivative tensor
        u1, u2, u3 = self.u_derivs(X, order=3)
        lap = np.einsum("naa->n", u2)
        nsq = np.einsum("na,na->n", u1, u1)
        p = -4.0 * lap - 2.0 * nsq
        dp = -4.0 * np.einsum("naac->nc", u3) - 4.0 * np.einsum("na,nac->nc", u1, u2)
        return np.exp(-2.0 * self.u(X))[:, None] * (dp - 2.0 * u1 * p[:, None])

    def hess_scalar_curvature(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if self.kind != KIND_TWO_BUMP:
            s = np.einsum("na,na->n", X, X)
            _, dsig, ddsig = _sigma_chain(self.kind, self.kparams, s)
            return 2.0 * dsig[:, None, None] * _EYE3 + 4.0 * ddsig[:, None, None] * np.einsum(
                "na,nb->nab", X, X
            )
        # central differences of the closed-form gradient
        h = 1.0e-5
        n = X.shape[0]
        H = np.empty((n, 3, 3))
        for c in range(3):
            e = np.zeros(3)
            e[c] = h
            gp = self.grad_scalar_curvature(X + e)
            gm = self.grad_scalar_curvature(X - e)
            H[:, :, c] = (gp - gm) / (2.0 * h)
        return 0.5 * (H + np.swapaxes(H, 1, 2))

    def sc_critical_point(self):
        """Known nondegenerate critical point of Sc, or None."""
        if self.kind in (KIND_QUADRATIC, KIND_BUMP):
            return np.zeros(3)
        return None


def euclidean():
    return ConformalProvider("euclidean", KIND_EUCLIDEAN, [], {}, 1.0e12)


def round_s3(R=1.0):
    R = float(R)
    if R <= 0.0:
        raise DomainError(f"round_s3 radius must be positive, got {R}")
    a = 1.0 / (4.0 * R * R)
    return ConformalProvider("round_s3", KIND_ROUND_S3, [a], {"R": R}, 10.0 * R)


def schwarzschild(m=1.0):
    m = float(m)
    if m <= 0.0:
        raise DomainError(f"schwarzschild mass must be positive, got {m}")
    return ConformalProvider(
        "schwarzschild", KIND_SCHWARZSCHILD, [0.5 * m], {"m": m}, 1.0e12,
        inner_radius=0.1 * m,
    )


def conformal_quadratic(eta=-0.02):
    eta = float(eta)
    # keep e^{2u} representable
    rad = 1.0e12 if eta == 0.0 else math.sqrt(300.0 / abs(eta))
    return ConformalProvider("conformal_quadratic", KIND_QUADRATIC, [eta], {"eta": eta}, rad)


def conformal_bump(eta=0.1, sigma=1.0):
    eta, sigma = float(eta), float(sigma)
    if sigma <= 0.0:
        raise DomainError(f"conformal_bump width must be positive, got {sigma}")
    q = 1.0 / (sigma * sigma)
    return ConformalProvider(
        "conformal_bump", KIND_BUMP, [eta, q], {"eta": eta, "sigma": sigma}, 1.0e12
    )


def conformal_two_bump(eta1=0.1, eta2=0.05, sigma=1.0, center=(1.0, 0.0, 0.0)):
    """Two Gaussian bumps of common width at +-center with distinct heights.

    The asymmetry gives the scalar curvature a generic, non-symmetric
    landscape; with eta1 != eta2 its critical points sit away from any
    symmetry locus.
    """
    eta1, eta2, sigma = float(eta1), float(eta2), float(sigma)
    if sigma <= 0.0:
        raise DomainError(f"conformal_two_bump width must be positive, got {sigma}")
    cx, cy, cz = (float(c) for c in center)
    q = 1.0 / (sigma * sigma)
    return ConformalProvider(
        "conformal_two_bump",
        KIND_TWO_BUMP,
        [eta1, eta2, q, cx, cy, cz],
        {"eta1": eta1, "eta2": eta2, "sigma": sigma, "center": (cx, cy, cz)},
        1.0e12,
    )


_FACTORIES = {
    "euclidean": euclidean,
    "round_s3": round_s3,
    "schwarzschild": schwarzschild,
    "conformal_quadratic": conformal_quadratic,
    "conformal_bump": conformal_bump,
    "conformal_two_bump": conformal_two_bump,
}


def make_provider(name, **params):
    """Construct a built-in provider by name, validating parameter names."""
    try:
        fac = _FACTORIES[name]
    except KeyError:
        raise DomainError(f"unknown metric: {name}") from None
    try:
        return fac(**params)
    except TypeError as exc:
        raise DomainError(f"bad parameters for metric {name}: {exc}") from None


def provider_names():
    return sorted(_FACTORIES)


class CallableProvider:
    """Wrap a vectorized metric callback; curvature by finite differences.

    eval_fn maps (N,3) points to (N,3,3) symmetric positive matrices.  The
    finite-difference stencils are fourth order in a step scaled by `h`.
    Intended for cross-checking closed-form providers, not for sweeps.
    """

    is_conformal = False
    kind = None

    def __init__(self, eval_fn, name="callable", validity_radius=1.0e12,
                 inner_radius=0.0, h=1.0e-3):
        self._fn = eval_fn
        self.name = name
        self.params = {}
        self.validity_radius = float(validity_radius)
        self.inner_radius = float(inner_radius)
        self.h = float(h)

    check_domain = ConformalProvider.check_domain

    def eval(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        g = np.asarray(self._fn(X), dtype=np.float64)
        if g.shape != (X.shape[0], 3, 3):
            raise MetricError(f"metric callback returned shape {g.shape}")
        if not np.allclose(g, np.swapaxes(g, 1, 2), atol=1.0e-12):
            raise MetricError("metric callback returned a non-symmetric matrix")
        return g

    def _d1(self, f, X, c, h):
        e = np.zeros(3)
        e[c] = 1.0
        return (
            -f(X + 2.0 * h * e) + 8.0 * f(X + h * e) - 8.0 * f(X - h * e) + f(X - 2.0 * h * e)
        ) / (12.0 * h)

    def metric_derivs(self, X):
        """dg_{ab,c} = partial_c g_ab by fourth-order differences, (N,3,3,3)."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        out = np.empty((X.shape[0], 3, 3, 3))
        for c in range(3):
            out[:, :, :, c] = self._d1(self.eval, X, c, self.h)
        return out

    def christoffel(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        g = self.eval(X)
        dg = self.metric_derivs(X)
        ginv = np.linalg.inv(g)
        # Gamma^a_{bc} = 1/2 g^{ad} (d_c g_{db} + d_b g_{dc} - d_d g_{bc})
        t = dg + np.swapaxes(dg, 2, 3) - np.moveaxis(dg, 3, 1)
        return 0.5 * np.einsum("nad,ndbc->nabc", ginv, t)

    def ricci(self, X):
        """Ric_{bc} = d_a G^a_{bc} - d_c G^a_{ba} + G^a_{al} G^l_{bc} - G^a_{cl} G^l_{ba}."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        h = 2.0 * self.h
        dG = np.empty((X.shape[0], 3, 3, 3, 3))
        for c in range(3):
            dG[..., c] = self._d1(self.christoffel, X, c, h)
        G = self.christoffel(X)
        t1 = np.einsum("nabca->nbc", dG)
        t2 = np.einsum("nabac->nbc", dG)
        t3 = np.einsum("naal,nlbc->nbc", G, G)
        t4 = np.einsum("nacl,nlba->nbc", G, G)
        return t1 - t2 + t3 - t4

    def scalar_curvature(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        g = self.eval(X)
        return np.einsum("nbc,nbc->n", np.linalg.inv(g), self.ricci(X))

    def sc_critical_point(self):
        return None
