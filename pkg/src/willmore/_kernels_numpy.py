"""Pure numpy implementation of the hot ODE kernels.

Batched geodesic integration in a conformally flat ambient metric
g = e^{2u} delta, together with the first variational system
(U = dx/dv0, V = dv/dv0) and the symmetric second variational system
(S = d2x/dv0^2, T = d2v/dv0^2, stored by index pairs).

This is the reference semantics; the numba twin in _kernels_numba.py must
agree to near machine precision (tested).  Everything here is vectorized
over the batch of initial velocities and uses fixed-step classical RK4, so
results are bitwise reproducible.

Conformal kind codes (shared with the numba twin and the providers):
  0 euclidean            params: ()
  1 round 3-sphere       params: (a,)            u = -log(1 + a s)
  2 schwarzschild slice  params: (c,)            u = 2 log(1 + c / sqrt(s))
  3 quadratic exponent   params: (eta,)          u = eta s
  4 gaussian bump        params: (eta, q)        u = eta exp(-q s)
  5 two gaussian bumps   params: (e1, e2, q, ax, ay, az)
with s = |x - center|^2 and q = 1/sigma^2.  Kind 5 sums two gaussian
centers at +a and -a with amplitudes e1, e2.
"""
from __future__ import annotations

import numpy as np

# symmetric index pairs for the second variational system
PAIRS = ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2))

_EYE = np.eye(3)


def _gauss_chain(eta, q, s):
    b = eta * np.exp(-q * s)
    return -q * b, q * q * b, -q ** 3 * b


def _radial_chain123(kind, params, s):
    """(c1, c2, c3) = first three s-derivatives of the radial profile."""
    if kind == 1:
        a = params[0]
        t = a / (1.0 + a * s)
        return -t, t * t, -2.0 * t ** 3
    if kind == 2:
        c = params[0]
        r = np.sqrt(s)
        A = c + r
        c1 = -c / (s * A)
        c2 = c * (2.0 * c + 3.0 * r) / (2.0 * s * s * A * A)
        c3 = -c * (8.0 * c * c + 21.0 * c * r + 15.0 * r * r) / (4.0 * s ** 3 * A ** 3)
        return c1, c2, c3
    if kind == 3:
        eta = params[0]
        z = np.zeros_like(s)
        return np.full_like(s, eta), z, z
    if kind == 4:
        return _gauss_chain(params[0], params[1], s)
    raise ValueError(f"no radial chain for kind {kind}")


def _contributions(kind, params, X):
    """Yield (d, c1, c2, c3) per conformal center, d = X - center."""
    if kind == 5:
        e1, e2, q = params[0], params[1], params[2]
        cen = np.asarray(params[3:6])
        for amp, sign in ((e1, 1.0), (e2, -1.0)):
            d = X - sign * cen
            s = np.einsum("na,na->n", d, d)
            yield (d,) + _gauss_chain(amp, q, s)
    else:
        s = np.einsum("na,na->n", X, X)
        yield (X,) + _radial_chain123(kind, params, s)


def u_scalar(kind, params, X):
    """Conformal exponent u(x) with g = e^{2u} delta, batched."""
    X = np.atleast_2d(X)
    if kind == 0:
        return np.zeros(len(X))
    if kind == 5:
        e1, e2, q = params[0], params[1], params[2]
        cen = np.asarray(params[3:6])
        s1 = np.einsum("na,na->n", X - cen, X - cen)
        s2 = np.einsum("na,na->n", X + cen, X + cen)
        return e1 * np.exp(-q * s1) + e2 * np.exp(-q * s2)
    s = np.einsum("na,na->n", X, X)
    if kind == 1:
        return -np.log(1.0 + params[0] * s)
    if kind == 2:
        return 2.0 * np.log(1.0 + params[0] / np.sqrt(s))
    if kind == 3:
        return params[0] * s
    if kind == 4:
        return params[0] * np.exp(-params[1] * s)
    raise ValueError(f"unknown kind {kind}")


def u_tensors(kind, params, X):
    """First three coordinate-derivative tensors of u at each point.

    Returns u1 (N,3), u2 (N,3,3), u3 (N,3,3,3); all fully symmetric in
    their indices.  These are exactly what the variational ODE right-hand
    sides need.
    """
    X = np.atleast_2d(X)
    N = len(X)
    u1 = np.zeros((N, 3))
    u2 = np.zeros((N, 3, 3))
    u3 = np.zeros((N, 3, 3, 3))
    if kind == 0:
        return u1, u2, u3
    for d, c1, c2, c3 in _contributions(kind, params, X):
        dd = np.einsum("na,nb->nab", d, d)
        u1 += 2.0 * c1[:, None] * d
        u2 += 2.0 * c1[:, None, None] * _EYE + 4.0 * c2[:, None, None] * dd
        sym = (np.einsum("ab,nc->nabc", _EYE, d)
               + np.einsum("ac,nb->nabc", _EYE, d)
               + np.einsum("bc,na->nabc", _EYE, d))
        u3 += 4.0 * c2[:, None, None, None] * sym
        u3 += 8.0 * c3[:, None, None, None] * np.einsum("nab,nc->nabc", dd, d)
    return u1, u2, u3


def _rhs(kind, params, x, v, U, Vm, S, T, order):
    u1, u2, u3 = u_tensors(kind, params, x)
    vv = np.einsum("na,na->n", v, v)
    u1v = np.einsum("na,na->n", u1, v)
    acc = -2.0 * u1v[:, None] * v + vv[:, None] * u1

    if order == 0:
        return acc, None, None, None

    # first variational system: dU = V, dV as below
    vu2 = np.einsum("nab,nb->na", u2, v)
    vu2U = np.einsum("na,naj->nj", vu2, U)
    u2U = np.einsum("nab,nbj->naj", u2, U)
    u1V = np.einsum("na,naj->nj", u1, Vm)
    vV = np.einsum("na,naj->nj", v, Vm)
    dV = -(2.0 * v[:, :, None] * vu2U[:, None, :] - vv[:, None, None] * u2U)
    dV -= 2.0 * (v[:, :, None] * u1V[:, None, :]
                 + u1v[:, None, None] * Vm
                 - u1[:, :, None] * vV[:, None, :])
    if order == 1:
        return acc, dV, None, None

    # second variational system, one slot per index pair
    dT = np.empty_like(T)
    u2v = vu2
    for p, (a, b) in enumerate(PAIRS):
        Ua = U[:, :, a]
        Ub = U[:, :, b]
        Va = Vm[:, :, a]
        Vb = Vm[:, :, b]
        Sp = S[:, p, :]
        Tp = T[:, p, :]
        u3Uab = np.einsum("nabc,nb,nc->na", u3, Ua, Ub)
        sc_u3 = np.einsum("na,na->n", v, u3Uab)
        P1 = 2.0 * sc_u3[:, None] * v - vv[:, None] * u3Uab
        vu2S = np.einsum("na,na->n", u2v, Sp)
        u2S = np.einsum("nab,nb->na", u2, Sp)
        P2 = 2.0 * vu2S[:, None] * v - vv[:, None] * u2S
        P3 = np.zeros_like(v)
        for Uc, Vc in ((Ua, Vb), (Ub, Va)):
            u2Uc = np.einsum("nab,nb->na", u2, Uc)
            P3 += 2.0 * (np.einsum("na,na->n", Vc, u2Uc)[:, None] * v
                         + np.einsum("na,na->n", v, u2Uc)[:, None] * Vc
                         - np.einsum("na,na->n", v, Vc)[:, None] * u2Uc)
        u1Va = np.einsum("na,na->n", u1, Va)
        u1Vb = np.einsum("na,na->n", u1, Vb)
        VaVb = np.einsum("na,na->n", Va, Vb)
        P4 = 2.0 * (u1Vb[:, None] * Va + u1Va[:, None] * Vb - VaVb[:, None] * u1)
        u1T = np.einsum("na,na->n", u1, Tp)
        vT = np.einsum("na,na->n", v, Tp)
        P5 = 2.0 * (u1T[:, None] * v + u1v[:, None] * Tp - vT[:, None] * u1)
        dT[:, p, :] = -(P1 + P2 + P3 + P4 + P5)
    return acc, dV, T, dT


def chart_ode_batch(kind, params, x0, v0, n_steps, order=2):
    """Integrate the geodesic + variational systems from a common base point.

    x0: (3,) base point; v0: (N,3) initial velocities in ambient chart
    coordinates; unit pseudo-time, n_steps fixed RK4 steps.

    Returns (X, V, U, Vm, S, T):
      X, V   (N,3)    endpoint position / velocity
      U, Vm  (N,3,3)  U[n,:,j] = dX/dv0_j, Vm likewise for V
      S, T   (N,6,3)  S[n,p,:] = d2X/dv0_{a_p} dv0_{b_p}, pairs per PAIRS
    Slots beyond the requested order keep their initial values
    (U zero, V identity, S and T zero).
    """
    v0 = np.atleast_2d(np.asarray(v0, dtype=np.float64))
    N = len(v0)
    x = np.broadcast_to(np.asarray(x0, dtype=np.float64), (N, 3)).copy()
    v = v0.copy()
    U = np.zeros((N, 3, 3))
    Vm = np.zeros((N, 3, 3))
    Vm[:] = _EYE
    S = np.zeros((N, 6, 3))
    T = np.zeros((N, 6, 3))

    if kind == 0:
        # flat geodesics are straight lines, exactly
        X = x + v
        U = np.broadcast_to(_EYE, (N, 3, 3)).copy()
        return X, v.copy(), U, Vm, S, T

    h = 1.0 / n_steps
    for _ in range(n_steps):
        k1 = _rhs(kind, params, x, v, U, Vm, S, T, order)
        s1 = (v, k1[0], Vm, k1[1], k1[2], k1[3])
        xa, va, Ua, Va, Sa, Ta = _advance(x, v, U, Vm, S, T, s1, 0.5 * h, order)
        k2 = _rhs(kind, params, xa, va, Ua, Va, Sa, Ta, order)
        s2 = (va, k2[0], Va, k2[1], k2[2], k2[3])
        xb, vb, Ub, Vb, Sb, Tb = _advance(x, v, U, Vm, S, T, s2, 0.5 * h, order)
        k3 = _rhs(kind, params, xb, vb, Ub, Vb, Sb, Tb, order)
        s3 = (vb, k3[0], Vb, k3[1], k3[2], k3[3])
        xc, vc, Uc, Vc, Sc, Tc = _advance(x, v, U, Vm, S, T, s3, h, order)
        k4 = _rhs(kind, params, xc, vc, Uc, Vc, Sc, Tc, order)
        s4 = (vc, k4[0], Vc, k4[1], k4[2], k4[3])

        x = x + (h / 6.0) * (s1[0] + 2.0 * s2[0] + 2.0 * s3[0] + s4[0])
        v = v + (h / 6.0) * (s1[1] + 2.0 * s2[1] + 2.0 * s3[1] + s4[1])
        if order >= 1:
            U = U + (h / 6.0) * (s1[2] + 2.0 * s2[2] + 2.0 * s3[2] + s4[2])
            Vm = Vm + (h / 6.0) * (s1[3] + 2.0 * s2[3] + 2.0 * s3[3] + s4[3])
        if order >= 2:
            S = S + (h / 6.0) * (s1[4] + 2.0 * s2[4] + 2.0 * s3[4] + s4[4])
            T = T + (h / 6.0) * (s1[5] + 2.0 * s2[5] + 2.0 * s3[5] + s4[5])
    return x, v, U, Vm, S, T


def _advance(x, v, U, Vm, S, T, slopes, dt, order):
    dx, dv, dU, dV, dS, dT = slopes
    xa = x + dt * dx
    va = v + dt * dv
    if order >= 1:
        Ua = U + dt * dU
        Va = Vm + dt * dV
    else:
        Ua, Va = U, Vm
    if order >= 2:
        Sa = S + dt * dS
        Ta = T + dt * dT
    else:
        Sa, Ta = S, T
    return xa, va, Ua, Va, Sa, Ta


def expand_pairs(S6):
    """(N,6,3) pair storage -> full symmetric (N,3,3,3), S33[n,:,a,b]."""
    N = len(S6)
    out = np.empty((N, 3, 3, 3))
    for p, (a, b) in enumerate(PAIRS):
        out[:, :, a, b] = S6[:, p, :]
        out[:, :, b, a] = S6[:, p, :]
    return out
