"""Numba implementation of the hot ODE kernels.

Same contract as _kernels_numpy.chart_ode_batch; see that module for the
math.  The per-node state is packed into a flat 60-vector:

  [0:3] x, [3:6] v, [6:15] U (U[a,j] at 6+3a+j), [15:24] V,
  [24:42] S (S[p,c] at 24+3p+c), [42:60] T

Parallelism is a prange over independent nodes only; every integral and
reduction elsewhere stays serial, so outputs do not depend on the thread
count.
"""
from __future__ import annotations

import numpy as np
from numba import njit, prange

PA = np.array([0, 0, 0, 1, 1, 2], dtype=np.int64)
PB = np.array([0, 1, 2, 1, 2, 2], dtype=np.int64)


@njit(cache=True)
def _u123_node(kind, params, x, u1, u2, u3):
    for a in range(3):
        u1[a] = 0.0
        for b in range(3):
            u2[a, b] = 0.0
            for c in range(3):
                u3[a, b, c] = 0.0
    ncen = 2 if kind == 5 else 1
    d = np.empty(3)
    for ic in range(ncen):
        if kind == 5:
            sgn = 1.0 if ic == 0 else -1.0
            amp = params[0] if ic == 0 else params[1]
            q = params[2]
            for a in range(3):
                d[a] = x[a] - sgn * params[3 + a]
            s = d[0] * d[0] + d[1] * d[1] + d[2] * d[2]
            b0 = amp * np.exp(-q * s)
            c1 = -q * b0
            c2 = q * q * b0
            c3 = -q * q * q * b0
        else:
            for a in range(3):
                d[a] = x[a]
            s = d[0] * d[0] + d[1] * d[1] + d[2] * d[2]
            if kind == 1:
                t = params[0] / (1.0 + params[0] * s)
                c1 = -t
                c2 = t * t
                c3 = -2.0 * t * t * t
            elif kind == 2:
                c = params[0]
                r = np.sqrt(s)
                A = c + r
                c1 = -c / (s * A)
                c2 = c * (2.0 * c + 3.0 * r) / (2.0 * s * s * A * A)
                c3 = -c * (8.0 * c * c + 21.0 * c * r + 15.0 * r * r) / (4.0 * s * s * s * A * A * A)
            elif kind == 3:
                c1 = params[0]
                c2 = 0.0
                c3 = 0.0
            elif kind == 4:
                q = params[1]
                b0 = params[0] * np.exp(-q * s)
                c1 = -q * b0
                c2 = q * q * b0
                c3 = -q * q * q * b0
            else:
                c1 = 0.0
                c2 = 0.0
                c3 = 0.0
        for a in range(3):
            u1[a] += 2.0 * c1 * d[a]
            for b in range(3):
                dab = 1.0 if a == b else 0.0
                u2[a, b] += 2.0 * c1 * dab + 4.0 * c2 * d[a] * d[b]
                for cc in range(3):
                    dac = 1.0 if a == cc else 0.0
                    dbc = 1.0 if b == cc else 0.0
                    u3[a, b, cc] += 4.0 * c2 * (dab * d[cc] + dac * d[b] + dbc * d[a]) \
                        + 8.0 * c3 * d[a] * d[b] * d[cc]


@njit(cache=True)
def _rhs_node(kind, params, y, dy, u1, u2, u3, order):
    _u123_node(kind, params, y[0:3], u1, u2, u3)
    vv = 0.0
    u1v = 0.0
    for a in range(3):
        va = y[3 + a]
        vv += va * va
        u1v += u1[a] * va
    for a in range(3):
        dy[a] = y[3 + a]
        dy[3 + a] = -2.0 * u1v * y[3 + a] + vv * u1[a]
    if order < 1:
        return
    for i in range(9):
        dy[6 + i] = y[15 + i]
    for j in range(3):
        # column j of U and V
        vu2U = 0.0
        u1V = 0.0
        vV = 0.0
        for a in range(3):
            Uja = y[6 + 3 * a + j]
            Vja = y[15 + 3 * a + j]
            u1V += u1[a] * Vja
            vV += y[3 + a] * Vja
            for b in range(3):
                vu2U += y[3 + b] * u2[b, a] * Uja
        for a in range(3):
            u2Uj = 0.0
            for b in range(3):
                u2Uj += u2[a, b] * y[6 + 3 * b + j]
            va = y[3 + a]
            out = -(2.0 * va * vu2U - vv * u2Uj)
            out -= 2.0 * (va * u1V + u1v * y[15 + 3 * a + j] - u1[a] * vV)
            dy[15 + 3 * a + j] = out
    if order < 2:
        return
    for i in range(18):
        dy[24 + i] = y[42 + i]
    for p in range(6):
        ai = PA[p]
        bi = PB[p]
        # scalars shared across the output components
        u3vUU = 0.0
        vu2S = 0.0
        u1Va = 0.0
        u1Vb = 0.0
        VaVb = 0.0
        u1T = 0.0
        vT = 0.0
        Vbu2Ua = 0.0
        vu2Ua = 0.0
        vVb = 0.0
        Vau2Ub = 0.0
        vu2Ub = 0.0
        vVa = 0.0
        for a in range(3):
            Ua_a = y[6 + 3 * a + ai]
            Ub_a = y[6 + 3 * a + bi]
            Va_a = y[15 + 3 * a + ai]
            Vb_a = y[15 + 3 * a + bi]
            Sp_a = y[24 + 3 * p + a]
            Tp_a = y[42 + 3 * p + a]
            va = y[3 + a]
            u1Va += u1[a] * Va_a
            u1Vb += u1[a] * Vb_a
            VaVb += Va_a * Vb_a
            u1T += u1[a] * Tp_a
            vT += va * Tp_a
            vVa += va * Va_a
            vVb += va * Vb_a
            for b in range(3):
                Ua_b = y[6 + 3 * b + ai]
                Ub_b = y[6 + 3 * b + bi]
                vu2S += va * u2[a, b] * y[24 + 3 * p + b]
                Vbu2Ua += Vb_a * u2[a, b] * Ua_b
                vu2Ua += va * u2[a, b] * Ua_b
                Vau2Ub += Va_a * u2[a, b] * Ub_b
                vu2Ub += va * u2[a, b] * Ub_b
                for c in range(3):
                    u3vUU += va * u3[a, b, c] * Ua_b * y[6 + 3 * c + bi]
        for a in range(3):
            va = y[3 + a]
            u3UU_a = 0.0
            u2S_a = 0.0
            u2Ua_a = 0.0
            u2Ub_a = 0.0
            for b in range(3):
                u2S_a += u2[a, b] * y[24 + 3 * p + b]
                u2Ua_a += u2[a, b] * y[6 + 3 * b + ai]
                u2Ub_a += u2[a, b] * y[6 + 3 * b + bi]
                for c in range(3):
                    u3UU_a += u3[a, b, c] * y[6 + 3 * b + ai] * y[6 + 3 * c + bi]
            P1 = 2.0 * u3vUU * va - vv * u3UU_a
            P2 = 2.0 * vu2S * va - vv * u2S_a
            P3 = 2.0 * (Vbu2Ua * va + vu2Ua * y[15 + 3 * a + bi] - vVb * u2Ua_a)
            P3 += 2.0 * (Vau2Ub * va + vu2Ub * y[15 + 3 * a + ai] - vVa * u2Ub_a)
            P4 = 2.0 * (u1Vb * y[15 + 3 * a + ai] + u1Va * y[15 + 3 * a + bi] - VaVb * u1[a])
            Tp_a = y[42 + 3 * p + a]
            P5 = 2.0 * (u1T * va + u1v * Tp_a - vT * u1[a])
            dy[42 + 3 * p + a] = -(P1 + P2 + P3 + P4 + P5)


@njit(cache=True, parallel=True)
def chart_ode_batch(kind, params, x0, v0, n_steps, order=2):
    N = v0.shape[0]
    X = np.empty((N, 3))
    V = np.empty((N, 3))
    U = np.zeros((N, 3, 3))
    Vm = np.zeros((N, 3, 3))
    S6 = np.zeros((N, 6, 3))
    T6 = np.zeros((N, 6, 3))
    if kind == 0:
        for n in prange(N):
            for a in range(3):
                X[n, a] = x0[a] + v0[n, a]
                V[n, a] = v0[n, a]
                U[n, a, a] = 1.0
                Vm[n, a, a] = 1.0
        return X, V, U, Vm, S6, T6
    h = 1.0 / n_steps
    # active length of the packed state: x,v | +U,V | +S,T
    nd = 6 if order == 0 else (24 if order == 1 else 60)
    for n in prange(N):
        y = np.zeros(60)
        k1 = np.zeros(60)
        k2 = np.zeros(60)
        k3 = np.zeros(60)
        k4 = np.zeros(60)
        yt = np.zeros(60)
        u1 = np.empty(3)
        u2 = np.empty((3, 3))
        u3 = np.empty((3, 3, 3))
        for a in range(3):
            y[a] = x0[a]
            y[3 + a] = v0[n, a]
            y[15 + 3 * a + a] = 1.0
            yt[15 + 3 * a + a] = 1.0
        for _ in range(n_steps):
            _rhs_node(kind, params, y, k1, u1, u2, u3, order)
            for i in range(nd):
                yt[i] = y[i] + 0.5 * h * k1[i]
            _rhs_node(kind, params, yt, k2, u1, u2, u3, order)
            for i in range(nd):
                yt[i] = y[i] + 0.5 * h * k2[i]
            _rhs_node(kind, params, yt, k3, u1, u2, u3, order)
            for i in range(nd):
                yt[i] = y[i] + h * k3[i]
            _rhs_node(kind, params, yt, k4, u1, u2, u3, order)
            for i in range(nd):
                y[i] = y[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        for a in range(3):
            X[n, a] = y[a]
            V[n, a] = y[3 + a]
            for j in range(3):
                U[n, a, j] = y[6 + 3 * a + j]
                Vm[n, a, j] = y[15 + 3 * a + j]
        for p in range(6):
            for c in range(3):
                S6[n, p, c] = y[24 + 3 * p + c]
                T6[n, p, c] = y[42 + 3 * p + c]
    return X, V, U, Vm, S6, T6
