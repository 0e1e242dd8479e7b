"""Pseudo-spectral machinery on the unit sphere.

Scalar fields live either as values on a Gauss-Legendre x equispaced
longitude grid or as coefficients against real orthonormal spherical
harmonics.  The grid is sized so that quadrature is exact for triple
products of bandlimited fields: with max degree L we use
ceil(3L/2)+1 colatitude nodes and 3L+1 longitudes.

No grid node sits at a pole, and every synthesized quantity that gets
analyzed back into coefficients is a globally smooth scalar; ratios with
sin(theta) denominators are only ever formed pointwise at interior
nodes.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import DomainError


def coeff_index(ell, m):
    """Position of the (ell, m) harmonic in the packed coefficient vector."""
    return ell * ell + ell + m


def _legendre_tables(L, x):
    """Fully normalized associated Legendre values and theta-derivatives.

    Returns three arrays of shape (len(x), (L+1)(L+2)/2) indexed by
    tri(ell, m) = ell(ell+1)/2 + m, carrying Phat, dPhat/dtheta and
    d2Phat/dtheta2 at x = cos(theta).  Condon-Shortley phase included;
    normalization is int_{S^2} (Phat_{ell m} trig_m)^2 = 1 with the
    sqrt(2) on the trig factor for m != 0.
    """
    x = np.asarray(x, dtype=np.float64)
    s = np.sqrt(1.0 - x * x)
    npts = x.size
    ntri = (L + 1) * (L + 2) // 2

    def tri(ell, m):
        return ell * (ell + 1) // 2 + m

    P = np.zeros((npts, ntri))
    Pt = np.zeros((npts, ntri))
    Ptt = np.zeros((npts, ntri))

    P[:, 0] = 1.0 / math.sqrt(4.0 * math.pi)
    for m in range(1, L + 1):
        c = -math.sqrt((2.0 * m + 1.0) / (2.0 * m))
        p0, p0t, p0tt = P[:, tri(m - 1, m - 1)], Pt[:, tri(m - 1, m - 1)], Ptt[:, tri(m - 1, m - 1)]
        P[:, tri(m, m)] = c * s * p0
        Pt[:, tri(m, m)] = c * (x * p0 + s * p0t)
        Ptt[:, tri(m, m)] = c * (-s * p0 + 2.0 * x * p0t + s * p0tt)
    for m in range(0, L + 1):
        for ell in range(m + 1, L + 1):
            a = math.sqrt((4.0 * ell * ell - 1.0) / (ell * ell - m * m))
            p1, p1t, p1tt = P[:, tri(ell - 1, m)], Pt[:, tri(ell - 1, m)], Ptt[:, tri(ell - 1, m)]
            if ell >= m + 2:
                b = -math.sqrt(
                    (2.0 * ell + 1.0)
                    * (ell - 1.0 + m)
                    * (ell - 1.0 - m)
                    / ((2.0 * ell - 3.0) * (ell * ell - m * m))
                )
                p2, p2t, p2tt = P[:, tri(ell - 2, m)], Pt[:, tri(ell - 2, m)], Ptt[:, tri(ell - 2, m)]
            else:
                b = 0.0
                p2 = p2t = p2tt = 0.0
            P[:, tri(ell, m)] = a * x * p1 + b * p2
            Pt[:, tri(ell, m)] = a * (-s * p1 + x * p1t) + b * p2t
            Ptt[:, tri(ell, m)] = a * (-x * p1 - 2.0 * s * p1t + x * p1tt) + b * p2tt
    return P, Pt, Ptt


class SphereGrid:
    """Quadrature grid plus dense synthesis/analysis operators at degree L.

    Graph fields live at degree L.  Derived smooth fields (normal
    components, mean curvature) are transformed at the working degree
    L + 2 on the same nodes, because differentiating a degree-L graph
    produces degree L + 1 content in them; the quadrature is exact for
    analysis up to that degree whenever L >= 4.  The working tables are
    supersets of the primary ones, so the primary operators are views.
    """

    def __init__(self, L):
        L = int(L)
        if L < 4:
            raise DomainError(f"spectral degree must be at least 4, got {L}")
        self.L = L
        self.Lw = L + 2
        self.ntheta = -(-3 * L // 2) + 1
        self.nlam = 3 * L + 1
        self.nnodes = self.ntheta * self.nlam
        self.nsph = (L + 1) * (L + 1)
        self.nsph_w = (self.Lw + 1) * (self.Lw + 1)

        xgl, wgl = np.polynomial.legendre.leggauss(self.ntheta)
        # descending in x = increasing theta from the north pole
        xgl, wgl = xgl[::-1].copy(), wgl[::-1].copy()
        lam1 = 2.0 * math.pi * np.arange(self.nlam) / self.nlam

        self.theta = np.repeat(np.arccos(xgl), self.nlam)
        self.lam = np.tile(lam1, self.ntheta)
        self.w = np.repeat(wgl * (2.0 * math.pi / self.nlam), self.nlam)
        self.sin_t = np.sin(self.theta)
        self.cos_t = np.cos(self.theta)
        sl, cl = np.sin(self.lam), np.cos(self.lam)

        # unit radial / colatitude / azimuth vectors at each node
        self.qhat = np.stack([self.sin_t * cl, self.sin_t * sl, self.cos_t], axis=1)
        self.that = np.stack([self.cos_t * cl, self.cos_t * sl, -self.sin_t], axis=1)
        self.lhat = np.stack([-sl, cl, np.zeros_like(sl)], axis=1)

        P, Pt, Ptt = _legendre_tables(self.Lw, xgl)

        self.ell_w = np.empty(self.nsph_w, dtype=np.int64)
        self.em_w = np.empty(self.nsph_w, dtype=np.int64)
        self.mirror_w = np.empty(self.nsph_w, dtype=np.int64)
        self.Y_w = np.empty((self.nnodes, self.nsph_w))
        self.Yt_w = np.empty((self.nnodes, self.nsph_w))
        self.Ytt_w = np.empty((self.nnodes, self.nsph_w))

        def tri(ell, m):
            return ell * (ell + 1) // 2 + m

        col_of_row = np.repeat(np.arange(self.ntheta), self.nlam)
        for ell in range(self.Lw + 1):
            for m in range(-ell, ell + 1):
                k = coeff_index(ell, m)
                self.ell_w[k] = ell
                self.em_w[k] = m
                self.mirror_w[k] = coeff_index(ell, -m)
                am = abs(m)
                pv = P[col_of_row, tri(ell, am)]
                pt = Pt[col_of_row, tri(ell, am)]
                ptt = Ptt[col_of_row, tri(ell, am)]
                if m == 0:
                    f = np.ones(self.nnodes)
                elif m > 0:
                    f = math.sqrt(2.0) * np.cos(m * self.lam)
                else:
                    f = math.sqrt(2.0) * np.sin(am * self.lam)
                self.Y_w[:, k] = pv * f
                self.Yt_w[:, k] = pt * f
                self.Ytt_w[:, k] = ptt * f

        self.analysis_w = self.Y_w.T * self.w
        # primary-degree views
        self.ell = self.ell_w[: self.nsph]
        self.em = self.em_w[: self.nsph]
        self.mirror = self.mirror_w[: self.nsph]
        self.Y = self.Y_w[:, : self.nsph]
        self.Yt = self.Yt_w[:, : self.nsph]
        self.Ytt = self.Ytt_w[:, : self.nsph]
        self.analysis = self.analysis_w[: self.nsph]
        self.lap_eig = -(self.ell * (self.ell + 1)).astype(np.float64)
        # eigenvalues of the flat-sphere Willmore linearization Lap(Lap + 2)
        self.bilap_eig = self.lap_eig * (self.lap_eig + 2.0)

    # -- transforms -----------------------------------------------------

    def synth(self, a):
        return self.Y @ np.asarray(a, dtype=np.float64)

    def analyze(self, f):
        return self.analysis @ np.asarray(f, dtype=np.float64)

    def dlam_coeff(self, a):
        """Coefficients of the longitude derivative of the field a."""
        a = np.asarray(a, dtype=np.float64)
        return self.em * a[self.mirror]

    def synth_all(self, a):
        """Values, theta derivative and lambda derivative on the grid."""
        a = np.asarray(a, dtype=np.float64)
        return self.Y @ a, self.Yt @ a, self.Y @ self.dlam_coeff(a)

    def synth_second(self, a):
        """(f, ft, fl, ftt, ftl, fll) grid values for a coefficient vector."""
        a = np.asarray(a, dtype=np.float64)
        dl = self.dlam_coeff(a)
        return (
            self.Y @ a,
            self.Yt @ a,
            self.Y @ dl,
            self.Ytt @ a,
            self.Yt @ dl,
            self.Y @ self.dlam_coeff(dl),
        )

    # -- working-degree transforms (smooth derived fields) --------------

    def analyze_w(self, f):
        return self.analysis_w @ np.asarray(f, dtype=np.float64)

    def dlam_coeff_w(self, a):
        a = np.asarray(a, dtype=np.float64)
        return self.em_w * a[self.mirror_w]

    def synth_first_w(self, a):
        """(f, ft, fl) for a working-degree coefficient vector."""
        a = np.asarray(a, dtype=np.float64)
        return self.Y_w @ a, self.Yt_w @ a, self.Y_w @ self.dlam_coeff_w(a)

    def synth_second_w(self, a):
        a = np.asarray(a, dtype=np.float64)
        dl = self.dlam_coeff_w(a)
        return (
            self.Y_w @ a,
            self.Yt_w @ a,
            self.Y_w @ dl,
            self.Ytt_w @ a,
            self.Yt_w @ dl,
            self.Y_w @ self.dlam_coeff_w(dl),
        )

    # -- quadrature -----------------------------------------------------

    def integrate(self, f):
        return float(self.w @ np.asarray(f, dtype=np.float64))

    def inner(self, f, g):
        return float(self.w @ (np.asarray(f) * np.asarray(g)))

    def sup(self, f):
        return float(np.abs(np.asarray(f)).max())

    # -- round-sphere operators ----------------------------------------

    def apply_round_operator(self, a, name):
        """Apply a coefficient-diagonal operator of the unit round sphere.

        laplace:            Lap
        laplace_plus_two:   Lap + 2
        willmore_linear:    Lap(Lap + 2), the flat second variation shape
        """
        a = np.asarray(a, dtype=np.float64)
        if name == "laplace":
            return self.lap_eig * a
        if name == "laplace_plus_two":
            return (self.lap_eig + 2.0) * a
        if name == "willmore_linear":
            return self.bilap_eig * a
        raise ValueError(f"unknown round operator: {name}")

    def grad_squared(self, a):
        """|grad f|^2 for the round metric, as grid values."""
        _, ft, fl = self.synth_all(a)
        return ft * ft + (fl / self.sin_t) ** 2

    def solve_flat_linearization(self, b):
        """Invert the flat-sphere linearization of the projected equation.

        The constant mode responds to the area constraint with factor
        16 pi, the three degree-1 modes to the translation constraint
        with factor 1, and every higher mode through the spectrum
        l(l+1)(l(l+1)-2) of Lap(Lap+2).  Verified against a dense
        finite-difference Jacobian of the full flat equation in the
        tests; used as the quasi-Newton preconditioner everywhere.
        """
        b = np.asarray(b, dtype=np.float64)
        d = self.bilap_eig.copy()
        d[self.ell == 0] = 16.0 * math.pi
        d[self.ell == 1] = 1.0
        return b / d

    def low_mode_indices(self):
        """Coefficient slots of the constant and the three degree-1 modes."""
        return np.array(
            [coeff_index(0, 0), coeff_index(1, -1), coeff_index(1, 0), coeff_index(1, 1)],
            dtype=np.int64,
        )


@lru_cache(maxsize=8)
def get_grid(L):
    return SphereGrid(L)
