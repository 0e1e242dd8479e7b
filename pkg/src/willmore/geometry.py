"""Discrete geometry of graph spheres over the unit sphere of a chart.

A surface is the radial graph y = (1 + phi) q over the chart's unit
sphere, with phi a bandlimited scalar given by spherical harmonic
coefficients.  All first and second fundamental form data is assembled
from exact closed-form coordinate derivatives of the embedding plus
spectral derivatives of phi and of the unit normal components, so the
only discretization error is the spectral truncation itself.

Pole discipline: every field that is differentiated spectrally (phi,
the Cartesian normal components, the mean curvature) is a globally
smooth scalar on the sphere.  Ratios carrying 1/sin(theta) appear only
pointwise at interior Gauss nodes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GeometryError, NumericalError

_EYE3 = np.eye(3)


@dataclass
class SurfaceData:
    """Geometry of one graph sphere, everything in chart units."""

    phi: np.ndarray      # (N,) graph values
    y: np.ndarray        # (N,3) chart positions
    arel: np.ndarray     # (N,) area density relative to the round sphere
    mu: np.ndarray       # (N,) quadrature measure: w * arel
    area: float          # chart area
    normal: np.ndarray   # (N,3) outward G-unit normal, chart components
    H: np.ndarray        # (N,) mean curvature (trace convention, 2 on S^2)
    A_sq: np.ndarray     # (N,) |A|^2
    Aring_sq: np.ndarray  # (N,) |A - (H/2) gbar|^2
    shape_asym: float    # max antisymmetric part of the discrete shape form
    willmore: float      # integral of H^2
    amb: object          # ChartFields at the surface nodes
    lapH: np.ndarray | None      # (N,) surface Laplacian of H
    ric_nn: np.ndarray | None    # (N,) ambient Ricci on the normal
    wprime: np.ndarray | None    # (N,) Euler-Lagrange density


def surface_geometry(grid, chart, phi_coeff, need="gradient"):
    """Assemble SurfaceData for the graph 1 + phi.

    need="energy" stops after curvature and the Willmore integrand;
    need="gradient" also builds Delta H and the Euler-Lagrange field
      wprime = -Lap H - |A|^2 H - H Ric(n,n) + H^3/2,
    whose pairing 2 * sum(mu * wprime * v) is the first variation of the
    Willmore integral under normal speed v.
    """
    phi_coeff = np.asarray(phi_coeff, dtype=np.float64)
    f, ft, fl, ftt, ftl, fll = grid.synth_second(phi_coeff)
    r = 1.0 + f
    if np.any(r <= 0.0):
        raise GeometryError("graph radius hit zero; surface not embedded")

    s, c = grid.sin_t, grid.cos_t
    q, th, lh = grid.qhat, grid.that, grid.lhat

    # embedding and closed-form coordinate derivatives
    y = r[:, None] * q
    yt = ft[:, None] * q + r[:, None] * th
    yl = fl[:, None] * q + (r * s)[:, None] * lh
    ytt = ftt[:, None] * q + (2.0 * ft)[:, None] * th - r[:, None] * q
    ytl = ftl[:, None] * q + (ft * s)[:, None] * lh + fl[:, None] * th + (r * c)[:, None] * lh
    yll = (
        fll[:, None] * q
        + (2.0 * fl * s)[:, None] * lh
        - (r * s)[:, None] * (s[:, None] * q + c[:, None] * th)
    )

    fields = chart.fields(y)
    G, dG = fields.G, fields.dG

    # rescaled tangent frame, finite at the poles
    E1 = yt
    E2 = (fl / s)[:, None] * q + r[:, None] * lh

    GE1 = np.einsum("nab,nb->na", G, E1)
    GE2 = np.einsum("nab,nb->na", G, E2)
    g11 = np.einsum("na,na->n", E1, GE1)
    g12 = np.einsum("na,na->n", E1, GE2)
    g22 = np.einsum("na,na->n", E2, GE2)
    det = g11 * g22 - g12 * g12
    if np.any(det <= 0.0):
        raise GeometryError("degenerate surface metric")
    arel = np.sqrt(det)
    mu = grid.w * arel
    area = float(mu.sum())

    # outward G-unit normal: G^{-1}(E1 x E2), oriented along the radius
    cross = np.cross(E1, E2)
    Ginv = np.linalg.inv(G)
    nvec = np.einsum("nab,nb->na", Ginv, cross)
    nn = np.einsum("na,nb,nab->n", nvec, nvec, G)
    nvec /= np.sqrt(nn)[:, None]
    if np.any(np.einsum("na,na->n", nvec, q) <= 0.0):
        raise GeometryError("normal orientation flipped; surface folded over")

    # spectral derivatives of the (smooth) Cartesian normal components,
    # carried at the working degree so a degree-L graph loses nothing
    ncoef = grid.analysis_w @ nvec
    nt = grid.Yt_w @ ncoef
    nl_over_s = (grid.Y_w @ np.column_stack(
        [grid.dlam_coeff_w(ncoef[:, a]) for a in range(3)]
    )) / s[:, None]

    gam = _christoffel(G, dG)
    dE1n = nt + np.einsum("nabc,nb,nc->na", gam, E1, nvec)
    dE2n = nl_over_s + np.einsum("nabc,nb,nc->na", gam, E2, nvec)

    A11 = np.einsum("na,na->n", dE1n, GE1)
    A12 = np.einsum("na,na->n", dE1n, GE2)
    A21 = np.einsum("na,na->n", dE2n, GE1)
    A22 = np.einsum("na,na->n", dE2n, GE2)
    shape_asym = float(np.abs(A12 - A21).max())
    A12 = A21 = 0.5 * (A12 + A21)

    i11, i12, i22 = g22 / det, -g12 / det, g11 / det
    H = i11 * A11 + 2.0 * i12 * A12 + i22 * A22
    # |A|^2 = A_ik g^{kl} A_lj g^{ji}
    B11 = i11 * A11 + i12 * A12
    B12 = i11 * A12 + i12 * A22
    B21 = i12 * A11 + i22 * A12
    B22 = i12 * A12 + i22 * A22
    A_sq = B11 * B11 + 2.0 * B12 * B21 + B22 * B22
    Aring_sq = A_sq - 0.5 * H * H
    willmore = float(mu @ (H * H))

    if need == "energy":
        return SurfaceData(
            phi=f, y=y, arel=arel, mu=mu, area=area, normal=nvec, H=H,
            A_sq=A_sq, Aring_sq=Aring_sq, shape_asym=shape_asym,
            willmore=willmore, amb=fields, lapH=None, ric_nn=None, wprime=None,
        )
    if need != "gradient":
        raise ValueError(f"unknown geometry stage: {need}")

    # surface Laplacian of H in (theta, lambda) coordinates
    hcoef = grid.analyze_w(H)
    Hv, Ht, Hl, Htt, Htl, Hll = grid.synth_second_w(hcoef)

    # coordinate metric derivatives d_k gbar_ij, built from the exact
    # second derivatives of the embedding and the chart metric gradient
    yd = (yt, yl)
    ydd = {(0, 0): ytt, (0, 1): ytl, (1, 0): ytl, (1, 1): yll}
    Gy = {0: np.einsum("nab,nb->na", G, yt), 1: np.einsum("nab,nb->na", G, yl)}
    dGdir = {k: np.einsum("nabc,nc->nab", dG, yd[k]) for k in (0, 1)}
    dg = np.empty((len(f), 2, 2, 2))
    for i in range(2):
        for j in range(2):
            for k in range(2):
                dg[:, i, j, k] = (
                    np.einsum("na,na->n", ydd[(i, k)], Gy[j])
                    + np.einsum("na,na->n", yd[i], np.einsum("nab,nb->na", G, ydd[(j, k)]))
                    + np.einsum("na,nab,nb->n", yd[i], dGdir[k], yd[j])
                )

    gb = np.empty((len(f), 2, 2))
    gb[:, 0, 0] = g11
    gb[:, 0, 1] = gb[:, 1, 0] = g12 * s
    gb[:, 1, 1] = g22 * s * s
    detc = gb[:, 0, 0] * gb[:, 1, 1] - gb[:, 0, 1] ** 2
    gbinv = np.empty_like(gb)
    gbinv[:, 0, 0] = gb[:, 1, 1] / detc
    gbinv[:, 0, 1] = gbinv[:, 1, 0] = -gb[:, 0, 1] / detc
    gbinv[:, 1, 1] = gb[:, 0, 0] / detc

    # dg holds d_k gbar_ij at [i, j, k]
    gamk = np.empty((len(f), 2, 2, 2))
    for k in range(2):
        for i in range(2):
            for j in range(2):
                gamk[:, k, i, j] = 0.5 * (
                    gbinv[:, k, 0] * (dg[:, 0, i, j] + dg[:, 0, j, i] - dg[:, i, j, 0])
                    + gbinv[:, k, 1] * (dg[:, 1, i, j] + dg[:, 1, j, i] - dg[:, i, j, 1])
                )

    d1H = (Ht, Hl)
    d2H = {(0, 0): Htt, (0, 1): Htl, (1, 1): Hll}
    lapH = np.zeros(len(f))
    for i in range(2):
        for j in range(2):
            hij = d2H[(min(i, j), max(i, j))]
            corr = gamk[:, 0, i, j] * d1H[0] + gamk[:, 1, i, j] * d1H[1]
            lapH += gbinv[:, i, j] * (hij - corr)

    ric_nn = np.einsum("na,nab,nb->n", nvec, fields.ric, nvec)
    wprime = -lapH - A_sq * H - H * ric_nn + 0.5 * H**3

    return SurfaceData(
        phi=f, y=y, arel=arel, mu=mu, area=area, normal=nvec, H=H,
        A_sq=A_sq, Aring_sq=Aring_sq, shape_asym=shape_asym,
        willmore=willmore, amb=fields, lapH=lapH, ric_nn=ric_nn, wprime=wprime,
    )


def _christoffel(G, dG):
    Ginv = np.linalg.inv(G)
    t = dG + np.swapaxes(dG, 2, 3) - np.moveaxis(dG, 3, 1)
    return 0.5 * np.einsum("nad,ndbc->nabc", Ginv, t)


def willmore_energy(grid, chart, phi_coeff):
    """(willmore integral, chart area) for the graph 1 + phi."""
    d = surface_geometry(grid, chart, phi_coeff, need="energy")
    return d.willmore, d.area


def first_variation(grid, chart, phi_coeff, v):
    """Derivative of the Willmore integral under normal speed v."""
    d = surface_geometry(grid, chart, phi_coeff, need="gradient")
    return 2.0 * float(d.mu @ (d.wprime * np.asarray(v)))


def second_variation_dir(grid, chart, phi_coeff, psi_coeff, t0=None):
    """Second derivative of the Willmore integral along the graph
    direction psi, by Richardson-extrapolated central differences.

    On the flat unit sphere this evaluates to twice the spectrum of
    Lap(Lap + 2): a degree-2 harmonic of unit norm gives 48.
    """
    phi_coeff = np.asarray(phi_coeff, dtype=np.float64)
    psi_coeff = np.asarray(psi_coeff, dtype=np.float64)
    if t0 is None:
        t0 = 1.0e-4 * (1.0 + float(np.abs(grid.synth(phi_coeff)).max()))

    def d2(t):
        wp, _ = willmore_energy(grid, chart, phi_coeff + t * psi_coeff)
        wm, _ = willmore_energy(grid, chart, phi_coeff - t * psi_coeff)
        w0, _ = willmore_energy(grid, chart, phi_coeff)
        return (wp - 2.0 * w0 + wm) / (t * t)

    c1, c2 = d2(t0), d2(0.5 * t0)
    rich = (4.0 * c2 - c1) / 3.0
    if abs(c1 - c2) > 1.0e-3 * (1.0 + abs(rich)):
        raise NumericalError(
            f"second variation differences disagree: {c1:.6e} vs {c2:.6e}"
        )
    return rich


def polarized_second_variation(grid, chart, phi_coeff, psi_a, psi_b):
    """Mixed second derivative by polarization of the diagonal form."""
    qpp = second_variation_dir(grid, chart, phi_coeff, psi_a + psi_b)
    qpm = second_variation_dir(grid, chart, phi_coeff, psi_a - psi_b)
    return 0.25 * (qpp - qpm)


def hawking_mass(physical_area, willmore):
    """sqrt(A) (16 pi - W) / (64 pi^{3/2}); W is scale invariant so any
    chart's value works, but the area must be the physical one."""
    return math.sqrt(physical_area) * (16.0 * math.pi - willmore) / (
        64.0 * math.pi**1.5
    )


def coordinate_sphere_hawking(provider, center, radius, grid):
    """Hawking mass of the coordinate sphere |x - center| = radius.

    Measured through an affine chart, so the sphere is a coordinate one,
    not geodesic; the physical area is radius^2 times the chart area.
    Returns (mass, SurfaceData).
    """
    from .ambient import AffineChart

    chart = AffineChart(provider, center, radius)
    data = surface_geometry(grid, chart, np.zeros(grid.nsph), need="energy")
    return hawking_mass(radius * radius * data.area, data.willmore), data
