"""Constrained solve for the graph correction over a chart sphere.

The projected equation couples the Euler-Lagrange field of the Willmore
integral with an area constraint and three translation constraints:

    G(phi) = Pperp(wprime) + (area - 4 pi) H + sum_i <Y_i, phi> Y_i

where Y_1..Y_3 orthonormalize the coordinate functions and Y_0 the mean
curvature against them, all in the L^2 measure of the current surface,
and Pperp removes the span of Y_0..Y_3.  G vanishes exactly when the
surface satisfies the multiplier form of the equation with area 4 pi and
no translation component in phi.

The quasi-Newton iteration inverts the flat-sphere linearization in
coefficient space; the contraction away from flatness is of the size of
the chart's curvature, so a handful of iterations suffice at small
radius.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ambient import NormalChart
from .errors import DegenerateBasisError, NoConvergenceError
from .geometry import SurfaceData, surface_geometry

AREA_TARGET = 4.0 * np.pi


def kernel_basis(grid, data):
    """Orthonormal basis [Y0, Y1, Y2, Y3] of the constraint space.

    Gram-Schmidt in the surface L^2 inner product, coordinate functions
    first, then the mean curvature; on the flat unit sphere this returns
    the constant 1/sqrt(4 pi) and the normalized degree-1 harmonics.
    """
    mu = data.mu
    cols = [grid.qhat[:, 0].copy(), grid.qhat[:, 1].copy(), grid.qhat[:, 2].copy(),
            data.H.copy()]
    out = np.empty((len(mu), 4))
    slot = [1, 2, 3, 0]  # coordinates go to Y1..Y3, curvature to Y0
    done = []
    for v, k in zip(cols, slot):
        for j in done:
            v -= out[:, j] * float(mu @ (out[:, j] * v))
        nrm = float(mu @ (v * v)) ** 0.5
        if nrm < 1.0e-8:
            raise DegenerateBasisError(
                f"constraint basis collapsed (norm {nrm:.3e} in slot {k})"
            )
        out[:, k] = v / nrm
        done.append(k)
    return out


def project_perp(data, basis, f):
    """Remove the four constraint components of f in the surface measure."""
    f = np.asarray(f, dtype=np.float64).copy()
    for k in range(4):
        f -= basis[:, k] * float(data.mu @ (basis[:, k] * f))
    return f


@dataclass
class GEval:
    """One evaluation of the projected equation."""

    gvals: np.ndarray
    gnorm: float
    data: SurfaceData
    basis: np.ndarray


def evaluate_G(grid, chart, phi_coeff):
    """Projected equation residual for the graph 1 + phi."""
    data = surface_geometry(grid, chart, phi_coeff, need="gradient")
    basis = kernel_basis(grid, data)
    g = project_perp(data, basis, data.wprime)
    g += (data.area - AREA_TARGET) * data.H
    phi_vals = data.phi
    for i in range(1, 4):
        g += basis[:, i] * float(data.mu @ (basis[:, i] * phi_vals))
    gnorm = float(data.mu @ (g * g)) ** 0.5
    return GEval(gvals=g, gnorm=gnorm, data=data, basis=basis)


def grid_floor(L):
    """Roundoff level of the discrete Euler-Lagrange field at band limit
    L; it grows like the square of the top Laplace eigenvalue, so L^4
    times machine precision with a safety factor.  Measured stall levels:
    about 1e-11 at L = 12 and 3e-11 at L = 16."""
    return 1.0e-15 * float(L) ** 4


def solve_tolerance(eps, L=None):
    """Default residual target for the constrained solve at radius eps."""
    tol = min(5.0e-10, max(1.0e-11, 1.0e-6 * eps**4))
    if L is not None:
        tol = max(tol, grid_floor(L))
    return tol


@dataclass
class SolveInfo:
    iterations: int
    residuals: list = field(default_factory=list)
    tol: float = 0.0


RESIDUAL_FLOOR = 5.0e-13


def solve_correction(grid, chart, phi0=None, tol=None, max_iter=60):
    """Drive the projected equation to zero by quasi-Newton iteration.

    Returns (phi_coeff, GEval at the solution, SolveInfo).  phi0 warm
    starts the iteration.  Raises NoConvergenceError when the residual
    stalls above the target.
    """
    if tol is None:
        tol = solve_tolerance(chart.scale, grid.L)
    tol = max(float(tol), RESIDUAL_FLOOR)
    phi = (np.zeros(grid.nsph) if phi0 is None
           else np.asarray(phi0, dtype=np.float64).copy())
    info = SolveInfo(iterations=0, tol=tol)
    best_phi, best_ev = None, None
    for it in range(max_iter):
        ev = evaluate_G(grid, chart, phi)
        info.residuals.append(ev.gnorm)
        if best_ev is None or ev.gnorm < best_ev.gnorm:
            best_phi, best_ev = phi.copy(), ev
        if ev.gnorm <= tol:
            info.iterations = it
            return phi, ev, info
        if it >= 6 and info.residuals[-1] > 0.9 * info.residuals[-6]:
            raise NoConvergenceError(
                f"projected equation stalled at residual {ev.gnorm:.3e} "
                f"(target {tol:.1e})",
                info.residuals,
            )
        phi = phi - grid.solve_flat_linearization(grid.analyze(ev.gvals))
    raise NoConvergenceError(
        f"projected equation used all {max_iter} iterations "
        f"(residual {info.residuals[-1]:.3e}, target {tol:.1e})",
        info.residuals,
    )


def multipliers(grid, ev):
    """Coefficients of wprime against [H, Z1, Z2, Z3] plus the orthogonal
    remainder norm.  At a solved surface wprime is a combination of the
    mean curvature (area multiplier) and the coordinate functions
    (translation multipliers) up to the solve residual.
    """
    data, basis = ev.data, ev.basis
    base = [data.H, grid.qhat[:, 0], grid.qhat[:, 1], grid.qhat[:, 2]]
    M = np.empty((4, 4))
    c = np.empty(4)
    for k in range(4):
        c[k] = float(data.mu @ (basis[:, k] * data.wprime))
        for j in range(4):
            M[k, j] = float(data.mu @ (basis[:, k] * base[j]))
    beta = np.linalg.solve(M, c)
    rem = data.wprime - beta[0] * data.H - (
        beta[1] * grid.qhat[:, 0] + beta[2] * grid.qhat[:, 1] + beta[3] * grid.qhat[:, 2]
    )
    rem = project_perp(data, basis, rem)
    rem_norm = float(data.mu @ (rem * rem)) ** 0.5
    return beta, rem_norm


def translation_fields(provider, P, eps, grid, phi, rotation=None,
                       delta=1.0e-4, tol=None):
    """Normal speeds of the solved family under chart center motion.

    For each frame direction e_i the center moves to exp_P(+-delta eps
    F e_i), the equation is re-solved warm from phi, and the normal
    speed of the surface motion per unit of the dimensionless step is
    extracted in chart units:

        psi_i = eps^{-2} (dX/ddelta) . g(X) Dc n

    In flat space this returns exactly the coordinate functions Z_i.
    """
    from .ambient import exp_map

    P = np.asarray(P, dtype=np.float64).reshape(3)
    chart0 = NormalChart(provider, P, eps, rotation)
    F = chart0.frame
    ev0 = evaluate_G(grid, chart0, phi)
    amb0 = ev0.data.amb
    gn = np.einsum("nab,nb->na", amb0.gX,
                   np.einsum("nab,nb->na", amb0.Dc, ev0.data.normal))
    psi = np.empty((grid.nnodes, 3))
    for i in range(3):
        Xpm = []
        for sgn in (1.0, -1.0):
            Pp = exp_map(provider, P, sgn * delta * eps * F[:, i])
            chp = NormalChart(provider, Pp, eps, rotation)
            _, evp, _ = solve_correction(grid, chp, phi0=phi, tol=tol)
            Xpm.append(evp.data.amb.X)
        dX = (Xpm[0] - Xpm[1]) / (2.0 * delta)
        psi[:, i] = np.einsum("na,na->n", dX, gn) / (eps * eps)
    return psi, ev0


def reduced_gradient(provider, P, eps, grid, phi, rotation=None, tol=None):
    """Gradient of the reduced energy in the dimensionless frame
    coordinates z (center = exp_P(eps F z)): twice the pairing of the
    Euler-Lagrange field with the translation speeds.
    """
    psi, ev0 = translation_fields(provider, P, eps, grid, phi,
                                  rotation=rotation, tol=tol)
    mu, wp = ev0.data.mu, ev0.data.wprime
    return np.array([2.0 * float(mu @ (wp * psi[:, i])) for i in range(3)]), ev0
