"""Reduced energy landscape over the center manifold.

Solving the projected equation at center P and radius eps and evaluating
the Willmore integral of the solution defines the reduced energy
Phi_eps(P).  Its critical points are genuine area-constrained critical
surfaces; its Hessian encodes their stability.  To leading order

    Phi_eps(P) = 16 pi - (8 pi / 3) eps^2 Sc(P) + higher order,

so the landscape inherits the scalar curvature's critical structure with
the sign flipped.  This module walks that landscape: Newton search for
critical centers, finite-difference Hessians with index bookkeeping,
expansion residual tables, and concentric sweeps that certify the solved
spheres foliate an annular neighborhood.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ambient import (NormalChart, exp_map, find_sc_critical,
                      orthonormal_frame)
from .errors import (DegenerateLandscapeError, DomainError, GeometryError,
                     NoConvergenceError)
from .geometry import hawking_mass, surface_geometry
from .reduction import (grid_floor, multipliers, reduced_gradient,
                        solve_correction, solve_tolerance)

HESS_STEP = 1.0e-2        # dimensionless; physical center step is eps * this
HESS_FLOOR = 1.0e-9       # frame-Hessian scale below which the landscape is flat
COND_LIMIT = 1.0e8
SIGN_BAND = 1.0e-3        # relative band for inconclusive eigenvalue signs


class ReducedMap:
    """Warm-started solves of the projected equation for one (eps, grid)."""

    def __init__(self, provider, eps, grid, rotation=None, tol=None):
        if not 0.0 < eps <= 0.5:
            raise DomainError(f"radius must lie in (0, 0.5], got {eps}")
        self.provider = provider
        self.eps = float(eps)
        self.grid = grid
        self.rotation = rotation
        self.tol = solve_tolerance(eps, grid.L) if tol is None else float(tol)
        self.last_phi = None
        self.solve_count = 0

    def chart(self, P):
        return NormalChart(self.provider, P, self.eps, self.rotation)

    def frame(self, P):
        return orthonormal_frame(self.provider, P, self.rotation)

    def shift(self, P, z):
        """Geodesic displacement of the center by eps * z in the frame."""
        return exp_map(self.provider, P, self.eps * (self.frame(P) @ np.asarray(z)))

    def solve(self, P, phi0="warm"):
        if isinstance(phi0, str) and phi0 == "warm":
            phi0 = self.last_phi
        phi, ev, info = solve_correction(
            self.grid, self.chart(P), phi0=phi0, tol=self.tol
        )
        self.last_phi = phi
        self.solve_count += 1
        return phi, ev, info

    def value(self, P, phi0="warm"):
        """Reduced energy at center P."""
        _, ev, _ = self.solve(P, phi0=phi0)
        return ev.data.willmore

    def gradient(self, P, phi):
        """Translation-pairing gradient in the dimensionless frame coords."""
        return reduced_gradient(
            self.provider, P, self.eps, self.grid, phi,
            rotation=self.rotation, tol=self.tol,
        )


def fd_value_gradient(rmap, P, phi_center, h=HESS_STEP):
    """Central-difference gradient of the reduced energy, value route.

    Cross-checks the translation-pairing gradient; both must vanish at a
    critical center.
    """
    g = np.empty(3)
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        fp = rmap.value(rmap.shift(P, e), phi0=phi_center)
        fm = rmap.value(rmap.shift(P, -e), phi0=phi_center)
        g[i] = (fp - fm) / (2.0 * h)
    return g


def fd_hessian(rmap, P, phi_center, h=HESS_STEP):
    """Frame-coordinate Hessian by central differences of the gradient.

    Steps the center by eps*h along each frame direction and differences
    the translation-pairing gradient there, then symmetrizes.
    """
    cols = np.empty((3, 3))
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        Pp = rmap.shift(P, e)
        Pm = rmap.shift(P, -e)
        phip, _, _ = rmap.solve(Pp, phi0=phi_center)
        gp, _ = rmap.gradient(Pp, phip)
        phim, _, _ = rmap.solve(Pm, phi0=phi_center)
        gm, _ = rmap.gradient(Pm, phim)
        cols[i] = (gp - gm) / (2.0 * h)
    return 0.5 * (cols + cols.T)


def check_nondegenerate(H):
    """Reject a frame Hessian that is flat at noise scale or ill conditioned."""
    scale = float(np.abs(H).max())
    if scale < HESS_FLOOR:
        raise DegenerateLandscapeError(
            f"reduced energy Hessian at scale {scale:.3e} is "
            "indistinguishable from a flat landscape; no nondegenerate "
            "critical point to find"
        )
    cond = np.linalg.cond(H)
    if cond > COND_LIMIT:
        raise DegenerateLandscapeError(
            f"reduced energy Hessian condition number {cond:.3e} "
            "indicates a degenerate landscape"
        )


def eigen_signs(H, band=SIGN_BAND):
    """(negatives, inconclusive, eigenvalues ascending) with eigenvalues
    inside band * max|eig| counted as unsigned."""
    ev = np.linalg.eigvalsh(np.asarray(H, dtype=np.float64))
    cut = band * float(np.abs(ev).max())
    neg = int(np.sum(ev < -cut))
    unc = int(np.sum(np.abs(ev) <= cut))
    return neg, unc, ev


@dataclass
class CriticalPoint:
    P: np.ndarray             # critical center, provider coordinates
    eps: float
    value: float              # reduced energy there
    grad_norm: float          # frame-coordinate gradient norm at exit
    hessian: np.ndarray       # (3,3) Hessian in provider coordinates
    hessian_z: np.ndarray     # (3,3) Hessian in the dimensionless frame
    eigenvalues: np.ndarray   # of hessian, ascending
    index: int                # count of negative eigenvalues
    inconclusive: int         # eigenvalues too close to zero to sign
    iterations: int
    phi: np.ndarray           # solved graph coefficients at P
    beta: np.ndarray          # multipliers at P
    solve_count: int


def find_critical_point(provider, eps, start, grid, rotation=None,
                        max_iter=30, grad_tol=None):
    """Newton search for a nondegenerate critical center of the reduced
    energy, starting near start.

    The gradient comes from the translation-speed pairing, the Hessian
    from central differences of that gradient with physical step eps/100,
    reused across a few steps.  The Hessian is formed and vetted before
    the first convergence check, so a flat landscape (euclidean ambient)
    raises DegenerateLandscapeError instead of returning a spurious
    critical point.  Steps are capped at half the provider's validity
    radius.  Failure to converge raises NoConvergenceError carrying the
    trajectory of (P, gradient norm) pairs.
    """
    P = np.asarray(start, dtype=np.float64).reshape(3).copy()
    rmap = ReducedMap(provider, eps, grid, rotation)
    gtol = 1.0e-8 * eps * eps if grad_tol is None else float(grad_tol)
    rmap.tol = max(min(rmap.tol, 0.1 * gtol), grid_floor(grid.L))

    H = None
    prev_gnorm = None
    trajectory = []
    step_cap = 0.5 * provider.validity_radius / eps
    for it in range(max_iter):
        phi, ev, _ = rmap.solve(P)
        grad, ev = rmap.gradient(P, phi)
        gnorm = float(np.linalg.norm(grad))
        trajectory.append((P.copy(), gnorm))
        stale = H is not None and it % 3 == 0 and it > 0
        worse = prev_gnorm is not None and gnorm > 0.5 * prev_gnorm
        if H is None or stale or worse:
            H = fd_hessian(rmap, P, phi)
            check_nondegenerate(H)
        if gnorm <= gtol:
            F = rmap.frame(P)
            Finv = np.linalg.inv(F)
            Hp = Finv.T @ H @ Finv / (eps * eps)
            neg, unc, eigs = eigen_signs(Hp)
            beta, _ = multipliers(grid, ev)
            return CriticalPoint(
                P=P, eps=eps, value=ev.data.willmore, grad_norm=gnorm,
                hessian=Hp, hessian_z=H, eigenvalues=eigs, index=neg,
                inconclusive=unc, iterations=it, phi=phi, beta=beta,
                solve_count=rmap.solve_count,
            )
        dz = -np.linalg.solve(H, grad)
        nz = float(np.linalg.norm(dz))
        if nz > step_cap:
            dz *= step_cap / nz
        P = rmap.shift(P, dz)
        prev_gnorm = gnorm
    raise NoConvergenceError(
        f"critical center search exhausted {max_iter} Newton steps "
        f"(last gradient norm {trajectory[-1][1]:.3e})",
        trajectory,
    )


def hessian_index(crit, hess_sc, eps=None):
    """Compare the sign pattern of the reduced Hessian with the predicted
    -(8 pi / 3) eps^2 Hess Sc.

    Eigenvalues within the relative band cannot be signed and are flagged
    inconclusive rather than counted.  The match field reports whether
    the conclusive sign patterns agree, which is the index relation
    index(Phi) = 3 - index(Sc).
    """
    eps = crit.eps if eps is None else float(eps)
    pred = -(8.0 * math.pi / 3.0) * eps * eps * np.asarray(hess_sc,
                                                           dtype=np.float64)
    neg, unc, eigs = eigen_signs(crit.hessian)
    neg_p, unc_p, eigs_p = eigen_signs(pred)
    neg_sc, unc_sc, _ = eigen_signs(-pred)
    conclusive = unc == 0 and unc_p == 0
    return {
        "eigenvalues": eigs.tolist(),
        "eigenvalues_predicted": eigs_p.tolist(),
        "signs": [int(np.sign(v)) for v in eigs],
        "signs_predicted": [int(np.sign(v)) for v in eigs_p],
        "index": neg,
        "index_sc": neg_sc,
        "inconclusive": unc,
        "inconclusive_predicted": unc_p,
        "conclusive": bool(conclusive),
        "match": bool(conclusive and neg == neg_p and neg == 3 - neg_sc),
    }


# ---------------------------------------------------------------------------
# expansion diagnostics
# ---------------------------------------------------------------------------

EXPAND_COLUMNS = ("eps", "W", "res_WE", "res_WEdiff", "res_H",
                  "res_area_element", "res_Eq41")


@dataclass
class ExpansionTable:
    eps: list
    rows: list                 # dicts keyed by EXPAND_COLUMNS
    slopes: dict               # column -> fitted slope, or None if unreliable
    flags: list = field(default_factory=list)


def fit_slope(eps, vals, floor=1.0e-300):
    """Least-squares slope of log(val) against log(eps)."""
    x = np.log(np.asarray(eps, dtype=np.float64))
    y = np.log(np.maximum(np.abs(np.asarray(vals, dtype=np.float64)), floor))
    x = x - x.mean()
    return float((x @ (y - y.mean())) / (x @ x))


def check_eps_ladder(eps_list):
    """Flags when a residual ladder cannot support slope fits: fewer than
    4 radii, largest above 0.2, or ratios far from 1/2."""
    flags = []
    e = sorted(eps_list, reverse=True)
    if len(e) < 4:
        flags.append("short_ladder")
    if max(e) > 0.2 + 1.0e-12:
        flags.append("large_radius")
    for a, b in zip(e, e[1:]):
        if not (0.35 <= b / a <= 0.65):
            flags.append("nonuniform_ratio")
            break
    return flags


def expansion_table(provider, P, eps_list, grid, rotation=None):
    """Residuals of the small-radius expansions over a ladder of radii.

    The W, res_WE, res_WEdiff, res_H, and res_area_element columns probe
    the geodesic sphere (graph zero): its energy against
    16 pi - (8 pi / 3) eps^2 Sc(P), a divided-difference check of
    dW/deps between consecutive radii (stored on the larger radius), and
    sup-norm residuals of the mean curvature and area element
    expansions.  res_Eq41 probes the solved surface: the same energy
    residual for the reduced value, scaled by eps^-2.  Slopes are
    least-squares fits in log-log; a residual column living below the
    spectral floor is reported with slope None.
    """
    P = np.asarray(P, dtype=np.float64).reshape(3)
    eps_list = sorted((float(e) for e in eps_list), reverse=True)
    F = orthonormal_frame(provider, P, rotation)
    sc = float(provider.scalar_curvature(P[None, :])[0])
    ric = provider.ricci(P[None, :])[0]
    ric_frame = F.T @ ric @ F
    ric_qq = np.einsum("na,ab,nb->n", grid.qhat, ric_frame, grid.qhat)
    pred_W = lambda e: 16.0 * math.pi - (8.0 * math.pi / 3.0) * e * e * sc

    rows = []
    floors = []
    phi_warm = None
    for eps in eps_list:
        chart = NormalChart(provider, P, eps, rotation)
        geo = surface_geometry(grid, chart, np.zeros(grid.nsph),
                               need="energy")
        W0 = geo.willmore
        res_h = float(np.abs(geo.H - 2.0 + (eps * eps / 3.0) * ric_qq).max())
        res_area = float(np.abs(
            geo.arel - (1.0 - (eps * eps / 6.0) * ric_qq)
        ).max())
        phi, ev, info = solve_correction(grid, chart, phi0=phi_warm,
                                         tol=solve_tolerance(eps, grid.L))
        phi_warm = phi
        floors.append(3.0 * info.tol / (eps * eps))
        rows.append({
            "eps": eps, "W": W0, "res_WE": abs(W0 - pred_W(eps)),
            "res_WEdiff": math.nan, "res_H": res_h,
            "res_area_element": res_area,
            "res_Eq41": abs(ev.data.willmore - pred_W(eps)) / (eps * eps),
        })
    for k in range(len(rows) - 1):
        e1, e2 = rows[k]["eps"], rows[k + 1]["eps"]
        em = 0.5 * (e1 + e2)
        fd = (rows[k]["W"] - rows[k + 1]["W"]) / (e1 - e2)
        pred = -(16.0 * math.pi / 3.0) * em * sc
        rows[k]["res_WEdiff"] = abs(fd - pred)

    flags = check_eps_ladder(eps_list)
    slopes = {}
    for col in ("res_WE", "res_H", "res_area_element"):
        vals = [r[col] for r in rows]
        if max(abs(v) for v in vals) < 1.0e-12:
            slopes[col] = None
            flags.append(f"{col}_below_noise")
        else:
            slopes[col] = fit_slope(eps_list, vals)
    # the solved-value residual is only meaningful above the solve target
    # rescaled by eps^-2; an exactly-solvable metric pins it at that floor
    vals = [r["res_Eq41"] for r in rows]
    if all(v <= f for v, f in zip(vals, floors)):
        slopes["res_Eq41"] = None
        flags.append("res_Eq41_below_noise")
    else:
        slopes["res_Eq41"] = fit_slope(eps_list, vals)
    dv = [r["res_WEdiff"] for r in rows[:-1]]
    dmid = [0.5 * (a + b) for a, b in zip(eps_list, eps_list[1:])]
    if len(dv) >= 2 and max(abs(v) for v in dv) >= 1.0e-12:
        slopes["res_WEdiff"] = fit_slope(dmid, dv)
    else:
        slopes["res_WEdiff"] = None
        if dv:
            flags.append("res_WEdiff_below_noise")
    return ExpansionTable(eps=eps_list, rows=rows, slopes=slopes, flags=flags)


# ---------------------------------------------------------------------------
# foliation
# ---------------------------------------------------------------------------

@dataclass
class Leaf:
    eps: float
    P: np.ndarray             # center used for this leaf
    phi: np.ndarray
    value: float              # Willmore integral
    beta: np.ndarray
    grad_norm: float
    index: int                # -1 when no Hessian was formed (pinned mode)
    hawking: float            # from physical area, which is 4 pi eps^2
    center_drift: float       # |P - P0| in provider coordinates
    phi_sup: float
    X: np.ndarray             # (N,3) provider-coordinate positions
    n_unit: np.ndarray        # (N,3) provider-coordinate g-unit normal
    gX: np.ndarray            # (N,3,3) ambient metric at X
    critical: CriticalPoint | None = None
    normal_speed_range: tuple | None = None


@dataclass
class FoliationReport:
    mode: str
    eps: list
    min_speed: float
    max_speed: float
    speed_bound_C: float       # smallest C with all speeds inside 1 -+ C eps
    deviation: list            # per-leaf sup |speed - 1|, interior leaves
    deviation_eps: list
    deviation_slope: float | None
    disjoint: bool
    verdict: str
    violations: list
    warnings: list


def _assemble_leaf(grid, eps, P, phi, ev, grad_norm, P0):
    beta, _ = multipliers(grid, ev)
    amb = ev.data.amb
    n_unit = np.einsum("nab,nb->na", amb.Dc, ev.data.normal) / eps
    area_phys = eps * eps * ev.data.area
    return Leaf(
        eps=eps, P=np.array(P, dtype=np.float64), phi=phi,
        value=ev.data.willmore, beta=beta, grad_norm=grad_norm, index=-1,
        hawking=hawking_mass(area_phys, ev.data.willmore),
        center_drift=float(np.linalg.norm(np.asarray(P) - P0)),
        phi_sup=float(np.abs(ev.data.phi).max()),
        X=amb.X, n_unit=n_unit, gX=amb.gX,
    )


def foliate_sweep(provider, start, eps_grid, grid, rotation=None,
                  pin_center=False):
    """Solve a decreasing ladder of radii and assemble the leaf family.

    By default each leaf sits at the critical center of its own reduced
    energy, warm-started from the previous leaf's center; pin_center
    keeps every leaf at start instead (the only usable mode on a flat
    landscape).  Center drift is measured against the scalar curvature
    critical point near start when one exists, else against start.  A
    failing leaf truncates the sweep with a warning in the report rather
    than raising.  Returns (leaves, report).
    """
    P0 = np.asarray(start, dtype=np.float64).reshape(3)
    eps_grid = sorted((float(e) for e in eps_grid), reverse=True)
    if len(eps_grid) < 3:
        raise DomainError("foliation sweep needs at least three radii")
    leaves = []
    warnings = []
    P_ref = P0
    if not pin_center:
        try:
            P_ref = find_sc_critical(provider, P0)
        except (DomainError, NoConvergenceError) as exc:
            warnings.append(
                f"no scalar curvature critical point near start "
                f"({exc}); drift measured from start"
            )
    phi_warm = None
    P = P0.copy()
    for eps in eps_grid:
        try:
            tol = solve_tolerance(eps, grid.L)
            if pin_center:
                phi_warm, ev, _ = solve_correction(
                    grid, NormalChart(provider, P0, eps, rotation),
                    phi0=phi_warm, tol=tol,
                )
                grad, ev = reduced_gradient(provider, P0, eps, grid,
                                            phi_warm, rotation=rotation,
                                            tol=tol)
                leaf = _assemble_leaf(grid, eps, P0, phi_warm, ev,
                                      float(np.linalg.norm(grad)), P0)
            else:
                crit = find_critical_point(provider, eps, P, grid, rotation)
                P = crit.P
                phi_warm = crit.phi
                _, ev, _ = solve_correction(
                    grid, NormalChart(provider, P, eps, rotation),
                    phi0=phi_warm, tol=tol,
                )
                leaf = _assemble_leaf(grid, eps, P, crit.phi, ev,
                                      crit.grad_norm, P_ref)
                leaf.index = crit.index
                leaf.critical = crit
        except (NoConvergenceError, GeometryError,
                DegenerateLandscapeError) as exc:
            warnings.append(f"sweep truncated at eps={eps:.6g}: {exc}")
            break
        leaves.append(leaf)
    if len(leaves) < 3:
        raise NoConvergenceError(
            "foliation sweep kept fewer than three usable leaves", warnings
        )
    return leaves, foliation_diagnostics(leaves, warnings=warnings,
                                         mode="pinned" if pin_center
                                         else "critical")


def foliation_diagnostics(leaves, warnings=(), mode="critical"):
    """Normal-speed and nesting verdict for a solved leaf family.

    All leaf embeddings live in provider coordinates, which rebases the
    family to a common chart; the speed at a node is g(dX/deps, n) with
    dX/deps from differences of consecutive embeddings (central in the
    interior, one-sided at the ends).  The verdict requires positive
    speed everywhere; the deviation slope is fitted on interior leaves
    only.  Nesting failures produce a violation report, not an exception.
    """
    if len(leaves) < 3:
        raise DomainError("foliation diagnostics needs at least three leaves")
    warnings = list(warnings)
    order = np.argsort([-lf.eps for lf in leaves])
    leaves = [leaves[i] for i in order]
    eps = np.array([lf.eps for lf in leaves])

    speeds = []
    for k in range(len(leaves)):
        if 0 < k < len(leaves) - 1:
            dX = (leaves[k - 1].X - leaves[k + 1].X) / (eps[k - 1]
                                                        - eps[k + 1])
            one_sided = False
        elif k == 0:
            dX = (leaves[0].X - leaves[1].X) / (eps[0] - eps[1])
            one_sided = True
        else:
            dX = (leaves[-2].X - leaves[-1].X) / (eps[-2] - eps[-1])
            one_sided = True
        sp = np.einsum("na,nab,nb->n", dX, leaves[k].gX, leaves[k].n_unit)
        leaves[k].normal_speed_range = (float(sp.min()), float(sp.max()))
        speeds.append((sp, one_sided))

    min_speed = min(float(s.min()) for s, _ in speeds)
    max_speed = max(float(s.max()) for s, _ in speeds)
    C = max(float(np.abs(s - 1.0).max() / e)
            for (s, _), e in zip(speeds, eps))
    dev = [float(np.abs(s - 1.0).max()) for s, os in speeds if not os]
    dev_eps = [float(e) for e, (_, os) in zip(eps, speeds) if not os]
    slope = None
    if len(dev) >= 2 and max(dev) > 1.0e-12:
        slope = fit_slope(dev_eps, dev)

    violations = []
    if min_speed <= 0.0:
        violations.append(
            f"normal speed reaches {min_speed:.3e}; leaves overlap or touch"
        )

    # nesting: distance to the smallest leaf's center must drop strictly
    # with eps at every sampled direction
    cref = leaves[-1].P
    gaps = []
    for a, b in zip(leaves, leaves[1:]):
        ra = np.linalg.norm(a.X - cref, axis=1)
        rb = np.linalg.norm(b.X - cref, axis=1)
        gaps.append(float((ra - rb).min()))
    disjoint = all(gp > 0.0 for gp in gaps)
    if not disjoint:
        violations.append(
            f"consecutive leaves fail strict nesting "
            f"(worst radial gap {min(gaps):.3e})"
        )

    if violations:
        verdict = "foliation violated: " + "; ".join(violations)
    else:
        verdict = f"foliation verified on [{eps[-1]:.6g}, {eps[0]:.6g}]"
    return FoliationReport(
        mode=mode, eps=[float(e) for e in eps], min_speed=min_speed,
        max_speed=max_speed, speed_bound_C=C, deviation=dev,
        deviation_eps=dev_eps, deviation_slope=slope, disjoint=disjoint,
        verdict=verdict, violations=violations, warnings=warnings,
    )
