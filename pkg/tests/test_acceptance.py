"""End-to-end acceptance checks, one test per headline claim.

Every test measures its own wall time against the stated budget, folds
the budget into the pass condition, and records a one-line verdict that
the terminal summary prints after the run.
"""
import math
import time

import numpy as np
import pytest
from conftest import record_criterion

from willmore.ambient import NormalChart, find_sc_critical
from willmore.geometry import coordinate_sphere_hawking
from willmore.landscape import (eigen_signs, expansion_table,
                                find_critical_point, fit_slope, foliate_sweep,
                                hessian_index)
from willmore.reduction import multipliers, solve_correction, solve_tolerance
from willmore.spectral import coeff_index, get_grid

EPS_FOUR = (0.2, 0.1, 0.05, 0.025)
EPS_FIVE = (0.2, 0.14, 0.1, 0.07, 0.05)


def test_c01_flat_round_sphere(flat, grid16):
    t0 = time.perf_counter()
    chart = NormalChart(flat, np.zeros(3), 0.1)
    phi, ev, info = solve_correction(grid16, chart)
    w_err = abs(ev.data.willmore - 16.0 * math.pi)
    wp_sup = float(np.abs(ev.data.wprime).max())
    phi_sup = float(np.abs(phi).max())
    elapsed = time.perf_counter() - t0
    ok = (w_err <= 1.0e-10 and wp_sup <= 1.0e-9 and phi_sup == 0.0
          and elapsed < 5.0)
    record_criterion(
        1, "flat round sphere baseline", ok,
        f"|W - 16 pi| {w_err:.2e}, sup|wprime| {wp_sup:.2e}, "
        f"phi identically zero after {info.iterations} iterations, "
        f"{elapsed:.2f} s")
    assert ok


def test_c02_flat_linearization(grid16):
    t0 = time.perf_counter()
    grid = grid16
    low = grid.ell <= 1
    # the operator is coefficient-diagonal, so its kernel and its
    # degree-2 eigenvalue are exact in coefficient form; the independent
    # content is that projecting the named functions into that form
    # reproduces their exact coefficients to roundoff
    assert np.all(grid.bilap_eig[low] == 0.0)
    fidelity = 0.0
    exact = np.zeros(grid.nsph)
    exact[coeff_index(0, 0)] = math.sqrt(4.0 * math.pi)
    fidelity = max(fidelity,
                   float(np.abs(grid.analyze(np.ones(grid.nnodes))
                                - exact).max()))
    eig_err = 0.0
    for i in range(3):
        a = grid.analyze(grid.qhat[:, i])
        fidelity = max(fidelity, float(np.abs(a[~low]).max()))
        fidelity = max(fidelity, abs(float(np.linalg.norm(a))
                                     - math.sqrt(4.0 * math.pi / 3.0)))
        kernel_part = np.where(low, a, 0.0)
        out = grid.apply_round_operator(kernel_part, "willmore_linear")
        eig_err = max(eig_err, float(np.abs(out).max()))
    for m in range(-2, 3):
        e = np.zeros(grid.nsph)
        e[coeff_index(2, m)] = 1.0
        out = grid.apply_round_operator(e, "willmore_linear")
        eig_err = max(eig_err, float(np.abs(out - 24.0 * e).max()))
        fidelity = max(fidelity,
                       float(np.abs(grid.analyze(grid.synth(e)) - e).max()))
    elapsed = time.perf_counter() - t0
    ok = eig_err == 0.0 and fidelity <= 1.0e-12 and elapsed < 1.0
    record_criterion(
        2, "flat linearization kernel and degree-2 eigenvalue", ok,
        f"kernel annihilation and eigenvalue 24 exact in coefficient "
        f"form (error {eig_err:.1e}), projection fidelity "
        f"{fidelity:.2e}, {elapsed:.2f} s")
    assert ok


def test_c03_energy_expansion(sphere3, bump):
    t0 = time.perf_counter()
    grid = get_grid(24)
    details = []
    ok = True
    for name, prov in (("round_s3", sphere3), ("bump", bump)):
        tab = expansion_table(prov, np.zeros(3), list(EPS_FOUR), grid)
        sc_true = float(prov.scalar_curvature(np.zeros((1, 3)))[0])
        row = tab.rows[-1]
        e = row["eps"]
        sc_est = (16.0 * math.pi - row["W"]) * 3.0 / (8.0 * math.pi * e * e)
        rel = abs(sc_est - sc_true) / abs(sc_true)
        slope = tab.slopes["res_WE"]
        ok = ok and slope is not None and 3.5 <= slope <= 4.5 and rel <= 0.02
        details.append(f"{name} res_WE slope {slope:.3f} Sc rel err {rel:.1e}")
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 120.0
    record_criterion(3, "geodesic sphere energy expansion", ok,
                     "; ".join(details) + f", {elapsed:.1f} s")
    assert ok


def test_c04_graph_smallness(sphere3, bump, grid16):
    t0 = time.perf_counter()
    details = []
    ok = True
    for name, prov in (("round_s3", sphere3), ("bump", bump)):
        sups, areas, orths = [], [], []
        phi = None
        for eps in EPS_FOUR:
            chart = NormalChart(prov, np.zeros(3), eps)
            phi, ev, _ = solve_correction(grid16, chart, phi0=phi,
                                          tol=solve_tolerance(eps, grid16.L))
            d = ev.data
            sups.append(float(np.abs(d.phi).max()))
            areas.append(abs(d.area - 4.0 * math.pi))
            orths.append(max(abs(float(d.mu @ (ev.basis[:, i] * d.phi)))
                             for i in (1, 2, 3)))
        slope = fit_slope(list(EPS_FOUR), sups)
        ok = ok and 1.8 <= slope <= 2.2
        ok = ok and max(areas) <= 1.0e-9 and max(orths) <= 1.0e-9
        details.append(f"{name} phi slope {slope:.3f} area "
                       f"{max(areas):.1e} orth {max(orths):.1e}")
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 300.0
    record_criterion(4, "solved graph smallness and constraints", ok,
                     "; ".join(details) + f", {elapsed:.1f} s")
    assert ok


def test_c05_multiplier_collapse(quad, grid16):
    t0 = time.perf_counter()
    crit = find_critical_point(quad, 0.1, np.array([0.3, 0.0, 0.0]), grid16)
    ratio_crit = max(abs(b) for b in crit.beta[1:]) / abs(crit.beta[0])
    chart = NormalChart(quad, crit.P + np.array([0.2, 0.0, 0.0]), 0.1)
    _, ev, _ = solve_correction(grid16, chart,
                                tol=solve_tolerance(0.1, grid16.L))
    beta, _ = multipliers(grid16, ev)
    ratio_off = max(abs(b) for b in beta[1:]) / abs(beta[0])
    elapsed = time.perf_counter() - t0
    ok = ratio_crit <= 1.0e-6 and ratio_off >= 1.0e-3 and elapsed < 300.0
    record_criterion(
        5, "translation multipliers vanish only at the critical center", ok,
        f"beta ratio {ratio_crit:.2e} at the solved center, "
        f"{ratio_off:.2e} at offset 0.2, {elapsed:.1f} s")
    assert ok


def test_c06_solved_surface_expansion(sphere3, schw, quad, bump, grid16):
    t0 = time.perf_counter()
    cases = [("round_s3", sphere3, np.zeros(3)),
             ("schwarzschild", schw, np.array([3.0, 0.0, 0.0])),
             ("quadratic", quad, np.zeros(3)),
             ("bump", bump, np.zeros(3))]
    details = []
    ok = True
    for name, prov, P in cases:
        tab = expansion_table(prov, P, list(EPS_FOUR), grid16)
        slope = tab.slopes["res_Eq41"]
        vals = [r["res_Eq41"] for r in tab.rows]
        if slope is None:
            # exactly solvable case: every row sits at the solver floor
            good = ("res_Eq41_below_noise" in tab.flags
                    and max(vals) <= 1.0e-9)
            details.append(f"{name} below solver noise "
                           f"(max {max(vals):.1e})")
        else:
            good = slope >= 0.9
            details.append(f"{name} slope {slope:.3f}")
        ok = ok and good
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 300.0
    record_criterion(6, "solved-surface expansion residual decay", ok,
                     "; ".join(details) + f", {elapsed:.1f} s")
    assert ok


def test_c07_center_drift_symmetric(quad, grid16):
    t0 = time.perf_counter()
    P0 = find_sc_critical(quad, np.array([0.3, 0.0, 0.0]))
    drifts = []
    start = np.array([0.3, 0.0, 0.0])
    for eps in EPS_FIVE:
        crit = find_critical_point(quad, eps, start, grid16)
        drifts.append(float(np.linalg.norm(crit.P - P0)))
        start = crit.P
    slope = fit_slope(list(EPS_FIVE), drifts)
    elapsed = time.perf_counter() - t0
    ok = 1.7 <= slope <= 2.3 and elapsed < 600.0
    record_criterion(
        7, "center drift order, rotationally symmetric landscape", ok,
        f"drifts {min(drifts):.2e}..{max(drifts):.2e} slope {slope:.2f}: "
        f"this metric is invariant under rotations about the center, so "
        f"the solved center coincides with it exactly and the measured "
        f"drift is pure solver noise with no decay signal, {elapsed:.1f} s")
    assert ok, ("center drift slope has no signal on a rotationally "
                f"symmetric landscape: drifts {drifts}, slope {slope:.3f}")


def test_c07b_center_drift_asymmetric(two_bump, grid12):
    t0 = time.perf_counter()
    P0 = find_sc_critical(two_bump, np.zeros(3))
    hess_sc = two_bump.hess_scalar_curvature(P0[None, :])[0]
    neg_sc, unc_sc, _ = eigen_signs(hess_sc)
    drifts, indices = [], []
    start = P0
    for eps in EPS_FIVE:
        crit = find_critical_point(two_bump, eps, start, grid12)
        drifts.append(float(np.linalg.norm(crit.P - P0)))
        indices.append(crit.index)
        start = crit.P
    slope = fit_slope(list(EPS_FIVE), drifts)
    elapsed = time.perf_counter() - t0
    ok = (1.7 <= slope <= 2.3 and unc_sc == 0
          and all(idx == 3 - neg_sc for idx in indices)
          and elapsed < 600.0)
    record_criterion(
        7, "center drift order, asymmetric two-bump landscape", ok,
        f"drifts {max(drifts):.2e}..{min(drifts):.2e} slope {slope:.3f}, "
        f"index {indices[0]} = 3 - {neg_sc} on every rung, {elapsed:.1f} s",
        sub="b")
    assert ok


@pytest.fixture(scope="module")
def quad_sweep(quad, grid16):
    t0 = time.perf_counter()
    leaves, rep = foliate_sweep(quad, np.zeros(3), list(EPS_FIVE), grid16)
    return leaves, rep, time.perf_counter() - t0


def test_c08_foliation_speeds(quad_sweep):
    t0 = time.perf_counter()
    leaves, rep, sweep_time = quad_sweep
    elapsed = sweep_time + (time.perf_counter() - t0)
    ok = (rep.verdict.startswith("foliation verified")
          and rep.min_speed > 0.0
          and 0.0 < rep.speed_bound_C <= 1.0
          and rep.deviation_slope is not None
          and rep.deviation_slope >= 0.8
          and rep.disjoint
          and not rep.violations
          and elapsed < 600.0)
    record_criterion(
        8, "foliation speeds and leaf disjointness", ok,
        f"{rep.verdict}, speeds [{rep.min_speed:.6f}, {rep.max_speed:.6f}] "
        f"inside 1 -+ C eps with C {rep.speed_bound_C:.2e}, deviation "
        f"slope {rep.deviation_slope:.3f}, disjoint {rep.disjoint}, "
        f"{elapsed:.1f} s")
    assert ok


def test_c09_index_and_hawking(quad, quad_sweep):
    t0 = time.perf_counter()
    leaves, rep, sweep_time = quad_sweep
    P0 = find_sc_critical(quad, np.zeros(3))
    hess_sc = quad.hess_scalar_curvature(P0[None, :])[0]
    idx = hessian_index(leaves[0].critical, hess_sc)
    indices = [leaf.index for leaf in leaves]
    hawkings = [leaf.hawking for leaf in leaves]
    elapsed = sweep_time + (time.perf_counter() - t0)
    ok = (idx["match"] and idx["conclusive"]
          and all(i == 3 for i in indices)
          and all(h > 0.0 for h in hawkings)
          and elapsed < 600.0)
    record_criterion(
        9, "index relation and Hawking mass positivity", ok,
        f"index {indices} = 3 - {idx['index_sc']} with matching sign "
        f"pattern, hawking {min(hawkings):.2e}..{max(hawkings):.2e} "
        f"positive on every leaf, {elapsed:.1f} s")
    assert ok


def test_c10_schwarzschild_hawking(schw, grid16):
    t0 = time.perf_counter()
    rels = []
    for r in (2.0, 3.0, 4.0):
        mh, _ = coordinate_sphere_hawking(schw, np.zeros(3), r, grid16)
        rels.append(abs(mh - 1.0))
    elapsed = time.perf_counter() - t0
    ok = max(rels) <= 1.0e-4 and elapsed < 60.0
    record_criterion(
        10, "Schwarzschild coordinate sphere Hawking mass", ok,
        f"relative error {max(rels):.2e} over radii 2, 3, 4, "
        f"{elapsed:.1f} s")
    assert ok
