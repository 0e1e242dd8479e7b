"""Command line front end: config parsing, dispatch, serialization.

Usage: willmore <config-file> [--output-dir DIR] [--threads N]

Exit codes: 0 success, 1 domain or numerical failure, 2 config errors.
CSV outputs are deterministic: identical configs give identical bytes.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .ambient import NormalChart, curvature_bundle, find_sc_critical
from .backend import backend_name, set_threads
from .config import build_provider, parse_config, print_config
from .errors import ConfigError, WillmoreError
from .geometry import coordinate_sphere_hawking, hawking_mass
from .landscape import (EXPAND_COLUMNS, expansion_table, find_critical_point,
                        foliate_sweep, hessian_index)
from .reduction import multipliers, solve_correction, solve_tolerance
from .spectral import get_grid

LEAVES_HEADER = ("eps, Px, Py, Pz, Phi, beta0, beta1, beta2, beta3, "
                 "grad_norm, index, hawking, center_drift, phi_sup")
EXPAND_HEADER = "eps, W, res_WE, res_WEdiff, res_H, res_area_element, res_Eq41"


def _g17(v):
    return format(float(v), ".17g")


def _listify(arr):
    return np.asarray(arr, dtype=np.float64).tolist()


def _run_curvature(cfg, provider):
    P = np.array(cfg.P, dtype=np.float64)
    b = curvature_bundle(provider, P)
    report = {
        "P": list(cfg.P),
        "g": _listify(b.g[0]),
        "christoffel": _listify(b.christoffel[0]),
        "ricci": _listify(b.ricci[0]),
        "scalar": float(b.scalar[0]),
        "einstein": _listify(b.einstein[0]),
        "riemann": _listify(b.riemann[0]),
    }
    if getattr(provider, "is_conformal", False):
        report["grad_scalar"] = _listify(
            provider.grad_scalar_curvature(P[None, :])[0])
        report["hess_scalar"] = _listify(
            provider.hess_scalar_curvature(P[None, :])[0])
    return report, {}


def _run_solve(cfg, provider):
    grid = get_grid(cfg.L)
    eps = cfg.eps
    tol = cfg.tol if cfg.tol is not None else solve_tolerance(eps, cfg.L)
    chart = NormalChart(provider, np.array(cfg.P), eps)
    phi, ev, info = solve_correction(grid, chart, tol=tol)
    beta, remainder = multipliers(grid, ev)
    data = ev.data
    orth = [float(data.mu @ (ev.basis[:, i] * data.phi)) for i in range(1, 4)]
    report = {
        "eps": eps, "P": list(cfg.P), "L": cfg.L, "tol": info.tol,
        "iterations": info.iterations, "residual": info.residuals[-1],
        "W": data.willmore, "area": data.area,
        "area_residual": data.area - 4.0 * np.pi,
        "orthogonality_residual": max(abs(v) for v in orth),
        "beta": _listify(beta), "multiplier_remainder": remainder,
        "phi_sup": float(np.abs(data.phi).max()),
        "hawking": hawking_mass(eps * eps * data.area, data.willmore),
    }
    return report, {}


def _expand_csv(tab):
    lines = [EXPAND_HEADER]
    for row in tab.rows:
        lines.append(", ".join(_g17(row[c]) for c in EXPAND_COLUMNS))
    return "\n".join(lines) + "\n"


def _run_expand(cfg, provider):
    grid = get_grid(cfg.L)
    tab = expansion_table(provider, np.array(cfg.P), cfg.eps_grid, grid)
    report = {
        "P": list(cfg.P), "L": cfg.L, "eps": tab.eps,
        "slopes": tab.slopes, "flags": tab.flags,
        "tolerances": [solve_tolerance(e, cfg.L) for e in tab.eps],
    }
    return report, {"expand.csv": _expand_csv(tab)}


def _run_landscape(cfg, provider):
    grid = get_grid(cfg.L)
    crit = find_critical_point(provider, cfg.eps, np.array(cfg.P), grid,
                               grad_tol=cfg.grad_tol)
    warnings = []
    try:
        P0 = find_sc_critical(provider, np.array(cfg.P))
        drift = float(np.linalg.norm(crit.P - P0))
    except WillmoreError as exc:
        warnings.append(f"no scalar curvature critical point near start: {exc}")
        P0, drift = crit.P, 0.0
    idx = hessian_index(crit, provider.hess_scalar_curvature(P0[None, :])[0])
    report = {
        "eps": crit.eps, "L": cfg.L, "P_eps": _listify(crit.P),
        "P0": _listify(P0), "center_drift": drift, "value": crit.value,
        "grad_norm": crit.grad_norm, "hessian": _listify(crit.hessian),
        "eigenvalues": _listify(crit.eigenvalues), "index": crit.index,
        "inconclusive": crit.inconclusive, "beta": _listify(crit.beta),
        "iterations": crit.iterations, "solve_count": crit.solve_count,
        "index_report": idx, "warnings": warnings,
    }
    return report, {}


def _leaves_csv(leaves):
    lines = [LEAVES_HEADER]
    for lf in leaves:
        cells = [_g17(lf.eps), _g17(lf.P[0]), _g17(lf.P[1]), _g17(lf.P[2]),
                 _g17(lf.value)]
        cells += [_g17(b) for b in lf.beta]
        cells += [_g17(lf.grad_norm), str(int(lf.index)), _g17(lf.hawking),
                  _g17(lf.center_drift), _g17(lf.phi_sup)]
        lines.append(", ".join(cells))
    return "\n".join(lines) + "\n"


def _run_foliate(cfg, provider):
    grid = get_grid(cfg.L)
    leaves, rep = foliate_sweep(provider, np.array(cfg.P), cfg.eps_grid,
                                grid, pin_center=cfg.pin_center)
    report = {
        "L": cfg.L, "mode": rep.mode, "eps": rep.eps,
        "verdict": rep.verdict, "min_speed": rep.min_speed,
        "max_speed": rep.max_speed, "speed_bound_C": rep.speed_bound_C,
        "deviation": rep.deviation, "deviation_eps": rep.deviation_eps,
        "deviation_slope": rep.deviation_slope, "disjoint": rep.disjoint,
        "violations": rep.violations, "warnings": rep.warnings,
        "normal_speed_range": [list(lf.normal_speed_range) for lf in leaves],
        "tolerances": [solve_tolerance(e, cfg.L) for e in rep.eps],
        "grad_tolerances": [1.0e-8 * e * e for e in rep.eps],
    }
    return report, {"leaves.csv": _leaves_csv(leaves)}


def _run_hawking(cfg, provider):
    grid = get_grid(cfg.L)
    center = np.array(cfg.P if cfg.P is not None else (0.0, 0.0, 0.0))
    rows = []
    for r in cfg.radii:
        mass, data = coordinate_sphere_hawking(provider, center, r, grid)
        rows.append({"radius": r, "area": r * r * data.area,
                     "W": data.willmore, "hawking": mass})
    report = {"L": cfg.L, "center": _listify(center), "rows": rows}
    return report, {}


_RUNNERS = {
    "curvature": _run_curvature,
    "solve": _run_solve,
    "expand": _run_expand,
    "landscape": _run_landscape,
    "foliate": _run_foliate,
    "hawking": _run_hawking,
}


def dispatch(cfg, output_dir):
    """Run the configured pipeline, write outputs, return the manifest."""
    os.makedirs(output_dir, exist_ok=True)
    t0 = time.perf_counter()
    provider = build_provider(cfg)
    report, files = _RUNNERS[cfg.command](cfg, provider)
    elapsed = time.perf_counter() - t0

    written = []
    for name, text in files.items():
        path = os.path.join(output_dir, name)
        with open(path, "w") as fh:
            fh.write(text)
        written.append(name)
    report_path = os.path.join(output_dir, "report.json")
    with open(report_path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append("report.json")

    manifest = {
        "config": print_config(cfg),
        "version": __version__,
        "backend": backend_name(),
        "command": cfg.command,
        "seed": cfg.seed,
        "timings": {cfg.command: elapsed},
        "warnings": report.get("warnings", []),
        "files": sorted(written),
    }
    with open(os.path.join(output_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="willmore",
        description="Area-constrained Willmore sphere pipelines.",
    )
    parser.add_argument("config", help="path to a key = value config file")
    parser.add_argument("--output-dir", default=None,
                        help="directory for CSV/JSON outputs")
    parser.add_argument("--threads", type=int, default=None,
                        help="compute threads (fallback: WILLMORE_THREADS)")
    args = parser.parse_args(argv)

    try:
        with open(args.config) as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2

    try:
        cfg = parse_config(text)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    set_threads(args.threads)

    out = args.output_dir or cfg.output_dir or "."
    try:
        manifest = dispatch(cfg, out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except WillmoreError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for name in manifest["files"]:
        print(os.path.join(out, name))
    return 0


if __name__ == "__main__":
    sys.exit(main())
