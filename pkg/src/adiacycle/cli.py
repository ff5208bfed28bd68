"""Command-line entry point: ``adiacycle <command> [options]``.

Every command reads an optional INI configuration, applies command-line
overrides, and writes data files into ``--out``.  Each file starts with a
``#`` comment header carrying the tool version, the effective configuration
and the unit convention; the data follow (CSV, or JSON for summaries).

Exit codes: 0 success, 1 configuration error, 2 domain error, 3 partial
failure (some scan cells failed; see ``failures.csv``).
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import logging
import math
import os
import sys
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from . import __version__
from .errors import AdiacycleError, DomainError
from .geometry import RTOL, engine_oriented, summarize
from .optimizer import (
    RNG_SEED,
    Objective,
    compare_profiles,
    objective_value,
    optimize_ellipse,
    resolve_threads,
    scan_centers,
    sector_study,
)
from .performance import Drive, engine_figures, refrigerator_figures, si_estimates
from .qubit_model import (
    BathParams,
    berry_curvature,
    crossover_radii,
    kappa,
    lambda_eigenvalues,
    lambda_kappa_max_eigenvalue,
    lambda_vector,
)
from .trajectory import PROFILE_CELLS, CircularSector, Curve, Ellipse, FourierLoop, Polyline
from .units import UnitSystem

log = logging.getLogger("adiacycle")

EXIT_OK, EXIT_CONFIG, EXIT_DOMAIN, EXIT_PARTIAL = 0, 1, 2, 3
SIG_DIGITS = 12
THREADS_ENV = "ADIACYCLE_THREADS"

UNITS_LINE = (
    "units: natural; energies and fields in k_B T, times in hbar/(k_B T), "
    "powers in (k_B T)^2/hbar, T = cold-bath temperature; efficiencies as fractions of Carnot"
)

DEFAULTS = {
    "model": {"gamma_bar": "0.2", "eps_cutoff": "120"},
    "drive": {"bias_ratio": "0.05", "temperature_kelvin": "0.1", "mode": "auto"},
    "run": {"seed": str(RNG_SEED), "threads": "1", "tolerance": repr(RTOL)},
    "coeffs": {"z_min": "-3", "z_max": "3", "nz": "60", "x_min": "-3", "x_max": "3", "nx": "60"},
    "curve": {
        "type": "ellipse",
        "center": "1.0, 1.0",
        "a": "0.89590959",
        "b": "1.08874569",
        "tilt": repr(np.pi / 4),
        "orientation": "-1",
        "radius": "20",
        "aperture": repr(np.pi / 2),
        "bisector": repr(np.pi / 4),
        "vertices": "",
        "cos_coeffs": "",
        "sin_coeffs": "",
    },
    "optimize": {"kind": "power", "center": "1.0, 1.0", "seeds": "8", "max_axis": "20"},
    "scan": {
        "kind": "power",
        "z_min": "0.5",
        "z_max": "5",
        "nz": "10",
        "x_min": "0.5",
        "x_max": "5",
        "nx": "10",
        "seeds": "4",
        "max_axis": "20",
        "warm_start": "yes",
    },
    "sector": {"radii": "1, 2, 5, 10, 15, 20", "apertures": ", ".join(repr(k * np.pi / 16) for k in range(1, 17))},
    "profiles": {"source": "optimize", "kind": "efficiency", "center": "1.0, 1.0", "n_tau": "400"},
    "figures": {
        "map_n": "61",
        "map_extent": "3",
        "scan_n": "10",
        "scan_max": "5",
        "efficiency_radii": "1, 2, 5, 10, 15, 20",
        "gamma_min": "0.01",
        "gamma_max": "0.7",
        "gamma_n": "70",
    },
}


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# Configuration


def load_config(path: Optional[str]) -> configparser.ConfigParser:
    cfg = configparser.ConfigParser(interpolation=None)
    cfg.read_dict(DEFAULTS)
    if path is not None:
        if not os.path.isfile(path):
            raise ConfigError(f"config file not found: {path}")
        try:
            with open(path, encoding="utf-8") as fh:
                cfg.read_file(fh)
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from exc
    return cfg


def _float(cfg, section, key):
    raw = cfg.get(section, key)
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key} = {raw!r} is not a number") from exc


def _int(cfg, section, key, minimum=None):
    raw = cfg.get(section, key)
    try:
        val = int(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key} = {raw!r} is not an integer") from exc
    if minimum is not None and val < minimum:
        raise ConfigError(f"[{section}] {key} must be >= {minimum}")
    return val


def _floats(cfg, section, key, count=None) -> List[float]:
    raw = cfg.get(section, key).replace(";", ",")
    try:
        vals = [float(v) for v in raw.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key} = {raw!r} is not a list of numbers") from exc
    if count is not None and len(vals) != count:
        raise ConfigError(f"[{section}] {key} needs {count} values")
    if not vals:
        raise ConfigError(f"[{section}] {key} is empty")
    return vals


def _bool(cfg, section, key):
    try:
        return cfg.getboolean(section, key)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key} is not a boolean") from exc


def _choice(cfg, section, key, choices):
    val = cfg.get(section, key).strip()
    if val not in choices:
        raise ConfigError(f"[{section}] {key} must be one of {', '.join(choices)}")
    return val


def _axis(cfg, section, prefix):
    lo, hi = _float(cfg, section, f"{prefix}_min"), _float(cfg, section, f"{prefix}_max")
    n = _int(cfg, section, f"n{prefix}", minimum=1)
    if n > 1 and not hi > lo:
        raise ConfigError(f"[{section}] {prefix}_max must exceed {prefix}_min")
    return np.linspace(lo, hi, n) if n > 1 else np.array([lo])


def bath_from(cfg) -> BathParams:
    try:
        return BathParams(_float(cfg, "model", "gamma_bar"), _float(cfg, "model", "eps_cutoff"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def drive_from(cfg) -> Drive:
    try:
        return Drive(_float(cfg, "drive", "bias_ratio"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def units_from(cfg) -> UnitSystem:
    try:
        return UnitSystem(_float(cfg, "drive", "temperature_kelvin"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def curve_from(cfg) -> Curve:
    kind = _choice(cfg, "curve", "type", ("ellipse", "sector", "polyline", "fourier"))
    orientation = _int(cfg, "curve", "orientation")
    if orientation not in (1, -1):
        raise ConfigError("[curve] orientation must be 1 or -1")
    try:
        if kind == "ellipse":
            return Ellipse(
                tuple(_floats(cfg, "curve", "center", 2)),
                _float(cfg, "curve", "a"),
                _float(cfg, "curve", "b"),
                _float(cfg, "curve", "tilt"),
                orientation,
            )
        if kind == "sector":
            return CircularSector(
                _float(cfg, "curve", "radius"),
                _float(cfg, "curve", "aperture"),
                _float(cfg, "curve", "bisector"),
                orientation,
            )
        if kind == "polyline":
            flat = _floats(cfg, "curve", "vertices")
            if len(flat) % 2:
                raise ConfigError("[curve] vertices needs (b_z, b_x) pairs")
            return Polyline(np.reshape(flat, (-1, 2)), orientation)
        cos_c = np.reshape(_floats(cfg, "curve", "cos_coeffs"), (-1, 2))
        sin_c = np.reshape(_floats(cfg, "curve", "sin_coeffs"), (-1, 2))
        return FourierLoop(cos_c, sin_c, orientation)
    except DomainError:
        raise
    except ValueError as exc:
        raise ConfigError(f"[curve] {exc}") from exc


def apply_overrides(cfg, args):
    if args.seed is not None:
        cfg.set("run", "seed", str(args.seed))
    if args.tolerance is not None:
        if not args.tolerance > 0:
            raise ConfigError("--tolerance must be positive")
        cfg.set("run", "tolerance", repr(args.tolerance))
    threads = args.threads
    if threads is None and os.environ.get(THREADS_ENV):
        threads = os.environ[THREADS_ENV]
        try:
            threads = int(threads)
        except ValueError as exc:
            raise ConfigError(f"{THREADS_ENV}={threads!r} is not an integer") from exc
    if threads is not None:
        cfg.set("run", "threads", str(threads))
    try:
        resolve_threads(_int(cfg, "run", "threads"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _run_settings(cfg):
    tol = _float(cfg, "run", "tolerance")
    if not tol > 0:
        raise ConfigError("[run] tolerance must be positive")
    return _int(cfg, "run", "seed"), _int(cfg, "run", "threads", minimum=1), tol


# ---------------------------------------------------------------------------
# Output


def fmt(value) -> str:
    """Locale-independent decimal text with 12 significant digits."""
    if value is None:
        return "nan"
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return format(value, f".{SIG_DIGITS}g")


def header_lines(command: str, cfg, sections: Sequence[str], readme: Optional[str] = None) -> List[str]:
    buf = io.StringIO()
    echo = configparser.ConfigParser(interpolation=None)
    for sec in sections:
        echo[sec] = dict(cfg[sec])
    echo.write(buf)
    lines = [f"adiacycle {__version__}", f"command: {command}", UNITS_LINE]
    if readme:
        lines.append(f"README: {readme}")
    lines.append("config:")
    lines.extend("  " + ln for ln in buf.getvalue().splitlines() if ln.strip())
    return ["# " + ln for ln in lines]


def write_csv(path: Path, header: List[str], columns: Sequence[str], rows: Iterable[Sequence]):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(header) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([v if isinstance(v, str) else fmt(v) for v in row])


def _json_safe(obj):
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        val = float(obj)
        return val if math.isfinite(val) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path: Path, header: List[str], payload: dict):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(header) + "\n")
        json.dump(_json_safe(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_table(path) -> List[Dict[str, float]]:
    """Rows of a CSV written by this tool, as dicts of floats (header skipped)."""
    with open(path, encoding="utf-8") as fh:
        body = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.DictReader(body)
    out = []
    for row in reader:
        parsed = {}
        for key, val in row.items():
            try:
                parsed[key] = float(val)
            except ValueError:
                parsed[key] = val
        out.append(parsed)
    return out


def read_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.loads("".join(ln for ln in fh if not ln.startswith("#")))


# ---------------------------------------------------------------------------
# Row builders shared by commands and figures


COEFF_COLUMNS = (
    "b_z", "b_x", "lambda_r", "lambda_phi", "lambda_vec_z", "lambda_vec_x",
    "kappa", "curvature", "lambda_k_max_eigenvalue",
)


def coeff_rows(z_values, x_values, bath: BathParams):
    zz, xx = np.meshgrid(z_values, x_values, indexing="ij")
    pts = np.array([zz.ravel(), xx.ravel()])
    b_r = np.hypot(pts[0], pts[1])
    if np.any(b_r <= 0):
        raise DomainError("coefficient grid contains the field origin; shift or resize the grid")
    lam_r, lam_phi = lambda_eigenvalues(b_r, bath)
    vec = lambda_vector(pts)
    cols = [pts[0], pts[1], lam_r, lam_phi, vec[0], vec[1], kappa(pts, bath), berry_curvature(pts),
            lambda_kappa_max_eigenvalue(pts, bath)]
    return np.column_stack([np.broadcast_to(c, b_r.shape) for c in cols])


def _performance_blocks(g, d: Drive, units: UnitSystem, mode: str):
    out = {}
    if mode in ("auto", "engine"):
        if g.area_A > 0 or mode == "engine":
            perf = engine_figures(g, d)
            out["engine"] = perf.as_dict()
            out["engine"]["P_limit"] = math.log(2.0) * d.bias_ratio / (2.0 * perf.tau_P)
            out["engine_si"] = si_estimates(perf, units)
    if mode in ("auto", "refrigerator"):
        if g.area_A < 0 or mode == "refrigerator":
            out["refrigerator"] = refrigerator_figures(g, d).as_dict()
    return out


def eval_payload(c: Curve, bath, d, units, mode, tol):
    g = summarize(c, bath, tol, stokes_check=True)
    return {
        "curve": _curve_description(c),
        "summary": g.as_dict(),
        "objectives": {"power": objective_value(g, "power"), "efficiency": objective_value(g, "efficiency")},
        "performance": _performance_blocks(g, d, units, mode),
        "profiles": {
            "uniform": "constant parameter speed",
            "power": "time density proportional to sqrt(q)",
            "efficiency": "time density proportional to sqrt(q / kappa)",
            "min_cells_per_unit_theta": PROFILE_CELLS,
        },
        "stokes_residual": g.stokes_residual,
        "n_nodes": g.n_nodes,
    }


def _curve_description(c: Curve):
    if isinstance(c, Ellipse):
        return {"type": "ellipse", "center": list(c.center), "a": c.a, "b": c.b, "tilt": c.tilt,
                "orientation": c.orientation}
    if isinstance(c, CircularSector):
        return {"type": "sector", "radius": c.radius, "aperture": c.aperture, "bisector": c.bisector,
                "orientation": c.orientation}
    if isinstance(c, Polyline):
        return {"type": "polyline", "vertices": np.asarray(c.vertices).tolist(), "orientation": c.orientation}
    return {"type": type(c).__name__, "orientation": c.orientation}


def scan_rows(cells, kind, d: Drive):
    rows = []
    for cell in cells:
        val = cell.objective_value
        if cell.result is None:
            rows.append((cell.center[0], cell.center[1], math.nan, math.nan, math.nan, math.nan, math.nan,
                         math.nan))
            continue
        a, b, tilt = (math.exp(cell.result.params[0]), math.exp(cell.result.params[1]), cell.result.params[2])
        if kind == "power":
            fig = 0.25 * d.bias_ratio**2 * val  # P_max at the power-optimal profile
        else:
            fig = 1.0 - 2.0 / (math.sqrt(1.0 + val) + 1.0)  # eta_max / eta_C
        rows.append((cell.center[0], cell.center[1], val, fig, a, b, tilt, float(cell.result.converged)))
    return rows


def scan_columns(kind):
    fig = "P_max" if kind == "power" else "eta_max_frac"
    return ("b_z", "b_x", "objective", fig, "a", "b", "tilt", "converged")


def sector_rows(rows):
    return [(r.radius, r.aperture, r.area_A, r.power_objective, r.efficiency_objective, r.eta_max) for r in rows]


SECTOR_COLUMNS = ("radius", "aperture", "area_A", "power_objective", "efficiency_objective", "eta_max_frac")


def profile_rows(cp):
    return np.column_stack([cp["tau"], cp["P_uniform"], cp["P_optimal"], cp["eta_uniform"], cp["eta_optimal"]])


PROFILE_COLUMNS = ("tau", "P_uniform", "P_optimal", "eta_uniform", "eta_optimal")


def _write_failures(out: Path, header, cells):
    failed = [c for c in cells if c.error is not None]
    if failed:
        write_csv(out / "failures.csv", header, ("b_z", "b_x", "error"),
                  [(fmt(c.center[0]), fmt(c.center[1]), c.error) for c in failed])
    return failed


# ---------------------------------------------------------------------------
# Commands


def cmd_coeffs(cfg, out: Path) -> int:
    bath = bath_from(cfg)
    z, x = _axis(cfg, "coeffs", "z"), _axis(cfg, "coeffs", "x")
    header = header_lines("coeffs", cfg, ("model", "coeffs"))
    write_csv(out / "coeffs.csv", header, COEFF_COLUMNS, coeff_rows(z, x, bath))
    return EXIT_OK


def cmd_eval(cfg, out: Path) -> int:
    bath, d, units = bath_from(cfg), drive_from(cfg), units_from(cfg)
    mode = _choice(cfg, "drive", "mode", ("auto", "engine", "refrigerator"))
    _, _, tol = _run_settings(cfg)
    payload = eval_payload(curve_from(cfg), bath, d, units, mode, tol)
    write_json(out / "eval.json", header_lines("eval", cfg, ("model", "drive", "run", "curve")), payload)
    return EXIT_OK


def _optimize(cfg, section="optimize"):
    bath = bath_from(cfg)
    seed, _, tol = _run_settings(cfg)
    kind = _choice(cfg, section, "kind", ("power", "efficiency"))
    center = tuple(_floats(cfg, section, "center", 2))
    seeds = _int(cfg, "optimize", "seeds", minimum=1)
    max_axis = _float(cfg, "optimize", "max_axis")
    return optimize_ellipse(center, Objective(kind), seeds, bath, max_axis, rng_seed=seed, rtol=tol), kind


def cmd_optimize(cfg, out: Path) -> int:
    res, kind = _optimize(cfg)
    bath, d, units = bath_from(cfg), drive_from(cfg), units_from(cfg)
    _, _, tol = _run_settings(cfg)
    header = header_lines("optimize", cfg, ("model", "drive", "run", "optimize"))
    write_csv(out / "optimize_trace.csv", header, ("iteration", "objective"), res.trace)
    payload = res.as_dict()
    payload["evaluation"] = eval_payload(res.best_curve, bath, d, units, "auto", tol)
    write_json(out / "optimize.json", header, payload)
    return EXIT_OK


def cmd_scan(cfg, out: Path) -> int:
    bath, d = bath_from(cfg), drive_from(cfg)
    seed, threads, tol = _run_settings(cfg)
    kind = _choice(cfg, "scan", "kind", ("power", "efficiency"))
    z, x = _axis(cfg, "scan", "z"), _axis(cfg, "scan", "x")
    cells = scan_centers(z, x, Objective(kind), _int(cfg, "scan", "seeds", minimum=1), bath, threads,
                         _float(cfg, "scan", "max_axis"), _bool(cfg, "scan", "warm_start"), seed, tol)
    header = header_lines("scan", cfg, ("model", "drive", "run", "scan"))
    write_csv(out / "scan.csv", header, scan_columns(kind), scan_rows(cells, kind, d))
    failed = _write_failures(out, header, cells)
    ok = [c for c in cells if c.error is None]
    best = max(ok, key=lambda c: c.objective_value) if ok else None
    summary = {"kind": kind, "cells": len(cells), "failed": len(failed)}
    if best is not None:
        summary["best_center"] = list(best.center)
        summary["best_objective"] = best.objective_value
        summary["best_params"] = list(best.result.params)
    write_json(out / "scan.json", header, summary)
    return EXIT_PARTIAL if failed else EXIT_OK


def _sector_study(cfg, bath, threads):
    try:
        return sector_study(_floats(cfg, "sector", "radii"), _floats(cfg, "sector", "apertures"), bath, threads)
    except ValueError as exc:
        if isinstance(exc, DomainError):
            raise
        raise ConfigError(f"[sector] {exc}") from exc


def cmd_sector(cfg, out: Path) -> int:
    bath = bath_from(cfg)
    _, threads, _ = _run_settings(cfg)
    rows = _sector_study(cfg, bath, threads)
    header = header_lines("sector", cfg, ("model", "run", "sector"))
    write_csv(out / "sector.csv", header, SECTOR_COLUMNS, sector_rows(rows))
    best = max(rows, key=lambda r: r.power_objective)
    write_json(out / "sector.json", header, {
        "max_power_objective": best.power_objective,
        "at_radius": best.radius,
        "at_aperture": best.aperture,
    })
    return EXIT_OK


def _profiles_curve(cfg):
    source = _choice(cfg, "profiles", "source", ("optimize", "curve"))
    if source == "curve":
        return curve_from(cfg)
    res, _ = _optimize(cfg, "profiles")
    return res.best_curve


def cmd_profiles(cfg, out: Path) -> int:
    bath, d = bath_from(cfg), drive_from(cfg)
    c = _profiles_curve(cfg)
    cp = compare_profiles(c, d, bath, n_tau=_int(cfg, "profiles", "n_tau", minimum=2))
    header = header_lines("profiles", cfg, ("model", "drive", "run", "optimize", "profiles", "curve"))
    write_csv(out / "profiles.csv", header, PROFILE_COLUMNS, profile_rows(cp))
    write_json(out / "profiles.json", header, {
        "power_ratio": cp["power_ratio"],
        "efficiency_ratio": cp["efficiency_ratio"],
        "curve": _curve_description(engine_oriented(c, bath)),
    })
    return EXIT_OK


FIGURE_README = {
    "fig2": "b_z -> horizontal axis, b_x -> vertical axis, curvature -> color",
    "fig3": "b_r -> horizontal axis, lambda_r and lambda_phi -> curves (one pair per gamma_bar)",
    "fig4": "b_z, b_x -> ellipse center, objective (max A^2/calL^2) -> color",
    "fig5": "b_z -> horizontal axis, b_x -> vertical axis, lambda_k_max_eigenvalue -> color",
    "fig6": "b_z, b_x -> ellipse center, objective (max A^2/calL_kappa^2) -> color",
    "fig7": "tau -> horizontal axis; P_* -> power curves, eta_* -> efficiency curves (uniform solid, optimal dashed)",
    "fig8": "radius, aperture -> surface coordinates, power_objective (A^2/calL^2) -> height",
    "fig9": "radius -> horizontal axis, eta_max_frac (eta_max/eta_C) -> vertical axis",
    "fig10": "panel max_eigenvalue: x=b_z, y=b_x, value=max(lambda_r, lambda_phi); "
             "panels b_r_low and b_r_high: x=gamma_bar, value=crossover radius",
}


def cmd_reproduce_figures(cfg, out: Path) -> int:
    bath, d = bath_from(cfg), drive_from(cfg)
    seed, threads, tol = _run_settings(cfg)
    sections = ("model", "drive", "run", "figures", "optimize", "sector")

    def head(name):
        return header_lines(f"reproduce-figures ({name})", cfg, sections, FIGURE_README[name])

    n_map = _int(cfg, "figures", "map_n", minimum=2)
    ext = _float(cfg, "figures", "map_extent")
    if not ext > 0:
        raise ConfigError("[figures] map_extent must be positive")
    # an even count keeps the origin off the grid
    axis = np.linspace(-ext, ext, n_map + (n_map % 2 == 1))
    coeffs = coeff_rows(axis, axis, bath)
    write_csv(out / "fig2.csv", head("fig2"), ("b_z", "b_x", "curvature"), coeffs[:, [0, 1, 7]])
    write_csv(out / "fig5.csv", head("fig5"), ("b_z", "b_x", "lambda_k_max_eigenvalue"), coeffs[:, [0, 1, 8]])

    b_r = np.geomspace(1e-2, 20.0, 400)
    rows3 = []
    for gb in (bath.gamma_bar, 0.05):
        lam_r, lam_phi = lambda_eigenvalues(b_r, BathParams(gb, bath.eps_cutoff))
        rows3.extend(zip(np.full(b_r.size, gb), b_r, lam_r, lam_phi))
    write_csv(out / "fig3.csv", head("fig3"), ("gamma_bar", "b_r", "lambda_r", "lambda_phi"), rows3)

    n_scan = _int(cfg, "figures", "scan_n", minimum=1)
    hi = _float(cfg, "figures", "scan_max")
    grid = np.linspace(hi / n_scan, hi, n_scan)
    failed = []
    for name, kind in (("fig4", "power"), ("fig6", "efficiency")):
        cells = scan_centers(grid, grid, Objective(kind), 4, bath, threads, rng_seed=seed, rtol=tol)
        failed += [c for c in cells if c.error is not None]
        write_csv(out / f"{name}.csv", head(name), scan_columns(kind), scan_rows(cells, kind, d))

    res = optimize_ellipse((1.0, 1.0), Objective("efficiency"), _int(cfg, "optimize", "seeds", minimum=1), bath,
                           rng_seed=seed, rtol=tol)
    cp = compare_profiles(res.best_curve, d, bath)
    write_csv(out / "fig7.csv", head("fig7"), PROFILE_COLUMNS, profile_rows(cp))

    # same grid as the sector command
    sectors = _sector_study(cfg, bath, threads)
    write_csv(out / "fig8.csv", head("fig8"), SECTOR_COLUMNS, sector_rows(sectors))
    eff = sector_study(_floats(cfg, "figures", "efficiency_radii"), [np.pi / 2], bath, threads)
    write_csv(out / "fig9.csv", head("fig9"), ("radius", "eta_max_frac", "efficiency_objective"),
              [(r.radius, r.eta_max, r.efficiency_objective) for r in eff])

    rows10 = []
    lam = coeffs[:, 2:4].max(axis=1)
    rows10.extend(("max_eigenvalue", z, x, v) for z, x, v in zip(coeffs[:, 0], coeffs[:, 1], lam))
    gammas = np.linspace(_float(cfg, "figures", "gamma_min"), _float(cfg, "figures", "gamma_max"),
                         _int(cfg, "figures", "gamma_n", minimum=1))
    for gb in gammas:
        radii_c = crossover_radii(BathParams(gb, bath.eps_cutoff))
        low, high = radii_c if radii_c is not None else (math.nan, math.nan)
        rows10.append(("b_r_low", gb, math.nan, low))
        rows10.append(("b_r_high", gb, math.nan, high))
    write_csv(out / "fig10.csv", head("fig10"), ("panel", "x", "y", "value"), rows10)

    if failed:
        _write_failures(out, head("fig4"), failed)
        return EXIT_PARTIAL
    return EXIT_OK


COMMANDS = {
    "coeffs": (cmd_coeffs, "Onsager coefficients and curvature on a (b_z, b_x) grid"),
    "eval": (cmd_eval, "geometric summary and performance of one curve"),
    "optimize": (cmd_optimize, "best ellipse about a fixed center"),
    "scan": (cmd_scan, "best-ellipse objective over a grid of centers"),
    "sector": (cmd_sector, "circular-sector study over radii and apertures"),
    "profiles": (cmd_profiles, "power and efficiency versus duration, uniform versus optimal speed"),
    "reproduce-figures": (cmd_reproduce_figures, "data files behind every figure"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="INI configuration file")
    common.add_argument("--out", metavar="DIR", default=".", help="output directory (default: .)")
    common.add_argument("--seed", type=int, help="seed for the random optimizer starts")
    common.add_argument("--threads", type=int, help=f"worker threads (fallback: ${THREADS_ENV}, then 1)")
    common.add_argument("--tolerance", type=float, help="relative quadrature tolerance")
    common.add_argument("-v", "--verbose", action="store_true", help="log one line per scan cell")
    parser = argparse.ArgumentParser(prog="adiacycle", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"adiacycle {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = load_config(args.config)
        apply_overrides(cfg, args)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        fn, _ = COMMANDS[args.command]
        return fn(cfg, out)
    except ConfigError as exc:
        print(f"adiacycle: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (AdiacycleError, DomainError) as exc:
        print(f"adiacycle: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"adiacycle: I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
