"""Isoperimetric search over cycle shapes.

The power objective is ``A^2 / calL^2`` and the efficiency objective
``A^2 / calL_kappa^2``; both are ratios of a weighted enclosed area to a
metric length, so maximizing them is a (Cheeger-type) isoperimetric problem.

Ellipses are encoded as ``(log a, log b, tilt)`` around a fixed center and
improved by gradient ascent with central-difference gradients and an Armijo
backtracking line search.  When the line search stalls repeatedly a simplex
search takes over.  Several deterministic starts are run per center.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .errors import DomainError, OptimizationError
from .geometry import RTOL, engine_oriented, summarize
from .performance import Drive, efficiency, power
from .qubit_model import EPS_MIN, BathParams, kappa, lambda_matrix, lambda_vector
from .trajectory import _GL_W, _GL_X, TRUNCATION_RADIUS, CircularSector, Curve, Ellipse, ellipse_axis_crossings

__all__ = [
    "Objective",
    "OptimizationResult",
    "CellResult",
    "SectorRow",
    "EllipseObjective",
    "seed_schedule",
    "optimize_ellipse",
    "scan_centers",
    "sector_study",
    "sector_best_aperture",
    "compare_profiles",
    "objective_value",
    "resolve_threads",
]

log = logging.getLogger(__name__)

FD_STEP = 1e-4
ARMIJO_C = 1e-4
SHRINK = 0.5
REL_TOL = 1e-8
MAX_ITER = 500
STALL_LIMIT = 3
BARRIER_RADIUS = 10 * EPS_MIN
BARRIER_WEIGHT = 1e6
SEED_SCALES = (0.5, 1.5, 3.0)
SEED_TILTS = (0.0, np.pi / 4)
SEED_ASPECT = 0.6
RNG_SEED = 20211


@dataclass(frozen=True)
class Objective:
    kind: str = "power"
    orientation_policy: str = "auto-flip"

    def __post_init__(self):
        if self.kind not in ("power", "efficiency"):
            raise ValueError("objective kind must be 'power' or 'efficiency'")
        if self.orientation_policy not in ("auto-flip", "fixed"):
            raise ValueError("orientation_policy must be 'auto-flip' or 'fixed'")


@dataclass
class OptimizationResult:
    best_curve: Curve
    objective_value: float
    iterations: int
    trace: List[Tuple[int, float]] = field(default_factory=list)
    converged: bool = False
    params: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    fallback_used: bool = False

    def as_dict(self):
        c = self.best_curve
        return {
            "center": list(c.center),
            "a": c.a,
            "b": c.b,
            "tilt": c.tilt,
            "orientation": c.orientation,
            "objective_value": self.objective_value,
            "iterations": self.iterations,
            "converged": self.converged,
            "fallback_used": self.fallback_used,
            "trace": [list(t) for t in self.trace],
        }


def objective_value(g, kind: str) -> float:
    """Objective from a :class:`GeomSummary`."""
    denom = g.geodesic_L2 if kind == "power" else g.geodesic_Lk2
    if denom <= 0:
        return math.inf if g.area_A != 0 else 0.0
    return g.area_A**2 / denom


class EllipseObjective:
    """Vectorized evaluation of the objective for ellipses about ``center``.

    ``u = (log a, log b, tilt)``.  The penalized value subtracts an origin
    barrier; semi-axes are capped at ``max_axis`` by projection (see
    :meth:`project`), standing in for curves closed "at infinity".
    """

    def __init__(self, center, kind: str = "power", bath: BathParams = BathParams(), rtol: float = RTOL,
                 max_axis: float = TRUNCATION_RADIUS):
        self.center = np.asarray(center, dtype=float)
        self.kind = kind
        self.bath = bath
        self.rtol = rtol
        self.max_axis = max_axis
        self.n_evals = 0

    def project(self, u):
        u = np.array(u, dtype=float)
        u[..., :2] = np.minimum(u[..., :2], np.log(self.max_axis))
        return u

    def _rule(self, row, level):
        """Nodes/weights on [0, 1] for one ellipse: trapezoid, or GL between axis crossings."""
        if self.kind == "efficiency":
            a, b, tilt = np.exp(row[0]), np.exp(row[1]), row[2]
            cuts = sorted(
                t for comp in (0, 1) for t in ellipse_axis_crossings(self.center[comp], a, b, tilt, comp)
            )
            if cuts:
                e = np.array(cuts + [cuts[0] + 1.0])
                panels = 2 * 2**level
                edges = np.concatenate(
                    [np.linspace(u, v, panels + 1)[:-1] for u, v in zip(e[:-1], e[1:])] + [e[-1:]]
                )
                h = np.diff(edges)
                return (edges[:-1, None] + h[:, None] * _GL_X).ravel(), (h[:, None] * _GL_W).ravel()
        n = 64 * 2**level
        return np.arange(n) / n, np.full(n, 1.0 / n)

    def raw(self, u, level):
        """Per-ellipse ``(A, length, d_min, guarded, |A| scale, length scale)`` at ``level``."""
        self.n_evals += 1
        u = np.atleast_2d(np.asarray(u, dtype=float))
        rules = [self._rule(row, level) for row in u]
        sizes = np.array([r[0].size for r in rules])
        offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]])
        theta = np.concatenate([r[0] for r in rules])
        w = np.concatenate([r[1] for r in rules])
        par = np.repeat(u, sizes, axis=0)
        a, b, tilt = np.exp(par[:, 0]), np.exp(par[:, 1]), par[:, 2]
        t = 2.0 * np.pi * theta
        ca, sa = np.cos(tilt), np.sin(tilt)
        ex, ey = a * np.cos(t), b * np.sin(t)
        vx, vy = -2.0 * np.pi * a * np.sin(t), 2.0 * np.pi * b * np.cos(t)
        pos = np.array([self.center[0] + ca * ex - sa * ey, self.center[1] + sa * ex + ca * ey])
        vel = np.array([ca * vx - sa * vy, sa * vx + ca * vy])

        r = np.hypot(pos[0], pos[1])
        dmin = np.minimum.reduceat(r, offsets)
        bad = dmin < EPS_MIN
        safe = np.where(np.repeat(bad, sizes)[None, :], 1.0, pos)
        lam = lambda_matrix(safe, self.bath)
        q = np.clip(np.einsum("in,ijn,jn->n", vel, lam, vel), 0.0, None)
        if self.kind == "efficiency":
            q = q * kappa(safe, self.bath)
        area_i = (lambda_vector(safe) * vel).sum(axis=0) * w
        len_i = np.sqrt(q) * w
        return (
            np.add.reduceat(area_i, offsets),
            np.add.reduceat(len_i, offsets),
            dmin,
            bad,
            np.add.reduceat(np.abs(area_i), offsets),
        )

    def penalized(self, u, level):
        area, length, dmin, bad, _ = self.raw(u, level)
        with np.errstate(divide="ignore", invalid="ignore"):
            f = np.where(length > 0, area**2 / length**2, 0.0)
        f = f - BARRIER_WEIGHT * np.clip(BARRIER_RADIUS - dmin, 0.0, None) ** 2
        return np.where(bad, -np.inf, f)

    def adaptive(self, u, max_level: int = 14):
        """Penalized value at ``u``, refining until A and the length converge.

        Returns ``(value, level)``; the level is reused for nearby evaluations.
        """
        prev = None
        for level in range(max_level + 1):
            area, length, _, bad, a_scale = self.raw(u, level)
            if bad[0]:
                return -np.inf, level
            cur = np.array([area[0], length[0]])
            scale = np.array([a_scale[0], length[0]])
            if prev is not None and np.all(np.abs(cur - prev) <= self.rtol * scale):
                return float(self.penalized(u, level)[0]), level
            prev = cur
        raise DomainError("objective quadrature did not converge")

    def curve(self, u, orientation: int = 1) -> Ellipse:
        return Ellipse(tuple(self.center), float(np.exp(u[0])), float(np.exp(u[1])), float(u[2]), orientation)


def seed_schedule(count: int = 8, rng_seed: int = RNG_SEED):
    """Deterministic starting points ``(log a, log b, tilt)``."""
    seeds = [
        (np.log(s), np.log(SEED_ASPECT * s), tilt) for s in SEED_SCALES for tilt in SEED_TILTS
    ]
    rng = np.random.default_rng(rng_seed)
    while len(seeds) < count:
        la, lb = rng.uniform(np.log(0.3), np.log(3.0), size=2)
        seeds.append((la, lb, rng.uniform(0.0, np.pi)))
    return [np.array(s, dtype=float) for s in seeds[:count]]


def _gradient(obj: EllipseObjective, u, n, h):
    pts = np.concatenate([u + h * np.eye(3), u - h * np.eye(3)])
    vals = obj.penalized(pts, n)
    return (vals[:3] - vals[3:]) / (2.0 * h)


def _ascend(obj: EllipseObjective, u0, max_iter: int = MAX_ITER):
    """Gradient ascent from ``u0``; returns ``(u, f, iterations, trace, converged, fallback)``.

    Trial steps follow the Barzilai-Borwein length of the previous step and
    are backtracked until the Armijo condition holds; only improving steps
    are accepted, so the trace is monotone.
    """
    u = obj.project(u0)
    f, level = obj.adaptive(u)
    if not np.isfinite(f):
        return u, f, 0, [], False, False
    trace = [(0, f)]
    stalls = 0
    converged = False
    it = 0
    alpha_bb = None
    g_prev = u_prev = None
    for it in range(1, max_iter + 1):
        g = _gradient(obj, u, level, FD_STEP / 2**stalls)
        gnorm = np.linalg.norm(g)
        if not np.isfinite(gnorm) or gnorm == 0:
            converged = gnorm == 0
            break
        if g_prev is not None and stalls == 0:
            s_k, y_k = u - u_prev, g - g_prev
            sy = s_k @ y_k
            # ascent: curvature of -f along the step
            alpha_bb = (s_k @ s_k) / -sy if sy < 0 else None
        alpha = alpha_bb if alpha_bb is not None else 0.1 / gnorm
        alpha = min(alpha, 1.0 / gnorm)  # at most a unit move in encoded coordinates
        f_ref = obj.penalized(u, level)[0]
        accepted = False
        while alpha * gnorm > 1e-12:
            cand = obj.project(u + alpha * g)
            f_c = obj.penalized(cand, level)[0]
            # Armijo test along the projected step
            if np.isfinite(f_c) and np.any(cand != u) and f_c >= f_ref + ARMIJO_C * g @ (cand - u):
                accepted = True
                break
            alpha *= SHRINK
        if accepted:
            f_new, level_new = obj.adaptive(cand)
            accepted = f_new > f
        if not accepted:
            stalls += 1
            if stalls >= STALL_LIMIT:
                break
            continue
        stalls = 0
        rel = (f_new - f) / max(abs(f_new), 1e-300)
        u_prev, g_prev = u, g
        u, f, level = cand, f_new, level_new
        trace.append((it, f))
        if rel < REL_TOL:
            converged = True
            break

    fallback = False
    if not converged:
        fallback = True

        def neg(v):
            val, _ = obj.adaptive(obj.project(v))
            return -val if np.isfinite(val) else 1e300

        res = minimize(neg, u, method="Nelder-Mead",
                       options={"xatol": 1e-9, "fatol": 1e-14, "maxiter": 2000, "adaptive": False})
        if -res.fun > f:
            u, f = obj.project(res.x), -res.fun
            trace.append((it + 1, f))
        converged = bool(res.success)
        it += 1
    return u, f, it, trace, converged, fallback


def optimize_ellipse(center, obj: Objective = Objective(), seeds: int = 8, bath: BathParams = BathParams(),
                     max_axis: float = TRUNCATION_RADIUS, starts: Optional[Sequence] = None,
                     rng_seed: int = RNG_SEED, rtol: float = RTOL) -> OptimizationResult:
    """Best ellipse about a fixed ``center`` over a multi-start gradient ascent.

    The reported curve carries engine orientation (``A > 0``) when the policy
    is ``auto-flip``; the objective itself is orientation-free.
    """
    if seeds < 1:
        raise ValueError("need at least one seed")
    if not np.all(np.isfinite(np.asarray(center, dtype=float))):
        raise ValueError("center must be finite")
    ell = EllipseObjective(center, obj.kind, bath, rtol=rtol, max_axis=max_axis)
    start_points = list(starts) if starts is not None else seed_schedule(seeds, rng_seed)
    best = None
    for u0 in start_points:
        try:
            run = _ascend(ell, np.asarray(u0, dtype=float))
        except DomainError as exc:
            log.debug("start %s failed: %s", u0, exc)
            continue
        if not np.isfinite(run[1]):
            continue
        if best is None or run[1] > best[1]:
            best = run
    if best is None:
        raise OptimizationError("every start ran into the origin guard")
    u, _, iters, trace, converged, fallback = best
    curve = ell.curve(u)
    if obj.orientation_policy == "auto-flip":
        curve = engine_oriented(curve, bath)
    value = objective_value(summarize(curve, bath, rtol), obj.kind)
    return OptimizationResult(curve, value, iters, trace, converged, tuple(float(v) for v in u), fallback)


@dataclass
class CellResult:
    center: Tuple[float, float]
    objective_value: float
    result: Optional[OptimizationResult]
    error: Optional[str] = None


def resolve_threads(threads: Optional[int] = None) -> int:
    """Thread count from the argument, else ``ADIACYCLE_THREADS``, else 1."""
    if threads is None:
        env = os.environ.get("ADIACYCLE_THREADS")
        threads = int(env) if env else 1
    if threads < 1:
        raise ValueError("threads must be >= 1")
    return threads


def scan_centers(z_values: Sequence[float], x_values: Sequence[float], obj: Objective = Objective(),
                 seeds: int = 4, bath: BathParams = BathParams(), threads: Optional[int] = None,
                 max_axis: float = TRUNCATION_RADIUS, warm_start: bool = True, rng_seed: int = RNG_SEED,
                 rtol: float = RTOL) -> List[CellResult]:
    """Optimize an ellipse at every grid center; results in row-major ``(z, x)`` order.

    With ``warm_start`` the first cell of each row uses all ``seeds`` starts and
    later cells use the first seed plus the optimum of the previous cell.  Rows
    are independent, so the result does not depend on the thread count.  Cells that fail are recorded with ``error`` set and the
    scan continues.
    """
    z_values = [float(z) for z in z_values]
    x_values = [float(x) for x in x_values]
    base = seed_schedule(seeds, rng_seed)

    def row(z):
        out = []
        prev = None
        for x in x_values:
            center = (z, x)
            starts = base if prev is None else base[:1] + [list(prev)]
            try:
                res = optimize_ellipse(center, obj, seeds, bath, max_axis, starts=starts, rtol=rtol)
                log.info("cell %s objective %.6g", center, res.objective_value)
                out.append(CellResult(center, res.objective_value, res))
                if warm_start:
                    prev = res.params
            except (OptimizationError, DomainError) as exc:
                log.warning("cell %s failed: %s", center, exc)
                out.append(CellResult(center, math.nan, None, str(exc)))
        return out

    n_threads = resolve_threads(threads)
    if n_threads == 1:
        rows = [row(z) for z in z_values]
    else:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            rows = list(pool.map(row, z_values))
    return [cell for r in rows for cell in r]


@dataclass(frozen=True)
class SectorRow:
    radius: float
    aperture: float
    area_A: float
    power_objective: float
    efficiency_objective: float
    eta_max: float  # fraction of Carnot


def _sector_row(radius, aperture, bath, bisector=np.pi / 4):
    c = engine_oriented(CircularSector(radius, aperture, bisector), bath)
    g = summarize(c, bath)
    p_obj = objective_value(g, "power")
    e_obj = objective_value(g, "efficiency")
    eta = 1.0 if math.isinf(e_obj) else 1.0 - 2.0 / (math.sqrt(1.0 + e_obj) + 1.0)
    return SectorRow(float(radius), float(aperture), g.area_A, p_obj, e_obj, eta)


def sector_study(radii: Sequence[float], apertures: Sequence[float], bath: BathParams = BathParams(),
                 threads: Optional[int] = None) -> List[SectorRow]:
    """Circular sectors centered on the first-quadrant bisector, both objectives, row-major in ``(R, Omega)``."""
    for r in radii:
        if not 0 < r <= 30:
            raise ValueError("radii must lie in (0, 30]")
    for om in apertures:
        if not 0 < om <= np.pi:
            raise ValueError("apertures must lie in (0, pi]")
    cells = [(r, om) for r in radii for om in apertures]
    n_threads = resolve_threads(threads)
    if n_threads == 1:
        return [_sector_row(r, om, bath) for r, om in cells]
    with ThreadPoolExecutor(max_workers=n_threads) as pool:
        return list(pool.map(lambda c: _sector_row(c[0], c[1], bath), cells))


def sector_best_aperture(radius: float, bath: BathParams = BathParams(), bounds=(0.3, np.pi)):
    """Aperture maximizing ``A^2/calL^2`` at fixed radius: ``(Omega*, value)``."""
    res = minimize_scalar(lambda om: -_sector_row(radius, om, bath).power_objective,
                          bounds=bounds, method="bounded", options={"xatol": 1e-6})
    return float(res.x), float(-res.fun)


def compare_profiles(c: Curve, d: Drive = Drive(), bath: BathParams = BathParams(), taus=None, n_tau: int = 400):
    """Power and efficiency versus duration, uniform versus optimal speed.

    The uniform family uses the constant-speed profile; the optimal family uses
    the power-optimal profile for ``P`` and the efficiency-optimal profile for
    ``eta``.  Efficiencies are fractions of Carnot.  Returns a dict of arrays
    plus the peak ratios.
    """
    c = engine_oriented(c, bath)
    g = summarize(c, bath)
    if taus is None:
        tau_d = g.geodesic_L2 / (d.bias_ratio * g.area_A)
        taus = np.geomspace(0.5 * tau_d, 1e3 * tau_d, n_tau)
    taus = np.asarray(taus, dtype=float)
    out = {
        "tau": taus,
        "P_uniform": power(g, d, taus, "uniform"),
        "P_optimal": power(g, d, taus, "power"),
        "eta_uniform": efficiency(g, d, taus, "uniform") / d.bias_ratio,
        "eta_optimal": efficiency(g, d, taus, "efficiency") / d.bias_ratio,
    }
    out["power_ratio"] = float(out["P_optimal"].max() / out["P_uniform"].max())
    out["efficiency_ratio"] = float(out["eta_optimal"].max() / out["eta_uniform"].max())
    return out
