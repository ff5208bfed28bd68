"""Geometric functionals of a control cycle.

For a closed curve ``B(theta)`` and a speed profile:

* ``A = oint Lambda_vec . dB``, the pumped heat per cycle (k_B T),
* ``L^2 = int dtheta B'.Lambda.B'``, the dissipation functional (hbar),
* ``<kappa> = int dtheta kappa``, the averaged heat leak,
* the thermodynamic lengths ``calL = oint sqrt(dB.Lambda.dB)`` and
  ``calL_kappa = oint sqrt(kappa dB.Lambda.dB)``.

``L^2 >= calL^2`` and ``L^2 <kappa> >= calL_kappa^2`` by Cauchy-Schwarz; the
bounds are saturated by the speed profiles of :mod:`adiacycle.trajectory`.
All line integrals use node doubling until the change drops below ``rtol``
times the integral of the absolute integrand.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, Optional

import numpy as np

from .errors import ConvergenceError, DomainError, UnsupportedCurveError
from .qubit_model import BathParams, berry_curvature, kappa, lambda_matrix, lambda_vector
from .trajectory import (
    _GL_W,
    _GL_X,
    GL_ORDER,
    Curve,
    SpeedProfile,
    optimal_speed_profile,
    profile_density,
    quadrature_rule,
)

__all__ = [
    "METRICS",
    "PROFILES",
    "GeomSummary",
    "area_line",
    "area_flux",
    "length_L2",
    "geodesic_length",
    "mean_kappa",
    "canonical_profile",
    "summarize",
    "engine_oriented",
    "integrate_closed",
]

METRICS = ("dissipation", "efficiency")
PROFILES = ("uniform", "power", "efficiency")
RTOL = 1e-8
MAX_NODES = 2**20

_DEFAULT_BATH = BathParams()


def integrate_closed(
    curve: Curve,
    integrand: Callable,
    rtol: float = RTOL,
    max_nodes: int = MAX_NODES,
    magnitude: Optional[Callable] = None,
):
    """Adaptive quadrature of ``oint integrand(pos, vel) dtheta``.

    ``integrand`` maps ``(2, n)`` positions and velocities to ``(k, n)`` values.
    The tolerance is relative to ``oint |integrand|``, or to the integral of
    ``magnitude(pos, vel, values)`` when given (for integrands that cancel
    pointwise, such as dot products).
    Returns ``(integrals, n_nodes)``.
    """
    level = 0
    prev = None
    while True:
        theta, w = quadrature_rule(curve, level)
        if theta.size > max_nodes:
            raise ConvergenceError(f"line integral not converged with {max_nodes} nodes")
        pos, vel = curve.evaluate(theta)
        vals = np.atleast_2d(integrand(pos, vel))
        total = vals @ w
        scale = (np.abs(vals) if magnitude is None else np.atleast_2d(magnitude(pos, vel, vals))) @ w
        if prev is not None and np.all(np.abs(total - prev) <= rtol * scale):
            return total, theta.size
        prev = total
        level += 1


def _quad(vel, tensor):
    return np.einsum("in,ijn,jn->n", vel, tensor, vel)


def _check_metric(metric):
    if metric not in METRICS:
        raise ValueError(f"metric must be one of {METRICS}")


def area_line(c: Curve, bath: Optional[BathParams] = None, rtol: float = RTOL) -> float:
    """``oint Lambda_vec . dB``; the canonical area used everywhere else."""
    total, _ = integrate_closed(
        c,
        lambda pos, vel: (lambda_vector(pos) * vel).sum(axis=0),
        rtol,
        magnitude=lambda pos, vel, vals: _dot_magnitude(pos, vel),
    )
    return float(total[0])


def engine_oriented(c: Curve, bath: Optional[BathParams] = None) -> Curve:
    """Return ``c`` or its reverse, whichever has ``A > 0``."""
    return c if area_line(c, bath) >= 0 else c.reversed()


def geodesic_length(c: Curve, metric: str = "dissipation", bath: BathParams = _DEFAULT_BATH, rtol: float = RTOL) -> float:
    """Thermodynamic length ``calL`` (dissipation) or ``calL_kappa`` (efficiency)."""
    _check_metric(metric)

    def fn(pos, vel):
        q = np.clip(_quad(vel, lambda_matrix(pos, bath)), 0.0, None)
        if metric == "efficiency":
            q = q * kappa(pos, bath)
        return np.sqrt(q)

    total, _ = integrate_closed(c, fn, rtol)
    return float(total[0])


def _integrate_profile(c: Curve, profile: SpeedProfile, fn: Callable, rtol: float = RTOL, max_level: int = 12):
    """``int_0^1 ds fn(pos, dB/ds)`` under ``profile``.

    Panels follow the profile table and the curve's pieces (mapped to ``s``),
    so each panel integrand is smooth; panels are halved until converged.
    """
    s_table = profile.s
    edges = []
    for a, b in c.smooth_pieces:
        sa, sb = profile.crossing(a), profile.crossing(b)
        inner = s_table[(s_table > sa) & (s_table < sb)]
        edges.append(np.concatenate([[sa], inner, [sb]]))
    prev = None
    n_cells = sum(e.size - 1 for e in edges)
    for level in range(max_level):
        if n_cells * 2**level * GL_ORDER > 4 * MAX_NODES:
            break
        nodes, weights = [], []
        for e in edges:
            fine = np.concatenate([np.linspace(e[k], e[k + 1], 2**level + 1)[:-1] for k in range(e.size - 1)] + [e[-1:]])
            h = np.diff(fine)
            nodes.append((fine[:-1, None] + h[:, None] * _GL_X).ravel())
            weights.append((h[:, None] * _GL_W).ravel())
        s = np.concatenate(nodes)
        w = np.concatenate(weights)
        theta = profile(s)
        pos, vel = c.evaluate(theta)
        vel = vel * profile.derivative(s)
        vals = np.atleast_2d(fn(pos, vel))
        total = vals @ w
        scale = np.abs(vals) @ w
        if prev is not None and np.all(np.abs(total - prev) <= rtol * scale):
            return total
        prev = total
    raise ConvergenceError("profile integral did not converge")


def length_L2(c: Curve, profile: SpeedProfile, metric: str = "dissipation", bath: BathParams = _DEFAULT_BATH, rtol: float = RTOL) -> float:
    """Dissipation functional ``int ds dB/ds . metric . dB/ds`` under ``profile``."""
    _check_metric(metric)

    def fn(pos, vel):
        q = _quad(vel, lambda_matrix(pos, bath))
        return q * kappa(pos, bath) if metric == "efficiency" else q

    return float(_integrate_profile(c, profile, fn, rtol)[0])


def mean_kappa(c: Curve, profile: SpeedProfile, bath: BathParams = _DEFAULT_BATH, rtol: float = RTOL) -> float:
    """Time average of the heat leak over one cycle run with ``profile``."""
    return float(_integrate_profile(c, profile, lambda pos, vel: kappa(pos, bath), rtol)[0])


def canonical_profile(c: Curve, kind: str, bath: BathParams = _DEFAULT_BATH) -> SpeedProfile:
    """Tabulated uniform, power-optimal or efficiency-optimal profile."""
    if kind == "uniform":
        return SpeedProfile.uniform()
    metric = lambda pos: lambda_matrix(pos, bath)  # noqa: E731
    if kind == "power":
        return optimal_speed_profile(c, metric)
    if kind == "efficiency":
        return optimal_speed_profile(c, metric, leak=lambda pos: kappa(pos, bath))
    raise ValueError(f"profile must be one of {PROFILES}")


@dataclass(frozen=True)
class GeomSummary:
    """Geometric functionals of one curve.

    ``length_L2`` and ``mean_kappa`` are keyed by profile name (``uniform``,
    ``power``, ``efficiency``).  ``stokes_residual`` is the relative mismatch
    between the line and flux forms of ``A`` when that check was requested.
    """

    area_A: float
    geodesic_L2: float
    geodesic_Lk2: float
    length_L2: Dict[str, float] = field(default_factory=dict)
    mean_kappa: Dict[str, float] = field(default_factory=dict)
    stokes_residual: Optional[float] = None
    n_nodes: int = 0

    def as_dict(self):
        out = {
            "area_A": self.area_A,
            "geodesic_L2": self.geodesic_L2,
            "geodesic_Lk2": self.geodesic_Lk2,
            "length_L2": dict(self.length_L2),
            "mean_kappa": dict(self.mean_kappa),
        }
        if self.stokes_residual is not None:
            out["stokes_residual"] = self.stokes_residual
        return out


def _dot_magnitude(pos, vel):
    return np.hypot(*lambda_vector(pos)) * np.hypot(*vel)


def _summary_magnitude(pos, vel, vals):
    out = np.abs(vals)
    out[0] = _dot_magnitude(pos, vel)
    return out


def _summary_integrand(bath):
    def fn(pos, vel):
        q = np.clip(_quad(vel, lambda_matrix(pos, bath)), 0.0, None)
        kap = kappa(pos, bath)
        sq = np.sqrt(q)
        w_eff = profile_density(q, kap)
        return np.array(
            [
                (lambda_vector(pos) * vel).sum(axis=0),  # A
                sq,  # calL
                np.sqrt(q * kap),  # calL_kappa
                q,  # L^2 uniform
                kap,  # <kappa> uniform
                kap * sq,  # <kappa> power (times calL)
                w_eff,  # efficiency normalization
                q / w_eff,  # L^2 efficiency (times normalization)
                kap * w_eff,  # <kappa> efficiency (times normalization)
            ]
        )

    return fn


def summarize(c: Curve, bath: BathParams = _DEFAULT_BATH, rtol: float = RTOL, stokes_check: bool = False) -> GeomSummary:
    """All functionals of ``c``, with ``L^2`` and ``<kappa>`` for the three canonical profiles.

    Canonical-profile values are computed from their closed-form time
    densities rather than from tabulated profiles.
    """
    vals, n = integrate_closed(c, _summary_integrand(bath), rtol, magnitude=_summary_magnitude)
    a, ell, ell_k, l2_u, k_u, k_p, w_e, l2_e, k_e = (float(v) for v in vals)
    if ell > 0:
        k_pow = k_p / ell
    else:
        k_pow = k_u
    lengths = {"uniform": l2_u, "power": ell * ell, "efficiency": w_e * l2_e}
    kappas = {"uniform": k_u, "power": k_pow, "efficiency": k_e / w_e if w_e > 0 else k_u}
    residual = None
    if stokes_check:
        flux = area_flux(c)
        residual = abs(a - flux) / abs(a) if a != 0 else abs(flux)
    return GeomSummary(a, ell * ell, ell_k * ell_k, lengths, kappas, residual, n)


# ---------------------------------------------------------------------------
# Flux form of A


def _bisect_theta(c: Curve, lo, hi, target, component, use_velocity=False, iters=55):
    """Vectorized bisection for ``curve_component(theta) == target`` on brackets."""
    pick = 1 if use_velocity else 0
    f_lo = c.evaluate(lo)[pick][component] - target
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        f_mid = c.evaluate(mid)[pick][component] - target
        left = np.sign(f_mid) == np.sign(f_lo)
        lo = np.where(left, mid, lo)
        f_lo = np.where(left, f_mid, f_lo)
        hi = np.where(left, hi, mid)
    return 0.5 * (lo + hi)


def _polygon(c: Curve, n_poly: int):
    bounds = sorted({0.0, 1.0, *(t for piece in c.pieces for t in piece)})
    theta = np.unique(np.concatenate([np.linspace(0.0, 1.0, n_poly + 1), bounds]))
    _, vel = c.evaluate(theta)
    # refine extrema of z(theta) inside smooth pieces so polygon edges are monotone in z
    extra = []
    for a, b in c.pieces:
        inside = theta[(theta > a) & (theta < b)]
        if inside.size < 2:
            continue
        vz = c.evaluate(inside)[1][0]
        flips = np.nonzero(np.sign(vz[:-1]) * np.sign(vz[1:]) < 0)[0]
        if flips.size:
            extra.append(_bisect_theta(c, inside[flips], inside[flips + 1], 0.0, 0, use_velocity=True))
    if extra:
        theta = np.unique(np.concatenate([theta, *extra]))
    pos, _ = c.evaluate(theta)
    return theta, pos, np.concatenate([np.asarray(bounds), *extra])


def _inner_integral(z0, xa, xb, panel):
    """``int_{xa}^{xb} curvature(z0, x) dx`` with panels graded towards ``x = 0``."""
    cuts = [xa, xb]
    if xa < 0 < xb:
        cuts.append(0.0)
    scale = abs(z0)
    if scale > 0:
        g = scale * 2.0 ** np.arange(0, 8)
        cuts.extend(v for v in np.concatenate([g, -g]) if xa < v < xb)
    cuts = np.unique(cuts)
    edges = [np.linspace(u, v, max(1, int(np.ceil((v - u) / panel))) + 1) for u, v in zip(cuts[:-1], cuts[1:])]
    e = np.unique(np.concatenate(edges))
    h = np.diff(e)
    x = (e[:-1, None] + h[:, None] * _GL_X).ravel()
    w = (h[:, None] * _GL_W).ravel()
    return berry_curvature(np.array([np.full_like(x, z0), x])) @ w


def _flux_once(c, poly_theta, poly_pos, z_breaks, panels, inner_panel):
    z_lo, z_hi = poly_pos[0][:-1], poly_pos[0][1:]
    # cos substitution clusters slices at breakpoints, where slices have sqrt behaviour
    t_edges = np.linspace(0.0, np.pi, panels + 1)
    ht = np.diff(t_edges)
    t = (t_edges[:-1, None] + ht[:, None] * _GL_X).ravel()
    wt = (ht[:, None] * _GL_W).ravel()
    a, b = z_breaks[:-1, None], z_breaks[1:, None]
    zs = (a + 0.5 * (b - a) * (1.0 - np.cos(t))).ravel()
    wz = (0.5 * (b - a) * np.sin(t) * wt).ravel()

    hit = ((z_lo <= zs[:, None]) & (zs[:, None] < z_hi)) | ((z_hi <= zs[:, None]) & (zs[:, None] < z_lo))
    row, k = np.nonzero(hit)
    if row.size == 0:
        return 0.0
    th = _bisect_theta(c, poly_theta[k], poly_theta[k + 1], zs[row], 0)
    x_cross = c.evaluate(th)[0][1]
    # winding above a point: -sign(dz) summed over crossings higher up
    direction = -np.sign(z_hi[k] - z_lo[k])

    total = 0.0
    signs = set()
    bounds = np.searchsorted(row, np.arange(zs.size + 1))
    for i in range(zs.size):
        lo, hi = bounds[i], bounds[i + 1]
        if hi - lo < 2:
            continue
        order = np.argsort(x_cross[lo:hi])
        xs = x_cross[lo:hi][order]
        dirs = direction[lo:hi][order]
        wind = np.cumsum(dirs[::-1])[::-1][1:]
        for j, wnum in enumerate(wind):
            if wnum == 0:
                continue
            if abs(wnum) > 1:
                raise UnsupportedCurveError("curve winds more than once: self-intersecting")
            signs.add(int(wnum))
            if len(signs) > 1:
                raise UnsupportedCurveError("curve is self-intersecting (mixed winding)")
            total += wz[i] * wnum * _inner_integral(zs[i], xs[j], xs[j + 1], inner_panel)
    return total


def area_flux(c: Curve, rtol: float = 1e-7, n_poly: int = 2048, max_level: int = 5) -> float:
    """Flux of the curvature through the region enclosed by ``c``.

    Vertical slices at Gauss-Legendre abscissae (clustered at the curve's
    turning points and corners) are intersected with the curve; the crossings
    are located exactly by bisection and their winding numbers classify the
    enclosed intervals.  Slice and panel counts are doubled until two
    successive results agree to ``rtol``.
    """
    theta, pos, special = _polygon(c, n_poly)
    if not np.allclose(pos[:, 0], pos[:, -1], atol=1e-12):
        raise DomainError("curve is not closed")
    special_z = c.evaluate(np.asarray(special, dtype=float))[0][0]
    z_min, z_max = pos[0].min(), pos[0].max()
    if z_max - z_min <= 0:
        return 0.0
    cand = np.concatenate([[z_min, z_max], special_z, [0.0]])
    cand = np.unique(cand[(cand >= z_min) & (cand <= z_max)])
    keep = np.concatenate([[True], np.diff(cand) > 1e-12 * (z_max - z_min)])
    z_breaks = cand[keep]
    z_breaks[-1] = z_max
    prev = None
    for level in range(max_level):
        val = _flux_once(c, theta, pos, z_breaks, 2 * 2**level, 0.5 / 2**level)
        if prev is not None and abs(val - prev) <= rtol * max(abs(val), 1e-12):
            return float(val)
        prev = val
    raise ConvergenceError("flux integral did not converge")
