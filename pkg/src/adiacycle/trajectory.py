"""Closed control curves in the ``(B_z, B_x)`` plane and speed profiles.

A curve is a map ``theta -> B(theta)`` on ``[0, 1]`` with ``B(0) == B(1)``.
Orientation ``+1`` means counterclockwise in the ``(z, x)`` plane, i.e. the
polar angle ``phi = atan2(B_x, B_z)`` grows along a loop around a point.  For a
curve in the first quadrant the heat-engine circulation is ``-1`` (see
:func:`adiacycle.geometry.engine_oriented`).

Smooth periodic curves (ellipses, Fourier loops) are integrated with the
periodic trapezoid rule; piecewise curves (sectors, polylines) are split into
pieces and integrated with composite Gauss-Legendre panels.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import PchipInterpolator, PPoly

from .errors import DegenerateCurveError, DomainError
from .qubit_model import EPS_MIN

__all__ = [
    "Curve",
    "Ellipse",
    "CircularSector",
    "FourierLoop",
    "Polyline",
    "Reparametrized",
    "ellipse_axis_crossings",
    "Sample",
    "SpeedProfile",
    "sample",
    "quadrature_rule",
    "profile_density",
    "optimal_speed_profile",
    "PROFILE_POINTS",
    "PROFILE_CELLS",
    "DENSITY_FLOOR",
    "TRUNCATION_RADIUS",
]

PROFILE_POINTS = 1024
# optimal-profile cells per unit theta; doubled for sharply varying densities
PROFILE_CELLS = 1024
MAX_PROFILE_CELLS = 65536
PROFILE_RTOL = 1e-6
# floor for speed-profile densities (keeps kappa = 0 legs finite)
DENSITY_FLOOR = 1e-15
# radius at which sector curves standing in for infinite ones are closed
TRUNCATION_RADIUS = 20.0

GL_ORDER = 10
_SLOPE_PEAK = 0.5 / np.sqrt(3.0)
_STUB_TIME = 1e-12
_GL_X, _GL_W = np.polynomial.legendre.leggauss(GL_ORDER)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W


class Sample(NamedTuple):
    theta: np.ndarray
    position: np.ndarray  # (2, n)
    velocity: np.ndarray  # (2, n), dB/dtheta


_KINK_SAMPLES = 2048


def _bisect_component(c, lo, hi, comp, iters=60):
    f_lo = c.evaluate(lo)[0][comp]
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        f_mid = c.evaluate(mid)[0][comp]
        left = np.sign(f_mid) == np.sign(f_lo)
        lo = np.where(left, mid, lo)
        f_lo = np.where(left, f_mid, f_lo)
        hi = np.where(left, hi, mid)
    return 0.5 * (lo + hi)


def _rot(angle):
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


class Curve:
    """Base class.  Subclasses implement the counterclockwise parametrization.

    ``_canonical(theta)`` returns position and ``dB/dtheta`` for orientation +1;
    ``_canonical_pieces()`` returns the integration sub-ranges of ``[0, 1]``.
    """

    orientation: int
    periodic = False
    graded = True  # grade quadrature panels towards piece ends

    def _canonical(self, theta):
        raise NotImplementedError

    def _canonical_pieces(self) -> Tuple[Tuple[float, float], ...]:
        return ((0.0, 1.0),)

    def _check_orientation(self):
        if self.orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")

    def evaluate(self, theta):
        """Position and velocity ``dB/dtheta`` at parameters ``theta``, each ``(2, n)``."""
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        if self.orientation == 1:
            return self._canonical(theta)
        pos, vel = self._canonical(1.0 - theta)
        return pos, -vel

    def position(self, theta):
        return self.evaluate(theta)[0]

    def velocity(self, theta):
        return self.evaluate(theta)[1]

    @property
    def pieces(self) -> Tuple[Tuple[float, float], ...]:
        """Sub-ranges of ``theta`` over which the curve is smooth and integrated."""
        ranges = self._canonical_pieces()
        if self.orientation == 1:
            return ranges
        return tuple((1.0 - b, 1.0 - a) for a, b in reversed(ranges))

    def reversed(self) -> "Curve":
        return dataclasses.replace(self, orientation=-self.orientation)

    @cached_property
    def axis_crossings(self) -> Tuple[float, ...]:
        """Parameters where the curve crosses ``B_z = 0`` or ``B_x = 0``.

        The heat leak vanishes on both axes, so ``sqrt(kappa)`` has a kink
        there; integration pieces are split at these points.
        """
        found = []
        for a, b in self.pieces:
            th = np.linspace(a, b, _KINK_SAMPLES + 1)
            pos, _ = self.evaluate(th)
            for comp in (0, 1):
                sgn = np.sign(pos[comp])
                k = np.nonzero(sgn[:-1] * sgn[1:] < 0)[0]
                if k.size:
                    found.extend(_bisect_component(self, th[k], th[k + 1], comp))
                # crossings that land exactly on a sample
                z = np.nonzero((sgn[1:-1] == 0) & (sgn[:-2] * sgn[2:] < 0))[0] + 1
                found.extend(th[z])
        return tuple(sorted(float(t) for t in found))

    @property
    def smooth_pieces(self) -> Tuple[Tuple[float, float], ...]:
        """``pieces`` split further at axis crossings."""
        cuts = self.axis_crossings
        if not cuts:
            return self.pieces
        out = []
        for a, b in self.pieces:
            inner = [t for t in cuts if a < t < b]
            e = [a, *inner, b]
            out.extend(zip(e[:-1], e[1:]))
        return tuple(out)


@dataclass(frozen=True)
class Ellipse(Curve):
    """Ellipse ``center + R(tilt) (a cos 2 pi theta, b sin 2 pi theta)``."""

    center: Tuple[float, float]
    a: float
    b: float
    tilt: float = 0.0
    orientation: int = 1
    periodic = True

    def __post_init__(self):
        if self.a < 0 or self.b < 0 or not (np.isfinite(self.a) and np.isfinite(self.b)):
            raise ValueError("semi-axes must be positive and finite")
        if self.a == 0 or self.b == 0:
            raise DegenerateCurveError("ellipse with a zero semi-axis encloses nothing")
        self._check_orientation()
        object.__setattr__(self, "center", tuple(float(v) for v in np.asarray(self.center, dtype=float)))

    def _canonical(self, theta):
        t = 2.0 * np.pi * np.mod(theta, 1.0)
        rot = _rot(self.tilt)
        c = np.asarray(self.center)[:, None]
        pos = c + rot @ np.array([self.a * np.cos(t), self.b * np.sin(t)])
        vel = 2.0 * np.pi * rot @ np.array([-self.a * np.sin(t), self.b * np.cos(t)])
        return pos, vel

    @cached_property
    def axis_crossings(self):
        out = []
        for comp in (0, 1):
            out.extend(ellipse_axis_crossings(self.center[comp], self.a, self.b, self.tilt, comp))
        if self.orientation == -1:
            out = [(1.0 - t) % 1.0 for t in out]
        return tuple(sorted(out))

    @property
    def min_radius(self):
        """Distance from the origin to the nearest point of the ellipse (sampled)."""
        pos, _ = self._canonical(np.linspace(0.0, 1.0, 2048, endpoint=False))
        return float(np.hypot(*pos).min())


def ellipse_axis_crossings(center_comp, a, b, tilt, comp):
    """Canonical parameters where one Cartesian component of an ellipse vanishes.

    Component ``comp`` is ``c + alpha cos t + beta sin t`` with ``t = 2 pi theta``.
    """
    if comp == 0:
        alpha, beta = a * np.cos(tilt), -b * np.sin(tilt)
    else:
        alpha, beta = a * np.sin(tilt), b * np.cos(tilt)
    rho = np.hypot(alpha, beta)
    if rho <= abs(center_comp):
        return []
    delta = np.arctan2(beta, alpha)
    half = np.arccos(-center_comp / rho)
    return [((delta + sgn * half) / (2.0 * np.pi)) % 1.0 for sgn in (1.0, -1.0)]


@dataclass(frozen=True)
class FourierLoop(Curve):
    """Loop ``B(theta) = sum_k C_k cos(2 pi k theta) + S_k sin(2 pi k theta)``.

    ``cos_coeffs`` and ``sin_coeffs`` have shape ``(K + 1, 2)``, rows holding
    ``(z, x)`` coefficients of harmonic ``k``; ``sin_coeffs[0]`` is ignored.
    """

    cos_coeffs: np.ndarray
    sin_coeffs: np.ndarray
    orientation: int = 1
    periodic = True

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.cos_coeffs, dtype=float))
        s = np.atleast_2d(np.asarray(self.sin_coeffs, dtype=float))
        if c.shape != s.shape or c.shape[1] != 2:
            raise ValueError("coefficient arrays must both have shape (K+1, 2)")
        self._check_orientation()
        object.__setattr__(self, "cos_coeffs", c)
        object.__setattr__(self, "sin_coeffs", s)

    def __eq__(self, other):
        return (
            type(other) is FourierLoop
            and self.orientation == other.orientation
            and np.array_equal(self.cos_coeffs, other.cos_coeffs)
            and np.array_equal(self.sin_coeffs, other.sin_coeffs)
        )

    __hash__ = None

    def _canonical(self, theta):
        k = np.arange(self.cos_coeffs.shape[0])
        arg = 2.0 * np.pi * np.outer(k, np.mod(theta, 1.0))
        cos, sin = np.cos(arg), np.sin(arg)
        pos = self.cos_coeffs.T @ cos + self.sin_coeffs.T @ sin
        w = 2.0 * np.pi * k[:, None]
        vel = self.cos_coeffs.T @ (-w * sin) + self.sin_coeffs.T @ (w * cos)
        return pos, vel


class _Piecewise(Curve):
    """Curve assembled from segments ``(t0, t1, fn)`` with ``fn(u) -> (pos, dpos/du)``."""

    def _segments(self):
        raise NotImplementedError

    def _canonical(self, theta):
        segs = self._segments()
        starts = np.array([s[0] for s in segs])
        th = np.mod(theta, 1.0)
        idx = np.clip(np.searchsorted(starts, th, side="right") - 1, 0, len(segs) - 1)
        pos = np.empty((2, th.size))
        vel = np.empty((2, th.size))
        for j, (t0, t1, fn) in enumerate(segs):
            mask = idx == j
            if not np.any(mask):
                continue
            u = (th[mask] - t0) / (t1 - t0)
            p, dp = fn(u)
            pos[:, mask] = p
            vel[:, mask] = dp / (t1 - t0)
        return pos, vel


@dataclass(frozen=True)
class CircularSector(_Piecewise):
    """Two radial legs through the origin joined by an arc of radius ``radius``.

    The arc spans ``aperture`` symmetrically about ``bisector``.  With
    orientation +1 the curve runs out along ``bisector - aperture/2``, along
    the arc with growing ``phi`` and back in.  ``theta`` is shared between the
    three pieces in proportion to their Euclidean length.  The legs are
    integrated only for ``B_r >= EPS_MIN``.
    """

    radius: float
    aperture: float
    bisector: float = np.pi / 4
    orientation: int = 1

    def __post_init__(self):
        if self.radius < 0 or not np.isfinite(self.radius):
            raise ValueError("radius must be positive and finite")
        if not 0 < self.aperture <= 2 * np.pi:
            raise ValueError("aperture must lie in (0, 2 pi]")
        if self.radius <= EPS_MIN:
            raise DegenerateCurveError("sector radius is inside the origin guard")
        self._check_orientation()

    def _shares(self):
        total = 2.0 + self.aperture
        return 1.0 / total, (1.0 + self.aperture) / total

    def _segments(self):
        r, om = self.radius, self.aperture
        phi0 = self.bisector - 0.5 * om
        phi1 = self.bisector + 0.5 * om
        e0 = np.array([np.cos(phi0), np.sin(phi0)])[:, None]
        e1 = np.array([np.cos(phi1), np.sin(phi1)])[:, None]
        t1, t2 = self._shares()

        def leg_out(u):
            return r * u * e0, np.repeat(r * e0, u.size, axis=1)

        def arc(u):
            ang = phi0 + om * u
            pos = r * np.array([np.cos(ang), np.sin(ang)])
            return pos, r * om * np.array([-np.sin(ang), np.cos(ang)])

        def leg_in(u):
            return r * (1.0 - u) * e1, np.repeat(-r * e1, u.size, axis=1)

        return ((0.0, t1, leg_out), (t1, t2, arc), (t2, 1.0, leg_in))

    def _canonical_pieces(self):
        t1, t2 = self._shares()
        stub = EPS_MIN / self.radius * t1
        return ((stub, t1), (t1, t2), (t2, 1.0 - stub))


@dataclass(frozen=True)
class Polyline(_Piecewise):
    """Closed polygon through ``vertices`` (rows ``(b_z, b_x)``).

    The closing segment is added automatically; a repeated final vertex is
    dropped.  ``theta`` is shared between segments in proportion to length.
    """

    vertices: np.ndarray
    orientation: int = 1

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2:
            raise ValueError("vertices must have shape (m, 2)")
        if len(v) > 1 and np.array_equal(v[0], v[-1]):
            v = v[:-1]
        if len(v) < 3:
            raise DegenerateCurveError("a closed polyline needs at least three distinct vertices")
        self._check_orientation()
        object.__setattr__(self, "vertices", v)

    def __eq__(self, other):
        return (
            type(other) is Polyline
            and self.orientation == other.orientation
            and np.array_equal(self.vertices, other.vertices)
        )

    __hash__ = None

    def _breaks(self):
        v = self.vertices
        seg = np.roll(v, -1, axis=0) - v
        lengths = np.hypot(seg[:, 0], seg[:, 1])
        total = lengths.sum()
        if total < 1e-9:
            raise DegenerateCurveError("polyline circumference is below 1e-9")
        t = np.concatenate([[0.0], np.cumsum(lengths) / total])
        t[-1] = 1.0
        return t, seg

    def _segments(self):
        t, seg = self._breaks()
        out = []
        for j, start in enumerate(self.vertices):
            if t[j + 1] <= t[j]:
                continue
            d = seg[j][:, None]
            s = start[:, None]

            def fn(u, s=s, d=d):
                return s + d * u, np.repeat(d, u.size, axis=1)

            out.append((t[j], t[j + 1], fn))
        return tuple(out)

    def _canonical_pieces(self):
        t, _ = self._breaks()
        return tuple((a, b) for a, b in zip(t[:-1], t[1:]) if b > a)


@dataclass(frozen=True, eq=False)
class Reparametrized(Curve):
    """The point set of ``base`` traversed as ``theta -> base(profile(theta))``.

    Integration pieces are the profile's table cells, on which the composed
    map is smooth.
    """

    base: Curve
    profile: "SpeedProfile"
    orientation: int = 1
    graded = False

    def __post_init__(self):
        self._check_orientation()

    @cached_property
    def axis_crossings(self):
        s = [self.profile.crossing(t) for t in self.base.axis_crossings]
        return tuple(sorted(s if self.orientation == 1 else [1.0 - v for v in s]))

    def _canonical(self, theta):
        th = np.mod(theta, 1.0)
        th = np.where((th == 0.0) & (np.asarray(theta) > 0), 1.0, th)
        pos, vel = self.base.evaluate(self.profile(th))
        return pos, vel * self.profile.derivative(th)

    def _canonical_pieces(self):
        grid = self.profile.s
        out = []
        for a, b in self.base.smooth_pieces:
            sa, sb = self.profile.crossing(a), self.profile.crossing(b)
            e = np.concatenate([[sa], grid[(grid > sa) & (grid < sb)], [sb]])
            out.extend(zip(e[:-1], e[1:]))
        return tuple(out)


# local panel edges on [0, 1]: uniform quarters plus geometric grading to both ends
_GRADING = 2.0 ** -np.arange(1, 41)
_LOCAL_EDGES = np.unique(np.concatenate([[0.0, 1.0], np.linspace(0, 1, 5), _GRADING, 1.0 - _GRADING]))


def quadrature_rule(curve: Curve, level: int):
    """Nodes and weights on ``[0, 1]`` for refinement ``level`` (node count doubles per level).

    Smooth periodic curves: trapezoid with ``64 * 2**level`` nodes.  Otherwise
    composite Gauss-Legendre on the smooth pieces, with panels graded towards
    piece ends (corners, axis crossings) and halved at each level.
    """
    pieces = curve.smooth_pieces
    if curve.periodic and len(pieces) == 1:
        n = 64 * 2**level
        return np.arange(n) / n, np.full(n, 1.0 / n)
    sub = 2**level
    base = _LOCAL_EDGES if curve.graded else np.linspace(0.0, 1.0, 5)
    local = np.concatenate([np.linspace(u, v, sub + 1)[:-1] for u, v in zip(base[:-1], base[1:])] + [[1.0]])
    nodes, weights = [], []
    for a, b in pieces:
        edges = a + (b - a) * local
        h = np.diff(edges)
        nodes.append((edges[:-1, None] + h[:, None] * _GL_X).ravel())
        weights.append((h[:, None] * _GL_W).ravel())
    return np.concatenate(nodes), np.concatenate(weights)


def _circumference(curve: Curve):
    th, w = quadrature_rule(curve, 2)
    _, vel = curve.evaluate(th)
    return float(np.hypot(*vel) @ w)


def sample(c: Curve, n: int) -> Sample:
    """``n`` nodes with positions and analytic ``dB/dtheta``.

    Periodic curves use ``theta_k = k/n``; piecewise curves use cell midpoints so
    no node sits on a corner.  Nodes falling inside the origin guard are pushed
    out by ``EPS_MIN`` along the local direction of travel.
    """
    if n < 16:
        raise ValueError("need at least 16 samples")
    if _circumference(c) < 1e-9:
        raise DegenerateCurveError("curve circumference is below 1e-9")
    if c.periodic:
        theta = np.arange(n) / n
    else:
        theta = (np.arange(n) + 0.5) / n
    pos, vel = c.evaluate(theta)
    if not c.periodic:
        r = np.hypot(*pos)
        hit = r < EPS_MIN
        if np.any(hit):
            speed = np.hypot(*vel[:, hit])
            pos[:, hit] = pos[:, hit] + EPS_MIN * vel[:, hit] / np.where(speed > 0, speed, 1.0)
    return Sample(theta, pos, vel)


def _limit(delta, m0, m1):
    """Fritsch-Carlson limiting of per-cell Hermite end slopes."""
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.hypot(m0, m1) / delta
    scale = np.where(r > 3.0, 3.0 / r, 1.0)
    return m0 * scale, m1 * scale


def _hermite(x, y, m0, m1):
    """Monotone piecewise cubic with its own end slopes ``m0``, ``m1`` per cell.

    Slopes are not shared between neighbouring cells, so a kink at a knot is
    represented exactly.
    """
    h = np.diff(x)
    delta = np.diff(y) / h
    m0, m1 = _limit(delta, m0, m1)
    c = np.empty((4, h.size))
    c[0] = (m0 + m1 - 2.0 * delta) / h**2
    c[1] = (3.0 * delta - 2.0 * m0 - m1) / h
    c[2] = m0
    c[3] = y[:-1]
    return PPoly(c, x)


def _cell_slopes(slopes, n):
    m = np.asarray(slopes, dtype=float)
    if m.shape == (n,):
        return m[:-1], m[1:]
    if m.shape == (n - 1, 2):
        return m[:, 0], m[:, 1]
    raise ValueError("slopes must have shape (n,) or (n - 1, 2)")


@dataclass(frozen=True)
class SpeedProfile:
    """Monotone map ``s -> theta_bar(s)`` tabulated at knots ``(s_k, theta_k)``.

    ``s`` is the new time fraction ``t/tau``; ``theta_bar`` is where on the
    curve the control sits at that time.  The knots default to a uniform ``s``
    grid.  Between knots the map is a monotone cubic: Hermite with the given
    ``slopes`` (one per knot, or a left/right pair per cell), or PCHIP when no
    slopes are known.
    """

    theta: np.ndarray
    slopes: Optional[np.ndarray] = None
    s: Optional[np.ndarray] = None
    _forward: object = field(init=False, repr=False, compare=False)
    _inverse: object = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        th = np.asarray(self.theta, dtype=float)
        if th.ndim != 1 or th.size < 2:
            raise ValueError("profile table must be one-dimensional")
        if th[0] != 0.0 or th[-1] != 1.0:
            raise ValueError("profile endpoints must be fixed at 0 and 1")
        if np.any(np.diff(th) <= 0):
            raise ValueError("profile must be strictly increasing")
        s = np.linspace(0.0, 1.0, th.size) if self.s is None else np.asarray(self.s, dtype=float)
        if s.shape != th.shape or s[0] != 0.0 or s[-1] != 1.0 or np.any(np.diff(s) <= 0):
            raise ValueError("time knots must increase strictly from 0 to 1")
        slopes = None
        if self.slopes is not None:
            m0, m1 = _cell_slopes(self.slopes, th.size)
            if np.all(np.isfinite(m0) & np.isfinite(m1) & (m0 > 0) & (m1 > 0)):
                slopes = np.column_stack([m0, m1])
            # otherwise fall back to PCHIP rather than stall the inverse
        object.__setattr__(self, "theta", th)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "slopes", slopes)
        if slopes is None:
            object.__setattr__(self, "_forward", PchipInterpolator(s, th))
            object.__setattr__(self, "_inverse", PchipInterpolator(th, s))
        else:
            object.__setattr__(self, "_forward", _hermite(s, th, slopes[:, 0], slopes[:, 1]))
            object.__setattr__(self, "_inverse", _hermite(th, s, 1.0 / slopes[:, 0], 1.0 / slopes[:, 1]))

    @classmethod
    def uniform(cls, n: int = PROFILE_POINTS) -> "SpeedProfile":
        return cls(np.linspace(0.0, 1.0, n), np.ones(n))

    @classmethod
    def from_function(cls, fn: Callable, n: int = PROFILE_POINTS) -> "SpeedProfile":
        """Tabulate ``fn(s)`` on a uniform grid; endpoints are pinned to 0 and 1."""
        th = np.asarray(fn(np.linspace(0.0, 1.0, n)), dtype=float)
        th[0], th[-1] = 0.0, 1.0
        return cls(th)

    def __call__(self, s):
        return self._forward(s)

    def derivative(self, s):
        """``d theta_bar / ds``."""
        return self._forward(s, 1)

    def inverse(self, theta):
        """Time fraction ``s`` at which the control reaches ``theta``."""
        return self._inverse(theta)

    def crossing(self, theta: float) -> float:
        """Exact ``s`` at which the tabulated map reaches ``theta``.

        Unlike :meth:`inverse` (a separate interpolant) this solves the forward
        cubic, so a curve joint maps to the ``s`` where the composed path kinks.
        """
        if theta <= 0.0:
            return 0.0
        if theta >= 1.0:
            return 1.0
        roots = self._forward.solve(theta, extrapolate=False)
        roots = roots[(roots >= 0.0) & (roots <= 1.0)]
        if roots.size == 0:
            return float(self.inverse(theta))
        return float(roots[0])

    def time_density(self, theta):
        """``ds/dtheta`` at curve parameters ``theta``."""
        return 1.0 / self.derivative(self.inverse(theta))

    def __eq__(self, other):
        return (
            isinstance(other, SpeedProfile)
            and np.array_equal(self.theta, other.theta)
            and np.array_equal(self.s, other.s)
        )

    __hash__ = None


def _quadratic_form(metric_values, vel):
    return np.einsum("in,ijn,jn->n", vel, metric_values, vel)


def profile_density(q, leak=None, floor: float = DENSITY_FLOOR):
    """Unnormalized optimal time density ``ds/dtheta``.

    ``q = B'.Lambda.B'`` along the curve.  Without ``leak`` the density is
    ``sqrt(q)`` (constant dissipation rate).  With a leak field ``kappa`` it is
    ``sqrt(q / kappa)``, which makes ``B'.Lambda.B' / kappa`` constant in time.
    ``floor`` is added to ``kappa`` (and to the density) so zero-leak pieces
    stay finite while the density remains smooth.
    """
    q = np.clip(np.asarray(q, dtype=float), 0.0, None)
    if leak is None:
        return np.sqrt(q) + floor
    return np.sqrt(q / (np.clip(leak, 0.0, None) + floor)) + floor


def optimal_speed_profile(
    c: Curve,
    metric: Callable,
    leak: Optional[Callable] = None,
    n_cells: int = PROFILE_CELLS,
) -> SpeedProfile:
    """Speed profile saturating the Cauchy-Schwarz bound for ``metric``.

    ``metric(points)`` returns ``(2, 2, n)`` tensors.  Without ``leak`` the
    returned profile spends time in proportion to the local geodesic length,
    so ``B'.metric.B'`` is constant in time.  Passing ``leak(points)`` (the heat
    leak kappa) gives the efficiency profile instead.

    The curve's pieces are cut into cells uniform in ``theta``; the cumulative
    time ``s(theta)`` is integrated per cell with Gauss-Legendre and the cell
    ends become the table knots, with exact one-sided slopes.  Cells are
    doubled while the saturation condition is violated by more than
    ``PROFILE_RTOL`` inside a cell, up to ``MAX_PROFILE_CELLS``.
    """
    def density(theta):
        pos, vel = c.evaluate(theta)
        q = _quadratic_form(metric(pos), vel)
        return profile_density(q, None if leak is None else leak(pos))

    n = n_cells
    while True:
        prof, dev = _profile_table(c, density, n)
        if dev <= PROFILE_RTOL or 2 * n > MAX_PROFILE_CELLS:
            return prof
        n *= 2


def _profile_table(c: Curve, density: Callable, n: int):
    """Knot table for ``n`` cells per unit ``theta`` and its worst in-cell deviation."""
    pieces = c.smooth_pieces
    cells = np.concatenate(
        [np.column_stack([e[:-1], e[1:]]) for e in
         (np.linspace(a, b, max(2, int(np.ceil(n * (b - a))) + 1)) for a, b in pieces)]
    )
    h = cells[:, 1] - cells[:, 0]
    nodes = (cells[:, :1] + h[:, None] * _GL_X).ravel()
    per_cell = (density(nodes).reshape(-1, GL_ORDER) * _GL_W).sum(axis=1) * h
    total = per_cell.sum()
    if not total > 1e-12:
        raise DegenerateCurveError("geodesic length of the curve is below 1e-12")
    theta_k = np.concatenate([cells[:, 0], cells[-1:, 1]])
    s_k = np.concatenate([[0.0], np.cumsum(per_cell)]) / total
    s_k[-1] = 1.0
    # one-sided dtheta/ds at both ends of every cell
    inset = 1e-9 * h
    m0 = total / density(cells[:, 0] + inset)
    m1 = total / density(cells[:, 1] - inset)
    # trimmed stubs (sector legs near the origin) are crossed in a negligible
    # extra cell of duration _STUB_TIME
    if theta_k[0] > 0.0:
        slope = theta_k[0] / _STUB_TIME
        theta_k = np.concatenate([[0.0], theta_k])
        s_k = np.concatenate([[0.0], np.maximum(s_k, _STUB_TIME)])
        m0, m1 = np.concatenate([[slope], m0]), np.concatenate([[slope], m1])
    if theta_k[-1] < 1.0:
        slope = (1.0 - theta_k[-1]) / _STUB_TIME
        theta_k = np.concatenate([theta_k, [1.0]])
        s_k = np.concatenate([np.minimum(s_k, 1.0 - _STUB_TIME), [1.0]])
        m0, m1 = np.concatenate([m0, [slope]]), np.concatenate([m1, [slope]])
    # cells too short to register in s (or theta) are merged into their predecessor
    keep = np.ones(theta_k.size, dtype=bool)
    keep[1:-1] = (theta_k[1:-1] > np.maximum.accumulate(theta_k[:-2])) & (s_k[1:-1] > np.maximum.accumulate(s_k[:-2]))
    keep[1:-1] &= (theta_k[1:-1] < 1.0) & (s_k[1:-1] < 1.0)
    idx = np.flatnonzero(keep)
    slopes = np.column_stack([m0[idx[:-1]], m1[idx[1:] - 1]])
    prof = SpeedProfile(theta_k[idx], slopes, s_k[idx])
    # density * dtheta/ds is constant for the exact profile; check where the
    # cubic's slope error peaks (it vanishes at cell midpoints)
    check = np.ones(prof.s.size - 1, dtype=bool)
    if pieces[0][0] > 0.0:
        check[0] = False
    if pieces[-1][1] < 1.0:
        check[-1] = False
    # cells shorter than this in time cannot resolve their own slope in double
    # precision, and contribute only rounding-level time to any integral
    check &= np.diff(prof.s) * PROFILE_RTOL > 10.0 * np.finfo(float).eps
    lo, width = prof.s[:-1][check], np.diff(prof.s)[check]
    at = np.concatenate([lo + width * (0.5 - _SLOPE_PEAK), lo + width * (0.5 + _SLOPE_PEAK)])
    dev = np.abs(density(prof(at)) * prof.derivative(at) / total - 1.0)
    return prof, float(dev.max()) if dev.size else 0.0
