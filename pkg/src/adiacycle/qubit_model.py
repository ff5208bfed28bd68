"""Adiabatic linear-response coefficients of the driven qubit.

The qubit Hamiltonian is ``B_z sigma_z + B_x sigma_x``; the hot bath couples
through ``sigma_x`` and the cold bath through ``sigma_z``; both baths are Ohmic
with the same spectral density.  All energies are in units of k_B T and
hbar = 1, so beta = 1 throughout.

Vectors and tensors are returned in the Cartesian ``(z, x)`` basis.  Polar
views use ``B_z = B_r cos(phi)``, ``B_x = B_r sin(phi)``.  Every function
accepts either a :class:`FieldPoint` or an array whose first axis holds
``(b_z, b_x)``; extra axes broadcast.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
from scipy.optimize import bisect, minimize_scalar

from .errors import DomainError

__all__ = [
    "EPS_MIN",
    "BathParams",
    "FieldPoint",
    "OnsagerCoeffs",
    "spectral_density",
    "lambda_eigenvalues",
    "lambda_matrix",
    "lambda_vector",
    "kappa",
    "berry_curvature",
    "lambda_kappa_max_eigenvalue",
    "onsager_coefficients",
    "crossover_radii",
    "threshold_coupling",
]

# Origin guard for tensor evaluation, in k_B T.
EPS_MIN = 1e-6


@dataclass(frozen=True)
class BathParams:
    gamma_bar: float = 0.2
    eps_cutoff: float = 120.0

    def __post_init__(self):
        if not (self.gamma_bar > 0 and self.eps_cutoff > 0):
            raise ValueError("gamma_bar and eps_cutoff must be positive")


@dataclass(frozen=True)
class FieldPoint:
    b_z: float
    b_x: float

    @classmethod
    def from_polar(cls, b_r: float, phi: float) -> "FieldPoint":
        return cls(b_r * np.cos(phi), b_r * np.sin(phi))

    @property
    def b_r(self) -> float:
        return float(np.hypot(self.b_z, self.b_x))

    @property
    def phi(self) -> float:
        return float(np.arctan2(self.b_x, self.b_z))

    def __array__(self, dtype=None, copy=None):
        return np.array([self.b_z, self.b_x], dtype=dtype)


@dataclass(frozen=True)
class OnsagerCoeffs:
    """Linear-response coefficients at one point.

    ``lambda_matrix`` is the dissipation tensor (hbar/(k_B T)^2), ``lambda_vector``
    the pumped-heat response (dimensionless) and ``kappa`` the parametric
    thermal conductance ((k_B T)^2/hbar).
    """

    lambda_matrix: np.ndarray
    lambda_vector: np.ndarray
    kappa: float


PointLike = Union[FieldPoint, np.ndarray, Tuple[float, float]]


def _components(p: PointLike):
    a = np.asarray(p, dtype=float)
    if a.shape[:1] != (2,):
        raise ValueError("points must have leading axis of length 2 (b_z, b_x)")
    return a[0], a[1]


def _log_sech2(x):
    # log(sech^2 x) without overflow
    x = np.abs(x)
    return 2.0 * (np.log(2.0) - x - np.log1p(np.exp(-2.0 * x)))


def _sech2(x):
    return np.exp(_log_sech2(x))


def spectral_density(eps, bath: BathParams):
    """Ohmic density ``gamma_bar * eps * exp(-eps/eps_cutoff)``, zero for eps <= 0."""
    eps = np.asarray(eps, dtype=float)
    out = bath.gamma_bar * eps * np.exp(-np.clip(eps, 0.0, None) / bath.eps_cutoff)
    return np.where(eps > 0, out, 0.0)


def _check_origin(b_r):
    if np.any(b_r < EPS_MIN):
        raise DomainError(
            f"dissipation tensor is singular at the origin (B_r < {EPS_MIN:g} k_B T)"
        )


def _log_lambda_r(b_r, bath):
    # lambda_r = tanh(B) sech^2(B) / Gamma(2B), in log form for large B
    return (
        np.log(np.tanh(b_r))
        + _log_sech2(b_r)
        - np.log(bath.gamma_bar * 2.0 * b_r)
        + 2.0 * b_r / bath.eps_cutoff
    )


def _log_lambda_phi(b_r, bath):
    return np.log(bath.gamma_bar * 2.0 * b_r) - 2.0 * b_r / bath.eps_cutoff - np.log(4.0 * b_r**3)


def lambda_eigenvalues(b_r, bath: BathParams):
    """Radial and tangential eigenvalues ``(lambda_r, lambda_phi)`` of the dissipation tensor."""
    b_r = np.asarray(b_r, dtype=float)
    _check_origin(b_r)
    return np.exp(_log_lambda_r(b_r, bath)), np.exp(_log_lambda_phi(b_r, bath))


def lambda_matrix(p: PointLike, bath: BathParams):
    """Dissipation tensor ``lambda_r |r><r| + lambda_phi |phi><phi|``, shape ``(2, 2, ...)``."""
    bz, bx = _components(p)
    b_r = np.hypot(bz, bx)
    lam_r, lam_p = lambda_eigenvalues(b_r, bath)
    c, s = bz / b_r, bx / b_r
    return np.array(
        [
            [lam_r * c * c + lam_p * s * s, (lam_r - lam_p) * c * s],
            [(lam_r - lam_p) * c * s, lam_r * s * s + lam_p * c * c],
        ]
    )


def lambda_vector(p: PointLike, bath: Optional[BathParams] = None):
    """Pumped-heat response vector, ``B_r sin^2(phi) sech^2(B_r)`` along the radial direction.

    Positive values mean heat entering the cold reservoir when B_r grows.  The
    vector does not depend on the bath parameters.
    """
    bz, bx = _components(p)
    r2 = bz * bz + bx * bx
    with np.errstate(invalid="ignore", divide="ignore"):
        g = np.where(r2 > 0, _sech2(np.sqrt(r2)) / r2, 0.0)
    return np.array([g * bx * bx * bz, g * bx * bx * bx])


def kappa(p: PointLike, bath: BathParams):
    """Parametric thermal conductance ``B_r^2 sin^2(2 phi) Gamma(2 B_r) / sinh(2 B_r)``."""
    bz, bx = _components(p)
    b_r = np.hypot(bz, bx)
    # B_r^2 sin^2(2phi) = 4 bz^2 bx^2 / B_r^2 ; Gamma(2B)/sinh(2B) written with exp(-2B)
    with np.errstate(invalid="ignore", divide="ignore"):
        e = np.exp(-2.0 * b_r)
        ratio = bath.gamma_bar * 2.0 * b_r * np.exp(-2.0 * b_r / bath.eps_cutoff) * 2.0 * e / -np.expm1(-4.0 * b_r)
        ang = 4.0 * bz * bz * bx * bx / (b_r * b_r)
        out = ang * ratio
    return np.where(b_r > 0, out, 0.0)


def lambda_kappa_max_eigenvalue(p: PointLike, bath: BathParams):
    """Largest eigenvalue of the efficiency metric ``kappa * Lambda``."""
    bz, bx = _components(p)
    lam_r, lam_p = lambda_eigenvalues(np.hypot(bz, bx), bath)
    return kappa(p, bath) * np.maximum(lam_r, lam_p)


def _vector_partials(bz, bx):
    """Analytic partial derivatives of the pumped-heat vector.

    The components are ``L_z = sech^2(r) r s^2 c`` and ``L_x = sech^2(r) r s^3``
    with ``(c, s) = (B_z, B_x)/r``; written in ``c, s`` the partials stay finite
    down to the origin.
    """
    r = np.hypot(bz, bx)
    c, s = bz / r, bx / r
    sech2 = _sech2(r)
    k = 2.0 * (np.tanh(r) * r + 1.0)
    dLz_dz = sech2 * s * s * (1.0 - k * c * c)
    dLz_dx = sech2 * s * c * (2.0 - k * s * s)
    dLx_dz = -sech2 * k * c * s**3
    dLx_dx = sech2 * s * s * (3.0 - k * s * s)
    return dLz_dz, dLz_dx, dLx_dz, dLx_dx


def berry_curvature(p: PointLike, bath: Optional[BathParams] = None):
    """Scalar curl ``dL_x/dB_z - dL_z/dB_x`` of the pumped-heat vector.

    Equals ``-sech^2(B_r) sin(2 phi)``: it changes sign across both axes and its
    integral over a full quadrant is ``+-ln 2``.
    """
    bz, bx = _components(p)
    with np.errstate(invalid="ignore", divide="ignore"):
        _, dLz_dx, dLx_dz, _ = _vector_partials(bz, bx)
        out = dLx_dz - dLz_dx
    # bounded but direction dependent at the origin
    return np.where(bz * bz + bx * bx > 0, out, 0.0)


def onsager_coefficients(p: PointLike, bath: BathParams) -> OnsagerCoeffs:
    return OnsagerCoeffs(
        lambda_matrix=lambda_matrix(p, bath),
        lambda_vector=lambda_vector(p),
        kappa=float(kappa(p, bath)),
    )


def _crossover_gap(b_r, bath):
    return _log_lambda_r(b_r, bath) - _log_lambda_phi(b_r, bath)


def crossover_radii(
    bath: BathParams, upper: float = 50.0, n_scan: int = 2000, xtol: float = 1e-9
) -> Optional[Tuple[float, float]]:
    """Radii where the radial and tangential dissipation eigenvalues coincide.

    Returns ``(B_low, B_high)``, or ``None`` when the tangential (rotational)
    dissipation dominates at every radius.
    """
    grid = np.geomspace(EPS_MIN, upper, n_scan)
    gap = _crossover_gap(grid, bath)
    roots = []
    for k in np.nonzero(np.diff(np.sign(gap)) != 0)[0]:
        roots.append(bisect(_crossover_gap, grid[k], grid[k + 1], args=(bath,), xtol=xtol))
    if not roots:
        return None
    if len(roots) != 2:
        raise DomainError(f"expected two crossover radii, found {len(roots)}")
    return roots[0], roots[1]


def threshold_coupling(eps_cutoff: float = np.inf) -> float:
    """Largest coupling for which a radially dominated interval still exists.

    The crossover condition reads ``u tanh(u) sech^2(u) = gamma^2 exp(-4u/eps_C)``.
    """
    decay = 0.0 if np.isinf(eps_cutoff) else 4.0 / eps_cutoff

    def neg(u):
        return -(np.log(u) + np.log(np.tanh(u)) + _log_sech2(u) + decay * u)

    res = minimize_scalar(neg, bounds=(1e-3, 10.0), method="bounded", options={"xatol": 1e-12})
    return float(np.exp(-0.5 * res.fun))
