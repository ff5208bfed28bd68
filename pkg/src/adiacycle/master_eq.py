"""Adiabatic master-equation oracle for the qubit coefficients.

This is a direct numerical route to the Onsager coefficients, independent of the
closed forms in :mod:`adiacycle.qubit_model`.  The reduced density matrix is
handled in the instantaneous eigenbasis as ``p = (rho11, rho12, rho21, rho22)``
with ``E1 = -B_r`` and ``E2 = +B_r``.  Coherences are kept (no secular
approximation); Lamb shifts are not.

Rates are ``xi_ml xi_ju g(E_j - E_u) / (2 hbar)`` where ``g`` carries the Bose
factors and the Ohmic density.  With this normalization the population
relaxation rate is ``Gamma(2B_r) coth(B_r)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from .errors import DomainError, SolverError
from .qubit_model import EPS_MIN, BathParams, OnsagerCoeffs, PointLike, spectral_density

__all__ = [
    "RateMatrix",
    "FrozenState",
    "AdiabaticResponse",
    "build_rate_matrix",
    "frozen_state",
    "adiabatic_response",
    "oracle_coefficients",
    "thermal_response",
    "heat_current",
]

SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]])
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]])
# coupling operators; the Cartesian control directions are (z, x)
COUPLING = {"c": SIGMA_Z, "h": SIGMA_X}
CONTROLS = (SIGMA_Z, SIGMA_X)

RATE_NORM = 0.5
FIELD_STEP = 1e-3
TEMP_STEP = 1e-3
# fourth-order central stencil: offsets and weights
_STENCIL = ((-2, 1.0 / 12), (-1, -8.0 / 12), (1, 8.0 / 12), (2, -1.0 / 12))


def _idx(i, j):
    return 2 * i + j


@dataclass(frozen=True)
class RateMatrix:
    """Generator of ``dp/dt = generator @ p`` at a frozen field.

    ``dissipators`` holds the per-bath parts (without the coherent term), used
    for heat currents.  ``basis`` has the instantaneous eigenvectors as columns.
    """

    generator: np.ndarray
    dissipators: Dict[str, np.ndarray]
    frozen_energies: Tuple[float, float]
    basis: np.ndarray
    temps: Tuple[float, float]


@dataclass(frozen=True)
class FrozenState:
    p: np.ndarray
    gibbs_check: float

    @property
    def rho(self):
        return self.p.reshape(2, 2)


@dataclass(frozen=True)
class AdiabaticResponse:
    """Kernels ``M~^{-1} dp^f/dB_n`` for n = z, x (each a 4-vector)."""

    dp_dB: Tuple[np.ndarray, np.ndarray]

    def correction(self, velocity):
        """Adiabatic correction ``p^a`` for a velocity ``(dB_z/dt, dB_x/dt)``."""
        return velocity[0] * self.dp_dB[0] + velocity[1] * self.dp_dB[1]


def _eigenbasis(bz, bx):
    phi = np.arctan2(bx, bz)
    ground = np.array([-np.sin(phi / 2), np.cos(phi / 2)])
    excited = np.array([np.cos(phi / 2), np.sin(phi / 2)])
    return np.column_stack([ground, excited])


def _bose(eps, temp):
    return 1.0 / np.expm1(eps / temp)


def _emission_absorption(eps, temp, bath):
    """``g(eps)`` for a transition with ``eps = E_j - E_u``."""
    if eps > 0:
        return _bose(eps, temp) * spectral_density(eps, bath)
    if eps < 0:
        return (1.0 + _bose(-eps, temp)) * spectral_density(-eps, bath)
    return 0.0


def build_rate_matrix(p: PointLike, temps: Tuple[float, float], bath: BathParams) -> RateMatrix:
    """Assemble the 4x4 generator for cold/hot temperatures ``temps = (T_c, T_h)``."""
    bz, bx = (float(v) for v in np.asarray(p, dtype=float))
    b_r = np.hypot(bz, bx)
    if b_r <= EPS_MIN:
        raise DomainError("degenerate spectrum at the field origin")
    t_c, t_h = temps
    if not (t_c > 0 and t_h > 0):
        raise DomainError("temperatures must be positive")
    energies = np.array([-b_r, b_r])
    basis = _eigenbasis(bz, bx)

    dissipators = {}
    for bath_name, temp in (("c", t_c), ("h", t_h)):
        xi = basis.T @ COUPLING[bath_name] @ basis
        g = np.array(
            [[_emission_absorption(energies[j] - energies[u], temp, bath) for u in range(2)] for j in range(2)]
        )
        # rate[j, u, m, l] = xi_ml xi_ju g(E_j - E_u)
        rate = RATE_NORM * np.einsum("ml,ju->juml", xi, xi * g)
        d = np.zeros((4, 4))
        for i in range(2):
            for j in range(2):
                row = _idx(i, j)
                for m in range(2):
                    for n in range(2):
                        d[row, _idx(m, n)] += rate[j, n, m, i]
                        d[row, _idx(n, m)] += rate[i, n, j, m]
                        d[row, _idx(i, n)] -= rate[m, n, j, m]
                        d[row, _idx(n, j)] -= rate[m, n, m, i]
        dissipators[bath_name] = d

    generator = dissipators["c"] + dissipators["h"] + 0j
    for i in range(2):
        for j in range(2):
            generator[_idx(i, j), _idx(i, j)] += 1j * (energies[i] - energies[j])
    return RateMatrix(generator, dissipators, (-b_r, b_r), basis, (t_c, t_h))


def _augmented(m: RateMatrix):
    aug = m.generator.copy()
    aug[0] = [1.0, 0.0, 0.0, 1.0]
    return aug


def frozen_state(m: RateMatrix) -> FrozenState:
    """Stationary state with unit trace."""
    sv = np.linalg.svd(m.generator, compute_uv=False)
    if sv[-2] <= 1e-12 * sv[0]:
        raise SolverError("stationary state is not unique")
    rhs = np.zeros(4, dtype=complex)
    rhs[0] = 1.0
    p = np.linalg.solve(_augmented(m), rhs)
    b_r = m.frozen_energies[1]
    temp = min(m.temps)
    gibbs = np.exp(-2.0 * b_r / temp)
    check = abs(p[3].real / p[0].real - gibbs) if m.temps[0] == m.temps[1] else np.nan
    return FrozenState(p, float(check))


def _lab_frozen(point, temps, bath):
    m = build_rate_matrix(point, temps, bath)
    rho = frozen_state(m).rho
    return m.basis @ rho @ m.basis.T


def adiabatic_response(p: PointLike, bath: BathParams, temp: float = 1.0, step: float = FIELD_STEP) -> AdiabaticResponse:
    """Linear-response kernels of the adiabatic correction at equal temperatures.

    The frozen state is differentiated in the fixed laboratory basis and
    rotated back to the instantaneous eigenbasis before solving.
    """
    point = np.asarray(p, dtype=float)
    m = build_rate_matrix(point, (temp, temp), bath)
    aug = _augmented(m)
    if np.linalg.cond(aug) > 1e12:
        raise SolverError("augmented rate matrix is singular")
    kernels = []
    for direction in np.eye(2):
        d_lab = sum(w * _lab_frozen(point + k * step * direction, (temp, temp), bath) for k, w in _STENCIL) / step
        dp = (m.basis.T @ d_lab @ m.basis).reshape(4)
        dp[0] = 0.0  # trace-zero row of the augmented system
        kernels.append(np.linalg.solve(aug, dp))
    return AdiabaticResponse(tuple(kernels))


def heat_current(m: RateMatrix, p: np.ndarray, bath_name: str = "c") -> float:
    """Heat entering reservoir ``bath_name``: energy the qubit loses through that bath."""
    dp = m.dissipators[bath_name] @ p
    e1, e2 = m.frozen_energies
    return float(-(e1 * dp[0] + e2 * dp[3]).real)


def _work_operators(m: RateMatrix):
    return [m.basis.T @ op @ m.basis for op in CONTROLS]


def thermal_response(p: PointLike, bath: BathParams, temp: float = 1.0, step: float = TEMP_STEP):
    """Response to a hot-bath bias ``T_h = T + dT``.

    Returns ``(kappa, lambda_l3)``: the conductance ``T dJ_c/d(dT)`` and the
    work coefficients ``-T Tr[dH/dB_l d rho^f/d(dT)]``.
    """
    point = np.asarray(p, dtype=float)
    m = build_rate_matrix(point, (temp, temp), bath)
    h = step * temp

    def rho(dt):
        return frozen_state(build_rate_matrix(point, (temp, temp + dt), bath)).p

    d_rho = sum(w * rho(k * h) for k, w in _STENCIL) / h
    kap = temp * heat_current(m, d_rho, "c")
    ops = _work_operators(m)
    l3 = np.array([-temp * np.trace(op @ d_rho.reshape(2, 2)).real for op in ops])
    return kap, l3


def oracle_coefficients(p: PointLike, bath: BathParams) -> OnsagerCoeffs:
    """Onsager coefficients obtained from the master equation alone."""
    point = np.asarray(p, dtype=float)
    m = build_rate_matrix(point, (1.0, 1.0), bath)
    resp = adiabatic_response(point, bath)
    ops = _work_operators(m)
    lam = np.array([[np.trace(op @ k.reshape(2, 2)).real for k in resp.dp_dB] for op in ops])
    vec = np.array([heat_current(m, k, "c") for k in resp.dp_dB])
    kap, _ = thermal_response(point, bath)
    return OnsagerCoeffs(lambda_matrix=lam, lambda_vector=vec, kappa=float(kap))
