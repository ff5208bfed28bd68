"""Engine and refrigerator figures of merit of a geometric summary.

With ``eta_C = dT/T`` the work and heat per cycle of duration ``tau`` are

    W = eta_C A - L^2 / tau,      Q = A + eta_C tau <kappa>,

and power ``P = W/tau`` and efficiency ``eta = W/Q`` follow.  Optimizing the
duration gives closed forms in terms of the timescales ``tau_D``, ``tau_kappa``
and ``x = 1 + A^2/(L^2 <kappa>)``.

Power figures use the power-optimal profile (``L^2 = calL^2``), efficiency
figures the efficiency-optimal one (``L^2 <kappa> = calL_kappa^2``).
Efficiencies are reported as fractions of the Carnot value.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from .errors import OrientationError
from .geometry import GeomSummary
from .units import UnitSystem

__all__ = [
    "Drive",
    "CycleFigures",
    "Performance",
    "RefrigeratorPerformance",
    "work_and_heat",
    "power",
    "efficiency",
    "cycle_figures",
    "engine_figures",
    "refrigerator_figures",
    "limiting_power",
    "cooling_power",
    "cop",
    "si_estimates",
    "LINEAR_RESPONSE_EDGE",
]

LINEAR_RESPONSE_EDGE = 0.2


@dataclass(frozen=True)
class Drive:
    bias_ratio: float = 0.05
    mode: str = "engine"

    def __post_init__(self):
        if not self.bias_ratio > 0:
            raise ValueError("bias_ratio must be positive")
        if self.mode not in ("engine", "refrigerator"):
            raise ValueError("mode must be 'engine' or 'refrigerator'")
        if self.bias_ratio > LINEAR_RESPONSE_EDGE:
            warnings.warn(
                f"bias ratio {self.bias_ratio} is beyond the linear-response range (> {LINEAR_RESPONSE_EDGE})",
                stacklevel=2,
            )

    @property
    def eta_carnot(self) -> float:
        return self.bias_ratio

    @property
    def cop_carnot(self) -> float:
        return 1.0 / self.bias_ratio


def _profile_values(g: GeomSummary, profile: str):
    return g.length_L2[profile], g.mean_kappa[profile]


def work_and_heat(g: GeomSummary, d: Drive, tau, profile: str = "power"):
    """``(W, Q)`` for cycle duration(s) ``tau`` under the named profile."""
    tau = np.asarray(tau, dtype=float)
    if np.any(tau <= 0):
        raise ValueError("tau must be positive")
    l2, kap = _profile_values(g, profile)
    work = d.bias_ratio * g.area_A - l2 / tau
    heat = g.area_A + d.bias_ratio * tau * kap
    return work, heat


def power(g: GeomSummary, d: Drive, tau, profile: str = "power"):
    work, _ = work_and_heat(g, d, tau, profile)
    return work / np.asarray(tau, dtype=float)


def efficiency(g: GeomSummary, d: Drive, tau, profile: str = "efficiency"):
    """Efficiency ``W/Q`` (absolute, not a fraction of Carnot)."""
    work, heat = work_and_heat(g, d, tau, profile)
    return work / heat


@dataclass(frozen=True)
class CycleFigures:
    """Figures of merit for one ``(A, L^2, <kappa>)`` triple.

    ``saturated`` marks ``x = inf`` (no heat leak), where ``eta_max = 1``.
    """

    tau_D: float
    tau_kappa: float
    tau_P: float
    tau_eta: float
    P_max: float
    eta_Pmax: float
    eta_max: float
    P_eta_max: float
    x: float
    saturated: bool


def _x(area, l2, kap):
    denom = l2 * kap
    if denom <= 0:
        return math.inf if area != 0 else 1.0
    x = 1.0 + area * area / denom
    return x


def cycle_figures(area: float, l2: float, kap: float, d: Drive) -> CycleFigures:
    """Closed-form optimal durations, powers and efficiencies (engine sign conventions)."""
    eta_c = d.bias_ratio
    x = _x(area, l2, kap)
    saturated = math.isinf(x)
    if area == 0:
        tau_d = math.inf
        tau_k = 0.0
    else:
        tau_d = l2 / (eta_c * area)
        tau_k = area / (eta_c * kap) if kap > 0 else math.inf
    if saturated:
        eta_pmax = 0.5
        eta_max = 1.0
        tau_eta = math.inf
        p_eta = 0.0
    else:
        sx = math.sqrt(x)
        eta_pmax = 0.5 * (x - 1.0) / (x + 1.0)
        eta_max = 1.0 - 2.0 / (sx + 1.0)
        p_eta = eta_c**2 * kap * (sx - 1.0) ** 2 / sx
        tau_eta = tau_d + math.sqrt(tau_d * (tau_d + tau_k)) if area != 0 else math.inf
    p_max = 0.25 * eta_c**2 * area * area / l2 if l2 > 0 else math.inf
    return CycleFigures(
        tau_D=tau_d,
        tau_kappa=tau_k,
        tau_P=2.0 * tau_d,
        tau_eta=tau_eta,
        P_max=p_max,
        eta_Pmax=eta_pmax,
        eta_max=eta_max,
        P_eta_max=p_eta,
        x=x,
        saturated=saturated,
    )


@dataclass(frozen=True)
class Performance:
    """Engine figures.  ``tau_D``, ``tau_kappa``, ``P_max``, ``eta_Pmax`` and
    ``x_power`` belong to the power-optimal profile; ``tau_eta``, ``eta_max``,
    ``P_eta_max`` and ``x`` to the efficiency-optimal one."""

    tau_D: float
    tau_kappa: float
    tau_P: float
    tau_eta: float
    P_max: float
    P_eta_max: float
    eta_Pmax: float
    eta_max: float
    x: float
    x_power: float
    saturated: bool
    profiles: dict

    def as_dict(self):
        out = asdict(self)
        for key, val in out.items():
            if isinstance(val, float) and not math.isfinite(val):
                out[key] = None  # JSON-safe; see `saturated`
        return out


@dataclass(frozen=True)
class RefrigeratorPerformance:
    tau_eta_prime: float
    cop_max: float
    cooling_power_at_cop_max: float
    x: float
    saturated: bool

    def as_dict(self):
        out = asdict(self)
        for key, val in out.items():
            if isinstance(val, float) and not math.isfinite(val):
                out[key] = None
        return out


def engine_figures(g: GeomSummary, d: Drive) -> Performance:
    if not g.area_A > 0:
        raise OrientationError("A <= 0: not an engine cycle; reverse the curve")
    pw = cycle_figures(g.area_A, *_profile_values(g, "power"), d)
    ef = cycle_figures(g.area_A, *_profile_values(g, "efficiency"), d)
    return Performance(
        tau_D=pw.tau_D,
        tau_kappa=pw.tau_kappa,
        tau_P=pw.tau_P,
        tau_eta=ef.tau_eta,
        P_max=pw.P_max,
        P_eta_max=ef.P_eta_max,
        eta_Pmax=pw.eta_Pmax,
        eta_max=ef.eta_max,
        x=ef.x,
        x_power=pw.x,
        saturated=ef.saturated,
        profiles={"power": "power", "efficiency": "efficiency"},
    )


def refrigerator_figures(g: GeomSummary, d: Drive) -> RefrigeratorPerformance:
    """Best coefficient of performance and the cooling power there (``A < 0``)."""
    if not g.area_A < 0:
        raise OrientationError("A >= 0: not a refrigerator cycle; reverse the curve")
    l2, kap = _profile_values(g, "efficiency")
    eta_c = d.bias_ratio
    # formally negative timescales, as in the engine formulas
    tau_d = l2 / (eta_c * g.area_A)
    x = _x(g.area_A, l2, kap)
    if math.isinf(x):
        return RefrigeratorPerformance(math.inf, 1.0, 0.0, x, True)
    tau_k = g.area_A / (eta_c * kap)
    tau = math.sqrt(tau_d * (tau_d + tau_k)) - abs(tau_d)
    sx = math.sqrt(x)
    return RefrigeratorPerformance(
        tau_eta_prime=tau,
        cop_max=1.0 - 2.0 / (sx + 1.0),
        cooling_power_at_cop_max=eta_c * kap * sx,
        x=x,
        saturated=False,
    )


def cooling_power(g: GeomSummary, d: Drive, tau, profile: str = "efficiency"):
    """``P' = -Q/tau`` for a refrigerator cycle."""
    _, heat = work_and_heat(g, d, tau, profile)
    return -heat / np.asarray(tau, dtype=float)


def cop(g: GeomSummary, d: Drive, tau, profile: str = "efficiency"):
    """``eta' = Q/W`` (absolute)."""
    work, heat = work_and_heat(g, d, tau, profile)
    return heat / work


def limiting_power(g: GeomSummary, d: Drive) -> float:
    """``ln 2 eta_C / (2 tau_P)``: the power of a Landauer-saturating cycle run at ``tau_P``."""
    perf = engine_figures(g, d)
    return math.log(2.0) * d.bias_ratio / (2.0 * perf.tau_P)


def si_estimates(perf: Performance, units: UnitSystem = UnitSystem()):
    """Laboratory values of the engine figures."""
    return {
        "P_max_W": perf.P_max * units.power,
        "P_eta_max_W": perf.P_eta_max * units.power,
        "tau_P_s": perf.tau_P * units.time,
        "tau_eta_s": perf.tau_eta * units.time,
    }
