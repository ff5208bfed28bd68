"""Natural units and SI conversion.

Internally energies are measured in k_B T (T is the cold-bath temperature),
actions in hbar, so times are in hbar/(k_B T) and beta = 1.  SI only shows up
when reporting laboratory estimates.
"""

from dataclasses import dataclass

from scipy.constants import hbar as HBAR
from scipy.constants import k as K_B

__all__ = ["HBAR", "K_B", "UnitSystem", "time_to_si", "power_to_si", "energy_to_si"]


@dataclass(frozen=True)
class UnitSystem:
    temperature_kelvin: float = 0.1

    def __post_init__(self):
        if not self.temperature_kelvin > 0:
            raise ValueError("temperature_kelvin must be positive")

    @property
    def energy(self) -> float:
        """k_B T in joules."""
        return K_B * self.temperature_kelvin

    @property
    def time(self) -> float:
        """hbar/(k_B T) in seconds."""
        return HBAR / self.energy

    @property
    def power(self) -> float:
        """(k_B T)^2/hbar in watts."""
        return self.energy**2 / HBAR


def time_to_si(t_natural, units: UnitSystem):
    return t_natural * units.time


def power_to_si(p_natural, units: UnitSystem):
    return p_natural * units.power


def energy_to_si(e_natural, units: UnitSystem):
    return e_natural * units.energy
