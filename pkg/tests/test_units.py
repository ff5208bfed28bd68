import math

import pytest
from scipy.constants import hbar, k

from adiacycle.units import UnitSystem, energy_to_si, power_to_si, time_to_si


def test_natural_scales_at_100_mK():
    u = UnitSystem(0.1)
    assert u.energy == pytest.approx(k * 0.1, rel=1e-15)
    assert u.time == pytest.approx(hbar / (k * 0.1), rel=1e-15)
    assert u.power == pytest.approx((k * 0.1) ** 2 / hbar, rel=1e-15)
    # roughly 76 ps and 18 fW
    assert 7.6e-11 < u.time < 7.7e-11
    assert 1.8e-14 < u.power < 1.9e-14


def test_power_is_energy_over_time():
    u = UnitSystem(0.25)
    assert u.power == pytest.approx(u.energy / u.time, rel=1e-14)


def test_conversions_are_linear():
    u = UnitSystem()
    assert time_to_si(3.0, u) == pytest.approx(3.0 * u.time)
    assert power_to_si(0.5, u) == pytest.approx(0.5 * u.power)
    assert energy_to_si(math.log(2), u) == pytest.approx(math.log(2) * k * 0.1)


def test_rejects_nonpositive_temperature():
    with pytest.raises(ValueError):
        UnitSystem(0.0)
