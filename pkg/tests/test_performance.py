import json
import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import minimize_scalar

from adiacycle.errors import OrientationError
from adiacycle.geometry import GeomSummary, summarize
from adiacycle.performance import (
    Drive,
    cooling_power,
    cop,
    cycle_figures,
    efficiency,
    engine_figures,
    limiting_power,
    power,
    refrigerator_figures,
    si_estimates,
    work_and_heat,
)
from adiacycle.trajectory import Ellipse

D = Drive()
LN2 = math.log(2.0)
BEST_11 = Ellipse((1.0, 1.0), 0.89590959, 1.08874569, np.pi / 4, -1)


def synthetic(area, l2, kap, l2_eff=None, kap_eff=None):
    """Summary with given functionals; efficiency values default to the power ones."""
    l2_eff = l2 if l2_eff is None else l2_eff
    kap_eff = kap if kap_eff is None else kap_eff
    return GeomSummary(
        area, l2, l2_eff * kap_eff,
        {"uniform": l2, "power": l2, "efficiency": l2_eff},
        {"uniform": kap, "power": kap, "efficiency": kap_eff},
    )


summaries = st.builds(
    synthetic,
    st.floats(1e-3, 0.69),
    st.floats(0.1, 50.0),
    st.floats(1e-5, 1e-1),
)


@pytest.fixture(scope="module")
def best():
    return summarize(BEST_11)


@given(summaries)
def test_timescale_identity(g):
    f = cycle_figures(g.area_A, g.length_L2["power"], g.mean_kappa["power"], D)
    assert f.tau_kappa / f.tau_D == pytest.approx(f.x - 1.0, rel=1e-10)
    assert f.tau_eta >= f.tau_P
    assert f.x >= 1.0 and 0.0 <= f.eta_max < 1.0


@given(summaries)
def test_power_peaks_at_tau_p(g):
    perf = engine_figures(g, D)
    res = minimize_scalar(lambda lt: -power(g, D, math.exp(lt)), bracket=(math.log(perf.tau_P) - 1, math.log(perf.tau_P) + 1),
                          tol=1e-12)
    assert math.exp(res.x) == pytest.approx(perf.tau_P, rel=1e-3)
    assert -res.fun == pytest.approx(perf.P_max, rel=1e-10)
    taus = perf.tau_P * np.array([0.9, 0.99, 1.01, 1.1])
    assert np.all(power(g, D, taus) < perf.P_max)


@given(summaries)
def test_efficiency_peaks_at_tau_eta(g):
    perf = engine_figures(g, D)
    lt0 = math.log(perf.tau_eta)
    res = minimize_scalar(lambda lt: -efficiency(g, D, math.exp(lt)), bracket=(lt0 - 1, lt0 + 1), tol=1e-12)
    assert math.exp(res.x) == pytest.approx(perf.tau_eta, rel=1e-3)
    assert -res.fun / D.eta_carnot == pytest.approx(perf.eta_max, rel=1e-9)


@given(summaries)
def test_efficiency_at_max_power_two_ways(g):
    perf = engine_figures(g, D)
    direct = efficiency(g, D, perf.tau_P, profile="power") / D.eta_carnot
    assert direct == pytest.approx(perf.eta_Pmax, rel=1e-10)


def test_efficiencies_increase_with_x():
    xs = np.linspace(1.01, 200.0, 400)
    figs = [cycle_figures(1.0, 1.0, 1.0 / (x - 1.0), D) for x in xs]
    assert np.all(np.diff([f.eta_max for f in figs]) > 0)
    assert np.all(np.diff([f.eta_Pmax for f in figs]) > 0)
    assert figs[-1].eta_Pmax < 0.5


def test_work_limits():
    g = synthetic(0.3, 2.0, 1e-3)
    perf = engine_figures(g, D)
    w, _ = work_and_heat(g, D, perf.tau_P)
    assert w == pytest.approx(0.3 * D.eta_carnot / 2, rel=1e-12)
    w_inf, _ = work_and_heat(g, D, 1e12)
    assert w_inf == pytest.approx(0.3 * D.eta_carnot, rel=1e-9)
    landauer = synthetic(LN2, 0.0, 1e-3)
    w_lim, _ = work_and_heat(landauer, D, 1.0)
    assert w_lim == pytest.approx(D.eta_carnot * LN2)
    with pytest.raises(ValueError):
        work_and_heat(g, D, 0.0)


def test_zero_area_has_no_output():
    f = cycle_figures(0.0, 2.0, 1e-3, D)
    assert f.x == 1.0 and f.eta_max == 0.0 and f.P_max == 0.0


def test_no_heat_leak_reaches_carnot():
    perf = engine_figures(synthetic(0.5, 2.0, 0.0), D)
    assert perf.saturated and perf.eta_max == 1.0
    out = perf.as_dict()
    json.dumps(out)
    assert out["x"] is None and out["tau_eta"] is None
    near = engine_figures(synthetic(0.5, 2.0, 1e-14), D)
    assert near.eta_max > 0.999


def test_orientation_is_enforced():
    g = synthetic(0.3, 2.0, 1e-3)
    neg = synthetic(-0.3, 2.0, 1e-3)
    with pytest.raises(OrientationError, match="reverse"):
        engine_figures(neg, D)
    with pytest.raises(OrientationError, match="reverse"):
        refrigerator_figures(g, D)


def test_refrigerator_mirrors_engine(best):
    rev = summarize(BEST_11.reversed())
    fridge = refrigerator_figures(rev, D)
    assert fridge.cop_max == pytest.approx(engine_figures(best, D).eta_max, rel=1e-10)
    t = fridge.tau_eta_prime
    assert cop(rev, D, t) * D.bias_ratio == pytest.approx(fridge.cop_max, rel=1e-10)
    assert cooling_power(rev, D, t) == pytest.approx(fridge.cooling_power_at_cop_max, rel=1e-10)
    grid = t * np.array([0.9, 1.1])
    assert np.all(cop(rev, D, grid) * D.bias_ratio < fridge.cop_max)


def test_refrigerator_limits():
    assert refrigerator_figures(synthetic(-1e-9, 2.0, 1e-3), D).cop_max < 1e-6
    assert refrigerator_figures(synthetic(-0.3, 2.0, 0.0), D).cop_max == 1.0


def test_limiting_power():
    g = synthetic(LN2, 3.0, 1e-3)
    assert engine_figures(g, D).P_max / limiting_power(g, D) == pytest.approx(1.0, rel=1e-12)
    g2 = synthetic(LN2, 6.0, 1e-3)
    assert limiting_power(g2, D) == pytest.approx(limiting_power(g, D) / 2, rel=1e-12)


def test_figures_of_the_power_optimum_at_11(best):
    perf = engine_figures(best, D)
    si = si_estimates(perf)
    assert si["P_max_W"] == pytest.approx(0.341e-18, rel=0.15)
    assert si["tau_P_s"] == pytest.approx(48.8e-9, rel=0.15)
    assert perf.eta_Pmax == pytest.approx(0.23, abs=0.03)
    assert perf.eta_max == pytest.approx(0.34, abs=0.04)
    assert perf.P_max / limiting_power(best, D) == pytest.approx(0.70, abs=0.07)


def test_drive_validation():
    with pytest.raises(ValueError):
        Drive(0.0)
    with pytest.raises(ValueError):
        Drive(0.05, "pump")
    with pytest.warns(UserWarning, match="linear-response"):
        Drive(0.3)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        Drive(0.2)
