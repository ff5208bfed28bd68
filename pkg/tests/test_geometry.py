import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adiacycle.errors import UnsupportedCurveError
from adiacycle.geometry import (
    area_flux,
    area_line,
    canonical_profile,
    engine_oriented,
    geodesic_length,
    length_L2,
    mean_kappa,
    summarize,
)
from adiacycle.qubit_model import BathParams, berry_curvature, kappa
from adiacycle.trajectory import (
    CircularSector,
    Ellipse,
    FourierLoop,
    Polyline,
    Reparametrized,
    SpeedProfile,
    sample,
)

from strategies import ellipses, random_ellipses

BATH = BathParams()
LN2 = np.log(2.0)
# power optimum at center (1, 1), engine orientation
BEST_11 = Ellipse((1.0, 1.0), 0.89590959, 1.08874569, np.pi / 4, -1)


def wobble(amp, k):
    return SpeedProfile.from_function(lambda s: s + amp / (2 * np.pi * k) * np.sin(2 * np.pi * k * s))


profiles = st.builds(wobble, st.floats(-0.8, 0.8), st.integers(1, 4))


@settings(max_examples=15)
@given(ellipses())
def test_reversal_negates_area_only(e):
    r = e.reversed()
    assert area_line(r) == pytest.approx(-area_line(e), rel=1e-12, abs=1e-15)
    for metric in ("dissipation", "efficiency"):
        assert geodesic_length(r, metric) == pytest.approx(geodesic_length(e, metric), rel=1e-12)
    p = SpeedProfile.uniform()
    assert mean_kappa(r, p) == pytest.approx(mean_kappa(e, p), rel=1e-10)


def test_engine_oriented_has_positive_area():
    for c in (BEST_11, BEST_11.reversed(), CircularSector(5.0, np.pi / 2)):
        assert area_line(engine_oriented(c)) > 0


def test_stokes_consistency_on_random_ellipses(rng):
    for e in random_ellipses(rng, 5):
        line = area_line(e)
        assert abs(area_flux(e) - line) <= 1e-4 * abs(line)


@pytest.mark.parametrize(
    "c",
    [
        CircularSector(3.0, 1.0, 0.3),
        Polyline([[1.0, 1.0], [3.0, 0.5], [2.0, 3.0]]),
        FourierLoop([[1.5, 1.5], [1.0, 0.0], [0.1, 0.2]], [[0.0, 0.0], [0.0, 1.0], [0.0, -0.1]]),
    ],
)
def test_stokes_consistency_on_other_families(c):
    line = area_line(c)
    assert abs(area_flux(c) - line) <= 1e-4 * abs(line)


def test_quadrant_sector_reaches_landauer():
    c = CircularSector(20.0, np.pi / 2, np.pi / 4)
    assert abs(area_line(c) + LN2) <= 1e-3
    assert abs(area_flux(c) + LN2) <= 1e-3
    assert abs(area_line(c.reversed()) - LN2) <= 1e-3


def _half_plane_curves(rng, n):
    """Random simple curves in the half plane ``B_x > 0`` (star-shaped polygons and ellipses)."""
    out = []
    while len(out) < n:
        if len(out) % 2:
            center = np.array([rng.uniform(-5, 5), rng.uniform(0.5, 6)])
            k = rng.integers(3, 9)
            ang = np.sort(rng.uniform(0, 2 * np.pi, k))
            rad = rng.uniform(0.2, 1.0, k) * center[1]
            verts = center[:, None] + rad * np.array([np.cos(ang), np.sin(ang)])
            if np.unique(ang).size == k:
                out.append(Polyline(verts.T, int(rng.choice([1, -1]))))
        else:
            a, b = rng.uniform(0.1, 4.0, 2)
            cx = max(a, b) + rng.uniform(1e-3, 3.0)
            out.append(Ellipse((rng.uniform(-5, 5), cx), a, b, rng.uniform(0, np.pi), int(rng.choice([1, -1]))))
    return out


def test_landauer_ceiling_on_half_plane_curves(rng):
    worst = max(abs(area_line(c)) for c in _half_plane_curves(rng, 200))
    assert worst <= LN2 + 1e-6


def test_two_lobe_curves_can_exceed_landauer():
    # the curvature has the same sign in the first and third quadrants; a
    # simple curve around both lobes pumps more than one quadrant does
    lobes = Polyline([
        [0.02, 0.0], [20.0, 0.0], [20.0, 20.0], [0.0, 20.0], [0.0, 0.02],
        [-0.02, 0.0], [-20.0, 0.0], [-20.0, -20.0], [0.0, -20.0], [0.0, -0.02],
    ])
    assert abs(area_line(lobes)) > 1.9 * LN2
    assert abs(area_flux(lobes) - area_line(lobes)) <= 1e-4 * abs(area_line(lobes))


def test_tiny_circle_limits():
    center = (1.0, 1.5)
    e = Ellipse(center, 1e-3, 1e-3)
    g = summarize(e)
    curv_max = np.max(np.abs(berry_curvature(sample(e, 64).position)))
    assert abs(g.area_A) <= curv_max * np.pi * 1e-6 * (1 + 1e-6)
    assert g.geodesic_L2 < 1e-4 and g.geodesic_Lk2 < 1e-4
    assert g.mean_kappa["uniform"] == pytest.approx(kappa(np.array(center), BATH), rel=1e-3)


def test_area_shrinks_quadratically():
    a1 = area_line(Ellipse((1.0, 1.5), 1e-2, 1e-2))
    a2 = area_line(Ellipse((1.0, 1.5), 5e-3, 5e-3))
    assert a1 / a2 == pytest.approx(4.0, rel=1e-3)


def test_degenerate_ellipse_has_no_flux():
    e = Ellipse((1.0, 2.0), 1.5, 1e-10, 0.3)
    assert abs(area_flux(e)) < 1e-8
    assert abs(area_line(e)) < 1e-8


def test_self_intersection_is_rejected():
    bowtie = Polyline([[1.0, 1.0], [3.0, 3.0], [3.0, 1.0], [1.0, 3.0]])
    with pytest.raises(UnsupportedCurveError):
        area_flux(bowtie)


def test_curve_on_axis_has_no_heat_leak():
    c = Polyline([[1.0, 0.0], [3.0, 0.0], [2.0, 0.0]])
    assert mean_kappa(c, SpeedProfile.uniform()) == 0.0


@settings(max_examples=10)
@given(ellipses(), profiles)
def test_mean_kappa_between_extremes(e, prof):
    k = kappa(sample(e, 4096).position, BATH)
    m = mean_kappa(e, prof)
    assert k.min() * (1 - 1e-9) <= m <= k.max() * (1 + 1e-9)


@settings(max_examples=10)
@given(ellipses(), profiles)
def test_efficiency_cauchy_schwarz(e, prof):
    lhs = length_L2(e, prof) * mean_kappa(e, prof)
    assert lhs >= geodesic_length(e, "efficiency") ** 2 * (1 - 1e-9)
    assert length_L2(e, prof) >= geodesic_length(e) ** 2 * (1 - 1e-9)


@settings(max_examples=5)
@given(ellipses())
def test_efficiency_profile_saturates_bound(e):
    prof = canonical_profile(e, "efficiency")
    lhs = length_L2(e, prof) * mean_kappa(e, prof)
    assert lhs == pytest.approx(geodesic_length(e, "efficiency") ** 2, rel=1e-6)


@settings(max_examples=10)
@given(ellipses(), st.lists(profiles, min_size=2, max_size=2))
def test_functionals_are_reparametrization_invariant(e, pair):
    base = geodesic_length(e)
    areas = []
    for prof in pair:
        r = Reparametrized(e, prof)
        assert abs(geodesic_length(r) - base) <= 1e-9 * base
        areas.append(area_line(r))
    assert abs(areas[0] - areas[1]) <= 1e-9


def test_uniform_profile_is_strictly_suboptimal():
    e = Ellipse((0.5, 0.5), 3.0, 0.5, 0.2)
    assert length_L2(e, SpeedProfile.uniform()) > 1.05 * geodesic_length(e) ** 2


@settings(max_examples=8)
@given(ellipses())
def test_summary_invariants(e):
    g = summarize(e)
    for name in ("uniform", "power", "efficiency"):
        assert g.geodesic_L2 <= g.length_L2[name] + 1e-9
        assert g.mean_kappa[name] >= 0
    assert g.length_L2["power"] == pytest.approx(g.geodesic_L2, rel=1e-12)
    assert g.length_L2["efficiency"] * g.mean_kappa["efficiency"] == pytest.approx(g.geodesic_Lk2, rel=1e-8)


def test_summary_matches_tabulated_profiles():
    g = summarize(BEST_11)
    for name in ("power", "efficiency"):
        prof = canonical_profile(BEST_11, name)
        assert length_L2(BEST_11, prof) == pytest.approx(g.length_L2[name], rel=1e-6)
        assert mean_kappa(BEST_11, prof) == pytest.approx(g.mean_kappa[name], rel=1e-6)
    prof = SpeedProfile.uniform()
    assert length_L2(BEST_11, prof) == pytest.approx(g.length_L2["uniform"], rel=1e-8)


def test_power_optimum_at_11():
    g = summarize(BEST_11)
    assert g.area_A > 0
    assert g.area_A**2 / g.geodesic_L2 == pytest.approx(0.0302, rel=0.02)


def test_sector_efficiency_ratio_diverges_with_radius():
    ratios, leaks = [], []
    for radius in (2.0, 5.0, 10.0, 20.0):
        g = summarize(CircularSector(radius, np.pi / 2, np.pi / 4))
        ratios.append(g.area_A**2 / g.geodesic_Lk2)
        leaks.append(g.mean_kappa["efficiency"])
    assert np.all(np.diff(ratios) > 0)
    assert ratios[-1] > 1e6 * ratios[0]
    assert leaks[-1] < 1e-6 * leaks[0]


def test_summary_is_deterministic():
    assert summarize(BEST_11) == summarize(BEST_11)
