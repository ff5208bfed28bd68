import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import dblquad

from adiacycle.errors import DomainError
from adiacycle.qubit_model import (
    EPS_MIN,
    BathParams,
    FieldPoint,
    berry_curvature,
    crossover_radii,
    kappa,
    lambda_eigenvalues,
    lambda_kappa_max_eigenvalue,
    lambda_matrix,
    lambda_vector,
    spectral_density,
    threshold_coupling,
)

radii = st.floats(0.05, 20.0)
angles = st.floats(0.0, 2 * np.pi, exclude_max=True)


def polar(b_r, phi):
    return np.array(FieldPoint.from_polar(b_r, phi))


# -- oracles from direct evaluation of the closed forms ----------------------


def test_spectral_density_values(bath):
    assert spectral_density(0.0, bath) == 0.0
    assert spectral_density(-1.0, bath) == 0.0
    assert spectral_density(120.0, bath) == pytest.approx(24.0 * np.exp(-1.0), rel=1e-14)


def test_eigenvalues_at_unit_radius(bath):
    g2 = 0.4 * np.exp(-1.0 / 60.0)
    lam_r, lam_phi = lambda_eigenvalues(1.0, bath)
    assert lam_r == pytest.approx(np.sinh(1.0) / (g2 * np.cosh(1.0) ** 3), rel=1e-13)
    assert lam_phi == pytest.approx(g2 / 4.0, rel=1e-13)


def test_radial_eigenvalue_small_field_limit(bath):
    # leading correction is 2 B_r / eps_C
    lam_r, _ = lambda_eigenvalues(1e-5, bath)
    assert lam_r == pytest.approx(1.0 / (2.0 * bath.gamma_bar), rel=1e-6)


def test_eigenvalues_do_not_overflow_far_out(bath):
    lam_r, lam_phi = lambda_eigenvalues(np.array([50.0, 300.0]), bath)
    assert np.all(np.isfinite(lam_r)) and np.all(lam_r >= 0)
    assert np.all(np.isfinite(lam_phi))


def test_eigenvectors_are_radial_and_tangential(bath):
    for phi in np.linspace(0.1, 6.2, 7):
        p = polar(1.3, phi)
        m = lambda_matrix(p, bath)
        lam_r, lam_phi = lambda_eigenvalues(1.3, bath)
        radial = np.array([np.cos(phi), np.sin(phi)])
        tangential = np.array([-np.sin(phi), np.cos(phi)])
        np.testing.assert_allclose(m @ radial, lam_r * radial, rtol=1e-12, atol=1e-14)
        np.testing.assert_allclose(m @ tangential, lam_phi * tangential, rtol=1e-12, atol=1e-14)


def test_origin_guard(bath):
    with pytest.raises(DomainError):
        lambda_matrix((0.0, EPS_MIN / 2), bath)


def test_lambda_vector_examples():
    np.testing.assert_array_equal(lambda_vector((2.0, 0.0)), [0.0, 0.0])
    v = lambda_vector(polar(1.0, np.pi / 2))
    assert np.linalg.norm(v) == pytest.approx(1.0 / np.cosh(1.0) ** 2, rel=1e-13)
    assert v[1] > 0


def test_kappa_examples(bath):
    assert kappa((1.0, 0.0), bath) == 0.0
    assert kappa((0.0, 1.0), bath) == 0.0
    g2 = 0.4 * np.exp(-1.0 / 60.0)
    assert kappa(polar(1.0, np.pi / 4), bath) == pytest.approx(g2 / np.sinh(2.0), rel=1e-12)
    assert kappa((0.0, 0.0), bath) == 0.0


def test_kappa_maximal_on_diagonal(bath):
    phi = np.linspace(0, np.pi / 2, 2001)
    vals = kappa(polar(1.7, phi), bath)
    assert phi[np.argmax(vals)] == pytest.approx(np.pi / 4, abs=1e-3)


def test_curvature_closed_form():
    r, phi = 1.4, 0.6
    expected = -np.sin(2 * phi) / np.cosh(r) ** 2
    assert berry_curvature(polar(r, phi)) == pytest.approx(expected, rel=1e-12)


def test_curvature_quadrant_integral_is_ln2():
    val, _ = dblquad(lambda r, phi: berry_curvature(polar(r, phi)) * r, 0, np.pi / 2, 0, 40,
                     epsabs=1e-12, epsrel=1e-12)
    assert abs(val) == pytest.approx(np.log(2.0), rel=1e-9)


def test_lambda_k_max_eigenvalue(bath):
    p = polar(2.0, 0.3)
    lam = max(lambda_eigenvalues(2.0, bath))
    assert lambda_kappa_max_eigenvalue(p, bath) == pytest.approx(kappa(p, bath) * lam, rel=1e-14)


def test_crossover_radii_examples():
    pair = crossover_radii(BathParams(0.2, 120.0))
    assert pair is not None
    low, high = pair
    assert low < 1.0 < high
    for b in (low, high):
        lam_r, lam_phi = lambda_eigenvalues(b, BathParams(0.2, 120.0))
        assert lam_r == pytest.approx(lam_phi, rel=1e-7)
    assert crossover_radii(BathParams(0.7, 120.0)) is None


def test_threshold_coupling():
    g = threshold_coupling()
    assert g == pytest.approx(0.566, abs=0.01)
    assert crossover_radii(BathParams(g * 0.99, 1e12)) is not None
    assert crossover_radii(BathParams(g * 1.01, 1e12)) is None


# -- properties -------------------------------------------------------------


@given(radii, angles)
def test_coefficients_nonnegative_and_vector_radial(b_r, phi):
    bath = BathParams()
    p = polar(b_r, phi)
    assert np.all(np.linalg.eigvalsh(lambda_matrix(p, bath)) >= -1e-15)
    assert kappa(p, bath) >= 0
    tangential = np.array([-np.sin(phi), np.cos(phi)])
    assert abs(lambda_vector(p) @ tangential) <= 1e-12


@given(radii, angles, angles)
def test_eigenvalues_depend_only_on_radius(b_r, phi1, phi2):
    bath = BathParams()
    e1 = np.linalg.eigvalsh(lambda_matrix(polar(b_r, phi1), bath))
    e2 = np.linalg.eigvalsh(lambda_matrix(polar(b_r, phi2), bath))
    # eigvalsh resolves eigenvalues to rounding relative to the matrix norm
    np.testing.assert_allclose(e1, e2, rtol=1e-12, atol=1e-12 * e1.max())


@given(st.floats(-4, 4), st.floats(-4, 4))
def test_curvature_antisymmetric_under_axis_reflection(z, x):
    c = berry_curvature((z, x))
    assert berry_curvature((-z, x)) == pytest.approx(-c, abs=1e-15)
    assert berry_curvature((z, -x)) == pytest.approx(-c, abs=1e-15)


def test_curvature_matches_finite_differences(rng):
    h = 1e-4
    for _ in range(100):
        r = rng.uniform(0.2, 6.0)
        phi = rng.uniform(0, 2 * np.pi)
        z, x = polar(r, phi)
        d_lx_dz = (lambda_vector((z + h, x))[1] - lambda_vector((z - h, x))[1]) / (2 * h)
        d_lz_dx = (lambda_vector((z, x + h))[0] - lambda_vector((z, x - h))[0]) / (2 * h)
        fd = d_lx_dz - d_lz_dx
        assert berry_curvature((z, x)) == pytest.approx(fd, rel=1e-5, abs=1e-12)
