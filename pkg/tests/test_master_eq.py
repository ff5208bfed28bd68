import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from adiacycle.errors import DomainError
from adiacycle.master_eq import (
    CONTROLS,
    adiabatic_response,
    build_rate_matrix,
    frozen_state,
    heat_current,
    oracle_coefficients,
    thermal_response,
)
from adiacycle.qubit_model import BathParams, FieldPoint, kappa, lambda_matrix, lambda_vector

BATH = BathParams()
radii = st.floats(0.2, 6.0)
angles = st.floats(0.05, np.pi / 2 - 0.05)


def polar(b_r, phi):
    return np.array(FieldPoint.from_polar(b_r, phi))


@given(radii, angles, st.floats(0.5, 2.0), st.floats(0.5, 2.0))
def test_trace_is_conserved(b_r, phi, t_c, t_h):
    m = build_rate_matrix(polar(b_r, phi), (t_c, t_h), BATH)
    # d(rho11 + rho22)/dt for every basis state
    assert np.max(np.abs(m.generator[0] + m.generator[3])) <= 1e-12


@given(radii, angles)
def test_frozen_state_is_gibbs(b_r, phi):
    st_ = frozen_state(build_rate_matrix(polar(b_r, phi), (1.0, 1.0), BATH))
    p = st_.p.real
    assert p[0] + p[3] == pytest.approx(1.0, abs=1e-14)
    assert p[0] == pytest.approx(np.exp(b_r) / (2 * np.cosh(b_r)), abs=1e-10)
    assert st_.gibbs_check <= 1e-10


def test_frozen_coherence_recorded():
    p = frozen_state(build_rate_matrix(polar(1.0, np.pi / 4), (1.0, 1.0), BATH)).p
    # no coherent steady state survives at equal temperatures for this model
    assert abs(p[1]) < 1e-10


def test_cold_coupling_diagonal_on_z_axis():
    m = build_rate_matrix((1.5, 0.0), (1.0, 1.0), BATH)
    xi = m.basis.T @ np.diag([1.0, -1.0]) @ m.basis
    assert abs(xi[0, 1]) < 1e-15
    # so the cold bath alone drives no population transfer
    pops = m.dissipators["c"][np.ix_([0, 3], [0, 3])]
    np.testing.assert_allclose(pops, 0.0, atol=1e-15)


def test_origin_is_a_domain_error():
    with pytest.raises(DomainError):
        build_rate_matrix((0.0, 0.0), (1.0, 1.0), BATH)


@given(radii, angles)
def test_adiabatic_kernels_are_traceless_and_linear(b_r, phi):
    resp = adiabatic_response(polar(b_r, phi), BATH)
    for k in resp.dp_dB:
        assert abs(k[0] + k[3]) <= 1e-12
    v = np.array([0.3, -0.7])
    np.testing.assert_allclose(resp.correction(2 * v), 2 * resp.correction(v), rtol=1e-14, atol=1e-16)


@given(radii, angles)
def test_oracle_dissipation_tensor_matches_closed_form(b_r, phi):
    p = polar(b_r, phi)
    o = oracle_coefficients(p, BATH)
    lam = o.lambda_matrix
    assert abs(lam[0, 1] - lam[1, 0]) <= 1e-8 * np.abs(lam).max()
    assert np.all(np.linalg.eigvalsh(0.5 * (lam + lam.T)) >= -1e-10)
    np.testing.assert_allclose(lam, lambda_matrix(p, BATH), rtol=1e-6, atol=1e-6 * np.abs(lam).max())


@given(radii, angles)
def test_oracle_pumped_heat_matches_closed_form(b_r, phi):
    p = polar(b_r, phi)
    vec = oracle_coefficients(p, BATH).lambda_vector
    ref = lambda_vector(p)
    np.testing.assert_allclose(vec, ref, rtol=1e-6, atol=1e-6 * np.abs(ref).max())


def test_oracle_kappa_vanishes_on_axis():
    kap, _ = thermal_response((2.0, 0.0), BATH)
    assert abs(kap) < 1e-12


def test_oracle_kappa_is_positive_and_proportional_to_closed_form():
    # the oracle conductance tracks the closed form up to a constant factor;
    # the absolute comparison lives in the acceptance suite
    ratios = []
    for b_r, phi in [(0.5, 0.3), (1.0, np.pi / 4), (3.0, 1.2), (5.0, 0.7)]:
        p = polar(b_r, phi)
        kap, _ = thermal_response(p, BATH)
        assert kap > 0
        ratios.append(kap / kappa(p, BATH))
    np.testing.assert_allclose(ratios, ratios[0], rtol=1e-6)


def test_heat_current_vanishes_in_frozen_state():
    m = build_rate_matrix(polar(1.2, 0.4), (1.0, 1.0), BATH)
    p = frozen_state(m).p
    assert abs(heat_current(m, p, "c")) < 1e-14
    assert abs(heat_current(m, p, "h")) < 1e-14


def test_equilibrium_conservative_power_is_exact_differential():
    # closed loop of Tr[dH/dB rho^f] . dB at equal temperatures
    n = 256
    t = 2 * np.pi * np.arange(n) / n
    pts = np.array([1.2 + 0.8 * np.cos(t), 0.9 + 0.5 * np.sin(t)])
    vel = np.array([-0.8 * np.sin(t), 0.5 * np.cos(t)])
    total = 0.0
    for k in range(n):
        m = build_rate_matrix(pts[:, k], (1.0, 1.0), BATH)
        rho = m.basis @ frozen_state(m).rho.real @ m.basis.T
        force = np.array([np.trace(op @ rho) for op in CONTROLS])
        total += force @ vel[:, k] * (2 * np.pi / n)
    assert abs(total) <= 1e-8
