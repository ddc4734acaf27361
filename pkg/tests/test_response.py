"""Closed-form observables, negativity and the two-detector state."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polaron_harvest.params import DimensionlessParams, Experiment, ParameterError
from polaron_harvest.response import (SMALL_SEPARATION, DegenerateGeometryError, HarvestResult,
                                      PerturbativeRegimeError, assemble_state, harvest,
                                      l_cross_closed_or_numeric, l_term_closed, m_minus_closed,
                                      m_plus_closed, negativity, partial_transpose,
                                      q_beta_closed, signaling_estimator, state_negativity)

# 40-digit mpmath quadrature of the defining k-integrals
PEAK_REF = {
    "l_term": 1.926396371393039888e-4,
    "m_plus": 1.781469437616115669e-4,
    "m_minus_im": -1.579510549878968607e-4,
    "l_cross": 3.183441788018748950e-5,
    "negativity": 4.544620734413524475e-5,
}
GENERIC = DimensionlessParams(lambda_bar_sq=1.0, T_bar=1.3, Omega_bar=0.7, sigma=0.4, L=3.1)
GENERIC_REF = {"l_term": 0.002326927764009346285, "m_plus": -0.002334125987404746371,
               "m_minus_im": -0.002909626380702203628}
# 2 Q_beta at k = 0.8, Omega_bar = 0.7, T_bar = 1.3 by mpmath quadrature
Q_REF = 0.9306956761638142186 - 1.654987732007954265j

dimless = st.builds(
    DimensionlessParams,
    lambda_bar_sq=st.floats(1e-3, 1e3),
    T_bar=st.floats(0.05, 20.0),
    Omega_bar=st.floats(0.0, 5.0),
    sigma=st.floats(0.05, 20.0),
    L=st.floats(0.0, 50.0),
)


def test_peak_values(peak_params):
    r = harvest(peak_params)
    for name, ref in PEAK_REF.items():
        assert getattr(r, name) == pytest.approx(ref, rel=1e-12), name
    assert r.signaling == 0.0


def test_generic_values():
    assert l_term_closed(GENERIC) == pytest.approx(GENERIC_REF["l_term"], rel=1e-13)
    assert m_plus_closed(GENERIC) == pytest.approx(GENERIC_REF["m_plus"], rel=1e-13)
    assert m_minus_closed(GENERIC) == pytest.approx(GENERIC_REF["m_minus_im"], rel=1e-13)


def test_l_term_order_of_magnitude(peak_params):
    assert 1e-4 < l_term_closed(peak_params) < 1e-2


def test_l_term_decoupled_and_adiabatic():
    assert l_term_closed(GENERIC.replace(lambda_bar_sq=0.0)) == 0.0
    far = GENERIC.replace(Omega_bar=500.0)
    assert 0.0 <= l_term_closed(far) < 1e-300
    assert m_plus_closed(far) == 0.0


def test_l_term_negative_gap_is_finite_and_larger():
    neg = GENERIC.replace(Omega_bar=-0.7)
    assert l_term_closed(neg) > l_term_closed(GENERIC)
    huge = GENERIC.replace(Omega_bar=-400.0)
    assert math.isfinite(l_term_closed(huge))


@pytest.mark.parametrize("bad", [dict(T_bar=0.0), dict(sigma=-1.0)])
def test_domain_errors(bad):
    with pytest.raises(ParameterError):
        l_term_closed(GENERIC.replace(**bad))


def test_q_beta_closed():
    q = GENERIC.replace(T_bar=1.3, Omega_bar=0.7)
    assert q_beta_closed(0.8, q) == pytest.approx(Q_REF, rel=1e-14)
    zero = q_beta_closed(0.0, q)
    assert zero.imag == 0.0
    assert zero.real == pytest.approx(2 * math.pi * math.exp(-(0.7 * 1.3) ** 2), rel=1e-15)
    assert abs(q_beta_closed(1e6, q)) < 1e-5
    assert q_beta_closed(np.array([0.0, 0.8]), q).shape == (2,)


def test_m_plus_limits():
    assert abs(m_plus_closed(GENERIC.replace(L=1e4))) < 1e-11
    ratio = m_plus_closed(GENERIC) / m_plus_closed(GENERIC.replace(Omega_bar=0.0))
    assert ratio == pytest.approx(math.exp(-(1.3 * 0.7) ** 2), rel=1e-14)


def test_m_plus_large_separation_branch_is_continuous():
    S = GENERIC.sigma**2 + GENERIC.T_bar**2
    L6 = 12.0 * math.sqrt(S)
    below = m_plus_closed(GENERIC.replace(L=np.nextafter(L6, 0)))
    above = m_plus_closed(GENERIC.replace(L=L6))
    assert above == pytest.approx(below, rel=1e-12)


def test_m_plus_far_field_is_algebraic():
    # the half-line sine transform leaves a positive lam^2 T^2 exp(-T^2 W^2) / (pi L^4) tail
    pref = GENERIC.T_bar**2 * math.exp(-(GENERIC.T_bar * GENERIC.Omega_bar) ** 2)
    L = 1e5
    assert m_plus_closed(GENERIC.replace(L=L)) == pytest.approx(pref / (math.pi * L**4), rel=1e-8)


def test_m_minus_limits():
    assert abs(m_minus_closed(GENERIC.replace(T_bar=1e-9))) < 1e-9
    assert m_minus_closed(GENERIC.replace(L=200.0)) == 0.0


@pytest.mark.parametrize("f", [m_plus_closed, m_minus_closed])
def test_small_separation_branch_is_continuous(f):
    S = GENERIC.sigma**2 + GENERIC.T_bar**2
    L0 = SMALL_SEPARATION * math.sqrt(S)
    below = f(GENERIC.replace(L=np.nextafter(L0, 0)))
    above = f(GENERIC.replace(L=L0))
    assert above == pytest.approx(below, rel=1e-9)
    assert f(GENERIC.replace(L=0.0)) == pytest.approx(below, rel=1e-9)
    # the series branch must match the general formula somewhat further out too
    mid = f(GENERIC.replace(L=1e-3 * math.sqrt(S)))
    assert mid == pytest.approx(f(GENERIC.replace(L=0.0)), rel=1e-5)


def test_negative_separation_rejected():
    with pytest.raises(ParameterError):
        GENERIC.replace(L=-1.0)
    # bypass the dataclass check to reach the function's own guard
    bad = GENERIC.replace()
    object.__setattr__(bad, "L", -1.0)
    with pytest.raises(DegenerateGeometryError):
        m_plus_closed(bad)
    with pytest.raises(DegenerateGeometryError):
        m_minus_closed(bad)


@settings(max_examples=300, deadline=None)
@given(L=st.floats(1e-3, 1e3), T=st.floats(1e-3, 1e3), s=st.floats(1e-3, 1e3))
def test_exponent_combination_identity(L, T, s):
    lhs = -L**2 / (4 * s**2) + L**2 * T**2 / (4 * s**2 * (s**2 + T**2))
    rhs = -L**2 / (4 * (s**2 + T**2))
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12 * L**2 / s**2)


def test_negativity_examples():
    assert negativity(0.5, 0.5) == 0.0
    assert negativity(1e-3, 1.1e-3) == pytest.approx(1e-4, rel=1e-12)
    assert negativity(2e-3, 1e-3) == 0.0


def test_signaling_examples():
    assert signaling_estimator(0.0, 0.0) == 0.0
    assert signaling_estimator(1e-4, 0.0) == 0.0
    assert signaling_estimator(2e-5, 2e-5) == 1.0
    assert signaling_estimator(3e-5, 2e-5) == 1.0
    assert signaling_estimator(1e-5, 4e-5) == 0.25


def test_l_cross_limits(peak_params):
    p0 = peak_params.replace(L=0.0)
    assert l_cross_closed_or_numeric(p0) == pytest.approx(l_term_closed(p0), rel=1e-8)
    assert abs(l_cross_closed_or_numeric(peak_params.replace(L=1e3 * peak_params.L))) < 1e-6 * l_term_closed(peak_params)
    lc = l_cross_closed_or_numeric(peak_params)
    assert 0 < lc < l_term_closed(peak_params)


def test_l_cross_bounded_by_l_term():
    rng = np.random.default_rng(7)
    for _ in range(100):
        p = DimensionlessParams(lambda_bar_sq=1.0, T_bar=1.0, Omega_bar=rng.uniform(0, 5),
                                sigma=rng.uniform(0.1, 3), L=rng.uniform(0, 12))
        assert abs(l_cross_closed_or_numeric(p)) <= l_term_closed(p) * (1 + 1e-10)


@settings(max_examples=60, deadline=None)
@given(p=dimless, c=st.floats(1e-6, 1e6))
def test_linear_in_coupling(p, c):
    q = p.replace(lambda_bar_sq=c * p.lambda_bar_sq)
    for f in (l_term_closed, m_plus_closed, m_minus_closed):
        assert f(q) == pytest.approx(c * f(p), rel=1e-12, abs=1e-300)
    r1, r2 = harvest(p, cross=False), harvest(q, cross=False)
    assert (r1.m_abs > r1.l_term) == (r2.m_abs > r2.l_term)


@settings(max_examples=100, deadline=None)
@given(p=dimless)
def test_result_invariants(p):
    r = harvest(p, cross=False)
    assert r.l_term >= 0
    assert r.m_abs**2 == pytest.approx(r.m_plus**2 + r.m_minus_im**2, rel=1e-12, abs=1e-300)
    assert r.negativity == max(r.m_abs - r.l_term, 0.0)
    assert 0.0 <= r.signaling <= 1.0


def test_negativity_vanishes_far_apart():
    p = GENERIC.replace(L=1e4)
    r = harvest(p, cross=False)
    assert r.negativity == 0.0


def test_harvest_result_zero_and_row():
    z = HarvestResult.zero()
    assert z.as_row() == (0.0,) * 7
    assert z.m == 0j


def test_assemble_state_vacuum():
    rho = assemble_state(0.0, 0.0, 0.0, 0.0)
    expect = np.zeros((4, 4))
    expect[0, 0] = 1.0
    assert np.array_equal(rho, expect)


def test_assemble_state_structure():
    m = 3e-4 - 2e-4j
    rho = assemble_state(1e-3, 2e-3, 5e-4 + 1e-5j, m)
    assert np.allclose(rho, rho.conj().T, atol=1e-14, rtol=0)
    assert abs(np.trace(rho) - 1) < 1e-14
    assert rho[0, 3] == np.conj(m) and rho[3, 0] == m
    zero_positions = [(0, 1), (0, 2), (1, 0), (2, 0), (1, 3), (2, 3), (3, 1), (3, 2), (3, 3)]
    assert all(rho[i, j] == 0 for i, j in zero_positions)


def test_assemble_state_rejects_overflow():
    with pytest.raises(PerturbativeRegimeError):
        assemble_state(0.6, 0.5, 0.0, 0.0)


def test_partial_transpose_moves_coherence():
    rho = np.arange(16, dtype=complex).reshape(4, 4)
    expect = np.array([[0, 4, 2, 6], [1, 5, 3, 7], [8, 12, 10, 14], [9, 13, 11, 15]])
    assert np.array_equal(partial_transpose(rho), expect)


def test_state_negativity_matches_formula(peak_params):
    # without L_AB the PT spectrum gives max(|M| - L, 0) exactly
    r = harvest(peak_params)
    rho = assemble_state(r.l_term, r.l_term, 0.0, r.m)
    assert state_negativity(rho) == pytest.approx(r.negativity, rel=1e-10)
    # with L_AB the {gg, ee} block adds a fourth-order piece
    rho = assemble_state(r.l_term, r.l_term, r.l_cross, r.m)
    assert abs(state_negativity(rho) - r.negativity) <= 2 * r.l_cross**2


def test_state_negativity_zero_when_noise_wins():
    rho = assemble_state(1e-3, 1e-3, 0.0, 5e-4)
    assert state_negativity(rho) == 0.0
