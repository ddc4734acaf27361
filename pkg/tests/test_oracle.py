"""Quadrature oracle: integrands, switching integral, diagnostics."""

import math

import numpy as np
import pytest
from scipy.stats import qmc

from polaron_harvest import oracle
from polaron_harvest.oracle import (GaussianSwitching, Integrand, ModeCountError,
                                    TabulatedSwitching, TopHatSwitching, WindowError,
                                    finite_volume_l, l_term_numeric, m_numeric, q_beta_numeric,
                                    spectral_report)
from polaron_harvest.params import DimensionlessParams
from polaron_harvest.response import l_term_closed, m_minus_closed, m_plus_closed, q_beta_closed

# fractions above 1/xi at the reference point, from scipy.integrate.quad between sign changes
FRAC_ABS = {"L": 2.3559764873503776e-06, "M_plus": 7.862558065330938e-04, "M_minus": 4.559692170238985e-02}
FRAC_SIGNED = {"M_plus": 1.4997573319534623e-03, "M_minus": 1.2194731795289826e-01}
# 2 Q_beta for a top-hat of width sqrt(2 pi), W T = 1.3, k T = 0.65, by nested mpmath quadrature
TOPHAT_REF = 1.47484310923057084 - 1.66732505107161747j


def lhs_points(n, seed):
    pts = qmc.LatinHypercube(d=3, seed=seed).random(n)
    lo, hi = np.array([0.1, 0.0, 0.5]), np.array([3.0, 5.0, 12.0])
    for s_T, WT, L_T in qmc.scale(pts, lo, hi):
        yield DimensionlessParams(lambda_bar_sq=1.0, T_bar=1.0, Omega_bar=WT, sigma=s_T, L=L_T)


def close(a, b, rel=1e-8, floor=1e-16):
    return abs(a - b) <= max(rel * max(abs(a), abs(b)), floor)


def test_closed_forms_match_on_small_design():
    for p in lhs_points(30, seed=11):
        assert close(l_term_closed(p), l_term_numeric(p)), p
        m = m_numeric(p)
        assert close(m_plus_closed(p), m.real), p
        assert close(m_minus_closed(p), m.imag), p


def test_symmetric_special_case():
    p = DimensionlessParams(lambda_bar_sq=2.0, T_bar=0.8, Omega_bar=0.0, sigma=0.8, L=1.0)
    assert l_term_numeric(p) == pytest.approx(l_term_closed(p), rel=1e-12)
    # Omega = 0, sigma = T: L = lam T^2 / (2 pi) * 1 / (2 (2 T^2)^2)
    assert l_term_numeric(p) == pytest.approx(2.0 * 0.64 / (2 * math.pi) / (2 * (2 * 0.64) ** 2), rel=1e-12)


def test_zero_coupling():
    p = DimensionlessParams(0.0, 1.0, 1.0, 1.0, 2.0)
    assert l_term_numeric(p) == 0.0
    assert m_numeric(p) == 0j


def test_far_separation_is_negligible(peak_params):
    m = m_numeric(peak_params.replace(L=1e3 * peak_params.L))
    assert abs(m.imag) < 1e-16
    assert abs(m.real) < 1e-12 * abs(m_plus_closed(peak_params))


def test_tightening_tolerance_stays_within_error_estimate(peak_params):
    for fn in (oracle.l_term_numeric, oracle.m_plus_numeric, oracle.m_minus_numeric):
        loose = fn(peak_params, rel_tol=1e-8, full_output=True)
        tight = fn(peak_params, rel_tol=5e-9, full_output=True)
        assert abs(tight.value - loose.value) <= loose.error


@pytest.mark.parametrize("kind", oracle.KINDS)
def test_integrand_finite_and_decaying(kind, peak_params):
    f = Integrand(kind, peak_params)
    k = np.linspace(0, f.k_up(), 2001)
    v = f(k)
    assert np.all(np.isfinite(v))
    s2 = peak_params.sigma**2
    # beyond the bulk the magnitude sits below a sigma-Gaussian envelope
    big = k > 4 / peak_params.sigma
    scale = np.max(np.abs(v))
    assert np.all(np.abs(v[big]) <= scale * 1e3 * np.exp(-s2 * k[big] ** 2 / 2))


def test_integrand_rejects_unknown_kind(peak_params):
    with pytest.raises(ValueError):
        Integrand("Q", peak_params)


def test_q_beta_grid():
    ks = np.linspace(0.0, 4.0, 10)
    worst = 0.0
    for W in np.linspace(0.0, 3.0, 10):
        for T in np.linspace(0.2, 2.0, 10):
            p = DimensionlessParams(1.0, T, W, 0.5, 1.0)
            for k in ks:
                worst = max(worst, abs(q_beta_numeric(k, p) - q_beta_closed(k, p)))
    assert worst < 1e-6


def test_q_beta_origin():
    p = DimensionlessParams(1.0, 1.0, 0.0, 0.5, 1.0)
    # theta keeps half of (int beta)^2 = 2 pi, and the doubled convention restores it
    assert q_beta_numeric(0.0, p) == pytest.approx(2 * math.pi, rel=1e-12)


def test_q_beta_large_gap_keeps_relative_accuracy():
    p = DimensionlessParams(1.0, 1.0, 5.0, 0.5, 1.0)
    a, b = q_beta_numeric(0.7, p), q_beta_closed(0.7, p)
    assert abs(a - b) <= 1e-10 * abs(b)


def test_q_beta_top_hat():
    p = DimensionlessParams(1.0, 1.0, 1.3, 0.5, 1.0)
    val = q_beta_numeric(0.65, p, TopHatSwitching())
    assert val == pytest.approx(TOPHAT_REF, rel=1e-9)
    w = 1.7
    at_origin = q_beta_numeric(0.0, p.replace(Omega_bar=0.0), TopHatSwitching(w))
    assert at_origin == pytest.approx(w * w, rel=1e-12)


def test_q_beta_tabulated_gaussian():
    u = np.linspace(-10, 10, 2001)
    beta = TabulatedSwitching(u, np.exp(-u * u / 2))
    p = DimensionlessParams(1.0, 1.0, 0.8, 0.5, 1.0)
    assert abs(q_beta_numeric(0.9, p, beta) - q_beta_closed(0.9, p)) < 1e-4


def test_tabulated_from_file(tmp_path):
    t = np.linspace(-5e-4, 5e-4, 101)
    path = tmp_path / "beta.dat"
    np.savetxt(path, np.column_stack([t, np.exp(-(t / 1e-4) ** 2 / 2)]))
    beta = TabulatedSwitching.from_file(path, time_scale=1e-4)
    assert beta.default_window() == pytest.approx((-5.0, 5.0))
    assert beta(0.0) == pytest.approx(1.0)
    assert beta(7.0) == 0.0


def test_window_too_small():
    p = DimensionlessParams(1.0, 1.0, 0.5, 0.5, 1.0)
    with pytest.raises(WindowError):
        q_beta_numeric(0.3, p, GaussianSwitching(half_window=4.0))
    with pytest.raises(WindowError):
        q_beta_numeric(0.3, p, window=(-3.0, 3.0))


def test_spectral_report_reference(peak_params, rb_condensate):
    k_cut = 1 / rb_condensate.xi
    for kind, ref in FRAC_ABS.items():
        rep = spectral_report(Integrand(kind, peak_params), k_cut)
        assert rep.fraction_above_cutoff == pytest.approx(ref, rel=1e-7), kind
        assert rep.k_cut == k_cut
    for kind, ref in FRAC_SIGNED.items():
        rep = spectral_report(Integrand(kind, peak_params), k_cut, absolute=False)
        assert rep.fraction_above_cutoff == pytest.approx(ref, rel=1e-7), kind


def test_spectral_report_limits(peak_params):
    f = Integrand("M_minus", peak_params)
    assert spectral_report(f, 1e-9).fraction_above_cutoff == pytest.approx(1.0, abs=1e-9)
    assert spectral_report(f, 10 * f.k_up()).fraction_above_cutoff == 0.0
    with pytest.raises(ValueError):
        spectral_report(f, 0.0)


def test_signed_fraction_can_exceed_one(peak_params):
    # at 2 pi x 35 kHz the signed M_minus integral nearly cancels
    p = peak_params.replace(Omega_bar=2 * math.pi * peak_params.Omega_bar,
                            sigma=peak_params.sigma / math.sqrt(2 * math.pi))
    rep = spectral_report(Integrand("M_minus", p), 1 / 1.226293712e-7, absolute=False)
    assert rep.fraction_above_cutoff > 1.0
    assert spectral_report(Integrand("M_minus", p), 1 / 1.226293712e-7).fraction_above_cutoff <= 1.0


def test_finite_volume_converges(peak_params):
    ref = l_term_numeric(peak_params)
    width = max(peak_params.sigma, peak_params.T_bar)
    devs = [abs(finite_volume_l(peak_params, f * width) - ref) / ref for f in (12.5, 25.0, 50.0)]
    assert devs[0] > devs[1] > devs[2]
    assert devs[2] < 0.01


def test_finite_volume_suppressed_modes():
    p = DimensionlessParams(1.0, 1.0, 50.0, 1.0, 0.0)
    assert finite_volume_l(p, 40.0, k_max=1.0) < 1e-300


def test_finite_volume_guard(peak_params):
    with pytest.raises(ModeCountError):
        finite_volume_l(peak_params, 1e4 * peak_params.T_bar)
    with pytest.raises(ValueError):
        finite_volume_l(peak_params, 0.0)


def test_integrand_samples_csv(tmp_path, peak_params):
    path = tmp_path / "fig4.csv"
    k = np.linspace(0, 2e7, 11)
    oracle.write_integrand_samples(path, peak_params, k)
    lines = path.read_text().splitlines()
    assert lines[0] == "k,L,M_plus,M_minus"
    assert len(lines) == 12
    assert float(lines[-1].split(",")[0]) == pytest.approx(0.02)
