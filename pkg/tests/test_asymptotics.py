"""Model-domain asymptotics: critical constants, Laplace engine, profiles."""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import gamma

from tubekernels import (
    DomainError,
    L_growth,
    L_rate_probe,
    LaplaceProblem,
    PhiSpline,
    alpha_critical,
    beta_critical,
    growth_constant_a,
    laplace_leading,
    log_L,
    log_phi,
    model_domain,
    model_phi,
    model_profile_pair,
    phase_p,
    phase_q,
    phi_l_growth,
    phi_rate_probe,
    predict,
    rational_domain,
)

# see test_quadrature.py; direct-quadrature value of K(0,1) for f = x^4
K4_AXIS = 0.02175172310013568
MODEL_PHI_TAU1 = 0.021751723100191148
PAIR_TAU07 = (0.028940662945575037, 0.017958243491657592)


def _richardson_slope(fn, t, h=1e-3):
    d = lambda hh: (fn(t + hh) - fn(t - hh)) / (2.0 * hh)
    return (4.0 * d(h / 2) - d(h)) / 3.0


def test_critical_points_are_stationary():
    for m in (1, 2, 3, 5):
        p = phase_p(m)
        q = phase_q(m)
        assert abs(_richardson_slope(p.phase, alpha_critical(m))) <= 1e-10
        assert abs(_richardson_slope(q.phase, beta_critical(m))) <= 1e-10


def test_growth_constant_is_minus_phase_minimum():
    for m in (1, 2, 3, 4):
        p = phase_p(m)
        assert math.isclose(
            growth_constant_a(m), -p.phase(alpha_critical(m)), rel_tol=1e-14
        )
        # the companion phase is normalized to equal -1 at its minimum
        q = phase_q(m)
        assert math.isclose(q.phase(beta_critical(m)), 1.0, rel_tol=1e-12)


def test_laplace_gaussian_is_exact():
    prob = LaplaceProblem(lambda t: t * t, lambda t: 1.0, "lam", 0.0, (-3.0, 3.0))
    lv, corr = laplace_leading(prob, 2.5)
    assert math.isclose(lv, 0.5 * math.log(2.0 * math.pi / 5.0), abs_tol=1e-12)
    assert corr <= 1e-10


def test_laplace_matches_quadrature_with_correction_margin():
    prob = phase_p(2)
    al = alpha_critical(2)
    corrs = {}
    for lam in (40.0, 400.0, 4000.0):
        lv, corr = laplace_leading(prob, lam)
        corrs[lam] = corr
        # integrate a window of many peak widths; a whole-domain reference
        # drops half the peak once it gets narrow enough
        w = 30.0 / math.sqrt(lam)
        ref, _ = quad(
            lambda t, l=lam: math.exp(-l * prob.phase(t) - lv),
            max(0.0, al - w), al + w, epsabs=1e-15, epsrel=1e-13, limit=200,
        )
        # leading order is off by the first correction ~ corr; allow 3x
        assert abs(ref - 1.0) <= 3.0 * corr + 1e-6
    assert corrs[400.0] < corrs[40.0]  # correction shrinks like 1/lambda
    assert corrs[4000.0] < corrs[400.0]


def test_laplace_searches_minimum_when_not_given():
    given = phase_p(3)
    searched = LaplaceProblem(given.phase, given.amplitude, "lam", None, given.domain)
    lv_a, _ = laplace_leading(given, 25.0)
    lv_b, _ = laplace_leading(searched, 25.0)
    assert math.isclose(lv_a, lv_b, rel_tol=0, abs_tol=1e-10)


def test_laplace_rejects_boundary_minimum():
    prob = LaplaceProblem(lambda t: t, lambda t: 1.0, "lam", None, (0.1, 2.0))
    with pytest.raises(DomainError):
        laplace_leading(prob, 50.0)


def test_log_phi_axis_matches_gamma():
    # int exp(-w^(2m)) dw = 2 Gamma(1 + 1/(2m))
    assert math.isclose(log_phi(0.0, 2), math.log(2.0 * gamma(1.25)), abs_tol=1e-10)
    assert math.isclose(log_phi(0.0, 3), math.log(2.0 * gamma(7.0 / 6.0)), abs_tol=1e-10)


def test_log_phi_against_library_quadrature():
    for v in (1.0, 5.0):
        ref, _ = quad(
            lambda w, vv=v: math.exp(-(w**4) + vv * w), -12.0, 12.0,
            epsabs=1e-13, epsrel=1e-13,
        )
        assert math.isclose(log_phi(v, 2), math.log(ref), rel_tol=0, abs_tol=1e-9)


def test_phi_spline_tracks_the_function():
    sp = PhiSpline(2, 30.0)
    for v in (0.0, 0.37, 3.1, 12.0, 29.0):
        assert math.isclose(float(sp(v)), log_phi(v, 2), rel_tol=0, abs_tol=1e-6)


def test_log_l_monotone_and_rate():
    sp = PhiSpline(2, 400.0)
    vals = [log_L(u, sp) for u in (1.5, 2.0, 2.5, 3.0)]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    measured, expected = L_rate_probe(2)
    assert abs(measured / expected - 1.0) <= 0.01


def test_phi_rate_probe_hits_growth_constant():
    measured, expected = phi_rate_probe(2)
    assert math.isclose(expected, growth_constant_a(2), rel_tol=1e-14)
    assert abs(measured / expected - 1.0) <= 0.01


def test_growth_laws_are_exact_fractions():
    power, scale = phi_l_growth(2, 0)
    assert power == Fraction(-1, 3) and scale == growth_constant_a(2)
    power, _ = phi_l_growth(3, 2)
    assert power == Fraction(0, 1)
    with pytest.raises(DomainError):
        phi_l_growth(1, 0)
    power, in_exponent = L_growth(2, 1)
    assert power == Fraction(2) and in_exponent is True
    # 1/phi contributes n = m-1, closing the u-power bookkeeping at 2m-2
    assert L_growth(2, 1)[0] == Fraction(2 * 2 - 2)


def test_model_phi_matches_direct_kernel_and_freeze():
    val = model_phi(2, 1.0, 1.0)
    assert math.isclose(val, MODEL_PHI_TAU1, rel_tol=1e-9)
    assert math.isclose(val, K4_AXIS, rel_tol=1e-8)


def test_model_profile_pair_frozen_and_positive():
    lk, ls = model_profile_pair(2, 1.0, 0.7)
    assert math.isclose(math.exp(lk), PAIR_TAU07[0], rel_tol=1e-9)
    assert math.isclose(math.exp(ls), PAIR_TAU07[1], rel_tol=1e-9)


def test_model_profile_scaled_sweep_stays_bounded():
    taus = np.linspace(0.05, 1.0, 8)
    scaled_k = []
    scaled_s = []
    for tau in taus:
        lk, ls = model_profile_pair(2, 1.0, float(tau))
        scaled_k.append(math.exp(lk) * tau**3)
        scaled_s.append(math.exp(ls) * tau**2)
    for series in (scaled_k, scaled_s):
        arr = np.array(series)
        assert np.all(np.isfinite(arr)) and np.all(arr > 0)
        assert arr.max() / arr.min() < 100.0


def test_model_profile_validation():
    with pytest.raises(DomainError):
        model_profile_pair(2, 1.0, 0.0)
    with pytest.raises(DomainError):
        model_profile_pair(2, 1.0, 1.2)
    with pytest.raises(DomainError):
        model_profile_pair(2, -1.0, 0.5)


def test_predict_reports_exponents_and_coefficient():
    f = model_domain(3)
    pb = predict(f, "bergman", 0.8)
    ps = predict(f, "szego", 0.8)
    assert pb.exponent == Fraction(7, 3)
    assert ps.exponent == Fraction(4, 3)
    assert pb.log_term_expected and ps.log_term_expected
    assert pb.c0_tau > 0 and ps.c0_tau > 0
    assert pb.tau == 0.8
    assert pb.chart_id
    with pytest.raises(DomainError):
        predict(f, "hardy", 0.8)
    # exponents depend only on m, not the profile shape
    pr = predict(rational_domain(3), "bergman", 0.8)
    assert pr.exponent == pb.exponent
