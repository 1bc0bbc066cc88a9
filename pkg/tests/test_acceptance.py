"""Acceptance suite: every advertised numerical contract, one test each.

Each test prints a single ``criterion N (...): PASS`` line (run pytest with
``-s`` to see them) and enforces its own wall-clock budget.  The criteria:

1. dual profile D against closed forms (quadratic exact, quartic axis)
2. exact kernel homogeneity ratios on the quartic model axis
3. blow-up exponents -(2 + 1/m) and -(1 + 1/m) from fixed-tau fits
4. model profile Phi(tau): direct-kernel match at tau = 1, boundedness in tau
5. growth constants of phi and L, stationarity of the phase critical points
6. localization: agreeing domains keep a bounded kernel difference
7. strictly pseudoconvex distance limit against the Levi determinant
8. blow-up chart contracts: chi identity, derivative floor, polar roundtrip
9. normalized Bergman representation differs from direct by a bounded term
"""

from __future__ import annotations

import math
import time

import numpy as np
from scipy.special import gamma

from tubekernels import (
    ApproachPath,
    BlowupChart,
    BoundaryRelativePoint,
    PolarPoint,
    QuadratureConfig,
    alpha_critical,
    beta_critical,
    bergman_normalized,
    blowup_exponent,
    compute_D,
    default_rho_grid,
    direct_pair,
    evaluate_path,
    fit_exponent,
    from_polar,
    growth_constant_a,
    hormander_check,
    localization_experiment,
    L_rate_probe,
    mollify,
    model_domain,
    model_phi,
    damp_tails,
    phase_p,
    phase_q,
    phi_rate_probe,
    to_polar,
)


def _finish(t0: float, budget_s: float, label: str, detail: str) -> None:
    elapsed = time.monotonic() - t0
    print(f"{label}: PASS {detail} elapsed={elapsed:.1f}s")
    assert elapsed < budget_s, f"{label} exceeded its {budget_s:.0f}s budget"


def test_criterion_1_dual_profile_closed_forms():
    t0 = time.monotonic()
    cfg = QuadratureConfig(rel_tol=1e-10)
    worst = 0.0

    f2 = model_domain(1)
    for z1 in (-2.0, -1.0, 0.0, 1.0, 2.0):
        for z2 in (0.25, 0.5, 1.0, 2.0, 4.0):
            lv, _ = compute_D(f2, z1, z2, cfg)
            exact = math.sqrt(math.pi / z2) * math.exp(z1**2 / (4 * z2))
            worst = max(worst, abs(math.exp(lv) / exact - 1.0))

    f4 = model_domain(2)
    for z2 in (0.25, 0.5, 1.0, 2.0, 4.0):
        lv, _ = compute_D(f4, 0.0, z2, cfg)
        exact = 2.0 * gamma(1.25) * z2**-0.25
        worst = max(worst, abs(math.exp(lv) / exact - 1.0))

    assert worst <= 1e-8
    _finish(t0, 5.0, "criterion 1 (dual profile closed forms)",
            f"max_rel_err={worst:.2e}")


def test_criterion_2_quartic_axis_homogeneity():
    t0 = time.monotonic()
    cfg = QuadratureConfig(rel_tol=1e-8)
    f = model_domain(2)
    worst = 0.0
    for y in (1.0, 0.25):
        K1, S1 = direct_pair(f, BoundaryRelativePoint(0.0, y), cfg)
        K2, S2 = direct_pair(f, BoundaryRelativePoint(0.0, y / 2), cfg)
        worst = max(worst, abs(K2.value / K1.value / 2.0**2.5 - 1.0))
        worst = max(worst, abs(S2.value / S1.value / 2.0**1.5 - 1.0))
    assert worst <= 1e-6
    _finish(t0, 120.0, "criterion 2 (quartic axis homogeneity)",
            f"max_ratio_err={worst:.2e}")


def test_criterion_3_blowup_exponent_fits():
    t0 = time.monotonic()
    cfg = QuadratureConfig(rel_tol=1e-7)
    grid = default_rho_grid(15)
    details = []
    for m in (2, 3):
        f = model_domain(m)
        for tau in (1.0, 0.7):
            path = ApproachPath("fixed_tau", {"tau": tau}, grid)
            rows = evaluate_path(f, path, cfg)
            good = [r for r in rows if r["status"] == "ok"]
            assert len(good) >= 12, f"m={m} tau={tau}: too many failed points"
            rhos = np.array([r["rho"] for r in good])
            for kind in ("bergman", "szego"):
                fit = fit_exponent([r[kind] for r in good], rhos, "trailing:6")
                expo = float(blowup_exponent(m, kind))
                rel = abs(fit.slope + expo) / expo
                details.append(f"m={m} tau={tau} {kind}: {fit.slope:.4f}")
                assert rel <= 0.01, (
                    f"m={m} tau={tau} {kind}: slope {fit.slope:.4f}, want -{expo}"
                )
    _finish(t0, 1200.0, "criterion 3 (blow-up exponent fits)",
            "; ".join(details))


def test_criterion_4_model_profile_matches_and_stays_bounded():
    t0 = time.monotonic()
    f = model_domain(2)
    K, _ = direct_pair(f, BoundaryRelativePoint(0.0, 1.0), QuadratureConfig(rel_tol=1e-8))
    phi1 = model_phi(2, 1.0, 1.0)
    rel = abs(phi1 / K.value - 1.0)
    assert rel <= 0.02

    taus = np.linspace(0.05, 1.0, 20)
    scaled = np.array([model_phi(2, 1.0, float(t)) * float(t) ** 3 for t in taus])
    assert np.all(np.isfinite(scaled)) and np.all(scaled > 0)
    ratio = float(scaled.max() / scaled.min())
    assert ratio < 1e3
    # no divergence toward the admissible edge
    assert scaled[0] / scaled[-1] < 10.0
    _finish(t0, 600.0, "criterion 4 (model profile)",
            f"tau1_rel_err={rel:.2e} bounded_ratio={ratio:.2f}")


def test_criterion_5_growth_constants_and_stationarity():
    t0 = time.monotonic()
    measured, expected = phi_rate_probe(2, v=40.0)
    assert math.isclose(expected, growth_constant_a(2), rel_tol=1e-14)
    assert math.isclose(expected, 4.0 ** (-1 / 3) - 4.0 ** (-4 / 3), rel_tol=1e-14)
    phi_rel = abs(measured / expected - 1.0)
    assert phi_rel <= 0.01

    measured_l, expected_l = L_rate_probe(2, u=3.2)
    assert expected_l == 1.0
    l_rel = abs(measured_l / expected_l - 1.0)
    assert l_rel <= 0.01

    def richardson_slope(fn, t, h=1e-3):
        d = lambda hh: (fn(t + hh) - fn(t - hh)) / (2 * hh)
        return (4.0 * d(h / 2) - d(h)) / 3.0

    sp = abs(richardson_slope(phase_p(2).phase, alpha_critical(2)))
    sq = abs(richardson_slope(phase_q(2).phase, beta_critical(2)))
    assert sp <= 1e-10 and sq <= 1e-10
    _finish(t0, 300.0, "criterion 5 (growth constants)",
            f"phi_rel={phi_rel:.2e} L_rel={l_rel:.2e} "
            f"stationarity=({sp:.1e},{sq:.1e})")


def test_criterion_6_localization_bounded_difference():
    t0 = time.monotonic()
    f1 = model_domain(2)
    f2 = damp_tails(f1, 0.5)
    report = localization_experiment(
        f1, f2,
        ApproachPath("fixed_tau", {"tau": 1.0}, default_rho_grid(11)),
        QuadratureConfig(rel_tol=1e-10),
        agreement_radius=0.5,
    )
    assert report["passed"], report
    assert report["slopes_ok"] and report["bounded"]
    s1 = report["fit_k1"]["slope"]
    s2 = report["fit_k2"]["slope"]
    assert abs(s1 + 2.5) <= 0.025 and abs(s2 + 2.5) <= 0.025
    if report["diff_below_noise"]:
        diff_part = "diff below quadrature noise"
    else:
        diff_part = f"diff_slope={report['fit_diff']['slope']:.3f} >= -0.1"
        assert report["fit_diff"]["slope"] >= -0.1
    _finish(t0, 1200.0, "criterion 6 (localization)",
            f"k1_slope={s1:.4f} k2_slope={s2:.4f} {diff_part}")


def test_criterion_7_distance_limit_vs_levi():
    t0 = time.monotonic()
    measured, predicted, ratio = hormander_check(
        model_domain(2), 1.0, QuadratureConfig(rel_tol=1e-8)
    )
    assert abs(ratio - 1.0) <= 0.05
    _finish(t0, 600.0, "criterion 7 (distance limit)",
            f"measured={measured:.6e} predicted={predicted:.6e} ratio={ratio:.6f}")


def test_criterion_8_chart_contracts():
    t0 = time.monotonic()
    chart = BlowupChart(2)
    for u in np.linspace(0.0, 1.0 / 3.0, 1000):
        assert chart.chi(float(u)) == float(u)
    for u in np.linspace(0.0, 1.0, 10_000):
        assert chart.chi_prime(float(u)) >= 0.5

    f = model_domain(2)
    rng = np.random.default_rng(410)
    worst = 0.0
    for _ in range(1000):
        q = PolarPoint(
            tau=float(rng.uniform(0.05, 0.999)),
            rho=float(np.exp(rng.uniform(math.log(1e-4), 0.0))),
            branch=int(rng.choice([-1, 1])),
        )
        p = from_polar(f, chart, q)
        back = to_polar(f, chart, p)
        assert back.branch == q.branch
        worst = max(worst, abs(back.tau - q.tau), abs(back.rho - q.rho) / q.rho)
    assert worst <= 1e-10
    _finish(t0, 5.0, "criterion 8 (chart contracts)",
            f"roundtrip_worst={worst:.2e}")


def test_criterion_9_normalized_representation_difference_bounded():
    t0 = time.monotonic()
    f = mollify(model_domain(2), 0.1)
    cfg = QuadratureConfig(rel_tol=1e-10)
    rhos = default_rho_grid(11)
    diffs, noise = [], 0.0
    for rho in rhos:
        p = BoundaryRelativePoint(0.0, float(rho))
        K, _ = direct_pair(f, p, cfg)
        Kbar = bergman_normalized(f, p, cfg)
        diffs.append(abs(K.value - Kbar.value))
        noise = max(
            noise,
            10.0 * max(K.value * K.err_estimate, Kbar.value * Kbar.err_estimate),
        )
    if max(diffs[-6:]) <= noise:
        detail = "difference below quadrature noise"
    else:
        fit = fit_exponent(diffs, rhos, "trailing:6")
        assert fit.slope >= -0.1, f"difference grows at rate {fit.slope:.3f}"
        detail = f"diff_slope={fit.slope:.3f} >= -0.1"
    _finish(t0, 900.0, "criterion 9 (normalized representation)", detail)
