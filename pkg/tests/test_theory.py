import math

import numpy as np
import pytest
import scipy.optimize
import scipy.stats
from hypothesis import given, settings, strategies as st

from bootperc import theory

# ---------------------------------------------------------------------------
# special functions vs the scipy oracles
# ---------------------------------------------------------------------------


def test_psi_at_zero():
    for r in (2, 3, 7):
        assert theory.psi(0.0, r) == 0.0


def test_psi_r2_closed_form():
    # P(Po(y) >= 2) = 1 - e^-y (1 + y)
    for y in (0.1, 0.5, 1.0, 3.0, 10.0):
        assert theory.psi(y, 2) == pytest.approx(1 - math.exp(-y) * (1 + y), abs=1e-14)
    assert theory.psi(1.0, 2) == pytest.approx(1 - 2 / math.e, abs=1e-12)


def test_psi_negative_rejected():
    with pytest.raises(ValueError):
        theory.psi(-0.5, 2)


@pytest.mark.parametrize("r", [2, 3, 5, 12, 30])
def test_psi_matches_scipy(r):
    ys = np.concatenate([np.logspace(-8, 0, 20), np.linspace(0.5, 4 * r, 40)])
    ours = theory.psi(ys, r)
    ref = scipy.stats.poisson.sf(r - 1, ys)
    assert np.allclose(ours, ref, rtol=1e-10, atol=1e-300)


def test_pi_binom_examples():
    assert theory.pi_binom(1, 0.5, 2) == 0.0
    assert theory.pi_binom(2, 0.3, 2) == pytest.approx(0.09, abs=1e-15)
    # frozen: 1 - 0.7^5 - 5*0.3*0.7^4
    assert theory.pi_binom(5, 0.3, 2) == pytest.approx(
        1 - 0.7**5 - 5 * 0.3 * 0.7**4, abs=1e-14)


def test_pi_binom_floors_real_t():
    assert theory.pi_binom(5.9, 0.3, 2) == theory.pi_binom(5, 0.3, 2)


@pytest.mark.parametrize("r", [2, 3, 6])
@pytest.mark.parametrize("p", [1e-4, 0.02, 0.3, 0.9])
def test_pi_binom_matches_scipy(r, p):
    for t in (r, r + 1, 10, 57, 400):
        assert theory.pi_binom(t, p, r) == pytest.approx(
            scipy.stats.binom.sf(r - 1, t, p), rel=1e-11, abs=1e-300)


def test_nbinom_examples():
    assert theory.nbinom_pmf(2, 2, 0.4) == pytest.approx(0.16, abs=1e-15)
    assert theory.nbinom_pmf(3, 2, 0.5) == pytest.approx(0.25, abs=1e-15)
    assert theory.nbinom_pmf(1, 2, 0.5) == 0.0


def test_nbinom_normalizes():
    for r, p in [(2, 0.3), (3, 0.6), (5, 0.1)]:
        total = sum(theory.nbinom_pmf(k, r, p) for k in range(r, 4000))
        assert total == pytest.approx(1.0, abs=1e-9)


def test_nbinom_matches_scipy():
    for r, p in [(2, 0.3), (4, 0.05), (3, 0.9)]:
        for k in (r, r + 1, r + 7, 60):
            assert theory.nbinom_pmf(k, r, p) == pytest.approx(
                scipy.stats.nbinom.pmf(k - r, r, p), rel=1e-11)


@given(st.integers(2, 6), st.floats(1e-6, 0.5), st.integers(0, 2000))
@settings(max_examples=200, deadline=None)
def test_poisson_binomial_tv_bound(r, p, t):
    # |pi(t) - psi(tp)| < p, the total-variation bound
    assert abs(theory.pi_binom(t, p, r) - theory.psi(t * p, r)) < p


# ---------------------------------------------------------------------------
# thresholds and refined criticals
# ---------------------------------------------------------------------------


def test_thresholds_r2_plugin():
    t_c, a_c, _ = theory.thresholds(10**6, 2e-5, 2)
    assert t_c == pytest.approx(2500.0, rel=1e-12)
    assert a_c == pytest.approx(1250.0, rel=1e-12)


def test_thresholds_ratio_forced():
    for n, p, r in [(10**4, 1e-3, 2), (10**6, 1e-4, 3), (10**8, 1e-6, 5)]:
        t_c, a_c, _ = theory.thresholds(n, p, r)
        assert a_c / t_c == pytest.approx(1 - 1 / r, rel=1e-12)


def test_b_c_value():
    # derived: evaluate (bc) independently at np = 13.956
    n = 10**5
    p = 13.956 / n
    _, _, b_c = theory.thresholds(n, p, 2)
    expected = n * (p * n) * math.exp(-p * n)
    assert b_c == pytest.approx(expected, rel=1e-12)
    assert b_c == pytest.approx(1.21, abs=0.01)


def test_tc1_identity():
    for r in (2, 3, 4):
        for n in (10**4, 10**6, 10**8):
            for p in (1e-6, 1e-4, 1e-2):
                if p >= n ** (-1 / r):
                    continue
                t_c, _, _ = theory.thresholds(n, p, r)
                lhs = n * (p * t_c) ** r / math.factorial(r)
                assert lhs == pytest.approx(t_c / r, rel=1e-12)


def test_refined_critical_ratio():
    rc = theory.refined_critical(10**6, 2e-5, 2)
    _, a_c, _ = theory.thresholds(10**6, 2e-5, 2)
    assert 0.95 <= rc.a_c_star / a_c <= 1.05


def test_refined_critical_tcx_above_tc():
    for n, p, r in [(10**6, 2e-5, 2), (10**8, 1e-6, 2), (10**6, 1e-4, 3)]:
        t_c, _, _ = theory.thresholds(n, p, r)
        rc = theory.refined_critical(n, p, r)
        assert rc.t_c_star >= t_c


def test_refined_critical_expansion():
    # t_c* - t_c ~ p t_c^2/(r-1) within 20% at n=1e8, p=1e-6
    n, p, r = 10**8, 1e-6, 2
    t_c, _, _ = theory.thresholds(n, p, r)
    rc = theory.refined_critical(n, p, r)
    predicted = p * t_c**2 / (r - 1)
    assert rc.t_c_star - t_c == pytest.approx(predicted, rel=0.2)


def test_refined_critical_vs_scipy_minimizer():
    # independent route: bounded Brent on the same objective
    n, p, r = 10**6, 2e-5, 2
    t_c, _, _ = theory.thresholds(n, p, r)

    def g(t):
        ps = theory.psi(t * p, r)
        return (n * ps - t) / (1 - ps)

    res = scipy.optimize.minimize_scalar(g, bounds=(0, 3 * t_c), method="bounded",
                                         options={"xatol": 1e-8})
    rc = theory.refined_critical(n, p, r)
    assert rc.t_c_star == pytest.approx(res.x, rel=1e-6)
    assert rc.a_c_star == pytest.approx(-res.fun, rel=1e-10)


def test_pc_values():
    assert theory.pc(10**4, 100, 2) == pytest.approx((2 * 10**6) ** -0.5, rel=1e-12)
    # r = 2 closed form across sizes
    for n, a in [(10**6, 50), (10**8, 10**4)]:
        assert theory.pc(n, a, 2) == pytest.approx((2 * n * a) ** -0.5, rel=1e-12)


def test_pc_ac_inverse():
    n, a = 10**8, 10**4
    p = theory.pc(n, a, 2)
    _, a_c, _ = theory.thresholds(n, p, 2)
    assert 0.99 <= a_c / a <= 1.01


def test_pcx_close_to_pc_and_residual():
    for n, a, r in [(10**6, 1000, 2), (10**5, 300, 2), (10**6, 500, 3)]:
        p_star = theory.pcx(n, a, r)
        assert 0.95 <= p_star / theory.pc(n, a, r) <= 1.05
        resid = theory._h_inf(n, a, r, p_star) + a
        assert abs(resid) <= 1e-6 * a


def test_pcx_inverse_of_refined_critical():
    n, a, r = 10**6, 1000, 2
    p_star = theory.pcx(n, a, r)
    rc = theory.refined_critical(n, p_star, r)
    assert rc.a_c_star == pytest.approx(a, rel=1e-3)


# ---------------------------------------------------------------------------
# phi family and t_star
# ---------------------------------------------------------------------------


def test_phi_endpoints():
    for r in (2, 3, 5):
        assert theory.phi(0.0, r) == pytest.approx(0.0, abs=1e-12)
        assert theory.phi(1.0, r) == pytest.approx(1.0, abs=1e-12)


def test_phi_r2_closed_form():
    for alpha in (0.1, 0.5, 0.75, 0.9):
        assert theory.phi(alpha, 2) == pytest.approx(1 - math.sqrt(1 - alpha),
                                                     abs=1e-11)
    assert theory.phi(0.75, 2) == pytest.approx(0.5, abs=1e-11)


def test_phi_defining_equation_and_monotone():
    for r in (2, 3, 4):
        grid = np.linspace(0, 1, 1001)
        prev = -1.0
        for alpha in grid:
            ph = theory.phi(float(alpha), r)
            assert abs(r * ph - ph**r - (r - 1) * alpha) <= 1e-11
            assert ph >= prev
            prev = ph


def test_phi1_range():
    for r in (2, 3):
        assert theory.phi1(0.0, r) == 1.0
        assert theory.phi1(1.0, r) == pytest.approx(r / (r - 1), abs=1e-10)
        grid = np.linspace(0.001, 1, 200)
        vals = [theory.phi1(float(a), r) for a in grid]
        assert all(b >= a - 1e-9 for a, b in zip(vals, vals[1:]))
        assert all(1 - 1e-9 <= v <= r / (r - 1) + 1e-9 for v in vals)


def test_t_star_matches_phi_scaling():
    n, p, a, r = 10**6, 2e-5, 625, 2
    t_c, _, _ = theory.thresholds(n, p, r)
    ts = theory.t_star(n, p, a, r)
    assert 0.98 <= ts / (theory.phi(0.5, r) * t_c) <= 1.02
    resid = a + (n - a) * theory.psi(ts * p, r) - ts
    assert abs(resid) <= 1e-6 * ts


def test_t_star_supercritical_errors():
    with pytest.raises(ValueError, match="supercritical"):
        theory.t_star(10**6, 2e-5, 2500, 2)


def test_t_star_near_critical_expansion():
    # a = a_c* - sqrt(a_c): t_c* - t_* ~ sqrt(2 t_c (a_c*-a)/(r-1)) within 10%
    n, p, r = 10**6, 2e-5, 2
    t_c, a_c, _ = theory.thresholds(n, p, r)
    rc = theory.refined_critical(n, p, r)
    a = round(rc.a_c_star - math.sqrt(a_c))
    ts = theory.t_star(n, p, a, r)
    predicted = math.sqrt(2 * t_c * (rc.a_c_star - a) / (r - 1))
    assert rc.t_c_star - ts == pytest.approx(predicted, rel=0.10)


def test_tau_prediction_terms():
    n, p, a, r = 10**6, 2e-5, 2500, 2
    t_c, a_c, _ = theory.thresholds(n, p, r)
    a_star = theory.refined_critical(n, p, r).a_c_star
    term1 = math.pi * math.sqrt(2) / math.sqrt(r - 1) * math.sqrt(t_c / (a - a_star))
    term2 = math.log(math.log(n * p)) / math.log(r)  # log(a/a_c) = log 2 < 1
    term3 = math.log(n) / (n * p)
    assert theory.tau_prediction(n, p, a, r) == pytest.approx(
        term1 + term2 + term3, rel=1e-9)
    assert term2 == pytest.approx(1.58, abs=0.01)
    assert term3 == pytest.approx(0.69, abs=0.01)


def test_tau_prediction_regimes():
    # second-term dominance: p = n^-0.7, a = 2 a_c
    n, r = 10**6, 2
    p = n ** -0.7
    _, a_c, _ = theory.thresholds(n, p, r)
    pred = theory.tau_prediction(n, p, round(2 * a_c), r)
    assert abs(pred - math.log(math.log(n)) / math.log(r)) < 3.0
    # third term equals log n / loglog n when p = loglog n / n (and the
    # prediction contains it; its dominance is asymptotic)
    p = math.log(math.log(n)) / n
    _, a_c, _ = theory.thresholds(n, p, r)
    pred = theory.tau_prediction(n, p, round(2 * a_c), r)
    third = math.log(n) / (n * p)
    assert third == pytest.approx(math.log(n) / math.log(math.log(n)), rel=1e-9)
    assert pred > third


def test_tau_prediction_requires_supercritical():
    with pytest.raises(ValueError, match="not supercritical"):
        theory.tau_prediction(10**6, 2e-5, 625, 2)


# ---------------------------------------------------------------------------
# sparse-regime fixed point
# ---------------------------------------------------------------------------


def test_c_r_exact():
    assert theory.c_r(2) == 3.0
    assert theory.c_r(3) == 4.5
    assert theory.c_r(4) == 53 / 9


def test_f_boundary_endpoints():
    for c, th, r in [(2.0, 0.3, 2), (5.0, 0.1, 3)]:
        assert theory.f_boundary(0.0, c, th, r) == pytest.approx(th, abs=1e-14)
        expect_1 = -(1 - th) * (1 - theory.psi(c, r))
        assert theory.f_boundary(1.0, c, th, r) == pytest.approx(expect_1, abs=1e-12)
    assert theory.f_boundary(0.4, 0.0, 0.3, 2) == pytest.approx(0.3 - 0.4, abs=1e-14)


def test_boundary_roots_theta_zero():
    roots = theory.boundary_roots(1.5, 0.0, 2)
    assert roots[0] == 0.0


def test_boundary_roots_theta_one():
    roots = theory.boundary_roots(2.0, 1.0, 2)
    assert len(roots) == 1
    assert roots[0] == pytest.approx(1.0, abs=1e-9)


def test_boundary_roots_unique_below_ccr():
    for th in np.linspace(0.05, 0.95, 10):
        roots = theory.boundary_roots(2.0, float(th), 2)
        assert len(roots) == 1


def test_boundary_roots_residual_and_monotone():
    prev = -1.0
    for th in np.linspace(0.01, 0.99, 25):
        roots = theory.boundary_roots(2.5, float(th), 2)
        for x in roots:
            assert abs(theory.f_boundary(x, 2.5, float(th), 2)) < 1e-9
        assert roots[0] > prev  # strictly increasing in theta below c_r
        prev = roots[0]


def test_boundary_roots_three_in_fold_window():
    fold = theory.theta_fold(4.0, 2)
    inside = 0.5 * (fold.theta_cq + fold.theta_c)
    assert len(theory.boundary_roots(4.0, inside, 2)) == 3
    assert len(theory.boundary_roots(4.0, fold.theta_c + 0.05, 2)) == 1


def test_theta_fold_limit_at_ccr():
    fold = theory.theta_fold(3.0 + 1e-7, 2)
    assert fold.theta_c == pytest.approx(1 - math.e / 3, abs=1e-3)


def test_theta_cc_closed_forms():
    assert theory.theta_cc(2) == pytest.approx(1 - math.e / 3, abs=1e-10)
    assert theory.theta_cc(3) == pytest.approx(1 - math.e**2 / 9, abs=1e-10)
    assert theory.theta_cc(4) == pytest.approx(1 - 2 * math.e**3 / 53, abs=1e-10)


def test_theta_fold_no_fold_below_ccr():
    with pytest.raises(ValueError, match="no fold"):
        theory.theta_fold(2.9, 2)


def test_theta_cq_zero_threshold():
    # r=2: theta_cq hits 0 at c = 3.35091...
    lo, hi = 3.0 + 1e-6, 4.0
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if theory.theta_fold(mid, 2).theta_cq > 0:
            lo = mid
        else:
            hi = mid
    assert 0.5 * (lo + hi) == pytest.approx(3.35091, abs=1e-3)


def test_theta_c_decreasing_in_c():
    vals = [theory.theta_fold(c, 2).theta_c for c in (3.2, 3.6, 4.0, 5.0, 7.0)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_theta_fold_x_high_is_root():
    fold = theory.theta_fold(4.0, 2)
    assert abs(theory.f_boundary(fold.x_fold_high, 4.0, fold.theta_c, 2)) < 1e-9
    assert abs(theory.f_boundary(fold.x_fold_low, 4.0, fold.theta_c, 2)) < 1e-9
    assert fold.x_fold_high > fold.x_fold_low


# ---------------------------------------------------------------------------
# zeta estimate
# ---------------------------------------------------------------------------


def test_zeta_in_open_interval():
    est = theory.zeta_estimate(3, 1.0, 2, walks=20_000, seed=5)
    assert 0.0 < est.zeta < 1.0


def test_zeta_partition_exact():
    est = theory.zeta_estimate(2, 1.0, 2, walks=5_000, seed=6)
    assert est.zeta + sum(est.pmf_tail.values()) == pytest.approx(1.0, abs=1e-12)


def test_zeta_monotone_in_a():
    w = 40_000
    z3 = theory.zeta_estimate(3, 1.0, 2, walks=w, seed=7)
    z4 = theory.zeta_estimate(4, 1.0, 2, walks=w, seed=7)
    se = math.sqrt(0.25 / w)
    assert z4.zeta >= z3.zeta - 2 * se


def test_zeta_rejects_small_a():
    with pytest.raises(ValueError, match="a >= r"):
        theory.zeta_estimate(1, 1.0, 2, walks=10, seed=1)


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


def test_report_assembles():
    rep = theory.report(10**6, 2, p=2e-5, a=625)
    assert rep.t_star is not None and rep.tau_prediction is None
    rep2 = theory.report(10**6, 2, p=2e-5, a=2500)
    assert rep2.tau_prediction is not None and rep2.t_star is None
    assert rep2.p_c is not None and rep2.p_c_star is not None


def test_boundary_report():
    rep = theory.boundary_report(4.0, 0.02, 2)
    assert rep.c_r == 3.0
    assert rep.theta_c is not None
    assert rep.x0 <= rep.x1
    rep_low = theory.boundary_report(2.0, 0.3, 2)
    assert rep_low.theta_c is None and len(rep_low.roots) == 1
