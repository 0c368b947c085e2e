import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate as sci_integrate

from gaussmeans.convexity import (
    classify_monomial_means,
    corollary_c_bound,
    d_functional,
    delta1_bracket,
    delta_functional,
    g0,
    g0_root,
    g0_scaled,
    proof_diagnostics,
    remark_DF,
    remark_F,
    remark_G,
    remark_G_scaled,
    remark_H,
    remark_H_prime,
    remark_J,
    remark_J_prime,
    remark_linear_analysis,
    second_differences,
    series_convexity_check,
    three_circles_check,
)
from gaussmeans.core import weighted_power_integral, weighted_power_integral_derivs
from gaussmeans.errors import DomainError
from gaussmeans.means import means_monomial
from gaussmeans.polynomial import PowerSeriesFunction as P

E = math.e


def quad(fn, a, b):
    return sci_integrate.quad(fn, a, b, epsabs=0, epsrel=1e-13, limit=400)[0]


def fd(fn, x, h=1e-5):
    return (fn(x + h) - fn(x - h)) / (2 * h)


# --- D functional -------------------------------------------------------------

def test_d_functional_examples():
    for x in (0.3, 2.0):
        assert d_functional(x, 1.0, 0.0, x) == pytest.approx(0.0, abs=1e-15)
        assert d_functional(4.0, 0.0, 0.0, x) == 0.0
    assert d_functional(E, E, E, 1.0) == pytest.approx(1.0, rel=1e-15)
    with pytest.raises(DomainError):
        d_functional(0.0, 1.0, 1.0, 1.0)


def _delta_oracle(lam, alpha, x):
    """D(f_lam) - D(f_0) with scipy values for f and closed-form derivatives."""
    out = []
    for mu in (lam, 0.0):
        h = quad(lambda t: t**mu * math.exp(-alpha * t), 0, x)
        h1, h2, _ = weighted_power_integral_derivs(mu, alpha, x)
        out.append(h1 / h + x * h2 / h - x * (h1 / h) ** 2)
    return out[0] - out[1]


def test_delta_examples():
    assert delta_functional(0.0, 1.0, 2.0) == 0.0
    neg = delta_functional(1.0, 1.0, 1.0)
    assert neg < 0
    assert neg == pytest.approx(_delta_oracle(1.0, 1.0, 1.0), rel=1e-9)
    pos = delta_functional(1.0, -1.0, 1.0)
    assert pos > 0
    assert pos == pytest.approx(_delta_oracle(1.0, -1.0, 1.0), rel=1e-9)


def test_delta_zero_lambda_identically_zero():
    xs = np.geomspace(1e-3, 50, 300)
    for alpha in (-1.0, 1.0):
        assert np.all(delta_functional(0.0, alpha, xs) == 0.0)


@settings(max_examples=60, deadline=None)
@given(lam=st.floats(0.1, 6), alpha=st.sampled_from([-2.0, -1.0, -0.3, 0.5, 1.0, 2.0]), x=st.floats(0.05, 12))
def test_delta_routes_agree(lam, alpha, x):
    reduced = delta_functional(lam, alpha, x)
    direct = delta_functional(lam, alpha, x, route="direct")
    scale = abs(delta_functional(lam, alpha, x * 0.5)) + abs(reduced) + 1e-12
    assert abs(reduced - direct) <= 1e-8 * scale


def test_delta_concave_for_positive_alpha():
    xs = np.geomspace(1e-3, 30, 200)
    for lam in (0.5, 1, 2, 5):
        assert np.max(delta_functional(lam, 1.0, xs)) <= 1e-10


@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
def test_single_sign_change_for_negative_alpha(lam):
    xs = np.geomspace(1e-4, 100, 2401)
    s = np.sign(delta_functional(lam, -1.0, xs))
    flips = np.flatnonzero(s[:-1] * s[1:] < 0)
    assert flips.size == 1
    assert xs[flips[0] + 1] > lam + 1


# --- proof diagnostics ---------------------------------------------------------

def test_proof_diagnostics_example():
    d = proof_diagnostics(1.0, 1.0, 1.0)
    assert d.d2 == pytest.approx(1 - 4 / E, rel=1e-13)
    assert d.d2 < 0


@pytest.mark.parametrize("lam,alpha,x", [(0.5, 1.0, 0.7), (1.0, -1.0, 2.0), (2.0, 1.0, 9.0), (1.3, -1.0, 6.0)])
def test_proof_diagnostics_against_oracles(lam, alpha, x):
    d = proof_diagnostics(lam, alpha, x)
    d1 = quad(lambda t: t**lam * math.exp(-alpha * t) * math.log(x / t), 0, x)
    assert d.d1 == pytest.approx(d1, rel=1e-10)
    dh = fd(lambda mu: weighted_power_integral(mu, alpha, x), lam, 1e-5)
    assert d.dh_dlambda == pytest.approx(dh, rel=1e-7)
    h = weighted_power_integral(lam, alpha, x)
    h1, h2, _ = weighted_power_integral_derivs(lam, alpha, x)
    # formulas exactly as printed
    d2 = (lam + 1 - alpha * x) * h - 2 * x ** (lam + 1) * math.exp(-alpha * x)
    q = (lam + 1) ** 2 - (2 * lam + 1) * alpha * x + alpha**2 * x**2
    delta1 = -h + x ** (lam + 1) * math.exp(-alpha * x) * (lam + 1 - alpha * x) / q
    delta = -h * h * h1 / (h * h1 + x * h * h2 - 2 * x * h1 * h1) - h * math.log(x) + dh
    assert d.d2 == pytest.approx(d2, rel=1e-10)
    assert d.delta1 == pytest.approx(delta1, rel=1e-8, abs=1e-12 * h)
    assert d.delta == pytest.approx(delta, rel=1e-6)


def test_d1_vanishes_at_zero():
    for lam, alpha in ((0.5, 1.0), (2.0, -1.0)):
        assert proof_diagnostics(lam, alpha, 1e-8).d1 < 1e-12


@settings(max_examples=30, deadline=None)
@given(lam=st.sampled_from([0.5, 1.0, 2.0]), alpha=st.sampled_from([-1.0, 1.0]), x=st.floats(1e-3, 30))
def test_proof_sign_claims(lam, alpha, x):
    d = proof_diagnostics(lam, alpha, x)
    assert d.d1 >= -1e-12
    assert d.d2 < 0


def test_delta1_single_zero_beyond_bound():
    xs = np.geomspace(1e-4, 100, 2401)
    s = np.sign(delta1_bracket(1.0, -1.0, xs))
    flips = np.flatnonzero(s[:-1] * s[1:] < 0)
    assert flips.size == 1 and xs[flips[0]] > 2.0


def test_proof_diagnostics_errors():
    with pytest.raises(DomainError):
        proof_diagnostics(1.0, 0.0, 1.0)
    with pytest.raises(DomainError):
        proof_diagnostics(1.0, 1.0, 0.0)


# --- classification ---------------------------------------------------------------

def test_classification_examples():
    rep = classify_monomial_means(3, 2, 1.0)
    assert rep.classification == "concave" and not rep.transitions
    rep = classify_monomial_means(1, 2, -1.0)
    assert rep.classification == "convex-then-concave"
    assert len(rep.transitions) == 1
    t = rep.transitions[0]
    assert t.x0 > 2 and rep.c > math.sqrt(2)
    lo, hi = t.bracket
    assert hi - lo <= 1e-12
    assert delta_functional(1.0, -1.0, lo) * delta_functional(1.0, -1.0, hi) <= 0
    assert classify_monomial_means(0, 2, -1.0).classification == "degenerate"
    assert classify_monomial_means(2, 2, 0.0).classification == "degenerate"


def test_classification_inconclusive_when_x_max_small():
    rep = classify_monomial_means(1, 2, -1.0, x_max=2.0)
    assert rep.classification == "convex"
    assert any("larger x_max" in n for n in rep.notes)


def test_sign_profile_structure():
    rep = classify_monomial_means(2, 2, -1.0)
    signs = [s for _, s in rep.sign_profile]
    assert all(a != b for a, b in zip(signs, signs[1:]))
    ends = [iv[1] for iv, _ in rep.sign_profile[:-1]]
    t = rep.transitions[0]
    assert any(e <= t.x0 for e in ends)


@pytest.mark.parametrize("k,p,alpha", [(1, 2, -1.0), (2, 2, -1.0), (1, 1, -2.0), (3, 2, 1.0)])
def test_classification_matches_discrete_second_differences(k, p, alpha):
    rep = classify_monomial_means(k, p, alpha)
    u = np.linspace(math.log(0.1), math.log(8.0), 300)
    lm = np.array([math.log(means_monomial(k, p, alpha, math.exp(t))) for t in u])
    sd = second_differences(u, lm)
    mids = u[1:-1]
    step = u[1] - u[0]
    c_log = math.log(rep.c) if rep.transitions else math.inf
    away = np.abs(mids - c_log) > 2 * step
    expected = np.sign(delta_functional(p * k / 2, alpha, np.exp(2 * mids)))
    agree = (np.sign(sd) == expected) | (np.abs(sd) < 1e-9)
    assert np.all(agree[away])


def test_corollary_bound_examples():
    assert corollary_c_bound(1, 2, -1) == pytest.approx(math.sqrt(2))
    assert corollary_c_bound(0, 2, -1) == pytest.approx(1.0)
    assert corollary_c_bound(2, 1, -2) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        corollary_c_bound(1, 2, 0.0)


def test_convex_up_to_corollary_bound():
    # pk/2 <= 2 here; see the test below for larger exponents
    for k, p, alpha in ((1, 2, -1.0), (2, 1, -2.0), (2, 2, -0.5), (4, 1, -1.0)):
        c = corollary_c_bound(k, p, alpha)
        xs = np.geomspace(1e-4, c * c, 400)
        assert np.all(delta_functional(p * k / 2, alpha, xs) >= 0)


# --- series convexity and three circles --------------------------------------------

def test_corollary_bound_fails_for_large_exponent():
    # Independent check: ln M(z^3, r) for p = 2, alpha = -1 from scipy quadrature
    # turns concave at r^2 = 3.6, below c^2 = 4.
    def ln_m(u):
        r = math.exp(u)
        num = quad(lambda s: s**7 * math.exp(s * s), 0, r)
        den = quad(lambda s: s * math.exp(s * s), 0, r)
        return math.log(num / den)

    u, h = 0.5 * math.log(3.6), 1e-3
    assert (ln_m(u + h) - 2 * ln_m(u) + ln_m(u - h)) / h**2 < -0.03
    assert delta_functional(3.0, -1.0, 3.6) < 0
    rep = classify_monomial_means(3, 2, -1.0)
    assert rep.transitions[0].x0 < corollary_c_bound(3, 2, -1.0) ** 2
    assert any("not beyond" in n for n in rep.notes)
    # crossover exponent where the transition meets (lam + 1) / |alpha|
    assert delta_functional(2.42, -1.0, 3.42) > 0 > delta_functional(2.435, -1.0, 3.435)


def test_series_convexity_examples():
    grid = np.geomspace(0.05, 1.0, 50)
    assert series_convexity_check(P([1, 1]), -1.0, grid).ok
    const = series_convexity_check(P([2.5]), -1.0, grid)
    assert const.ok and all(v == 0.0 for v in const.second_differences)
    assert series_convexity_check(P.monomial(3), -1.0, grid).ok
    with pytest.raises(DomainError):
        series_convexity_check(P([1, 1]), -1.0, [0.5, 1.5])
    with pytest.raises(DomainError):
        series_convexity_check(P([1, 1]), 1.0, grid)


def test_series_convexity_random():
    rng = np.random.default_rng(17)
    grid = np.geomspace(0.02, 1.0, 60)
    for _ in range(30):
        deg = int(rng.integers(0, 7))
        f = P(rng.uniform(-2, 2, deg + 1) + 1j * rng.uniform(-2, 2, deg + 1))
        assert series_convexity_check(f, -1.0, grid).min_second_difference >= -1e-7


def test_three_circles_examples():
    lhs, rhs, ok = three_circles_check(1, 2, -1, 0.3, 0.3, 1.2)
    assert lhs == rhs
    lhs, rhs, ok = three_circles_check(1, 2, -1, 0.3, 1.2, 1.2)
    assert lhs == rhs
    lhs, rhs, ok = three_circles_check(1, 2, -1, 0.3, 0.7, 1.2)
    assert ok and lhs <= rhs + 1e-9
    with pytest.raises(DomainError):
        three_circles_check(1, 2, -1, 0.3, 0.7, 1.6)
    with pytest.raises(DomainError):
        three_circles_check(1, 2, 1, 0.3, 0.7, 1.2)
    assert three_circles_check(0, 2, 1, 0.3, 0.7, 1.2).ok


@settings(max_examples=30, deadline=None)
@given(k=st.integers(1, 4), p=st.sampled_from([0.5, 1.0]), a=st.floats(0.05, 1), b=st.floats(0, 1), c=st.floats(0, 1))
def test_three_circles_property(k, p, a, b, c):
    bound = corollary_c_bound(k, p, -1.0)
    r1, r, r2 = sorted([a * bound, a * bound + b * (1 - a) * bound, bound * (a + (1 - a) * max(b, c))])
    r1 = max(r1, 1e-3)
    if not r1 <= r <= r2:
        return
    assert three_circles_check(k, p, -1.0, r1, r, r2).ok


# --- linear-function analysis -----------------------------------------------------------

def _g_h(c, x):
    h = 1 - math.exp(-x)
    g = c * h + 1 - (1 + x) * math.exp(-x)
    return g, h


@pytest.mark.parametrize("c", [0.0, 1.0, 4.0])
@pytest.mark.parametrize("x", [0.4, 1.3, 3.0, 7.0])
def test_remark_identities(c, x):
    g, h = _g_h(c, x)
    assert remark_F(c, x) == pytest.approx(g / h, rel=1e-13)
    # D(F) carries the positive factor e^{-4x} / (g h)^2 relative to G
    assert remark_DF(c, x) == pytest.approx(math.exp(-4 * x) * remark_G(c, x) / (g * h) ** 2, rel=1e-8, abs=1e-14)
    # D(F) against a finite-difference D-functional of F
    F = lambda t: float(remark_F(c, t))  # noqa: E731
    f1 = fd(F, x, 1e-4)
    f2 = (F(x + 1e-3) - 2 * F(x) + F(x - 1e-3)) / 1e-6
    assert remark_DF(c, x) == pytest.approx(d_functional(F(x), f1, f2, x), rel=1e-4, abs=1e-7)
    assert remark_G_scaled(c, x) == pytest.approx(remark_G(c, x) * math.exp(-3 * x), rel=1e-9, abs=1e-13)
    # derivative chain G' = x e^{3x} H, H'' = e^{-x} J, and the printed H', J'
    assert fd(lambda t: float(remark_G(c, t)), x) == pytest.approx(x * math.exp(3 * x) * remark_H(c, x), rel=1e-6)
    assert fd(lambda t: float(remark_H(c, t)), x) == pytest.approx(float(remark_H_prime(c, x)), rel=1e-7, abs=1e-9)
    assert fd(lambda t: float(remark_H_prime(c, t)), x) == pytest.approx(math.exp(-x) * remark_J(c, x), rel=1e-6, abs=1e-9)
    assert fd(lambda t: float(remark_J(c, t)), x) == pytest.approx(float(remark_J_prime(c, x)), rel=1e-7, abs=1e-9)


def test_remark_examples():
    rep0 = remark_linear_analysis(0.0)
    assert rep0.classification == "concave on (0, inf)" and rep0.x0 is None
    rep1 = remark_linear_analysis(1.0)
    assert rep1.J0 == 4.0
    assert rep1.classification == "convex on (0, x0), concave on (x0, inf)"
    lo, hi = rep1.bracket
    assert remark_G_scaled(1.0, lo) * remark_G_scaled(1.0, hi) <= 0
    assert rep1.J_nonincreasing and rep1.sign_consistent
    assert rep1.H_prime_limit == pytest.approx(-6.0, abs=1e-12)


def test_remark_transition_below_g0_root():
    lam = g0_root()
    for c in (0.5, 1.0, 4.0, 30.0):
        rep = remark_linear_analysis(c)
        assert rep.x0 < lam
    # maximality probe
    assert remark_DF(100.0, lam - 0.05) > 0


def test_g0_examples():
    assert float(g0(1.0)) == pytest.approx(E**3 - 3 * E**2 + E + 1, rel=1e-14)
    assert float(g0(1.0)) > 0
    assert float(g0(2.0)) == pytest.approx(E**6 - 9 * E**4 + 7 * E**2 + 1, rel=1e-13)
    assert float(g0(2.0)) == pytest.approx(-35.2312, abs=1e-4)
    root = g0_root()
    assert root == pytest.approx(1.86047095, abs=1e-6)
    xs = np.linspace(1e-2, 20, 2000)
    assert np.all(g0_scaled(xs[xs < root - 1e-9]) > 0)
    assert np.all(g0_scaled(xs[xs > root + 1e-9]) < 0)


def test_g_large_c_asymptotics():
    # G ~ (c+1) G0 + x^2 e^x (1 + x - e^x)
    x = 2.5
    for c in (10.0, 1000.0):
        lhs = float(remark_G(c, x))
        rhs = (c + 1) * float(g0(x)) + x * x * math.exp(x) * (1 + x - math.exp(x))
        assert lhs == pytest.approx(rhs, rel=1e-10)
