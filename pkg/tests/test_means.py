import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate as sci_integrate

from gaussmeans.errors import DivergentIntegralError, DomainError, OverflowGuardError
from gaussmeans.means import (
    MeansParams,
    RadialWeight,
    angular_mean,
    embed_bound_check,
    maximum_principle_check,
    means_at_infinity,
    means_derivative,
    means_generic,
    means_monomial,
    means_profile,
    means_series_p2,
)
from gaussmeans.polynomial import PowerSeriesFunction as P

E = math.e
M_Z_1 = (1 - 2 / E) / (1 - 1 / E)

# Polar midpoint Riemann sum, 2000 x 2000 cells, for f = 1 + z, p = 1, alpha = 1,
# r = 1 (computed once with plain numpy; second-order error ~1e-8).
RIEMANN_2000 = 1.1095759806088095
# The same sum at 4000 x 4000; Richardson extrapolation of the pair.
RIEMANN_4000 = 1.1095759875033957
RIEMANN_EXTRAPOLATED = RIEMANN_4000 + (RIEMANN_4000 - RIEMANN_2000) / 3


def random_poly(rng, max_degree=6):
    deg = int(rng.integers(0, max_degree + 1))
    return P(rng.uniform(-2, 2, deg + 1) + 1j * rng.uniform(-2, 2, deg + 1))


coeffs = st.lists(st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False),
                  min_size=1, max_size=5)


# --- examples --------------------------------------------------------------

def test_monomial_examples():
    for p, alpha, r in [(1, 1, 1), (3.5, -1, 2), (2, 0, 0.3)]:
        assert means_monomial(0, p, alpha, r) == 1.0
    assert means_monomial(1, 2, 1, 1) == pytest.approx(M_Z_1, rel=1e-14)
    assert means_monomial(1, 2, 1, math.inf) == pytest.approx(1.0, rel=1e-14)
    assert means_monomial(3, 2, 1, 0.0) == 0.0


def test_series_examples():
    assert means_series_p2(P([1, 1]), 1, 1) == pytest.approx(1 + M_Z_1, rel=1e-14)
    assert means_series_p2(P([0]), 1, 1) == 0.0
    assert means_series_p2(P([0, 0, 3]), 1, 2) == pytest.approx(9 * means_monomial(2, 2, 1, 2), rel=1e-14)


def test_angular_examples():
    assert angular_mean(P([0, 1]), 2, 3) == pytest.approx(2 * math.pi * 9, rel=1e-13)
    assert angular_mean(P([1, 1]), 2, 1) == pytest.approx(4 * math.pi, rel=1e-13)
    assert angular_mean(P([1]), 3.3, 2.5) == pytest.approx(2 * math.pi, rel=1e-14)


def test_generic_examples():
    for p, alpha, r in [(1, 1, 1), (3.5, -1, 2)]:
        assert means_generic(P([1]), p, alpha, r) == pytest.approx(1.0, rel=1e-14)
    assert means_generic(P([0, 1]), 2, 1, 1) == pytest.approx(M_Z_1, rel=1e-10)


def test_generic_against_riemann_oracle():
    val = means_generic(P([1, 1]), 1, 1, 1)
    assert val == pytest.approx(RIEMANN_2000, abs=5e-8)
    assert val == pytest.approx(RIEMANN_EXTRAPOLATED, rel=1e-9)


def test_generic_against_scipy_dblquad():
    f = P([0.5 - 1j, 2, 0, 1j])
    p, alpha, r = 3.5, -0.7, 1.3
    num, _ = sci_integrate.dblquad(
        lambda th, s: abs(f(s * np.exp(1j * th))) ** p * s * math.exp(-alpha * s * s),
        0, r, 0, 2 * math.pi, epsabs=0, epsrel=1e-11)
    den = 2 * math.pi * RadialWeight(alpha).integral(r)
    assert means_generic(f, p, alpha, r) == pytest.approx(num / den, rel=1e-9)


def test_generic_endpoints():
    f = P([2, 1])
    assert means_generic(f, 1.5, 1, 0) == pytest.approx(2**1.5)
    assert means_generic(f, 2, 1, math.inf) == pytest.approx(5.0, rel=1e-10)


def test_at_infinity_examples():
    for k in range(5):
        assert means_at_infinity(P.monomial(k), 2, 1) == pytest.approx(math.factorial(k), rel=1e-10)
    assert means_at_infinity(P([1]), 2, 1) == 1.0
    assert means_at_infinity(P([0, 1]), 2, 2) == pytest.approx(0.5, rel=1e-10)
    with pytest.raises(DivergentIntegralError):
        means_at_infinity(P([0, 1]), 2, 0)


def test_derivative_examples():
    assert means_derivative(P([1]), 2, 1, 1) == 0.0
    assert means_derivative(P([5]), 3, -1, 2) == 0.0
    d = means_derivative(P([0, 1]), 2, 1, 1)
    h = 1e-5
    fd = (means_monomial(1, 2, 1, 1 + h) - means_monomial(1, 2, 1, 1 - h)) / (2 * h)
    assert d > 0
    assert d == pytest.approx(fd, rel=1e-6)


@pytest.mark.parametrize("coeffs,p,alpha,r", [
    ([1, 1], 1.0, 1.0, 0.8),
    ([0.3, -1j, 0.5], 3.5, -1.0, 1.2),
    ([1, 0, 0, 2], 2.0, 0.0, 0.6),
])
def test_derivative_matches_finite_differences(coeffs, p, alpha, r):
    f = P(coeffs)
    h = 1e-4
    fd = (means_generic(f, p, alpha, r + h) - means_generic(f, p, alpha, r - h)) / (2 * h)
    d = means_derivative(f, p, alpha, r)
    assert abs(d - fd) <= max(1e-6, 1e-4 * abs(d))


def test_maximum_principle_examples():
    rep = maximum_principle_check(P([1, 1]), 2, 1, [0.5, 1, 2, 4])
    assert rep.ok
    assert rep.lower_bound == 1.0
    assert rep.upper_bound == pytest.approx(2.0, rel=1e-10)
    const = maximum_principle_check(P([3]), 1.5, -1, [0.5, 1])
    assert const.ok and all(v == pytest.approx(3**1.5) for v in const.values)
    z = maximum_principle_check(P([0, 1]), 2, 1, [0.01, 0.1])
    assert z.lower_bound == 0.0 and z.values[0] < 1e-4


def test_maximum_principle_reports_violation(monkeypatch):
    import gaussmeans.means as means_mod

    with pytest.raises(DomainError):
        maximum_principle_check(P([0, 1]), 2, 1, [1.0, 0.5])
    monkeypatch.setattr(means_mod, "means_profile", lambda *a, **k: np.array([0.5, 0.4]))
    rep = means_mod.maximum_principle_check(P([0, 1]), 2, 1, [0.5, 1.0])
    assert not rep.ok and len(rep.violations) == 1


def test_embed_bound_examples():
    for f, p, r in [(P([1]), 2, 1), (P([0, 1]), 2, 1), (P([1, 1]), 1, 2)]:
        lhs, rhs = embed_bound_check(f, p, r)
        assert lhs <= rhs
    lhs, rhs = embed_bound_check(P([0, 1]), 2, 1)
    # lhs = 2 pi f_1(1) / 2 = pi (1 - 2/e);  rhs = pi (1 - 1/e) * 1!
    assert lhs == pytest.approx(math.pi * (1 - 2 / E), rel=1e-10)
    assert rhs == pytest.approx(math.pi * (1 - 1 / E), rel=1e-10)


def test_errors():
    with pytest.raises(DomainError):
        MeansParams(p=0, alpha=1, r=1)
    with pytest.raises(DomainError):
        means_monomial(-1, 2, 1, 1)
    with pytest.raises(OverflowGuardError):
        means_monomial(1, 2, -1, 40)
    with pytest.raises(DomainError):
        means_derivative(P([0, 1]), 2, 1, 0)


# --- properties -------------------------------------------------------------

def test_route_agreement_random():
    rng = np.random.default_rng(3)
    radii = [0.5, 1.0, 2.0]
    for _ in range(40):
        f = random_poly(rng)
        for alpha in (-1.0, 0.0, 1.0):
            quad = means_profile(f, 2.0, alpha, radii)
            for r, q in zip(radii, quad):
                s = means_series_p2(f, alpha, r)
                assert abs(q - s) <= 1e-8 * s


def test_monotone_random_including_alpha_zero():
    rng = np.random.default_rng(5)
    for _ in range(15):
        f = random_poly(rng)
        if f.is_constant():
            continue
        for p in (1.0, 2.0, 3.5):
            for alpha in (-1.0, 0.0, 1.0):
                assert maximum_principle_check(f, p, alpha, [0.25, 0.5, 1.0, 1.5, 2.0]).ok


@settings(max_examples=25, deadline=None)
@given(cs=coeffs, c=st.complex_numbers(min_magnitude=0.1, max_magnitude=3, allow_nan=False, allow_infinity=False),
       p=st.sampled_from([1.0, 2.0, 3.5]), alpha=st.sampled_from([-1.0, 0.5]), r=st.floats(0.2, 1.8))
def test_scale_covariance(cs, c, p, alpha, r):
    f = P(cs)
    base = means_generic(f, p, alpha, r)
    scaled = means_generic(f.scaled(c), p, alpha, r)
    assert scaled == pytest.approx(abs(c) ** p * base, rel=1e-9, abs=1e-300)
    if p == 2:
        assert means_series_p2(f.scaled(c), alpha, r) == pytest.approx(abs(c) ** 2 * means_series_p2(f, alpha, r),
                                                                       rel=1e-13, abs=1e-300)


@settings(max_examples=20, deadline=None)
@given(cs=coeffs, p=st.sampled_from([1.0, 2.0, 3.5]), alpha=st.sampled_from([-1.0, 0.0, 1.0]),
       r=st.floats(0.1, 2.0))
def test_derivative_nonnegative(cs, p, alpha, r):
    f = P(cs)
    d = means_derivative(f, p, alpha, r)
    assert d >= -1e-12
    if not f.is_constant():
        assert d > 0
