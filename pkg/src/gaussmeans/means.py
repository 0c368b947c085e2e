"""Gaussian integral means M_{p,alpha}(f, r) of entire functions.

Three routes are provided:

* ``means_monomial``  -- closed form for z**k via weighted power integrals,
* ``means_series_p2`` -- p = 2 only, coefficient sum over monomials,
* ``means_generic``   -- nested quadrature (angular trapezoid inside a
  radial Gauss-Kronrod rule) valid for every p > 0.

The routes share no code beyond ``gaussian`` kernels, so they cross-check
each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    COMPOSITE_CONFIG,
    OVERFLOW_EXPONENT,
    QuadratureConfig,
    _gk15,
    _trapezoid_rows,
    adaptive_integrate,
    log_weighted_power_integral,
)
from .errors import DivergentIntegralError, DomainError, OverflowGuardError
from .polynomial import PowerSeriesFunction

__all__ = [
    "MeansParams",
    "RadialWeight",
    "means_monomial",
    "means_series_p2",
    "angular_mean",
    "angular_means",
    "means_generic",
    "means_profile",
    "means_at_infinity",
    "means_derivative",
    "MaximumPrincipleReport",
    "maximum_principle_check",
    "embed_bound_check",
]


@dataclass(frozen=True)
class MeansParams:
    p: float
    alpha: float
    r: float

    def __post_init__(self):
        if not self.p > 0:
            raise DomainError(f"p must be positive, got {self.p}")
        if not self.r > 0:
            raise DomainError(f"r must be positive, got {self.r}")
        if math.isinf(self.r) and not self.alpha > 0:
            raise DivergentIntegralError("r = inf requires alpha > 0")


@dataclass(frozen=True)
class RadialWeight:
    """``v(r) = r exp(-alpha r**2)`` and its primitive."""

    alpha: float

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return r * np.exp(-self.alpha * r * r)

    def integral(self, r: float) -> float:
        """``int_0^r v(s) ds`` (= f_0(r**2) / 2)."""
        if r == 0:
            return 0.0
        return 0.5 * math.exp(log_weighted_power_integral(0.0, self.alpha, r * r))


def _check_p(p):
    if not p > 0:
        raise DomainError(f"p must be positive, got {p}")


def _guard_radius(alpha, r):
    if alpha < 0 and -alpha * r * r > OVERFLOW_EXPONENT:
        raise OverflowGuardError(
            f"r**2 beyond {OVERFLOW_EXPONENT}/|alpha| is overflow-unsafe (r={r}, alpha={alpha})"
        )


def _is_even_integer(p):
    return float(p).is_integer() and int(p) % 2 == 0


# ---------------------------------------------------------------------------
# closed-form and series routes

def means_monomial(k: int, p: float, alpha: float, r: float) -> float:
    """``M_{p,alpha}(z**k, r) = f_{pk/2}(r**2) / f_0(r**2)``.

    ``r = 0`` gives the continuous extension (1 for k = 0, else 0);
    ``r = inf`` (alpha > 0) gives ``Gamma(pk/2 + 1) / alpha**(pk/2)``.
    """
    if int(k) != k or k < 0:
        raise DomainError(f"k must be a nonnegative integer, got {k}")
    _check_p(p)
    if k == 0:
        if math.isinf(r) and alpha <= 0:
            raise DivergentIntegralError("r = inf requires alpha > 0")
        return 1.0
    lam = p * k / 2.0
    if math.isinf(r):
        if alpha <= 0:
            raise DivergentIntegralError("r = inf requires alpha > 0")
        return math.exp(math.lgamma(lam + 1) - lam * math.log(alpha))
    if r < 0:
        raise DomainError("r must be nonnegative")
    if r == 0:
        return 0.0
    _guard_radius(alpha, r)
    x = r * r
    return math.exp(
        log_weighted_power_integral(lam, alpha, x) - log_weighted_power_integral(0.0, alpha, x)
    )


def means_series_p2(f: PowerSeriesFunction, alpha: float, r: float) -> float:
    """``M_{2,alpha}(f, r) = sum_k |a_k|**2 M_{2,alpha}(z**k, r)``."""
    total = []
    for k, a in enumerate(f.coeffs):
        w = abs(a) ** 2
        if w:
            total.append(w * means_monomial(k, 2.0, alpha, r))
    return math.fsum(total)


# ---------------------------------------------------------------------------
# quadrature route

def _graded_breaks(f, s):
    """Angular breakpoints graded geometrically toward zeros of f near the circle |z| = s."""
    pts = []
    for rho in f.roots():
        delta = abs(abs(rho) - s) / s
        if delta >= 0.5:
            continue
        centre = float(np.angle(rho))
        pts.append(centre)
        width = max(delta, 1e-14)
        while width < np.pi:
            pts += [centre - width, centre + width]
            width *= 2.0
    return sorted({float(x % (2 * np.pi)) for x in pts} - {0.0})


def _angular_fallback(f, p, s, cfg):
    """Adaptive rule in theta with a partition refined toward nearby zeros."""

    def integrand(theta):
        v = f(s * np.exp(1j * theta))
        return (v.real**2 + v.imag**2) ** (0.5 * p)

    return adaptive_integrate(integrand, 0.0, 2 * np.pi, cfg, _graded_breaks(f, s))


def angular_means(f: PowerSeriesFunction, p: float, radii, cfg: QuadratureConfig | None = None):
    """``int_0^{2 pi} |f(s e^{i theta})|**p d theta`` for every s in ``radii``."""
    cfg = cfg or COMPOSITE_CONFIG
    _check_p(p)
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    if f.is_constant():
        return np.full(radii.shape, 2 * np.pi * abs(complex(f.coeffs[0])) ** p)
    half_p = 0.5 * p
    n0 = cfg.angular_nodes
    if _is_even_integer(p):
        # |f|^p is a trigonometric polynomial of degree p*deg/2*2
        while n0 <= p * f.degree + 1:
            n0 *= 2

    def rows(theta, idx):
        z = radii[idx, None] * np.exp(1j * theta)[None, :]
        v = f(z)
        return (v.real**2 + v.imag**2) ** half_p

    vals = np.empty(radii.size)
    direct = np.zeros(radii.size, dtype=bool)
    roots = f.roots()
    if not _is_even_integer(p) and roots.size:
        # trapezoid error decays like exp(-N * gap); tiny gaps go straight to the graded rule
        gap = np.min(np.abs(np.abs(roots)[None, :] - radii[:, None]), axis=1) / radii
        direct = gap < 0.01
    smooth = np.flatnonzero(~direct)
    if smooth.size:
        cap = max(cfg.max_angular_nodes, n0 * 2)
        sub, ok = _trapezoid_rows(lambda th, idx: rows(th, smooth[idx]), smooth.size, n0, cap,
                                  cfg.rel_tol, cfg.abs_tol)
        vals[smooth] = sub
        direct[smooth[~ok]] = True
    if np.any(direct):
        idx = np.flatnonzero(direct)
        vals[idx] = _graded_rows(f, p, radii[idx], cfg)
    return vals


def _graded_rows(f, p, radii, cfg):
    """One vectorised Gauss-Kronrod pass over graded partitions of many circles.

    Circles whose error estimate misses the tolerance are redone adaptively.
    """
    lo_all, hi_all, owner = [], [], []
    for i, s in enumerate(radii):
        edges = [0.0, *_graded_breaks(f, float(s)), 2 * np.pi]
        lo_all += edges[:-1]
        hi_all += edges[1:]
        owner += [i] * (len(edges) - 1)
    owner = np.array(owner)
    rad = np.asarray(radii)[owner]

    def integrand(theta):
        # theta is laid out panel by panel, 15 nodes each
        z = np.repeat(rad, 15) * np.exp(1j * theta)
        v = f(z)
        return (v.real**2 + v.imag**2) ** (0.5 * p)

    pv, pe = _gk15(integrand, np.array(lo_all), np.array(hi_all))
    vals = np.bincount(owner, weights=pv, minlength=len(radii))
    errs = np.bincount(owner, weights=pe, minlength=len(radii))
    redo = errs > np.maximum(cfg.abs_tol, cfg.rel_tol * np.abs(vals))
    for i in np.flatnonzero(redo):
        vals[i] = _angular_fallback(f, p, float(radii[i]), cfg)
    return vals


def angular_mean(f: PowerSeriesFunction, p: float, r: float, cfg: QuadratureConfig | None = None) -> float:
    """``M(r) = int_0^{2 pi} |f(r e^{i theta})|**p d theta``."""
    if not r > 0:
        raise DomainError("r must be positive")
    return float(angular_means(f, p, [r], cfg)[0])


def _radial_breaks(f, p, lo, hi):
    if _is_even_integer(p) or f.is_constant():
        return []
    mods = np.abs(f.roots())
    return sorted({float(m) for m in mods if lo < m < hi})


def _radial_integral(f, p, alpha, lo, hi, cfg):
    """``int_lo^hi M(s) s exp(-alpha s**2) ds``."""

    def integrand(s):
        return angular_means(f, p, s, cfg) * s * np.exp(-alpha * s * s)

    return adaptive_integrate(integrand, lo, hi, cfg, _radial_breaks(f, p, lo, hi))


def means_profile(f: PowerSeriesFunction, p: float, alpha: float, radii,
                  cfg: QuadratureConfig | None = None) -> np.ndarray:
    """Quadrature-route means at increasing radii, accumulating the radial integral."""
    cfg = cfg or COMPOSITE_CONFIG
    _check_p(p)
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or np.any(radii <= 0) or np.any(np.diff(radii) <= 0):
        raise DomainError("radii must be positive and strictly increasing")
    if np.any(np.isinf(radii)):
        raise DomainError("use means_at_infinity for r = inf")
    _guard_radius(alpha, float(radii[-1]))
    weight = RadialWeight(alpha)
    out = np.empty(radii.size)
    acc = []
    lo = 0.0
    for i, r in enumerate(radii):
        acc.append(_radial_integral(f, p, alpha, lo, float(r), cfg))
        out[i] = math.fsum(acc) / (2 * np.pi * weight.integral(float(r)))
        lo = float(r)
    return out


def means_generic(f: PowerSeriesFunction, p: float, alpha: float, r: float,
                  cfg: QuadratureConfig | None = None) -> float:
    """``M_{p,alpha}(f, r)`` by nested quadrature; r = 0 and r = inf handled."""
    _check_p(p)
    if r == 0:
        return abs(complex(f.coeffs[0])) ** p
    if math.isinf(r):
        return means_at_infinity(f, p, alpha, cfg)
    return float(means_profile(f, p, alpha, [r], cfg)[0])


def _gaussian_cutoff(f, p, alpha, drop=40.0):
    """Radius beyond which ``s (sum|a_k| s^k)^p e^{-alpha s^2}`` is below e^{-drop} of its peak."""
    step = 0.125 / math.sqrt(alpha)

    def logb(s):
        return p * math.log(max(f.abs_coeff_bound(s), 1e-300)) + math.log(s) - alpha * s * s

    s = step
    best = logb(s)
    while True:
        s += step
        val = logb(s)
        best = max(best, val)
        if val < best - drop and s * s * alpha > 1.0:
            return s


def means_at_infinity(f: PowerSeriesFunction, p: float, alpha: float,
                      cfg: QuadratureConfig | None = None) -> float:
    """``M_{p,alpha}(f, inf)`` by radial quadrature truncated at a Gaussian-tail cutoff."""
    cfg = cfg or COMPOSITE_CONFIG
    _check_p(p)
    if not alpha > 0:
        raise DivergentIntegralError(f"M(f, inf) diverges for alpha={alpha} <= 0")
    if f.is_constant():
        return abs(complex(f.coeffs[0])) ** p
    cutoff = _gaussian_cutoff(f, p, alpha)
    return alpha / math.pi * _radial_integral(f, p, alpha, 0.0, cutoff, cfg)


def means_derivative(f: PowerSeriesFunction, p: float, alpha: float, r: float,
                     cfg: QuadratureConfig | None = None) -> float:
    """``d/dr M_{p,alpha}(f, r)`` from the weighted-difference formula.

    Equals ``v(r) int_0^r (M(r) - M(s)) v(s) ds / (2 pi (int_0^r v)^2)`` with
    M the angular integral; nonnegative, and zero only for constant f.
    """
    cfg = cfg or COMPOSITE_CONFIG
    _check_p(p)
    if not r > 0:
        raise DomainError("r must be positive")
    if f.is_constant():
        return 0.0
    _guard_radius(alpha, r)
    weight = RadialWeight(alpha)
    big_v = weight.integral(r)
    outer = angular_mean(f, p, r, cfg)
    inner = _radial_integral(f, p, alpha, 0.0, r, cfg)
    return float(weight(r)) * (outer * big_v - inner) / (2 * np.pi * big_v**2)


@dataclass
class MaximumPrincipleReport:
    radii: list
    values: list
    lower_bound: float
    upper_bound: float | None
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def maximum_principle_check(f: PowerSeriesFunction, p: float, alpha: float, radii,
                            cfg: QuadratureConfig | None = None,
                            slack: float = 1e-9) -> MaximumPrincipleReport:
    """Check ``|f(0)|^p <= M(r_1) <= ... <= M(r_n) <= M(inf)``.

    The last bound is only checked for alpha > 0.  Comparisons allow
    ``slack * max(1, |value|)``; failures are listed, not raised.
    """
    values = means_profile(f, p, alpha, radii, cfg)
    lower = abs(complex(f.coeffs[0])) ** p
    upper = means_at_infinity(f, p, alpha, cfg) if alpha > 0 else None
    chain = [("|f(0)|^p", lower)] + [(f"M(r={r:g})", v) for r, v in zip(radii, values)]
    if upper is not None:
        chain.append(("M(inf)", upper))
    violations = []
    for (na, a), (nb, b) in zip(chain, chain[1:]):
        if a > b + slack * max(1.0, abs(a), abs(b)):
            violations.append(f"{na}={a:.12g} > {nb}={b:.12g}")
    return MaximumPrincipleReport(list(map(float, radii)), [float(v) for v in values],
                                  float(lower), upper, violations)


def embed_bound_check(f: PowerSeriesFunction, p: float, r: float,
                      cfg: QuadratureConfig | None = None):
    """Both sides of the disc embedding bound.

    ``lhs = int_{|z|<r} |f e^{-|z|^2/2}|^p dA`` and
    ``rhs = (int_{|z|<r} e^{-p|z|^2/2} dA) * M_{p,p/2}(f, inf)``.
    """
    cfg = cfg or COMPOSITE_CONFIG
    _check_p(p)
    if not r > 0:
        raise DomainError("r must be positive")
    alpha = 0.5 * p
    lhs = _radial_integral(f, p, alpha, 0.0, r, cfg)
    disc_weight = 2 * np.pi * RadialWeight(alpha).integral(r)
    rhs = disc_weight * means_at_infinity(f, p, alpha, cfg)
    return lhs, rhs
