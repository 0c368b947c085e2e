"""Logarithmic convexity of Gaussian integral means in ln r.

Everything is done in the variable x = r**2.  With ``h = f_lam(x)`` and
``K = K(lam+1, alpha x)`` the Kummer factor from :mod:`gaussmeans.core`,

    h = x**(lam+1) exp(-alpha x) K,     h'/h = 1 / (x K),

so the convexity functional of ``h`` reduces to

    D(h) = (s - w - 1/K) / (x K),   s = lam + 1,  w = alpha x,

which never overflows.  The proof quantities d1, d2, delta, delta1 share the
prefactor ``x**s exp(-w)`` and are evaluated as prefactor * bracket.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .core import (
    DEFAULT_CONFIG,
    OVERFLOW_EXPONENT,
    QuadratureConfig,
    adaptive_integrate,
    bisect_root,
    log_grid,
    log_kummer,
    weighted_power_integral,
    weighted_power_integral_derivs,
)
from .errors import DomainError, OverflowGuardError
from .means import means_monomial, means_series_p2
from .polynomial import PowerSeriesFunction

__all__ = [
    "d_functional",
    "delta_functional",
    "ProofDiagnostics",
    "proof_diagnostics",
    "delta1_bracket",
    "Transition",
    "ConvexityReport",
    "classify_monomial_means",
    "corollary_c_bound",
    "SeriesConvexityReport",
    "series_convexity_check",
    "ThreeCircles",
    "three_circles_check",
    "second_differences",
    "remark_F",
    "remark_DF",
    "remark_G",
    "remark_G_scaled",
    "remark_H",
    "remark_H_prime",
    "remark_J",
    "remark_J_prime",
    "g0",
    "g0_scaled",
    "g0_root",
    "RemarkReport",
    "remark_linear_analysis",
]

ROOT_XTOL = 1e-12


def d_functional(g_value, g1, g2, x):
    """``D(g) = g'/g + x g''/g - x (g'/g)**2``.

    ``ln g`` is convex in ``ln x`` where D >= 0 and concave where D <= 0.
    """
    g_value = np.asarray(g_value, dtype=float)
    if np.any(~(g_value > 0)):
        raise DomainError("D-functional needs g > 0")
    ratio = np.asarray(g1) / g_value
    out = ratio + np.asarray(x) * np.asarray(g2) / g_value - np.asarray(x) * ratio**2
    return float(out) if out.ndim == 0 else out


def _check_x(x):
    xa = np.asarray(x, dtype=float)
    if np.any(~(xa > 0)):
        raise DomainError("x must be positive")
    return xa


def _kummer(s, w):
    logk = log_kummer(s, w)
    if np.any(logk > OVERFLOW_EXPONENT):
        raise OverflowGuardError("Kummer factor overflows; reduce alpha * x")
    return np.exp(logk)


def _d_reduced(s, w, x, k):
    return (s - w - 1.0 / k) / (x * k)


def delta_functional(lam: float, alpha: float, x, route: str = "reduced"):
    """``Delta(lam, x) = D(f_lam) - D(f_0)``; its sign decides convexity of ln M(z^k).

    ``route="reduced"`` uses the Kummer form (stable for all x inside the
    overflow guard); ``route="direct"`` feeds f_lam and its closed-form
    derivatives to :func:`d_functional` and is kept as a cross-check.
    """
    if not lam >= 0:
        raise DomainError(f"lambda must be >= 0, got {lam}")
    xa = _check_x(x)
    if alpha < 0 and np.any(-alpha * xa > OVERFLOW_EXPONENT):
        raise OverflowGuardError(f"x beyond {OVERFLOW_EXPONENT}/|alpha| is overflow-unsafe")
    if lam == 0:
        out = np.zeros(xa.shape)
        return float(out) if out.ndim == 0 else out
    if route == "reduced":
        flat = np.atleast_1d(xa)
        w = alpha * flat
        s = lam + 1.0
        d_lam = _d_reduced(s, w, flat, _kummer(s, w))
        d_zero = _d_reduced(1.0, w, flat, _kummer(1.0, w))
        out = (d_lam - d_zero).reshape(xa.shape)
    elif route == "direct":
        parts = []
        for mu in (lam, 0.0):
            h = weighted_power_integral(mu, alpha, xa)
            h1, h2, _ = weighted_power_integral_derivs(mu, alpha, xa)
            parts.append(d_functional(h, h1, h2, xa))
        out = np.asarray(parts[0] - parts[1])
    else:
        raise DomainError(f"unknown route {route!r}")
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# proof diagnostics

@dataclass(frozen=True)
class ProofDiagnostics:
    x: float
    d1: float
    d2: float
    delta1: float
    delta: float
    dh_dlambda: float
    singular: bool = False


def _log_moment_scaled(s, w, cfg):
    """``int_0^inf v exp(-s v + w (1 - e^{-v})) dv``; equals d1 / (x^s e^{-w})."""

    def integrand(v):
        return v * np.exp(-s * v + w * (-np.expm1(-v)))

    knee = math.log1p(abs(w))
    return adaptive_integrate(integrand, 0.0, math.inf, cfg, [knee] if knee > 0 else [])


def _q_poly(lam, w):
    return (lam + 1) ** 2 - (2 * lam + 1) * w + w * w


def delta1_bracket(lam: float, alpha: float, x):
    """``delta1 / (x^(lam+1) e^{-alpha x})``: same sign as delta1, no overflow."""
    xa = _check_x(x)
    s = lam + 1.0
    w = alpha * np.atleast_1d(xa)
    out = (-_kummer(s, w) + (s - w) / _q_poly(lam, w)).reshape(xa.shape)
    return float(out) if out.ndim == 0 else out


def proof_diagnostics(lam: float, alpha: float, x: float,
                      cfg: QuadratureConfig | None = None) -> ProofDiagnostics:
    """Evaluate d1, d2, delta1, delta and dh/dlambda at one point.

    d1 = h ln x - dh/dlambda is computed directly as
    ``int_0^x t^lam e^{-alpha t} ln(x/t) dt`` (substitution t = x e^{-v}),
    then dh/dlambda = h ln x - d1.
    """
    cfg = cfg or DEFAULT_CONFIG
    if not lam >= 0:
        raise DomainError(f"lambda must be >= 0, got {lam}")
    if alpha == 0:
        raise DomainError("alpha must be nonzero")
    if not x > 0:
        raise DomainError("x must be positive")
    s = lam + 1.0
    w = alpha * x
    log_pref = s * math.log(x) - w
    if log_pref > OVERFLOW_EXPONENT:
        raise OverflowGuardError("prefactor x^(lam+1) e^(-alpha x) overflows")
    pref = math.exp(log_pref)
    k = float(_kummer(s, w)[0])
    moment = _log_moment_scaled(s, w, cfg)
    d2_bracket = (s - w) * k - 2.0
    h = pref * k
    d1 = pref * moment
    d2 = pref * d2_bracket
    delta1 = pref * (-k + (s - w) / _q_poly(lam, w))
    singular = d2_bracket == 0.0
    delta = math.nan if singular else pref * (-k * k / d2_bracket - moment)
    return ProofDiagnostics(
        x=float(x), d1=d1, d2=d2, delta1=delta1, delta=delta,
        dh_dlambda=h * math.log(x) - d1, singular=singular,
    )


# ---------------------------------------------------------------------------
# sign scans and classification

@dataclass(frozen=True)
class Transition:
    x0: float
    bracket: tuple
    tolerance: float

    @property
    def r0(self) -> float:
        return math.sqrt(self.x0)


@dataclass
class ConvexityReport:
    """Sign profile of the convexity functional over an x-grid (x = r**2)."""

    sign_profile: list
    transitions: list
    classification: str
    notes: list = field(default_factory=list)

    @property
    def c(self):
        """Transition radius sqrt(x0) when exactly one transition was found."""
        return self.transitions[0].r0 if len(self.transitions) == 1 else None


def _signs(values, zero_tol):
    return np.where(values > zero_tol, 1, np.where(values < -zero_tol, -1, 0))


def _profile(grid, signs):
    """Collapse a sign sequence into maximal intervals of constant sign."""
    out = []
    start = 0
    for i in range(1, len(signs) + 1):
        if i == len(signs) or signs[i] != signs[start]:
            out.append(((float(grid[start]), float(grid[i - 1])), int(signs[start])))
            start = i
    return out


def _scan_roots(fn, grid, signs):
    roots = []
    nz = np.flatnonzero(signs != 0)
    for a, b in zip(nz[:-1], nz[1:]):
        if signs[a] != signs[b]:
            root, lo, hi = bisect_root(lambda t: float(fn(t)), float(grid[a]), float(grid[b]),
                                       xtol=ROOT_XTOL)
            roots.append(Transition(root, (lo, hi), ROOT_XTOL))
    return roots


def classify_monomial_means(k: int, p: float, alpha: float, x_max: float = 100.0,
                            per_decade: int = 400, x_min: float | None = None,
                            zero_tol: float = 1e-14) -> ConvexityReport:
    """Classify ``ln M_{p,alpha}(z^k, r)`` as a function of ``ln r``.

    Scans Delta(pk/2, alpha, x) on a log grid over [x_min, x_max] and
    bisects each sign change to ``ROOT_XTOL``.
    """
    if int(k) != k or k < 0:
        raise DomainError("k must be a nonnegative integer")
    if not p > 0:
        raise DomainError("p must be positive")
    if alpha < 0 and -alpha * x_max > OVERFLOW_EXPONENT:
        raise OverflowGuardError(f"x_max beyond {OVERFLOW_EXPONENT}/|alpha|")
    lam = p * k / 2.0
    if k == 0 or alpha == 0:
        note = "M(z^0, r) = 1" if k == 0 else "alpha = 0: ln M is affine in ln r"
        return ConvexityReport([((0.0, float(x_max)), 0)], [], "degenerate", [note])
    x_min = x_min if x_min is not None else min(1e-4, x_max / 10)
    grid = log_grid(x_min, x_max, per_decade)
    values = delta_functional(lam, alpha, grid)
    signs = _signs(values, zero_tol)
    fn = lambda t: delta_functional(lam, alpha, t)  # noqa: E731
    transitions = _scan_roots(fn, grid, signs)
    report = ConvexityReport(_profile(grid, signs), transitions, "indeterminate")
    pos = np.any(signs > 0)
    neg = np.any(signs < 0)
    if not pos:
        report.classification = "concave"
    elif not neg:
        report.classification = "convex"
        if alpha < 0:
            report.notes.append("no sign change below x_max; try a larger x_max")
    elif len(transitions) == 1 and signs[signs != 0][0] > 0:
        report.classification = "convex-then-concave"
    if alpha < 0:
        bound = (lam + 1) / -alpha
        for t in transitions:
            if not t.x0 > bound:
                report.notes.append(f"transition {t.x0:.12g} not beyond (pk+2)/(-2 alpha) = {bound:.12g}")
    return report


def corollary_c_bound(k: int, p: float, alpha: float) -> float:
    """Radius ``sqrt((pk+2)/(-2 alpha))`` up to which ln M(z^k) is convex (alpha < 0)."""
    if not alpha < 0:
        raise DomainError("the explicit convexity radius needs alpha < 0")
    if int(k) != k or k < 0 or not p > 0:
        raise DomainError("need integer k >= 0 and p > 0")
    return math.sqrt((p * k + 2) / (-2.0 * alpha))


def second_differences(u, y):
    """Divided second differences of y over a (possibly uneven) grid u."""
    u = np.asarray(u, dtype=float)
    y = np.asarray(y, dtype=float)
    left = (y[1:-1] - y[:-2]) / (u[1:-1] - u[:-2])
    right = (y[2:] - y[1:-1]) / (u[2:] - u[1:-1])
    return 2.0 * (right - left) / (u[2:] - u[:-2])


@dataclass
class SeriesConvexityReport:
    radii: list
    log_means: list
    second_differences: list
    min_second_difference: float
    ok: bool
    degenerate: bool = False


def series_convexity_check(f: PowerSeriesFunction, alpha: float, r_grid,
                           tol: float = 1e-7) -> SeriesConvexityReport:
    """Discrete convexity certificate for ``ln M_{2,alpha}(f, e^u)`` in u = ln r.

    The grid must lie in (0, sqrt(1/(-alpha))].
    """
    if not alpha < 0:
        raise DomainError("alpha must be negative")
    radii = np.asarray(r_grid, dtype=float)
    limit = math.sqrt(1.0 / -alpha)
    if np.any(radii <= 0) or np.any(radii > limit * (1 + 1e-12)) or np.any(np.diff(radii) <= 0):
        raise DomainError(f"radii must increase inside (0, {limit:.12g}]")
    if f.is_zero():
        return SeriesConvexityReport(list(radii), [], [], 0.0, True, degenerate=True)
    logm = np.array([math.log(means_series_p2(f, alpha, float(r))) for r in radii])
    sd = second_differences(np.log(radii), logm)
    if f.is_constant():
        sd = np.zeros_like(sd)
    low = float(sd.min()) if sd.size else 0.0
    return SeriesConvexityReport(list(map(float, radii)), list(map(float, logm)),
                                 list(map(float, sd)), low, low >= -tol)


class ThreeCircles(NamedTuple):
    lhs: float
    rhs: float
    ok: bool


def three_circles_check(k: int, p: float, alpha: float, r1: float, r: float, r2: float,
                        slack: float = 1e-9) -> ThreeCircles:
    """Hadamard-type three-circle inequality for ln M_{p,alpha}(z^k, .).

    ``ln(r2/r1) ln M(r) <= ln(r2/r) ln M(r1) + ln(r/r1) ln M(r2)``, checked
    only where convexity is certified: every radius for k = 0 or alpha = 0,
    radii up to the explicit bound for alpha < 0.
    """
    if not 0 < r1 <= r <= r2:
        raise DomainError("need 0 < r1 <= r <= r2")
    if k != 0 and alpha > 0:
        raise DomainError("ln M(z^k) is concave for alpha > 0; no certified convex region")
    if k != 0 and alpha < 0:
        bound = corollary_c_bound(k, p, alpha)
        if r2 > bound * (1 + 1e-12):
            raise DomainError(f"r2={r2} outside the certified convex region (0, {bound:.12g}]")
    lm = {t: math.log(means_monomial(k, p, alpha, t)) if k else 0.0 for t in (r1, r, r2)}
    lhs = math.log(r2 / r1) * lm[r]
    rhs = math.log(r2 / r) * lm[r1] + math.log(r / r1) * lm[r2]
    return ThreeCircles(lhs, rhs, lhs <= rhs + slack)


# ---------------------------------------------------------------------------
# M_{2,1}(a + z, r): the linear-function counterexample, c = |a|^2

def _g_h(c, x):
    x = np.asarray(x, dtype=float)
    f0 = weighted_power_integral(0.0, 1.0, x)
    f1 = weighted_power_integral(1.0, 1.0, x)
    return c * f0 + f1, f0


def remark_F(c, x):
    """``F(x) = (c + 1 - (c + 1 + x) e^{-x}) / (1 - e^{-x})`` = M_{2,1}(a+z, sqrt(x))."""
    g, h = _g_h(c, x)
    return g / h


def remark_DF(c, x):
    """``D(F) = D(g) - D(h)`` from the closed forms of D(g) and D(h)."""
    x = _check_x(x)
    g, h = _g_h(c, x)
    e = np.exp(-x)
    d_g = ((c + 2 * x - c * x - x * x) * e * g - x * (c + x) ** 2 * e * e) / g**2
    d_h = e / h**2 * (-np.expm1(-x) - x)
    return d_g - d_h


def remark_G(c, x):
    """The sign-equivalent form G of D(F) (``D(F) = e^{-4x} G / (g h)^2``)."""
    x = np.asarray(x, dtype=float)
    return ((c + 1) * (-1 + 3 * x - x * x) * np.exp(3 * x)
            + (3 + 3 * c - 6 * x - 6 * c * x - x * x) * np.exp(2 * x)
            + (-3 - 3 * c + 3 * x + 3 * c * x + 2 * x * x + c * x * x + x**3) * np.exp(x)
            + (c + 1))


def remark_G_scaled(c, x):
    """``G(x) e^{-3x}``: same sign as G, bounded growth."""
    x = np.asarray(x, dtype=float)
    return ((c + 1) * (-1 + 3 * x - x * x)
            + (3 + 3 * c - 6 * x - 6 * c * x - x * x) * np.exp(-x)
            + (-3 - 3 * c + 3 * x + 3 * c * x + 2 * x * x + c * x * x + x**3) * np.exp(-2 * x)
            + (c + 1) * np.exp(-3 * x))


def remark_H(c, x):
    x = np.asarray(x, dtype=float)
    return ((c + 1) * (7 - 3 * x) - (14 + 12 * c + 2 * x) * np.exp(-x)
            + (7 + 5 * c + 5 * x + c * x + x * x) * np.exp(-2 * x))


def remark_H_prime(c, x):
    x = np.asarray(x, dtype=float)
    return (-3 * (c + 1) + (12 + 12 * c + 2 * x) * np.exp(-x)
            - (9 + 9 * c + 8 * x + 2 * c * x + 2 * x * x) * np.exp(-2 * x))


def remark_J(c, x):
    x = np.asarray(x, dtype=float)
    return -10 - 12 * c - 2 * x + (10 + 16 * c + 12 * x + 4 * c * x + 4 * x * x) * np.exp(-x)


def remark_J_prime(c, x):
    x = np.asarray(x, dtype=float)
    return -2 * (-np.expm1(-x)) - (12 * c + 4 * x + 4 * c * x + 4 * x * x) * np.exp(-x)


def g0(x):
    """``G_0(x) = (-1+3x-x^2) e^{3x} + (3-6x) e^{2x} + (-3+3x+x^2) e^x + 1``."""
    x = np.asarray(x, dtype=float)
    return ((-1 + 3 * x - x * x) * np.exp(3 * x) + (3 - 6 * x) * np.exp(2 * x)
            + (-3 + 3 * x + x * x) * np.exp(x) + 1)


def g0_scaled(x):
    x = np.asarray(x, dtype=float)
    return ((-1 + 3 * x - x * x) + (3 - 6 * x) * np.exp(-x)
            + (-3 + 3 * x + x * x) * np.exp(-2 * x) + np.exp(-3 * x))


def g0_root(lo: float = 1.0, hi: float = 3.0, xtol: float = 1e-10) -> float:
    """Positive zero of G_0 by bisection on [lo, hi]."""
    root, _, _ = bisect_root(lambda t: float(g0(t)), lo, hi, xtol=xtol)
    return root


@dataclass
class RemarkReport:
    c: float
    classification: str
    x0: float | None
    bracket: tuple | None
    J0: float
    J_nonincreasing: bool
    H_prime_limit: float
    sign_consistent: bool
    notes: list = field(default_factory=list)

    @property
    def r0(self):
        return None if self.x0 is None else math.sqrt(self.x0)


def remark_linear_analysis(c: float, x_max: float = 20.0, samples: int = 2000) -> RemarkReport:
    """Convexity of ln M_{2,1}(a + z, r) in ln r for c = |a|^2 >= 0.

    Locates the unique sign change x0 of G (convex on (0, x0), concave after)
    and checks the auxiliary claims on J and H'.
    """
    if not c >= 0:
        raise DomainError("c = |a|^2 must be nonnegative")
    grid = np.geomspace(1e-3, x_max, samples)
    df = remark_DF(c, grid)
    notes = []
    j0 = float(remark_J(c, 0.0))
    jgrid = np.linspace(0.0, x_max, samples)
    j_ok = bool(np.all(remark_J_prime(c, jgrid) <= 0) and np.all(np.diff(remark_J(c, jgrid)) <= 1e-12))
    h_lim = float(remark_H_prime(c, 60.0))

    # G vanishes to fourth order at 0; compare signs away from the cancellation zone
    far = grid >= 1e-2
    gs = np.sign(remark_G_scaled(c, grid[far]))
    sign_consistent = bool(np.all((gs == np.sign(df[far])) | (gs == 0) | (np.abs(df[far]) < 1e-300)))

    if c == 0:
        ok = bool(np.all(df <= 0))
        cls = "concave on (0, inf)" if ok else "indeterminate"
        if not ok:
            notes.append("D(F) > 0 at some sample with c = 0")
        return RemarkReport(c, cls, None, None, j0, j_ok, h_lim, sign_consistent, notes)

    signs = np.sign(remark_G_scaled(c, grid[far]))
    changes = np.flatnonzero(np.diff(signs) != 0)
    if changes.size != 1:
        notes.append(f"expected one sign change of G, found {changes.size}")
        return RemarkReport(c, "indeterminate", None, None, j0, j_ok, h_lim, sign_consistent, notes)
    i = changes[0]
    xs = grid[far]
    x0, lo, hi = bisect_root(lambda t: float(remark_G_scaled(c, t)), float(xs[i]), float(xs[i + 1]),
                             xtol=ROOT_XTOL)
    before = df[grid < lo]
    after = df[grid > hi]
    if np.all(before > 0) and np.all(after < 0):
        cls = "convex on (0, x0), concave on (x0, inf)"
    else:
        cls = "indeterminate"
        notes.append("D(F) sign pattern disagrees with the located transition")
    return RemarkReport(c, cls, x0, (lo, hi), j0, j_ok, h_lim, sign_consistent, notes)
