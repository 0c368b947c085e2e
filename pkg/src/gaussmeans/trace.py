"""Fock-Sobolev norms, Carleson-type ball statistics, trace ratios, and the
sharp Gaussian inequalities (Poincare, isoperimetric-Sobolev, Khinchine).

Weighted integrals are formed in log space where the test function allows it:
for a kernel k_a the weighted modulus |k_a(z)| e^{-|z|^2/2} = e^{-|z-a|^2/2}
never overflows even when k_a itself would.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import OVERFLOW_EXPONENT, QuadratureConfig
from .errors import DomainError, OverflowGuardError
from .means import _gaussian_cutoff, means_at_infinity
from .measures import polar_integral
from .polynomial import PowerSeriesFunction

__all__ = [
    "kernel_eval",
    "kernel_remainder",
    "Kernel",
    "KernelRemainder",
    "fock_sobolev_norm",
    "lq_norm",
    "trace_ratio",
    "FamilySweep",
    "trace_ratio_family",
    "kernel_ratio_profile",
    "LatticeParams",
    "lattice_centers",
    "SupStatistic",
    "carleson_sup_statistic",
    "SumStatistic",
    "carleson_sum_statistic",
    "ball_mass",
    "InequalitySides",
    "poincare_gap",
    "poincare_gap_quadrature",
    "iso_sobolev_check",
    "rademacher",
    "KhinchineResult",
    "khinchine_check",
]


# ---------------------------------------------------------------------------
# kernels and test functions

def kernel_eval(w: complex, z):
    """``k_w(z) = exp(z conj(w) - |w|^2 / 2)``."""
    expo = np.asarray(z, dtype=complex) * np.conj(w) - 0.5 * abs(w) ** 2
    if np.any(expo.real > OVERFLOW_EXPONENT):
        raise OverflowGuardError("Re(z conj(w)) too large for exp")
    out = np.exp(expo)
    return complex(out) if out.ndim == 0 else out


def _remainder_series(u, m, terms=40):
    """``sum_{j>=0} u^j / (j+m)!`` for small |u| (Horner, highest term first)."""
    acc = np.zeros_like(u)
    for j in range(terms, -1, -1):
        acc = acc * u / (j + m + 1) + 1.0
    # acc = sum_j u^j m!/(j+m)!  -> divide by m!
    return acc / math.factorial(m)


def kernel_remainder(a: complex, z, m: int):
    """``(e^{z conj(a)} - p_m(z conj(a))) / z^m`` with p_m the Taylor
    polynomial of exp of order m - 1 (p_0 = 0).  Entire in z; at z = 0 the
    value is conj(a)^m / m!.
    """
    if int(m) != m or m < 0:
        raise DomainError("m must be a nonnegative integer")
    z = np.asarray(z, dtype=complex)
    ab = np.conj(complex(a))
    u = z * ab
    if np.any(u.real > OVERFLOW_EXPONENT):
        raise OverflowGuardError("Re(z conj(a)) too large for exp")
    if m == 0:
        out = np.exp(u)
    else:
        small = np.abs(u) < 1.0
        out = np.empty_like(u)
        out[small] = ab**m * _remainder_series(u[small], m)
        big = ~small
        if np.any(big):
            ub = u[big]
            poly = np.zeros_like(ub)
            for n in range(m - 1, -1, -1):
                poly = poly * ub / (n + 1) + 1.0
            # poly is now sum_{n<m} u^n / n!
            out[big] = (np.exp(ub) - poly) / z[big] ** m
    return complex(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Kernel:
    """Normalised kernel k_a as a test function."""

    a: complex

    def __call__(self, z):
        return kernel_eval(self.a, z)

    def log_abs(self, z):
        z = np.asarray(z, dtype=complex)
        return (z * np.conj(self.a)).real - 0.5 * abs(self.a) ** 2

    @property
    def center(self):
        return complex(self.a)


@dataclass(frozen=True)
class KernelRemainder:
    """``(e^{z conj(a)} - p_m(z conj(a))) / z^m`` as a test function."""

    a: complex
    m: int

    def __call__(self, z):
        return kernel_remainder(self.a, z, self.m)

    def log_abs(self, z):
        with np.errstate(divide="ignore"):
            return np.log(np.abs(kernel_remainder(self.a, z, self.m)))

    @property
    def center(self):
        return complex(self.a)


def _log_abs(f, z):
    if hasattr(f, "log_abs"):
        return f.log_abs(z)
    with np.errstate(divide="ignore"):
        return np.log(np.abs(f(z)))


def _reach(f, p, m=0):
    """(center, radius) outside which ``|z^m f|^p e^{-p|z|^2/2}`` is negligible."""
    if isinstance(f, PowerSeriesFunction):
        g = f.times_z_power(m)
        return 0j, _gaussian_cutoff(g, p, 0.5 * p)
    c = f.center
    rho = math.sqrt(80.0 / p) + math.sqrt(2.0 * m) + 2.0
    # remainders are spread between 0 and a; kernels sit in a Gaussian bump at a
    return c, (abs(c) + rho if isinstance(f, KernelRemainder) else rho)


def _is_zero(f):
    return isinstance(f, PowerSeriesFunction) and f.is_zero()


def fock_sobolev_norm(f, p: float, m: int = 0, route: str = "auto",
                      cfg: QuadratureConfig | None = None) -> float:
    """``(int |z^m f(z) e^{-|z|^2/2}|^p dA)^(1/p)``.

    For polynomials with p = 2 the monomials are orthogonal and the norm is
    ``sqrt(pi sum |a_k|^2 (k+m)!)`` (route "closed").  The quadrature route
    uses ``(2 pi / p) M_{p,p/2}(z^m f, inf)`` for polynomials and a plane
    integral about the function's center otherwise.
    """
    if not p > 0:
        raise DomainError("p must be positive")
    if int(m) != m or m < 0:
        raise DomainError("m must be a nonnegative integer")
    if _is_zero(f):
        return 0.0
    if isinstance(f, PowerSeriesFunction):
        if route == "auto":
            route = "closed" if p == 2 else "quadrature"
        if route == "closed":
            if p != 2:
                raise DomainError("closed form needs p = 2")
            k = np.arange(f.degree + 1)
            terms = np.abs(f.coeffs[: f.degree + 1]) ** 2 * np.array([math.factorial(int(j + m)) for j in k], dtype=float)
            return math.sqrt(math.pi * math.fsum(terms))
        if route != "quadrature":
            raise DomainError(f"unknown route {route!r}")
        total = (2 * math.pi / p) * means_at_infinity(f.times_z_power(m), p, 0.5 * p, cfg)
        return total ** (1.0 / p)
    center, radius = _reach(f, p, m)

    def integrand(z):
        with np.errstate(divide="ignore"):
            return np.exp(p * (_log_abs(f, z) + m * np.log(np.abs(z)) - 0.5 * np.abs(z) ** 2))

    return polar_integral(integrand, center, radius) ** (1.0 / p)


def lq_norm(f, mu, q: float) -> float:
    """``(int |f(z) e^{-|z|^2/2}|^q dmu(z))^(1/q)``."""
    if not q > 0:
        raise DomainError("q must be positive")
    if _is_zero(f):
        return 0.0
    center, radius = _reach(f, q)

    def integrand(z):
        return np.exp(q * (_log_abs(f, z) - 0.5 * np.abs(z) ** 2))

    return mu.integrate(integrand, center, radius) ** (1.0 / q)


def trace_ratio(f, mu, p: float, q: float, m: int = 0) -> float:
    """``||f||_{L^q(mu)} / ||f||_{F^{p,m}}``."""
    den = fock_sobolev_norm(f, p, m)
    if not den > 0:
        raise DomainError("test function has zero Fock-Sobolev norm")
    return lq_norm(f, mu, q) / den


@dataclass
class FamilySweep:
    kind: str
    labels: list
    ratios: list

    @property
    def max_ratio(self) -> float:
        return max(self.ratios)

    @property
    def argmax(self):
        return self.labels[int(np.argmax(self.ratios))]


def trace_ratio_family(kind: str, mu, p: float, q: float, m: int = 0,
                       degree: int = 10, radius: float = 6.0, spacing: float = 1.0) -> FamilySweep:
    """Trace ratios over a test family.

    ``kind``: "monomials" (z^0..z^degree), "kernels" (k_a, a in spacing*Z^2,
    |a| <= radius) or "remainders" (kernel remainders of order m at the same
    points; a = 0 is skipped when m >= 1 since the member vanishes).
    """
    if kind == "monomials":
        members = [(k, PowerSeriesFunction.monomial(k)) for k in range(degree + 1)]
    elif kind in ("kernels", "remainders"):
        pts = lattice_centers(spacing, radius)
        if kind == "kernels":
            members = [(complex(a), Kernel(complex(a))) for a in pts]
        else:
            members = [(complex(a), KernelRemainder(complex(a), m)) for a in pts if not (m >= 1 and a == 0)]
    else:
        raise DomainError(f"unknown family {kind!r}")
    ratios = [trace_ratio(f, mu, p, q, m) for _, f in members]
    return FamilySweep(kind, [lab for lab, _ in members], ratios)


def kernel_ratio_profile(mu, p: float, q: float, m: int, moduli=(2.0, 4.0, 6.0)):
    """Trace ratios of k_a for a on the positive real axis at the given moduli."""
    return [trace_ratio(Kernel(complex(t)), mu, p, q, m) for t in moduli]


# ---------------------------------------------------------------------------
# lattice statistics

@dataclass(frozen=True)
class LatticeParams:
    """Lattice s Z^2 truncated to |a| <= R_trunc, balls of radius r."""

    r: float
    p: float = 2.0
    q: float = 2.0
    m: int = 0
    s: float | None = None
    R_trunc: float | None = None

    def __post_init__(self):
        if not self.r > 0:
            raise DomainError("r must be positive")
        if self.s is None:
            object.__setattr__(self, "s", self.r / 2)
        if self.R_trunc is None:
            object.__setattr__(self, "R_trunc", 10.0 * max(1.0, self.r))
        if not 0 < self.s <= self.r:
            raise DomainError(f"need 0 < s <= r, got s={self.s}, r={self.r}")
        if self.R_trunc < 10.0 * max(1.0, self.r):
            raise DomainError("R_trunc must be at least 10 max(1, r)")
        if not (self.p > 0 and self.q > 0) or int(self.m) != self.m or self.m < 0:
            raise DomainError("need p, q > 0 and integer m >= 0")


def lattice_centers(s: float, radius: float) -> np.ndarray:
    """Points of s Z^2 with |a| <= radius, ordered by row then column."""
    n = int(math.floor(radius / s + 1e-12))
    idx = np.arange(-n, n + 1)
    pts = (s * idx[None, :] + 1j * s * idx[:, None]).ravel()
    return pts[np.abs(pts) <= radius * (1 + 1e-12)]


def ball_mass(mu, a: complex, r: float) -> float:
    return mu.ball_mass(complex(a), r)


def _shell_maxima(centers, values, radius, shells=4):
    band = np.minimum((np.abs(centers) / radius * shells).astype(int), shells - 1)
    return [float(values[band == b].max()) if np.any(band == b) else 0.0 for b in range(shells)]


@dataclass
class SupStatistic:
    value: float
    argmax: complex
    truncated: bool
    unbounded: bool
    shell_maxima: list
    notes: list = field(default_factory=list)

    @property
    def verdict(self) -> str:
        return "unbounded" if self.unbounded else "bounded"


def carleson_sup_statistic(mu, lat: LatticeParams, growth_margin: float = 1e-3,
                           min_slope: float = 0.5) -> SupStatistic:
    """Sampled ``sup_a mu(B(a,r)) / (1+|a|)^(mq)`` over the truncated lattice.

    After the lattice scan a quarter-spacing patch around the argmax is
    evaluated.  The result is a lower bound for the continuum sup.  The
    ``unbounded`` flag is a growth heuristic over four equal bands in |a|:
    the band maxima of the outer three bands increase strictly (each by more
    than ``growth_margin`` relative) and the outermost band holds the
    overall maximum, and the last step still grows like (1+|a|)^min_slope
    or faster.  The slope test separates genuine growth from a statistic
    that saturates towards a finite limit.  The innermost band is left out
    of the chain because a ball at the origin can collect heavy neighbours
    without any growth.
    """
    centers = lattice_centers(lat.s, lat.R_trunc)
    weight = (1 + np.abs(centers)) ** (lat.m * lat.q)
    stats = mu.ball_masses(centers, lat.r) / weight
    i = int(np.argmax(stats))
    best, arg = float(stats[i]), complex(centers[i])
    offs = np.arange(-4, 5) * lat.s / 4
    patch = (arg + offs[None, :] + 1j * offs[:, None]).ravel()
    patch = patch[patch != arg]
    pstats = mu.ball_masses(patch, lat.r) / (1 + np.abs(patch)) ** (lat.m * lat.q)
    j = int(np.argmax(pstats))
    if pstats[j] > best:
        best, arg = float(pstats[j]), complex(patch[j])
    shells = _shell_maxima(centers, stats, lat.R_trunc)
    outer = shells[1:]
    growing = (all(b > a * (1 + growth_margin) for a, b in zip(outer, outer[1:]))
               and shells[-1] >= max(shells))
    if growing:
        R = lat.R_trunc
        slope = math.log(shells[-1] / shells[-2]) / math.log((1 + R) / (1 + 0.75 * R))
        growing = slope >= min_slope
    truncated = mu.support_radius > lat.R_trunc - lat.r
    notes = ["sampled sup (lattice + quarter-spacing refinement): a lower bound"]
    if truncated:
        notes.append(f"measure support extends beyond R_trunc - r = {lat.R_trunc - lat.r:g}")
    return SupStatistic(best, arg, truncated, growing, shells, notes)


@dataclass
class SumStatistic:
    value: float
    tail_bound: float
    divergent: bool
    n_terms: int
    notes: list = field(default_factory=list)


def carleson_sum_statistic(mu, lat: LatticeParams, decay_ratio: float = 0.1) -> SumStatistic:
    """``sum_{a in sZ^2} (mu(B(a,r)) / (1+|a|)^(mq))^(p/(p-q))`` for q < p.

    Terms are formed as exp(e * (ln mass - mq ln(1+|a|))).  The tail is 0
    when the support sits inside B(0, R_trunc - r), otherwise unknown (inf).
    ``divergent`` flags an unbounded support whose outermost-shell mean term
    is at least ``decay_ratio`` times the innermost-shell mean.
    """
    if not lat.q < lat.p:
        raise DomainError("lattice-sum statistic needs q < p (exponent p/(p-q))")
    e = lat.p / (lat.p - lat.q)
    centers = lattice_centers(lat.s, lat.R_trunc)
    mass = mu.ball_masses(centers, lat.r)
    pos = mass > 0
    logt = np.full(centers.shape, -np.inf)
    logt[pos] = e * (np.log(mass[pos]) - lat.m * lat.q * np.log1p(np.abs(centers[pos])))
    top = float(logt.max()) if np.any(pos) else 0.0
    shift = top if abs(top) > OVERFLOW_EXPONENT else 0.0
    terms = np.exp(logt - shift)
    total = math.fsum(terms)
    notes = []
    if shift and total > 0 and math.log(total) + shift > OVERFLOW_EXPONENT:
        value = math.inf
        notes.append(f"sum exceeds double range: ln(sum) = {math.log(total) + shift:.12g}")
    else:
        value = total * math.exp(shift) if shift else total
    contained = mu.support_radius < lat.R_trunc - lat.r
    tail = 0.0 if contained else math.inf
    divergent = False
    if not contained:
        band = np.minimum((np.abs(centers) / lat.R_trunc * 4).astype(int), 3)
        inner = float(np.mean(terms[band == 0]))
        outer = float(np.mean(terms[band == 3]))
        divergent = inner > 0 and outer >= decay_ratio * inner
        notes.append("support not contained in the truncation disc; tail bound unavailable")
        if divergent:
            notes.append("terms do not decay across the lattice: sum grows with lattice size")
    return SumStatistic(value, tail, divergent, int(centers.size), notes)


# ---------------------------------------------------------------------------
# sharp inequalities

@dataclass(frozen=True)
class InequalitySides:
    lhs: float
    rhs: float

    @property
    def ok(self) -> bool:
        return self.lhs <= self.rhs * (1 + 1e-12) + 1e-300

    def __iter__(self):
        return iter((self.lhs, self.rhs))


def poincare_gap(f: PowerSeriesFunction) -> InequalitySides:
    """Closed forms ``pi sum_{k>=1} |a_k|^2 k!`` and ``pi sum_{k>=1} |a_k|^2 k k!``.

    They equal ``int |f e^{-|z|^2/2}|^2 dA - pi |f(0)|^2`` and
    ``int |f' e^{-|z|^2/2}|^2 dA``.
    """
    lhs = []
    rhs = []
    for k in range(1, f.degree + 1):
        a2 = abs(complex(f.coeffs[k])) ** 2
        fact = float(math.factorial(k))
        lhs.append(a2 * fact)
        rhs.append(a2 * k * fact)
    return InequalitySides(math.pi * math.fsum(lhs), math.pi * math.fsum(rhs))


def poincare_gap_quadrature(f: PowerSeriesFunction, cfg: QuadratureConfig | None = None) -> InequalitySides:
    """Both sides of the Poincare gap through Gaussian means at infinity."""
    lhs = math.pi * (means_at_infinity(f, 2.0, 1.0, cfg) - abs(complex(f.coeffs[0])) ** 2)
    rhs = math.pi * means_at_infinity(f.derivative(), 2.0, 1.0, cfg)
    return InequalitySides(lhs, rhs)


def iso_sobolev_check(f: PowerSeriesFunction, sharp: bool = True,
                      cfg: QuadratureConfig | None = None) -> InequalitySides:
    """``int |f e^{-|z|^2/2}|^2 dA - pi |f(0)|^2 <= C (int |f'| e^{-|z|^2/2} dA)^2``.

    C = 1/(4 pi) (sharp; monomials only) or 1/(2 pi).  For c z^k both sides
    are closed forms: lhs = pi |c|^2 k!, sharp rhs = pi |c|^2 k^2 2^(k-1)
    Gamma((k+1)/2)^2.
    """
    lhs = poincare_gap(f).lhs
    mono = f.monomial_index()
    if f.is_constant():
        return InequalitySides(0.0, 0.0)
    if mono is not None:
        k, c = mono
        log_rhs = 2 * math.log(k) + (k - 1) * math.log(2.0) + 2 * math.lgamma((k + 1) / 2)
        if log_rhs > OVERFLOW_EXPONENT:
            raise OverflowGuardError(f"k = {k} is too large for double precision")
        rhs = math.pi * abs(c) ** 2 * math.exp(log_rhs)
        return InequalitySides(lhs, rhs if sharp else 2 * rhs)
    if sharp:
        raise DomainError("the sharp constant is only established for monomials")
    grad = 2 * math.pi * means_at_infinity(f.derivative(), 1.0, 0.5, cfg)
    return InequalitySides(lhs, grad * grad / (2 * math.pi))


# ---------------------------------------------------------------------------
# Rademacher functions and Khinchine averages

def rademacher(j: int, t):
    """``r_j(t) = r_0(2^j t)``, r_0 = +1 on [0, 1/2) and -1 on [1/2, 1) (mod 1)."""
    if int(j) != j or j < 0:
        raise DomainError("j must be a nonnegative integer")
    t = np.asarray(t, dtype=float)
    if np.any((t < 0) | (t >= 1)):
        raise DomainError("t must lie in [0, 1)")
    u = np.ldexp(t, int(j))
    frac = u - np.floor(u)
    out = np.where(frac < 0.5, 1, -1)
    return int(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class KhinchineResult:
    lp_avg: float
    l2_norm: float

    @property
    def ratio(self) -> float:
        return self.lp_avg / self.l2_norm if self.l2_norm else math.nan

    def __iter__(self):
        return iter((self.lp_avg, self.l2_norm))


def khinchine_check(c, p: float, nodes: int | None = None) -> KhinchineResult:
    """``(int_0^1 |sum_j c_j r_j(t)|^p dt)^(1/p)`` and ``(sum |c_j|^2)^(1/2)``.

    c_1..c_n multiply r_1..r_n, all constant on dyadic intervals of length
    2^-(n+1); the integral is an exact finite average over their midpoints.
    ``nodes`` may request a finer dyadic partition (a multiple of 2^(n+1)).
    """
    c = np.asarray(c, dtype=complex).ravel()
    if not p > 0:
        raise DomainError("p must be positive")
    n = c.size
    if n == 0:
        return KhinchineResult(0.0, 0.0)
    base = 2 ** (n + 1)
    nodes = base if nodes is None else int(nodes)
    if nodes % base:
        raise DomainError(f"nodes must be a multiple of {base}")
    t = (np.arange(nodes) + 0.5) / nodes
    total = np.zeros(nodes, dtype=complex)
    for j in range(1, n + 1):
        total += c[j - 1] * rademacher(j, t)
    lp = (math.fsum(np.abs(total) ** p) / nodes) ** (1.0 / p)
    return KhinchineResult(lp, math.sqrt(math.fsum(np.abs(c) ** 2)))
