"""Special-function kernels and quadrature primitives shared by the other modules.

The central object is the weighted power integral

    f_lam(x) = int_0^x t**lam * exp(-alpha * t) dt,

a rescaled lower incomplete gamma function.  It is evaluated through the
factorisation ``f_lam(x) = x**(lam+1) * exp(-alpha*x) * K(lam+1, alpha*x)``
where ``K(s, w) = int_0^1 u**(s-1) exp(w (1-u)) du`` is a Kummer function
with a positive series on both sides of ``w = 0``.  Working with ``log K``
keeps every ratio used by the convexity code free of overflow.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (
    DivergentIntegralError,
    DomainError,
    NonConvergenceError,
    OverflowGuardError,
)

__all__ = [
    "QuadratureConfig",
    "DEFAULT_CONFIG",
    "COMPOSITE_CONFIG",
    "adaptive_integrate",
    "periodic_trapezoid",
    "log_kummer",
    "log_weighted_power_integral",
    "weighted_power_integral",
    "weighted_power_integral_derivs",
    "gamma_half_ratio",
    "bisect_root",
    "log_grid",
    "OVERFLOW_EXPONENT",
]

# exp(700) is still finite in double precision
OVERFLOW_EXPONENT = 700.0


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances and budgets for the quadrature routines."""

    rel_tol: float = 1e-12
    abs_tol: float = 1e-300
    max_subdivisions: int = 4000
    angular_nodes: int = 32
    max_angular_nodes: int = 4096

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise DomainError(f"rel_tol must be positive, got {self.rel_tol}")
        if self.abs_tol < 0:
            raise DomainError(f"abs_tol must be nonnegative, got {self.abs_tol}")
        if self.angular_nodes < 8 or self.angular_nodes % 2:
            raise DomainError(f"angular_nodes must be even and >= 8, got {self.angular_nodes}")
        if self.max_angular_nodes < self.angular_nodes:
            raise DomainError("max_angular_nodes must be >= angular_nodes")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be >= 1")


DEFAULT_CONFIG = QuadratureConfig()
# composite (nested 2-D) evaluations
COMPOSITE_CONFIG = QuadratureConfig(rel_tol=1e-10, abs_tol=1e-300)


# ---------------------------------------------------------------------------
# Gauss-Kronrod 7/15 rule (QUADPACK qk15 constants)

_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KW = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GW = np.zeros(15)
_GW[1:14:2] = np.concatenate([_WG[:-1], _WG[::-1]])

_EPS = np.finfo(float).eps
_TINY = np.finfo(float).tiny


def _gk15(integrand, lo, hi):
    """Apply the 15-point rule to many intervals at once."""
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    pts = center[:, None] + half[:, None] * _NODES[None, :]
    vals = np.asarray(integrand(pts.ravel()), dtype=float).reshape(pts.shape)
    if not np.all(np.isfinite(vals)):
        raise NonConvergenceError("integrand returned a non-finite value")
    resk = vals @ _KW
    resg = vals @ _GW
    mean = 0.5 * resk
    resasc = np.abs(vals - mean[:, None]) @ _KW
    resabs = np.abs(vals) @ _KW
    err = np.abs(resk - resg)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = np.where(
            (resasc != 0) & (err != 0),
            resasc * np.minimum(1.0, (200.0 * err / np.where(resasc == 0, 1, resasc)) ** 1.5),
            err,
        )
    floor = np.where(resabs > _TINY / (50 * _EPS), 50 * _EPS * resabs, 0.0)
    err = np.maximum(scaled, floor) * np.abs(half)
    return resk * half, err


def adaptive_integrate(
    integrand: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    cfg: QuadratureConfig | None = None,
    points: Sequence[float] = (),
    return_error: bool = False,
):
    """Globally adaptive Gauss-Kronrod quadrature of a vectorised integrand.

    ``integrand`` receives a 1-D array of abscissae and must return values of
    the same shape.  ``b`` may be ``inf``; the half-line is then mapped onto
    ``[0, 1)``.  ``points`` are interior breakpoints (kinks, near-singular
    locations) where the initial partition is split.

    Raises NonConvergenceError once ``cfg.max_subdivisions`` intervals are in
    use without meeting ``max(abs_tol, rel_tol * |result|)``.
    """
    cfg = cfg or DEFAULT_CONFIG
    a = float(a)
    b = float(b)
    if math.isnan(a) or math.isnan(b) or a == -math.inf:
        raise DomainError("integration limits must be numbers with finite lower limit")
    if a > b:
        raise DomainError(f"expected a <= b, got a={a}, b={b}")
    if a == b:
        return (0.0, 0.0) if return_error else 0.0

    if math.isinf(b):
        def mapped(u):
            one_minus = 1.0 - u
            t = a + u / one_minus
            return np.asarray(integrand(t), dtype=float) / one_minus**2

        brk = [(p - a) / (1.0 + p - a) for p in points if a < p < math.inf]
        return adaptive_integrate(mapped, 0.0, 1.0, cfg, brk, return_error)

    edges = sorted({a, b, *(float(p) for p in points if a < p < b)})
    lo = np.array(edges[:-1])
    hi = np.array(edges[1:])
    vals, errs = _gk15(integrand, lo, hi)
    # max-heap on error; index breaks ties deterministically
    heap = [(-e, i, l, h, v) for i, (l, h, v, e) in enumerate(zip(lo, hi, vals, errs))]
    heapq.heapify(heap)
    counter = len(heap)
    total = math.fsum(vals)
    total_err = float(np.sum(errs))
    length = b - a

    while True:
        tol = max(cfg.abs_tol, cfg.rel_tol * abs(total))
        if total_err <= tol:
            return (total, total_err) if return_error else total
        if len(heap) >= cfg.max_subdivisions:
            raise NonConvergenceError(
                f"adaptive quadrature exceeded {cfg.max_subdivisions} subdivisions",
                estimate=total,
                error=total_err,
            )
        # split every interval carrying more than its share of the tolerance
        chosen = []
        budget = cfg.max_subdivisions - len(heap)
        while heap and len(chosen) < budget:
            neg_e, _, l, h, _v = heap[0]
            if chosen and -neg_e <= tol * (h - l) / length:
                break
            chosen.append(heapq.heappop(heap))
        if not chosen:
            chosen.append(heapq.heappop(heap))
        los = []
        his = []
        for _, _, l, h, _v in chosen:
            m = 0.5 * (l + h)
            if not (l < m < h):
                raise NonConvergenceError(
                    "interval width reached floating-point resolution",
                    estimate=total,
                    error=total_err,
                )
            los += [l, m]
            his += [m, h]
        new_vals, new_errs = _gk15(integrand, np.array(los), np.array(his))
        for (l, h, v, e) in zip(los, his, new_vals, new_errs):
            heapq.heappush(heap, (-e, counter, l, h, v))
            counter += 1
        total = math.fsum(item[4] for item in heap)
        total_err = float(sum(-item[0] for item in heap))


def _trapezoid_rows(integrand, n_rows, n0, n_max, rel_tol, abs_tol):
    """Periodic trapezoid on several rows at once with per-row doubling.

    ``integrand(theta, rows)`` returns an array of shape ``(len(rows), len(theta))``.
    Returns (values, converged mask).
    """
    rows = np.arange(n_rows)
    n = n0
    theta = 2 * np.pi * np.arange(n) / n
    current = 2 * np.pi * np.asarray(integrand(theta, rows), dtype=float).mean(axis=1)
    values = current.copy()
    converged = np.zeros(n_rows, dtype=bool)
    active = rows
    while active.size and n < n_max:
        mids = 2 * np.pi * (np.arange(n) + 0.5) / n
        extra = 2 * np.pi * np.asarray(integrand(mids, active), dtype=float).mean(axis=1)
        refined = 0.5 * (values[active] + extra)
        done = np.abs(refined - values[active]) <= np.maximum(abs_tol, rel_tol * np.abs(refined))
        values[active] = refined
        converged[active[done]] = True
        active = active[~done]
        n *= 2
    return values, converged


def periodic_trapezoid(
    integrand: Callable[[np.ndarray], np.ndarray],
    nodes: int | None = None,
    cfg: QuadratureConfig | None = None,
) -> float:
    """Integrate a 2*pi-periodic function over one period with the trapezoid rule.

    Starts at ``nodes`` equispaced points (default ``cfg.angular_nodes``) and
    doubles until two successive estimates agree to ``rel_tol``.  For smooth
    periodic integrands the convergence is geometric.
    """
    cfg = cfg or DEFAULT_CONFIG
    n0 = int(nodes or cfg.angular_nodes)
    if n0 < 2:
        raise DomainError("need at least two nodes")
    vals, ok = _trapezoid_rows(
        lambda th, rows: np.asarray(integrand(th), dtype=float)[None, :],
        1, n0, cfg.max_angular_nodes, cfg.rel_tol, cfg.abs_tol,
    )
    if not ok[0]:
        raise NonConvergenceError(
            f"periodic trapezoid not converged with {cfg.max_angular_nodes} nodes",
            estimate=float(vals[0]),
        )
    return float(vals[0])


# ---------------------------------------------------------------------------
# Weighted power integral

def _terms_needed(w_abs):
    return int(math.ceil(w_abs + 12.0 * math.sqrt(w_abs) + 40.0))


def _logsumexp(a, axis=-1):
    m = np.max(a, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    return np.squeeze(m, axis=axis) + np.log(np.sum(np.exp(a - m), axis=axis))


def log_kummer(s: float, w) -> np.ndarray:
    """``log K(s, w)`` with ``K(s, w) = int_0^1 u**(s-1) exp(w (1-u)) du`` for s > 0.

    For w >= 0 the series ``sum_n w**n / (s (s+1) ... (s+n))`` is used, for
    w < 0 the Poisson-weighted series ``sum_n e**w (-w)**n / (n! (s+n))``;
    both have positive terms.
    """
    if not s > 0:
        raise DomainError(f"s must be positive, got {s}")
    w = np.atleast_1d(np.asarray(w, dtype=float))
    out = np.empty_like(w)
    zero = w == 0
    out[zero] = -math.log(s)

    pos = w > 0
    if np.any(pos):
        wp = w[pos]
        res = np.empty_like(wp)
        # tail of the lower incomplete gamma negligible -> closed form
        big = (wp > 2 * s + 50) & (
            (s - 1) * np.log(wp) - wp - math.lgamma(s) + math.log(2) < -45
        )
        res[big] = wp[big] - s * np.log(wp[big]) + math.lgamma(s)
        small = ~big
        if np.any(small):
            ws = wp[small]
            n = np.arange(_terms_needed(float(ws.max())))
            log_poch = np.cumsum(np.log(s + n))
            terms = n[None, :] * np.log(ws)[:, None] - log_poch[None, :]
            res[small] = _logsumexp(terms)
        out[pos] = res

    neg = w < 0
    if np.any(neg):
        wn = -w[neg]
        n = np.arange(_terms_needed(float(wn.max())))
        log_fact = np.concatenate([[0.0], np.cumsum(np.log(np.arange(1, n.size)))])
        terms = (
            -wn[:, None]
            + n[None, :] * np.log(wn)[:, None]
            - log_fact[None, :]
            - np.log(s + n)[None, :]
        )
        out[neg] = _logsumexp(terms)
    return out


def _log_upper_gamma(s: float, w: np.ndarray) -> np.ndarray:
    """``log Gamma(s, w)`` by the modified-Lentz continued fraction; needs w > s + 1."""
    tiny = 1e-300
    b = w + 1.0 - s
    c = np.full_like(w, 1.0 / tiny)
    d = 1.0 / b
    h = d.copy()
    for i in range(1, 500):
        an = -i * (i - s)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < tiny, tiny, d)
        c = b + an / c
        c = np.where(np.abs(c) < tiny, tiny, c)
        d = 1.0 / d
        step = d * c
        h = h * step
        if np.all(np.abs(step - 1.0) < 1e-16):
            break
    return s * np.log(w) - w + np.log(h)


def _check_lambda_x(lam, x):
    if not lam >= 0:
        raise DomainError(f"lambda must be >= 0, got {lam}")
    xa = np.asarray(x, dtype=float)
    if np.any(np.isnan(xa)) or np.any(xa < 0):
        raise DomainError("x must be >= 0")
    return xa


def log_weighted_power_integral(lam: float, alpha: float, x):
    """Natural log of ``f_lam(x)``; ``-inf`` at x = 0.  No overflow guard needed."""
    xa = _check_lambda_x(lam, x)
    if np.any(np.isinf(xa)):
        raise DomainError("use weighted_power_integral for x = inf")
    s = lam + 1.0
    flat = np.atleast_1d(xa)
    out = np.full(flat.shape, -np.inf)
    nz = flat > 0
    if np.any(nz):
        xs = flat[nz]
        w = alpha * xs
        tail = w > s + 1.0
        res = np.empty_like(xs)
        if np.any(~tail):
            res[~tail] = s * np.log(xs[~tail]) - w[~tail] + log_kummer(s, w[~tail])
        if np.any(tail):
            # past the peak of t^lam e^{-alpha t}: Gamma(s)/alpha^s minus a small upper tail
            log_q = _log_upper_gamma(s, w[tail]) - math.lgamma(s)
            res[tail] = math.lgamma(s) - s * math.log(alpha) + np.log1p(-np.exp(log_q))
        out[nz] = res
    return out.reshape(xa.shape) if xa.ndim else float(out[0])


def _quadrature_route(lam, alpha, x, cfg):
    cfg = cfg or DEFAULT_CONFIG
    n_pieces = int(math.ceil(abs(alpha) * x / 8.0)) + 1
    brk = list(np.linspace(0.0, x, n_pieces + 1)[1:-1])
    if lam == 0:
        fn = lambda t: np.exp(-alpha * t)  # noqa: E731
    else:
        fn = lambda t: np.power(t, lam) * np.exp(-alpha * t)  # noqa: E731
    return adaptive_integrate(fn, 0.0, x, cfg, brk)


def _parts_route(n, alpha, x):
    # repeated integration by parts, integer exponent n
    if alpha == 0:
        return x ** (n + 1) / (n + 1)
    z = alpha * x
    if abs(z) <= n + 1:
        # 1 - e^{-z} sum_{j<=n} z^j/j! rewritten as its tail e^{-z} sum_{j>n} z^j/j!;
        # avoids cancellation when |z| is small
        terms = []
        term = z ** (n + 1) / math.factorial(n + 1)
        j = n + 1
        while term != 0 and abs(term) > 1e-18 * abs(terms[0] if terms else term):
            terms.append(term)
            j += 1
            term *= z / j
        return math.factorial(n) / alpha ** (n + 1) * math.exp(-z) * math.fsum(terms)
    if z > 0:
        partial = math.fsum(z**j / math.factorial(j) for j in range(n + 1))
        return math.factorial(n) / alpha ** (n + 1) * (1.0 - math.exp(-z) * partial)
    # alpha < 0: e^{bx} sum_j (-1)^j n!/(n-j)! x^(n-j) / b^(j+1) + (-1)^(n+1) n!/b^(n+1), b = -alpha
    b = -alpha
    head = math.fsum((-1) ** j * math.factorial(n) / math.factorial(n - j) * x ** (n - j) / b ** (j + 1)
                     for j in range(n + 1))
    return math.exp(b * x) * head + (-1) ** (n + 1) * math.factorial(n) / b ** (n + 1)


def weighted_power_integral(
    lam: float,
    alpha: float,
    x,
    cfg: QuadratureConfig | None = None,
    method: str = "series",
):
    """``f_lam(x) = int_0^x t**lam exp(-alpha t) dt``.

    ``method`` selects the evaluation route: ``"series"`` (default; Kummer
    series, relative accuracy near machine precision), ``"quadrature"``
    (adaptive Gauss-Kronrod, honours ``cfg``) or ``"parts"`` (closed form by
    integration by parts, integer ``lam`` only).  ``x`` may be an array for
    the series route.

    ``x = inf`` returns ``Gamma(lam+1) / alpha**(lam+1)`` for alpha > 0 and
    raises DivergentIntegralError otherwise.  For alpha < 0 the value grows
    like ``exp(|alpha| x)``; inputs with ``|alpha| x > 700`` are rejected.
    """
    xa = _check_lambda_x(lam, x)
    if np.any(np.isinf(xa)):
        if xa.ndim:
            raise DomainError("x = inf only supported for scalar input")
        if alpha <= 0:
            raise DivergentIntegralError(
                f"int_0^inf t^lam exp(-alpha t) dt diverges for alpha={alpha}"
            )
        return math.exp(math.lgamma(lam + 1) - (lam + 1) * math.log(alpha))
    if alpha < 0 and np.any(-alpha * xa > OVERFLOW_EXPONENT):
        raise OverflowGuardError(
            f"x beyond {OVERFLOW_EXPONENT}/|alpha| = {OVERFLOW_EXPONENT / -alpha:g} is overflow-unsafe"
        )

    if method == "series":
        logv = log_weighted_power_integral(lam, alpha, xa)
        return np.exp(logv) if xa.ndim else float(math.exp(logv))
    if xa.ndim:
        return np.array([weighted_power_integral(lam, alpha, float(v), cfg, method) for v in xa])
    xv = float(xa)
    if xv == 0:
        return 0.0
    if method == "quadrature":
        return _quadrature_route(lam, alpha, xv, cfg)
    if method == "parts":
        if lam != int(lam):
            raise DomainError("integration-by-parts route needs an integer lambda")
        return _parts_route(int(lam), alpha, xv)
    raise DomainError(f"unknown method {method!r}")


def weighted_power_integral_derivs(lam: float, alpha: float, x):
    """First three x-derivatives of ``f_lam``: ``(h', h'', h''')`` in closed form."""
    if not lam >= 0:
        raise DomainError(f"lambda must be >= 0, got {lam}")
    xa = np.asarray(x, dtype=float)
    if np.any(~(xa > 0)):
        raise DomainError("derivatives require x > 0")
    e = np.exp(-alpha * xa)
    h1 = xa**lam * e
    h2 = (lam - alpha * xa) * xa ** (lam - 1) * e
    h3 = xa ** (lam - 2) * e * (lam * lam - lam - 2 * lam * alpha * xa + alpha**2 * xa**2)
    if xa.ndim == 0:
        return float(h1), float(h2), float(h3)
    return h1, h2, h3


def gamma_half_ratio(k: int) -> float:
    """``Gamma((k+1)/2) / Gamma(k/2)`` for a positive integer k."""
    if int(k) != k or k < 1:
        raise DomainError(f"k must be a positive integer, got {k}")
    return math.exp(math.lgamma((k + 1) / 2) - math.lgamma(k / 2))


# ---------------------------------------------------------------------------

def bisect_root(fn: Callable[[float], float], lo: float, hi: float,
                xtol: float = 1e-12, max_iter: int = 400):
    """Bisection on a sign change.  Returns ``(root, lo, hi)`` with ``hi - lo <= xtol``."""
    flo = fn(lo)
    fhi = fn(hi)
    if flo == 0:
        return lo, lo, lo
    if fhi == 0:
        return hi, hi, hi
    if (flo > 0) == (fhi > 0):
        raise DomainError(f"no sign change on [{lo}, {hi}]: f(lo)={flo}, f(hi)={fhi}")
    for _ in range(max_iter):
        if hi - lo <= xtol:
            break
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        fm = fn(mid)
        if fm == 0:
            return mid, mid, mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
    return 0.5 * (lo + hi), lo, hi


def log_grid(lo: float, hi: float, per_decade: int = 400) -> np.ndarray:
    """Log-spaced points covering [lo, hi] with ``per_decade`` points per decade."""
    if not 0 < lo < hi:
        raise DomainError("need 0 < lo < hi")
    n = max(2, int(math.ceil(per_decade * math.log10(hi / lo))) + 1)
    return np.geomspace(lo, hi, n)
