"""Nonnegative measures on the plane: atoms, densities and gridded densities.

All measures are immutable after construction.  Each supports

* ``ball_mass(a, r)``: mu(B(a, r)), with atoms on the boundary counted inside;
* ``integrate(fn, center, cutoff)``: int fn dmu, where ``fn`` takes a complex
  array.  ``center``/``cutoff`` say where fn lives (it is assumed negligible
  outside B(center, cutoff)); atomic measures ignore them.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from typing import Callable

import numpy as np

from .core import QuadratureConfig, adaptive_integrate
from .errors import DomainError, NonConvergenceError
from .parallel import pmap
from .polynomial import PowerSeriesFunction

__all__ = [
    "polar_integral",
    "AtomicMeasure",
    "DensityMeasure",
    "GridMeasure",
    "lebesgue",
    "gaussian_density",
    "atom_at_origin",
    "growing_measure",
    "zero_measure",
    "composition_measure",
    "volterra_measure",
    "measure_from_json",
    "load_measure",
]

PLANE_CONFIG = QuadratureConfig(rel_tol=1e-10, abs_tol=1e-300, max_subdivisions=2000)
ANGULAR_START = 64
ANGULAR_MAX = 4096


def polar_integral(fn: Callable[[np.ndarray], np.ndarray], center: complex, radius: float,
                   cfg: QuadratureConfig | None = None, points=()) -> float:
    """``int_{|z - center| < radius} fn(z) dA`` in polar coordinates about ``center``.

    Radial direction: adaptive Gauss-Kronrod.  Angular direction: trapezoid,
    doubled (for the whole call) until even and full node sets agree.  A
    nonsmooth angular profile stops doubling at ANGULAR_MAX and the best
    estimate is kept; likewise a radial nonconvergence returns its estimate.
    """
    cfg = cfg or PLANE_CONFIG
    center = complex(center)
    state = {"n": ANGULAR_START}

    def radial(t):
        t = np.asarray(t, dtype=float)
        while True:
            n = state["n"]
            phase = np.exp(2j * np.pi * np.arange(n) / n)
            vals = np.asarray(fn(center + t[:, None] * phase[None, :]), dtype=float)
            full = vals.mean(axis=1)
            half = vals[:, ::2].mean(axis=1)
            scale = max(float(np.max(np.abs(full))), 1e-300)
            if n >= ANGULAR_MAX or np.all(np.abs(full - half) <= cfg.rel_tol * np.maximum(np.abs(full), 1e-6 * scale)):
                return 2 * np.pi * t * full
            state["n"] = 2 * n

    try:
        return float(adaptive_integrate(radial, 0.0, radius, cfg, points))
    except NonConvergenceError as exc:
        return float(exc.estimate)


class _Measure:
    kind = "measure"
    support_radius = math.inf

    def ball_masses(self, centers, r: float) -> np.ndarray:
        centers = np.asarray(centers, dtype=complex).ravel()
        return np.array(pmap(lambda a: self.ball_mass(complex(a), r), centers), dtype=float)


@dataclass(frozen=True, eq=False)
class AtomicMeasure(_Measure):
    """``sum_j w_j delta_{z_j}`` with w_j >= 0."""

    points: np.ndarray
    weights: np.ndarray
    kind = "atoms"

    def __init__(self, points, weights):
        pts = np.array(points, dtype=complex).ravel()
        w = np.array(weights, dtype=float).ravel()
        if pts.shape != w.shape:
            raise DomainError("points and weights differ in length")
        if np.any(~np.isfinite(w)) or np.any(w < 0) or np.any(~np.isfinite(pts)):
            raise DomainError("atom weights must be finite and nonnegative")
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @property
    def support_radius(self) -> float:
        keep = self.weights > 0
        return float(np.max(np.abs(self.points[keep]))) if np.any(keep) else 0.0

    def ball_mass(self, a: complex, r: float) -> float:
        if not r > 0:
            raise DomainError("r must be positive")
        inside = np.abs(self.points - a) <= r
        return math.fsum(self.weights[inside])

    def ball_masses(self, centers, r: float) -> np.ndarray:
        centers = np.asarray(centers, dtype=complex).ravel()
        out = np.empty(centers.size)
        for i0 in range(0, centers.size, 256):
            block = centers[i0:i0 + 256]
            inside = np.abs(block[:, None] - self.points[None, :]) <= r
            out[i0:i0 + 256] = [math.fsum(self.weights[row]) for row in inside]
        return out

    def integrate(self, fn, center=0j, cutoff=math.inf) -> float:
        if self.points.size == 0:
            return 0.0
        return math.fsum(self.weights * np.asarray(fn(self.points), dtype=float))

    def union(self, other: "AtomicMeasure") -> "AtomicMeasure":
        return AtomicMeasure(np.concatenate([self.points, other.points]),
                             np.concatenate([self.weights, other.weights]))


@dataclass(frozen=True, eq=False)
class DensityMeasure(_Measure):
    """``rho(z) dA(z)`` for a nonnegative vectorised ``rho``.

    ``support_radius``: rho vanishes outside B(0, support_radius).
    ``radial``: rho depends on |z| only (enables 1-D routes downstream).
    """

    density: Callable[[np.ndarray], np.ndarray]
    support_radius: float = math.inf
    radial: bool = False
    name: str = "density"
    kind = "density"

    def ball_mass(self, a: complex, r: float) -> float:
        if not r > 0:
            raise DomainError("r must be positive")
        if abs(a) - r >= self.support_radius:
            return 0.0
        brk = [abs(a)] if 0 < abs(a) < r else []
        return polar_integral(self.density, a, r, points=brk)

    def integrate(self, fn, center=0j, cutoff=math.inf) -> float:
        radius = cutoff
        if math.isfinite(self.support_radius):
            radius = min(radius, abs(center) + self.support_radius)
        if math.isinf(radius):
            raise DomainError("integrand cutoff needed for an unbounded density")
        return polar_integral(lambda z: fn(z) * self.density(z), center, radius)


def _corner_area(x, y, r):
    """Signed area of {u in [0, x], v in [0, y]} inside the disc |w| <= r.

    Odd in x and in y, so rectangle areas follow by inclusion-exclusion.
    """
    sx, sy = np.sign(x), np.sign(y)
    x = np.minimum(np.abs(x), r)
    y = np.minimum(np.abs(y), r)
    ustar = np.sqrt((r - y) * (r + y))
    lo = np.minimum(x, ustar)

    def prim(u):
        # (r - u)(r + u) and atan2 stay accurate as u -> r, unlike arcsin(u / r)
        root = np.sqrt((r - u) * (r + u))
        return 0.5 * (u * root + r * r * np.arctan2(u, root))

    return sx * sy * (y * lo + prim(x) - prim(lo))


@dataclass(frozen=True, eq=False)
class GridMeasure(_Measure):
    """Piecewise-constant density on square cells of side ``cell``.

    ``values[i][j]`` is the average density on the cell with lower-left
    corner ``(x0 + j*cell, y0 + i*cell)``.
    """

    cell: float
    origin: tuple
    values: np.ndarray
    kind = "grid"

    def __init__(self, cell, origin, values):
        vals = np.array(values, dtype=float)
        if vals.ndim != 2 or vals.size == 0:
            raise DomainError("grid values must be a non-empty 2-D array")
        if not cell > 0 or np.any(~np.isfinite(vals)) or np.any(vals < 0):
            raise DomainError("grid needs cell > 0 and finite nonnegative values")
        vals.setflags(write=False)
        object.__setattr__(self, "cell", float(cell))
        object.__setattr__(self, "origin", (float(origin[0]), float(origin[1])))
        object.__setattr__(self, "values", vals)

    def _corners(self):
        ny, nx = self.values.shape
        x0, y0 = self.origin
        xs = x0 + self.cell * np.arange(nx)
        ys = y0 + self.cell * np.arange(ny)
        return np.meshgrid(xs, ys)

    @property
    def support_radius(self) -> float:
        xl, yl = self._corners()
        xh = xl + self.cell
        yh = yl + self.cell
        far = np.sqrt(np.maximum(xl**2, xh**2) + np.maximum(yl**2, yh**2))
        keep = self.values > 0
        return float(far[keep].max()) if np.any(keep) else 0.0

    def _offsets(self, n):
        u = (np.arange(n) + 0.5) / n * self.cell
        ox, oy = np.meshgrid(u, u)
        return ox.ravel(), oy.ravel()

    def ball_mass(self, a: complex, r: float) -> float:
        """Exact: each cell contributes value * area(cell & disc)."""
        if not r > 0:
            raise DomainError("r must be positive")
        xl, yl = self._corners()
        xl = xl - a.real
        yl = yl - a.imag
        xh = xl + self.cell
        yh = yl + self.cell
        near = np.hypot(np.maximum(np.maximum(xl, -xh), 0.0), np.maximum(np.maximum(yl, -yh), 0.0))
        hit = (near < r) & (self.values > 0)
        if not np.any(hit):
            return 0.0
        xl, xh, yl, yh = xl[hit], xh[hit], yl[hit], yh[hit]
        area = (_corner_area(xh, yh, r) - _corner_area(xl, yh, r)
                - _corner_area(xh, yl, r) + _corner_area(xl, yl, r))
        return math.fsum(self.values[hit] * np.maximum(area, 0.0))

    def integrate(self, fn, center=0j, cutoff=math.inf) -> float:
        # 4 x 4 midpoint rule per cell
        ox, oy = self._offsets(4)
        xl, yl = self._corners()
        keep = self.values > 0
        z = (xl[keep][:, None] + ox[None, :]) + 1j * (yl[keep][:, None] + oy[None, :])
        cell_means = np.asarray(fn(z), dtype=float).mean(axis=1)
        return math.fsum(self.values[keep] * cell_means * self.cell**2)


# ---------------------------------------------------------------------------
# built-ins and induced measures

def lebesgue() -> DensityMeasure:
    return DensityMeasure(lambda z: np.ones(np.shape(z)), radial=True, name="lebesgue")


def gaussian_density() -> DensityMeasure:
    return DensityMeasure(lambda z: np.exp(-np.abs(z) ** 2), radial=True, name="gaussian")


def atom_at_origin(weight: float = 1.0) -> AtomicMeasure:
    return AtomicMeasure([0j], [weight])


def zero_measure() -> AtomicMeasure:
    return AtomicMeasure([], [])


def growing_measure(m: int, q: float, s: float = 1.0, radius: float = 10.0) -> AtomicMeasure:
    """Atoms on s Z^2 inside B(0, radius) with weights (1 + |a|)^(mq + 1).

    Ball masses outgrow (1 + |a|)^(mq), so the sup statistic is unbounded.
    """
    if not s > 0 or not radius > 0:
        raise DomainError("need s > 0 and radius > 0")
    n = int(math.floor(radius / s))
    idx = np.arange(-n, n + 1)
    pts = (s * idx[None, :] + 1j * s * idx[:, None]).ravel()
    pts = pts[np.abs(pts) <= radius]
    return AtomicMeasure(pts, (1 + np.abs(pts)) ** (m * q + 1))


def composition_measure(a: complex, b: complex, q: float) -> DensityMeasure:
    """Pushforward of e^{-q|z|^2/2} dA under phi(z) = a z + b."""
    a = complex(a)
    b = complex(b)
    if a == 0:
        raise DomainError("phi(z) = b is degenerate (a = 0)")
    if not q > 0:
        raise DomainError("q must be positive")
    jac = 1.0 / abs(a) ** 2

    def density(w):
        return jac * np.exp(-0.5 * q * np.abs((w - b) / a) ** 2)

    return DensityMeasure(density, radial=(b == 0), name=f"composition(a={a}, b={b}, q={q})")


def volterra_measure(phi: PowerSeriesFunction, q: float) -> _Measure:
    """``(|phi'(z)| / (1 + |z|))^q dA``; zero measure for constant phi."""
    if not q > 0:
        raise DomainError("q must be positive")
    dphi = phi.derivative()
    if dphi.is_zero():
        return zero_measure()

    def density(z):
        return (np.abs(dphi(z)) / (1 + np.abs(z))) ** q

    return DensityMeasure(density, radial=dphi.monomial_index() is not None, name="volterra")


def _schema():
    text = resources.files("gaussmeans").joinpath("schemas/measure.schema.json").read_text()
    return json.loads(text)


def measure_from_json(doc) -> _Measure:
    """Build a measure from ``{"atoms": [[re, im, w], ...]}`` or
    ``{"grid": {"cell": h, "origin": [x0, y0], "values": [[...], ...]}}``."""
    import jsonschema

    try:
        jsonschema.validate(doc, _schema())
    except jsonschema.ValidationError as exc:
        raise DomainError(f"invalid measure document: {exc.message}") from exc
    if "atoms" in doc:
        atoms = doc["atoms"]
        return AtomicMeasure([complex(re, im) for re, im, _ in atoms], [w for _, _, w in atoms])
    grid = doc["grid"]
    rows = grid["values"]
    if len({len(r) for r in rows}) != 1:
        raise DomainError("grid rows must have equal length")
    return GridMeasure(grid["cell"], grid["origin"], rows)


def load_measure(path) -> _Measure:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DomainError(f"cannot read measure file {path}: {exc}") from exc
    return measure_from_json(doc)
