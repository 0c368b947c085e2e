"""Acceptance criteria shared by ``gml verify-paper`` and the test suite.

Each check returns a :class:`CriterionResult` whose ``detail`` holds only
deterministic quantities (no timings), so that reports for a fixed seed
are byte-identical.  Runtime limits enter only through ``passed``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .convexity import (
    classify_monomial_means,
    corollary_c_bound,
    delta1_bracket,
    delta_functional,
    g0_root,
    proof_diagnostics,
    remark_DF,
    remark_linear_analysis,
    second_differences,
    series_convexity_check,
)
from .core import bisect_root, gamma_half_ratio, log_grid
from .means import maximum_principle_check, means_monomial, means_profile, means_series_p2
from .measures import atom_at_origin, growing_measure, lebesgue
from .polynomial import PowerSeriesFunction
from .trace import (
    LatticeParams,
    carleson_sum_statistic,
    carleson_sup_statistic,
    iso_sobolev_check,
    kernel_ratio_profile,
    khinchine_check,
    lattice_centers,
    poincare_gap,
    trace_ratio,
)

G0_PRINTED = 1.86047095


@dataclass
class CriterionResult:
    id: str
    title: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0


def random_polynomials(rng, count, max_degree=6, bound=2.0):
    out = []
    for _ in range(count):
        deg = int(rng.integers(0, max_degree + 1))
        re = rng.uniform(-bound, bound, deg + 1)
        im = rng.uniform(-bound, bound, deg + 1)
        out.append(PowerSeriesFunction(re + 1j * im))
    return out


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


# ---------------------------------------------------------------------------

def check_g0_root(seed):
    t0 = time.perf_counter()
    root = g0_root()
    elapsed = time.perf_counter() - t0
    err = abs(root - G0_PRINTED)
    return (err <= 1e-6 and elapsed < 0.1), {"root": root, "printed": G0_PRINTED, "abs_error": err}


def check_route_agreement(seed):
    rng = np.random.default_rng(seed)
    polys = random_polynomials(rng, 200)
    radii = [0.5, 1.0, 2.0]
    t0 = time.perf_counter()
    worst = 0.0
    for f in polys:
        for alpha in (-1.0, 1.0):
            quad = means_profile(f, 2.0, alpha, radii)
            for r, q in zip(radii, quad):
                s = means_series_p2(f, alpha, r)
                worst = max(worst, _rel(q, s))
    worst_mono = 0.0
    for k in range(7):
        f = PowerSeriesFunction.monomial(k)
        for alpha in (-1.0, 1.0):
            quad = means_profile(f, 2.0, alpha, radii)
            for r, q in zip(radii, quad):
                closed = means_monomial(k, 2.0, alpha, r)
                worst_mono = max(worst_mono, _rel(means_series_p2(f, alpha, r), closed), _rel(q, closed))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-8 and worst_mono <= 1e-8 and elapsed < 60
    return ok, {"polynomials": len(polys), "max_rel_series_vs_quadrature": worst,
                "max_rel_monomial_closed_form": worst_mono}


def check_maximum_principle(seed):
    rng = np.random.default_rng(seed)
    polys = random_polynomials(rng, 200)
    radii = [0.5, 1.0, 2.0]
    failures = []
    checks = 0
    for i, f in enumerate(polys):
        for p in (1.0, 2.0, 3.5):
            for alpha in (-1.0, 1.0):
                rep = maximum_principle_check(f, p, alpha, radii)
                checks += 1
                if not rep.ok:
                    failures.append({"poly": i, "p": p, "alpha": alpha, "violations": rep.violations})
    return not failures, {"checks": checks, "failures": failures[:5], "n_failures": len(failures)}


def check_monomial_concavity(seed):
    xs = np.geomspace(1e-3, 30.0, 201)[1:]
    worst = -math.inf
    for lam in (0.5, 1.0, 2.0, 5.0):
        worst = max(worst, float(np.max(delta_functional(lam, 1.0, xs))))
    return worst <= 1e-10, {"max_delta": worst, "samples": int(xs.size)}


def _sd_sign_change(k, p, alpha, x_max=100.0, n=400):
    u = np.linspace(math.log(0.05), 0.5 * math.log(x_max), n)
    lm = np.array([math.log(means_monomial(k, p, alpha, math.exp(t))) for t in u])
    sd = second_differences(u, lm)
    mids = u[1:-1]
    flips = np.flatnonzero((sd[:-1] > 0) & (sd[1:] <= 0))
    step = float(u[1] - u[0])
    return [0.5 * (mids[i] + mids[i + 1]) for i in flips], step


def check_transition(seed):
    rows = []
    ok = True
    for k, p, alpha in ((1, 2.0, -1.0), (2, 2.0, -1.0), (1, 1.0, -2.0)):
        rep = classify_monomial_means(k, p, alpha, x_max=100.0)
        bound = corollary_c_bound(k, p, alpha)
        row = {"k": k, "p": p, "alpha": alpha, "transitions": len(rep.transitions), "bound": bound}
        if len(rep.transitions) != 1:
            ok = False
            rows.append(row)
            continue
        c = rep.transitions[0].r0
        flips, step = _sd_sign_change(k, p, alpha)
        near = len(flips) == 1 and abs(flips[0] - math.log(c)) <= 2 * step
        row.update({"x0": rep.transitions[0].x0, "c": c, "beyond_bound": c > bound,
                    "second_difference_flip_near_c": near})
        ok = ok and c > bound and near
        rows.append(row)
    return ok, {"cases": rows}


def check_proof_diagnostics(seed):
    xs = np.geomspace(1e-2, 30.0, 100)
    ok = True
    min_d1 = math.inf
    max_d2 = -math.inf
    roots = []
    for lam in (0.5, 1.0, 2.0):
        for alpha in (-1.0, 1.0):
            for x in xs:
                d = proof_diagnostics(lam, alpha, float(x))
                min_d1 = min(min_d1, d.d1)
                max_d2 = max(max_d2, d.d2)
        grid = log_grid(1e-4, 100.0)
        vals = delta1_bracket(lam, -1.0, grid)
        sg = np.sign(vals)
        flips = np.flatnonzero(sg[:-1] * sg[1:] < 0)
        entry = {"lambda": lam, "sign_changes": int(flips.size)}
        if flips.size == 1:
            i = int(flips[0])
            x_star, _, _ = bisect_root(lambda t: float(delta1_bracket(lam, -1.0, t)), float(grid[i]), float(grid[i + 1]))
            entry["x_star"] = x_star
            entry["bound"] = lam + 1.0
            ok = ok and x_star > lam + 1.0
        else:
            ok = False
        roots.append(entry)
    ok = ok and min_d1 >= -1e-12 and max_d2 < 0
    return ok, {"min_d1": min_d1, "max_d2": max_d2, "delta1": roots}


def check_series_convexity(seed):
    rng = np.random.default_rng(seed + 7)
    polys = random_polynomials(rng, 100)
    grid = np.geomspace(0.02, 1.0, 60)
    lowest = math.inf
    bad = 0
    for f in polys:
        rep = series_convexity_check(f, -1.0, grid)
        lowest = min(lowest, rep.min_second_difference)
        bad += not rep.ok
    return bad == 0, {"polynomials": len(polys), "min_second_difference": lowest, "failures": bad}


def check_remark(seed):
    lam = g0_root()
    ok = True
    rows = []
    for c in (0.0, 1.0, 4.0):
        rep = remark_linear_analysis(c)
        xs = np.linspace(lam * (1 + 1e-3) ** 2, 20.0, 400)
        concave = bool(np.all(remark_DF(c, xs) < 0))
        row = {"c": c, "classification": rep.classification, "concave_beyond_lambda": concave}
        if c == 0:
            ok = ok and rep.classification == "concave on (0, inf)"
        else:
            row.update({"x0": rep.x0, "J0": rep.J0, "J0_exact": rep.J0 == 4 * c})
            ok = ok and rep.x0 is not None and rep.J0 == 4 * c and rep.classification.startswith("convex")
        ok = ok and concave
        rows.append(row)
    probe = float(remark_DF(100.0, lam - 0.05))
    ok = ok and probe > 0
    return ok, {"lambda": lam, "cases": rows, "probe_DF": probe}


def check_sharp_inequalities(seed):
    rng = np.random.default_rng(seed + 11)
    polys = random_polynomials(rng, 500, max_degree=10)
    bad = sum(not poincare_gap(f).ok for f in polys)
    eq = poincare_gap(PowerSeriesFunction([0, 1]))
    eq_gap = abs(eq.lhs - eq.rhs)
    iso_bad = [k for k in range(1, 21) if not iso_sobolev_check(PowerSeriesFunction.monomial(k)).ok]
    iso1 = iso_sobolev_check(PowerSeriesFunction([0, 1]))
    gam_bad = [k for k in range(1, 201) if not gamma_half_ratio(k) <= math.sqrt((k + 1) / 2)]
    ok = not bad and eq_gap <= 1e-12 and not iso_bad and abs(iso1.lhs - iso1.rhs) <= 1e-10 and not gam_bad
    return ok, {"poincare_failures": bad, "poincare_equality_gap": eq_gap, "iso_failures": iso_bad,
                "iso_equality_gap": abs(iso1.lhs - iso1.rhs), "gamma_failures": gam_bad}


def check_trace_desk(seed):
    t0 = time.perf_counter()
    leb = lebesgue()
    sup = carleson_sup_statistic(leb, LatticeParams(r=1.0))
    ratios = [trace_ratio(PowerSeriesFunction.monomial(k), leb, 2.0, 2.0, 0) for k in range(7)]
    a_ok = abs(sup.value - math.pi) <= 1e-6 and max(abs(x - 1) for x in ratios) <= 1e-8

    lat = LatticeParams(r=1.0, p=2.0, q=2.0, m=1)
    grow = growing_measure(1, 2.0, lat.s, lat.R_trunc + lat.r + lat.s)
    gsup = carleson_sup_statistic(grow, lat)
    prof = kernel_ratio_profile(grow, 2.0, 2.0, 1)
    b_ok = gsup.unbounded and prof[0] < prof[1] < prof[2]

    slat = LatticeParams(r=1.5, s=1.0, p=2.0, q=1.0, m=0)
    total = carleson_sum_statistic(atom_at_origin(), slat)
    expected = sum(1 for a in lattice_centers(1.0, slat.R_trunc) if abs(a) <= 1.5)
    c_ok = total.value == expected
    elapsed = time.perf_counter() - t0
    ok = a_ok and b_ok and c_ok and elapsed < 120
    return ok, {"lebesgue_sup": sup.value, "lebesgue_max_ratio_error": max(abs(x - 1) for x in ratios),
                "growing_unbounded": gsup.unbounded, "growing_kernel_profile": prof,
                "atom_sum": total.value, "atom_sum_expected": expected}


def check_khinchine(seed):
    rng = np.random.default_rng(seed + 13)
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(1, 13))
        c = rng.normal(size=n) + 1j * rng.normal(size=n)
        res = khinchine_check(c, 2.0)
        worst = max(worst, abs(res.lp_avg - res.l2_norm) / max(1.0, res.l2_norm))
    one = khinchine_check([1, 1], 1.0).lp_avg
    return worst <= 1e-14 and one == 1.0, {"max_p2_deviation": worst, "p1_average": one}


FAST_SUBSET = ("g0-root", "monomial-concavity", "remark-linear", "sharp-inequalities", "khinchine")


def check_determinism(seed):
    """Re-runs a fast subset twice and compares the serialised details.

    The full byte-for-byte comparison of two ``verify-paper`` runs lives in
    the test suite, where spawning two processes is affordable.
    """
    from .report import dumps_json

    docs = [dumps_json([_run_one(cid, seed).detail for cid in FAST_SUBSET]) for _ in range(2)]
    return docs[0] == docs[1], {"subset": list(FAST_SUBSET), "identical": docs[0] == docs[1]}


CRITERIA = [
    ("g0-root", "root of G0 on [1, 3]", check_g0_root),
    ("route-agreement", "series, quadrature and closed-form means agree", check_route_agreement),
    ("maximum-principle", "means increase from |f(0)|^p to M(inf)", check_maximum_principle),
    ("monomial-concavity", "ln M(z^k) concave in ln r for alpha > 0", check_monomial_concavity),
    ("transition", "single convex-to-concave transition for alpha < 0", check_transition),
    ("proof-diagnostics", "signs of d1, d2 and the zero of delta1", check_proof_diagnostics),
    ("series-convexity", "ln M(f) convex on (0, 1] for alpha = -1, p = 2", check_series_convexity),
    ("remark-linear", "convexity of ln M(a + z) and the G0 threshold", check_remark),
    ("sharp-inequalities", "Poincare, isoperimetric-Sobolev and gamma-ratio bounds", check_sharp_inequalities),
    ("trace-desk", "lattice statistics and trace ratios on reference measures", check_trace_desk),
    ("khinchine", "Khinchine averages", check_khinchine),
    ("determinism", "fixed seed gives identical reports", check_determinism),
]
CRITERION_IDS = [cid for cid, _, _ in CRITERIA]


def _run_one(cid, seed):
    for key, title, fn in CRITERIA:
        if key == cid:
            t0 = time.perf_counter()
            passed, detail = fn(seed)
            return CriterionResult(key, title, bool(passed), detail, time.perf_counter() - t0)
    raise KeyError(cid)


def run_acceptance(seed: int = 42, only=None):
    """Run the selected criteria (all by default) in their fixed order."""
    wanted = CRITERION_IDS if not only else [c for c in CRITERION_IDS if c in set(only)]
    unknown = set(only or ()) - set(CRITERION_IDS)
    if unknown:
        raise KeyError(f"unknown criteria: {sorted(unknown)}")
    return [_run_one(cid, seed) for cid in wanted]
