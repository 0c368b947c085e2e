"""``gml``: command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage or input error,
3 numerical nonconvergence.
"""

from __future__ import annotations

import argparse
import math
import sys

from . import acceptance
from .convexity import (
    classify_monomial_means,
    corollary_c_bound,
    g0_root,
    remark_linear_analysis,
)
from .errors import DomainError, NonConvergenceError
from .means import (
    maximum_principle_check,
    means_derivative,
    means_monomial,
    means_profile,
    means_series_p2,
)
from .measures import (
    atom_at_origin,
    gaussian_density,
    growing_measure,
    lebesgue,
    load_measure,
    zero_measure,
)
from .polynomial import parse_coefficients
from .report import dumps_json, fmt, render_csv, render_mapping, render_table
from .trace import (
    LatticeParams,
    carleson_sum_statistic,
    carleson_sup_statistic,
    kernel_ratio_profile,
    trace_ratio_family,
)

MEANS_COLUMNS = ["r", "value_closed_form", "value_series", "value_quadrature", "derivative"]
CONVEXITY_COLUMNS = ["x0", "r0", "bracket_lo", "bracket_hi", "tolerance"]
VERIFY_COLUMNS = ["id", "passed", "title"]


class UsageError(Exception):
    pass


def _floats(text):
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"not a list of numbers: {text!r}") from exc
    if not vals:
        raise UsageError("empty list")
    return vals


# ---------------------------------------------------------------------------
# commands: each returns (exit_code, document, text_renderer, csv_renderer)

def cmd_means(args):
    if args.coeffs is None:
        raise UsageError("means needs --coeffs")
    f = parse_coefficients(args.coeffs)
    p = args.p
    radii = _floats(args.radii)
    if any(not r > 0 or math.isinf(r) for r in radii):
        raise UsageError("radii must be positive and finite")
    quad = means_profile(f, p, args.alpha, radii)
    mono = f.monomial_index()
    rows = []
    for r, q in zip(radii, quad):
        closed = None
        if f.is_zero():
            closed = 0.0
        elif mono is not None:
            k, c = mono
            closed = abs(c) ** p * means_monomial(k, p, args.alpha, r)
        rows.append({
            "r": r,
            "value_closed_form": closed,
            "value_series": means_series_p2(f, args.alpha, r) if p == 2 else None,
            "value_quadrature": float(q),
            "derivative": means_derivative(f, p, args.alpha, r),
        })
    rep = maximum_principle_check(f, p, args.alpha, sorted(radii))
    chain = {"lower_bound": rep.lower_bound, "values": rep.values, "upper_bound": rep.upper_bound,
             "ok": rep.ok, "violations": rep.violations}
    doc = {"rows": rows, "maximum_principle": chain}

    def text():
        out = render_table(MEANS_COLUMNS, rows, title=f"M_(p={fmt(p)}, alpha={fmt(args.alpha)})(f, r)")
        summary = {"|f(0)|^p": rep.lower_bound, "M(inf)": "n/a" if rep.upper_bound is None else rep.upper_bound,
                   "maximum principle": "ok" if rep.ok else "; ".join(rep.violations)}
        return out + "\n" + render_mapping(summary)

    return 0, {"coeffs": args.coeffs, "p": p, "alpha": args.alpha, "radii": radii}, doc, text, \
        lambda: render_csv(MEANS_COLUMNS, rows)


def cmd_convexity(args):
    if args.remark_g0:
        root = g0_root()
        doc = {"g0_root": root}
        return 0, {"remark_g0": True}, doc, lambda: render_mapping({"G0 root (lambda)": root}), \
            lambda: render_csv(["g0_root"], [doc])
    if args.c is not None:
        rep = remark_linear_analysis(args.c, x_max=args.x_max if args.x_max else 20.0)
        doc = {"c": rep.c, "classification": rep.classification, "x0": rep.x0, "r0": rep.r0,
               "bracket": list(rep.bracket) if rep.bracket else None, "J0": rep.J0,
               "J_nonincreasing": rep.J_nonincreasing, "H_prime_limit": rep.H_prime_limit,
               "sign_consistent": rep.sign_consistent, "g0_root": g0_root(), "notes": rep.notes}
        row = {k: doc[k] for k in ("c", "x0", "r0", "J0", "H_prime_limit", "g0_root")}
        row["classification"] = rep.classification
        cols = ["c", "classification", "x0", "r0", "J0", "H_prime_limit", "g0_root"]
        return 0, {"c": args.c}, doc, lambda: render_mapping(doc, title="M_(2,1)(a + z, r), c = |a|^2"), \
            lambda: render_csv(cols, [row])
    if args.k is None:
        raise UsageError("convexity needs --k (or --c / --remark-g0)")
    x_max = args.x_max if args.x_max else 100.0
    rep = classify_monomial_means(args.k, args.p, args.alpha, x_max=x_max)
    rows = [{"x0": t.x0, "r0": t.r0, "bracket_lo": t.bracket[0], "bracket_hi": t.bracket[1],
             "tolerance": t.tolerance} for t in rep.transitions]
    bound = corollary_c_bound(args.k, args.p, args.alpha) if args.alpha < 0 and args.k > 0 else None
    doc = {"classification": rep.classification, "transitions": rows, "convexity_radius_bound": bound,
           "sign_profile": [{"x_from": a, "x_to": b, "sign": s} for (a, b), s in rep.sign_profile],
           "notes": rep.notes}

    def text():
        head = render_mapping({"classification": rep.classification,
                               "explicit radius bound": "n/a" if bound is None else bound})
        body = render_table(CONVEXITY_COLUMNS, rows, title="transitions (x = r^2)") if rows else "no transitions\n"
        notes = "".join(f"note: {n}\n" for n in rep.notes)
        return head + "\n" + body + notes

    return 0, {"k": args.k, "p": args.p, "alpha": args.alpha, "x_max": x_max}, doc, text, \
        lambda: render_csv(CONVEXITY_COLUMNS, rows)


def _measure(args, lat):
    name = args.measure
    builtins = {
        "lebesgue": lebesgue,
        "gaussian": gaussian_density,
        "atom0": atom_at_origin,
        "zero": zero_measure,
        "growing": lambda: growing_measure(args.m, args.q, lat.s, lat.R_trunc + lat.r + lat.s),
    }
    if name in builtins:
        return builtins[name]()
    return load_measure(name)


def cmd_trace(args):
    if args.measure is None:
        raise UsageError("trace needs --measure")
    lat = LatticeParams(r=args.r, p=args.p, q=args.q, m=args.m, s=args.s, R_trunc=args.r_trunc)
    mu = _measure(args, lat)
    sup = carleson_sup_statistic(mu, lat)
    doc = {"lattice": {"r": lat.r, "s": lat.s, "R_trunc": lat.R_trunc},
           "sup_statistic": {"value": sup.value, "argmax": sup.argmax, "truncated": sup.truncated,
                             "unbounded": sup.unbounded, "shell_maxima": sup.shell_maxima, "notes": sup.notes}}
    if lat.q < lat.p:
        tot = carleson_sum_statistic(mu, lat)
        doc["sum_statistic"] = {"value": tot.value, "tail_bound": tot.tail_bound, "divergent": tot.divergent,
                                "terms": tot.n_terms, "notes": tot.notes}
        verdict = "unbounded" if tot.divergent else "bounded"
    else:
        doc["sum_statistic"] = None
        verdict = sup.verdict
    mono = trace_ratio_family("monomials", mu, lat.p, lat.q, lat.m, degree=args.degree)
    prof = kernel_ratio_profile(mu, lat.p, lat.q, lat.m)
    doc["trace_ratios"] = {"monomials": dict(zip([f"z^{k}" for k in mono.labels], mono.ratios)),
                           "monomial_max": mono.max_ratio,
                           "kernel_profile": dict(zip(["|a|=2", "|a|=4", "|a|=6"], prof))}
    doc["verdict"] = verdict
    rows = [{"family": "monomial", "member": f"z^{k}", "ratio": v} for k, v in zip(mono.labels, mono.ratios)]
    rows += [{"family": "kernel", "member": f"a={t:g}", "ratio": v} for t, v in zip((2, 4, 6), prof)]

    def text():
        head = {"sup statistic": sup.value, "argmax": sup.argmax, "shell maxima": sup.shell_maxima}
        if doc["sum_statistic"]:
            head["lattice sum"] = doc["sum_statistic"]["value"]
            head["tail bound"] = doc["sum_statistic"]["tail_bound"]
        head["verdict"] = verdict
        notes = "".join(f"note: {n}\n" for n in sup.notes + (doc["sum_statistic"] or {}).get("notes", []))
        return render_mapping(head) + "\n" + render_table(["family", "member", "ratio"], rows) + notes

    params = {"measure": args.measure, "p": lat.p, "q": lat.q, "m": lat.m, "r": lat.r, "s": lat.s,
              "R_trunc": lat.R_trunc}
    return 0, params, doc, text, lambda: render_csv(["family", "member", "ratio"], rows)


def cmd_verify(args):
    only = [c.strip() for c in args.only.split(",")] if args.only else None
    try:
        results = acceptance.run_acceptance(seed=args.seed, only=only)
    except KeyError as exc:
        raise UsageError(str(exc)) from exc
    passed = all(r.passed for r in results)
    doc = {"criteria": [{"id": r.id, "title": r.title, "passed": r.passed, "detail": r.detail} for r in results]}
    rows = [{"id": r.id, "passed": r.passed, "title": r.title} for r in results]

    def text():
        lines = [f"{'PASS' if r.passed else 'FAIL'}  {r.id:<20} {r.title}  ({r.seconds:.2f} s)" for r in results]
        failed = [r.id for r in results if not r.passed]
        lines.append("all criteria passed" if passed else "failed: " + ", ".join(failed))
        return "\n".join(lines) + "\n"

    code = 0 if passed else 1
    return code, {"only": only}, doc, text, lambda: render_csv(VERIFY_COLUMNS, rows)


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gml", description="Gaussian integral means toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--format", choices=["table", "csv", "json"], default="table")
        sp.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")
        sp.add_argument("--seed", type=int, default=42)

    sp = sub.add_parser("means", help="M_{p,alpha}(f, r) by every available route")
    sp.add_argument("--coeffs", help="Taylor coefficients, e.g. 1,0.5-2i,3")
    sp.add_argument("--p", type=float, default=2.0)
    sp.add_argument("--alpha", type=float, default=1.0)
    sp.add_argument("--radii", default="1")
    common(sp)
    sp.set_defaults(handler=cmd_means)

    sp = sub.add_parser("convexity", help="log-log convexity of Gaussian means")
    sp.add_argument("--k", type=int)
    sp.add_argument("--p", type=float, default=2.0)
    sp.add_argument("--alpha", type=float, default=-1.0)
    sp.add_argument("--x-max", type=float, dest="x_max")
    sp.add_argument("--c", type=float, help="analyse ln M_{2,1}(a + z) with |a|^2 = c")
    sp.add_argument("--remark-g0", action="store_true", help="report the positive zero of G0")
    common(sp)
    sp.set_defaults(handler=cmd_convexity)

    sp = sub.add_parser("trace", help="Carleson statistics and trace ratios for a measure")
    sp.add_argument("--measure", help="lebesgue, gaussian, atom0, growing, zero, or a JSON file")
    sp.add_argument("--p", type=float, default=2.0)
    sp.add_argument("--q", type=float, default=2.0)
    sp.add_argument("--m", type=int, default=0)
    sp.add_argument("--r", type=float, default=1.0)
    sp.add_argument("--s", type=float)
    sp.add_argument("--r-trunc", type=float, dest="r_trunc")
    sp.add_argument("--degree", type=int, default=10, help="largest monomial in the test family")
    common(sp)
    sp.set_defaults(handler=cmd_trace)

    sp = sub.add_parser("verify-paper", help="run the acceptance criteria")
    sp.add_argument("--only", help="comma-separated criterion ids: " + ", ".join(acceptance.CRITERION_IDS))
    common(sp)
    sp.set_defaults(handler=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code, params, results, text, as_csv = args.handler(args)
    except (UsageError, DomainError) as exc:
        parser.error(str(exc))  # exits with status 2
    except NonConvergenceError as exc:
        print(f"gml: nonconvergence: {exc} (estimate={fmt(exc.estimate)}, error={fmt(exc.error)})",
              file=sys.stderr)
        return 3
    if args.format == "json":
        doc = {"command": args.command, "seed": args.seed, "params": params, "results": results}
        if args.command == "verify-paper":
            doc["passed"] = code == 0
        out = dumps_json(doc)
    elif args.format == "csv":
        out = as_csv()
    else:
        out = text()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    if code == 1:
        print("gml: verification failed", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
