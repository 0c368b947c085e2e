"""Rendering of command results as text tables, CSV and JSON.

Floats are written with 12 significant digits everywhere; complex numbers
become ``[re, im]`` pairs in JSON and ``re+imj`` strings elsewhere.
Non-finite floats are written as the strings "inf", "-inf", "nan".
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, is_dataclass
from importlib import resources

import numpy as np

SIG = 12


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (complex, np.complexfloating)):
        z = complex(x)
        return f"{z.real:.{SIG}g}{z.imag:+.{SIG}g}j"
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.{SIG}g}"
    return str(x)


def canonical(obj):
    """JSON-ready copy with floats rounded to 12 significant digits."""
    if is_dataclass(obj) and not isinstance(obj, type):
        return canonical(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [canonical(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [canonical(complex(obj).real), canonical(complex(obj).imag)]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
        return float(f"{x:.{SIG}g}")
    return obj


def dumps_json(obj) -> str:
    return json.dumps(canonical(obj), indent=2, sort_keys=False) + "\n"


def report_schema() -> dict:
    text = resources.files("gaussmeans").joinpath("schemas/report.schema.json").read_text()
    return json.loads(text)


def validate_report(doc) -> None:
    import jsonschema

    jsonschema.validate(doc, report_schema())


def render_csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def render_table(columns, rows, title=None) -> str:
    cells = [[fmt(row.get(c)) for c in columns] for row in rows]
    widths = [max([len(c)] + [len(r[i]) for r in cells]) for i, c in enumerate(columns)]
    lines = []
    if title:
        lines.append(title)
    lines.append("  ".join(c.ljust(w) for c, w in zip(columns, widths)))
    lines.append("  ".join("-" * w for w in widths))
    for r in cells:
        lines.append("  ".join(v.ljust(w) for v, w in zip(r, widths)))
    return "\n".join(lines) + "\n"


def render_mapping(mapping, title=None) -> str:
    """Key/value block for scalar summaries."""
    lines = [title] if title else []
    width = max((len(k) for k in mapping), default=0)
    for k, v in mapping.items():
        if isinstance(v, (list, tuple)) and not isinstance(v, str):
            v = ", ".join(fmt(x) for x in v)
        else:
            v = fmt(v)
        lines.append(f"{k.ljust(width)}  {v}")
    return "\n".join(lines) + "\n"
