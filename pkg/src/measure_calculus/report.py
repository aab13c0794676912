"""Serialization of verification reports to JSON and CSV.

Floats are written with 17 significant digits and keys in a fixed order, so
identical runs produce byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .errors import InputError

CSV_HEADER = ["identity", "instance", "lhs", "rhs", "residual", "tolerance", "pass"]


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def _fmt_value(v) -> str:
    """CSV cell for a scalar or a vector (components separated by spaces)."""
    a = np.asarray(v, dtype=float)
    if a.ndim == 0:
        return fmt_float(a)
    return " ".join(fmt_float(t) for t in a.ravel())


def to_json(obj, indent: int = 2, _level: int = 0) -> str:
    """Minimal JSON writer that renders every float with 17 significant digits.

    Non-finite floats become ``null``.
    """
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return to_json(obj.tolist(), indent, _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {to_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(to_json(v) for v in obj) + "]"
        items = [pad + to_json(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def report_entry(r) -> dict:
    return {
        "identity": r.identity,
        "instance": r.instance,
        "instance_hash": r.instance_hash,
        "lhs": r.lhs,
        "rhs": r.rhs,
        "residual": r.residual,
        "tolerance": r.tolerance,
        "pass": r.passed,
        "converged": r.converged,
        "notes": r.notes,
        "diagnostic": r.diagnostic,
    }


def build_document(suite_reports, metadata: dict | None = None) -> dict:
    total = sum(len(reps) for _, reps in suite_reports)
    passed = sum(r.passed for _, reps in suite_reports for r in reps)
    return {
        "metadata": metadata or {},
        "summary": {"total": total, "passed": passed, "failed": total - passed},
        "suites": [{"name": name, "reports": [report_entry(r) for r in reps]} for name, reps in suite_reports],
    }


def render(suite_reports, fmt: str = "json", metadata: dict | None = None) -> str:
    """Render ``[(suite_name, [Report, ...]), ...]`` as JSON or CSV text."""
    if not any(reps for _, reps in suite_reports):
        raise InputError("no reports to emit")
    if fmt == "json":
        return to_json(build_document(suite_reports, metadata)) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for _, reps in suite_reports:
            for r in reps:
                w.writerow([r.identity, r.instance, _fmt_value(r.lhs), _fmt_value(r.rhs),
                            fmt_float(r.residual), fmt_float(r.tolerance), "true" if r.passed else "false"])
        return buf.getvalue()
    raise InputError(f"unknown report format {fmt!r}")


def emit_report(suite_reports, path, fmt: str = "json", metadata: dict | None = None) -> Path:
    text = render(suite_reports, fmt, metadata)
    path = Path(path)
    path.write_text(text)
    return path
