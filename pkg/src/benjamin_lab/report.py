"""Deterministic JSON and plain-text renderings of an experiment report."""

from __future__ import annotations

import json
import math
import os
from fractions import Fraction

import numpy as np

from .experiments import ExperimentReport

__all__ = ["dumps", "report_dict", "report_json", "report_text", "write_report"]


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return format(v, ".17g") if math.isfinite(v) else "null"
    if isinstance(obj, (str, Fraction)):
        return json.dumps(str(obj))
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = sorted((str(k), v) for k, v in obj.items())
        body = ",\n".join(f"{pad}{json.dumps(k)}: {_encode(v, indent, level + 1)}" for k, v in items)
        return "{\n" + body + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        body = ",\n".join(pad + _encode(v, indent, level + 1) for v in obj)
        return "[\n" + body + "\n" + end + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON with sorted keys and floats at 17 significant digits (non-finite as null)."""
    return _encode(obj, indent, 0) + "\n"


def report_dict(report: ExperimentReport) -> dict:
    return {
        "kind": report.kind,
        "inputs": report.inputs,
        "results": report.results,
        "clauses": [
            {"criterion": c.criterion, "name": c.name, "label": c.label, "passed": c.passed,
             "value": c.value, "threshold": c.threshold}
            for c in report.clauses
        ],
        "files": list(report.files),
        "passed": report.passed,
    }


def report_json(report: ExperimentReport) -> str:
    return dumps(report_dict(report))


def _scalar(v) -> str:
    if isinstance(v, float):
        return format(v, ".10g")
    return str(v)


def report_text(report: ExperimentReport) -> str:
    lines = [f"experiment: {report.kind}", "", "inputs:"]
    lines += [f"  {k} = {_scalar(report.inputs[k])}" for k in sorted(report.inputs)]
    lines += ["", "results:"]
    for k in sorted(report.results):
        v = report.results[k]
        if isinstance(v, (list, tuple)) and len(v) > 6:
            v = f"[{len(v)} values]"
        elif isinstance(v, dict):
            v = ", ".join(f"{a}: {_scalar(b)}" for a, b in sorted(v.items()))
        lines.append(f"  {k}: {_scalar(v)}")
    lines += ["", "clauses:"]
    for c in report.clauses:
        mark = "PASS" if c.passed else "FAIL"
        lines.append(f"  [{mark}] {c.label}: value {c.value:.6g} (threshold {c.threshold:.6g})")
    if not report.clauses:
        lines.append("  (report only)")
    if report.files:
        lines += ["", "files:"] + [f"  {f}" for f in report.files]
    lines += ["", f"overall: {'PASS' if report.passed else 'FAIL'}"]
    return "\n".join(lines) + "\n"


def write_report(report: ExperimentReport, out_dir) -> None:
    with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as fh:
        fh.write(report_json(report))
    with open(os.path.join(out_dir, "report.txt"), "w", encoding="utf-8") as fh:
        fh.write(report_text(report))
