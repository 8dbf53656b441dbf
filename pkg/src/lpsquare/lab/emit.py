"""Deterministic report output: JSON, CSV and SVG."""

from __future__ import annotations

import csv
import io
import json
import math

from ..tiles.render import ratio_curves_svg
from .experiments import ExperimentReport

FORMATS = ("json", "csv", "svg")


class UnsupportedFormat(ValueError):
    pass


def _fmt(v):
    """Floats to 12 significant digits; containers recursively; everything else unchanged."""
    if isinstance(v, bool) or v is None or isinstance(v, (int, str)):
        return v
    if isinstance(v, float):
        if math.isnan(v) or math.isinf(v):
            return str(v)
        return float(f"{v:.12g}")
    if isinstance(v, dict):
        return {str(k): _fmt(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_fmt(x) for x in v]
    if hasattr(v, "item"):
        return _fmt(v.item())
    return str(v)


def _cell(v) -> str:
    if isinstance(v, float):
        return f"{v:.12g}"
    return "" if v is None else str(v)


def render(report: ExperimentReport, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(_fmt(report.to_dict()), indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(report.columns)
        for row in report.rows:
            w.writerow([_cell(row.get(c)) for c in report.columns])
        return buf.getvalue()
    if fmt == "svg":
        if report.curves:
            return ratio_curves_svg(report.curves)
        if report.figure:
            return report.figure
        raise UnsupportedFormat(f"a {report.kind} report has no ratio curve or tile picture to draw")
    raise UnsupportedFormat(f"unknown format {fmt!r}; expected one of {FORMATS}")


def emit(report: ExperimentReport, fmt: str, path: str | None = None) -> str:
    """Render the report and write it to ``path`` when given; returns the text."""
    text = render(report, fmt)
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


def load_report(path: str) -> ExperimentReport:
    with open(path) as fh:
        return ExperimentReport.from_dict(json.load(fh))
