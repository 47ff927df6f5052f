"""Deterministic CSV / JSON serialization of fidelity reports."""

from __future__ import annotations

import csv
import io
import json

from .fidelity import REPORT_COLUMNS, FidelityReport

__all__ = ["fmt", "reports_to_csv", "reports_from_csv", "reports_to_json", "reports_to_text"]


def fmt(x):
    """16 significant digits, exponent form below 1e-4, '.' as decimal point."""
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, int):
        return str(x)
    return format(float(x), ".16g")


def reports_to_csv(reports):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for r in reports:
        writer.writerow([fmt(v) for v in r.as_row()])
    return buf.getvalue()


def reports_from_csv(text):
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(header) != REPORT_COLUMNS:
        raise ValueError(f"unexpected CSV header {header}")
    out = []
    for row in reader:
        values = [int(row[0])] + [float(v) for v in row[1:]]
        out.append(FidelityReport(*values))
    return out


def reports_to_json(reports):
    rows = [{k: float(fmt(v)) if isinstance(v, float) else v for k, v in zip(REPORT_COLUMNS, r.as_row())} for r in reports]
    return json.dumps(rows, indent=2) + "\n"


def reports_to_text(reports):
    lines = []
    widths = [4] + [22] * (len(REPORT_COLUMNS) - 1)
    lines.append(" ".join(c.rjust(w) for c, w in zip(REPORT_COLUMNS, widths)))
    for r in reports:
        lines.append(" ".join(fmt(v).rjust(w) for v, w in zip(r.as_row(), widths)))
    return "\n".join(lines) + "\n"
