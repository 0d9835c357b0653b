"""Residual reports and deterministic CSV serialization.

Every check in the package returns a ResidualReport: named raw terms plus a
single normalized residual (the mismatch divided by the largest term, floored
at 1e-30 so identically-zero inputs report 0 rather than 0/0).  Reports with
a refinement or window sequence carry it as ordered (label, value) rows.

CSV output is fully deterministic: fixed column order, %.17g floats, "\n"
newlines.  Re-running a computation must reproduce the file byte for byte.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

__all__ = ["ResidualReport", "format_float", "write_reports_csv",
           "write_series_csv", "write_solution_csv"]

FLOOR = 1e-30


def normalized(mismatch: float, terms) -> float:
    scale = max((abs(float(v)) for v in terms), default=0.0)
    return abs(float(mismatch)) / max(scale, FLOOR)


@dataclass
class ResidualReport:
    """Outcome of one identity / agreement check.

    terms holds the named raw quantities entering the identity; residual is
    the normalized mismatch; series optionally holds (label, value) rows for
    refinement studies.
    """

    name: str
    params: dict
    terms: dict
    residual: float
    series: list = field(default_factory=list)

    def __str__(self):
        bits = ", ".join(f"{k}={format_float(v)}" if isinstance(v, float) else f"{k}={v}"
                         for k, v in self.params.items())
        return f"{self.name} [{bits}] residual={self.residual:.3e}"

    def passes(self, tolerance: float) -> bool:
        return self.residual <= tolerance


def format_float(x) -> str:
    return "%.17g" % float(x)


def _params_blob(params: dict) -> str:
    parts = []
    for k in sorted(params):
        v = params[k]
        parts.append(f"{k}={format_float(v) if isinstance(v, float) else v}")
    return ";".join(parts)


def write_reports_csv(reports, path, status=None) -> None:
    """One row per report (plus one row per series entry underneath it).

    status, if given, maps report name -> "pass"/"fail" and adds a column.
    """
    lines = ["name,kind,label,value,residual,params,terms,status"]
    for rep in reports:
        terms_blob = ";".join(f"{k}={format_float(v)}" for k, v in sorted(rep.terms.items()))
        st = "" if status is None else status.get(rep.name, "")
        lines.append(",".join([
            rep.name, "residual", "", "",
            format_float(rep.residual), _params_blob(rep.params), terms_blob, st,
        ]))
        for label, value in rep.series:
            lines.append(",".join([
                rep.name, "series",
                label if isinstance(label, str) else format_float(label),
                format_float(value), "", "", "", st,
            ]))
    _write_text(path, "\n".join(lines) + "\n")


def write_series_csv(rows, path, columns) -> None:
    """Plain table: rows of floats/strings under the given column names."""
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(
            v if isinstance(v, str) else format_float(v) for v in row))
    _write_text(path, "\n".join(lines) + "\n")


def write_solution_csv(traj, path) -> None:
    """Node-by-node dump of a trajectory: t, then one column per component."""
    vals = np.atleast_2d(traj.values.T).T
    cols = ["t"] + [f"u{j + 1}" for j in range(vals.shape[1])]
    rows = []
    for t, row in zip(traj.grid.nodes, vals):
        rows.append([float(t)] + [float(v) for v in row])
    write_series_csv(rows, path, cols)


def _write_text(path, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)
