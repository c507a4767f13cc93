"""Reports: structured JSON text plus a CSV of per-point rows.

CSV columns (fixed)::

    check, row, coord_1, coord_2, coord_3, measured, predicted, ratio

The meaning of the coordinate columns is recorded per check in
``coord_names`` of the JSON report (for lemma sweeps: dx, dy, r). Unused
coordinate columns are empty. Runtimes are kept out of the report (see
``write_timing``) so reruns with the same seed emit identical bytes.
"""
from __future__ import annotations

import csv
import io
import json
import math
import platform
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

CSV_COLUMNS = ("check", "row", "coord_1", "coord_2", "coord_3", "measured", "predicted",
               "ratio")
N_COORDS = 3
SCHEMA_TAG = "sklevy-report/1"
SUMMARY_KEYS = ("C", "slope", "growth", "log_corr", "spread", "max_rel_err", "max_abs_err",
                "max_z")


def clean(obj):
    """Plain JSON-ready copy: numpy scalars/arrays to Python, NaN to None."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return None if math.isnan(x) else x
    return obj


@dataclass
class CheckResult:
    id: str
    kind: str
    passed: bool
    values: dict = field(default_factory=dict)
    coord_names: list = field(default_factory=list)
    rows: list = field(default_factory=list)        # [coords..., measured, predicted, ratio]
    error: Optional[str] = None

    def __post_init__(self):
        self.values = clean(self.values)
        self.rows = clean(self.rows)
        self.coord_names = list(self.coord_names)
        self.passed = bool(self.passed) and self.error is None

    @staticmethod
    def rows_from(coords, measured, predicted):
        coords = np.atleast_2d(np.asarray(coords, float))
        m = np.asarray(measured, float)
        p = np.asarray(predicted, float)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = m / p
        return [list(c) + [a, b, q] for c, a, b, q in zip(coords, m, p, r)]

    def to_dict(self):
        return clean(dict(id=self.id, kind=self.kind, passed=self.passed, values=self.values,
                          coord_names=self.coord_names, rows=self.rows, error=self.error))

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass
class Report:
    config: dict
    checks: list
    provenance: dict

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self):
        return dict(schema=SCHEMA_TAG, passed=self.passed, config=clean(self.config),
                    provenance=clean(self.provenance),
                    checks=[c.to_dict() for c in self.checks])

    @classmethod
    def from_dict(cls, d):
        if d.get("schema") != SCHEMA_TAG:
            raise ValueError(f"not a {SCHEMA_TAG} document")
        return cls(d["config"], [CheckResult.from_dict(c) for c in d["checks"]],
                   d["provenance"])

    def __eq__(self, other):
        return isinstance(other, Report) and self.to_dict() == other.to_dict()


def provenance(seed, workers) -> dict:
    import numba
    import scipy

    from . import __version__
    return dict(package=__version__, python=platform.python_version(),
                numpy=np.__version__, scipy=scipy.__version__, numba=numba.__version__,
                seed=int(seed), workers=workers)


def to_text(report: Report) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"


def parse_text(text: str) -> Report:
    return Report.from_dict(json.loads(text))


def to_csv(report: Report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for c in report.checks:
        for i, row in enumerate(c.rows):
            coords = row[:-3]
            if len(coords) > N_COORDS:
                raise ValueError(f"check {c.id}: more than {N_COORDS} coordinates")
            coords = coords + [""] * (N_COORDS - len(coords))
            w.writerow([c.id, i, *map(_fmt, coords), *map(_fmt, row[-3:])])
    return buf.getvalue()


def _fmt(x):
    if x is None or x == "":
        return ""
    return repr(float(x))


def emit_report(report: Report, stem, formats=("json", "csv")) -> list:
    """Write <stem>.json and/or <stem>.csv; returns the written paths."""
    stem = Path(stem)
    out = []
    for fmt in formats:
        if fmt == "json":
            p = stem.with_suffix(".json")
            p.write_text(to_text(report))
        elif fmt == "csv":
            p = stem.with_suffix(".csv")
            p.write_text(to_csv(report))
        else:
            raise ValueError(f"unknown report format {fmt!r}")
        out.append(p)
    return out


def write_timing(stem, timings: dict) -> Path:
    p = Path(stem).with_suffix(".timing.json")
    p.write_text(json.dumps(clean(timings), indent=2, sort_keys=True) + "\n")
    return p


def load_report(path) -> Report:
    return parse_text(Path(path).read_text())


def summary_lines(report: Report) -> list:
    lines = []
    for c in report.checks:
        flag = "PASS" if c.passed else "FAIL"
        extra = f"  error: {c.error}" if c.error else ""
        keys = [k for k in SUMMARY_KEYS if c.values.get(k) is not None]
        vals = " ".join(f"{k}={c.values[k]:.4g}" for k in keys)
        lines.append(f"{flag} {c.id} [{c.kind}] {vals}{extra}")
    lines.append(f"overall: {'PASS' if report.passed else 'FAIL'} "
                 f"({sum(c.passed for c in report.checks)}/{len(report.checks)})")
    return lines
