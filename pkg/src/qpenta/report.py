"""Verification reports: collection while a check runs, and serialization."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Callable

import numpy as np

from .phases import ExactPhase, FloatPhase

MAX_FAILURE_SAMPLES = 10


@dataclass
class VerificationReport:
    suite: str
    backend: str
    params: dict = field(default_factory=dict)
    cocycle: str = ""
    tolerance: float = 0.0
    n_checked: int = 0
    n_skipped_defect: int = 0
    n_failed: int = 0
    max_error: float = 0.0
    seed: int | None = None
    elapsed_ms: float = 0.0
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.n_failed == 0

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} {self.suite} [{self.backend}, {self.cocycle or '-'}] "
                f"checked={self.n_checked} skipped={self.n_skipped_defect} "
                f"failed={self.n_failed} max_error={self.max_error:.3g}")

    @classmethod
    def from_dict(cls, d: dict) -> "VerificationReport":
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})


def jsonable(obj: Any) -> Any:
    """Convert points, phases and numpy scalars into plain JSON values."""
    if isinstance(obj, ExactPhase):
        return {"k": obj.k, "order": obj.order}
    if isinstance(obj, FloatPhase):
        obj = obj.z
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else str(obj)
    if isinstance(obj, tuple) and hasattr(obj, "_asdict"):
        return {k: jsonable(v) for k, v in obj._asdict().items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(x) for x in obj]
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    return obj


class ReportBuilder:
    """Accumulates check outcomes; failure samples are built lazily."""

    def __init__(self, suite: str, backend, cocycle: str = "", tolerance: float = 1e-12,
                 seed: int | None = None, params: dict | None = None):
        self.report = VerificationReport(
            suite=suite,
            backend=backend if isinstance(backend, str) else backend.id,
            params=dict(params or {}),
            cocycle=cocycle,
            tolerance=tolerance,
            seed=seed,
        )
        self._t0 = time.perf_counter()

    @property
    def tolerance(self) -> float:
        return self.report.tolerance

    def check(self, error: float, sample: Callable[[], dict] | dict | None = None,
              tol: float | None = None) -> bool:
        """Record one comparison; ``tol`` overrides the report tolerance for this check."""
        r = self.report
        r.n_checked += 1
        error = float(error)
        if not (error <= r.max_error) and not math.isnan(r.max_error):
            r.max_error = error
        ok = error <= (r.tolerance if tol is None else tol)
        if not ok:
            r.n_failed += 1
            if len(r.failures) < MAX_FAILURE_SAMPLES:
                s = sample() if callable(sample) else (sample or {})
                s = dict(s)
                s.setdefault("error", error)
                r.failures.append(jsonable(s))
        return ok

    def merge(self, other: VerificationReport):
        """Fold the counts of a sub-report into this one."""
        r = self.report
        r.n_checked += other.n_checked
        r.n_failed += other.n_failed
        r.n_skipped_defect += other.n_skipped_defect
        r.max_error = max(r.max_error, other.max_error)
        r.failures.extend(other.failures[: max(0, MAX_FAILURE_SAMPLES - len(r.failures))])

    def check_true(self, condition: bool, sample=None) -> bool:
        return self.check(0.0 if condition else math.inf, sample)

    def skip(self, n: int = 1):
        self.report.n_skipped_defect += n

    def note(self, **params):
        self.report.params.update(jsonable(params))

    def finish(self) -> VerificationReport:
        self.report.elapsed_ms = round((time.perf_counter() - self._t0) * 1000.0, 3)
        return self.report


REPORT_FIELDS = [f.name for f in fields(VerificationReport)]


def report_to_dict(r: VerificationReport) -> dict:
    d = asdict(r)
    d["max_error"] = jsonable(d["max_error"])
    return jsonable(d)


def reports_to_json(reports) -> str:
    return json.dumps([report_to_dict(r) for r in reports], indent=2, sort_keys=False) + "\n"


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_FIELDS)
    for r in reports:
        d = report_to_dict(r)
        row = []
        for name in REPORT_FIELDS:
            v = d[name]
            row.append(json.dumps(v, sort_keys=True) if isinstance(v, (dict, list)) else ("" if v is None else v))
        w.writerow(row)
    return buf.getvalue()


def emit_report(reports, path, fmt: str = "json") -> None:
    if fmt == "json":
        text = reports_to_json(reports)
    elif fmt == "csv":
        text = reports_to_csv(reports)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def load_reports(path) -> list[VerificationReport]:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    out = []
    for d in data:
        if isinstance(d.get("max_error"), str):
            d["max_error"] = float(d["max_error"])
        out.append(VerificationReport.from_dict(d))
    return out
