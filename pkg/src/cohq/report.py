"""Structured pass/fail records for verification suites."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

PASS = "pass"
FAIL = "fail"
INFO = "info"
SKIPPED = "skipped"
BOUNDARY = "boundary-expected"


@dataclass
class CheckRecord:
    name: str
    deviation: float
    tolerance: float | None
    status: str
    detail: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status != FAIL

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "deviation": _num(self.deviation),
            "tolerance": _num(self.tolerance),
            "status": self.status,
            "pass": self.passed,
            "detail": {k: _jsonable(v) for k, v in self.detail.items()},
        }


@dataclass
class CheckReport:
    suite: str
    records: list = field(default_factory=list)
    environment: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)
    timing: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def check(self, name, deviation, tolerance, **detail) -> CheckRecord:
        """Record ``deviation <= tolerance`` (NaN always fails)."""
        deviation = float(deviation)
        ok = math.isfinite(deviation) and deviation <= tolerance
        rec = CheckRecord(name, deviation, float(tolerance), PASS if ok else FAIL, detail)
        self.records.append(rec)
        return rec

    def check_above(self, name, value, threshold, **detail) -> CheckRecord:
        """Record ``value > threshold``; used for negative controls."""
        value = float(value)
        ok = math.isfinite(value) and value > threshold
        rec = CheckRecord(name, value, float(threshold), PASS if ok else FAIL, {"kind": "lower-bound", **detail})
        self.records.append(rec)
        return rec

    def require(self, name, condition: bool, **detail) -> CheckRecord:
        """Boolean check; deviation is 0 on success and 1 on failure."""
        rec = CheckRecord(name, 0.0 if condition else 1.0, 0.0, PASS if condition else FAIL, detail)
        self.records.append(rec)
        return rec

    def info(self, name, value, **detail) -> CheckRecord:
        rec = CheckRecord(name, float(value), None, INFO, detail)
        self.records.append(rec)
        return rec

    def skip(self, name, reason: str) -> CheckRecord:
        rec = CheckRecord(name, 0.0, None, SKIPPED, {"reason": reason})
        self.records.append(rec)
        return rec

    def extend(self, other: "CheckReport", prefix: str | None = None) -> None:
        for rec in other.records:
            name = f"{prefix}/{rec.name}" if prefix else rec.name
            self.records.append(CheckRecord(name, rec.deviation, rec.tolerance, rec.status, rec.detail))
        for key, rows in other.tables.items():
            self.tables.setdefault(key, []).extend(rows)
        for key, value in other.environment.items():
            self.environment.setdefault(key, value)

    def failures(self) -> list:
        return [r for r in self.records if not r.passed]

    def summary_lines(self) -> list[str]:
        lines = []
        for r in self.records:
            tol = "" if r.tolerance is None else f" (tol {r.tolerance:.1e})"
            lines.append(f"[{r.status.upper():>17}] {r.name}: {r.deviation:.3e}{tol}")
        return lines

    def to_dict(self, include_timing: bool = False) -> dict:
        out = {
            "suite": self.suite,
            "pass": self.passed,
            "environment": {k: _jsonable(v) for k, v in self.environment.items()},
            "checks": [r.to_dict() for r in self.records],
            "tables": {k: [{c: _jsonable(v) for c, v in row.items()} for row in rows]
                       for k, rows in self.tables.items()},
        }
        if include_timing:
            out["timing"] = dict(self.timing)
        return out


def _num(x):
    if x is None:
        return None
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _jsonable(v):
    if isinstance(v, complex):
        return [_num(v.real), _num(v.imag)]
    if isinstance(v, bool) or v is None or isinstance(v, str):
        return v
    if isinstance(v, int):
        return v
    if isinstance(v, float):
        return _num(v)
    if hasattr(v, "item") and getattr(v, "ndim", 1) == 0:
        return _jsonable(v.item())
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)) or hasattr(v, "tolist"):
        return [_jsonable(x) for x in (v.tolist() if hasattr(v, "tolist") else v)]
    return str(v)
