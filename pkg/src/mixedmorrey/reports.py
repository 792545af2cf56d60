"""Structured verification results with deterministic JSON/CSV output."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

__all__ = ["VerificationReport", "jsonable", "write_reports"]


def jsonable(obj: Any) -> Any:
    """Recursively convert to JSON-safe values; infinities become strings."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if hasattr(obj, "to_json"):
        return jsonable(obj.to_json())
    if hasattr(obj, "to_dict"):
        return jsonable(obj.to_dict())
    if hasattr(obj, "item") and callable(obj.item):
        obj = obj.item()
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, (bool, int, str)) or obj is None:
        return obj
    return str(obj)


@dataclass
class VerificationReport:
    """Result of one harness check.

    ``passed`` must be computable from ``levels``/``rows`` and ``tolerance``
    alone; ``criterion`` says how.
    """

    check: str
    params: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)
    levels: list = field(default_factory=list)
    sup_ratio: float | None = None
    trend: float | None = None
    tolerance: float | None = None
    passed: bool = False
    criterion: str = ""
    notes: list = field(default_factory=list)
    subreports: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return jsonable({
            "check": self.check,
            "params": self.params,
            "levels": self.levels,
            "sup_ratio": self.sup_ratio,
            "trend": self.trend,
            "tolerance": self.tolerance,
            "passed": bool(self.passed),
            "criterion": self.criterion,
            "notes": self.notes,
            "rows": self.rows,
            "subreports": [s.to_dict() for s in self.subreports],
        })

    def to_json(self, **kws) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=kws.get("indent", 2))

    def all_passed(self) -> bool:
        return bool(self.passed) and all(s.all_passed() for s in self.subreports)

    def summary_line(self) -> str:
        status = "PASS" if self.all_passed() else "FAIL"
        extra = "" if self.sup_ratio is None else f" sup={self.sup_ratio:.6g}"
        if self.trend is not None:
            extra += f" drift={self.trend:.4g}"
        return f"{status} {self.check}{extra}"

    def flat_rows(self) -> list[dict]:
        out = []
        for r in self.rows:
            row = {"check": self.check}
            row.update(r)
            out.append(jsonable(row))
        for s in self.subreports:
            out.extend(s.flat_rows())
        return out

    def to_csv(self) -> str:
        rows = self.flat_rows()
        keys = []
        for r in rows:
            for k in r:
                if k not in keys:
                    keys.append(k)
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=keys or ["check"], lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in keys})
        return buf.getvalue()


def write_reports(reports: list[VerificationReport], outdir) -> tuple[Path, Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    jpath = outdir / "report.json"
    cpath = outdir / "report.csv"
    payload = {"all_passed": all(r.all_passed() for r in reports),
               "checks": [r.to_dict() for r in reports]}
    jpath.write_text(json.dumps(payload, sort_keys=True, indent=2))
    cpath.write_text(_joined_csv(reports))
    return jpath, cpath


def _joined_csv(reports) -> str:
    rows = []
    for r in reports:
        rows.extend(r.flat_rows())
        rows.append(jsonable({"check": r.check, "summary": r.summary_line(),
                              "passed": r.all_passed()}))
    keys = []
    for r in rows:
        for k in r:
            if k not in keys:
                keys.append(k)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=keys or ["check"], lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in keys})
    return buf.getvalue()
