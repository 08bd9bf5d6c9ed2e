"""CSV report rows."""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Iterable, Sequence

from .model import Instance, Outcome
from .welfare import revenue, welfare

HEADER = ("instance", "mechanism", "welfare", "revenue", "opt", "ratio", "violations", "ms")


@dataclass(frozen=True)
class ReportRow:
    instance: str
    mechanism: str
    welfare: float
    revenue: float
    opt: float
    ratio: float
    violations: tuple[str, ...]
    ms: float

    @property
    def ok(self) -> bool:
        return not self.violations


def approximation_ratio(opt: float, achieved: float) -> float:
    if achieved > 0:
        return opt / achieved
    return 1.0 if opt == 0 else math.inf


def make_row(instance_id: str, mechanism: str, instance: Instance, outcome: Outcome, opt: float,
             violations: Sequence[str] = (), started: float | None = None) -> ReportRow:
    w = welfare(instance, outcome)
    ms = 0.0 if started is None else (time.perf_counter() - started) * 1e3
    return ReportRow(instance_id, mechanism, w, revenue(outcome), opt, approximation_ratio(opt, w),
                     tuple(violations), ms)


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ";".join(value) if value else "none"
    return str(value)


def write_rows(rows: Iterable[ReportRow], dest) -> None:
    """Write rows sorted by instance id; ``dest`` is a path or a text stream."""
    rows = sorted(rows, key=lambda r: (r.instance, r.mechanism))
    if isinstance(dest, (str, Path)):
        with open(dest, "w", newline="", encoding="utf-8") as fh:
            write_rows(rows, fh)
        return
    w = csv.writer(dest, lineterminator="\n")
    w.writerow(HEADER)
    for r in rows:
        w.writerow([_fmt(getattr(r, f.name)) for f in fields(ReportRow)])


def read_rows(src) -> list[ReportRow]:
    if isinstance(src, (str, Path)):
        with open(src, newline="", encoding="utf-8") as fh:
            return read_rows(fh)
    reader = csv.DictReader(src)
    if tuple(reader.fieldnames or ()) != HEADER:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    rows = []
    for rec in reader:
        v = rec["violations"]
        rows.append(ReportRow(
            rec["instance"], rec["mechanism"],
            float(rec["welfare"]), float(rec["revenue"]), float(rec["opt"]), float(rec["ratio"]),
            () if v == "none" else tuple(v.split(";")),
            float(rec["ms"]),
        ))
    return rows


def rows_to_csv(rows: Iterable[ReportRow]) -> str:
    buf = io.StringIO()
    write_rows(rows, buf)
    return buf.getvalue()
