"""Per-check report rows and their CSV / JSON serialization.

CSV output is byte-stable: '.' decimals, 17 significant digits, LF
line endings, rows ordered by (check, sample_id).
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

CHECK_COLUMNS = ["check", "mu", "sample_id", "value", "bound", "pass"]
STABILITY_COLUMNS = ["sample_id", "x_norm", "residual", "bound_app", "bound_phitilde",
                     "n_used", "certified", "pass"]


def fmt_float(v: float) -> str:
    return format(float(v), ".17g")


def fmt_scalar(mu) -> str:
    if mu is None:
        return ""
    mu = complex(mu)
    return f"{fmt_float(mu.real)}{'+' if mu.imag >= 0 or math.isnan(mu.imag) else '-'}{fmt_float(abs(mu.imag))}j"


def fmt_bool(b: bool) -> str:
    return "true" if b else "false"


@dataclass(frozen=True)
class Row:
    check: str
    sample_id: int
    value: float
    bound: float
    passed: bool
    mu: complex | None = None

    def as_dict(self) -> dict:
        return {"check": self.check, "mu": fmt_scalar(self.mu), "sample_id": self.sample_id,
                "value": self.value, "bound": self.bound, "pass": self.passed}


@dataclass
class Report:
    name: str
    rows: list[Row] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def add(self, check: str, sample_id: int, value: float, bound: float,
            mu: complex | None = None, passed: bool | None = None) -> Row:
        value, bound = float(value), float(bound)
        if passed is None:
            passed = value <= bound  # NaN compares false
        row = Row(check, int(sample_id), value, bound, bool(passed), mu)
        self.rows.append(row)
        return row

    def extend(self, other: "Report") -> "Report":
        self.rows.extend(other.rows)
        for k, v in other.meta.items():
            self.meta.setdefault(k, v)
        return self

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def failures(self) -> list[Row]:
        return [r for r in self.rows if not r.passed]

    def select(self, check: str) -> list[Row]:
        return [r for r in self.rows if r.check == check]

    def max_value(self, check: str | None = None) -> float:
        vals = [r.value for r in self.rows if check is None or r.check == check]
        return max(vals, default=0.0)

    def sorted_rows(self) -> list[Row]:
        return sorted(self.rows, key=lambda r: (r.check, r.sample_id))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CHECK_COLUMNS)
        for r in self.sorted_rows():
            w.writerow([r.check, fmt_scalar(r.mu), r.sample_id, fmt_float(r.value),
                        fmt_float(r.bound), fmt_bool(r.passed)])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "name": self.name,
            "passed": self.passed,
            "meta": self.meta,
            "rows": [r.as_dict() for r in self.sorted_rows()],
        }
        return json.dumps(doc, indent=2, sort_keys=True, allow_nan=True) + "\n"

    def summary(self) -> str:
        lines = [f"report {self.name}: {'PASS' if self.passed else 'FAIL'} ({len(self.rows)} rows)"]
        by_check: dict[str, list[Row]] = {}
        for r in self.sorted_rows():
            by_check.setdefault(r.check, []).append(r)
        for check, rows in by_check.items():
            fails = sum(not r.passed for r in rows)
            worst = max(rows, key=lambda r: (r.value - r.bound) if math.isfinite(r.value - r.bound) else math.inf)
            lines.append(f"  {check:<32} rows={len(rows):<6} fail={fails:<5} "
                         f"max_value={fmt_float(max(r.value for r in rows))} "
                         f"worst_margin={fmt_float(worst.bound - worst.value)}")
        return "\n".join(lines) + "\n"


class HomReport(Report):
    """Report of the homomorphism checks with the two headline maxima."""

    @property
    def max_hom_defect(self) -> float:
        return max((r.value for r in self.rows if r.check.startswith("hom_defect")), default=0.0)

    @property
    def max_linearity_defect(self) -> float:
        return max((r.value for r in self.rows if r.check.startswith("linearity")), default=0.0)


@dataclass(frozen=True)
class StabilityRow:
    sample_id: int
    x_norm: float
    residual: float
    bound_app: float
    bound_phitilde: float
    n_used: int
    certified: bool
    passed: bool


def stability_csv(rows: list[StabilityRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(STABILITY_COLUMNS)
    for r in sorted(rows, key=lambda r: r.sample_id):
        w.writerow([r.sample_id, fmt_float(r.x_norm), fmt_float(r.residual), fmt_float(r.bound_app),
                    fmt_float(r.bound_phitilde), r.n_used, fmt_bool(r.certified), fmt_bool(r.passed)])
    return buf.getvalue()


def stability_json(rows: list[StabilityRow]) -> str:
    return json.dumps([asdict(r) for r in sorted(rows, key=lambda r: r.sample_id)],
                      indent=2, sort_keys=True) + "\n"
