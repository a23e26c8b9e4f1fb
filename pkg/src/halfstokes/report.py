"""Run reports: measured rows, invariant checks, CSV/JSON output."""

from __future__ import annotations

import json
import operator
from dataclasses import dataclass, field
from pathlib import Path

_OPS = {"<=": operator.le, ">=": operator.ge, "<": operator.lt, ">": operator.gt}


@dataclass
class Check:
    name: str
    value: float
    threshold: float
    op: str = "<="

    @property
    def passed(self) -> bool:
        return bool(_OPS[self.op](self.value, self.threshold))

    def as_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "threshold": self.threshold,
                "op": self.op, "passed": self.passed}


@dataclass
class SolveReport:
    name: str
    params: dict = field(default_factory=dict)
    columns: tuple[str, ...] = ()
    rows: list = field(default_factory=list)
    checks: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    def add_row(self, *vals):
        self.rows.append(tuple(vals))

    def add_check(self, name: str, value: float, threshold: float, op: str = "<=") -> Check:
        c = Check(name, float(value), float(threshold), op)
        self.checks.append(c)
        return c

    def warn(self, msg: str):
        self.warnings.append(msg)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failing(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def write_csv(self, path):
        path = Path(path)
        with open(path, "w", newline="\n") as fh:
            fh.write(",".join(self.columns) + "\n")
            for row in self.rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")

    def write_summary(self, path):
        payload = {
            "experiment": self.name,
            "params": {k: _jsonable(v) for k, v in self.params.items()},
            "checks": [c.as_dict() for c in self.checks],
            "warnings": self.warnings,
            "passed": self.passed,
        }
        Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _jsonable(v):
    if isinstance(v, (int, float, str, bool)) or v is None:
        return v
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    return repr(v)


def endpoint_log_slope(x, y, k: int = 3) -> tuple[float, float]:
    """|log-log| slopes at both ends of a sweep (first k and last k points)."""
    import numpy as np
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    good = (y > 0) & (x > 0)
    x, y = x[good], y[good]
    if len(x) < 2 * k:
        k = max(2, len(x) // 2)
    lo = np.polyfit(np.log(x[:k]), np.log(y[:k]), 1)[0]
    hi = np.polyfit(np.log(x[-k:]), np.log(y[-k:]), 1)[0]
    return float(lo), float(hi)
