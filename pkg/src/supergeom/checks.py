"""Pass/fail records shared by the verification suites and the CLI report."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np


@dataclass
class Check:
    """One numerical check: ``value <= tolerance`` (``kind='max'``) or ``value >= tolerance`` (``'min'``)."""

    name: str
    value: float
    tolerance: float
    kind: str = "max"
    note: str = ""

    @property
    def passed(self) -> bool:
        if isinstance(self.value, float) and math.isnan(self.value):
            return False
        if self.kind == "max":
            return self.value <= self.tolerance
        return self.value >= self.tolerance

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "value": _clean(self.value),
            "tolerance": _clean(self.tolerance),
            "kind": self.kind,
            "passed": self.passed,
        }
        if self.note:
            out["note"] = self.note
        return out


def jsonable(v):
    """Recursively convert report values to JSON types (exact rationals become strings)."""
    if isinstance(v, dict):
        return {str(k): jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [jsonable(x) for x in v]
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return _clean(v, 10)
    if isinstance(v, np.ndarray):
        return jsonable(v.tolist())
    return v


def _clean(v, digits: int = 7):
    """Rounded float (``digits`` significant digits); infinities and NaN as strings."""
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if math.isnan(v):
        return "nan"
    return float(f"{v:.{digits}g}")


@dataclass
class SuiteReport:
    """Ordered list of checks plus free-form values (term tables and the like)."""

    name: str
    checks: list = field(default_factory=list)
    values: dict = field(default_factory=dict)

    def add(self, name, value, tolerance, kind="max", note="") -> Check:
        chk = Check(name, float(value), float(tolerance), kind, note)
        self.checks.append(chk)
        return chk

    def extend(self, other: "SuiteReport", prefix: str = ""):
        for chk in other.checks:
            self.checks.append(Check(prefix + chk.name, chk.value, chk.tolerance, chk.kind, chk.note))
        for k, v in other.values.items():
            self.values[prefix + k] = v

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {
            "suite": self.name,
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
            "values": jsonable(self.values),
        }
