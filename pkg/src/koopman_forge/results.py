"""Uniform result record shared by the numeric and symbolic checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one check.

    ``value`` is the measured quantity (a residual, a ratio, a rate) and
    ``tolerance`` the bound it was compared against; exact checks carry
    ``value=0.0`` or ``1.0`` and ``tolerance=0.0``.
    """

    check_id: str
    passed: bool
    value: float = 0.0
    tolerance: float = 0.0
    note: str = ""
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {
            "check_id": self.check_id,
            "pass": bool(self.passed),
            "value": _clean(self.value),
            "tolerance": _clean(self.tolerance),
            "note": self.note,
        }
        if self.details:
            out["details"] = {k: _clean(v) for k, v in self.details.items()}
        return out


def _clean(v):
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if hasattr(v, "item"):
        return _clean(v.item())
    return v


def within(check_id: str, value: float, tolerance: float, note: str = "", **details) -> CheckResult:
    """Pass when ``value <= tolerance``."""
    value = float(value)
    return CheckResult(check_id, bool(value <= tolerance), value, float(tolerance), note, details)


def in_range(check_id: str, value: float, lo: float, hi: float, note: str = "", **details) -> CheckResult:
    value = float(value)
    details = {"lo": lo, "hi": hi, **details}
    return CheckResult(check_id, bool(lo <= value <= hi), value, float(hi - lo) / 2, note, details)
