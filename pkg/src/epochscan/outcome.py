"""The result record shared by every hypothesis test in the package."""
from __future__ import annotations

import math
import numbers
from dataclasses import dataclass, field
from typing import Any, Optional

from .distributions import NullDistribution


@dataclass(frozen=True)
class TestOutcome:
    """A named statistic with its reference distribution and decision.

    Exactly one of ``p_value`` and ``critical_value_5pct`` drives
    ``reject_at_5pct``: tests with a closed-form null reject when
    ``p_value < 0.05``; Dickey-Fuller-type tests reject when the statistic is
    below the (left-tail) critical value.
    """

    __test__ = False  # keep pytest from collecting this as a test class

    test_name: str
    statistic: float
    null_distribution: NullDistribution
    p_value: Optional[float] = None
    critical_value_5pct: Optional[float] = None
    reject_at_5pct: bool = False
    details: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.p_value is not None and not 0.0 <= self.p_value <= 1.0:
            raise ValueError(f"p-value {self.p_value} outside [0, 1]")

    @classmethod
    def from_p_value(cls, test_name, statistic, null, p_value, **details):
        p = min(1.0, max(0.0, float(p_value)))
        return cls(test_name, float(statistic), null, p_value=p,
                   reject_at_5pct=p < 0.05, details=details)

    @classmethod
    def from_critical_value(cls, test_name, statistic, null, critical, **details):
        return cls(test_name, float(statistic), null,
                   critical_value_5pct=float(critical),
                   reject_at_5pct=bool(statistic < critical), details=details)

    def rejects(self, alpha: float) -> bool:
        """Decision at an arbitrary level.

        Critical-value tests only know the levels listed in
        ``details["critical_values"]`` (plus 5%).
        """
        if alpha <= 0:
            return False
        if self.p_value is not None:
            return self.p_value < alpha
        table = dict(self.details.get("critical_values", {}))
        if self.critical_value_5pct is not None:
            table.setdefault(0.05, self.critical_value_5pct)
        for level, value in table.items():
            if math.isclose(float(level), alpha):
                return self.statistic < value
        raise ValueError(f"no critical value for alpha={alpha} in {self.test_name}")

    def to_dict(self) -> dict:
        return {
            "test_name": self.test_name,
            "statistic": _finite_or_none(self.statistic),
            "null_distribution": self.null_distribution.to_dict(),
            "p_value": self.p_value,
            "critical_value_5pct": self.critical_value_5pct,
            "reject_at_5pct": self.reject_at_5pct,
            "details": _jsonable(self.details),
        }


def _finite_or_none(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, numbers.Integral):
        return int(obj)
    try:
        return _finite_or_none(obj)
    except (TypeError, ValueError):
        return str(obj)
