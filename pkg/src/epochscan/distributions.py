"""Null distributions and their tail probabilities.

All p-values go through the regularized incomplete gamma and beta functions
(``scipy.special.gammaincc`` / ``betainc``) so every test in the package
shares one implementation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from scipy import special


def chi2_sf(x: float, df: float) -> float:
    """Upper tail ``P(X >= x)`` for a chi-square variable with ``df`` dof."""
    if df <= 0:
        raise ValueError("df must be positive")
    if x <= 0:
        return 1.0
    return float(special.gammaincc(0.5 * df, 0.5 * x))


def chi2_cdf(x: float, df: float) -> float:
    if df <= 0:
        raise ValueError("df must be positive")
    if x <= 0:
        return 0.0
    return float(special.gammainc(0.5 * df, 0.5 * x))


def f_sf(x: float, df1: float, df2: float) -> float:
    """Upper tail of the F(df1, df2) distribution.

    Uses ``P(F >= x) = I_{d2/(d2 + d1 x)}(d2/2, d1/2)``.
    """
    if df1 <= 0 or df2 <= 0:
        raise ValueError("degrees of freedom must be positive")
    if x <= 0:
        return 1.0
    return float(special.betainc(0.5 * df2, 0.5 * df1, df2 / (df2 + df1 * x)))


def normal_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def normal_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def normal_two_sided(z: float) -> float:
    """Two-sided p-value ``2 P(Z >= |z|)``."""
    return min(1.0, math.erfc(abs(z) / math.sqrt(2.0)))


@dataclass(frozen=True)
class NullDistribution:
    """Descriptor of the reference distribution a statistic is compared with.

    ``kind`` is one of ``"chi2"``, ``"F"``, ``"normal"`` or
    ``"dickey-fuller"`` (left-tail critical values only).
    """

    kind: str
    df1: Optional[float] = None
    df2: Optional[float] = None

    @classmethod
    def chi2(cls, df: float) -> "NullDistribution":
        return cls("chi2", df)

    @classmethod
    def f(cls, df1: float, df2: float) -> "NullDistribution":
        return cls("F", df1, df2)

    @classmethod
    def normal(cls) -> "NullDistribution":
        return cls("normal")

    @classmethod
    def dickey_fuller(cls) -> "NullDistribution":
        return cls("dickey-fuller")

    def sf(self, x: float) -> float:
        if self.kind == "chi2":
            return chi2_sf(x, self.df1)
        if self.kind == "F":
            return f_sf(x, self.df1, self.df2)
        if self.kind == "normal":
            return normal_two_sided(x)
        raise ValueError(f"no closed-form tail for {self.kind!r}")

    def __str__(self) -> str:
        if self.kind == "chi2":
            return f"chi2({_fmt(self.df1)})"
        if self.kind == "F":
            return f"F({_fmt(self.df1)}, {_fmt(self.df2)})"
        return self.kind

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.df1 is not None:
            out["df1"] = self.df1
        if self.df2 is not None:
            out["df2"] = self.df2
        return out


def _fmt(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(v)
