"""Windowed portmanteau bicorrelation test (Hinich's H statistic).

The pre-whitened series is cut into consecutive, non-overlapping windows of
``n`` observations. Inside each window the data are standardized with the
window's own mean and (population) standard deviation, and

    C(r, s) = (n - s)^{-1} sum_{t=0}^{n-s-1} z_t z_{t+r} z_{t+s}
    H       = sum_{s=2}^{L} sum_{r=1}^{s-1} (n - s) C(r, s)^2

with ``L = floor(n^c)``. ``H`` is referred to chi-square with
``L (L - 1) / 2`` degrees of freedom; a window is significant when its
p-value is below ``alpha``. A residual tail shorter than one window is
discarded.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._numeric import is_constant
from .armodel import DEFAULT_MAX_ORDER, ResidualSeries, prewhiten
from .distributions import chi2_sf
from .errors import InsufficientDataError
from .ingest import ReturnSeries


@dataclass(frozen=True)
class WindowSpec:
    n: int = 28
    c: float = 0.4
    alpha: float = 0.05

    def __post_init__(self):
        if not 0.0 < self.c < 0.5:
            raise ValueError("lag exponent c must lie in (0, 0.5)")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if self.n < 8:
            raise ValueError("window length must be at least 8")
        if self.lags < 2:
            raise ValueError(f"window length {self.n} with c={self.c} gives fewer than 2 lags")

    @property
    def lags(self) -> int:
        """``L = floor(n^c)``; the small guard keeps exact powers from rounding down."""
        return int(math.floor(self.n ** self.c + 1e-9))

    @property
    def df(self) -> int:
        L = self.lags
        return L * (L - 1) // 2


@dataclass(frozen=True)
class Window:
    index: int
    start: int  # offset into the residual series
    values: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class WindowPartition:
    windows: list[Window]
    discarded_tail: int


@dataclass(frozen=True)
class WindowResult:
    index: int
    start_date: Optional[str]
    end_date: Optional[str]
    n: int
    L: int
    df: int
    h_statistic: Optional[float]
    p_value: Optional[float]
    significant: bool
    degenerate: bool = False
    start_offset: int = 0

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "start_date": self.start_date,
            "end_date": self.end_date,
            "n": self.n,
            "L": self.L,
            "df": self.df,
            "h_statistic": self.h_statistic,
            "p_value": self.p_value,
            "significant": self.significant,
            "degenerate": self.degenerate,
            "start_offset": self.start_offset,
        }


@dataclass(frozen=True)
class ScanReport:
    instrument_id: str
    ar_order_used: int
    total_windows: int
    significant_windows: int
    significant_fraction: Optional[float]
    windows: list[WindowResult]
    discarded_tail: int
    degenerate_windows: int
    spec: WindowSpec

    def significant(self) -> list[WindowResult]:
        return [w for w in self.windows if w.significant]

    def to_dict(self) -> dict:
        return {
            "instrument_id": self.instrument_id,
            "ar_order_used": self.ar_order_used,
            "window_length": self.spec.n,
            "c": self.spec.c,
            "alpha": self.spec.alpha,
            "total_windows": self.total_windows,
            "significant_windows": self.significant_windows,
            "significant_fraction": self.significant_fraction,
            "degenerate_windows": self.degenerate_windows,
            "discarded_tail": self.discarded_tail,
            "windows": [w.to_dict() for w in self.windows],
        }


def _values(resid) -> np.ndarray:
    if isinstance(resid, ResidualSeries):
        return np.asarray(resid.values, dtype=float)
    return np.asarray(resid, dtype=float)


def partition_windows(resid, spec: WindowSpec = WindowSpec()) -> WindowPartition:
    x = _values(resid)
    count = x.shape[0] // spec.n
    if count == 0:
        raise InsufficientDataError("series shorter than one window")
    windows = [Window(k, k * spec.n, x[k * spec.n:(k + 1) * spec.n]) for k in range(count)]
    return WindowPartition(windows, x.shape[0] - count * spec.n)


def bicorrelation(z, r: int, s: int) -> float:
    """``(n - s)^{-1} sum_t z_t z_{t+r} z_{t+s}`` for lags ``0 < r < s < n``."""
    z = np.asarray(z, dtype=float)
    n = z.shape[0]
    if not 0 < r < s:
        raise ValueError(f"bicorrelation requires 0 < r < s, got r={r}, s={s}")
    if s >= n:
        raise ValueError(f"lag s={s} must be smaller than the window length {n}")
    m = n - s
    return float(np.sum(z[:m] * z[r:r + m] * z[s:])) / m


def h_statistic(window, spec: WindowSpec = WindowSpec(), index: int = 0,
                start_date: Optional[str] = None, end_date: Optional[str] = None,
                start_offset: int = 0) -> WindowResult:
    """H statistic of one window; a constant window is flagged degenerate."""
    x = np.asarray(window, dtype=float)
    n = x.shape[0]
    L = int(math.floor(n ** spec.c + 1e-9))
    df = L * (L - 1) // 2
    if L < 2 or L >= n:
        raise ValueError(f"window of length {n} gives an unusable lag count {L}")
    if is_constant(x):
        return WindowResult(index, start_date, end_date, n, L, df, None, None, False,
                            degenerate=True, start_offset=start_offset)
    z = (x - x.mean()) / x.std()
    h = 0.0
    for s in range(2, L + 1):
        for r in range(1, s):
            h += (n - s) * bicorrelation(z, r, s) ** 2
    p = chi2_sf(h, df)
    return WindowResult(index, start_date, end_date, n, L, df, h, p, p < spec.alpha,
                        start_offset=start_offset)


def _fmt_date(d, style: str) -> str:
    if style == "us":
        return d.astype(object).strftime("%m/%d/%y")
    return str(d)


def scan_residuals(resid: ResidualSeries, spec: WindowSpec = WindowSpec(),
                   date_style: str = "iso") -> ScanReport:
    """Evaluate every window of an already pre-whitened series."""
    if not isinstance(resid, ResidualSeries):
        resid = ResidualSeries(np.asarray(resid, dtype=float), 0)
    part = partition_windows(resid, spec)
    dates = resid.source_dates
    results = []
    for w in part.windows:
        if dates is not None:
            start = _fmt_date(dates[w.start], date_style)
            end = _fmt_date(dates[w.start + spec.n - 1], date_style)
        else:
            start = end = None
        results.append(h_statistic(w.values, spec, w.index, start, end, w.start))
    valid = [r for r in results if not r.degenerate]
    sig = sum(r.significant for r in results)
    return ScanReport(
        instrument_id=resid.instrument_id,
        ar_order_used=resid.source_order,
        total_windows=len(results),
        significant_windows=sig,
        significant_fraction=sig / len(valid) if valid else None,
        windows=results,
        discarded_tail=part.discarded_tail,
        degenerate_windows=len(results) - len(valid),
        spec=spec,
    )


def scan(returns, spec: WindowSpec = WindowSpec(), p_max: int = DEFAULT_MAX_ORDER,
         date_style: str = "iso") -> ScanReport:
    """Pre-whiten ``returns`` with a BIC-selected AR model, then scan windows."""
    if not isinstance(returns, ReturnSeries):
        returns = ReturnSeries.from_values(returns)
    return scan_residuals(prewhiten(returns, p_max), spec, date_style)
