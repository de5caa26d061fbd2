"""Price loading, log returns and descriptive statistics of returns."""
from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import asdict, dataclass
from typing import BinaryIO, Optional, Union

import numpy as np

from .distributions import chi2_sf
from .errors import DegenerateSeriesError, InputFormatError, InsufficientDataError
from ._numeric import is_constant

PathOrStream = Union[str, os.PathLike, BinaryIO, io.TextIOBase]


def _as_dates(dates) -> np.ndarray:
    return np.asarray(dates, dtype="datetime64[D]")


@dataclass(frozen=True, eq=False)
class PriceSeries:
    """Dated, strictly positive price observations for one instrument."""

    instrument_id: str
    dates: np.ndarray
    prices: np.ndarray
    units: str = ""

    def __post_init__(self):
        dates = _as_dates(self.dates)
        prices = np.asarray(self.prices, dtype=float)
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "prices", prices)
        if dates.shape != prices.shape or prices.ndim != 1:
            raise InputFormatError("dates and prices must be 1-d and equally long")
        if prices.size < 2:
            raise InsufficientDataError("a price series needs at least 2 observations")
        if not np.all(np.isfinite(prices)) or np.any(prices <= 0):
            bad = int(np.flatnonzero(~(prices > 0) | ~np.isfinite(prices))[0])
            raise InputFormatError(f"nonpositive price at position {bad}")
        if np.any(np.diff(dates) <= np.timedelta64(0, "D")):
            raise InputFormatError("dates must be strictly increasing")

    def __len__(self) -> int:
        return self.prices.shape[0]


@dataclass(frozen=True, eq=False)
class ReturnSeries:
    """Continuously compounded returns; element ``t`` carries the date of ``p_t``."""

    instrument_id: str
    dates: np.ndarray
    values: np.ndarray
    source_length: int

    def __post_init__(self):
        dates = _as_dates(self.dates)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "values", values)
        if dates.shape != values.shape:
            raise ValueError("dates and values must be equally long")
        if values.shape[0] != self.source_length - 1:
            raise ValueError("return series must be one shorter than its price series")
        if not np.all(np.isfinite(values)):
            raise ValueError("returns must be finite")

    def __len__(self) -> int:
        return self.values.shape[0]

    @classmethod
    def from_values(cls, values, instrument_id: str = "series",
                    start: str = "2000-01-01") -> "ReturnSeries":
        """Wrap a bare array, assigning consecutive calendar dates."""
        values = np.asarray(values, dtype=float)
        dates = np.datetime64(start, "D") + np.arange(values.shape[0])
        return cls(instrument_id, dates, values, values.shape[0] + 1)


def load_prices(source: PathOrStream, instrument_id: Optional[str] = None,
                units: str = "") -> PriceSeries:
    """Read a ``date,price`` CSV into a :class:`PriceSeries`.

    ``source`` is a path or a binary/text stream. Blank lines are skipped.
    Error messages cite the 1-based line number in the file.
    """
    if isinstance(source, (str, os.PathLike)):
        if instrument_id is None:
            instrument_id = os.path.splitext(os.path.basename(os.fspath(source)))[0]
        with open(source, "rb") as fh:
            raw = fh.read()
    else:
        raw = source.read()
    if instrument_id is None:
        instrument_id = "series"
    text = raw.decode("utf-8-sig") if isinstance(raw, bytes) else raw

    rows = csv.reader(io.StringIO(text))
    header = None
    dates, prices = [], []
    for lineno, row in enumerate(rows, start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        if header is None:
            header = [cell.strip().lower() for cell in row]
            if header != ["date", "price"]:
                raise InputFormatError(f"expected header 'date,price' at line {lineno}")
            continue
        if len(row) != 2:
            raise InputFormatError(f"malformed row at line {lineno}: expected 2 fields")
        try:
            day = np.datetime64(row[0].strip(), "D")
            if len(row[0].strip()) != 10:
                raise ValueError
        except ValueError:
            raise InputFormatError(f"malformed date at line {lineno}: {row[0]!r}") from None
        try:
            price = float(row[1])
        except ValueError:
            raise InputFormatError(f"malformed price at line {lineno}: {row[1]!r}") from None
        if not math.isfinite(price) or price <= 0:
            raise InputFormatError(f"nonpositive price at line {lineno}")
        if dates and day <= dates[-1]:
            raise InputFormatError(f"duplicate or decreasing date at line {lineno}")
        dates.append(day)
        prices.append(price)

    if not prices:
        raise InsufficientDataError("no data rows")
    if len(prices) < 2:
        raise InsufficientDataError("fewer than 2 rows")
    return PriceSeries(instrument_id, np.array(dates, dtype="datetime64[D]"),
                       np.array(prices), units)


def log_returns(prices: PriceSeries) -> ReturnSeries:
    """``r_t = ln p_t - ln p_{t-1}``, dated by ``p_t``."""
    values = np.diff(np.log(prices.prices))
    return ReturnSeries(prices.instrument_id, prices.dates[1:], values, len(prices))


@dataclass(frozen=True)
class SummaryStats:
    n: int
    mean: float
    min: float
    max: float
    stddev: float
    skewness: float
    kurtosis: float
    jb_statistic: float
    jb_pvalue: float

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def summary_stats(returns) -> SummaryStats:
    """Descriptive statistics and the Jarque-Bera normality statistic.

    ``stddev`` uses the ``n - 1`` convention. Skewness and kurtosis are the
    third and fourth standardized population moments (kurtosis is raw, so a
    Gaussian sample gives about 3), and
    ``JB = n (S^2/6 + (K - 3)^2/24)`` is referred to chi-square(2).
    """
    x = returns.values if isinstance(returns, ReturnSeries) else np.asarray(returns, float)
    n = x.shape[0]
    if n < 4:
        raise InsufficientDataError("summary statistics need at least 4 observations")
    if is_constant(x):
        raise DegenerateSeriesError("zero variance")
    mean = float(np.mean(x))
    dev = x - mean
    m2 = float(np.mean(dev**2))
    m3 = float(np.mean(dev**3))
    m4 = float(np.mean(dev**4))
    skew = m3 / m2**1.5
    kurt = m4 / m2**2
    jb = n * (skew**2 / 6.0 + (kurt - 3.0) ** 2 / 24.0)
    return SummaryStats(
        n=n,
        mean=mean,
        min=float(np.min(x)),
        max=float(np.max(x)),
        stddev=float(np.std(x, ddof=1)),
        skewness=skew,
        kurtosis=kurt,
        jb_statistic=jb,
        jb_pvalue=chi2_sf(jb, 2),
    )
