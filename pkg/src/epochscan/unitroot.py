"""Unit-root tests: augmented Dickey-Fuller and residual augmented least squares.

Both tests use the regression

    dx_t = a + g x_{t-1} + sum_{i=1..q} phi_i dx_{t-i} + e_t

(intercept, no trend) with ``q`` chosen by BIC over ``0..max_lag`` on a common
sample. The ADF statistic is the t-ratio of ``g`` and is compared with the 5%
intercept-only critical value -2.87.

RALS adds the residual-moment regressors ``e_t^2 - m2`` and
``e_t^3 - m3 - 3 m2 e_t`` built from the ADF residuals. Its critical values are
not taken from a published table; they are simulated under a driftless
Gaussian random walk of the same length with :func:`critical_values_rals`.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from functools import lru_cache, partial
from typing import Optional

import numpy as np

from ._numeric import lag_matrix, ols
from ._parallel import chunked, flatten, ordered_map
from ._rng import substream
from .distributions import NullDistribution
from .errors import InsufficientDataError, RankDeficientError
from .outcome import TestOutcome

ADF_CRITICAL_5PCT = -2.87
QUANTILES = (0.01, 0.05, 0.10)
MIN_CV_REPLICATIONS = 1000
DEFAULT_RALS_REPLICATIONS = 2000
DEFAULT_RALS_SEED = 20140315


def default_max_lag(n: int) -> int:
    """``floor(12 (n/100)^{1/4})``."""
    return int(math.floor(12.0 * (n / 100.0) ** 0.25))


@dataclass(frozen=True, eq=False)
class _DFRegression:
    lags: int
    X: np.ndarray
    y: np.ndarray
    coef: np.ndarray
    resid: np.ndarray
    tstat: float


def _select_lags(x: np.ndarray, max_lag: int) -> int:
    """BIC lag choice on the common sample, via nested prefixes of one QR."""
    dx = np.diff(x)
    y = dx[max_lag:]
    nobs = y.shape[0]
    X = np.column_stack([np.ones(nobs), x[max_lag:-1], lag_matrix(dx, max_lag)])
    q, r = np.linalg.qr(X)
    diag = np.abs(np.diag(r))
    if diag.min() <= 1e-10 * diag.max():
        raise RankDeficientError("rank-deficient Dickey-Fuller design")
    qty = q.T @ y
    resid = y - q @ qty
    rss_full = float(resid @ resid)
    # rss of the model using the first k columns
    tail = np.cumsum((qty**2)[::-1])[::-1]
    best_q, best_bic = 0, math.inf
    for lags in range(max_lag + 1):
        k = lags + 2
        rss = rss_full + (float(tail[k]) if k < tail.shape[0] else 0.0)
        crit = nobs * math.log(rss / nobs) + k * math.log(nobs) if rss > 0 else -math.inf
        if crit < best_bic:
            best_q, best_bic = lags, crit
    return best_q


def _df_regression(x: np.ndarray, lags: int) -> _DFRegression:
    dx = np.diff(x)
    y = dx[lags:]
    X = np.column_stack([np.ones(y.shape[0]), x[lags:-1], lag_matrix(dx, lags)])
    res = ols(X, y)
    t = res.coef[1] / res.stderr()[1]
    return _DFRegression(lags, X, y, res.coef, res.resid, float(t))


def _check_length(x: np.ndarray, max_lag: int) -> None:
    if max_lag < 0:
        raise ValueError("max_lag must be nonnegative")
    if x.shape[0] <= max_lag + 10:
        raise InsufficientDataError(
            f"series of length {x.shape[0]} too short for max_lag={max_lag}")


def _adf_fit(series, max_lag: Optional[int]) -> tuple[np.ndarray, int, _DFRegression]:
    x = np.asarray(series, dtype=float)
    max_lag = default_max_lag(x.shape[0]) if max_lag is None else int(max_lag)
    _check_length(x, max_lag)
    lags = _select_lags(x, max_lag)
    return x, max_lag, _df_regression(x, lags)


def adf(series, max_lag: Optional[int] = None) -> TestOutcome:
    """Augmented Dickey-Fuller t-test with intercept and BIC lag choice."""
    x, max_lag, reg = _adf_fit(series, max_lag)
    return TestOutcome.from_critical_value(
        "ADF", reg.tstat, NullDistribution.dickey_fuller(), ADF_CRITICAL_5PCT,
        lags=reg.lags, max_lag=max_lag, nobs=int(reg.y.shape[0]),
        gamma=float(reg.coef[1]),
    )


def _rals_from_regression(reg: _DFRegression) -> tuple[float, np.ndarray]:
    e = reg.resid
    m2 = float(np.mean(e**2))
    m3 = float(np.mean(e**3))
    w = np.column_stack([e**2 - m2, e**3 - m3 - 3.0 * m2 * e])
    res = ols(np.column_stack([reg.X, w]), reg.y)
    return float(res.coef[1] / res.stderr()[1]), res.coef


def rals_statistic(series, max_lag: Optional[int] = None) -> float:
    _, _, reg = _adf_fit(series, max_lag)
    return _rals_from_regression(reg)[0]


@dataclass(frozen=True)
class CriticalValueTable:
    """Left-tail quantiles of a simulated null distribution."""

    n: int
    replications: int
    seed: int
    max_lag: int
    values: tuple[tuple[float, float], ...]

    def __getitem__(self, level: float) -> float:
        for q, v in self.values:
            if math.isclose(q, level):
                return v
        raise KeyError(level)

    def as_dict(self) -> dict[float, float]:
        return dict(self.values)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["quantile", "value", "n", "replications", "seed"])
        for q, v in self.values:
            w.writerow([repr(q), repr(v), self.n, self.replications, self.seed])
        return buf.getvalue()


def _null_rals_block(indices: range, n: int, seed: int, max_lag: int) -> list[float]:
    out = []
    for i in indices:
        walk = np.cumsum(substream(seed, i).standard_normal(n))
        out.append(rals_statistic(walk, max_lag))
    return out


def critical_values_rals(n: int, replications: int = 10000, seed: int = DEFAULT_RALS_SEED,
                         max_lag: Optional[int] = None, workers: int = 1) -> CriticalValueTable:
    """Simulate RALS critical values (1%, 5%, 10%) for series of length ``n``.

    Replication ``i`` draws its random walk from substream ``i`` of ``seed``;
    the table is identical for any ``workers``.
    """
    if replications < MIN_CV_REPLICATIONS:
        raise ValueError(
            f"insufficient replications: {replications} < {MIN_CV_REPLICATIONS}")
    max_lag = default_max_lag(n) if max_lag is None else int(max_lag)
    _check_length(np.empty(n), max_lag)
    job = partial(_null_rals_block, n=n, seed=seed, max_lag=max_lag)
    stats = np.array(flatten(ordered_map(job, chunked(replications, workers * 4), workers)))
    values = tuple((q, float(np.quantile(stats, q))) for q in QUANTILES)
    return CriticalValueTable(n, replications, seed, max_lag, values)


@lru_cache(maxsize=32)
def default_rals_table(n: int, max_lag: int) -> CriticalValueTable:
    return critical_values_rals(n, DEFAULT_RALS_REPLICATIONS, DEFAULT_RALS_SEED, max_lag)


def rals(series, max_lag: Optional[int] = None,
         critical_values: Optional[CriticalValueTable] = None) -> TestOutcome:
    """Residual augmented least squares unit-root test.

    Without ``critical_values`` a table for ``len(series)`` is simulated
    (``DEFAULT_RALS_REPLICATIONS`` draws, fixed seed) and cached.
    """
    x, max_lag, reg = _adf_fit(series, max_lag)
    stat, coef = _rals_from_regression(reg)
    if critical_values is None:
        critical_values = default_rals_table(x.shape[0], max_lag)
    return TestOutcome.from_critical_value(
        "RALS", stat, NullDistribution.dickey_fuller(), critical_values[0.05],
        lags=reg.lags, max_lag=max_lag, nobs=int(reg.y.shape[0]),
        adf_statistic=reg.tstat, gamma=float(coef[1]),
        critical_values={str(q): v for q, v in critical_values.values},
        critical_value_replications=critical_values.replications,
    )
