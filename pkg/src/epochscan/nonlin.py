"""Full-sample nonlinearity tests on pre-whitened residuals.

McLeod-Li (Ljung-Box on squared residuals), Tsay's quadratic-dependence F
test, Engle's ARCH-LM test, and the BDS test of Broock, Dechert, Scheinkman
and LeBaron. :func:`run_battery` evaluates a grid of them and never aborts on a
single failing cell.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ._numeric import independent_columns, lag_matrix, ols
from .armodel import ResidualSeries
from .distributions import NullDistribution, chi2_sf, f_sf, normal_two_sided
from .errors import DegenerateSeriesError, EpochScanError, InsufficientDataError
from .outcome import TestOutcome


def _values(resid) -> np.ndarray:
    if isinstance(resid, ResidualSeries):
        return np.asarray(resid.values, dtype=float)
    return np.asarray(resid, dtype=float)


def _squares(e: np.ndarray) -> np.ndarray:
    sq = e * e
    if sq.size == 0 or float(np.ptp(sq)) <= 1e-12 * float(np.max(sq)):
        raise DegenerateSeriesError("degenerate squared series")
    return sq


def _check_lag(lag: int) -> None:
    if lag < 1:
        raise ValueError("lag must be a positive integer")


def squared_acf(e, nlags: int) -> np.ndarray:
    """Sample autocorrelations ``rho_1..rho_nlags`` of the squared series."""
    sq = _squares(_values(e))
    dev = sq - sq.mean()
    denom = float(dev @ dev)
    return np.array([float(dev[k:] @ dev[:-k]) / denom for k in range(1, nlags + 1)])


def mcleod_li(resid, lag: int) -> TestOutcome:
    """Ljung-Box portmanteau on squared residuals, chi-square(lag)."""
    _check_lag(lag)
    e = _values(resid)
    n = e.shape[0]
    if n <= 3 * lag:
        raise InsufficientDataError(f"McLeod-Li lag {lag} needs more than {3 * lag} residuals")
    rho = squared_acf(e, lag)
    k = np.arange(1, lag + 1)
    q = n * (n + 2) * float(np.sum(rho**2 / (n - k)))
    return TestOutcome.from_p_value("McLeod-Li", q, NullDistribution.chi2(lag),
                                    chi2_sf(q, lag), lag=lag)


def tsay(resid, lag: int) -> TestOutcome:
    """Tsay's F test for quadratic serial dependence.

    Stage one regresses ``x_t`` on ``1, x_{t-1}, ..., x_{t-lag}``; stage two
    removes the same regressors from every cross product ``x_{t-i} x_{t-j}``
    (``i <= j``); stage three regresses the stage-one residuals on those
    ``M = lag (lag + 1) / 2`` adjusted products. Collinear products are
    dropped by pivoted QR and ``M`` is reduced accordingly
    (``details["m_dropped"]``).
    """
    _check_lag(lag)
    x = _values(resid)
    n = x.shape[0]
    m_full = lag * (lag + 1) // 2
    if n <= lag + m_full + 10:
        raise InsufficientDataError(
            f"Tsay lag {lag} needs more than {lag + m_full + 10} observations")
    y = x[lag:]
    lags = lag_matrix(x, lag)
    X = np.column_stack([np.ones(y.shape[0]), lags])
    stage1 = ols(X, y)
    ii, jj = np.triu_indices(lag)
    prods = lags[:, ii] * lags[:, jj]
    # project the products off the AR regressors with the stage-one factor
    q, _ = np.linalg.qr(X)
    adj = prods - q @ (q.T @ prods)
    keep = independent_columns(adj)
    m = keep.shape[0]
    if m == 0:
        raise DegenerateSeriesError("cross products are collinear with the AR regressors")
    adj = adj[:, keep]
    qa, ra = np.linalg.qr(adj)
    fitted = qa @ (qa.T @ stage1.resid)
    rss_r = stage1.rss
    eps = stage1.resid - fitted
    rss_u = float(eps @ eps)
    df2 = y.shape[0] - lag - m - 1
    if rss_u <= 0.0:
        stat = math.inf
        p = 0.0
    else:
        stat = ((rss_r - rss_u) / m) / (rss_u / df2)
        p = f_sf(stat, m, df2)
    return TestOutcome.from_p_value("Tsay", stat, NullDistribution.f(m, df2), p,
                                    lag=lag, m=m, m_dropped=m_full - m)


def arch_lm(resid, lag: int) -> TestOutcome:
    """Engle's LM test: ``(n - lag) R^2`` from regressing ``e_t^2`` on its lags."""
    _check_lag(lag)
    e = _values(resid)
    n = e.shape[0]
    if n <= 2 * lag + 10:
        raise InsufficientDataError(f"ARCH-LM lag {lag} needs more than {2 * lag + 10} residuals")
    sq = _squares(e)
    y = sq[lag:]
    X = np.column_stack([np.ones(n - lag), lag_matrix(sq, lag)])
    res = ols(X, y)
    dev = y - y.mean()
    r2 = 1.0 - res.rss / float(dev @ dev)
    stat = (n - lag) * r2
    return TestOutcome.from_p_value("ARCH-LM", stat, NullDistribution.chi2(lag),
                                    chi2_sf(stat, lag), lag=lag, r_squared=r2)


@dataclass(frozen=True)
class BDSComponents:
    """Intermediate quantities of the BDS statistic (exposed for checking)."""

    c1: float  # C_1 over the full sample
    c1_m: float  # C_1 over the N_m points matched with the m-histories
    cm: float
    k: float
    variance: float
    n_histories: int


def bds_components(x, m: int, eps: float) -> BDSComponents:
    """Correlation integrals, the triple moment ``K`` and the variance.

    With ``I(s, t) = 1(|x_s - x_t| <= eps)``:

    * ``C_k`` is the fraction of pairs ``s < t`` among the ``N_k = n - k + 1``
      k-histories with ``prod_j I(s + j, t + j) = 1``;
    * ``C`` and ``K`` are the U-statistic estimates over all ``n`` points,
      ``K`` being the fraction of ordered distinct triples with
      ``I(t, s) I(t, r) = 1``;
    * the ``C_1`` paired with ``C_m`` in the numerator uses the last ``N_m``
      points, the convention of Kanzler (1999).
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    if m < 2:
        raise ValueError("embedding dimension must be at least 2")
    if not eps > 0:
        raise ValueError("eps must be positive")
    if m >= n - 1:
        raise InsufficientDataError("embedding dimension too large for the series")
    close = np.abs(x[:, None] - x[None, :]) <= eps
    np.fill_diagonal(close, False)
    deg = close.sum(axis=1).astype(np.float64)
    pairs = float(deg.sum())
    c1 = pairs / (n * (n - 1.0))
    if c1 <= 0.0 or c1 >= 1.0:
        raise DegenerateSeriesError("degenerate correlation integral")
    k = float(np.sum(deg * deg - deg)) / (n * (n - 1.0) * (n - 2.0))

    nm = n - m + 1
    joint = close[:nm, :nm].copy()
    for j in range(1, m):
        joint &= close[j:j + nm, j:j + nm]
    cm = float(joint.sum()) / (nm * (nm - 1.0))
    tail = close[m - 1:, m - 1:]
    c1_m = float(tail.sum()) / (nm * (nm - 1.0))

    s = sum(k ** (m - j) * c1 ** (2 * j) for j in range(1, m))
    var = 4.0 * (k**m + 2.0 * s + (m - 1) ** 2 * c1 ** (2 * m)
                 - m**2 * k * c1 ** (2 * m - 2))
    return BDSComponents(c1, c1_m, cm, k, var, nm)


def bds(resid, m: int, eps: float) -> TestOutcome:
    """BDS test of i.i.d.-ness at embedding dimension ``m`` and distance ``eps``.

    ``W = sqrt(N_m) (C_m - C_1^m) / sigma_m`` is referred to the standard
    normal (two-sided). ``eps`` is an absolute distance; the battery passes
    multiples of the sample standard deviation.
    """
    x = _values(resid)
    if x.shape[0] < 200:
        raise InsufficientDataError("BDS needs at least 200 observations")
    comp = bds_components(x, m, eps)
    if not comp.variance > 0.0:
        raise DegenerateSeriesError("degenerate correlation integral: zero BDS variance")
    w = math.sqrt(comp.n_histories) * (comp.cm - comp.c1_m**m) / math.sqrt(comp.variance)
    return TestOutcome.from_p_value("BDS", w, NullDistribution.normal(), normal_two_sided(w),
                                    m=m, eps=eps, c1=comp.c1, cm=comp.cm, k=comp.k)


@dataclass(frozen=True)
class BatteryConfig:
    """Lags and BDS settings for :func:`run_battery`.

    ``bds_eps_multiples`` scale the sample standard deviation of the
    residuals. By default dimension ``bds_dims[i]`` is paired with
    ``bds_eps_multiples[i]``; ``bds_full_grid=True`` runs every combination.
    """

    lags: tuple[int, ...] = (5, 15, 20)
    bds_dims: tuple[int, ...] = (2, 3, 4)
    bds_eps_multiples: tuple[float, ...] = (0.5, 1.0, 1.5)
    alpha: float = 0.05
    bds_full_grid: bool = False

    def __post_init__(self):
        object.__setattr__(self, "lags", tuple(sorted(set(int(l) for l in self.lags))))
        object.__setattr__(self, "bds_dims", tuple(int(m) for m in self.bds_dims))
        object.__setattr__(self, "bds_eps_multiples",
                           tuple(float(e) for e in self.bds_eps_multiples))
        if not self.lags or min(self.lags) < 1:
            raise ValueError("lags must be positive integers")
        if any(m < 2 for m in self.bds_dims):
            raise ValueError("BDS embedding dimensions must be at least 2")
        if any(not e > 0 for e in self.bds_eps_multiples):
            raise ValueError("BDS eps multiples must be positive")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if not self.bds_full_grid and len(self.bds_dims) != len(self.bds_eps_multiples):
            raise ValueError("paired BDS settings need as many eps multiples as dimensions")

    def bds_settings(self) -> list[tuple[int, float]]:
        if self.bds_full_grid:
            return [(m, e) for m in self.bds_dims for e in self.bds_eps_multiples]
        return list(zip(self.bds_dims, self.bds_eps_multiples))


@dataclass(frozen=True)
class BatteryCell:
    test: str
    setting: str
    outcome: Optional[TestOutcome] = None
    error: Optional[str] = None

    @property
    def p_value(self) -> Optional[float]:
        return None if self.outcome is None else self.outcome.p_value

    def rejects(self, alpha: float) -> Optional[bool]:
        return None if self.outcome is None else self.outcome.rejects(alpha)

    def to_dict(self) -> dict:
        return {
            "test": self.test,
            "setting": self.setting,
            "outcome": None if self.outcome is None else self.outcome.to_dict(),
            "error": self.error,
        }


def _cell(test, setting, func, *args) -> BatteryCell:
    try:
        return BatteryCell(test, setting, outcome=func(*args))
    except (EpochScanError, ValueError, np.linalg.LinAlgError) as exc:
        return BatteryCell(test, setting, error=str(exc))


def run_battery(resid, config: BatteryConfig = BatteryConfig()) -> list[BatteryCell]:
    """McLeod-Li, Tsay and ARCH-LM at each lag, then BDS at each setting."""
    x = _values(resid)
    cells = []
    for name, func in (("McLeod-Li", mcleod_li), ("Tsay", tsay), ("ARCH-LM", arch_lm)):
        for lag in config.lags:
            cells.append(_cell(name, f"lag={lag}", func, x, lag))
    s = float(np.std(x, ddof=1)) if x.shape[0] > 1 else 0.0
    for m, mult in config.bds_settings():
        cells.append(_cell("BDS", f"m={m},eps={mult:g}s", bds, x, m, mult * s))
    return cells
