"""Autoregressive pre-whitening.

AR(p) models with intercept are fitted by least squares (Householder QR) and
the order is chosen by the Schwarz criterion
``BIC = n_eff * ln(sigma2) + (p + 1) * ln(n_eff)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._numeric import lag_matrix, ols, require_variation
from .errors import InsufficientDataError
from .ingest import ReturnSeries

DEFAULT_MAX_ORDER = 10

# Residual variance at or below this fraction of the mean square of the
# response is indistinguishable from an exact fit in double precision.
_PERFECT_FIT_RTOL = 1e-26


@dataclass(frozen=True, eq=False)
class ARFit:
    order: int
    intercept: float
    coefficients: np.ndarray
    residuals: np.ndarray
    sigma2: float
    bic: float
    n_effective: int

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "intercept": self.intercept,
            "coefficients": [float(c) for c in self.coefficients],
            "sigma2": self.sigma2,
            "bic": self.bic if math.isfinite(self.bic) else None,
        }


@dataclass(frozen=True, eq=False)
class ResidualSeries:
    """Pre-whitened residuals aligned with the dates of the returns they came from."""

    values: np.ndarray
    source_order: int
    source_dates: Optional[np.ndarray] = None
    instrument_id: str = "series"
    fit: Optional[ARFit] = None

    def __len__(self) -> int:
        return self.values.shape[0]


def fit_ar(series, p: int) -> ARFit:
    """Least-squares AR(p) fit with intercept.

    The residual for ``t = p, ..., n-1`` (0-based) is
    ``x_t - c - sum_i phi_i x_{t-i}``.
    """
    x = np.asarray(series, dtype=float)
    n = x.shape[0]
    if p < 0:
        raise ValueError("order must be nonnegative")
    if n <= p + 2:
        raise InsufficientDataError(f"series of length {n} too short for AR({p})")
    y = x[p:]
    X = np.column_stack([np.ones(n - p), lag_matrix(x, p)])
    res = ols(X, y)
    n_eff = n - p
    sigma2 = res.rss / n_eff
    if sigma2 <= _PERFECT_FIT_RTOL * float(np.mean(y * y)):
        sigma2 = 0.0
    fit = ARFit(
        order=p,
        intercept=float(res.coef[0]),
        coefficients=res.coef[1:].copy(),
        residuals=res.resid,
        sigma2=sigma2,
        bic=0.0,
        n_effective=n_eff,
    )
    object.__setattr__(fit, "bic", bic(fit))
    return fit


def bic(fit: ARFit) -> float:
    """Schwarz criterion with ``k = p + 1`` parameters.

    An exact fit (``sigma2 == 0``) returns ``-inf``; such a model always wins
    order selection.
    """
    k = fit.order + 1
    if fit.sigma2 == 0.0:
        return -math.inf
    return fit.n_effective * math.log(fit.sigma2) + k * math.log(fit.n_effective)


def select_order(series, p_max: int = DEFAULT_MAX_ORDER) -> ARFit:
    """BIC-minimizing AR fit over orders ``0..p_max``.

    Every candidate is fitted on the same sample ``t = p_max, ..., n-1`` so the
    criteria are comparable. The returned fit is that common-sample fit; ties
    go to the smaller order.
    """
    x = np.asarray(series, dtype=float)
    if p_max < 0:
        raise ValueError("p_max must be nonnegative")
    if x.shape[0] <= p_max + 2:
        raise InsufficientDataError(
            f"series of length {x.shape[0]} too short for p_max={p_max}")
    best = None
    for p in range(p_max + 1):
        fit = fit_ar(x[p_max - p:], p)
        if best is None or fit.bic < best.bic:
            best = fit
    return best


def prewhiten(returns, p_max: int = DEFAULT_MAX_ORDER) -> ResidualSeries:
    """Residuals of the BIC-selected AR model, refitted on the full sample."""
    if isinstance(returns, ReturnSeries):
        x, dates, name = returns.values, returns.dates, returns.instrument_id
    else:
        x, dates, name = np.asarray(returns, dtype=float), None, "series"
    order = select_order(x, p_max).order
    fit = fit_ar(x, order)
    return ResidualSeries(
        values=fit.residuals,
        source_order=order,
        source_dates=None if dates is None else dates[order:],
        instrument_id=name,
        fit=fit,
    )


def standardize(values) -> np.ndarray:
    """Center and scale to mean 0 and population standard deviation 1."""
    x = np.asarray(values, dtype=float)
    require_variation(x, "cannot standardize a constant series")
    return (x - x.mean()) / x.std()
