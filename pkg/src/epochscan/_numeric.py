"""Least-squares and small array helpers shared by the regression-based tests."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import qr, solve_triangular

from .errors import DegenerateSeriesError, RankDeficientError

#: Columns whose pivoted-QR diagonal falls below this fraction of the largest
#: diagonal entry are treated as linearly dependent.
RANK_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class OLSResult:
    coef: np.ndarray
    resid: np.ndarray
    rss: float
    nobs: int
    r_factor: np.ndarray

    @property
    def k(self) -> int:
        return self.coef.shape[0]

    def cov_unscaled(self) -> np.ndarray:
        """Return ``(X'X)^{-1}`` from the triangular factor."""
        rinv = solve_triangular(self.r_factor, np.eye(self.k))
        return rinv @ rinv.T

    def stderr(self) -> np.ndarray:
        dof = self.nobs - self.k
        if dof <= 0:
            raise RankDeficientError("no residual degrees of freedom")
        s2 = self.rss / dof
        return np.sqrt(s2 * np.diag(self.cov_unscaled()))


def ols(X: np.ndarray, y: np.ndarray) -> OLSResult:
    """Least squares through a Householder QR factorization.

    Raises :class:`RankDeficientError` when ``X`` is numerically rank
    deficient; the check is relative to the largest diagonal of ``R``.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    nobs, k = X.shape
    if nobs < k:
        raise RankDeficientError(f"{nobs} observations for {k} regressors")
    q, r = np.linalg.qr(X)
    diag = np.abs(np.diag(r))
    if k and (diag.max() == 0.0 or diag.min() <= RANK_TOL * diag.max()):
        raise RankDeficientError("rank-deficient design")
    coef = solve_triangular(r, q.T @ y)
    resid = y - X @ coef
    return OLSResult(coef, resid, float(resid @ resid), nobs, r)


def independent_columns(X: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    """Indices of a maximal set of linearly independent columns of ``X``.

    Uses column-pivoted QR; the returned indices are sorted so the caller's
    column order is preserved.
    """
    if X.shape[1] == 0:
        return np.arange(0)
    _, r, piv = qr(X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] == 0.0:
        return np.arange(0)
    rank = int(np.sum(diag > tol * diag[0]))
    return np.sort(piv[:rank])


def lag_matrix(x: np.ndarray, nlags: int, start: int | None = None) -> np.ndarray:
    """Columns ``x_{t-1}, ..., x_{t-nlags}`` for ``t = start, ..., len(x) - 1``.

    ``start`` defaults to ``nlags`` (the first index with every lag defined).
    """
    n = x.shape[0]
    start = nlags if start is None else start
    if start < nlags:
        raise ValueError("start must be at least nlags")
    out = np.empty((n - start, nlags))
    for i in range(1, nlags + 1):
        out[:, i - 1] = x[start - i : n - i]
    return out


def is_constant(x: np.ndarray) -> bool:
    """True when the spread of ``x`` is at the level of rounding error."""
    if x.size == 0:
        return True
    scale = float(np.max(np.abs(x)))
    if scale == 0.0:
        return True
    return float(np.std(x)) <= 1e-12 * scale


def require_variation(x: np.ndarray, what: str) -> None:
    if is_constant(x):
        raise DegenerateSeriesError(f"zero variance: {what}")
