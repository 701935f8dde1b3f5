"""Least squares and the augmented Dickey-Fuller unit-root test.

Only the constant-no-trend flavour of the test is implemented: the series
tested here are first-differenced index returns, which carry no trend.

The p-value uses MacKinnon's (1994) asymptotic response surface and the
critical values use MacKinnon's (2010) finite-sample response surface,
both for the constant-only case with a single I(1) series.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateSeries, RankDeficient, TooFewObservations

SIGNIFICANCE_LEVELS = (0.01, 0.05, 0.10)
LEVEL_KEYS = ("1%", "5%", "10%")

# MacKinnon (1994), Table 3 and 4, regression "c", N = 1.
_TAU_MAX = 2.74
_TAU_MIN = -18.83
_TAU_STAR = -1.61
_TAU_SMALLP = (2.1659, 1.4412, 0.038269)
_TAU_LARGEP = (1.7339, 0.93202, -0.12745, -0.010368)

# MacKinnon (2010), regression "c", N = 1: rows are 1%, 5%, 10%;
# crit(n) = b0 + b1/n + b2/n^2 + b3/n^3.
_TAU_CRIT = (
    (-3.43035, -6.5393, -16.786, -79.433),
    (-2.86154, -2.8903, -4.234, -40.040),
    (-2.56677, -1.5384, -2.809, 0.0),
)


@dataclass(frozen=True)
class OlsFit:
    coefficients: np.ndarray
    standard_errors: np.ndarray
    residuals: np.ndarray
    rss: float
    n_obs: int
    n_params: int

    @property
    def t_values(self) -> np.ndarray:
        return self.coefficients / self.standard_errors

    @property
    def aic(self) -> float:
        """Gaussian-likelihood AIC, ``-2 llf + 2 k``."""
        n = self.n_obs
        llf = -0.5 * n * (math.log(2 * math.pi) + math.log(self.rss / n) + 1.0)
        return -2.0 * llf + 2.0 * self.n_params


@dataclass(frozen=True)
class AdfResult:
    t_stat: float
    p_value: float
    lags_used: int
    n_obs: int
    critical_values: dict
    reject_at: dict

    def as_dict(self) -> dict:
        return {
            "t_stat": self.t_stat,
            "p_value": self.p_value,
            "lags_used": self.lags_used,
            "n_obs": self.n_obs,
            "critical_values": dict(self.critical_values),
            "reject_at": dict(self.reject_at),
        }


def ols(design, response) -> OlsFit:
    """Least squares through a Householder QR factorisation.

    Standard errors use the unbiased residual variance ``rss / (n - k)``.
    """
    X = np.asarray(design, dtype=float)
    y = np.asarray(response, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, k = X.shape
    if y.shape != (n,):
        raise ValueError(f"response has shape {y.shape}, expected ({n},)")
    if n <= k:
        raise TooFewObservations(f"{n} observations for {k} parameters")
    q, r = np.linalg.qr(X, mode="reduced")
    diag = np.abs(np.diag(r))
    col_norms = np.linalg.norm(X, axis=0)
    tol = max(n, k) * np.finfo(float).eps
    if np.any(diag <= tol * np.maximum(col_norms, np.finfo(float).tiny)):
        raise RankDeficient("design matrix does not have full column rank")
    beta = _solve_upper(r, q.T @ y)
    resid = y - X @ beta
    rss = float(resid @ resid)
    sigma2 = rss / (n - k)
    r_inv = _solve_upper(r, np.eye(k))
    se = np.sqrt(sigma2 * np.sum(r_inv * r_inv, axis=1))
    return OlsFit(beta, se, resid, rss, n, k)


def _solve_upper(r: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Back substitution for an upper-triangular system."""
    k = r.shape[0]
    x = np.array(b, dtype=float, copy=True)
    for i in range(k - 1, -1, -1):
        if i + 1 < k:
            x[i] -= r[i, i + 1:] @ x[i + 1:]
        x[i] /= r[i, i]
    return x


def adf_max_lag(n_obs: int) -> int:
    """Schwert's rule ``floor(12 * (n / 100) ** 0.25)``."""
    if n_obs < 20:
        raise TooFewObservations(f"lag rule needs at least 20 observations, got {n_obs}")
    return int(math.floor(12.0 * (n_obs / 100.0) ** 0.25))


def _norm_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def _poly(coefs: Sequence[float], x: float) -> float:
    acc = 0.0
    for c in reversed(coefs):
        acc = acc * x + c
    return acc


def mackinnon_pvalue(t_stat: float, n_obs: Optional[int] = None) -> float:
    """Approximate p-value of a constant-only Dickey-Fuller tau statistic.

    The approximation is asymptotic; ``n_obs`` is accepted for interface
    symmetry with :func:`mackinnon_critical_values` and does not change the
    result.
    """
    if not math.isfinite(t_stat):
        raise ValueError(f"t_stat must be finite, got {t_stat}")
    if t_stat > _TAU_MAX:
        return 1.0
    if t_stat < _TAU_MIN:
        return 0.0
    coefs = _TAU_SMALLP if t_stat <= _TAU_STAR else _TAU_LARGEP
    return min(1.0, max(0.0, _norm_cdf(_poly(coefs, t_stat))))


def mackinnon_critical_values(n_obs: Optional[int] = None) -> dict:
    """1%, 5% and 10% critical values at sample size ``n_obs`` (asymptotic if None)."""
    out = {}
    for key, coefs in zip(LEVEL_KEYS, _TAU_CRIT):
        out[key] = coefs[0] if n_obs is None else _poly(coefs, 1.0 / n_obs)
    return out


def _adf_design(y: np.ndarray, lags: int, trim: int):
    """Response and regressors ``[const, y_{t-1}, dy_{t-1} .. dy_{t-lags}]``.

    ``trim`` leading differences are dropped so that designs for different
    lag orders can share one estimation sample.
    """
    dy = np.diff(y)
    n = dy.shape[0] - trim
    response = dy[trim:]
    cols = [np.ones(n), y[trim:trim + n]]
    for j in range(1, lags + 1):
        cols.append(dy[trim - j:trim - j + n])
    return np.column_stack(cols), response


def adf_test(series, max_lag: Optional[int] = None) -> AdfResult:
    """Augmented Dickey-Fuller test with a constant and no trend.

    The lag order is chosen in ``[0, max_lag]`` by minimum AIC with every
    candidate fitted on the same sample (the one left after trimming
    ``max_lag`` lags). The chosen order is then refitted on all available
    observations, and ``t_stat`` is the t-ratio of the lagged level.
    """
    y = np.asarray(series, dtype=float)
    if y.ndim != 1:
        raise ValueError("series must be one-dimensional")
    if not np.all(np.isfinite(y)):
        raise ValueError("series contains non-finite values")
    if y.shape[0] < 2 or np.all(y == y[0]):
        raise DegenerateSeries("series is constant")
    n_diff = y.shape[0] - 1
    cap = n_diff // 2 - 2
    if max_lag is None:
        max_lag = min(adf_max_lag(y.shape[0]), cap)
    elif max_lag < 0 or max_lag > cap:
        raise TooFewObservations(f"max_lag must be in [0, {max(cap, 0)}] for {y.shape[0]} points")
    if max_lag < 0 or n_diff - max_lag < 20:
        raise TooFewObservations(f"{y.shape[0]} points leave too few observations for the test")

    X, resp = _adf_design(y, max_lag, max_lag)
    best_aic, best_lag = math.inf, 0
    for lag in range(max_lag + 1):
        fit = ols(X[:, :lag + 2], resp)
        if fit.rss <= 0.0:
            raise DegenerateSeries("differences are exactly explained by their own lags")
        aic = fit.aic
        if aic < best_aic:
            best_aic, best_lag = aic, lag

    X, resp = _adf_design(y, best_lag, best_lag)
    fit = ols(X, resp)
    if fit.rss <= 0.0:
        raise DegenerateSeries("differences are exactly explained by their own lags")
    t_stat = float(fit.coefficients[1] / fit.standard_errors[1])
    p_value = mackinnon_pvalue(t_stat, fit.n_obs)
    crit = mackinnon_critical_values(fit.n_obs)
    reject = {key: bool(p_value < alpha) for key, alpha in zip(LEVEL_KEYS, SIGNIFICANCE_LEVELS)}
    return AdfResult(t_stat, p_value, best_lag, fit.n_obs, crit, reject)
