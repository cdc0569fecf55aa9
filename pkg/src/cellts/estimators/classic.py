"""Autocovariances, Yule-Walker and the Hannan-Rissanen procedure."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import toeplitz

from ..arma import as_values


class EstimationError(RuntimeError):
    """An estimator could not produce a fit (singular system, no convergence...)."""


@dataclass
class ArFit:
    phi: np.ndarray
    sigma: float
    method: str
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        self.phi = np.asarray(self.phi, dtype=float)

    @property
    def order(self) -> int:
        return self.phi.size

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "phi": [float(x) for x in self.phi],
            "sigma": float(self.sigma),
            "diagnostics": self.diagnostics,
        }


@dataclass
class ArmaFit:
    phi: np.ndarray
    theta: np.ndarray
    sigma: float
    residuals: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "method": "hr",
            "phi": [float(x) for x in self.phi],
            "theta": [float(x) for x in self.theta],
            "sigma": float(self.sigma),
            "diagnostics": self.diagnostics,
        }


def autocovariance(series, max_lag: int) -> np.ndarray:
    """Biased sample autocovariances ``gamma(0..max_lag)`` (divisor ``T``)."""
    y = as_values(series)
    T = y.size
    if not 0 <= max_lag < T:
        raise ValueError(f"max_lag must lie in 0..{T - 1}, got {max_lag}")
    yc = y - y.mean()
    return np.array([yc[k:] @ yc[: T - k] / T for k in range(max_lag + 1)])


def yule_walker_from_acov(gamma, order: int) -> tuple[np.ndarray, float]:
    """Solve ``Gamma phi = gamma_{1..order}``; returns ``(phi, sigma^2)``."""
    gamma = np.asarray(gamma, dtype=float)
    if order < 1:
        raise ValueError(f"order must be at least 1, got {order}")
    if gamma.size < order + 1:
        raise ValueError("need autocovariances up to lag `order`")
    G = toeplitz(gamma[:order])
    rhs = gamma[1 : order + 1]
    try:
        phi = np.linalg.solve(G, rhs)
    except np.linalg.LinAlgError as exc:
        raise EstimationError("singular Toeplitz autocovariance matrix") from exc
    if np.linalg.cond(G) > 1e14:
        raise EstimationError("singular Toeplitz autocovariance matrix")
    return phi, float(gamma[0] - phi @ rhs)


def yule_walker(series, order: int) -> ArFit:
    gamma = autocovariance(series, order)
    phi, s2 = yule_walker_from_acov(gamma, order)
    return ArFit(phi, math.sqrt(max(s2, 0.0)), "yw")


def default_long_order(T: int, p: int, q: int) -> int:
    return max(math.ceil(math.log(T) ** 2 / 4), 2 * max(p, q))


def hannan_rissanen(series, p: int, q: int, m: int | None = None) -> ArmaFit:
    """Three-step ARMA(p, q) fit.

    1. Yule-Walker AR(m) on the demeaned series.
    2. Residual proxies ``r_t = y_t - sum_k phi_k^(m) y_{t-k}``, ``t > m``.
    3. Least squares of ``y_t`` on ``y_{t-1..t-p}`` and ``r_{t-1..t-q}`` over
       ``t = m+q+1..T``.

    ``sigma`` is the root mean square of the step-3 residuals.
    """
    y = as_values(series)
    T = y.size
    if m is None:
        m = default_long_order(T, p, q)
    if m <= max(p, q):
        raise ValueError(f"long AR order m={m} must exceed max(p, q)={max(p, q)}")
    if T <= m + max(p, q) + 10:
        raise ValueError(f"series of length {T} too short for m={m}, p={p}, q={q}")
    y = y - y.mean()
    long_fit = yule_walker(y, m)
    # r[t] valid for 0-based t >= m
    r = np.full(T, np.nan)
    lags = np.column_stack([y[m - k : T - k] for k in range(1, m + 1)])
    r[m:] = y[m:] - lags @ long_fit.phi

    start = m + q
    cols = [y[start - k : T - k] for k in range(1, p + 1)]
    cols += [r[start - j : T - j] for j in range(1, q + 1)]
    target = y[start:]
    if cols:
        X = np.column_stack(cols)
        if np.linalg.matrix_rank(X) < X.shape[1]:
            raise EstimationError("singular Hannan-Rissanen design matrix")
        beta, *_ = np.linalg.lstsq(X, target, rcond=None)
        resid = target - X @ beta
    else:
        beta = np.empty(0)
        resid = target.copy()
    sigma = float(np.sqrt(np.mean(resid**2)))
    return ArmaFit(
        beta[:p], beta[p:], sigma, resid, {"m": m, "rows": int(target.size)}
    )
