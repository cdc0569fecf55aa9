"""Tukey-biweight S-estimation of multivariate location and scatter.

``s_estimator`` handles complete data. ``gse`` accepts masked cells: each row
enters through the Mahalanobis distance of its observed coordinates, tuned
with the consistency constant for that many dimensions, and the scatter update
completes the missing block by its conditional mean and covariance under the
current fit. Contributions are rescaled per dimension so that the update is
consistent at the Gaussian model for any mix of missingness patterns; with no
masked cells it is the same fixed point iteration as ``s_estimator``.

Both iterations start deterministically from the coordinatewise median and a
pairwise (Gnanadesikan-Kettenring) MAD covariance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize, stats

from .classic import ArFit, EstimationError
from .embedding import EmbeddedMatrix

MAX_ITER = 200
TOL = 1e-8
DEFAULT_B = 0.5
EIG_FLOOR = 1e-6


@dataclass
class LocationScatter:
    location: np.ndarray
    scatter: np.ndarray
    scale: float
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        self.location = np.asarray(self.location, dtype=float)
        S = np.asarray(self.scatter, dtype=float)
        if not np.allclose(S, S.T, rtol=0, atol=1e-10 * max(1.0, np.abs(S).max())):
            raise ValueError("scatter matrix is not symmetric")
        self.scatter = (S + S.T) / 2
        if np.linalg.eigvalsh(self.scatter)[0] <= 0:
            raise ValueError("scatter matrix is not positive definite")


def tukey_rho(u, c: float):
    """Biweight loss scaled to 1: ``1 - (1 - (u/c)^2)^3`` inside ``[-c, c]``."""
    if not c > 0:
        raise ValueError(f"tuning constant must be positive, got {c}")
    u = np.asarray(u, dtype=float)
    v = np.minimum((u / c) ** 2, 1.0)
    return 1.0 - (1.0 - v) ** 3


def tukey_weight(u, c: float):
    """``rho'(u) / u = (6 / c^2) (1 - (u/c)^2)^2``, zero for ``|u| >= c``."""
    if not c > 0:
        raise ValueError(f"tuning constant must be positive, got {c}")
    u = np.asarray(u, dtype=float)
    v = (u / c) ** 2
    return np.where(v < 1.0, 6.0 / c**2 * (1.0 - v) ** 2, 0.0)


def _chi_expectation(fn, dim: int, c: float) -> float:
    """``E[fn(R)]`` over ``R ~ chi(dim)``, split at ``c`` where ``rho`` kinks."""
    pdf = stats.chi(dim).pdf
    inner, _ = integrate.quad(lambda r: fn(r) * pdf(r), 0.0, c, epsabs=1e-13, epsrel=1e-12, limit=200)
    outer, _ = integrate.quad(lambda r: fn(r) * pdf(r), c, np.inf, epsabs=1e-13, epsrel=1e-12, limit=200)
    return inner + outer


def expected_rho(dim: int, c: float) -> float:
    return _chi_expectation(lambda r: tukey_rho(r, c), dim, c)


@lru_cache(maxsize=None)
def consistency_constant(dim: int, b: float = DEFAULT_B) -> float:
    """Tuning ``c`` with ``E[rho_c(||Z||)] = b`` for ``Z ~ N(0, I_dim)``."""
    if dim < 1:
        raise ValueError(f"dim must be at least 1, got {dim}")
    if not 0 < b < 1:
        raise ValueError(f"b must lie in (0, 1), got {b}")
    lo, hi = 1e-3, 1.0
    # E[rho_c] decreases in c; widen until the root is bracketed
    for _ in range(200):
        if expected_rho(dim, hi) < b:
            break
        hi *= 2
    else:
        raise EstimationError(f"no consistency constant for dim={dim}, b={b}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if expected_rho(dim, mid) > b:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-10:
            return 0.5 * (lo + hi)
    raise EstimationError(f"bisection for dim={dim}, b={b} did not converge")


@lru_cache(maxsize=None)
def _pattern_factors(dim: int, b: float) -> tuple[float, float, float]:
    """``(c, E[W U^2] / dim, E[W])`` for ``U ~ chi(dim)``."""
    c = consistency_constant(dim, b)
    a = _chi_expectation(lambda r: tukey_weight(r, c) * r * r, dim, c) / dim
    e = _chi_expectation(lambda r: tukey_weight(r, c), dim, c)
    return c, a, e


def m_scale(d: np.ndarray, c, b: float = DEFAULT_B) -> float:
    """Scale ``s`` solving ``mean(rho_c(d / s)) = b``; ``c`` may vary per entry."""
    d = np.asarray(d, dtype=float)
    c = np.broadcast_to(np.asarray(c, dtype=float), d.shape)
    if np.mean(d > 0) <= b:
        raise EstimationError("too many zero distances for the M-scale")

    def g(s):
        return np.mean(tukey_rho(d / (s * c), 1.0)) - b

    hi = 2.0 * np.sqrt(3.0 * np.mean((d / c) ** 2) / b)
    lo = hi
    while g(lo) <= 0:
        lo /= 2.0
    return float(optimize.brentq(g, lo, hi, xtol=1e-15, rtol=1e-14, maxiter=500))


def _mad(x: np.ndarray) -> float:
    return 1.4826 * float(np.median(np.abs(x - np.median(x))))


def _floor_eigen(S: np.ndarray) -> np.ndarray:
    S = (S + S.T) / 2
    w, V = np.linalg.eigh(S)
    w = np.maximum(w, EIG_FLOOR * max(np.trace(S), np.finfo(float).tiny))
    return (V * w) @ V.T


def initial_estimate(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Coordinatewise median and pairwise MAD covariance; NaN cells ignored."""
    n, k = X.shape
    obs = ~np.isnan(X)
    loc = np.array([np.median(X[obs[:, j], j]) for j in range(k)])
    scl = np.array([_mad(X[obs[:, j], j]) for j in range(k)])
    if np.any(scl <= 0):
        raise EstimationError("a column has zero MAD")
    Z = (X - loc) / scl
    S = np.diag(scl**2)
    for j in range(k):
        for l in range(j + 1, k):
            both = obs[:, j] & obs[:, l]
            if both.sum() < 3:
                raise EstimationError(f"columns {j} and {l} are never jointly observed")
            sp = _mad(Z[both, j] + Z[both, l]) ** 2
            sm = _mad(Z[both, j] - Z[both, l]) ** 2
            r = (sp - sm) / (sp + sm) if sp + sm > 0 else 0.0
            S[j, l] = S[l, j] = r * scl[j] * scl[l]
    return loc, _floor_eigen(S)


def _unit_det(S: np.ndarray) -> np.ndarray:
    sign, logdet = np.linalg.slogdet(S)
    if sign <= 0:
        raise EstimationError("weighted scatter matrix is singular")
    return S / np.exp(logdet / S.shape[0])


def _as_complete(data) -> np.ndarray:
    if isinstance(data, EmbeddedMatrix):
        if data.missing_mask.any():
            raise ValueError("s_estimator needs complete rows; use gse for masked data")
        return data.rows.astype(float)
    X = np.asarray(data, dtype=float)
    if np.isnan(X).any():
        raise ValueError("s_estimator needs complete rows; use gse for masked data")
    return X


def s_estimator(data, b: float = DEFAULT_B, max_iter: int = MAX_ITER, tol: float = TOL) -> LocationScatter:
    """Biweight S-estimate of location and scatter for complete rows.

    Returns ``(mu, s^2 Gamma)`` with ``det(Gamma) = 1`` and ``s`` the M-scale
    of the Mahalanobis distances.
    """
    X = _as_complete(data)
    n, k = X.shape
    if n < 2 * (k + 1):
        raise EstimationError(f"{n} rows are too few for dimension {k}")
    c = consistency_constant(k, b)
    mu, S = initial_estimate(X)
    G = _unit_det(S)
    s = None
    for it in range(1, max_iter + 1):
        R = X - mu
        d = np.sqrt(np.einsum("ij,ij->i", R @ np.linalg.inv(G), R))
        s_new = m_scale(d, c, b)
        w = tukey_weight(d / s_new, c)
        if w.sum() <= 0:
            raise EstimationError("all weights vanished")
        mu_new = w @ X / w.sum()
        R = X - mu_new
        G = _unit_det((R * w[:, None]).T @ R / w.sum())
        done = s is not None and abs(s_new / s - 1) < tol and np.max(np.abs(mu_new - mu)) < tol
        mu, s = mu_new, s_new
        if done:
            break
    else:
        raise EstimationError(f"S-estimator did not converge in {max_iter} iterations")
    # scale consistent with the final shape
    R = X - mu
    d = np.sqrt(np.einsum("ij,ij->i", R @ np.linalg.inv(G), R))
    s = m_scale(d, c, b)
    return LocationScatter(mu, s * s * G, s, {"iterations": it, "rows": n})


def _patterns(obs: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    """Group rows by observed-column pattern: ``[(observed_cols, row_index)]``."""
    keys, inverse = np.unique(obs, axis=0, return_inverse=True)
    inverse = np.asarray(inverse).reshape(-1)
    return [(keys[g], np.flatnonzero(inverse == g)) for g in range(len(keys))]


def gse(data, b: float = DEFAULT_B, max_iter: int = MAX_ITER, tol: float = TOL) -> LocationScatter:
    """Generalized S-estimate for rows with masked (missing) cells."""
    if isinstance(data, EmbeddedMatrix):
        X = data.masked_values()
    else:
        X = np.asarray(data, dtype=float)
    n, k = X.shape
    obs = ~np.isnan(X)
    if not obs.any(axis=1).all():
        raise ValueError("every row needs at least one observed cell")
    if np.any(obs.sum(axis=0) < k + 1):
        raise EstimationError("a column has too few observed cells")
    groups = _patterns(obs)
    consts = {}
    for cols, _ in groups:
        dim = int(cols.sum())
        consts[dim] = _pattern_factors(dim, b)
    c_row = np.empty(n)
    for cols, idx in groups:
        c_row[idx] = consts[int(cols.sum())][0]
    Xz = np.where(obs, X, 0.0)

    mu, S = initial_estimate(X)
    G = _unit_det(S)

    def distances(mu, G):
        d = np.empty(n)
        for cols, idx in groups:
            R = Xz[np.ix_(idx, cols)] - mu[cols]
            Gi = np.linalg.inv(G[np.ix_(cols, cols)])
            d[idx] = np.sqrt(np.einsum("ij,ij->i", R @ Gi, R))
        return d

    s = None
    for it in range(1, max_iter + 1):
        d = distances(mu, G)
        s_new = m_scale(d, c_row, b)
        w = tukey_weight(d / (s_new * c_row), 1.0) / c_row**2
        if w.sum() <= 0:
            raise EstimationError("all weights vanished")
        Sig = s_new * s_new * G
        Xhat = Xz.copy()
        C = np.zeros((k, k))
        for cols, idx in groups:
            mis = ~cols
            if not mis.any():
                continue
            Soo = Sig[np.ix_(cols, cols)]
            Smo = Sig[np.ix_(mis, cols)]
            B = np.linalg.solve(Soo, Smo.T).T
            Xhat[np.ix_(idx, mis)] = mu[mis] + (Xz[np.ix_(idx, cols)] - mu[cols]) @ B.T
            cond = Sig[np.ix_(mis, mis)] - B @ Smo.T
            e = consts[int(cols.sum())][2]
            C[np.ix_(mis, mis)] += (w[idx].sum() / e) * cond
        mu_new = w @ Xhat / w.sum()
        R = Xhat - mu_new
        a_row = np.empty(n)
        for cols, idx in groups:
            a_row[idx] = consts[int(cols.sum())][1]
        wa = w / a_row
        V = (R * wa[:, None]).T @ R + C
        G = _unit_det(V)
        done = s is not None and abs(s_new / s - 1) < tol and np.max(np.abs(mu_new - mu)) < tol
        mu, s = mu_new, s_new
        if done:
            break
    else:
        raise EstimationError(f"GSE did not converge in {max_iter} iterations")
    s = m_scale(distances(mu, G), c_row, b)
    return LocationScatter(
        mu, s * s * G, s,
        {"iterations": it, "rows": n, "masked_cells": int((~obs).sum())},
    )


def scatter_to_ar(est: LocationScatter, p: int, method: str = "scatter") -> ArFit:
    """AR(p) coefficients from the scatter of ``(y_t, y_{t-1}, ..., y_{t-p})``.

    The first coordinate is the response: ``phi = S_xx^{-1} S_xy`` and
    ``sigma^2 = S_yy - S_xy' phi``.
    """
    S = np.asarray(getattr(est, "scatter", est), dtype=float)
    if S.shape != (p + 1, p + 1):
        raise ValueError(f"scatter of shape {S.shape} does not match p={p}")
    Sxx = S[1:, 1:]
    Sxy = S[1:, 0]
    try:
        phi = np.linalg.solve(Sxx, Sxy) if p else np.empty(0)
    except np.linalg.LinAlgError as exc:
        raise EstimationError("singular lag block in scatter matrix") from exc
    s2 = S[0, 0] - Sxy @ phi
    if not s2 > 0:
        raise EstimationError("non-positive innovation variance from scatter")
    return ArFit(phi, float(np.sqrt(s2)), method)
