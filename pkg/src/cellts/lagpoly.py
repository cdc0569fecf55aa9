"""Lag polynomials in the backshift operator and their power-series ratios."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

#: |root| - 1 below this counts as on the unit circle (unstable).
STABILITY_TOL = 1e-9


@dataclass(frozen=True)
class LagPolynomial:
    """``c_0 + c_1 B + ... + c_d B^d``.

    Trailing zero coefficients are stripped so that ``degree`` is exact.
    """

    coeffs: tuple[float, ...]

    def __post_init__(self):
        c = [float(x) for x in self.coeffs]
        if not c:
            raise ValueError("a lag polynomial needs at least one coefficient")
        while len(c) > 1 and c[-1] == 0.0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def ar(cls, phi: Sequence[float]) -> "LagPolynomial":
        """``1 - phi_1 B - ... - phi_p B^p``."""
        return cls((1.0, *(-float(x) for x in phi)))

    @classmethod
    def ma(cls, theta: Sequence[float]) -> "LagPolynomial":
        """``1 + theta_1 B + ... + theta_q B^q``."""
        return cls((1.0, *(float(x) for x in theta)))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def to_array(self) -> np.ndarray:
        return np.asarray(self.coeffs, dtype=float)

    def __len__(self):
        return len(self.coeffs)


@dataclass(frozen=True)
class SeriesWeights:
    """Truncated power series ``w_0 + w_1 B + ... + w_K B^K``."""

    weights: np.ndarray

    @property
    def order(self) -> int:
        return len(self.weights) - 1


def _as_poly(p) -> LagPolynomial:
    return p if isinstance(p, LagPolynomial) else LagPolynomial(tuple(np.atleast_1d(p)))


def divide(numerator, denominator, order: int) -> SeriesWeights:
    """First ``order + 1`` coefficients of ``numerator / denominator``.

    Uses ``w_k = num_k - sum_{j=1}^{min(k, deg)} den_j w_{k-j}``, which needs
    a denominator normalised to constant term 1.

    Examples
    --------
    >>> divide(LagPolynomial((1.0,)), LagPolynomial((1.0, -0.5)), 3).weights
    array([1.   , 0.5  , 0.25 , 0.125])
    """
    num = _as_poly(numerator).to_array()
    den = _as_poly(denominator).to_array()
    if order < 0:
        raise ValueError(f"order must be non-negative, got {order}")
    if den[0] != 1.0:
        raise ValueError(
            f"denominator must have constant term 1, got {den[0]!r}"
        )
    w = np.zeros(order + 1)
    dd = len(den) - 1
    for k in range(order + 1):
        acc = num[k] if k < len(num) else 0.0
        for j in range(1, min(k, dd) + 1):
            acc -= den[j] * w[k - j]
        w[k] = acc
    return SeriesWeights(w)


def convolve(a, b, order: int | None = None) -> np.ndarray:
    """Coefficients of the product of two series, optionally truncated."""
    a = a.weights if isinstance(a, SeriesWeights) else _as_poly(a).to_array()
    b = b.weights if isinstance(b, SeriesWeights) else _as_poly(b).to_array()
    out = np.convolve(a, b)
    if order is not None:
        out = np.pad(out, (0, max(0, order + 1 - len(out))))[: order + 1]
    return out


def _reciprocal_eigenvalues(c: np.ndarray) -> np.ndarray:
    """Roots of ``c_0 x^d + ... + c_d`` (the reciprocal polynomial).

    These are the inverses of the roots of ``c``; working with them avoids
    dividing by a tiny leading coefficient ``c_d``.
    """
    d = len(c) - 1
    comp = np.zeros((d, d))
    comp[0, :] = -c[1:] / c[0]
    comp[1:, :-1] = np.eye(d - 1)
    return np.linalg.eigvals(comp)


def roots(poly) -> np.ndarray:
    """Complex roots of ``c_0 + c_1 x + ... + c_d x^d`` (needs ``c_0 != 0``)."""
    c = _as_poly(poly).to_array()
    if len(c) == 1:
        return np.empty(0, dtype=complex)
    if c[0] == 0:
        raise ValueError("polynomial has a root at zero; constant term must be non-zero")
    with np.errstate(divide="ignore"):
        return 1.0 / _reciprocal_eigenvalues(c)


def is_stable(poly) -> bool:
    """True iff every root lies strictly outside the unit circle.

    Roots within ``STABILITY_TOL`` of the circle are treated as unstable.
    """
    c = _as_poly(poly).to_array()
    if len(c) == 1:
        return True
    if c[0] == 0:
        return False
    lam = np.abs(_reciprocal_eigenvalues(c))
    return bool(np.all(lam * (1.0 + STABILITY_TOL) < 1.0))
