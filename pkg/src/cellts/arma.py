"""ARMA(p, q) models: simulation and recovery of the innovation process."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.signal import lfilter

from .lagpoly import LagPolynomial, is_stable

Origin = Literal["clean", "contaminated", "residual"]

DEFAULT_BURN_IN = 500


class ModelError(ValueError):
    """Raised for non-causal or non-invertible models."""


@dataclass(frozen=True)
class ArmaModel:
    """``Phi(B) z_t = Theta(B) a_t`` with ``a_t ~ N(0, sigma^2)``."""

    phi: tuple[float, ...] = ()
    theta: tuple[float, ...] = ()
    sigma: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "phi", tuple(float(x) for x in self.phi))
        object.__setattr__(self, "theta", tuple(float(x) for x in self.theta))
        object.__setattr__(self, "sigma", float(self.sigma))

    @property
    def p(self) -> int:
        return len(self.phi)

    @property
    def q(self) -> int:
        return len(self.theta)

    @property
    def ar_poly(self) -> LagPolynomial:
        return LagPolynomial.ar(self.phi)

    @property
    def ma_poly(self) -> LagPolynomial:
        return LagPolynomial.ma(self.theta)

    def is_causal(self) -> bool:
        return is_stable(self.ar_poly)

    def is_invertible(self) -> bool:
        return is_stable(self.ma_poly)

    def validate(self) -> "ArmaModel":
        if not self.sigma > 0:
            raise ModelError(f"sigma must be positive, got {self.sigma}")
        if not self.is_causal():
            raise ModelError(f"AR polynomial {self.ar_poly.coeffs} is not stable")
        if not self.is_invertible():
            raise ModelError(f"MA polynomial {self.ma_poly.coeffs} is not invertible")
        return self

    def to_dict(self) -> dict:
        return {"phi": list(self.phi), "theta": list(self.theta), "sigma": self.sigma}

    @classmethod
    def from_dict(cls, d: dict) -> "ArmaModel":
        return cls(tuple(d.get("phi", ())), tuple(d.get("theta", ())), d.get("sigma", 1.0))


@dataclass(frozen=True)
class TimeSeries:
    values: np.ndarray
    origin: Origin = "clean"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 1:
            raise ValueError("a time series is a non-empty 1-d sequence")
        if not np.all(np.isfinite(v)):
            raise ValueError("time series values must be finite")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


def as_values(series) -> np.ndarray:
    """Plain float array from a ``TimeSeries`` or array-like."""
    if isinstance(series, TimeSeries):
        return series.values
    return np.asarray(series, dtype=float)


def simulate(
    model: ArmaModel, length: int, seed: int, burn_in: int = DEFAULT_BURN_IN
) -> TimeSeries:
    """Gaussian ARMA path of ``length`` values after discarding ``burn_in``.

    The recursion starts from zero pre-sample values; the same arguments
    always give the same series.
    """
    model.validate()
    if length < 1:
        raise ValueError(f"length must be at least 1, got {length}")
    if burn_in < 0:
        raise ValueError(f"burn_in must be non-negative, got {burn_in}")
    rng = np.random.default_rng(seed)
    a = rng.normal(0.0, model.sigma, size=burn_in + length)
    z = lfilter(model.ma_poly.to_array(), model.ar_poly.to_array(), a)
    return TimeSeries(z[burn_in:], "clean")


def innovations(model: ArmaModel, series) -> TimeSeries:
    """Conditional residuals ``r_t`` solving ``Theta(B) r_t = Phi(B) y_t``.

    Pre-sample ``y`` and ``r`` are zero, so the first ``max(p, q)`` or so
    residuals carry a startup transient.
    """
    if not model.is_invertible():
        raise ModelError(f"MA polynomial {model.ma_poly.coeffs} is not invertible")
    y = as_values(series)
    r = lfilter(model.ar_poly.to_array(), model.ma_poly.to_array(), y)
    return TimeSeries(r, "residual")


def ma_filter(model: ArmaModel, residuals) -> np.ndarray:
    """Inverse of :func:`innovations`: ``y_t = Theta(B)/Phi(B) r_t`` from zeros."""
    r = as_values(residuals)
    return lfilter(model.ma_poly.to_array(), model.ar_poly.to_array(), r)
