"""Univariate cellwise filters for a single time series.

Both filters standardise the series robustly, compare the tail of the
standardised values with a standard normal reference and flag the cells in
the over-populated tail.

``gy_filter`` is the Gervini-Yohai adaptive rule: the largest positive gap
between the reference CDF of ``|z|`` and the empirical one, over the region
beyond the reference ``alpha``-quantile, gives the proportion ``d`` of cells
to flag.

``hs_filter`` works on univariate halfspace depth ``D_t = min(F(z_t),
1 - F(z_t))``. ``alpha`` is read as a quantile of the reference depth law
(uniform on ``(0, 1/2)``), so candidate cells are those with depth at most
``alpha / 2``. The same exceedance ``d`` is computed on ``u_t = 1 - 2 D_t``,
and if ``d`` clears the two-sided DKW band at level ``1 - alpha`` every cell
at least as shallow as the point of maximal exceedance is flagged. Cutting at
a depth, not at a count, keeps cells of equal depth together, which matters
when many outliers share one value.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import stats

from .arma import TimeSeries, as_values

FilterId = Literal["UGY", "UHS"]

MAD_CONSISTENCY = 1.4826


class DegenerateSeriesError(ValueError):
    """The series has zero MAD and cannot be standardised."""


@dataclass(frozen=True)
class FlagVector:
    flags: np.ndarray
    filter_id: FilterId
    alpha: float

    def __post_init__(self):
        f = np.asarray(self.flags, dtype=bool).copy()
        f.flags.writeable = False
        object.__setattr__(self, "flags", f)

    def __len__(self):
        return self.flags.size

    @property
    def count(self) -> int:
        return int(self.flags.sum())

    @property
    def label(self) -> str:
        return f"{self.filter_id}{round(100 * self.alpha):d}"


@dataclass(frozen=True)
class ConfusionCounts:
    clean_not_flagged: int
    clean_flagged: int
    outlier_not_flagged: int
    outlier_flagged: int

    @property
    def total(self) -> int:
        return (
            self.clean_not_flagged
            + self.clean_flagged
            + self.outlier_not_flagged
            + self.outlier_flagged
        )

    @property
    def true_positive_rate(self) -> float:
        n = self.outlier_flagged + self.outlier_not_flagged
        return self.outlier_flagged / n if n else float("nan")

    @property
    def false_positive_rate(self) -> float:
        n = self.clean_flagged + self.clean_not_flagged
        return self.clean_flagged / n if n else float("nan")

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (
            self.clean_not_flagged,
            self.clean_flagged,
            self.outlier_not_flagged,
            self.outlier_flagged,
        )

    def to_dict(self) -> dict:
        return {
            "clean_not_flagged": self.clean_not_flagged,
            "clean_flagged": self.clean_flagged,
            "outlier_not_flagged": self.outlier_not_flagged,
            "outlier_flagged": self.outlier_flagged,
        }

    def render(self, label: str = "") -> str:
        """Two-row NF/F layout."""
        lines = [
            f"{label:<10}{'NF':>6}{'F':>6}",
            f"{'Clean':<10}{self.clean_not_flagged:>6}{self.clean_flagged:>6}",
            f"{'Additive':<10}{self.outlier_not_flagged:>6}{self.outlier_flagged:>6}",
        ]
        return "\n".join(lines)


def robust_standardize(series) -> TimeSeries:
    """``(y - median(y)) / (1.4826 * MAD(y))``."""
    y = as_values(series)
    if y.size < 2:
        raise ValueError("need at least two observations to standardise")
    med = np.median(y)
    mad = np.median(np.abs(y - med))
    if mad == 0:
        raise DegenerateSeriesError("MAD is zero; series is (mostly) constant")
    return TimeSeries((y - med) / (MAD_CONSISTENCY * mad), "residual")


def _check_alpha(alpha: float):
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")


def gy_exceedance(z_abs: np.ndarray, alpha: float) -> tuple[int, np.ndarray]:
    """Exceedance count ``ceil(T d)`` and the stable ascending order of ``|z|``."""
    T = z_abs.size
    order = np.argsort(z_abs, kind="stable")
    zs = z_abs[order]
    eta = stats.halfnorm.ppf(alpha)
    tail = zs >= eta
    if not tail.any():
        return 0, order
    i = np.arange(1, T + 1)[tail]
    G = stats.halfnorm.cdf(zs[tail])
    d = max(0.0, float(np.max(G - (i - 1) / T)))
    # guard against T*d landing a hair above an integer
    n = int(np.ceil(round(T * d, 9)))
    return n, order


def gy_filter(series, alpha: float = 0.95) -> FlagVector:
    """Gervini-Yohai filter: flag the ``ceil(T d)`` cells with largest ``|z|``.

    Ties in ``|z|`` are broken by position (stable sort), so exactly
    ``ceil(T d)`` cells are flagged.
    """
    _check_alpha(alpha)
    z = np.abs(robust_standardize(series).values)
    n, order = gy_exceedance(z, alpha)
    flags = np.zeros(z.size, dtype=bool)
    if n:
        flags[order[z.size - n :]] = True
    return FlagVector(flags, "UGY", alpha)


def halfspace_depth(z: np.ndarray) -> np.ndarray:
    """Univariate halfspace depth under the standard normal."""
    return stats.norm.sf(np.abs(z))


def hs_filter(series, alpha: float = 0.88) -> FlagVector:
    """Halfspace-depth filter; see the module docstring for the rule."""
    _check_alpha(alpha)
    z = robust_standardize(series).values
    T = z.size
    depth = halfspace_depth(z)
    u = 1.0 - 2.0 * depth
    order = np.argsort(u, kind="stable")
    us = u[order]
    i = np.arange(1, T + 1)
    excess = us - (i - 1) / T
    excess[us < 1.0 - alpha] = -np.inf
    k = int(np.argmax(excess))
    d = float(excess[k])
    band = np.sqrt(np.log(2.0 / (1.0 - alpha)) / (2.0 * T))
    if not d > band:
        return FlagVector(np.zeros(T, dtype=bool), "UHS", alpha)
    return FlagVector(depth <= depth[order[k]], "UHS", alpha)


def apply_filter(series, filter_id: str, alpha: float) -> FlagVector:
    fid = filter_id.upper()
    if fid == "UGY":
        return gy_filter(series, alpha)
    if fid == "UHS":
        return hs_filter(series, alpha)
    raise ValueError(f"unknown filter {filter_id!r}; expected UGY or UHS")


def flag_metrics(flags, truth) -> ConfusionCounts:
    f = np.asarray(flags.flags if isinstance(flags, FlagVector) else flags, dtype=bool)
    t = np.asarray(truth, dtype=bool)
    if f.shape != t.shape:
        raise ValueError(f"flags and truth differ in length: {f.size} vs {t.size}")
    return ConfusionCounts(
        clean_not_flagged=int(np.sum(~t & ~f)),
        clean_flagged=int(np.sum(~t & f)),
        outlier_not_flagged=int(np.sum(t & ~f)),
        outlier_flagged=int(np.sum(t & f)),
    )
