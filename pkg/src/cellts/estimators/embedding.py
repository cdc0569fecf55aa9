"""Lagged (Hankel) embedding of a series, with cell masks inherited from flags."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..arma import as_values
from ..filters import FlagVector
from .classic import EstimationError


@dataclass(frozen=True)
class EmbeddedMatrix:
    """Rows ``(y_t, y_{t-1}, ..., y_{t-p})`` for ``t = p+1..T``.

    ``times`` holds the 1-based ``t`` of each row so that subsets (complete
    cases) keep track of where they came from.
    """

    rows: np.ndarray
    missing_mask: np.ndarray
    p: int
    times: np.ndarray

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def dim(self) -> int:
        return self.p + 1

    def row_contaminated(self) -> np.ndarray:
        return self.missing_mask.any(axis=1)

    def masked_values(self) -> np.ndarray:
        """Rows with masked cells set to NaN."""
        out = self.rows.astype(float, copy=True)
        out[self.missing_mask] = np.nan
        return out

    def select(self, keep: np.ndarray) -> "EmbeddedMatrix":
        return EmbeddedMatrix(
            self.rows[keep], self.missing_mask[keep], self.p, self.times[keep]
        )


def embed(series, p: int, flags=None) -> EmbeddedMatrix:
    """Lag matrix of order ``p``; a flagged cell ``y_s`` masks every matrix
    cell holding it, i.e. column ``t - s`` of rows ``t = s..s+p``."""
    y = as_values(series)
    T = y.size
    if not 0 <= p < T:
        raise ValueError(f"embedding order must lie in 0..{T - 1}, got {p}")
    rows = np.column_stack([y[p - c : T - c] for c in range(p + 1)])
    if flags is None:
        f = np.zeros(T, dtype=bool)
    else:
        f = np.asarray(flags.flags if isinstance(flags, FlagVector) else flags, dtype=bool)
        if f.size != T:
            raise ValueError(f"flags of length {f.size} for a series of length {T}")
    mask = np.column_stack([f[p - c : T - c] for c in range(p + 1)])
    return EmbeddedMatrix(rows, mask, p, np.arange(p + 1, T + 1))


def complete_cases(matrix: EmbeddedMatrix) -> EmbeddedMatrix:
    keep = ~matrix.row_contaminated()
    if keep.sum() < matrix.p + 2:
        raise EstimationError(
            f"only {int(keep.sum())} complete rows; need at least {matrix.p + 2}"
        )
    return matrix.select(keep)


def drop_empty_rows(matrix: EmbeddedMatrix) -> EmbeddedMatrix:
    """Remove rows in which every cell is masked."""
    return matrix.select(~matrix.missing_mask.all(axis=1))
