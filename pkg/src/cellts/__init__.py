"""Cellwise-robust estimation for ARMA series with additive and innovative outliers."""

from .arma import ArmaModel, ModelError, TimeSeries, innovations, simulate
from .contamination import (
    BernoulliContamSpec,
    ContaminatedSeries,
    OutlierSpec,
    ao_to_io,
    bernoulli_contaminate,
    inject,
    periodic_contaminate,
)
from .filters import (
    ConfusionCounts,
    DegenerateSeriesError,
    FlagVector,
    flag_metrics,
    gy_filter,
    hs_filter,
    robust_standardize,
)
from .lagpoly import LagPolynomial, SeriesWeights, divide, is_stable

__version__ = "0.1.0"

#: AR(3) used in the reference experiment
REFERENCE_PHI = (0.5, 0.2, 0.2)
