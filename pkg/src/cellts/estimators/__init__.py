from .classic import (
    ArFit,
    ArmaFit,
    EstimationError,
    autocovariance,
    default_long_order,
    hannan_rissanen,
    yule_walker,
    yule_walker_from_acov,
)
from .embedding import EmbeddedMatrix, complete_cases, drop_empty_rows, embed
from .pipelines import ars, artsgs, nofilter_s
from .robust import (
    LocationScatter,
    consistency_constant,
    gse,
    initial_estimate,
    m_scale,
    s_estimator,
    scatter_to_ar,
    tukey_rho,
    tukey_weight,
)

__all__ = [
    "ArFit", "ArmaFit", "EmbeddedMatrix", "EstimationError", "LocationScatter",
    "ars", "artsgs", "autocovariance", "complete_cases", "consistency_constant",
    "default_long_order", "drop_empty_rows", "embed", "gse", "hannan_rissanen",
    "initial_estimate", "m_scale", "nofilter_s", "s_estimator", "scatter_to_ar",
    "tukey_rho", "tukey_weight", "yule_walker", "yule_walker_from_acov",
]
