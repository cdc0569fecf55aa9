"""Filter-then-estimate pipelines for AR(p) fits on a contaminated series."""

from __future__ import annotations

from ..filters import apply_filter, flag_metrics
from .classic import ArFit
from .embedding import complete_cases, drop_empty_rows, embed
from .robust import DEFAULT_B, gse, s_estimator, scatter_to_ar


def _diagnostics(flags, truth, est, extra=None) -> dict:
    diag = {"flagged_cells": flags.count, **est.diagnostics}
    if truth is not None:
        diag["confusion"] = flag_metrics(flags, truth).to_dict()
    if extra:
        diag.update(extra)
    return diag


def artsgs(series, p: int, filter_id: str = "UHS", alpha: float = 0.88,
           truth=None, b: float = DEFAULT_B) -> ArFit:
    """Filter the series once, embed with the flags as missing cells, fit GSE.

    Rows whose every cell is flagged carry no information and are dropped
    before the GSE step.
    """
    flags = apply_filter(series, filter_id, alpha)
    matrix = drop_empty_rows(embed(series, p, flags))
    est = gse(matrix, b)
    fit = scatter_to_ar(est, p, f"artsgs-{flags.label}")
    fit.diagnostics = _diagnostics(flags, truth, est)
    return fit


def ars(series, p: int, filter_id: str = "UHS", alpha: float = 0.88,
        truth=None, b: float = DEFAULT_B) -> ArFit:
    """Filter, keep the embedding rows without flagged cells, fit an S-estimator."""
    flags = apply_filter(series, filter_id, alpha)
    full = embed(series, p, flags)
    matrix = complete_cases(full)
    est = s_estimator(matrix, b)
    fit = scatter_to_ar(est, p, f"ars-{flags.label}")
    fit.diagnostics = _diagnostics(flags, truth, est, {"complete_rows": matrix.n})
    return fit


def nofilter_s(series, p: int, b: float = DEFAULT_B) -> ArFit:
    """S-estimator on the raw embedding, no cells flagged."""
    est = s_estimator(embed(series, p), b)
    fit = scatter_to_ar(est, p, "nofilter-s")
    fit.diagnostics = {"flagged_cells": 0, **est.diagnostics}
    return fit
