"""Seeded Monte Carlo experiments and their tabular reports.

A config is a YAML mapping::

    model: {phi: [0.5, 0.2, 0.2], theta: [], sigma: 1.0}
    length: 1000
    burn_in: 500
    contamination: {type: periodic, period: 7, value: 4.0, start: 1}
    methods:
      - {name: UHS88, kind: artsgs, filter: UHS, alpha: 0.88}
      - {name: UHS88CC, kind: ars, filter: UHS, alpha: 0.88}
    filters:
      - {filter: UGY, alpha: 0.95}
    seeds: {start: 0, count: 30}
    workers: 1

``contamination.type`` is one of ``none``, ``periodic`` (period, value,
start), ``bernoulli`` (p_A, p_I, magnitude_sd) or ``ledger`` (outliers: a list
of {kind, time, magnitude}). Method kinds are ``yw``, ``hr``, ``artsgs``,
``ars`` and ``nofilter-s``; ``order`` (default: the model's AR order), ``q``
and ``m`` apply where relevant. ``seeds`` may also be a plain list.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import yaml

from .arma import ArmaModel, ModelError, simulate
from .contamination import (
    BernoulliContamSpec,
    ContaminatedSeries,
    OutlierSpec,
    draw_bernoulli_specs,
    inject,
    periodic_contaminate,
)
from .estimators import ars, artsgs, hannan_rissanen, nofilter_s, yule_walker
from .filters import apply_filter, flag_metrics

METHOD_KINDS = ("yw", "hr", "artsgs", "ars", "nofilter-s")
FILTERED_KINDS = ("artsgs", "ars")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class MethodSpec:
    name: str
    kind: str
    filter: str | None = None
    alpha: float | None = None
    order: int | None = None
    q: int = 0
    m: int | None = None

    @classmethod
    def from_dict(cls, d: dict) -> "MethodSpec":
        kind = d.get("kind")
        if kind not in METHOD_KINDS:
            raise ConfigError(f"unknown method kind {kind!r}; expected one of {METHOD_KINDS}")
        filt, alpha = d.get("filter"), d.get("alpha")
        if kind in FILTERED_KINDS:
            if filt is None or alpha is None:
                raise ConfigError(f"method kind {kind} needs filter and alpha")
            filt = str(filt).upper()
            if filt not in ("UGY", "UHS"):
                raise ConfigError(f"unknown filter {filt!r}")
            alpha = float(alpha)
            if not 0 < alpha < 1:
                raise ConfigError(f"alpha must lie in (0, 1), got {alpha}")
        name = d.get("name") or (f"{kind}-{filt}{round(100 * alpha)}" if filt else kind)
        order = d.get("order")
        return cls(str(name), kind, filt, alpha, None if order is None else int(order),
                   int(d.get("q", 0)), d.get("m"))

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}


@dataclass(frozen=True)
class ExperimentConfig:
    model: ArmaModel
    length: int = 1000
    burn_in: int = 500
    contamination: dict = field(default_factory=lambda: {"type": "none"})
    methods: tuple[MethodSpec, ...] = ()
    filters: tuple[tuple[str, float], ...] = ()
    seeds: tuple[int, ...] = (0,)
    workers: int = 1
    output: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a mapping")
        try:
            model = ArmaModel.from_dict(d.get("model", {})).validate()
        except (ModelError, TypeError) as exc:
            raise ConfigError(f"invalid model: {exc}") from exc
        methods = tuple(MethodSpec.from_dict(m) for m in d.get("methods") or ())
        filters = []
        for f in d.get("filters") or ():
            fid = str(f.get("filter", "")).upper()
            if fid not in ("UGY", "UHS") or "alpha" not in f:
                raise ConfigError(f"invalid filter entry {f!r}")
            filters.append((fid, float(f["alpha"])))
        seeds = d.get("seeds", [0])
        if isinstance(seeds, dict):
            seeds = range(int(seeds.get("start", 0)), int(seeds.get("start", 0)) + int(seeds["count"]))
        seeds = tuple(int(s) for s in seeds)
        if not seeds:
            raise ConfigError("at least one seed is required")
        if not methods and not filters:
            raise ConfigError("at least one method or filter is required")
        cont = dict(d.get("contamination") or {"type": "none"})
        _check_contamination(cont)
        length = int(d.get("length", 1000))
        if length < 10:
            raise ConfigError(f"length {length} is too short")
        return cls(model, length, int(d.get("burn_in", 500)), cont, methods,
                   tuple(filters), seeds, int(d.get("workers", 1)), dict(d.get("output") or {}))

    def to_dict(self) -> dict:
        return {
            "model": self.model.to_dict(),
            "length": self.length,
            "burn_in": self.burn_in,
            "contamination": self.contamination,
            "methods": [m.to_dict() for m in self.methods],
            "filters": [{"filter": f, "alpha": a} for f, a in self.filters],
            "seeds": list(self.seeds),
        }

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def _check_contamination(c: dict) -> None:
    kind = c.get("type", "none")
    try:
        if kind == "none":
            return
        if kind == "periodic":
            period, start = int(c["period"]), int(c.get("start", 1))
            float(c["value"])
            if period < 1 or not 1 <= start <= period:
                raise ConfigError("periodic contamination needs period >= 1 and 1 <= start <= period")
        elif kind == "bernoulli":
            BernoulliContamSpec(float(c["p_A"]), float(c["p_I"]), float(c["magnitude_sd"]))
        elif kind == "ledger":
            [OutlierSpec.from_dict(o) for o in c["outliers"]]
        else:
            raise ConfigError(f"unknown contamination type {kind!r}")
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid {kind} contamination: {exc}") from exc


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        try:
            data = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    return ExperimentConfig.from_dict(data)


def default_config(seeds: int = 30) -> ExperimentConfig:
    """The reference experiment: AR(3), T=1000, every 7th cell replaced by 4."""
    return ExperimentConfig.from_dict({
        "model": {"phi": [0.5, 0.2, 0.2], "sigma": 1.0},
        "length": 1000,
        "contamination": {"type": "periodic", "period": 7, "value": 4.0, "start": 1},
        "methods": [
            {"name": "UHS88", "kind": "artsgs", "filter": "UHS", "alpha": 0.88},
            {"name": "UHS88CC", "kind": "ars", "filter": "UHS", "alpha": 0.88},
            {"name": "UGY95", "kind": "artsgs", "filter": "UGY", "alpha": 0.95},
            {"name": "nofilter-S", "kind": "nofilter-s"},
        ],
        "filters": [
            {"filter": "UGY", "alpha": 0.95},
            {"filter": "UGY", "alpha": 0.60},
            {"filter": "UHS", "alpha": 0.88},
        ],
        "seeds": {"start": 0, "count": seeds},
    })


def contaminate(config: ExperimentConfig, seed: int) -> ContaminatedSeries:
    clean = simulate(config.model, config.length, seed, config.burn_in)
    c = config.contamination
    kind = c.get("type", "none")
    if kind == "periodic":
        return periodic_contaminate(clean, int(c["period"]), float(c["value"]), int(c.get("start", 1)))
    if kind == "bernoulli":
        spec = BernoulliContamSpec(float(c["p_A"]), float(c["p_I"]), float(c["magnitude_sd"]))
        return inject(config.model, clean, draw_bernoulli_specs(config.length, spec, [seed, 1]))
    if kind == "ledger":
        return inject(config.model, clean, [OutlierSpec.from_dict(o) for o in c["outliers"]])
    return inject(config.model, clean, [])


def run_method(method: MethodSpec, series, truth, default_order: int) -> dict:
    p = method.order if method.order is not None else default_order
    if method.kind == "yw":
        fit = yule_walker(series, p)
    elif method.kind == "hr":
        fit = hannan_rissanen(series, p, method.q, method.m)
        return {"phi": list(map(float, fit.phi)), "theta": list(map(float, fit.theta)),
                "sigma": fit.sigma, "diagnostics": fit.diagnostics}
    elif method.kind == "artsgs":
        fit = artsgs(series, p, method.filter, method.alpha, truth=truth)
    elif method.kind == "ars":
        fit = ars(series, p, method.filter, method.alpha, truth=truth)
    else:
        fit = nofilter_s(series, p)
    return {"phi": list(map(float, fit.phi)), "sigma": fit.sigma, "diagnostics": fit.diagnostics}


def filter_label(fid: str, alpha: float) -> str:
    return f"{fid}{round(100 * alpha):d}"


def _run_seed(config: ExperimentConfig, seed: int) -> tuple[list, list]:
    cs = contaminate(config, seed)
    y, truth = cs.observed, cs.cell_truth
    runs = []
    for m in config.methods:
        t0 = time.perf_counter()
        rec: dict[str, Any] = {"seed": seed, "method": m.name}
        try:
            rec.update(run_method(m, y, truth, max(config.model.p, 1)))
            rec["error"] = None
        except Exception as exc:  # recorded per run, never fatal
            rec.update({"phi": None, "sigma": None, "diagnostics": {},
                        "error": f"{type(exc).__name__}: {exc}"})
        rec["seconds"] = time.perf_counter() - t0
        runs.append(rec)
    conf = []
    for fid, alpha in config.filters:
        rec = {"seed": seed, "filter": filter_label(fid, alpha)}
        try:
            rec.update(flag_metrics(apply_filter(y, fid, alpha), truth).to_dict())
            rec["error"] = None
        except Exception as exc:
            rec["error"] = f"{type(exc).__name__}: {exc}"
        conf.append(rec)
    return runs, conf


@dataclass
class BenchReport:
    config: ExperimentConfig
    runs: list[dict]
    confusion: list[dict]

    @property
    def failures(self) -> list[dict]:
        return [r for r in self.runs + self.confusion if r.get("error")]

    def param_names(self) -> list[str]:
        p = max([len(r["phi"]) for r in self.runs if r.get("phi") is not None],
                default=max(self.config.model.p, 1))
        q = max([len(r.get("theta") or []) for r in self.runs], default=0)
        return [f"phi_{i}" for i in range(1, p + 1)] + [f"theta_{j}" for j in range(1, q + 1)] + ["sigma"]

    def _row(self, r: dict, names: list[str]) -> list[float]:
        vals = dict(zip([f"phi_{i}" for i in range(1, len(r["phi"]) + 1)], r["phi"]))
        vals.update(zip([f"theta_{j}" for j in range(1, len(r.get("theta") or []) + 1)], r.get("theta") or []))
        vals["sigma"] = r["sigma"]
        return [vals.get(n, float("nan")) for n in names]

    def method_aggregates(self) -> dict:
        names = self.param_names()
        out = {}
        for m in self.config.methods:
            ok = [r for r in self.runs if r["method"] == m.name and not r["error"]]
            rows = np.array([self._row(r, names) for r in ok], dtype=float).reshape(len(ok), len(names))
            agg = {"n_ok": len(ok),
                   "n_failed": sum(1 for r in self.runs if r["method"] == m.name and r["error"])}
            if ok:
                agg["mean"] = dict(zip(names, map(float, rows.mean(axis=0))))
                agg["median"] = dict(zip(names, map(float, np.median(rows, axis=0))))
            out[m.name] = agg
        return out

    def filter_aggregates(self) -> dict:
        out = {}
        keys = ("clean_not_flagged", "clean_flagged", "outlier_not_flagged", "outlier_flagged")
        for fid, alpha in self.config.filters:
            label = filter_label(fid, alpha)
            ok = [r for r in self.confusion if r["filter"] == label and not r["error"]]
            if not ok:
                out[label] = {"n_ok": 0}
                continue
            tot = {k: int(sum(r[k] for r in ok)) for k in keys}
            mean = {k: float(np.mean([r[k] for r in ok])) for k in keys}
            tpr = [r["outlier_flagged"] / n for r in ok if (n := r["outlier_flagged"] + r["outlier_not_flagged"])]
            fpr = [r["clean_flagged"] / n for r in ok if (n := r["clean_flagged"] + r["clean_not_flagged"])]
            out[label] = {"n_ok": len(ok), "total": tot, "mean": mean,
                          "mean_tpr": float(np.mean(tpr)) if tpr else None,
                          "mean_fpr": float(np.mean(fpr)) if fpr else None}
        return out

    def to_dict(self, include_timing: bool = False) -> dict:
        runs = [r if include_timing else {k: v for k, v in r.items() if k != "seconds"}
                for r in self.runs]
        return {
            "config_digest": self.config.digest(),
            "config": self.config.to_dict(),
            "runs": runs,
            "confusion": self.confusion,
            "aggregates": {"methods": self.method_aggregates(), "filters": self.filter_aggregates()},
        }


def run_experiment(config: ExperimentConfig, workers: int | None = None) -> BenchReport:
    """Run every method and filter on every seed; results ordered by seed."""
    workers = config.workers if workers is None else workers
    seeds = sorted(config.seeds)
    if workers > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_run_seed, [config] * len(seeds), seeds))
    else:
        parts = [_run_seed(config, s) for s in seeds]
    runs = [r for rs, _ in parts for r in rs]
    conf = [c for _, cs in parts for c in cs]
    return BenchReport(config, runs, conf)


def _num(x) -> str:
    return f"{x:.3f}" if x is not None and np.isfinite(x) else "nan"


def render_tables(report: BenchReport, format: str = "text", include_timing: bool = False) -> str:
    """Render a report as ``text`` (estimates table plus confusion table), ``csv`` or ``json``."""
    if format == "json":
        return json.dumps(report.to_dict(include_timing), indent=2, sort_keys=True) + "\n"
    names = report.param_names()
    aggs = report.method_aggregates()
    if format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["seed", "method", *names, "error"] + (["seconds"] if include_timing else []))
        for r in report.runs:
            vals = [repr(float(v)) for v in report._row(r, names)] if not r["error"] else [""] * len(names)
            extra = [repr(r["seconds"])] if include_timing else []
            w.writerow([r["seed"], r["method"], *vals, r["error"] or ""] + extra)
        return buf.getvalue()
    if format != "text":
        raise ValueError(f"unknown format {format!r}")
    width = max([len("Method")] + [len(m.name) for m in report.config.methods]) + 2
    lines = [f"{'Method':<{width}}" + " ".join(f"{n:>7}" for n in names)]
    for m in report.config.methods:
        a = aggs[m.name]
        if "mean" in a:
            cells = " ".join(f"{_num(a['mean'][n]):>7}" for n in names)
        else:
            cells = " ".join(f"{'nan':>7}" for _ in names)
        suffix = f"  ({a['n_failed']} failed)" if a["n_failed"] else ""
        lines.append(f"{m.name:<{width}}{cells}{suffix}")
    faggs = report.filter_aggregates()
    if faggs:
        labels = list(faggs)
        lines.append("")
        lines.append(f"{'':<10}" + "".join(f"{lab:^14}" for lab in labels))
        lines.append(f"{'Obs.':<10}" + "".join(f"{'NF':>7}{'F':>7}" for _ in labels))
        for row, (k_nf, k_f) in (("Clean", ("clean_not_flagged", "clean_flagged")),
                                 ("Additive", ("outlier_not_flagged", "outlier_flagged"))):
            cells = ""
            for lab in labels:
                mean = faggs[lab].get("mean")
                cells += f"{mean[k_nf]:>7.1f}{mean[k_f]:>7.1f}" if mean else f"{'nan':>7}{'nan':>7}"
            lines.append(f"{row:<10}{cells}")
    return "\n".join(lines) + "\n"
