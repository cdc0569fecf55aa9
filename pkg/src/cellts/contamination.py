"""Additive and innovative outliers injected into clean ARMA paths.

Times are 1-based throughout, matching the usual ``t = 1, ..., T`` indexing
of a series; arrays are indexed at ``t - 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Literal

import numpy as np

from .arma import ArmaModel, TimeSeries, as_values, simulate, DEFAULT_BURN_IN
from .lagpoly import divide

Kind = Literal["AO", "IO"]

#: cells whose observed and clean values differ by more than this are contaminated
TRUTH_TOL = 1e-12


@dataclass(frozen=True)
class OutlierSpec:
    kind: Kind
    time: int
    magnitude: float

    def __post_init__(self):
        if self.kind not in ("AO", "IO"):
            raise ValueError(f"unknown outlier kind {self.kind!r}")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "time": int(self.time), "magnitude": float(self.magnitude)}

    @classmethod
    def from_dict(cls, d: dict) -> "OutlierSpec":
        return cls(d["kind"], int(d["time"]), float(d["magnitude"]))


@dataclass(frozen=True)
class BernoulliContamSpec:
    p_A: float
    p_I: float
    magnitude_sd: float

    def __post_init__(self):
        if self.p_A < 0 or self.p_I < 0 or self.p_A + self.p_I > 1:
            raise ValueError(
                f"need p_A, p_I >= 0 and p_A + p_I <= 1, got {self.p_A}, {self.p_I}"
            )
        if not self.magnitude_sd > 0:
            raise ValueError(f"magnitude_sd must be positive, got {self.magnitude_sd}")


@dataclass(frozen=True)
class ContaminatedSeries:
    observed: TimeSeries
    clean: TimeSeries
    ledger: tuple[OutlierSpec, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if len(self.observed) != len(self.clean):
            raise ValueError("observed and clean series differ in length")
        object.__setattr__(self, "ledger", tuple(self.ledger))

    @property
    def cell_truth(self) -> np.ndarray:
        return np.abs(self.observed.values - self.clean.values) > TRUTH_TOL

    def __len__(self):
        return len(self.observed)


def inject(model: ArmaModel, clean, specs: Iterable[OutlierSpec]) -> ContaminatedSeries:
    """Add each outlier's effect to ``clean``.

    An AO moves only its own cell; an IO at ``tau`` adds ``h * psi_{t - tau}``
    for every ``t >= tau`` with ``psi`` the weights of ``Theta(B)/Phi(B)``.
    """
    model.validate()
    z = as_values(clean)
    T = z.size
    specs = tuple(specs)
    for s in specs:
        if not 1 <= s.time <= T:
            raise ValueError(f"outlier time {s.time} outside 1..{T}")
    y = z.copy()
    for s in specs:
        i = s.time - 1
        if s.kind == "AO":
            y[i] += s.magnitude
        else:
            psi = divide(model.ma_poly, model.ar_poly, T - s.time).weights
            y[i:] += s.magnitude * psi
    return ContaminatedSeries(
        TimeSeries(y, "contaminated"), TimeSeries(z, "clean"), specs
    )


def ao_to_io(
    model: ArmaModel, ao: OutlierSpec, horizon: int, length: int | None = None
) -> list[OutlierSpec]:
    """IO sequence reproducing the observed-series effect of one AO.

    The magnitudes are ``h * pi_k`` for ``k = 0..horizon`` where ``pi`` are the
    weights of ``Phi(B)/Theta(B)``; zero weights are dropped. For a pure
    AR(p) model and ``horizon >= p`` the equivalence is exact, otherwise it is
    a truncation. With ``length`` given, IOs falling after the end of the
    series (which cannot affect it) are dropped as well.
    """
    if ao.kind != "AO":
        raise ValueError(f"expected an AO spec, got {ao.kind}")
    pi = divide(model.ar_poly, model.ma_poly, horizon).weights
    out = []
    for k, w in enumerate(pi):
        t = ao.time + k
        if w == 0.0 or (length is not None and t > length):
            continue
        out.append(OutlierSpec("IO", t, ao.magnitude * w))
    return out


def draw_bernoulli_specs(length: int, spec: BernoulliContamSpec, seed) -> list[OutlierSpec]:
    """Outlier ledger from independent ``A_t``, ``I_t`` and magnitudes ``h_t``.

    Both indicators can fire at the same ``t``; they then share ``h_t``.
    """
    rng = np.random.default_rng(seed)
    A = rng.random(length) < spec.p_A
    I = rng.random(length) < spec.p_I
    h = rng.normal(0.0, spec.magnitude_sd, size=length)
    specs = [OutlierSpec("AO", int(t) + 1, float(h[t])) for t in np.flatnonzero(A)]
    specs += [OutlierSpec("IO", int(t) + 1, float(h[t])) for t in np.flatnonzero(I)]
    specs.sort(key=lambda s: (s.time, s.kind))
    return specs


def bernoulli_contaminate(
    model: ArmaModel,
    length: int,
    spec: BernoulliContamSpec,
    seed: int,
    burn_in: int = DEFAULT_BURN_IN,
) -> ContaminatedSeries:
    """Simulate a clean path and contaminate it by the Bernoulli scheme."""
    clean = simulate(model, length, seed, burn_in)
    # separate stream from the innovations so the clean path does not depend on spec
    return inject(model, clean, draw_bernoulli_specs(length, spec, [seed, 1]))


def periodic_contaminate(
    clean, period: int, value: float, start: int = 1
) -> ContaminatedSeries:
    """Replace the cells ``t = start, start + period, ...`` by ``value``.

    This is a replacement, not an addition: the ledger records each cell as an
    AO whose magnitude is the induced difference ``value - clean_t``.
    """
    if period < 1:
        raise ValueError(f"period must be at least 1, got {period}")
    if not 1 <= start <= period:
        raise ValueError(f"start must lie in 1..{period}, got {start}")
    z = as_values(clean)
    y = z.copy()
    idx = np.arange(start - 1, z.size, period)
    y[idx] = value
    ledger = [OutlierSpec("AO", int(i) + 1, float(value - z[i])) for i in idx]
    return ContaminatedSeries(TimeSeries(y, "contaminated"), TimeSeries(z, "clean"), ledger)
