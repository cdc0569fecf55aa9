"""CSV and JSON formats shared by the CLI and the bench harness.

CSV files are comma separated with a mandatory header row and no index column.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .arma import TimeSeries
from .contamination import ContaminatedSeries, OutlierSpec
from .filters import FlagVector


def _write_rows(path, header, rows):
    """Write to a path, or to an already open text stream."""
    if hasattr(path, "write"):
        w = csv.writer(path, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        return
    with open(path, "w", newline="") as fh:
        _write_rows(fh, header, rows)


def _read_columns(path) -> dict[str, list[str]]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValueError(f"{path}: missing header row")
        cols = {name: [] for name in reader.fieldnames}
        for row in reader:
            for k in cols:
                cols[k].append(row[k])
    return cols


def fmt(x: float) -> str:
    return repr(float(x))


def write_series_csv(path, series) -> None:
    values = series.values if isinstance(series, TimeSeries) else np.asarray(series)
    _write_rows(path, ["value"], ([fmt(v)] for v in values))


def read_series_csv(path, column: str | None = None) -> TimeSeries:
    """Read ``value`` (or ``observed``, or the named column) from a CSV."""
    cols = _read_columns(path)
    for name in ([column] if column else ["value", "observed"]):
        if name in cols:
            return TimeSeries(np.array(cols[name], dtype=float))
    raise ValueError(f"{path}: no column {column or 'value/observed'}")


def write_contaminated_csv(path, cs: ContaminatedSeries) -> None:
    rows = zip(cs.observed.values, cs.clean.values, cs.cell_truth)
    _write_rows(path, ["observed", "clean", "truth_flag"],
                ([fmt(o), fmt(c), int(t)] for o, c, t in rows))


def read_contaminated_csv(path) -> tuple[TimeSeries, TimeSeries, np.ndarray]:
    cols = _read_columns(path)
    return (
        TimeSeries(np.array(cols["observed"], dtype=float), "contaminated"),
        TimeSeries(np.array(cols["clean"], dtype=float), "clean"),
        np.array(cols["truth_flag"], dtype=int).astype(bool),
    )


def ledger_to_json(ledger) -> str:
    return json.dumps([s.to_dict() for s in ledger], indent=2)


def ledger_from_json(text: str) -> list[OutlierSpec]:
    return [OutlierSpec.from_dict(d) for d in json.loads(text)]


def write_flags_csv(path, flags: FlagVector) -> None:
    _write_rows(path, ["flag"], ([int(f)] for f in flags.flags))


def read_flags_csv(path) -> np.ndarray:
    return np.array(_read_columns(path)["flag"], dtype=int).astype(bool)


def write_matrix_csv(path, matrix) -> None:
    """Embedding rows; masked cells are written as empty fields."""
    header = ["y_t"] + [f"y_t-{c}" for c in range(1, matrix.p + 1)]
    rows = (
        ["" if m else fmt(v) for v, m in zip(r, mr)]
        for r, mr in zip(matrix.rows, matrix.missing_mask)
    )
    _write_rows(path, header, rows)


def read_matrix_csv(path) -> np.ndarray:
    """Matrix CSV back as floats with NaN for masked cells."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        return np.array([[float(v) if v != "" else np.nan for v in row] for row in reader])


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
