"""CSV + JSON-sidecar persistence for data records and result payloads.

CSV contract: headers mandatory, UTF-8, LF line endings, decimal point,
floats printed with 17 significant digits so round-trips are bit exact.
A record with m inputs and n states produces columns
u1..um, x1..xn, x_next1..x_nextn, one row per time step.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .lti import DataRecord

FLOAT_FMT = "%.17g"


def format_float(x: float) -> str:
    if x != x:
        return "nan"
    if x == float("inf"):
        return "inf"
    if x == float("-inf"):
        return "-inf"
    return FLOAT_FMT % x


def parse_float(s: str) -> float:
    return float(s)


def data_columns(m: int, n: int) -> list[str]:
    return ([f"u{i+1}" for i in range(m)]
            + [f"x{i+1}" for i in range(n)]
            + [f"x_next{i+1}" for i in range(n)])


def write_csv(path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_float(v) if isinstance(v, float) else v for v in row])


def record_rows(rec: DataRecord) -> list[list[float]]:
    rows = []
    for k in range(rec.t_len):
        rows.append([float(v) for v in rec.u0[:, k]]
                    + [float(v) for v in rec.x0[:, k]]
                    + [float(v) for v in rec.x1[:, k]])
    return rows


def write_record(rec: DataRecord, csv_path, meta_path, meta: dict | None = None) -> None:
    write_csv(csv_path, data_columns(rec.m, rec.n), record_rows(rec))
    payload = {"T": rec.t_len, "n": rec.n, "m": rec.m}
    payload.update(meta or {})
    write_json(meta_path, payload)


def read_record(csv_path, meta_path=None) -> tuple[DataRecord, dict]:
    """Reads a record; W0 is never present in files (noise is unobservable)."""
    csv_path = Path(csv_path)
    if not csv_path.exists():
        raise ConfigError(f"data file not found: {csv_path}")
    with open(csv_path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ConfigError(f"empty data file: {csv_path}")
        rows = [list(map(parse_float, row)) for row in reader if row]
    m = sum(1 for h in header if h.startswith("u"))
    n = sum(1 for h in header if h.startswith("x") and not h.startswith("x_next"))
    if header != data_columns(m, n) or not rows:
        raise ConfigError(f"unexpected column layout in {csv_path}: {header}")
    arr = np.array(rows)
    rec = DataRecord(u0=arr[:, :m].T, x0=arr[:, m:m + n].T, x1=arr[:, m + n:].T)
    meta = {}
    if meta_path is not None and Path(meta_path).exists():
        meta = json.loads(Path(meta_path).read_text(encoding="utf-8"))
    return rec, meta


def write_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")


def matrix_to_json(m: np.ndarray) -> list[list[float]]:
    return [[float(v) for v in row] for row in np.atleast_2d(m)]
