"""Field files, CSV tables and JSON output.

Field text format: a header line ``n period`` followed by n rows of n
samples (row i holds x = i L/n), written as shortest round-trip decimals.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .torus import Field2D

__all__ = ["write_field", "read_field", "write_field_csv", "write_csv", "to_jsonable", "dump_json"]


def write_field(path, field: Field2D) -> None:
    lines = [f"{field.n} {field.period!r}"]
    for row in field.values:
        lines.append(" ".join(repr(float(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_field(path) -> Field2D:
    text = Path(path).read_text().split("\n")
    header = text[0].split()
    if len(header) != 2:
        raise ValueError(f"{path}: header must be 'n period'")
    n, period = int(header[0]), float(header[1])
    values = np.array([[float(v) for v in line.split()] for line in text[1 : n + 1]])
    if values.shape != (n, n):
        raise ValueError(f"{path}: expected {n}x{n} samples, found {values.shape}")
    return Field2D(values, period)


def write_field_csv(path, field: Field2D) -> None:
    h = field.spacing
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y", "value"])
        for i in range(field.n):
            for j in range(field.n):
                w.writerow([repr(i * h), repr(j * h), repr(float(field.values[i, j]))])


def write_csv(path, rows, columns) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_cell(row.get(c, "")) for c in columns])


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    return v


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays; inf -> "inf", nan -> None."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dump_json(obj, path=None) -> str:
    text = json.dumps(to_jsonable(obj), indent=2, sort_keys=True)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text
