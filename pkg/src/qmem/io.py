"""Result serialization: QMEMGRID binary snapshots, CSV tables and JSON summaries.

QMEMGRID layout (all little-endian)::

    b"QMEMGRID"  u32 d0  u32 d1  u32 d2  f64 re, f64 im, ...   (row-major)

A two-dimensional field of shape (d0, d1) is written with d2 = 0. For a
component snapshot of a two-component run, d2 holds the component index (1 or
2) and the payload still has d0 * d1 values. Any other d2 describes a
three-dimensional array with d0 * d1 * d2 values.
"""

from __future__ import annotations

import csv
import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"QMEMGRID"
_HEADER = struct.Struct("<8s3I")


class FormatError(ValueError):
    pass


@dataclass(frozen=True)
class GridFile:
    values: np.ndarray
    component: int | None = None


def write_grid(path, values, component: int | None = None) -> Path:
    values = np.asarray(values, dtype=np.complex128)
    if values.ndim == 2:
        d0, d1 = values.shape
        d2 = 0 if component is None else int(component)
        if component is not None and component < 1:
            raise ValueError("component index starts at 1")
    elif values.ndim == 3:
        if component is not None:
            raise ValueError("component snapshots must be two-dimensional")
        d0, d1, d2 = values.shape
    else:
        raise ValueError(f"expected a 2-D or 3-D array, got shape {values.shape}")
    path = Path(path)
    payload = np.empty(values.size * 2, dtype="<f8")
    flat = values.ravel()
    payload[0::2] = flat.real
    payload[1::2] = flat.imag
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, d0, d1, d2))
        fh.write(payload.tobytes())
    return path


def read_grid(path) -> GridFile:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise FormatError(f"{path}: file too short for a QMEMGRID header")
    magic, d0, d1, d2 = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    raw = np.frombuffer(data, dtype="<f8", offset=_HEADER.size)
    if raw.size % 2:
        raise FormatError(f"{path}: odd number of float64 values")
    n = raw.size // 2
    vals = raw[0::2] + 1j * raw[1::2]
    if n == d0 * d1:
        return GridFile(vals.reshape(d0, d1), d2 or None)
    if n == d0 * d1 * d2:
        return GridFile(vals.reshape(d0, d1, d2))
    raise FormatError(f"{path}: payload of {n} values does not match dims ({d0}, {d1}, {d2})")


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])
    return path


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def jsonable(obj):
    """Convert numpy scalars/arrays, tuples and non-finite floats to plain JSON values."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, complex):
        return {"re": jsonable(obj.real), "im": jsonable(obj.imag)}
    if isinstance(obj, Path):
        return str(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(dumps(obj), encoding="utf-8")
    return path
