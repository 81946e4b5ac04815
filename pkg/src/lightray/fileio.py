"""File formats: raw float64 fields with JSON sidecars, recipe JSON,
experiment records.

Field files hold the raw little-endian IEEE-754 float64 array, row-major,
axis order (t, x1, ..., xn); complex data is stored interleaved (re, im).
The sidecar `<name>.json` records {dims, spacings, t_range, box, kind}.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .bumps import FieldRecipe
from .grids import SpaceTimeGrid

__all__ = [
    "write_field",
    "read_field",
    "grid_from_meta",
    "grid_to_meta",
    "write_recipes",
    "read_recipes",
    "write_records_jsonl",
    "read_records_jsonl",
    "write_records_csv",
]


def grid_to_meta(grid):
    return {
        "t_range": list(grid.t_range),
        "box": [list(b) for b in grid.box],
        "dims": list(grid.shape),
        "spacings": list(grid.spacings),
    }


def grid_from_meta(meta):
    return SpaceTimeGrid(meta["t_range"], meta["box"], meta["dims"])


def write_field(path, values, grid, kind):
    """Raw + sidecar field writer; `values` may be real or complex and may
    carry a leading component axis (kind then records it)."""
    path = Path(path)
    values = np.asarray(values)
    complex_data = np.iscomplexobj(values)
    if complex_data:
        raw = np.ascontiguousarray(values.astype("<c16")).view("<f8")
    else:
        raw = np.ascontiguousarray(values.astype("<f8"))
    raw.tofile(path)
    meta = grid_to_meta(grid)
    meta.update({
        "kind": kind,
        "complex": bool(complex_data),
        "value_shape": list(values.shape),
        "byte_order": "little",
        "dtype": "float64",
    })
    path.with_suffix(path.suffix + ".json").write_text(json.dumps(meta, indent=1))
    return path


def read_field(path):
    path = Path(path)
    meta = json.loads(path.with_suffix(path.suffix + ".json").read_text())
    raw = np.fromfile(path, dtype="<f8")
    shape = tuple(meta["value_shape"])
    if meta["complex"]:
        values = raw.view("<c16").reshape(shape)
    else:
        values = raw.reshape(shape)
    return values, meta


def write_recipes(path, recipes):
    """One JSON file per potential: a list of component recipes."""
    payload = [r.to_dict() for r in recipes]
    Path(path).write_text(json.dumps(payload, indent=1))


def read_recipes(path):
    payload = json.loads(Path(path).read_text())
    return tuple(FieldRecipe.from_dict(d) for d in payload)


def write_records_jsonl(path, records):
    with open(path, "w") as fh:
        for r in records:
            fh.write(json.dumps(asdict(r), default=float) + "\n")


def read_records_jsonl(path):
    from .sweeps import StabilityRecord

    out = []
    with open(path) as fh:
        for line in fh:
            if line.strip():
                out.append(StabilityRecord(**json.loads(line)))
    return out


def write_records_csv(path, records):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["eps", "rho", "err_A", "err_V", "seed", "config", "timing"])
        for r in records:
            w.writerow([r.eps, r.rho, r.err_A, r.err_V, r.seed, r.config, r.timing])
