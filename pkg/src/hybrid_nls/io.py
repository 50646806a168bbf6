"""Field serialization: JSON with ``[re, im]`` pairs, or ``.npz`` archives.

Loaders rebuild fields through their constructors, so every grid and shape
invariant is re-checked on the way in.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .spectral import LineField, LineGrid, PeriodicField, TorusGrid


def _pairs(a: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in a]


def _complex(pairs) -> np.ndarray:
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("expected a list of [re, im] pairs")
    if not np.all(np.isfinite(arr)):
        raise ValueError("non-finite entries")
    return arr[:, 0] + 1j * arr[:, 1]


def field_to_dict(f) -> dict:
    if isinstance(f, PeriodicField):
        return {
            "type": "PeriodicField",
            "modes": f.grid.modes,
            "samples": f.grid.samples,
            "coeffs": _pairs(f.coeffs),
        }
    if isinstance(f, LineField):
        return {
            "type": "LineField",
            "box_length": f.grid.box_length,
            "points": f.grid.points,
            "values": _pairs(f.values),
        }
    raise TypeError(f"cannot serialize {type(f).__name__}")


def field_from_dict(d: dict):
    kind = d.get("type")
    if kind == "PeriodicField":
        return PeriodicField(TorusGrid(int(d["modes"]), int(d["samples"])), _complex(d["coeffs"]))
    if kind == "LineField":
        return LineField.from_values(LineGrid(d["box_length"], int(d["points"])), _complex(d["values"]))
    raise ValueError(f"unknown field type {kind!r}")


def save_json(f, path) -> None:
    Path(path).write_text(json.dumps(field_to_dict(f)))


def load_json(path):
    return field_from_dict(json.loads(Path(path).read_text()))


def save_npz(f, path) -> None:
    if isinstance(f, PeriodicField):
        np.savez(path, type="PeriodicField", modes=f.grid.modes, samples=f.grid.samples, data=f.coeffs)
    elif isinstance(f, LineField):
        np.savez(path, type="LineField", box_length=f.grid.box_length, points=f.grid.points, data=f.values)
    else:
        raise TypeError(f"cannot serialize {type(f).__name__}")


def load_npz(path):
    with np.load(path) as z:
        kind = str(z["type"])
        data = np.asarray(z["data"], dtype=complex)
        if not np.all(np.isfinite(data)):
            raise ValueError("non-finite entries")
        if kind == "PeriodicField":
            return PeriodicField(TorusGrid(int(z["modes"]), int(z["samples"])), data)
        if kind == "LineField":
            return LineField.from_values(LineGrid(int(z["box_length"]), int(z["points"])), data)
    raise ValueError(f"unknown field type {kind!r}")
