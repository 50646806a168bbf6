import json

import numpy as np
import pytest

from hybrid_nls import io
from hybrid_nls.spectral import LineField, LineGrid, PeriodicField, TorusGrid


@pytest.fixture
def fields(rng):
    tg = TorusGrid(5, 16)
    w = PeriodicField(tg, rng.normal(size=11) + 1j * rng.normal(size=11))
    g = LineGrid(8, 128)
    v = LineField.from_values(g, rng.normal(size=128) + 1j * rng.normal(size=128))
    return w, v


@pytest.mark.parametrize("fmt", ["json", "npz"])
def test_round_trip(fields, tmp_path, fmt):
    save, load = (io.save_json, io.load_json) if fmt == "json" else (io.save_npz, io.load_npz)
    for i, f in enumerate(fields):
        path = tmp_path / f"f{i}.{fmt}"
        save(f, path)
        back = load(path)
        assert type(back) is type(f) and back.grid == f.grid
        a = f.coeffs if isinstance(f, PeriodicField) else f.values
        b = back.coeffs if isinstance(f, PeriodicField) else back.values
        assert np.array_equal(a, b)


def test_json_layout(fields):
    d = io.field_to_dict(fields[0])
    assert d["type"] == "PeriodicField" and len(d["coeffs"]) == 11
    assert all(len(p) == 2 for p in d["coeffs"])


def test_rejects_bad_pairs(tmp_path, fields):
    d = io.field_to_dict(fields[0])
    d["coeffs"] = [[1.0, 2.0, 3.0]] * 11
    with pytest.raises(ValueError):
        io.field_from_dict(d)


def test_rejects_wrong_length(fields):
    d = io.field_to_dict(fields[1])
    d["values"] = d["values"][:-1]
    with pytest.raises(ValueError):
        io.field_from_dict(d)


def test_rejects_nonfinite(tmp_path, fields):
    path = tmp_path / "bad.json"
    d = io.field_to_dict(fields[0])
    d["coeffs"][0] = [float("nan"), 0.0]
    path.write_text(json.dumps(d))
    with pytest.raises(ValueError):
        io.load_json(path)


def test_rejects_unknown_type():
    with pytest.raises(ValueError):
        io.field_from_dict({"type": "Sphere"})
    with pytest.raises(TypeError):
        io.field_to_dict(object())
    with pytest.raises(TypeError):
        io.save_npz(object(), "x.npz")
