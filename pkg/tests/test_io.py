import json
from fractions import Fraction as F

import numpy as np
import pytest

from solitonlab import io as sio
from solitonlab.errors import InputError


def write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return p


def test_parse_number():
    assert sio.parse_number(3) == F(3)
    assert sio.parse_number("3/4") == F(3, 4)
    assert sio.parse_number(" -1 / 2 ") == F(-1, 2)
    assert sio.parse_number("1e-3") == F(1, 1000)
    assert isinstance(sio.parse_number(0.5), float)
    for bad in ("x", "1/0", True):
        with pytest.raises(InputError):
            sio.parse_number(bad)


def test_schema_rejects_unknown_keys(tmp_path):
    p = write(tmp_path, "a.json", {"polytope": {"vertices": [[0], [1]]}, "colour": "red"})
    with pytest.raises(sio.SchemaError):
        sio.load(p)


def test_schema_error_path(tmp_path):
    p = write(tmp_path, "a.json", {"weight": {"family": "kr", "xi": ["abc"]}})
    with pytest.raises(sio.SchemaError) as e:
        sio.load(p)
    assert e.value.path[:2] == ["weight", "xi"] or e.value.path == ["weight"]


def test_schema_polytope_needs_one_rep(tmp_path):
    p = write(tmp_path, "a.json", {"polytope": {}})
    with pytest.raises(sio.SchemaError):
        sio.load(p)


def test_file_reference(tmp_path):
    (tmp_path / "sub").mkdir()
    write(tmp_path / "sub", "poly.json", {"polytope": {"vertices": [[-1], [1]]}})
    p = write(tmp_path, "main.json", {"polytope": "sub/poly.json", "weight": {"family": "kr", "xi": ["1/2"]}})
    doc = sio.load(p)
    P = sio.polytope_from(doc)
    assert P.vertices == ((-1,), (1,))
    w = sio.weight_from(doc, P)
    assert w.xi == (F(1, 2),)


def test_reference_missing_key(tmp_path):
    write(tmp_path, "empty.json", {"name": "nothing"})
    p = write(tmp_path, "main.json", {"polytope": "empty.json"})
    with pytest.raises(InputError):
        sio.load(p)


def test_circular_reference(tmp_path):
    write(tmp_path, "a.json", {"polytope": "b.json"})
    write(tmp_path, "b.json", {"polytope": "a.json"})
    with pytest.raises(InputError, match="circular"):
        sio.load(tmp_path / "a.json")


def test_missing_and_broken_files(tmp_path):
    with pytest.raises(InputError):
        sio.load(tmp_path / "nope.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(InputError):
        sio.load(bad)


def test_builders(tmp_path):
    doc = {
        "interval": [-1, "1/2"],
        "filtration": {"affine_pieces": [{"a": [0], "b": 1}, {"a": [-1], "b": 1}]},
    }
    P = sio.polytope_from(doc)
    assert P.vertices == ((-1,), (F(1, 2),))
    f = sio.filtration_from(doc, P)
    assert len(f.pieces) == 2
    with pytest.raises(InputError):
        sio.cone_from(doc)
    with pytest.raises(InputError):
        sio.polytope_from({})
    facets = {"polytope": {"facets": [{"normal": [1], "offset": 1}, {"normal": [-1], "offset": 2}]}}
    assert sio.polytope_from(facets).vertices == ((-1,), (2,))


def test_dumps_is_deterministic():
    obj = {"b": F(1, 3), "a": np.array([1.0, 2.0]), "c": (np.float64(0.5), np.int64(3), np.bool_(True))}
    text = sio.dumps(obj)
    assert text == sio.dumps(dict(reversed(list(obj.items()))))
    assert json.loads(text) == {"a": [1.0, 2.0], "b": "1/3", "c": [0.5, 3, True]}


def test_dumps_rejects_nan():
    with pytest.raises(ValueError):
        sio.dumps({"x": float("nan")})


def test_example_inputs_validate(repo_root):
    for p in sorted((repo_root / "inputs").glob("*.json")):
        sio.load(p)
