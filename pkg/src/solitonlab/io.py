"""JSON input files: schema, rational parsing, and file references.

One file describes one geometric object plus optional attachments.  Any
object-valued key may instead be a string path to another input file, read
relative to the referring file, from which the same key is taken.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

import jsonschema

from .errors import InputError

NUMBER = {
    "oneOf": [
        {"type": "number"},
        {"type": "string", "pattern": r"^\s*[-+]?(\d+(\.\d*)?|\.\d+)([eE][-+]?\d+)?(\s*/\s*\d+)?\s*$"},
    ]
}
# quotient Reeb vectors may be symbolic (e.g. "sqrt(2)") so irregular input is diagnosable
SYMBOLIC = {"oneOf": [{"type": "number"}, {"type": "string", "minLength": 1}]}
VECTOR = {"type": "array", "items": NUMBER}
MATRIX = {"type": "array", "items": VECTOR, "minItems": 1}
INTMATRIX = {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}, "minItems": 1}


def _ref(schema):
    return {"oneOf": [schema, {"type": "string"}]}


POLYTOPE = {
    "type": "object",
    "properties": {
        "vertices": MATRIX,
        "facets": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {"normal": VECTOR, "offset": NUMBER},
                "required": ["normal", "offset"],
                "additionalProperties": False,
            },
        },
    },
    "additionalProperties": False,
    "oneOf": [{"required": ["vertices"]}, {"required": ["facets"]}],
}

WEIGHT = {
    "type": "object",
    "properties": {
        "family": {"enum": ["constant", "kr", "mabuchi", "cone", "composite"]},
        "xi": VECTOR,
        "xbar": VECTOR,
        "n": {"type": "integer", "minimum": 1},
        "b": {"type": "string"},
        "c": NUMBER,
    },
    "required": ["family"],
    "additionalProperties": False,
}

CONE = {
    "type": "object",
    "properties": {"n": {"type": "integer", "minimum": 1}, "moment_generators": INTMATRIX, "reeb_rays": INTMATRIX},
    "additionalProperties": False,
    "oneOf": [{"required": ["moment_generators"]}, {"required": ["reeb_rays"]}],
}

FILTRATION = {
    "type": "object",
    "properties": {
        "affine_pieces": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "properties": {"a": VECTOR, "b": NUMBER},
                "required": ["a", "b"],
                "additionalProperties": False,
            },
        },
        "combine": {"enum": ["min", "max"]},
    },
    "required": ["affine_pieces"],
    "additionalProperties": False,
}

INPUT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "name": {"type": "string"},
        "polytope": _ref(POLYTOPE),
        "interval": {"type": "array", "items": NUMBER, "minItems": 2, "maxItems": 2},
        "cone": _ref(CONE),
        "weight": _ref(WEIGHT),
        "filtration": _ref(FILTRATION),
        "valuation": VECTOR,
        "zeta": VECTOR,
        "chi": {"type": "array", "items": SYMBOLIC},
        "xi": VECTOR,
        "start": VECTOR,
        "monomials": INTMATRIX,
        "reeb_pairs": {"type": "array", "items": {"type": "array", "items": VECTOR, "minItems": 2, "maxItems": 2}},
        "subspace": MATRIX,
    },
    "additionalProperties": False,
}

_VALIDATOR = jsonschema.Draft202012Validator(INPUT_SCHEMA)


class SchemaError(InputError):
    code = "SchemaError"

    def __init__(self, message, path=()):
        super().__init__(message)
        self.path = list(path)


def parse_number(x):
    """Exact Fraction for ints and numeric strings, float for JSON floats."""
    if isinstance(x, bool):
        raise InputError("booleans are not numbers")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return x
    s = str(x).replace(" ", "")
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise InputError(f"cannot parse number {x!r}") from None


def parse_vector(v):
    return tuple(parse_number(a) for a in v)


def validate(doc):
    errors = sorted(_VALIDATOR.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        raise SchemaError(f"schema violation at /{'/'.join(map(str, e.absolute_path))}: {e.message}", e.absolute_path)
    return doc


def load(path, _seen=None):
    """Read, validate, and resolve file references of an input document."""
    path = Path(path)
    _seen = set() if _seen is None else _seen
    key = path.resolve()
    if key in _seen:
        raise InputError(f"circular file reference through {path}")
    _seen = _seen | {key}
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError:
        raise InputError(f"input file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON in {path}: {exc}") from None
    validate(doc)
    for k in ("polytope", "cone", "weight", "filtration"):
        if isinstance(doc.get(k), str):
            other = load(path.parent / doc[k], _seen)
            if k not in other:
                raise InputError(f"{doc[k]} has no {k!r} entry")
            doc[k] = other[k]
    return doc


# -- builders ----------------------------------------------------------------------


def polytope_from(doc):
    from .polykernel.geometry import build_polytope

    if "polytope" in doc:
        p = doc["polytope"]
        if "vertices" in p:
            return build_polytope(vertices=[parse_vector(v) for v in p["vertices"]])
        return build_polytope(facets=[(parse_vector(f["normal"]), parse_number(f["offset"])) for f in p["facets"]])
    if "interval" in doc:
        from .toricfunc import interval

        a, b = (parse_number(x) for x in doc["interval"])
        return interval(a, b)
    raise InputError("input has no polytope or interval")


def weight_from(doc, polytope):
    from .weights import make_weight

    w = doc.get("weight")
    if w is None:
        return None
    xi = parse_vector(w["xi"]) if "xi" in w else None
    xbar = parse_vector(w["xbar"]) if "xbar" in w else None
    c = parse_number(w.get("c", 1))
    return make_weight(polytope, w["family"], xi=xi, xbar=xbar, n=w.get("n"), b=w.get("b"), c=c)


def cone_from(doc):
    from .fanocone import build_fano_cone

    c = doc.get("cone")
    if c is None:
        raise InputError("input has no cone")
    return build_fano_cone(moment_generators=c.get("moment_generators"), reeb_rays=c.get("reeb_rays"), n=c.get("n"))


def filtration_from(doc, polytope):
    from .nastab import PLFiltration

    f = doc.get("filtration")
    if f is None:
        raise InputError("input has no filtration")
    pieces = [(parse_vector(p["a"]), parse_number(p["b"])) for p in f["affine_pieces"]]
    return PLFiltration(polytope, pieces, f.get("combine", "min"))


def parse_cli_vector(text):
    """'3/4,3/4,3/4' -> raw strings (parsed by the consumer)."""
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise InputError("empty vector")
    return parts


def jsonable(x):
    """Fractions become strings, numpy scalars and arrays become floats."""
    import numpy as np

    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [jsonable(v) for v in x.tolist()]
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    return x


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"
