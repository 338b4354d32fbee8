"""Experiment configuration: JSON schema, line-anchored validation and object builders.

Complex matrices are nested lists whose entries are either real numbers or
``[re, im]`` pairs.  Lorentz elements are either ``{"matrix": 4x4}`` or
``{"ops": [...]}`` with ops ``{"boost": {"rapidity", "axis"}}`` and
``{"rotation": {"axis", "angle"}}`` multiplied left to right.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

import jsonschema
import numpy as np

from .little_group import FourMomentum, LorentzTransform

SCHEMES = ("massive", "massless", "dyon", "total-momentum", "slocc")

_num = {"type": "number"}
_vec3 = {"type": "array", "items": _num, "minItems": 3, "maxItems": 3}
_label = {"type": ["string", "number"]}
_entry = {"oneOf": [_num, {"type": "array", "items": _num, "minItems": 2, "maxItems": 2}]}
_matrix = {"type": "array", "minItems": 1, "items": {"type": "array", "minItems": 1, "items": _entry}}
_element = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "matrix": {"type": "array", "minItems": 4, "maxItems": 4,
                   "items": {"type": "array", "items": _num, "minItems": 4, "maxItems": 4}},
        "ops": {
            "type": "array",
            "items": {
                "type": "object",
                "minProperties": 1,
                "maxProperties": 1,
                "additionalProperties": False,
                "properties": {
                    "boost": {"type": "object", "required": ["rapidity", "axis"], "additionalProperties": False,
                              "properties": {"rapidity": _num, "axis": _vec3}},
                    "rotation": {"type": "object", "required": ["angle", "axis"], "additionalProperties": False,
                                 "properties": {"angle": _num, "axis": _vec3}},
                },
            },
        },
    },
    "oneOf": [{"required": ["matrix"]}, {"required": ["ops"]}],
}
_species = {
    "type": "object",
    "required": ["charge", "mass", "momentum"],
    "additionalProperties": False,
    "properties": {
        "charge": {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2},
        "mass": {"type": "number", "exclusiveMinimum": 0},
        "momentum": _vec3,
        "spin": _label,
    },
}
_branch = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "bit": {"enum": [0, 1]},
        "charges": {"type": "array", "minItems": 2,
                    "items": {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2}},
    },
    "oneOf": [{"required": ["bit"]}, {"required": ["charges"]}],
}

SCHEMA = {
    "type": "object",
    "required": ["scheme"],
    "additionalProperties": False,
    "properties": {
        "scheme": {"enum": list(SCHEMES)},
        "N": {"type": "integer", "minimum": 1},
        "spin": _label,
        "description": {"type": "string"},
        "kinematics": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "mass": {"type": "number", "minimum": 0},
                "momentum": _vec3,
                "mandelstam": {"type": "number", "exclusiveMinimum": 0},
                "J": _label,
                "labels": {"type": "array", "minItems": 1, "items": {"type": "array", "items": _label}},
                "helicity": {"type": "number", "exclusiveMinimum": 0},
                "species": {"type": "array", "minItems": 2, "items": _species},
            },
        },
        "blocks": {"type": "object", "additionalProperties": _matrix, "minProperties": 1},
        "product_state": {"type": "array", "items": {"enum": [0, 1]}, "minItems": 1},
        "branches": {"type": "array", "items": _branch, "minItems": 2, "maxItems": 2},
        "amplitudes": {"type": "array", "items": _entry, "minItems": 2, "maxItems": 2},
        "model": {"enum": ["species", "ordered"]},
        "measure": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["parametric", "delta", "discrete", "slocc"]},
                "samples": {"type": "integer", "minimum": 1},
                "rapidity": {"enum": ["half-gaussian", "gaussian", "student-t", "none"]},
                "sigma": {"type": "number", "minimum": 0},
                "df": {"type": "number", "exclusiveMinimum": 0},
                "max_rapidity": {"type": "number", "exclusiveMinimum": 0},
                "boost_axis": {"oneOf": [_vec3, {"type": "null"}]},
                "rotation": {"enum": ["uniform", "z", "none"]},
                "element": _element,
                "elements": {"type": "array", "items": _element, "minItems": 1},
                "weights": {"type": "array", "items": {"type": "number", "minimum": 0}},
                "log_a_sigma": {"type": "number", "minimum": 0},
                "compact": {"enum": ["haar", "clifford"]},
                "groups": {"type": "integer", "minimum": 2},
                "z_limit": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "seed": {"type": "integer", "minimum": 0},
        "threshold": {"type": "number", "minimum": 0},
        "expect": {"enum": ["invariant", "violation"]},
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"report": {"type": "string"}, "csv": {"type": "string"}},
        },
    },
}


class ConfigError(ValueError):
    """Invalid configuration; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None, path: str = ""):
        self.line, self.path, self.message = line, path, message
        where = f"line {line}: " if line else ""
        at = f"{path}: " if path else ""
        super().__init__(f"{where}{at}{message}")


# --- source positions ------------------------------------------------------------

def _line_of(text: str, pos: int) -> int:
    return text.count("\n", 0, pos) + 1


def _skip_ws(text: str, i: int) -> int:
    while i < len(text) and text[i] in " \t\r\n":
        i += 1
    return i


def value_lines(text: str) -> dict:
    """Map JSON paths (tuples of keys/indices) to the line where each value starts."""
    dec = json.JSONDecoder()
    lines = {}

    def walk(i, path):
        i = _skip_ws(text, i)
        lines[path] = _line_of(text, i)
        ch = text[i]
        if ch == "{":
            i = _skip_ws(text, i + 1)
            if text[i] == "}":
                return i + 1
            while True:
                key, i = dec.raw_decode(text, i)
                lines[path + (key,)] = _line_of(text, i)
                i = _skip_ws(text, i)
                i = walk(i + 1, path + (key,))
                i = _skip_ws(text, i)
                if text[i] == "}":
                    return i + 1
                i = _skip_ws(text, i + 1)
        if ch == "[":
            i = _skip_ws(text, i + 1)
            if text[i] == "]":
                return i + 1
            k = 0
            while True:
                i = walk(i, path + (k,))
                i = _skip_ws(text, i)
                if text[i] == "]":
                    return i + 1
                i += 1
                k += 1
        _, end = dec.raw_decode(text, i)
        return end

    walk(0, ())
    return lines


def _fmt_path(path) -> str:
    return "$" + "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in path)


def _nearest_line(lines: dict, path: tuple) -> int | None:
    path = tuple(path)
    while path not in lines and path:
        path = path[:-1]
    return lines.get(path)


def parse_config_text(text: str) -> tuple[dict, dict]:
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc.msg} (column {exc.colno})", exc.lineno) from None
    lines = value_lines(text)
    if not isinstance(cfg, dict):
        raise ConfigError("top level must be an object", 1)
    errors = sorted(jsonschema.Draft202012Validator(SCHEMA).iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        raise ConfigError(e.message, _nearest_line(lines, tuple(e.absolute_path)), _fmt_path(e.absolute_path))
    return cfg, lines


def load_config(path) -> tuple[dict, dict]:
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}") from None
    return parse_config_text(text)


# --- builders -------------------------------------------------------------------

def complex_matrix(m) -> np.ndarray:
    rows = []
    for row in m:
        rows.append([complex(x[0], x[1]) if isinstance(x, list) else complex(x) for x in row])
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValueError("matrix rows have different lengths")
    return np.array(rows, dtype=complex)


def complex_scalar(x) -> complex:
    return complex(x[0], x[1]) if isinstance(x, list) else complex(x)


def lorentz_element(desc: dict) -> LorentzTransform:
    if "matrix" in desc:
        return LorentzTransform(np.array(desc["matrix"], dtype=float), (("matrix",),))
    out = LorentzTransform.identity()
    for op in desc["ops"]:
        if "boost" in op:
            out = out @ LorentzTransform.boost(op["boost"]["rapidity"], op["boost"]["axis"])
        else:
            out = out @ LorentzTransform.rotation(op["rotation"]["axis"], op["rotation"]["angle"])
    return out


def momentum(mass: float, p3) -> FourMomentum:
    return FourMomentum.massive(mass, p3) if mass > 0 else FourMomentum.massless(p3)


def spin_label(x) -> Fraction:
    return Fraction(str(x)).limit_denominator(2)


@dataclass
class Located:
    """Config value plus the path used for diagnostics when building fails."""

    cfg: dict
    lines: dict

    def error(self, path: tuple, message: str) -> ConfigError:
        return ConfigError(message, _nearest_line(self.lines, path), _fmt_path(path))
