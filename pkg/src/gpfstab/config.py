"""JSON system-spec files: schema, loading and validation.

A spec file (``"schema": 1``) carries the system parameters, the initial
history under ``"phi"`` and the stability box under ``"box"``. See
``data/example1.json`` for a complete instance.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema

from .certify import StabilityBox
from .history import InitialHistory, history_from_dict
from .solver import Nonlinearity, SystemSpec

__all__ = [
    "BUNDLED",
    "LoadedSpec",
    "SPEC_SCHEMA",
    "SpecError",
    "SpecInvariantError",
    "SpecParseError",
    "SpecSchemaError",
    "load_spec",
    "parse_spec",
    "spec_to_dict",
]

BUNDLED = ("example1", "example2")

_NUMBER = {"type": "number"}
_VECTOR = {"type": "array", "items": _NUMBER, "minItems": 1}
_MATRIX = {"type": "array", "items": _VECTOR, "minItems": 1}

SPEC_SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema", "alpha", "mu", "tau", "T", "A", "B", "phi", "box"],
    "additionalProperties": False,
    "properties": {
        "schema": {"const": 1},
        "name": {"type": "string"},
        "description": {"type": "string"},
        "alpha": _NUMBER,
        "mu": _NUMBER,
        "tau": _NUMBER,
        "T": _NUMBER,
        "A": _MATRIX,
        "B": _MATRIX,
        "f": {
            "type": "object",
            "required": ["kind"],
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["zero", "scaled-tanh", "custom"]},
                "c": _NUMBER,
                "Lf": _NUMBER,
                "hook": {"type": "string", "pattern": "^[A-Za-z_][\\w.]*:[A-Za-z_]\\w*$"},
            },
            "allOf": [
                {"if": {"properties": {"kind": {"const": "scaled-tanh"}}},
                 "then": {"required": ["c"]}},
                {"if": {"properties": {"kind": {"const": "custom"}}},
                 "then": {"required": ["hook", "Lf"]}},
            ],
        },
        "phi": {
            "type": "object",
            "required": ["kind"],
            "oneOf": [
                {
                    "properties": {"kind": {"const": "constant"}, "value": _VECTOR},
                    "required": ["value"],
                    "additionalProperties": False,
                },
                {
                    "properties": {
                        "kind": {"const": "tanh"},
                        "amplitude": _VECTOR,
                        "rate": _NUMBER,
                        "shift": _NUMBER,
                    },
                    "required": ["amplitude"],
                    "additionalProperties": False,
                },
                {
                    "properties": {
                        "kind": {"const": "sampled"},
                        "grid": {"type": "array", "items": _NUMBER, "minItems": 2},
                        "values": {"type": "array", "minItems": 2,
                                   "items": {"oneOf": [_NUMBER, _VECTOR]}},
                    },
                    "required": ["grid", "values"],
                    "additionalProperties": False,
                },
            ],
        },
        "box": {
            "type": "object",
            "required": ["c1", "c2"],
            "additionalProperties": False,
            "properties": {"c1": _NUMBER, "c2": _NUMBER, "T": _NUMBER},
        },
    },
}


class SpecError(ValueError):
    """Base class for spec-file problems."""

    kind = "spec error"

    def __str__(self) -> str:
        return f"{self.kind}: {super().__str__()}"


class SpecParseError(SpecError):
    kind = "parse error"


class SpecSchemaError(SpecError):
    kind = "schema error"


class SpecInvariantError(SpecError):
    kind = "invariant error"


@dataclass(frozen=True)
class LoadedSpec:
    system: SystemSpec
    phi: InitialHistory
    box: StabilityBox
    name: str = ""


def _field_path(err: jsonschema.ValidationError) -> str:
    return "$" + "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in err.absolute_path)


def parse_spec(data: Any) -> LoadedSpec:
    """Validate an already-decoded spec document."""
    validator = jsonschema.Draft202012Validator(SPEC_SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise SpecSchemaError(f"{_field_path(err)}: {err.message}")

    try:
        fdata = data.get("f", {"kind": "zero"})
        f = Nonlinearity(
            kind=fdata["kind"],
            c=float(fdata.get("c", 0.0)),
            lipschitz=fdata.get("Lf"),
            hook=fdata.get("hook"),
        )
        system = SystemSpec(
            alpha=float(data["alpha"]),
            mu=float(data["mu"]),
            tau=float(data["tau"]),
            T=float(data["T"]),
            A=data["A"],
            B=data["B"],
            f=f,
        )
        phi = history_from_dict(data["phi"], system.tau)
        if phi.dim != system.dim:
            raise ValueError(f"$.phi has dimension {phi.dim}, system matrices are {system.dim}x{system.dim}")
        bx = data["box"]
        T_box = float(bx.get("T", system.T))
        if T_box != system.T:
            raise ValueError(f"$.box.T = {T_box} differs from $.T = {system.T}")
        box = StabilityBox(float(bx["c1"]), float(bx["c2"]), T_box)
    except ValueError as exc:
        raise SpecInvariantError(str(exc)) from None
    return LoadedSpec(system, phi, box, str(data.get("name", "")))


def load_spec(path: str | Path) -> LoadedSpec:
    """Load and validate a spec file, or one of the bundled names in :data:`BUNDLED`."""
    p = Path(path)
    if not p.exists() and str(path) in BUNDLED:
        text = resources.files("gpfstab.data").joinpath(f"{path}.json").read_text()
        source = f"<bundled {path}>"
    else:
        try:
            text = p.read_text()
        except OSError as exc:
            raise SpecParseError(f"cannot read {path}: {exc.strerror}") from None
        source = str(p)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecParseError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return parse_spec(data)


def spec_to_dict(spec: LoadedSpec) -> dict[str, Any]:
    out: dict[str, Any] = {"schema": 1}
    if spec.name:
        out["name"] = spec.name
    out.update(spec.system.to_dict())
    out["phi"] = spec.phi.to_dict()
    out["box"] = {"c1": spec.box.c1, "c2": spec.box.c2, "T": spec.box.T}
    return out
