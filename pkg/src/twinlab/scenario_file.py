"""JSON scenario files (schema version "1").

Complex numbers are ``[re, im]`` pairs, matrices are row-major lists of rows.
Floats go through ``json`` unchanged, so export followed by load reproduces
every array bit for bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from .errors import TwinlabError
from .hilbert import DiscreteObservable, EventProjector, StateVector, UnitaryEvolution, frob
from .tolerances import Tolerances, resolve

SCHEMA_VERSION = "1"

CHECK_TYPES = (
    "simultaneous_twin",
    "theorem1",
    "theorem2",
    "class_membership",
    "twin_observables",
    "corollary1",
    "delayed_twin",
    "theorem5",
    "theorem6",
    "theorem7",
    "proposition1",
    "proposition2",
    "pair_equivalence",
    "chain",
    "calibration",
    "probability_reproducibility",
    "branch_relation",
    "delayed_twin_observables",
)

_TOLERANCES = {
    "type": "object",
    "properties": {k: {"type": "number", "exclusiveMinimum": 0} for k in ("norm", "op", "prob", "p_min", "spec")},
    "additionalProperties": False,
}
_COMPLEX = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_VECTOR = {"type": "array", "items": _COMPLEX, "minItems": 1}
_MATRIX = {"type": "array", "items": _VECTOR, "minItems": 1}

SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["schema_version", "dimension", "state", "checks"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string"},
        "dimension": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer"},
        "state": _VECTOR,
        "states": {"type": "object", "additionalProperties": _VECTOR},
        "operators": {"type": "object", "additionalProperties": _MATRIX},
        "unitaries": {"type": "object", "additionalProperties": _MATRIX},
        "observables": {
            "type": "object",
            "additionalProperties": {
                "oneOf": [
                    {
                        "type": "object",
                        "required": ["values", "projectors"],
                        "properties": {
                            "values": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                            "projectors": {"type": "array", "items": {"type": "string"}, "minItems": 1},
                        },
                        "additionalProperties": False,
                    },
                    {
                        "type": "object",
                        "required": ["hermitian"],
                        "properties": {
                            "hermitian": {"type": "string"},
                            "cluster_tol": {"type": "number", "exclusiveMinimum": 0},
                        },
                        "additionalProperties": False,
                    },
                ]
            },
        },
        "tolerances": _TOLERANCES,
        "checks": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["type", "args"],
                "properties": {
                    "name": {"type": "string"},
                    "type": {"enum": list(CHECK_TYPES)},
                    "args": {"type": "object"},
                    "expect": {"type": "boolean"},
                    "tolerances": _TOLERANCES,
                },
                "additionalProperties": False,
            },
        },
    },
    "additionalProperties": False,
}


class ScenarioFileError(TwinlabError):
    """The file is not a valid scenario; ``where`` names the offending location."""

    def __init__(self, message: str, where: str = ""):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)


@dataclass(frozen=True)
class ObservableSpec:
    values: tuple[float, ...] | None = None
    projectors: tuple[str, ...] | None = None
    hermitian: str | None = None
    cluster_tol: float | None = None

    def to_json(self) -> dict[str, Any]:
        if self.hermitian is not None:
            out: dict[str, Any] = {"hermitian": self.hermitian}
            if self.cluster_tol is not None:
                out["cluster_tol"] = self.cluster_tol
            return out
        return {"values": list(self.values or ()), "projectors": list(self.projectors or ())}


@dataclass(frozen=True)
class CheckSpec:
    type: str
    args: dict[str, Any]
    name: str = ""
    expect: bool | None = None
    tolerances: dict[str, float] | None = None

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"name": self.name, "type": self.type, "args": dict(self.args)}
        if self.expect is not None:
            out["expect"] = self.expect
        if self.tolerances:
            out["tolerances"] = dict(self.tolerances)
        return out


@dataclass
class ScenarioFile:
    """In-memory form of a scenario file; operands are referenced by name from checks."""

    dimension: int
    state: StateVector
    checks: list[CheckSpec]
    name: str = ""
    seed: int | None = None
    states: dict[str, StateVector] = field(default_factory=dict)
    operators: dict[str, np.ndarray] = field(default_factory=dict)
    unitaries: dict[str, UnitaryEvolution] = field(default_factory=dict)
    observables: dict[str, ObservableSpec] = field(default_factory=dict)
    tolerances: dict[str, float] = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"schema_version": SCHEMA_VERSION}
        if self.name:
            out["name"] = self.name
        out["dimension"] = self.dimension
        if self.seed is not None:
            out["seed"] = self.seed
        out["state"] = encode_vector(self.state.amplitudes)
        if self.states:
            out["states"] = {k: encode_vector(v.amplitudes) for k, v in self.states.items()}
        if self.operators:
            out["operators"] = {k: encode_matrix(v) for k, v in self.operators.items()}
        if self.unitaries:
            out["unitaries"] = {k: encode_matrix(v.matrix) for k, v in self.unitaries.items()}
        if self.observables:
            out["observables"] = {k: v.to_json() for k, v in self.observables.items()}
        if self.tolerances:
            out["tolerances"] = dict(self.tolerances)
        out["checks"] = [c.to_json() for c in self.checks]
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps() + "\n", encoding="utf-8")


def encode_vector(v: np.ndarray) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=np.complex128)]


def encode_matrix(m: np.ndarray) -> list[list[list[float]]]:
    return [encode_vector(row) for row in np.asarray(m, dtype=np.complex128)]


def _decode(data: list, where: str) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ScenarioFileError("non-finite entry", where)
    out = np.empty(arr.shape[:-1], dtype=np.complex128)
    out.real, out.imag = arr[..., 0], arr[..., 1]
    return out


def _decode_matrix(data: list, where: str) -> np.ndarray:
    lengths = {len(row) for row in data}
    if len(lengths) != 1:
        raise ScenarioFileError(f"ragged matrix rows (lengths {sorted(lengths)})", where)
    m = _decode(data, where)
    if m.shape[0] != m.shape[1]:
        raise ScenarioFileError(f"matrix is {m.shape[0]}x{m.shape[1]}, expected square", where)
    return m


def _check_tolerances(data: dict, where: str) -> None:
    try:
        Tolerances.from_mapping(data)
    except ValueError as exc:
        raise ScenarioFileError(str(exc), where) from None


def effective_tolerances(
    base: Tolerances | None, file_level: dict[str, float], overrides: dict[str, float] | None
) -> Tolerances:
    """Defaults, then file-level values, then explicit overrides (CLI flags)."""
    tol = Tolerances.from_mapping(file_level, resolve(base))
    return Tolerances.from_mapping({k: v for k, v in (overrides or {}).items() if v is not None}, tol)


def parse_scenario(
    data: Any, base: Tolerances | None = None, overrides: dict[str, float] | None = None
) -> ScenarioFile:
    """Validate decoded JSON and build a :class:`ScenarioFile`.

    States and unitaries are validated with the file's effective tolerances.
    """
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise ScenarioFileError(err.message, where)
    if "tolerances" in data:
        _check_tolerances(data["tolerances"], "tolerances")
    tol = effective_tolerances(base, data.get("tolerances", {}), overrides)

    def state(raw: list, where: str) -> StateVector:
        try:
            return StateVector(_decode(raw, where), tol=tol)
        except TwinlabError as exc:
            raise ScenarioFileError(str(exc), where) from None

    dim = data["dimension"]
    main = state(data["state"], "state")
    if main.dim != dim:
        raise ScenarioFileError(f"state has {main.dim} amplitudes, dimension is {dim}", "state")
    states = {k: state(v, f"states/{k}") for k, v in data.get("states", {}).items()}
    operators = {k: _decode_matrix(v, f"operators/{k}") for k, v in data.get("operators", {}).items()}
    for k, m in operators.items():
        herm = frob(m - m.conj().T)
        if herm > tol.op:
            raise ScenarioFileError(f"operator is not Hermitian (|M - M^dag|_F = {herm:.3e})", f"operators/{k}")
    unitaries = {}
    for k, v in data.get("unitaries", {}).items():
        where = f"unitaries/{k}"
        try:
            unitaries[k] = UnitaryEvolution(_decode_matrix(v, where), tol=tol)
        except TwinlabError as exc:
            if isinstance(exc, ScenarioFileError):
                raise
            raise ScenarioFileError(str(exc), where) from None

    observables = {}
    for k, v in data.get("observables", {}).items():
        where = f"observables/{k}"
        if "hermitian" in v:
            if v["hermitian"] not in operators:
                raise ScenarioFileError(f"unknown operator {v['hermitian']!r}", where)
            observables[k] = ObservableSpec(hermitian=v["hermitian"], cluster_tol=v.get("cluster_tol"))
        else:
            if len(v["values"]) != len(v["projectors"]):
                raise ScenarioFileError("values and projectors differ in length", where)
            for name in v["projectors"]:
                if name not in operators:
                    raise ScenarioFileError(f"unknown operator {name!r}", where)
            try:
                DiscreteObservable(
                    zip(v["values"], (EventProjector(operators[n], tol=tol) for n in v["projectors"])), tol=tol
                )
            except TwinlabError as exc:
                raise ScenarioFileError(str(exc), where) from None
            observables[k] = ObservableSpec(
                values=tuple(float(x) for x in v["values"]), projectors=tuple(v["projectors"])
            )

    known = set(operators) | set(unitaries) | set(observables) | set(states)
    checks = []
    for i, c in enumerate(data["checks"]):
        where = f"checks/{i}"
        for arg, ref in c["args"].items():
            if isinstance(ref, str) and ref not in known:
                raise ScenarioFileError(f"argument {arg!r} refers to unknown name {ref!r}", f"{where}/args/{arg}")
        if "tolerances" in c:
            _check_tolerances(c["tolerances"], f"{where}/tolerances")
        checks.append(
            CheckSpec(
                type=c["type"],
                args=dict(c["args"]),
                name=c.get("name", f"{c['type']}#{i}"),
                expect=c.get("expect"),
                tolerances=c.get("tolerances"),
            )
        )
    return ScenarioFile(
        dimension=dim,
        state=main,
        checks=checks,
        name=data.get("name", ""),
        seed=data.get("seed"),
        states=states,
        operators=operators,
        unitaries=unitaries,
        observables=observables,
        tolerances=dict(data.get("tolerances", {})),
    )


def loads(
    text: str, base: Tolerances | None = None, overrides: dict[str, float] | None = None
) -> ScenarioFile:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioFileError(exc.msg, f"line {exc.lineno}, column {exc.colno}") from None
    return parse_scenario(data, base, overrides)


def load(
    path: str | Path, base: Tolerances | None = None, overrides: dict[str, float] | None = None
) -> ScenarioFile:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioFileError(str(exc), str(path)) from None
    return loads(text, base, overrides)
