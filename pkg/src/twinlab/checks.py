"""Execute scenario-file checks and collect a machine-readable report.

Every check type is a thin adapter over one public library operation; the
adapter resolves named operands, calls the operation and turns its result into
a boolean verdict plus named residuals.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping

from . import delayed, events, measurement, observables
from ._version import __version__
from .errors import TheoremViolation, TwinlabError
from .hilbert import (
    DiscreteObservable,
    EventProjector,
    StateVector,
    UnitaryEvolution,
    spectral_decompose,
)
from .scenario_file import CHECK_TYPES, CheckSpec, ScenarioFile, ScenarioFileError, load
from .tolerances import Tolerances, is_marginal, resolve
from .verdict import TwinVerdict

__all__ = ["CheckRecord", "Report", "run_scenario", "run_check_file", "validate_checks", "ARGUMENTS"]


@dataclass
class CheckRecord:
    name: str
    type: str
    verdict: bool | None
    expected: bool
    matched: bool
    residuals: dict[str, float | None] = field(default_factory=dict)
    tolerances_used: dict[str, float] = field(default_factory=dict)
    marginal_flags: dict[str, bool] = field(default_factory=dict)
    error: str | None = None

    @property
    def status(self) -> str:
        if self.error is not None:
            return "errored"
        return "passed" if self.matched else "failed"

    def to_json(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "type": self.type,
            "verdict": self.verdict,
            "expected": self.expected,
            "matched": self.matched,
            "residuals": self.residuals,
            "tolerances_used": self.tolerances_used,
            "marginal_flags": self.marginal_flags,
            "error": self.error,
        }


@dataclass
class Report:
    records: list[CheckRecord]
    seed: int | None = None
    wall_time: float = 0.0
    name: str = ""

    @property
    def summary(self) -> dict[str, int]:
        counts = {"passed": 0, "failed": 0, "errored": 0}
        for r in self.records:
            counts[r.status] += 1
        return {"total": len(self.records), **counts}

    @property
    def exit_code(self) -> int:
        return 0 if all(r.status == "passed" for r in self.records) else 1

    def to_json(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "records": [r.to_json() for r in self.records],
            "summary": self.summary,
            "provenance": {"seed": self.seed, "tool_version": __version__, "wall_time": self.wall_time},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    def human(self) -> str:
        lines = []
        for r in self.records:
            tag = r.status.upper()
            detail = f"error: {r.error}" if r.error else f"verdict={r.verdict} expected={r.expected}"
            main = r.residuals.get("definition")
            if main is not None and not r.error:
                detail += f" residual={main:.3e}"
            lines.append(f"[{tag:7}] {r.name} ({r.type}) {detail}")
        s = self.summary
        lines.append(f"{s['total']} checks: {s['passed']} passed, {s['failed']} failed, {s['errored']} errored")
        return "\n".join(lines)


# --- operand resolution --------------------------------------------------------


class _Operands:
    """Named operands of one scenario, materialized with one check's tolerances."""

    def __init__(self, scenario: ScenarioFile, args: Mapping[str, Any], tol: Tolerances):
        self.scenario = scenario
        self.args = args
        self.tol = tol

    def projector(self, key: str) -> EventProjector:
        return EventProjector(self.scenario.operators[self.args[key]], tol=self.tol)

    def observable(self, key: str) -> DiscreteObservable:
        spec = self.scenario.observables[self.args[key]]
        ops = self.scenario.operators
        if spec.hermitian is not None:
            tol = self.tol if spec.cluster_tol is None else self.tol.replace(spec=spec.cluster_tol)
            return spectral_decompose(ops[spec.hermitian], tol)
        projectors = [EventProjector(ops[n], tol=self.tol) for n in spec.projectors or ()]
        return DiscreteObservable(zip(spec.values or (), projectors), tol=self.tol)

    def unitary(self, key: str) -> UnitaryEvolution:
        return self.scenario.unitaries[self.args[key]]

    def state(self, key: str = "state") -> StateVector:
        if key in self.args:
            return self.scenario.states[self.args[key]]
        return self.scenario.state

    def optional_state(self, key: str) -> StateVector | None:
        return self.scenario.states[self.args[key]] if key in self.args else None

    def get(self, key: str, default: Any) -> Any:
        return self.args.get(key, default)


@dataclass(frozen=True)
class Outcome:
    verdict: bool
    residuals: dict[str, float]
    marginal: dict[str, bool]


def _from_verdict(v: TwinVerdict, tol: Tolerances, require_consistent: bool = False) -> Outcome:
    if require_consistent and not v.consistent:
        bad = sorted(k for k, s in v.condition_sets.items() if s != v.is_twin)
        raise TheoremViolation(f"condition sets {bad} disagree with the definition (is_twin={v.is_twin})")
    residuals = v.residuals()
    marginal = {"definition": v.marginal}
    for c in v.per_condition:
        if not c.vacuous and math.isfinite(c.residual):
            marginal[c.label] = is_marginal(c.residual, tol.op)
    return Outcome(v.is_twin, residuals, marginal)


def _from_values(holds: bool, residuals: dict[str, float], threshold: float) -> Outcome:
    clean = {k: float(r) for k, r in residuals.items()}
    return Outcome(holds, clean, {k: is_marginal(r, threshold) for k, r in clean.items()})


def _measurement_outcome(v: measurement.MeasurementVerdict, tol: Tolerances) -> Outcome:
    res = {"max": v.residual, **{c.label: c.residual for c in v.per_branch}}
    return _from_values(v.holds, res, tol.op)


def _scheme(ops: _Operands) -> measurement.MeasurementScheme:
    return measurement.MeasurementScheme(
        measured=ops.observable("measured"),
        pointer=ops.observable("pointer"),
        pointer_init=ops.scenario.states[ops.args["pointer_init"]],
        premeasurement=ops.unitary("U"),
    )


def _c_simultaneous(o: _Operands) -> Outcome:
    return _from_verdict(events.is_twin(o.projector("E"), o.projector("F"), o.state(), o.tol), o.tol)


def _c_theorem1(o: _Operands) -> Outcome:
    v = events.verify_theorem1(o.projector("E"), o.projector("F"), o.state(), o.tol)
    return _from_verdict(v, o.tol, require_consistent=True)


def _c_theorem2(o: _Operands) -> Outcome:
    v = events.verify_theorem2(o.projector("E"), o.projector("F"), o.state(), o.tol)
    return _from_verdict(v, o.tol, require_consistent=True)


def _c_class_membership(o: _Operands) -> Outcome:
    e_prime, e, psi = o.projector("E_prime"), o.projector("E"), o.state()
    inside = events.in_class(e_prime, e, psi, o.tol)
    s = events.class_structure(e_prime, e, psi, o.tol)
    res = {
        "definition": events.is_twin(e_prime, e, psi, o.tol).residual,
        "hermitian": s.hermitian,
        "idempotent": s.idempotent,
        "kills_psi": s.kills_psi,
        "orthogonal_to_minimal": s.orthogonal_to_minimal,
        "minimality": s.minimality,
    }
    return _from_values(inside, res, o.tol.op)


def _c_twin_observables(o: _Operands) -> Outcome:
    v = observables.is_twin_observables(o.observable("O"), o.observable("O_prime"), o.state(), o.tol)
    return _from_verdict(v, o.tol)


def _c_corollary1(o: _Operands) -> Outcome:
    v = observables.verify_corollary1(o.observable("O"), o.observable("O_prime"), o.state(), o.tol)
    return _from_verdict(v, o.tol, require_consistent=True)


def _c_delayed_twin(o: _Operands) -> Outcome:
    v = delayed.is_delayed_twin(o.projector("E"), o.projector("F"), o.state(), o.unitary("U"), o.tol)
    return _from_verdict(v, o.tol)


def _c_theorem5(o: _Operands) -> Outcome:
    v = delayed.verify_theorem5(o.projector("E"), o.projector("F"), o.state(), o.unitary("U"), o.tol)
    return _from_verdict(v, o.tol, require_consistent=True)


def _c_theorem6(o: _Operands) -> Outcome:
    v = delayed.verify_theorem6(o.observable("O"), o.observable("O_prime"), o.state(), o.unitary("U"), o.tol)
    return _from_verdict(v, o.tol, require_consistent=True)


def _c_delayed_twin_observables(o: _Operands) -> Outcome:
    v = delayed.is_delayed_twin_observables(
        o.observable("O"), o.observable("O_prime"), o.state(), o.unitary("U"), o.tol
    )
    return _from_verdict(v, o.tol)


def _c_theorem7(o: _Operands) -> Outcome:
    cmp = delayed.compare_nonselective(
        o.observable("O"), o.observable("O_prime"), o.state(), o.unitary("U"), o.tol,
        force=bool(o.get("force", False)),
    )
    res = {"frobenius": cmp.frobenius_residual, "max_weight_gap": cmp.max_weight_gap}
    holds = cmp.frobenius_residual <= o.tol.norm and cmp.max_weight_gap <= o.tol.norm
    return _from_values(holds, res, o.tol.norm)


def _c_proposition1(o: _Operands) -> Outcome:
    seed = o.get("seed", o.scenario.seed if o.scenario.seed is not None else 0)
    r = delayed.verify_proposition1(
        o.projector("E"), o.state(), o.unitary("U"), int(o.get("samples", 20)), int(seed), o.tol
    )
    res = {
        "max_forward": max(r.forward, default=0.0),
        "max_backward": max(r.backward, default=0.0),
        "minimal_transport": r.minimal_transport,
    }
    return _from_values(r.holds, res, o.tol.op)


def _c_proposition2(o: _Operands) -> Outcome:
    r = delayed.verify_proposition2(
        o.projector("E"), o.projector("E_prime"), o.projector("F"), o.projector("F_prime"),
        o.state(), o.unitary("U"), o.tol,
    )
    return _from_values(r.holds, r.residuals, o.tol.op)


def _c_pair_equivalence(o: _Operands) -> Outcome:
    e, f, e2, f2 = o.projector("E"), o.projector("F"), o.projector("E_prime"), o.projector("F_prime")
    psi, u = o.state(), o.unitary("U")
    same = delayed.pairs_equivalent(e, f, e2, f2, psi, u, o.tol)
    res = {
        "early": events.is_twin(e, e2, psi, o.tol).residual,
        "late": events.is_twin(f, f2, u.apply(psi), o.tol).residual,
    }
    return _from_values(same, res, o.tol.op)


def _c_chain(o: _Operands) -> Outcome:
    v = delayed.chain(
        o.observable("O"), o.observable("O_prime"), o.observable("O_dprime"),
        o.state(), o.unitary("U1"), o.unitary("U2"), o.tol,
    )
    return _from_verdict(v, o.tol)


def _c_calibration(o: _Operands) -> Outcome:
    v = measurement.check_calibration(_scheme(o), o.optional_state("input"), o.tol)
    return _measurement_outcome(v, o.tol)


def _c_probability_reproducibility(o: _Operands) -> Outcome:
    v = measurement.check_probability_reproducibility(_scheme(o), o.state("input"), o.tol)
    return _measurement_outcome(v, o.tol)


def _c_branch_relation(o: _Operands) -> Outcome:
    v = measurement.check_branch_relation(_scheme(o), o.state("input"), o.tol)
    return _measurement_outcome(v, o.tol)


_P, _O, _U, _S, _I, _B = "operator", "observable", "unitary", "state", "integer", "boolean"

# check type -> (handler, required args, optional args); each arg maps to its kind
ARGUMENTS: dict[str, tuple[Callable[[_Operands], Outcome], dict[str, str], dict[str, str]]] = {
    "simultaneous_twin": (_c_simultaneous, {"E": _P, "F": _P}, {"state": _S}),
    "theorem1": (_c_theorem1, {"E": _P, "F": _P}, {"state": _S}),
    "theorem2": (_c_theorem2, {"E": _P, "F": _P}, {"state": _S}),
    "class_membership": (_c_class_membership, {"E": _P, "E_prime": _P}, {"state": _S}),
    "twin_observables": (_c_twin_observables, {"O": _O, "O_prime": _O}, {"state": _S}),
    "corollary1": (_c_corollary1, {"O": _O, "O_prime": _O}, {"state": _S}),
    "delayed_twin": (_c_delayed_twin, {"E": _P, "F": _P, "U": _U}, {"state": _S}),
    "theorem5": (_c_theorem5, {"E": _P, "F": _P, "U": _U}, {"state": _S}),
    "theorem6": (_c_theorem6, {"O": _O, "O_prime": _O, "U": _U}, {"state": _S}),
    "theorem7": (_c_theorem7, {"O": _O, "O_prime": _O, "U": _U}, {"state": _S, "force": _B}),
    "proposition1": (_c_proposition1, {"E": _P, "U": _U}, {"state": _S, "samples": _I, "seed": _I}),
    "proposition2": (
        _c_proposition2,
        {"E": _P, "E_prime": _P, "F": _P, "F_prime": _P, "U": _U},
        {"state": _S},
    ),
    "pair_equivalence": (
        _c_pair_equivalence,
        {"E": _P, "F": _P, "E_prime": _P, "F_prime": _P, "U": _U},
        {"state": _S},
    ),
    "chain": (
        _c_chain,
        {"O": _O, "O_prime": _O, "O_dprime": _O, "U1": _U, "U2": _U},
        {"state": _S},
    ),
    "calibration": (
        _c_calibration,
        {"measured": _O, "pointer": _O, "pointer_init": _S, "U": _U},
        {"input": _S},
    ),
    "probability_reproducibility": (
        _c_probability_reproducibility,
        {"measured": _O, "pointer": _O, "pointer_init": _S, "U": _U},
        {"input": _S},
    ),
    "branch_relation": (
        _c_branch_relation,
        {"measured": _O, "pointer": _O, "pointer_init": _S, "U": _U},
        {"input": _S},
    ),
    "delayed_twin_observables": (_c_delayed_twin_observables, {"O": _O, "O_prime": _O, "U": _U}, {"state": _S}),
}
assert set(ARGUMENTS) == set(CHECK_TYPES)


def _namespace(scenario: ScenarioFile, kind: str) -> Mapping[str, Any]:
    return {
        _P: scenario.operators,
        _O: scenario.observables,
        _U: scenario.unitaries,
        _S: scenario.states,
    }[kind]


def validate_checks(scenario: ScenarioFile) -> None:
    """Argument names and kinds of every check; raises ``ScenarioFileError``."""
    for i, check in enumerate(scenario.checks):
        where = f"checks/{i}/args"
        _, required, optional = ARGUMENTS[check.type]
        allowed = {**required, **optional}
        missing = sorted(set(required) - set(check.args))
        if missing:
            raise ScenarioFileError(f"{check.type} needs arguments {missing}", where)
        for key, value in check.args.items():
            if key not in allowed:
                raise ScenarioFileError(f"unexpected argument {key!r} for {check.type}", where)
            kind = allowed[key]
            if kind == _I:
                # an integer literal, not a name
                ok = isinstance(value, int) and not isinstance(value, bool)
            elif kind == _B:
                ok = isinstance(value, bool)
            else:
                ok = isinstance(value, str) and value in _namespace(scenario, kind)
            if not ok:
                raise ScenarioFileError(f"{key!r} must name a {kind}, got {value!r}", f"{where}/{key}")


def _check_tolerances(
    scenario: ScenarioFile, check: CheckSpec, base: Tolerances, overrides: Mapping[str, float] | None
) -> Tolerances:
    tol = Tolerances.from_mapping(scenario.tolerances, base)
    tol = Tolerances.from_mapping(check.tolerances or {}, tol)
    return Tolerances.from_mapping({k: v for k, v in (overrides or {}).items() if v is not None}, tol)


def _finite(d: Mapping[str, float | None]) -> dict[str, float | None]:
    return {k: (v if v is not None and math.isfinite(v) else None) for k, v in d.items()}


def run_check(
    scenario: ScenarioFile,
    check: CheckSpec,
    base: Tolerances | None = None,
    overrides: Mapping[str, float] | None = None,
) -> CheckRecord:
    tol = _check_tolerances(scenario, check, resolve(base), overrides)
    expected = True if check.expect is None else check.expect
    handler = ARGUMENTS[check.type][0]
    record = CheckRecord(
        name=check.name, type=check.type, verdict=None, expected=expected, matched=False,
        tolerances_used=tol.as_dict(),
    )
    try:
        outcome = handler(_Operands(scenario, check.args, tol))
    except (TwinlabError, ValueError, KeyError) as exc:
        record.error = f"{type(exc).__name__}: {exc}"
        return record
    record.verdict = bool(outcome.verdict)
    record.matched = record.verdict == expected
    record.residuals = _finite(outcome.residuals)
    record.marginal_flags = dict(outcome.marginal)
    return record


def run_scenario(
    scenario: ScenarioFile,
    base: Tolerances | None = None,
    overrides: Mapping[str, float] | None = None,
) -> Report:
    """Run every check in order; invalid check arguments raise ``ScenarioFileError``."""
    validate_checks(scenario)
    start = time.perf_counter()
    records = [run_check(scenario, c, base, overrides) for c in scenario.checks]
    return Report(records, seed=scenario.seed, wall_time=time.perf_counter() - start, name=scenario.name)


def run_check_file(
    path: str | Path,
    overrides: Mapping[str, float] | None = None,
    base: Tolerances | None = None,
) -> Report:
    base = Tolerances.from_env() if base is None else base
    scenario = load(path, base, dict(overrides or {}))
    return run_scenario(scenario, base, overrides)
