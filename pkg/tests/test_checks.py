import copy
import json

import numpy as np
import pytest

from twinlab import DiscreteObservable, EventProjector, Tolerances, run_check_file, run_scenario
from twinlab.checks import ARGUMENTS, validate_checks
from twinlab.measurement import build_nondemolition_premeasurement
from twinlab.sampling import haar_matrix
from twinlab.scenario_file import CHECK_TYPES, ScenarioFileError, encode_matrix, encode_vector, parse_scenario

from conftest import SQ2, proj

EYE = np.eye(2)
U1 = haar_matrix(4, 11)
U2 = haar_matrix(4, 12)


def _conj(u, p):
    return u @ p @ u.conj().T


def _document():
    """A 2x2 file exercising every check type with a true expectation."""
    up_a, down_a = np.kron(proj(2, 0), EYE), np.kron(proj(2, 1), EYE)
    up_b, down_b = np.kron(EYE, proj(2, 0)), np.kron(EYE, proj(2, 1))
    sz = [(1.0, proj(2, 0)), (-1.0, proj(2, 1))]
    scheme = build_nondemolition_premeasurement(DiscreteObservable((v, EventProjector(p)) for v, p in sz), 2)
    ops = {
        "up_A": up_a,
        "down_A": down_a,
        "up_B": up_b,
        "down_B": down_b,
        "E0": proj(4, 1),
        "t_up": _conj(U1, up_a),
        "t_down": _conj(U1, down_a),
        "tt_up": _conj(U2 @ U1, up_a),
        "tt_down": _conj(U2 @ U1, down_a),
        "q0": proj(2, 0),
        "q1": proj(2, 1),
    }
    return {
        "schema_version": "1",
        "name": "all checks",
        "dimension": 4,
        "seed": 5,
        "state": encode_vector(np.array([0, 1, -1, 0]) / SQ2),
        "states": {"ready": encode_vector([1, 0]), "plus": encode_vector(np.array([1, 1]) / SQ2), "zero": encode_vector([1, 0])},
        "operators": {k: encode_matrix(v) for k, v in ops.items()},
        "unitaries": {"U": encode_matrix(U1), "V": encode_matrix(U2), "M": encode_matrix(scheme.premeasurement.matrix)},
        "observables": {
            "sz_A": {"values": [0.5, -0.5], "projectors": ["up_A", "down_A"]},
            "msz_B": {"values": [0.5, -0.5], "projectors": ["down_B", "up_B"]},
            "t_sz": {"values": [0.5, -0.5], "projectors": ["t_up", "t_down"]},
            "tt_sz": {"values": [0.5, -0.5], "projectors": ["tt_up", "tt_down"]},
            "zq": {"values": [1, -1], "projectors": ["q0", "q1"]},
            "ptr": {"values": [0, 1], "projectors": ["q0", "q1"]},
        },
        "checks": [
            {"name": "sim", "type": "simultaneous_twin", "args": {"E": "up_A", "F": "down_B"}},
            {"name": "t1", "type": "theorem1", "args": {"E": "up_A", "F": "down_B"}},
            {"name": "t2", "type": "theorem2", "args": {"E": "up_A", "F": "down_B"}},
            {"name": "cls", "type": "class_membership", "args": {"E": "up_A", "E_prime": "E0"}},
            {"name": "obs", "type": "twin_observables", "args": {"O": "sz_A", "O_prime": "msz_B"}},
            {"name": "c1", "type": "corollary1", "args": {"O": "sz_A", "O_prime": "msz_B"}},
            {"name": "dt", "type": "delayed_twin", "args": {"E": "up_A", "F": "t_up", "U": "U"}},
            {"name": "t5", "type": "theorem5", "args": {"E": "up_A", "F": "t_up", "U": "U"}},
            {"name": "t6", "type": "theorem6", "args": {"O": "sz_A", "O_prime": "t_sz", "U": "U"}},
            {"name": "t7", "type": "theorem7", "args": {"O": "sz_A", "O_prime": "t_sz", "U": "U"}},
            {"name": "p1", "type": "proposition1", "args": {"E": "up_A", "U": "U", "samples": 5}},
            {"name": "p2", "type": "proposition2", "args": {"E": "up_A", "E_prime": "E0", "F": "t_up", "F_prime": "t_up", "U": "U"}},
            {"name": "peq", "type": "pair_equivalence", "args": {"E": "up_A", "F": "t_up", "E_prime": "up_A", "F_prime": "t_up", "U": "U"}},
            {"name": "ch", "type": "chain", "args": {"O": "sz_A", "O_prime": "t_sz", "O_dprime": "tt_sz", "U1": "U", "U2": "V"}},
            {"name": "cal", "type": "calibration", "args": {"measured": "zq", "pointer": "ptr", "pointer_init": "ready", "U": "M"}},
            {"name": "rep", "type": "probability_reproducibility", "args": {"measured": "zq", "pointer": "ptr", "pointer_init": "ready", "U": "M", "input": "plus"}},
            {"name": "br", "type": "branch_relation", "args": {"measured": "zq", "pointer": "ptr", "pointer_init": "ready", "U": "M", "input": "plus"}},
            {"name": "dto", "type": "delayed_twin_observables", "args": {"O": "sz_A", "O_prime": "t_sz", "U": "U"}},
        ],
    }


@pytest.fixture
def doc():
    return _document()


def _run(doc, **kw):
    return run_scenario(parse_scenario(doc), **kw)


def _with_check(doc, check):
    doc["checks"] = [check]
    return doc


def test_every_type_covered_and_passes(doc):
    assert {c["type"] for c in doc["checks"]} == set(CHECK_TYPES) == set(ARGUMENTS)
    rep = _run(doc)
    bad = [(r.name, r.error, r.residuals) for r in rep.records if r.status != "passed"]
    assert bad == []
    assert rep.exit_code == 0 and rep.summary == {"total": 18, "passed": 18, "failed": 0, "errored": 0}


def test_record_contents(doc):
    rep = _run(doc)
    rec = {r.name: r for r in rep.records}
    assert rec["sim"].residuals["definition"] <= 1e-12
    assert set(rec["t2"].residuals) >= {"definition", "(i)(a)", "(ii)(b)"}
    assert set(rec["t7"].residuals) == {"frobenius", "max_weight_gap"}
    assert rec["t7"].residuals["frobenius"] <= 1e-10
    assert rec["sim"].tolerances_used == Tolerances().as_dict()
    assert rec["sim"].expected is True and rec["sim"].verdict is True


def test_falsified_expectation_fails(doc):
    doc["checks"][6]["expect"] = False
    rep = _run(doc)
    assert rep.exit_code == 1 and rep.summary["failed"] == 1
    r = rep.records[6]
    assert r.status == "failed" and r.verdict is True and r.expected is False


def test_expected_false_verdict_passes(doc):
    _with_check(doc, {"name": "x", "type": "simultaneous_twin", "args": {"E": "up_A", "F": "up_B"}, "expect": False})
    rep = _run(doc)
    assert rep.exit_code == 0 and rep.records[0].verdict is False


def test_precondition_failure_is_errored(doc):
    # the zero event has no probability, violating the precondition
    doc["operators"]["zero"] = encode_matrix(np.zeros((4, 4)))
    _with_check(doc, {"name": "x", "type": "theorem5", "args": {"E": "zero", "F": "t_up", "U": "U"}})
    rep = _run(doc)
    r = rep.records[0]
    assert r.status == "errored" and "PreconditionError" in r.error and r.verdict is None
    assert rep.exit_code == 1 and rep.summary["errored"] == 1


def test_non_projector_operand_is_errored(doc):
    doc["operators"]["sx"] = encode_matrix(np.kron(EYE, np.array([[0, 1], [1, 0]])))
    _with_check(doc, {"name": "x", "type": "simultaneous_twin", "args": {"E": "sx", "F": "up_A"}})
    r = _run(doc).records[0]
    assert r.status == "errored" and "ValidationError" in r.error


def test_dimension_mismatch_is_errored(doc):
    _with_check(doc, {"name": "x", "type": "simultaneous_twin", "args": {"E": "q0", "F": "up_A"}})
    r = _run(doc).records[0]
    assert r.status == "errored" and "DimensionError" in r.error


def test_hermitian_observable(doc):
    doc["operators"]["sx"] = encode_matrix(np.kron(EYE, np.array([[0, 1], [1, 0]])))
    doc["observables"]["sx_B"] = {"hermitian": "sx"}
    _with_check(doc, {"name": "x", "type": "twin_observables", "args": {"O": "sz_A", "O_prime": "sx_B"}, "expect": False})
    assert _run(doc).exit_code == 0


def test_theorem7_force(doc):
    _with_check(doc, {"name": "x", "type": "theorem7", "args": {"O": "sz_A", "O_prime": "tt_sz", "U": "U"}})
    assert _run(doc).records[0].status == "errored"
    doc["checks"][0]["args"]["force"] = True
    doc["checks"][0]["expect"] = False
    r = _run(doc).records[0]
    assert r.status == "passed" and r.residuals["frobenius"] > 1e-6


def test_proposition1_seed_is_deterministic(doc):
    a = _run(copy.deepcopy(doc)).records[10].residuals
    b = _run(copy.deepcopy(doc)).records[10].residuals
    assert a == b


@pytest.mark.parametrize(
    "args, fragment",
    [
        ({"E": "up_A"}, "needs arguments"),
        ({"E": "up_A", "F": "down_B", "G": "up_A"}, "unexpected argument"),
        ({"E": "sz_A", "F": "down_B"}, "must name a operator"),
        ({"E": "up_A", "F": "down_B", "state": "up_A"}, "must name a state"),
    ],
)
def test_argument_validation(doc, args, fragment):
    _with_check(doc, {"type": "simultaneous_twin", "args": args})
    with pytest.raises(ScenarioFileError) as info:
        validate_checks(parse_scenario(doc))
    assert fragment in str(info.value) and info.value.where.startswith("checks/0/args")


def test_integer_argument_must_be_literal(doc):
    _with_check(doc, {"type": "proposition1", "args": {"E": "up_A", "U": "U", "samples": True}})
    with pytest.raises(ScenarioFileError):
        validate_checks(parse_scenario(doc))


def test_state_argument(doc):
    doc["states"]["prod"] = encode_vector([1, 0, 0, 0])
    _with_check(doc, {"type": "simultaneous_twin", "args": {"E": "up_A", "F": "up_B", "state": "prod"}})
    assert _run(doc).records[0].verdict is True


def test_tolerance_precedence(doc):
    _with_check(doc, {"type": "simultaneous_twin", "args": {"E": "up_A", "F": "down_B"}})
    doc["tolerances"] = {"op": 1e-7, "prob": 1e-7}
    doc["checks"][0]["tolerances"] = {"op": 1e-6}
    r = _run(copy.deepcopy(doc)).records[0]
    assert r.tolerances_used["op"] == 1e-6 and r.tolerances_used["prob"] == 1e-7
    r = _run(copy.deepcopy(doc), overrides={"op": 1e-5, "prob": None}).records[0]
    assert r.tolerances_used["op"] == 1e-5 and r.tolerances_used["prob"] == 1e-7
    r = _run(copy.deepcopy(doc), base=Tolerances(norm=1e-8)).records[0]
    assert r.tolerances_used["norm"] == 1e-8


def test_tolerance_changes_verdict(doc):
    # residual is about eps = 1e-6, between the two op thresholds
    eps = 1e-6
    psi = np.array([1, eps, 0, 0]) / np.sqrt(1 + eps**2)
    doc["state"] = encode_vector(psi)
    doc["operators"]["all"] = encode_matrix(np.eye(4))
    doc["operators"]["p00"] = encode_matrix(proj(4, 0))
    _with_check(doc, {"type": "simultaneous_twin", "args": {"E": "p00", "F": "all"}})
    assert _run(copy.deepcopy(doc)).records[0].verdict is False
    assert _run(copy.deepcopy(doc), overrides={"op": 1e-5}).records[0].verdict is True


def test_env_var_sets_default(doc, tmp_path, monkeypatch):
    path = tmp_path / "f.json"
    path.write_text(json.dumps(_with_check(doc, {"type": "simultaneous_twin", "args": {"E": "up_A", "F": "down_B"}})))
    monkeypatch.setenv("TWINLAB_TOL_OP", "3e-8")
    assert run_check_file(path).records[0].tolerances_used["op"] == 3e-8
    assert run_check_file(path, {"op": 1e-7}).records[0].tolerances_used["op"] == 1e-7


def test_report_json_and_human(doc):
    doc["checks"][0]["expect"] = False
    rep = _run(doc)
    data = json.loads(rep.dumps())
    assert set(data) == {"name", "records", "summary", "provenance"}
    assert set(data["provenance"]) == {"seed", "tool_version", "wall_time"}
    assert data["provenance"]["seed"] == 5
    assert data["summary"]["total"] == len(data["records"]) == 18
    assert set(data["records"][0]) == {
        "name", "type", "verdict", "expected", "matched", "residuals", "tolerances_used", "marginal_flags", "error"
    }
    lines = rep.human().splitlines()
    assert lines[0].startswith("[FAILED ] sim (simultaneous_twin) verdict=True expected=False residual=")
    assert lines[-1] == "18 checks: 17 passed, 1 failed, 0 errored"


def test_reports_identical_modulo_wall_time(doc):
    def strip(rep):
        data = rep.to_json()
        data["provenance"].pop("wall_time")
        return json.dumps(data, indent=2, sort_keys=True)

    assert strip(_run(copy.deepcopy(doc))) == strip(_run(copy.deepcopy(doc)))
