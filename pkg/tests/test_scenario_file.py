import copy
import json

import numpy as np
import pytest

from twinlab import Tolerances
from twinlab.scenario_file import (
    CHECK_TYPES,
    ScenarioFileError,
    encode_matrix,
    encode_vector,
    load,
    loads,
    parse_scenario,
)
from twinlab.scenarios import get_scenario

from conftest import proj


def minimal():
    return {
        "schema_version": "1",
        "name": "minimal",
        "dimension": 2,
        "state": encode_vector([1, 0]),
        "operators": {"P0": encode_matrix(proj(2, 0)), "P1": encode_matrix(proj(2, 1))},
        "checks": [{"type": "simultaneous_twin", "args": {"E": "P0", "F": "P0"}}],
    }


def _error(data):
    with pytest.raises(ScenarioFileError) as info:
        parse_scenario(data)
    return info.value


def test_minimal_parses():
    s = parse_scenario(minimal())
    assert s.dimension == 2 and s.name == "minimal" and s.seed is None
    assert s.checks[0].name == "simultaneous_twin#0" and s.checks[0].expect is None
    assert set(s.operators) == {"P0", "P1"}


def test_eighteen_check_types():
    assert len(CHECK_TYPES) == 18 and len(set(CHECK_TYPES)) == 18


@pytest.mark.parametrize(
    "mutate, where",
    [
        (lambda d: d.pop("state"), "<root>"),
        (lambda d: d.update(schema_version="2"), "schema_version"),
        (lambda d: d.update(dimension=0), "dimension"),
        (lambda d: d.update(extra=1), "<root>"),
        (lambda d: d["checks"][0].update(type="nope"), "checks/0/type"),
        (lambda d: d["checks"][0].pop("args"), "checks/0"),
        (lambda d: d["operators"]["P0"][0].append([0, 0]), "operators/P0"),
        (lambda d: d["operators"]["P0"][0][0].append(1.0), "operators/P0/0/0"),
        (lambda d: d["operators"].update(H=encode_matrix(np.array([[0, 1], [0, 0]]))), "operators/H"),
        (lambda d: d.update(state=encode_vector([1, 1])), "state"),
        (lambda d: d.update(state=encode_vector([1, 0, 0])), "state"),
        (lambda d: d["checks"][0]["args"].update(E="missing"), "checks/0/args/E"),
        (lambda d: d.update(tolerances={"op": -1}), "tolerances/op"),
        (lambda d: d.update(tolerances={"bogus": 1}), "tolerances"),
        (lambda d: d["checks"][0].update(tolerances={"op": 0}), "checks/0/tolerances/op"),
        (lambda d: d.update(observables={"O": {"values": [1], "projectors": ["P0", "P1"]}}), "observables/O"),
        (lambda d: d.update(observables={"O": {"values": [1, 2], "projectors": ["P0", "X"]}}), "observables/O"),
        (lambda d: d.update(observables={"O": {"values": [1], "projectors": ["P0"]}}), "observables/O"),
        (lambda d: d.update(observables={"O": {"hermitian": "X"}}), "observables/O"),
        (lambda d: d.update(unitaries={"U": encode_matrix(np.array([[1, 1], [0, 1]]))}), "unitaries/U"),
    ],
)
def test_schema_and_semantic_errors_name_location(mutate, where):
    data = minimal()
    mutate(data)
    err = _error(data)
    assert err.where == where
    assert str(err).startswith(where)


def test_invalid_json_reports_line_and_column():
    with pytest.raises(ScenarioFileError) as info:
        loads('{\n"schema_version": "1",,\n}')
    assert info.value.where == "line 2, column 23"


def test_missing_file(tmp_path):
    with pytest.raises(ScenarioFileError):
        load(tmp_path / "absent.json")


def test_non_finite_entry():
    text = json.dumps(minimal()).replace("[1.0, 0.0]", "[NaN, 0.0]", 1)
    with pytest.raises(ScenarioFileError) as info:
        loads(text)
    assert "non-finite" in str(info.value)


def test_file_tolerances_used_for_validation():
    data = minimal()
    data["state"] = encode_vector([1 + 1e-7, 0])
    _error(copy.deepcopy(data))
    data["tolerances"] = {"norm": 1e-6}
    assert parse_scenario(data).tolerances == {"norm": 1e-6}


def test_overrides_apply_at_load():
    data = minimal()
    data["state"] = encode_vector([1 + 1e-7, 0])
    parse_scenario(data, overrides={"norm": 1e-6})
    parse_scenario(data, base=Tolerances(norm=1e-6))


@pytest.mark.parametrize("name", ["singlet", "stern-gerlach", "scully"])
def test_round_trip_is_bit_exact(name, tmp_path):
    scenario = get_scenario(name)
    path = tmp_path / "s.json"
    scenario.file.write(path)
    back = load(path)
    orig = scenario.file
    assert back.to_json() == orig.to_json()
    assert np.array_equal(back.state.amplitudes, orig.state.amplitudes)
    for k, m in orig.operators.items():
        assert np.array_equal(back.operators[k], m)
    for k, u in orig.unitaries.items():
        assert np.array_equal(back.unitaries[k].matrix, u.matrix)
    assert back.dumps() == orig.dumps()


def test_signed_zero_and_tiny_values_survive():
    v = np.array([np.sqrt(0.5) + 0j, complex(-0.0, -np.sqrt(0.5))])
    data = minimal()
    data["state"] = encode_vector(v)
    back = loads(json.dumps(data)).state.amplitudes
    assert np.array_equal(back.view(float), v.view(float))
    assert np.signbit(back[1].real)
