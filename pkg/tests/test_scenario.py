"""Scenario parsing, validation, the check runner, and report emission."""

import json

import numpy as np
import pytest

from hilbert_bundle.checks import CHECKS, run_scenario
from hilbert_bundle.report import report_to_csv, report_to_json
from hilbert_bundle.scenario import (
    ScenarioError,
    ScenarioModel,
    build_runtime,
    load_scenario,
    matrix_to_pairs,
    named_matrix,
    parse_matrix,
)

from conftest import make_scenario, random_hermitian


MINIMAL = {
    "dim": 2,
    "t1": 1.0,
    "steps": 50,
    "hamiltonian": [{"matrix": "sz"}],
}


def write_scenario(tmp_path, data, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return path


# -- matrix parsing ----------------------------------------------------------

def test_named_matrices():
    np.testing.assert_array_equal(named_matrix("id", 3), np.eye(3))
    np.testing.assert_array_equal(named_matrix("n", 3), np.diag([0.0, 1.0, 2.0]))
    a = named_matrix("a", 3)
    adag = named_matrix("adag", 3)
    np.testing.assert_allclose(adag, a.conj().T)


def test_pauli_requires_dim_two():
    with pytest.raises(ScenarioError):
        named_matrix("sx", 3)


def test_unknown_shorthand():
    with pytest.raises(ScenarioError):
        named_matrix("hadamard", 2)


def test_parse_matrix_roundtrip(rng):
    m = random_hermitian(rng, 3)
    np.testing.assert_allclose(parse_matrix(matrix_to_pairs(m), 3, "x"), m)


def test_parse_matrix_wrong_shape():
    with pytest.raises(ScenarioError):
        parse_matrix([[[1.0, 0.0]]], 2, "x")


# -- schema validation -------------------------------------------------------

def test_minimal_scenario_validates():
    model = ScenarioModel.model_validate(MINIMAL)
    rt = build_runtime(model)
    assert rt.hamiltonian.dim == 2
    np.testing.assert_array_equal(rt.psi0, [1.0, 0.0])


def test_unknown_field_rejected():
    with pytest.raises(Exception):
        ScenarioModel.model_validate({**MINIMAL, "unexpected": 1})


def test_unknown_nested_field_rejected():
    bad = {**MINIMAL, "hamiltonian": [{"matrix": "sz", "extra": True}]}
    with pytest.raises(Exception):
        ScenarioModel.model_validate(bad)


def test_non_hermitian_hamiltonian_rejected():
    bad = {**MINIMAL, "hamiltonian": [{"matrix": "a"}], "dim": 3, "t1": 1.0}
    model = ScenarioModel.model_validate(bad)
    with pytest.raises(ScenarioError):
        build_runtime(model)


def test_bad_initial_state_rejected():
    model = ScenarioModel.model_validate({**MINIMAL, "initial_state": [[0.0, 0.0], [0.0, 0.0]]})
    with pytest.raises(ScenarioError):
        build_runtime(model)


def test_duplicate_observable_names_rejected():
    data = {
        **MINIMAL,
        "observables": [{"name": "z", "matrix": "sz"}, {"name": "z", "matrix": "sx"}],
    }
    with pytest.raises(ScenarioError):
        build_runtime(ScenarioModel.model_validate(data))


def test_unknown_check_rejected():
    model = ScenarioModel.model_validate({**MINIMAL, "checks": ["no_such_check"]})
    with pytest.raises(ScenarioError):
        run_scenario(model)


def test_poly_coefficient_degree_bound():
    bad = {
        **MINIMAL,
        "hamiltonian": [{"matrix": "sz", "coefficient": {"kind": "poly", "coeffs": [1] * 6}}],
    }
    with pytest.raises(Exception):
        ScenarioModel.model_validate(bad)


def test_load_scenario_from_file(tmp_path):
    path = write_scenario(tmp_path, MINIMAL)
    model = load_scenario(path)
    assert model.dim == 2


def test_load_scenario_bad_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(ScenarioError):
        load_scenario(path)


def test_load_scenario_missing_file(tmp_path):
    with pytest.raises(ScenarioError):
        load_scenario(tmp_path / "missing.json")


def test_load_scenario_reports_field_location(tmp_path):
    path = write_scenario(tmp_path, {**MINIMAL, "steps": 1})
    with pytest.raises(ScenarioError, match="steps"):
        load_scenario(path)


# -- runner ------------------------------------------------------------------

def test_run_scenario_default_checks(rng):
    model = make_scenario(rng, 2, steps=120)
    report = run_scenario(model)
    assert report.all_passed
    names = {e.name for e in report.checks}
    assert "transport_identity" in names
    assert "gauge_covariance" in names
    assert "expectation_equality" in names
    # every entry carries an identity label and tolerance
    for e in report.checks:
        assert e.equation == CHECKS[e.name][0]
        assert e.tolerance > 0


def test_closed_form_check_requires_constant_setup():
    model = ScenarioModel.model_validate({**MINIMAL, "checks": ["closed_form"]})
    report = run_scenario(model, with_trajectory=False)
    assert report.all_passed
    driven = {
        **MINIMAL,
        "hamiltonian": [{"matrix": "sz", "coefficient": {"kind": "cos"}}],
        "checks": ["closed_form"],
    }
    with pytest.raises(ScenarioError):
        run_scenario(ScenarioModel.model_validate(driven))


def test_gauge_checks_require_gauge(rng):
    model = make_scenario(rng, 2, steps=60, with_gauge=False, checks=["gauge_covariance"])
    with pytest.raises(ScenarioError):
        run_scenario(model)


def test_tolerance_override(rng):
    model = make_scenario(rng, 2, steps=60, checks=["unitarity"])
    strict = model.model_copy(update={"tolerances": {"unitarity": 1e-30}})
    report = run_scenario(strict, with_trajectory=False)
    assert not report.all_passed


# -- report emission ---------------------------------------------------------

def test_report_json_shape(rng):
    model = make_scenario(rng, 2, steps=60, checks=["unitarity", "composition"])
    report = run_scenario(model)
    data = json.loads(report_to_json(report))
    assert {"name", "equation", "residual", "tolerance", "pass"} <= set(data["checks"][0])
    assert len(data["trajectory"]) == model.steps + 1


def test_report_json_deterministic_modulo_timing(rng):
    model = make_scenario(rng, 2, steps=60)
    a = report_to_json(run_scenario(model), include_timing=False)
    b = report_to_json(run_scenario(model), include_timing=False)
    assert a == b


def test_report_csv_columns(rng):
    model = make_scenario(rng, 2, steps=60)
    report = run_scenario(model)
    csv = report_to_csv(report, ["obs1", "obs2"])
    lines = csv.strip().split("\n")
    header = [c.strip() for c in lines[0].split(",")]
    assert header == [
        "t",
        "obs1_hilbert",
        "obs1_bundle",
        "obs2_hilbert",
        "obs2_bundle",
        "unitarity_residual",
        "d5_10_residual",
        "d5_13_residual",
    ]
    assert len(lines) == model.steps + 2
    # 15-significant-digit floats parse back exactly enough
    row = [float(c) for c in lines[1].split(",")]
    assert len(row) == len(header)


def test_trajectory_expectations_agree(rng):
    model = make_scenario(rng, 2, steps=60)
    report = run_scenario(model)
    for row in report.trajectory:
        assert abs(row.values["obs1_hilbert"] - row.values["obs1_bundle"]) < 1e-10
        assert row.values["unitarity_residual"] < 1e-10
        assert row.values["d5_10_residual"] < 1e-5
