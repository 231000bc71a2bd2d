import json
import pathlib
import subprocess
import sys

import pytest

from uhat.cli import main
from uhat.rings import GradedRing
from uhat.scenario import (
    ScenarioError,
    load_scenario,
    parse_polynomial,
    parse_scenario,
    serialize_scenario,
)

SCENARIOS = pathlib.Path(__file__).resolve().parent.parent / "scenarios"


# -- polynomial expressions


def test_parse_polynomial_basics():
    R = GradedRing(["x", "y"], [0, -1])
    p = parse_polynomial("2*x^2*y - 1/3", R)
    assert str(p) == "2*x^2*y - 1/3"
    assert parse_polynomial("-(x + y)", R) == -(R.var("x") + R.var("y"))
    assert parse_polynomial("0", R).is_zero()


def test_parse_polynomial_errors_carry_position():
    R = GradedRing(["x"], [0])
    with pytest.raises(ScenarioError) as err:
        parse_polynomial("x + w", R, line=12)
    assert err.value.line == 12
    with pytest.raises(ScenarioError):
        parse_polynomial("x ^ y", R)
    with pytest.raises(ScenarioError):
        parse_polynomial("1/0", R)


def test_polynomial_round_trip():
    R = GradedRing(["x", "y", "z"], [0, -1, -2])
    for text in ["x", "x - y", "2*x^3 - 1/2*y*z + 7", "-x + y^2"]:
        p = parse_polynomial(text, R)
        assert parse_polynomial(str(p), R) == p


# -- scenario files


def test_fixture_files_parse_and_build():
    for path in sorted(SCENARIOS.glob("*.uhat")):
        scenario = load_scenario(path)
        action = scenario.build()
        assert action.validate() == []


def test_scenario_round_trip():
    scenario = load_scenario(SCENARIOS / "heisenberg_scaled.uhat")
    text = serialize_scenario(scenario)
    again = parse_scenario(text)
    assert again == scenario
    assert serialize_scenario(again) == text


def test_semantic_error_names_the_vector():
    bad = """
[ring]
variables: x:0, y:-1

[lie]
weight 1: xi

[action]
xi.y = y
"""
    scenario = parse_scenario(bad)
    with pytest.raises(ScenarioError) as err:
        scenario.build()
    assert "action-weight" in str(err.value)


def test_syntax_error_positions():
    with pytest.raises(ScenarioError) as err:
        parse_scenario("[ring]\nvariables: x:zero\n")
    assert err.value.line == 2
    with pytest.raises(ScenarioError) as err:
        parse_scenario("[ring]\nvariables: x:1\n")
    assert "positive weight" in str(err.value)


def test_empty_lie_block_is_valid():
    text = """
[ring]
variables: x:0

[lie]

[action]
"""
    scenario = parse_scenario(text)
    action = scenario.build()
    assert action.lie.dim == 0
    assert action.validate() == []


def test_unknown_section_rejected():
    with pytest.raises(ScenarioError):
        parse_scenario("[nope]\n")


def test_inhomogeneous_relation_rejected():
    text = """
[ring]
variables: x:0, y:-1

[relations]
x + y

[lie]
weight 1: xi

[action]
xi.y = x
"""
    scenario = parse_scenario(text)
    with pytest.raises(ScenarioError) as err:
        scenario.build()
    assert "weight-homogeneous" in str(err.value)


def test_homogeneous_relation_accepted():
    text = """
[ring]
variables: x:0, y:-1

[relations]
x^3 - x^2

[lie]
weight 1: xi

[action]
xi.y = x
"""
    scenario = parse_scenario(text)
    action = scenario.build()
    assert action.validate() == []


# -- CLI behaviour


def run_cli(*args):
    return main(list(args))


def test_analyze_ok(tmp_path):
    out = tmp_path / "report.json"
    code = run_cli(
        "analyze", "--scenario", str(SCENARIOS / "one_weight.uhat"), "--json", str(out)
    )
    assert code == 0
    data = json.loads(out.read_text())
    assert data["ss_eq_s"]["holds"] is False
    assert data["cdrs"]["holds"] is False
    assert data["wuu"]["holds"] is True


def test_quotient_refuses_failing_chart(capsys):
    code = run_cli("quotient", "--scenario", str(SCENARIOS / "one_weight.uhat"))
    assert code == 1
    out = capsys.readouterr().out
    assert "blowup" in out


def test_blowup_refuses_holding_chart(capsys):
    code = run_cli("blowup", "--scenario", str(SCENARIOS / "one_weight_free.uhat"))
    assert code == 1
    out = capsys.readouterr().out
    assert "quotient" in out


def test_missing_file_is_input_error():
    assert run_cli("analyze", "--scenario", "/nonexistent/file") == 2


def test_bad_scenario_is_input_error(tmp_path):
    bad = tmp_path / "bad.uhat"
    bad.write_text("[ring]\nvariables: x:0\n\n[lie]\nweight 1: xi\n\n[action]\nxi.x = x\n")
    assert run_cli("analyze", "--scenario", str(bad)) == 2


def test_bound_exhaustion_exit_code(tmp_path):
    # slices of the free fixture need degree 1; a zero bound cannot find them
    code = run_cli(
        "quotient",
        "--scenario",
        str(SCENARIOS / "one_weight_free.uhat"),
        "--degree-bound",
        "0",
    )
    assert code == 3


def test_reports_are_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        run_cli(
            "blowup",
            "--scenario",
            str(SCENARIOS / "two_weight.uhat"),
            "--json",
            str(out),
        )
    assert a.read_bytes() == b.read_bytes()


def test_quotient_command_reports_chain(tmp_path):
    out = tmp_path / "chain.json"
    code = run_cli(
        "quotient", "--scenario", str(SCENARIOS / "heisenberg_free.uhat"), "--json", str(out)
    )
    assert code == 0
    data = json.loads(out.read_text())
    assert data["affine_dimension"] == 3
    assert data["final_generators"] == []
    assert data["verification"]["ok"] is True


def test_blowup_with_quotient_chains(tmp_path):
    out = tmp_path / "blow.json"
    code = run_cli(
        "blowup",
        "--scenario",
        str(SCENARIOS / "two_weight.uhat"),
        "--with-quotient",
        "--json",
        str(out),
    )
    assert code == 0
    data = json.loads(out.read_text())
    assert data["chart_cdrs"]["holds"] is True
    assert data["chart_quotient"]["verification_ok"] is True
    assert data["chart_quotient"]["final_generators"] == ["x"]


def test_identities_command():
    assert run_cli("identities", "--max-total", "2", "--letters", "2", "--comult-degree", "2") == 0


def test_console_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "uhat.cli", "analyze", "--scenario", str(SCENARIOS / "one_weight_free.uhat")],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "ss_eq_s" in proc.stdout
