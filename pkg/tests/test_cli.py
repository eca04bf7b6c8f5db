import json

import jsonschema
import pytest

from greenbvp.cli import REPORT_SCHEMA, RunConfig, main
from greenbvp.errors import GreenBVPError


def _run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_certify_exact_problem_writes_valid_report(tmp_path, capsys):
    out = tmp_path / "report.json"
    code, cap = _run(capsys, "certify", "--problem", "exact-test", "--N", "32", "--m", "10",
                     "--output", str(out))
    assert code == 0
    assert "status: certified" in cap.out and "error bound" in cap.out
    report = json.loads(out.read_text())
    jsonschema.validate(report, REPORT_SCHEMA)
    assert report["certificate"]["alpha"] < 1e-3
    assert report["config"]["N"] == 32


def test_json_flag_prints_report(capsys):
    code, cap = _run(capsys, "certify", "--problem", "turning-point", "--eps", "1e-3",
                     "--N", "60", "--m", "10", "--weights", "adaptive", "--json")
    assert code == 0
    report = json.loads(cap.out)
    jsonschema.validate(report, REPORT_SCHEMA)
    assert report["certificate"]["weights"][0] == 1.0 or report["certificate"]["weights"][1] == 1.0


def test_underflow_exits_with_failure_code(capsys):
    code, cap = _run(capsys, "certify", "--problem", "turning-point", "--eps", "1e-7",
                     "--N", "600", "--weights", "adaptive", "--json")
    assert code == 2
    report = json.loads(cap.out)
    assert report["status"] == "failed" and report["reason"].startswith("underflow")


def test_failed_test_exits_2(capsys):
    code, cap = _run(capsys, "certify", "--problem", "exact-test", "--b", "8", "--N", "2",
                     "--m", "2", "--json")
    assert code == 2
    assert json.loads(cap.out)["certificate"]["status"] == "failed"


def test_program_errors_exit_1(tmp_path, capsys):
    assert _run(capsys, "certify", "--problem", "heat")[0] == 1
    assert _run(capsys, "certify", "--problem", "exact-test", "--N", "0")[0] == 1
    assert _run(capsys, "certify")[0] == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{}")
    code, cap = _run(capsys, "certify", "--solution", str(bad))
    assert code == 1 and "error" in cap.err
    assert _run(capsys, "certify", "--solution", str(tmp_path / "missing.json"))[0] == 1
    assert _run(capsys, "solve", "--problem", "exact-test")[0] == 1


def test_solve_then_certify_file(tmp_path, capsys):
    sol = tmp_path / "sol.json"
    code, _ = _run(capsys, "solve", "--problem", "potential-well", "--eps", "1e-3", "--N", "80",
                   "--m", "12", "--output", str(sol))
    assert code == 0 and sol.exists()
    code, cap = _run(capsys, "certify", "--solution", str(sol), "--m", "12",
                     "--weights", "adaptive", "--json")
    assert code == 0
    assert json.loads(cap.out)["certificate"]["problem"] == "potential-well"


def test_lorenz_solution_file_roundtrip(tmp_path, capsys):
    sol = tmp_path / "lorenz.json"
    assert _run(capsys, "solve", "--problem", "lorenz", "--N", "35", "--series-degree", "20",
                "--output", str(sol))[0] == 0
    code, cap = _run(capsys, "certify", "--solution", str(sol), "--m", "15", "--json")
    report = json.loads(cap.out)
    jsonschema.validate(report, REPORT_SCHEMA)
    assert code == 0 and report["certificate"]["kind"] == "nonlinear"


def test_deterministic_reruns_are_identical(capsys):
    args = ["certify", "--problem", "turning-point", "--eps", "1e-3", "--N", "60", "--m", "10",
            "--deterministic", "--json"]
    first = json.loads(_run(capsys, *args)[1].out)
    second = json.loads(_run(capsys, *args)[1].out)
    for r in (first, second):
        r["certificate"].pop("elapsed_seconds")
        r.pop("solver")
    assert first == second
    assert first["config"]["workers"] == 1


def test_run_config_validation():
    with pytest.raises(GreenBVPError):
        RunConfig("certify", N=0)
    with pytest.raises(GreenBVPError):
        RunConfig("certify", mode="sloppy")
    with pytest.raises(GreenBVPError):
        RunConfig("certify", weights="random")
    with pytest.raises(GreenBVPError):
        RunConfig("certify", radius=-1.0)
    assert RunConfig("certify", deterministic=True, workers=4).workers == 1


def test_table1_full_run_certifies_every_row(tmp_path, capsys):
    out = tmp_path / "table.json"
    code, cap = _run(capsys, "table1", "--deterministic", "--output", str(out))
    assert code == 0
    report = json.loads(out.read_text())
    jsonschema.validate(report, REPORT_SCHEMA)
    assert len(report["rows"]) == 5
    assert all(r["status"] == "certified" and r["alpha"] < 1 for r in report["rows"])
    assert "potential-well" in cap.out
