import io
import json
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path

import pytest

from qcond import cli
from qcond.errors import NotDensityMatrix, NotUnitary, SchemaError, UnsupportedFormat

ROOT = Path(__file__).resolve().parents[1]
SCEN = ROOT / "demos" / "scenarios"
FIX = Path(__file__).resolve().parent / "fixtures"

MINIMAL = {"kind": "measurement_plan", "state": {"psi": [1, 0]},
           "plan": {"steps": [{"time": 1, "observable": [[1, 0], [0, -1]]}]}}


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = cli.main(argv)
    return code, out.getvalue(), err.getvalue()


def test_parse_minimal_plan():
    s = cli.parse_scenario(json.dumps(MINIMAL))
    assert s.kind == "measurement_plan" and s.payload.dim == 2 and s.seed == 0 and s.tol == 1e-9


def test_parse_errors_carry_paths():
    doc = dict(MINIMAL, state={"rho": [[0.5, 0], [0, 0.4]]})
    with pytest.raises(NotDensityMatrix, match=r"^\$\.state\.rho:"):
        cli.parse_scenario(doc)
    with pytest.raises(SchemaError, match=r"\$\.kind"):
        cli.parse_scenario(dict(MINIMAL, kind="nope"))
    with pytest.raises(SchemaError, match=r"\$\.plan\.steps"):
        cli.parse_scenario(dict(MINIMAL, plan={}))
    with pytest.raises(SchemaError, match=r"invalid JSON"):
        cli.parse_scenario("{not json")
    model = json.loads((SCEN / "cnot_filter.json").read_text())
    model["model"]["U"] = [[1, 1, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]
    with pytest.raises(NotUnitary, match=r"\$\.model"):
        cli.parse_scenario(model)


def test_report_roundtrip_and_csv():
    report = cli.run_scenario(cli.parse_scenario(json.dumps(MINIMAL)))
    assert list(report) == ["tool", "version", "kind", "tol", "seed", "result"]
    assert json.loads(cli.emit(report)) == report
    csv = cli.emit(report, "csv").splitlines()
    assert csv[0] == "step1,probability"
    with pytest.raises(UnsupportedFormat):
        cli.emit(report, "xml")
    with pytest.raises(UnsupportedFormat):
        cli.emit(report, "jsonl")


def test_check_scenario_reports_incompatibility():
    code, out, _ = run(["check", str(SCEN / "check_zx.json")])
    assert code == 0 and json.loads(out)["result"]["compatibility"] is False


def test_bell_scan_command():
    code, out, _ = run(["bell-scan", "--resolution", "16", str(SCEN / "bell_zero.json")])
    res = json.loads(out)["result"]
    assert code == 0 and res["grid_resolution"] == 16 and res["best_gap"] > 0
    code, out, _ = run(["bell-scan", "--resolution", "8", "--grid", "--format", "csv", str(SCEN / "bell_zero.json")])
    assert code == 0 and len(out.splitlines()) == 8 ** 3 + 1


def test_filter_jsonl_and_record_override():
    code, out, _ = run(["filter", "--record", "1,1,1", str(SCEN / "cnot_filter.json")])
    lines = [json.loads(l) for l in out.splitlines()]
    assert code == 0 and [l["k"] for l in lines] == [1, 2, 3]
    assert set(lines[0]) == {"k", "y", "p", "estimate", "conditioned_state"}
    assert lines[0]["p"] == pytest.approx(0.5) and lines[-1]["estimate"] == pytest.approx(1.0)


def test_filter_model_file(tmp_path):
    doc = json.loads((SCEN / "cnot_filter.json").read_text())
    model = dict(doc["model"], initial_state=doc["state"])
    path = tmp_path / "model.json"
    path.write_text(json.dumps(model))
    code, out, _ = run(["filter", "--model", str(path), "--steps", "2", "--seed", "3"])
    assert code == 0 and len(out.splitlines()) == 2


def test_sampled_filter_is_deterministic_per_seed():
    outs = [run(["filter", "--seed", "1", "--format", "json", str(SCEN / "cnot_filter.json")])[1] for _ in range(3)]
    assert len(set(outs)) == 1 and json.loads(outs[0])["seed"] == 1


def test_stdin_and_output(tmp_path, monkeypatch):
    monkeypatch.setattr("sys.stdin", io.StringIO(json.dumps(MINIMAL)))
    target = tmp_path / "r.json"
    code, out, _ = run(["run", "--output", str(target), "-"])
    assert code == 0 and out == "" and json.loads(target.read_text())["kind"] == "measurement_plan"


@pytest.mark.parametrize("name,path", [
    ("bad_trace.json", "$.state.rho"),
    ("bad_matrix_entry.json", "$.plan.steps[1].observable[1][0]"),
    ("bad_kind.json", "$.kind"),
])
def test_malformed_fixtures_exit_2(name, path):
    code, out, err = run(["run", str(FIX / name)])
    assert code == 2 and out == "" and f"error: {path}:" in err


def test_domain_error_exit_3():
    code, _, err = run(["run", str(FIX / "impossible_record.json")])
    assert code == 3 and "step 1" in err


def test_wrong_kind_for_command():
    code, _, err = run(["bell-scan", str(SCEN / "two_step_zx.json")])
    assert code == 2 and "$.kind" in err


def test_tol_override_recorded():
    code, out, _ = run(["run", "--tol", "1e-7", str(SCEN / "two_step_zx.json")])
    assert json.loads(out)["tol"] == 1e-7
