import json
import os
import subprocess
import sys

import pytest

from toda.cli import EXIT_FAIL, EXIT_OK, EXIT_OUTPUT, EXIT_USAGE, EXIT_X0, run


def call(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_symmetries_all_pass(capsys):
    code, out, _ = call(capsys, "verify-symmetries", "--n", "2..4")
    doc = json.loads(out)
    assert code == EXIT_OK and doc["status"] == "pass"
    assert {e["n"] for e in doc["report"]} == {2, 3, 4}
    assert all(e["status"] == "pass" for e in doc["report"])


def test_json_is_deterministic(capsys):
    a = call(capsys, "verify-symmetries", "--n", "2")[1]
    b = call(capsys, "verify-symmetries", "--n", "2")[1]
    assert a == b


def test_text_format(capsys):
    code, out, _ = call(capsys, "verify-symmetries", "--n", "2", "--format", "text")
    assert code == EXIT_OK
    assert out.splitlines()[0].startswith("PASS n=2")


def test_algebra_exit_matches_report(capsys):
    code, out, _ = call(capsys, "algebra", "--n", "2..3")
    doc = json.loads(out)
    assert (code == EXIT_OK) == (doc["status"] == "pass")
    infos = [e for e in doc["report"] if e["status"] == "info"]
    assert infos and all("reading" in e for e in infos)


def test_appendix_b(capsys):
    code, out, _ = call(capsys, "appendix-b", "--n", "2")
    doc = json.loads(out)
    assert (code == EXIT_OK) == (doc["status"] == "pass")


def test_hierarchy_golden_report(capsys):
    code, out, _ = call(capsys, "hierarchy", "--eta", "1", "--levels", "3", "--n", "2")
    doc = json.loads(out)
    fails = [e for e in doc["report"] if e["status"] == "fail"]
    # the only disagreement is the printed l(2)
    assert code == EXIT_FAIL
    assert len(fails) == 1 and "l" in fails[0]["relation"] and "2" in fails[0]["relation"]
    assert "residual" in fails[0]


def test_hierarchy_eta5(capsys):
    code, out, _ = call(capsys, "hierarchy", "--eta", "5", "--levels", "2", "--n", "2")
    assert code == EXIT_OK, out


def test_integrate_first_row_is_input(capsys):
    code, out, _ = call(capsys, "integrate", "--n", "2", "--x0", "0,0,0,0", "--T", "1")
    lines = out.splitlines()
    assert code == EXIT_OK
    assert lines[0] == "t,x1,x2,x3,x4"
    assert [float(v) for v in lines[1].split(",")] == [0, 0, 0, 0, 0]
    assert float(lines[-1].split(",")[0]) == pytest.approx(1.0)


def test_integrate_json(capsys):
    code, out, _ = call(capsys, "integrate", "--n", "2", "--x0", "0,0,1,0", "--T", "1", "--format", "json")
    doc = json.loads(out)
    assert code == EXIT_OK and doc["x"][0] == [0, 0, 1, 0] and doc["t"][-1] == pytest.approx(1.0)


def test_conserve_and_isospectral(capsys):
    code, out, _ = call(capsys, "conserve", "--n", "2", "--x0", "0.3,-0.2,0.7,-0.4", "--T", "10")
    drifts = {e["relation"].split()[1]: e["value"] for e in json.loads(out)["report"]}
    assert code == EXIT_OK and set(drifts) == {"H0", "P", "H1", "H2", "H3", "H-1"}
    code, out, _ = call(capsys, "isospectral", "--n", "2", "--x0", "0,0,1,-1", "--T", "10")
    assert code == EXIT_OK


def test_conserve_threshold_fails(capsys):
    code, _, _ = call(capsys, "conserve", "--n", "2", "--x0", "0.3,-0.2,0.7,-0.4", "--T", "10",
                      "--tol", "1e-4", "--max-drift", "1e-14")
    assert code == EXIT_FAIL


@pytest.mark.parametrize("argv", [
    ["verify-symmetries", "--bogus"],
    ["no-such-command"],
    ["verify-symmetries", "--n", "4..2"],
    ["hierarchy", "--eta", "7"],
    ["hierarchy", "--levels", "0"],
    ["integrate", "--n", "1", "--x0", "0,0"],
])
def test_usage_errors(capsys, argv):
    assert call(capsys, *argv)[0] == EXIT_USAGE


@pytest.mark.parametrize("x0", ["0,0,0", "0,0,0,0,0", "a,b,c,d", ""])
def test_bad_x0(capsys, x0):
    code, _, err = call(capsys, "integrate", "--n", "2", "--x0", x0, "--T", "1")
    assert code == EXIT_X0 and "error" in err


def test_out_file(capsys, tmp_path):
    target = tmp_path / "r.json"
    code, out, _ = call(capsys, "verify-symmetries", "--n", "2", "--out", str(target))
    assert code == EXIT_OK and out == ""
    assert json.loads(target.read_text())["status"] == "pass"
    assert os.listdir(tmp_path) == ["r.json"]


def test_unwritable_output(capsys, tmp_path):
    target = tmp_path / "missing" / "r.json"
    assert call(capsys, "verify-symmetries", "--n", "2", "--out", str(target))[0] == EXIT_OUTPUT


def test_help_documents_exit_codes(capsys):
    proc = subprocess.run([sys.executable, "-m", "toda", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    for code in ("0", "1", "2", "3", "4"):
        assert f"  {code}  " in proc.stdout
