import json

import pytest

from artifact.cli import main
from conftest import DATA


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr()


def test_compile_example(capsys, tmp_path):
    code, out = run(capsys, "compile", DATA / "worked.frege", "--names", "w,x", "--out", tmp_path)
    assert code == 0
    assert "conclusion: ((a | b) | (~a | a))" in out.out
    rec = json.loads((tmp_path / "worked.verify.json").read_text())
    assert all(rec["verified"].values())
    assert (tmp_path / "worked.xi.sad").exists() and (tmp_path / "worked.stats.csv").exists()


def test_check_sa(capsys):
    code, out = run(capsys, "check-sa", DATA / "phi.sad", "--system", "tbls")
    assert code == 0 and json.loads(out.out)["ok"]
    code, _ = run(capsys, "check-sa", DATA / "phi.sad", "--system", "tblscf")
    assert code == 1


def test_interpret(capsys):
    code, _ = run(capsys, "interpret", DATA / "psi0.sad")
    assert code == 0
    code, _ = run(capsys, "interpret", DATA / "psi.sad")
    assert code == 1


def test_check_frege(capsys):
    code, _ = run(capsys, "check-frege", DATA / "worked.frege")
    assert code == 0


def test_check_frege_rejects(capsys, tmp_path):
    f = tmp_path / "bad.frege"
    f.write_text("1: ~a | (b | a) ; axiom F1 [A:=a, B:=b]\n2: ~c | (b | c) ; sub 1 {a:=c}\n")
    assert run(capsys, "check-frege", f)[0] == 1
    assert run(capsys, "check-frege", f, "--mode", "sf")[0] == 0


def test_project(capsys):
    code, out = run(capsys, "project", DATA / "proj_phi_prime.sad", "--atom", "a", "--side", "right")
    assert code == 0 and "((1 | 1) & 0)" in out.out
    code, _ = run(capsys, "project", DATA / "phi.sad", "--atom", "a", "--side", "left")
    assert code == 1


def test_stats(capsys):
    code, out = run(capsys, "stats", "--family", "subchain:h=2,3,w=8", "--json")
    assert code == 0
    rows = json.loads(out.out)["rows"]
    assert [r["h"] for r in rows] == [2, 3] and all(r["verified"] for r in rows)


@pytest.mark.parametrize("argv", [
    ["frobnicate"],
    ["check-sa"],
    ["stats", "--family", "nope:h=2"],
])
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_parse_errors(capsys, tmp_path):
    f = tmp_path / "bad.sad"
    f.write_text("(leaf \"(a |\")")
    assert run(capsys, "check-sa", f)[0] == 2
    assert run(capsys, "check-sa", tmp_path / "missing.sad")[0] == 2


def test_budget_exhausted(capsys):
    code, _ = run(capsys, "compile", DATA / "worked.frege", "--budget", "5")
    assert code == 3
