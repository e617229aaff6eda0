import json
import subprocess
import sys
from pathlib import Path

import pytest

from cltlb.cli import main
from cltlb.substitutability import case_study_path, discard_counterexample_path
from cltlb.trace import Trace

from conftest import requires_solver

FORMULAS = Path(__file__).resolve().parent.parent / "formulas"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


@requires_solver
def test_contradiction_is_unsat(capsys):
    code, out, _ = run(capsys, "sat", FORMULAS / "contradiction.cltl", "-k", 3)
    assert code == 1 and out.strip() == "unsat"


@requires_solver
def test_counter_trace_out(capsys, tmp_path):
    t = tmp_path / "t.json"
    code, out, _ = run(capsys, "sat", FORMULAS / "counter.cltl", "-k", 4, "--trace-out", t)
    assert code == 0 and out.startswith("sat")
    trace = Trace.from_json(t.read_text())
    assert [trace.value("x", i) for i in range(5)] == [0, 1, 2, 3, 4]


@requires_solver
def test_emit_smt_side_effect(capsys, tmp_path):
    out_path = tmp_path / "out.smt2"
    code, _, _ = run(capsys, "sat", FORMULAS / "fp.cltl", "-k", 2, "--emit-smt", out_path)
    assert code == 0
    text = out_path.read_text()
    assert "(check-sat)" in text and "(declare-fun" in text


@requires_solver
def test_sat_json_and_verbose(capsys):
    code, out, err = run(capsys, "-v", "sat", FORMULAS / "counter.cltl", "-k", 3, "--json")
    doc = json.loads(out)
    assert code == 0 and doc["status"] == "sat" and doc["trace"]["k"] == 3
    assert "int-consts=2" in err and "sat-baseline=" in err


@requires_solver
def test_subst_case_study(capsys):
    seq = "checkSongExists,searchSongs,getSong"
    code, out, _ = run(capsys, "subst", case_study_path(), seq, "--json")
    doc = json.loads(out)
    assert code == 0 and doc["status"] == "substitutable"
    ops = [s["actual_op"]["name"] for s in doc["script"]["steps"] if s["actual_op"]]
    assert ops == ["SearchLyric", "GetLyric"]
    assert doc["replay_problems"] == []


@requires_solver
def test_subst_discard_counterexample(capsys):
    code, out, _ = run(capsys, "subst", discard_counterexample_path(), "ask,ask,ask,want", "--strategy", "discard")
    assert code == 1 and out.startswith("not-substitutable")


def test_bound_zero_is_a_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["subst", str(case_study_path()), "getSong", "--bound", "0"])
    assert exc.value.code == 64
    with pytest.raises(SystemExit) as exc:
        main(["sat", str(FORMULAS / "counter.cltl")])
    assert exc.value.code == 64


def test_oracle_eval_z(capsys, tmp_path):
    f = write(tmp_path, "z.cltl", "prop p; Z p")
    for bits in ([True, False, False], [False, False, False]):
        t = write(tmp_path, "t.json", Trace.make(2, 0, {"p": bits}, {}).to_json())
        code, out, _ = run(capsys, "oracle", f, "--trace", t)
        assert code == 0 and out.strip() == "true"


def test_oracle_enumerate(capsys, tmp_path):
    f = write(tmp_path, "c.cltl", "prop p; p & !p")
    code, out, _ = run(capsys, "oracle", f, "--enumerate", -3, 3, "-k", 2)
    assert code == 1 and out.strip() == "unsat-within-range"
    f = write(tmp_path, "f.cltl", "prop p; F p")
    code, out, _ = run(capsys, "oracle", f, "--enumerate", 0, 0, "-k", 1, "--json")
    doc = json.loads(out)
    assert code == 0 and doc["verdict"] == "sat"
    assert doc["trace"]["loop"] == 0 and doc["trace"]["props"]["p"][:2] == [True, False]


def test_oracle_budget(capsys, tmp_path):
    f = write(tmp_path, "b.cltl", "var x, y; G (x < y)")
    code, _, err = run(capsys, "oracle", f, "--enumerate", 0, 1, "-k", 5, "--budget", 4)
    assert code == 3 and "budget" in err


def test_input_errors(capsys, tmp_path):
    f = write(tmp_path, "bad.cltl", "prop p; p &")
    code, _, err = run(capsys, "sat", f, "-k", 2)
    assert code == 3 and "bad.cltl:1:12" in err
    code, _, _ = run(capsys, "sat", tmp_path / "missing.cltl", "-k", 2)
    assert code == 3
    m = write(tmp_path, "m.json", '{"expected": {}}')
    code, _, err = run(capsys, "subst", m, "a")
    assert code == 3 and "schema" in err
    code, _, err = run(capsys, "subst", case_study_path(), "getSong")
    assert code == 3


def test_solver_failure_exit(capsys, tmp_path):
    fake = write(tmp_path, "fake.sh", "#!/bin/sh\necho garbage\n")
    fake.chmod(0o755)
    code, _, err = run(capsys, "sat", FORMULAS / "contradiction.cltl", "-k", 2, "--solver", fake)
    assert code == 4 and "solver" in err


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "cltlb.cli", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "subst" in r.stdout
