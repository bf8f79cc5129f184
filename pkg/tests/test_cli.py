import csv
import io
import json
import math
import subprocess
import sys

import pytest

from baxterq import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_lfactor_gl_rank_zero(capsys):
    code, out, _ = run(capsys, "lfactor", "--group", "gl", "--l", "0", "--s", "0,-2", "--lam", "0")
    assert code == 0
    val = json.loads(out)
    assert val["re"] == pytest.approx(1 / math.pi, rel=1e-14)
    assert val["im"] == 0.0


def test_lfactor_so_even(capsys):
    code, out, _ = run(capsys, "lfactor", "--group", "so-even", "--l", "1", "--s", "0,-2",
                       "--lam", "0")
    assert code == 0
    assert json.loads(out)["re"] == pytest.approx(1 / math.pi ** 2, rel=1e-14)


def test_lfactor_sp_adds_trivial_weight(capsys):
    _, out, _ = run(capsys, "lfactor", "--group", "sp", "--l", "1", "--s", "0,-2", "--lam", "0")
    assert json.loads(out)["re"] == pytest.approx(1 / math.pi ** 3, rel=1e-14)


@pytest.mark.parametrize("argv", [
    ("lfactor", "--group", "gl", "--l", "1", "--lam", "0"),      # wrong lambda length
    ("lfactor", "--s", "0,2"),                                   # outside convergence domain
    ("lfactor", "--s", "1,2,3"),                                 # not a complex pair
    ("lfactor", "--lam", "x"),                                   # not a number
    ("verify", "--suite", "nope"),                               # unknown suite
    ("verify", "--effort", "-5"),                                # negative effort
    ("eval", "whittaker", "--l", "2", "--lam", "0,0,0"),         # no closed form at rank 2
    ("eval", "r-g", "--group", "gl"),                            # wrong group
    ("eval", "q-group", "--group", "so-even", "--l", "1", "--g", "1,2,3"),
])
def test_configuration_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err


def test_eval_q_kernel_origin(capsys):
    code, out, _ = run(capsys, "eval", "q-kernel", "--l", "1", "--x", "0,0", "--y", "0,0",
                       "--s", "0,0")
    assert code == 0
    payload = json.loads(out)
    assert payload["schema"] == 1
    assert payload["value"]["re"] == pytest.approx(4 * math.exp(-3 * math.pi), rel=1e-14)


def test_eval_whittaker_point(capsys):
    _, out, _ = run(capsys, "eval", "whittaker", "--l", "1", "--lam", "0,0", "--x", "0,0")
    # [DERIVED] K_0(2 pi) from mpmath
    assert json.loads(out)["value"]["re"] == pytest.approx(9.16584360904370e-4, rel=1e-12)


def test_eval_whittaker_grid_csv(capsys, tmp_path):
    path = tmp_path / "grid.csv"
    code, _, _ = run(capsys, "eval", "whittaker", "--l", "1", "--lam", "1,-1", "--grid=-1,1,4",
                     "--out", str(path))
    assert code == 0
    rows = list(csv.reader(io.StringIO(path.read_text())))
    assert rows[0] == ["x1", "x2", "re", "im"]
    assert len(rows) == 1 + 16
    assert [float(v) for v in rows[1][:2]] == [-1.0, -1.0]


def test_eval_grid_to_stdout_rank_zero(capsys):
    _, out, _ = run(capsys, "eval", "whittaker", "--l", "0", "--lam", "2", "--grid=0,1,3")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["x1", "re", "im"]
    assert float(rows[3][1]) == pytest.approx(math.cos(2.0))


def test_eval_q_group_kinds(capsys):
    _, out, _ = run(capsys, "eval", "q-group", "--group", "so-even", "--l", "1",
                    "--g", "1,0,0,1", "--s", "0,-2")
    closed = json.loads(out)["value"]["re"]
    # Gamma_R(4) 2^{-2}
    assert closed == pytest.approx(1 / math.pi ** 2 / 4, rel=1e-13)
    _, out, _ = run(capsys, "eval", "q-group", "--group", "so-even", "--l", "1",
                    "--g", "1,0,0,1", "--s", "0,-2", "--effort", "2e4", "--seed", "3")
    mc = json.loads(out)
    assert abs(mc["value"]["re"] - closed) <= 5 * mc["error_estimate"]
    _, out, _ = run(capsys, "eval", "q-group", "--g", "1.3", "--s", "1,-3", "--kind", "squared")
    assert "error_estimate" in json.loads(out)
    _, out, _ = run(capsys, "eval", "q-group", "--g", "1.3", "--s", "1,-3", "--kind", "tilde")
    assert json.loads(out)["object"] == "q-group"


def test_eval_spherical_and_r_g(capsys):
    code, out, _ = run(capsys, "eval", "spherical", "--l", "1", "--lam", "1,-1",
                       "--g", "1,0,0,1", "--effort", "2000")
    assert code == 0 and json.loads(out)["value"]["re"] == 1.0
    code, out, _ = run(capsys, "eval", "r-g", "--group", "so-even", "--l", "1",
                       "--g", "0,0,0,0", "--s", "0,-2", "--effort", "5000")
    assert code == 0 and json.loads(out)["value"]["re"] == pytest.approx(1.0, abs=1e-9)


def test_verify_gl1_writes_report(capsys, tmp_path):
    path = tmp_path / "report.json"
    code, _, err = run(capsys, "verify", "--suite", "gl1", "--out", str(path))
    assert code == 0
    assert "PASS gl1" in err
    report = json.loads(path.read_text())
    assert report["schema"] == 1 and report["pass"] is True
    rec = report["suites"][0]["records"][0]
    assert set(rec) >= {"id", "paper_ref", "computed", "expected", "tolerance",
                        "error_estimate", "pass"}


def test_verify_failure_exits_1(capsys):
    # an impossible tolerance turns deterministic checks red
    code, _, err = run(capsys, "verify", "--suite", "prop23", "--tol", "1e-30")
    assert code == 1
    assert "FAIL prop23" in err


def test_verify_optional_suite_does_not_fail_the_run(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "sp2-mc", "--effort", "4000")
    report = json.loads(out)
    assert report["suites"][0]["optional"] is True
    assert code == 0


def test_help_exits_zero(capsys):
    assert cli.main(["--help"]) == 0


def test_console_entry_point_and_thread_variable():
    env = {"BAXTERQ_THREADS": "1", "PATH": "/usr/bin:/bin"}
    proc = subprocess.run([sys.executable, "-c",
                           "import os, baxterq.cli; print(os.environ['OMP_NUM_THREADS'])"],
                          capture_output=True, text=True, env=env, check=True)
    assert proc.stdout.strip() == "1"
    proc = subprocess.run([sys.executable, "-m", "baxterq", "lfactor", "--s", "0,-2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["re"] > 0
