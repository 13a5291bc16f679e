import json
import subprocess
import sys

import numpy as np
import pytest

from hjlab.cli import run
from hjlab.io import read_field


def invoke(argv, capsys):
    code = run(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def summary(out):
    return json.loads(out)


def test_solve_hj_example(capsys, tmp_path):
    code, out, _ = invoke(["solve-hj", "--n", "128", "--gamma", "2", "--source", "cos(2*pi*x)", "--out", str(tmp_path)], capsys)
    assert code == 0
    s = summary(out)
    assert abs(s["estimate"]["ratio"] - 1.0) <= 1e-8
    assert abs(s["solution"]["lambda"]) <= 1.0
    assert s["estimate_bound_applies"] is True
    u = read_field(tmp_path / "u.txt")
    assert u.n == 128


def test_thresholds_example(capsys):
    code, out, _ = invoke(["thresholds", "--n", "5", "--gamma", "2", "--alpha", "1.5", "--regime", "stationary-defocusing"], capsys)
    assert code == 0
    v = summary(out)["verdict"]
    assert v["satisfied"] is True and v["threshold"] == 2.0


def test_solve_mfg_example(capsys):
    code, out, _ = invoke(["solve-mfg", "--n", "64", "--alpha", "3", "--sigma", "1", "--potential", "zero"], capsys)
    assert code == 0
    s = summary(out)["solution"]
    assert abs(s["lambda"] - 1.0) <= 1e-10
    assert abs(s["max_m"] - 1.0) <= 1e-10


def test_solve_mfg_hopf_cole(capsys):
    code, out, _ = invoke(["solve-mfg", "--n", "32", "--method", "hopf-cole", "--potential", "0.5*cos(2*pi*x)"], capsys)
    assert code == 0
    assert summary(out)["solution"]["residual_hj"] <= 1e-7
    code, _, err = invoke(["solve-mfg", "--n", "32", "--method", "hopf-cole", "--gamma", "3"], capsys)
    assert code == 2 and "hopf-cole" in err


def test_threshold_grid_csv(capsys, tmp_path):
    argv = ["thresholds", "--n", "3", "--regime", "parabolic-defocusing", "--gamma-grid", "2.5,3", "--alpha-grid", "0.1,1", "--out", str(tmp_path)]
    code, out, _ = invoke(argv, capsys)
    assert code == 0
    assert len(summary(out)["cells"]) == 4
    lines = (tmp_path / "thresholds.csv").read_text().strip().split("\n")
    assert len(lines) == 5


def test_invalid_input_exit_codes(capsys):
    assert invoke(["thresholds", "--n", "3", "--regime", "bogus"], capsys)[0] == 2
    assert invoke(["no-such-command"], capsys)[0] == 2
    assert invoke(["solve-hj", "--source", "cos(2*pi*x"], capsys)[0] == 2
    assert invoke(["solve-hj", "--n", "48"], capsys)[0] == 2
    assert invoke(["thresholds", "--n", "3", "--gamma", "1"], capsys)[0] == 2


def test_solver_failure_exit_code(capsys):
    code, _, err = invoke(["solve-hj", "--n", "16", "--source", "3*sin(2*pi*x)*cos(2*pi*y)", "--tol", "1e-30"], capsys)
    assert code == 1 and "solver failure" in err


def test_non_periodic_source_is_flagged(capsys):
    code, out, _ = invoke(["identities", "--n", "16", "--field", "x"], capsys)
    assert code == 0
    assert summary(out)["flags"] == ["non-periodic: x"]


def test_identities_and_report(capsys, tmp_path):
    code, out, _ = invoke(["identities", "--n", "32"], capsys)
    assert code == 0 and max(summary(out)["residuals"].values()) <= 1e-10
    code, out, _ = invoke(["report", "--n", "32", "--field", "sin(2*pi*x)", "--q", "3", "--pairs", "1000"], capsys)
    lp = summary(out)["lp"]
    assert lp["2"] == pytest.approx(np.sqrt(0.5), rel=1e-14)
    code, out, _ = invoke(["solve-fp", "--n", "16", "--out", str(tmp_path)], capsys)
    assert code == 0
    code, out, _ = invoke(["report", "--file", str(tmp_path / "m.txt"), "--pairs", "100"], capsys)
    assert code == 0 and summary(out)["lp"]["1"] == pytest.approx(1.0)


def test_audit_corpus_and_search(capsys, tmp_path):
    code, out, _ = invoke(["audit", "--n", "32", "--count", "2", "--out", str(tmp_path / "a")], capsys)
    assert code == 0 and summary(out)["max_ratio"] <= 3 * (1 + 1e-3)
    assert (tmp_path / "a" / "audit.csv").read_text().startswith("seed,ratio")
    code, out, _ = invoke(["search-worst", "--n", "32", "--seeds", "1", "--iters", "1", "--band", "1"], capsys)
    assert code == 0 and summary(out)["best_ratio"] <= 3 * (1 + 1e-3)


def test_sweep_outputs(capsys, tmp_path):
    argv = ["sweep-alpha", "--n", "32", "--alphas", "0.5,2", "--potential", "0.5*cos(2*pi*x)", "--out", str(tmp_path)]
    code, out, _ = invoke(argv, capsys)
    assert code == 0 and summary(out)["all_converged"]
    assert (tmp_path / "sweep.csv").read_text().startswith("alpha,converged,lam")


def test_output_directory_is_deterministic(capsys, tmp_path):
    argv = ["solve-mfg", "--n", "32", "--alpha", "2", "--potential", "0.5*cos(2*pi*x)"]
    invoke(argv + ["--out", str(tmp_path / "a")], capsys)
    invoke(argv + ["--out", str(tmp_path / "b")], capsys)
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())["files"]
    assert manifest == sorted(["config.json", "summary.json", "manifest.json", "u.txt", "u.csv", "m.txt", "m.csv"])
    for name in manifest:
        a = (tmp_path / "a" / name).read_text()
        b = (tmp_path / "b" / name).read_text()
        if name == "config.json":
            a, b = json.loads(a), json.loads(b)
            assert a.pop("out") != b.pop("out")
        assert a == b, name
    config = json.loads((tmp_path / "a" / "config.json").read_text())
    assert config["alpha"] == 2.0 and config["command"] == "solve-mfg"


def test_output_directory_from_environment(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("HJLAB_OUT", str(tmp_path / "env"))
    assert invoke(["thresholds", "--n", "2"], capsys)[0] == 0
    assert (tmp_path / "env" / "summary.json").exists()


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "hjlab", "thresholds", "--n", "3", "--gamma", "2", "--regime", "stationary-focusing"],
        capture_output=True, text=True, check=True,
    )
    assert json.loads(proc.stdout)["verdict"]["threshold"] == pytest.approx(2 / 3)
