import csv
import json

import numpy as np
import pytest

from marginlab import load_csv, validate
from marginlab.cli import main


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(["canon", "--out-dir", "."]) == 0
    return tmp_path


def test_gen_example(workdir):
    assert main(["gen", "--n", "50", "--m", "10", "--margin", "0.2", "--seed", "1", "--out", "d.csv"]) == 0
    d = load_csv("d.csv")
    assert validate(d).ok and (d.n, d.m) == (50, 10)
    meta = json.loads((workdir / "d.csv.json").read_text())["meta"]
    assert meta["config"]["margin"] == 0.2 and "created" in meta


def test_gen_single_row(workdir):
    assert main(["gen", "--n", "1", "--m", "2", "--margin", "0.9", "--seed", "0", "--out", "d1.csv"]) == 0
    assert len((workdir / "d1.csv").read_text().splitlines()) == 2


@pytest.mark.parametrize("argv", [
    ["gen", "--n", "5", "--m", "2", "--margin", "1.5", "--out", "x.csv"],
    ["gen", "--n", "5", "--m", "2"],
    ["run", "--data", "D2.csv", "--schedule", "sgd", "--out", "r"],
    ["solve", "--data", "missing.csv"],
    ["solve", "--data", "D2.csv", "--tol", "-1"],
    ["run", "--data", "D2.csv", "--schedule", "deep", "--depth", "3", "--widths", "2,2,2", "--out", "r"],
])
def test_usage_errors(workdir, argv):
    assert main(argv) == 2


def test_invalid_dataset_is_usage_error(workdir):
    (workdir / "long.csv").write_text("y,x1\n1,2.0\n")
    assert main(["solve", "--data", "long.csv"]) == 2


def test_solve_examples(workdir, capsys):
    assert main(["solve", "--data", "D2.csv", "--out", "s.json"]) == 0
    sol = json.loads((workdir / "s.json").read_text())
    assert sol["gamma_opt"] == pytest.approx(0.70710678, abs=1e-8)
    assert main(["solve", "--data", "D1.csv", "--out", "s1.json"]) == 0
    sol = json.loads((workdir / "s1.json").read_text())
    assert sol["gamma_opt"] == pytest.approx(1.0) and sol["w_opt"] == pytest.approx([1, 0])
    assert "gamma_opt 1" in capsys.readouterr().out


def test_solve_non_separable(workdir, caplog):
    (workdir / "ns.csv").write_text("y,x1,x2\n1,1,0\n-1,1,0\n")
    assert main(["solve", "--data", "ns.csv"]) == 3
    assert "not separable" in caplog.text


def test_numerical_failure_exit(workdir):
    assert main(["run", "--data", "D2.csv", "--schedule", "gd-constant", "--eta", "1e7",
                 "--steps", "10", "--out", "r"]) == 4


def test_run_flow_then_verify(workdir):
    assert main(["run", "--data", "D2.csv", "--schedule", "flow", "--t-end", "100", "--out", "r"]) == 0
    rows = list(csv.reader(open(workdir / "r" / "trajectory.csv")))
    t = np.array([float(r[0]) for r in rows[1:]])
    assert t[-1] == pytest.approx(100.0)
    ratios = t[1:] / t[:-1]
    assert ratios[-1] == pytest.approx(10 ** (1 / 20), rel=0.01)
    sol = json.loads((workdir / "r" / "solution.json").read_text())
    assert sol["meta"]["config"]["schedule"] == "flow"
    assert main(["verify", "--data", "D2.csv", "--run", "r", "--out", "rep.json"]) == 0
    rep = json.loads((workdir / "rep.json").read_text())
    assert rep["summary"] == "pass" and rep["meta"]["config"]["run"] == "r"


def test_tampered_bias_fails(workdir, capsys):
    assert main(["run", "--data", "D2.csv", "--schedule", "gd-adaptive", "--steps", "200", "--out", "r"]) == 0
    path = workdir / "r" / "trajectory.csv"
    rows = list(csv.reader(open(path)))
    k = rows[0].index("bias")
    for r in rows[1:]:
        r[k] = repr(float(r[k]) * 10 + 1.0)
    with open(path, "w", newline="") as fh:
        csv.writer(fh).writerows(rows)
    assert main(["verify", "--data", "D2.csv", "--run", "r", "--out", "rep.json"]) == 1
    rep = json.loads((workdir / "rep.json").read_text())
    bad = [c for c in rep["checks"] if not c["passed"]]
    assert {c["name"] for c in bad} == {"interlace_upper"}
    assert bad[0]["location_of_worst"] is not None
    assert "FAIL interlace_upper" in capsys.readouterr().out


def test_verify_mismatched_dataset(workdir):
    assert main(["run", "--data", "D2.csv", "--schedule", "flow", "--t-end", "5", "--out", "r"]) == 0
    assert main(["verify", "--data", "D3.csv", "--run", "r"]) == 2


def test_run_deep_and_kernel(workdir):
    assert main(["run", "--data", "D2.csv", "--schedule", "deep", "--depth", "2", "--widths", "2",
                 "--steps", "300", "--out", "deep"]) == 0
    meta = json.loads((workdir / "deep" / "trajectory.json").read_text())
    assert meta["run"]["widths"] == [2, 2, 1]
    assert "product_dist" in (workdir / "deep" / "trajectory.csv").read_text().splitlines()[0]
    assert main(["verify", "--data", "D2.csv", "--run", "deep"]) == 0
    assert main(["run", "--data", "D2.csv", "--schedule", "kernel", "--kernel", "rbf",
                 "--steps", "300", "--out", "k"]) == 0
    assert main(["verify", "--data", "D2.csv", "--run", "k"]) == 0


def test_config_file_and_override(workdir):
    (workdir / "cfg.json").write_text(json.dumps({"data": "D3.csv", "schedule": "gd-aggressive",
                                                  "steps": 50, "out": "a"}))
    assert main(["run", "--config", "cfg.json", "--no-timestamp"]) == 0
    assert main(["run", "--config", "cfg.json", "--steps", "80", "--out", "b", "--no-timestamp"]) == 0
    a = json.loads((workdir / "a" / "trajectory.json").read_text())
    b = json.loads((workdir / "b" / "trajectory.json").read_text())
    assert a["meta"]["config"]["steps"] == 50 and b["meta"]["config"]["steps"] == 80
    assert b["meta"]["config"]["schedule"] == "gd-aggressive"
    assert "created" not in a["meta"]
    (workdir / "bad.json").write_text(json.dumps({"stepz": 3}))
    assert main(["run", "--config", "bad.json", "--data", "D2.csv", "--out", "c"]) == 2


def test_fit_command(workdir, capsys):
    assert main(["run", "--data", "D3.csv", "--schedule", "gd-aggressive", "--steps", "2000",
                 "--out", "r"]) == 0
    assert main(["fit", "--run", "r", "--field", "smooth_margin", "--t-min", "10", "--out", "f.json"]) == 0
    fit = json.loads((workdir / "f.json").read_text())["fits"][0]
    assert fit["field"] == "smooth_margin" and fit["n_points"] >= 5
    assert main(["fit", "--run", "nowhere"]) == 2


@pytest.mark.parametrize("argv", [
    ["gen", "--n", "20", "--m", "3", "--margin", "0.2", "--seed", "4", "--out", "x.csv"],
    ["solve", "--data", "D3.csv", "--out", "s.json"],
    ["run", "--data", "D2.csv", "--schedule", "flow", "--t-end", "20", "--out", "r"],
    ["run", "--data", "D2.csv", "--schedule", "deep", "--depth", "3", "--steps", "200", "--out", "r"],
])
def test_byte_identical_reruns(workdir, argv):
    def snapshot():
        return {p.relative_to(workdir): p.read_bytes() for p in sorted(workdir.rglob("*")) if p.is_file()}
    assert main(argv + ["--no-timestamp"]) == 0
    first = snapshot()
    assert main(argv + ["--no-timestamp"]) == 0
    assert snapshot() == first
