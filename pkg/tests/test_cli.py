import csv
import json
import os
import subprocess
import sys

import pytest

from hatlab import cli

BALL = json.dumps({"type": "ball", "center": [0, 0], "radius": 1})
BALL13 = json.dumps({"type": "ball", "center": [0, 0], "radius": 1 / 3})


def run_main(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_indicator_to_stdout(capsys):
    code, out, err = run_main(capsys, "indicator", "--body", BALL, "--tau", "0,1", "--eps", "0.5", "--delta", "0.3333")
    assert code == 0 and not err
    rep = json.loads(out)
    # (1 - 0.5)(sec(0.3333 pi) - 1)
    assert rep["result"]["alpha0"] == pytest.approx(0.49982, abs=1e-5)
    assert set(rep) == {"command", "config", "result", "seed", "versions", "notes", "wall_time"}
    assert rep["config"]["eps"] == 0.5 and rep["command"] == "indicator"


def test_order_example(tmp_path, capsys):
    out = tmp_path / "o.json"
    code, _, _ = run_main(capsys, "order", "--body", BALL13, "--seq", "harmonic2", "--imax", "8", "--out", str(out))
    assert code == 0
    rep = json.loads(out.read_text())
    assert rep["result"]["index_set"] == [1, 2, 3] and rep["result"]["order"] == 3
    assert all(rep["result"]["certificates_verified"])
    with open(tmp_path / "o.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["index"] for r in rows] == ["1", "2", "3"]
    assert (tmp_path / "o.csv").read_bytes().count(b"\r\n") == 4


def test_outputs_and_svg(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, stdout, _ = run_main(capsys, "indicator", "--body", BALL, "--tau", "0,1", "--out", str(out), "--plot")
    assert code == 0 and stdout == ""
    assert sorted(os.listdir(tmp_path)) == ["r.csv", "r.json", "r.svg"]
    svg = (tmp_path / "r.svg").read_text()
    assert svg.lstrip().startswith("<?xml") and "<svg" in svg


def test_curvature_plot_in_3d(tmp_path, capsys):
    body = json.dumps({"type": "ellipsoid", "semi_axes": [2, 1, 1]})
    out = tmp_path / "c.json"
    code, _, _ = run_main(capsys, "curvature", "--body", body, "--x", "2,0,0", "--nu=-1,0,0", "--out", str(out),
                          "--plot", "--plane", "0,2")
    assert code == 0
    rep = json.loads(out.read_text())
    assert rep["result"]["verdict"] == "exists" and rep["result"]["kappa_i"] == pytest.approx(2.0, abs=1e-6)
    assert (tmp_path / "c.svg").exists()


def test_payload_is_reproducible(tmp_path, capsys):
    args = ["sample", "--body", BALL, "--budget", "0.05", "--n", "3", "--seed", "4"]
    reps = []
    for k in range(2):
        out = tmp_path / f"s{k}.json"
        assert run_main(capsys, *args, "--out", str(out))[0] == 0
        reps.append(json.loads(out.read_text()))
    assert reps[0]["result"] == reps[1]["result"]
    assert (tmp_path / "s0.csv").read_bytes() == (tmp_path / "s1.csv").read_bytes()


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"command": "indicator", "body": json.loads(BALL), "tau": [0, 1], "eps": 2.0, "delta": 0.25}))
    code, out, _ = run_main(capsys, "indicator", "--config", str(cfg))
    assert code == 0 and json.loads(out)["result"]["alpha0"] == 0.0
    code, out, _ = run_main(capsys, "indicator", "--config", str(cfg), "--eps", "0.5", "--delta", "0.3333")
    assert json.loads(out)["result"]["alpha0"] == pytest.approx(0.49982, abs=1e-5)


@pytest.mark.parametrize(
    "argv,field",
    [
        (["verify", "--suite", "nope"], "suite"),
        (["indicator", "--body", BALL, "--tau", "0,1", "--delta", "0.5"], "delta"),
        (["indicator", "--body", BALL, "--tau", "0,0"], "tau"),
        (["indicator", "--body", '{"type": "ball", "radius": -1, "center": [0, 0]}', "--tau", "0,1"], "body"),
        (["indicator", "--body", "/no/such/file.json", "--tau", "0,1"], "body"),
        (["indicator", "--bogus", "1"], None),
    ],
)
def test_invalid_input_exit_two(capsys, argv, field):
    code, out, err = run_main(capsys, *argv)
    assert code == 2 and out == ""
    e = json.loads(err)
    assert e["error"] == "invalid-config" and e["field"] == field


def test_unknown_config_field(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"body": json.loads(BALL), "tau": [0, 1], "epsilon": 0.5}))
    code, _, err = run_main(capsys, "indicator", "--config", str(cfg))
    assert code == 2 and json.loads(err)["field"] == "epsilon"
    cfg.write_text(json.dumps({"command": "order", "body": json.loads(BALL)}))
    assert run_main(capsys, "indicator", "--config", str(cfg))[0] == 2


def test_precondition_errors_exit_two(capsys):
    square = json.dumps({"type": "polytope", "vertices": [[1, 1], [-1, 1], [-1, -1], [1, -1]]})
    code, _, err = run_main(capsys, "indicator", "--body", square, "--tau", "0,1")
    assert code == 2 and json.loads(err)["kind"] == "PreconditionError"
    code, _, err = run_main(capsys, "spike", "--body", BALL, "--tau", "1,0", "--x", "0,0", "--theta", "0.5")
    assert code == 2 and json.loads(err)["kind"] == "DegenerateSpikeError"


def test_numeric_failure_exit_three(tmp_path, capsys):
    out = tmp_path / "bad.json"
    code, _, err = run_main(capsys, "curvature", "--body", BALL, "--x", "0,2", "--nu", "0,1", "--out", str(out))
    assert code == 3
    e = json.loads(err)
    assert e["error"] == "numeric-failure" and "scale" in e["diagnostics"]
    # nothing half written
    assert os.listdir(tmp_path) == []


def test_failed_write_leaves_no_partial_file(tmp_path, capsys, monkeypatch):
    out = tmp_path / "r.json"

    def boom(*a, **k):
        raise OSError("disk full")

    monkeypatch.setattr(cli.report, "dumps", boom)
    with pytest.raises(OSError):
        cli.main(["indicator", "--body", BALL, "--tau", "0,1", "--out", str(out)])
    assert os.listdir(tmp_path) == []


def test_failed_plot_removes_csv(tmp_path, capsys, monkeypatch):
    out = tmp_path / "r.json"

    def boom(*a, **k):
        raise RuntimeError("renderer crashed")

    monkeypatch.setattr(cli, "_plot", boom)
    with pytest.raises(RuntimeError):
        cli.main(["indicator", "--body", BALL, "--tau", "0,1", "--out", str(out), "--plot"])
    assert os.listdir(tmp_path) == []


def test_verify_ball_oracle_small(tmp_path, capsys):
    out = tmp_path / "v.json"
    code, _, _ = run_main(capsys, "verify", "--suite", "ball-oracle", "--scale", "0.1", "--out", str(out))
    rep = json.loads(out.read_text())
    assert code == 0 and rep["result"]["ok"]
    assert "seconds" not in rep["result"] and "ball-oracle" in rep["wall_time"]


def test_console_script_help():
    exe = os.path.join(os.path.dirname(sys.executable), "hatlab")
    cmd = [exe] if os.path.exists(exe) else [sys.executable, "-m", "hatlab.cli"]
    res = subprocess.run(cmd + ["--help"], capture_output=True, text=True, timeout=60)
    assert res.returncode == 0
    for name in cli.COMMANDS:
        assert name in res.stdout
    res = subprocess.run(cmd + ["indicator", "--body", BALL, "--tau", "0,1", "--eps", "0.5", "--delta", "0.3333"],
                         capture_output=True, text=True, timeout=120)
    assert res.returncode == 0 and json.loads(res.stdout)["result"]["alpha0"] == pytest.approx(0.49982, abs=1e-5)
