import csv
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from giantvortex import cli
from giantvortex.io import read_field_snapshot


def _run(argv, capsys):
    code = cli.run(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_rescale_json(capsys):
    code, out, _ = _run(["rescale", "--k", "1", "--s", "4", "--omega-rot", "1.5", "--omega-osc", "0.5",
                         "--epsilon", "0.1"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["command"] == "rescale"
    assert doc["config"]["omega_rot"] == 1.5
    assert doc["result"]["round_trip_residual"] < 1e-12
    assert doc["result"]["model"]["s"] == 4.0


def test_solve1d_csv_and_virial_line(tmp_path, capsys):
    out_csv, summ = tmp_path / "p.csv", tmp_path / "p.json"
    code, _, err = _run(["solve1d", "--s", "4", "--omega0", "1", "--mode", "limiting", "--out",
                         str(out_csv), "--summary", str(summ)], capsys)
    assert code == 0
    assert "virial" in err and "ok" in err
    rows = list(csv.reader(out_csv.open()))
    assert rows[0] == ["y", "g"]
    assert len(rows) == 32002
    doc = json.loads(summ.read_text())
    assert doc["result"]["virial_relative"] < 1e-6
    assert doc["result"]["mu"] == pytest.approx(1.42022931, abs=1e-6)


def test_critical_speed_json(tmp_path, capsys):
    path = tmp_path / "oc.json"
    code, _, _ = _run(["critical-speed", "--s", "4", "--out", str(path)], capsys)
    assert code == 0
    res = json.loads(path.read_text())["result"]
    assert res["residual"] < 1e-8
    assert res["unique"] is True
    assert res["omega_c"] == pytest.approx(0.0460103854, rel=1e-8)


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[trap]\ns = 3\nomega0 = 2.0\n\n[numerics]\nnodes = 4001\n")
    code, out, _ = _run(["solve1d", "--config", str(cfg), "--omega0", "1.5", "--summary",
                         str(tmp_path / "s.json"), "--out", str(tmp_path / "p.csv")], capsys)
    assert code == 0
    conf = json.loads((tmp_path / "s.json").read_text())["config"]
    assert conf["s"] == 3.0 and conf["omega0"] == 1.5 and conf["nodes"] == 4001
    assert conf["tol"] == 1e-10


@pytest.mark.parametrize("text", ["[trap]\ncolour = red\n", "[other]\ns = 3\n", "[trap]\ns = x\n",
                                  "not an ini file"])
def test_bad_config_file(tmp_path, capsys, text):
    cfg = tmp_path / "bad.ini"
    cfg.write_text(text)
    out = tmp_path / "never.csv"
    code, _, err = _run(["solve1d", "--config", str(cfg), "--out", str(out)], capsys)
    assert code == 2
    assert not out.exists()


def test_unknown_flag_prints_usage(capsys):
    code, _, err = _run(["solve1d", "--bogus", "1"], capsys)
    assert code == 2
    assert "usage" in err


@pytest.mark.parametrize("argv", [
    ["solve1d", "--s", "2"],
    ["solve1d", "--epsilon", "1.5"],
    ["solve1d", "--mode", "weighted"],
    ["solve1d", "--nodes", "2"],
    ["rescale", "--s", "4", "--omega-rot", "0.5", "--omega-osc", "0.5"],
    ["rescale", "--s", "4"],
    ["gp2d", "--ntheta", "4"],
    ["cost", "--region", "A_outer"],
    ["tf", "--samples", "1"],
])
def test_validation_errors_write_nothing(tmp_path, capsys, argv):
    out = tmp_path / "out.txt"
    code, stdout, _ = _run(argv + ["--out", str(out)], capsys)
    assert code == 2
    assert not out.exists() and stdout == ""


def test_numerical_failure_exit_code(tmp_path, capsys):
    out = tmp_path / "p.csv"
    code, stdout, err = _run(["solve1d", "--max-iter", "2", "--out", str(out)], capsys)
    assert code == 3
    diag = json.loads(err)
    assert diag["error"] == "ConvergenceError"
    assert diag["config"]["max_iter"] == 2
    assert not out.exists()


def test_tf_outputs(tmp_path, capsys):
    code, out, _ = _run(["tf", "--epsilon", "0.2", "--omega0", "1", "--summary",
                         str(tmp_path / "tf.json")], capsys)
    assert code == 0
    assert out.splitlines()[0] == "x,rho"
    res = json.loads((tmp_path / "tf.json").read_text())["result"]
    assert abs(res["mass"] - 1) < 1e-8 and res["x_in"] < 1 < res["x_out"]


def test_cost_limiting(tmp_path, capsys):
    code, out, _ = _run(["cost", "--s", "4", "--omega0", "0.5", "--nodes", "8001", "--summary",
                         str(tmp_path / "c.json")], capsys)
    assert code == 0
    assert out.splitlines()[0] == "y,g,F,K"
    res = json.loads((tmp_path / "c.json").read_text())["result"]
    assert res["positive"] is True
    assert abs(res["k_at_zero_difference"]) < 1e-6


def test_gp2d_field_snapshot_and_figures(tmp_path, capsys):
    prefix = str(tmp_path / "field")
    figs = tmp_path / "figs"
    code, out, _ = _run(["gp2d", "--epsilon", "0.5", "--omega0", "0.55", "--nr", "33", "--ntheta",
                         "96", "--field", prefix, "--figures", str(figs)], capsys)
    assert code == 0
    res = json.loads(out)["result"]
    assert res["vortex_count"] == 0 and res["winding"] == res["n_best"]
    values, meta = read_field_snapshot(prefix + ".bin", prefix + ".json")
    assert values.shape == (33, 96) and meta["ntheta"] == 96
    assert meta["config"]["nr"] == 33
    assert np.isfinite(values).all()
    assert (figs / "density.png").stat().st_size > 0


def test_sweep_validation(capsys):
    assert _run(["sweep", "--task", "tf", "--axis", "epsilon", "--values", ""], capsys)[0] == 2
    assert _run(["sweep", "--task", "tf", "--axis", "epsilon"], capsys)[0] == 2
    assert _run(["sweep", "--task", "tf", "--axis", "epsilon", "--values", "0.2,1.5"], capsys)[0] == 2
    assert _run(["sweep", "--task", "tf", "--axis", "beta", "--values", "1"], capsys)[0] == 2
    assert _run(["sweep", "--task", "tf", "--axis", "epsilon", "--range", "0.1", "0.2", "0"],
                capsys)[0] == 2


def test_sweep_rows_and_status(capsys, monkeypatch):
    monkeypatch.setenv(cli.WORKERS_ENV, "2")
    code, out, _ = _run(["sweep", "--task", "tf", "--axis", "epsilon", "--range", "0.05", "0.2",
                         "3", "--spacing", "log"], capsys)
    assert code == 0
    rows = list(csv.reader(out.splitlines()))
    assert rows[0][:3] == ["index", "epsilon", "status"]
    assert [r[0] for r in rows[1:]] == ["0", "1", "2"]
    assert all(r[2] == "ok" for r in rows[1:])
    widths = [float(r[rows[0].index("width")]) for r in rows[1:]]
    assert widths[0] < widths[1] < widths[2]


def test_sweep_partial_and_total_failure(capsys):
    argv = ["sweep", "--task", "solve1d", "--axis", "omega0", "--values", "1,2", "--nodes", "2001"]
    code, out, _ = _run(argv + ["--max-iter", "3"], capsys)
    assert code == 3
    assert all(r.split(",")[2] == "error:ConvergenceError" for r in out.splitlines()[1:])
    code, out, _ = _run(["sweep", "--task", "solve1d", "--axis", "beta", "--values", "0,1",
                         "--mode", "weighted", "--epsilon", "0.2", "--nodes", "2001"], capsys)
    assert code == 0


def test_beta_opt_sweep_trend(capsys):
    code, out, _ = _run(["sweep", "--task", "beta-opt", "--axis", "epsilon", "--values",
                         "0.2,0.1,0.05", "--omega0-rel", "1.2"], capsys)
    assert code == 0
    rows = list(csv.DictReader(out.splitlines()))
    assert len(rows) == 3
    gaps = [float(r["e_star_minus_e_gv"]) for r in rows]
    assert gaps[0] > gaps[1] > gaps[2] > 0


def test_module_entry_point(tmp_path):
    env = dict(os.environ)
    proc = subprocess.run([sys.executable, "-m", "giantvortex", "rescale", "--s", "4", "--omega-rot",
                           "2", "--omega-osc", "0"], capture_output=True, text=True, env=env)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["round_trip_residual"] < 1e-12
