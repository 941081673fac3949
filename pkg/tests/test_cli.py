import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from gaussmet.cli import main
from gaussmet.models import load_model


@pytest.fixture
def vacuum_model(tmp_path):
    path = tmp_path / "vacuum.json"
    path.write_text(json.dumps({"N": 1e4, "mode": {"family": "rotation", "dim": 2, "rate": 0.5}}))
    return path


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_crb_vacuum(vacuum_model, capsys):
    code, out, _ = run(["crb", "--model", vacuum_model], capsys)
    assert code == 0
    res = json.loads(out)
    assert res["p_c"] == pytest.approx(2)
    assert res["delta_p"] == pytest.approx(0.01, rel=1e-12)


def test_crb_photon_override(vacuum_model, capsys):
    code, out, _ = run(["crb", "--model", vacuum_model, "--photons", "1e6"], capsys)
    assert json.loads(out)["delta_p"] == pytest.approx(1e-3, rel=1e-12)


def test_optimize_then_simulate(vacuum_model, tmp_path, capsys):
    opt = tmp_path / "opt.json"
    code, out, _ = run(["optimize", "--model", vacuum_model, "--sigma", "0.5,0.8", "--out", opt], capsys)
    assert code == 0
    res = json.loads(out)
    assert res["delta_p_opt"] == pytest.approx(2 * 0.5 / (2 * 100), rel=1e-12)
    assert np.allclose(np.linalg.inv(load_model(opt).cov())[1, 1], 4)

    prefix = tmp_path / "run"
    code, out, _ = run(
        ["simulate", "--model", opt, "--samples", 100000, "--seed", 7, "--p-true", 1e-4, "--out", prefix], capsys
    )
    assert code == 0
    summary = json.loads(prefix.with_suffix(".json").read_text())
    assert 0.97 <= summary["variance_over_crb_sq"] <= 1.03
    with open(prefix.with_suffix(".csv")) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["sample_index", "I_minus", "p_hat"]
    assert len(rows) == 100001


def test_simulate_byte_identical(vacuum_model, tmp_path, capsys):
    outs = []
    for name in ("a", "b"):
        prefix = tmp_path / name
        run(["simulate", "--model", vacuum_model, "--samples", 100000, "--seed", 7, "--out", prefix], capsys)
        outs.append((prefix.with_suffix(".json").read_bytes(), prefix.with_suffix(".csv").read_bytes()))
    assert outs[0] == outs[1]


def test_simulate_thread_count_does_not_change_output(vacuum_model, tmp_path, capsys, monkeypatch):
    outs = []
    for threads in ("1", "3"):
        monkeypatch.setenv("GAUSSMET_THREADS", threads)
        prefix = tmp_path / f"t{threads}"
        run(["simulate", "--model", vacuum_model, "--samples", 150000, "--seed", 3, "--out", prefix], capsys)
        outs.append(prefix.with_suffix(".csv").read_bytes())
    assert outs[0] == outs[1]


def test_interferometer_table(tmp_path, capsys):
    out_csv = tmp_path / "interf.csv"
    code, out, _ = run(
        ["interferometer", "--profile", "scaled:5", "--sigma", "1,0.1", "--photons", 1e4, "--out", out_csv], capsys
    )
    assert code == 0
    with open(out_csv) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 32
    assert set(rows[0]) == {"phi0", "sigma", "N", "Fprime", "delta_phi"}
    dphi = {float(r["sigma"]): float(r["delta_phi"]) for r in rows}
    assert dphi[1.0] == pytest.approx(1 / (5 * 100))
    assert dphi[0.1] == pytest.approx(0.1 / (5 * 100))


def test_sweep_table(tmp_path, capsys):
    model = tmp_path / "m.json"
    model.write_text(json.dumps({"N": 1e4, "mode": {"family": "rotation", "dim": 3, "rate": 1.0}}))
    out_csv = tmp_path / "sweep.csv"
    code, _, _ = run(["sweep", "--model", model, "--sigma", "0.5,0.7", "--out", out_csv], capsys)
    assert code == 0
    with open(out_csv) as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == ["placement", "entanglement", "crb", "ratio_to_optimal"]
    best = min(rows, key=lambda r: float(r["crb"]))
    assert best["placement"] == "mode0" and best["entanglement"] == "none"
    assert float(best["ratio_to_optimal"]) == pytest.approx(1)


def test_malformed_model_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"N": 1,\n  "mode": {"family": }}')
    code, _, err = run(["crb", "--model", bad], capsys)
    assert code == 2
    assert "line 2" in err


def test_missing_field_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"mode": {"family": "rotation"}}))
    code, _, err = run(["crb", "--model", bad], capsys)
    assert code == 2 and "'N'" in err


def test_missing_model_file_exit_2(tmp_path, capsys):
    code, _, _ = run(["crb", "--model", tmp_path / "nope.json"], capsys)
    assert code == 2


def test_bad_flags_exit_2(vacuum_model, capsys):
    assert run(["crb", "--model", vacuum_model, "--seed", "x"], capsys)[0] == 2
    assert run(["simulate", "--model", vacuum_model, "--samples", 0], capsys)[0] == 2
    assert run(["optimize", "--model", vacuum_model], capsys)[0] == 2


def test_singular_covariance_exit_1(tmp_path, capsys):
    path = tmp_path / "sing.json"
    cov = np.eye(4)
    cov[3, 3] = 1e-18
    path.write_text(json.dumps({"N": 1, "mode": {"family": "rotation"}, "cov": {"family": "constant", "cov": cov.tolist()}}))
    code, _, err = run(["crb", "--model", path], capsys)
    assert code == 1
    assert "covariance" in err


def test_module_entry_point(vacuum_model):
    proc = subprocess.run(
        [sys.executable, "-m", "gaussmet", "crb", "--model", str(vacuum_model)], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["delta_p"] == pytest.approx(0.01)


@pytest.mark.parametrize("name", ["vacuum.json", "rotating_squeezed.json"])
def test_sample_models_load(name, capsys):
    from pathlib import Path

    path = Path(__file__).resolve().parent.parent / "sample_models" / name
    code, out, _ = run(["crb", "--model", path], capsys)
    assert code == 0
    assert json.loads(out)["delta_p"] > 0
