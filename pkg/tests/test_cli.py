import json

import numpy as np
import pytest

from mfeit.cli import main
from mfeit.forward import CauchyData, solve_u0
from mfeit.geometry import circle, unit_circle_grid
from mfeit.forward import current_from_fourier

from conftest import R0

BASE = {
    "domain": {"b0": 0.2, "delta": 0.1},
    "shape": {"cos": [0.5]},
    "current": {"cos": [1.0]},
    "n_measure": 64,
    "n_boundary": 128,
    "profile": {"model": "affine", "k_r": -0.5, "c": 0.05},
    "omega": {"start": 10.0, "stop": 50.0, "count": 40},
    "eta": 0.0,
}


def write_cfg(tmp_path, name, cfg):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def run(cmd, cfg_path, out):
    return main([cmd, "--config", cfg_path, "--out", str(out)])


def test_missing_config_exits_4(tmp_path):
    assert main(["synth", "--config", str(tmp_path / "nope.json"),
                 "--out", str(tmp_path / "o")]) == 4


def test_malformed_json_exits_2_with_location(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{"shape": [,]}')
    assert main(["synth", "--config", str(p), "--out", str(tmp_path / "o")]) == 2
    err = capsys.readouterr().err
    assert "line" in err and "column" in err


def test_infeasible_shape_exits_2(tmp_path):
    cfg = dict(BASE, shape={"cos": [0.15]})
    assert run("synth", write_cfg(tmp_path, "c.json", cfg), tmp_path / "o") == 2


def test_numeric_failure_exits_3(tmp_path):
    cfg = {"domain": BASE["domain"], "shape": {"cos": [0.5]},
           "n_boundary": 128, "n_modes": 60}
    assert run("spectrum", write_cfg(tmp_path, "c.json", cfg),
               tmp_path / "o") == 3


def test_missing_input_exits_4(tmp_path):
    cfg = {"domain": BASE["domain"],
           "inputs": {"dataset": str(tmp_path / "none.csv")}}
    assert run("extract", write_cfg(tmp_path, "c.json", cfg),
               tmp_path / "o") == 4


def test_spectrum_command_reports_oracle(tmp_path):
    cfg = {"domain": BASE["domain"], "shape": {"cos": [0.5]},
           "n_boundary": 256, "n_modes": 12, "n_measure": 64}
    out = tmp_path / "spec"
    assert run("spectrum", write_cfg(tmp_path, "c.json", cfg), out) == 0
    rep = json.loads((out / "spectrum.json").read_text())
    assert np.isclose(rep["lambda"][0], 0.625, atol=1e-10)
    assert np.isclose(rep["bound"], -26.0)
    assert (out / "traces.csv").exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert "spectrum.json" in manifest["outputs"]


def test_forward_command(tmp_path):
    cfg = dict(BASE, contrasts=[[2.0, 0.0], [0.5, 1.0]])
    out = tmp_path / "fwd"
    assert run("forward", write_cfg(tmp_path, "c.json", cfg), out) == 0
    assert (out / "forward.csv").read_text().startswith("omega,re_k,im_k")


def test_synth_byte_determinism(tmp_path):
    cfg = dict(BASE, eta=1e-3, seed=42)
    p = write_cfg(tmp_path, "c.json", cfg)
    assert run("synth", p, tmp_path / "a") == 0
    assert run("synth", p, tmp_path / "b") == 0
    assert (tmp_path / "a/dataset.csv").read_bytes() \
        == (tmp_path / "b/dataset.csv").read_bytes()
    assert (tmp_path / "a/manifest.json").read_bytes() \
        == (tmp_path / "b/manifest.json").read_bytes()


def test_end_to_end_synth_extract_invert(tmp_path):
    p = write_cfg(tmp_path, "synth.json", BASE)
    assert run("synth", p, tmp_path / "s") == 0

    ext = {"domain": BASE["domain"], "max_poles": 4, "fit_tol": 1e-10,
           "inputs": {"dataset": str(tmp_path / "s/dataset.csv")}}
    assert run("extract", write_cfg(tmp_path, "ext.json", ext),
               tmp_path / "e") == 0

    # extracted u0 reproduces the perfect-conductor solve
    u0 = CauchyData.from_csv((tmp_path / "e/u0.csv").read_text())
    f = current_from_fourier([1.0], [], unit_circle_grid(64))
    truth = solve_u0(circle(R0), f, n=256)
    assert np.max(np.abs(u0.u0 - truth.u0)) < 1e-6

    inv = {"domain": BASE["domain"], "shape": {"cos": [0.5]},
           "current": {"cos": [1.0]},
           "inversion": {"n_fourier_modes": 0, "alpha": 0.0},
           "inputs": {"cauchy": str(tmp_path / "e/u0.csv")}}
    assert run("invert", write_cfg(tmp_path, "inv.json", inv),
               tmp_path / "i") == 0
    shape = json.loads((tmp_path / "i/shape.json").read_text())
    assert abs(shape["cos"][0] - R0) < 1e-6
    report = json.loads((tmp_path / "i/inversion.json").read_text())
    assert report["sym_diff_vs_truth"] < 1e-6


def test_degenerate_sweep_emits_one_row(tmp_path):
    cfg = dict(BASE, noise_levels=[1e-3], seeds=[1], max_poles=4,
               inversion={"n_fourier_modes": 0, "alpha": 0.0})
    out = tmp_path / "sw"
    assert run("sweep", write_cfg(tmp_path, "c.json", cfg), out) == 0
    lines = (out / "sweep.csv").read_text().strip().splitlines()
    assert len(lines) == 2  # header + one row
    assert lines[1].endswith("ok")


def test_threads_flag_accepted(tmp_path, monkeypatch):
    monkeypatch.setenv("MFEIT_THREADS", "2")
    inv_cfg = dict(BASE)
    p = write_cfg(tmp_path, "c.json", inv_cfg)
    assert main(["synth", "--config", p, "--out", str(tmp_path / "o"),
                 "--threads", "2"]) == 0
