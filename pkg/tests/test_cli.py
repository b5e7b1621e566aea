import json
import subprocess
import sys

import numpy as np
import pytest

from fwmsec.cli import main
from fwmsec.config import RunConfig, axis_values, load_config
from fwmsec.errors import ConfigError
from fwmsec.keyrate import load_keyrate_report
from fwmsec.qstate import load_ensemble_reports, parse_bloch_points
from fwmsec.response import parse_map_panel
from fwmsec.signal import CSV_HEADER, load_grid

SMALL_AXES = {
    "tau": {"start": 0, "stop": 2, "step": 0.2},
    "T": [0, 100, 200, 500],
    "lambda": {"start": 495, "stop": 545, "step": 5},
}


def write_config(path, **blocks):
    path.write_text(json.dumps(blocks), encoding="utf-8")
    return path


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def small_config(tmp_path):
    return write_config(tmp_path / "run.json", synthesis={"axes": SMALL_AXES, "noise_level": 0.01}, seed=7)


def test_config_defaults_and_validation(tmp_path):
    cfg = RunConfig()
    assert cfg.windows == ((495.0, 505.0), (515.0, 525.0), (535.0, 545.0))
    assert cfg.seed == 0 and cfg.output_format == "csv"
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"dataset": "a.csv", "synthesis": {}})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"windows": [[520, 530], [500, 510]]})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"windows": [[500, 520], [510, 530]]})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"colour": "blue"})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"synthesis": {"params": {"nope": 1}}})
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(bad)
    cfg = load_config(write_config(tmp_path / "c.json", dataset="data/x.csv", output={"directory": "o"}))
    assert cfg.dataset == tmp_path / "data" / "x.csv"
    assert cfg.output_dir == tmp_path / "o"


def test_axis_values():
    assert np.array_equal(axis_values({"start": 0, "stop": 1, "step": 0.2}, "tau"), [0, 0.2, 0.4, 0.6, 0.8, 1.0])
    assert axis_values({"start": 490, "stop": 550, "step": 1}, "lambda").size == 61
    with pytest.raises(ConfigError):
        axis_values({"start": 0, "stop": 1}, "tau")
    with pytest.raises(ConfigError):
        axis_values("0:1", "tau")


def test_simulate_default_row_count(tmp_path):
    cfg = write_config(tmp_path / "run.json", synthesis={})
    assert run("simulate", "--config", cfg, "--out", tmp_path / "out") == 0
    text = (tmp_path / "out" / "dataset.csv").read_text()
    rows = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    assert rows[0] == CSV_HEADER
    assert len(rows) - 1 == 51 * 51 * 61


def test_simulate_single_point(tmp_path):
    cfg = write_config(tmp_path / "run.json", synthesis={"axes": {"tau": [0], "T": [0], "lambda": [520]}})
    assert run("simulate", "--config", cfg, "--out", tmp_path) == 0
    g = load_grid(tmp_path / "dataset.csv")
    assert g.shape == (1, 1, 1)


def test_simulate_noise_free_ignores_seed(tmp_path):
    cfg = write_config(tmp_path / "run.json", synthesis={"axes": SMALL_AXES})
    run("simulate", "--config", cfg, "--out", tmp_path / "a")
    run("simulate", "--config", cfg, "--out", tmp_path / "b", "--seed", 99)
    assert (tmp_path / "a" / "dataset.csv").read_bytes() == (tmp_path / "b" / "dataset.csv").read_bytes()


def test_simulate_noise_is_seeded(small_config, tmp_path):
    run("simulate", "--config", small_config, "--out", tmp_path / "a")
    run("simulate", "--config", small_config, "--out", tmp_path / "b")
    run("simulate", "--config", small_config, "--out", tmp_path / "c", "--seed", 8)
    a = (tmp_path / "a" / "dataset.csv").read_bytes()
    assert a == (tmp_path / "b" / "dataset.csv").read_bytes()
    assert a != (tmp_path / "c" / "dataset.csv").read_bytes()
    noisy = load_grid(tmp_path / "a" / "dataset.csv")
    assert noisy.meta["seed"] == "7"


def test_simulate_needs_synthesis(tmp_path, capsys):
    cfg = write_config(tmp_path / "run.json", seed=1)
    assert run("simulate", "--config", cfg) == 2
    assert "synthesis" in capsys.readouterr().err


def test_pipeline_outputs_parse_back(small_config, tmp_path):
    out = tmp_path / "out"
    assert run("simulate", "--config", small_config, "--out", out) == 0
    ds = out / "dataset.csv"
    assert run("holevo", "--dataset", ds, "--out", out) == 0
    comps = load_ensemble_reports(out / "holevo.csv")
    assert [c.window for c in comps] == [(495.0, 505.0), (515.0, 525.0), (535.0, 545.0)]
    assert run("keyrate", "--dataset", ds, "--out", out) == 0
    report = load_keyrate_report(out / "keyrate.csv")
    summary = json.loads((out / "keyrate_summary.json").read_text())
    assert summary["rows"] == len(report.rows) == 11
    assert summary["argmax_lambda_nm"] == report.best().lambda_nm
    assert run("bloch", "--dataset", ds, "--out", out) == 0
    pts = parse_bloch_points((out / "bloch.csv").read_text())
    assert pts.shape == (11 * 4 * 11, 6)


def test_keyrate_chi_modes(small_config, tmp_path):
    for mode in ("full", "reduced", "toggled"):
        cfg = json.loads(small_config.read_text())
        cfg["scheme"] = {"kind": "coherence", "toggles": None, "chi_mode": mode}
        path = write_config(tmp_path / f"{mode}.json", **cfg)
        assert run("keyrate", "--config", path, "--out", tmp_path / mode) == 0


def test_keyrate_absent_toggle_exit_2(tmp_path, capsys):
    cfg = write_config(tmp_path / "run.json", synthesis={"axes": SMALL_AXES}, scheme={"toggles": [100, 250]})
    assert run("keyrate", "--config", cfg, "--out", tmp_path) == 2
    assert "250" in capsys.readouterr().err


def test_malformed_dataset_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text(CSV_HEADER + "\n0,0,520,1,0,0,0\n0,0,521,x,0,0,0\n", encoding="utf-8")
    assert run("holevo", "--dataset", bad, "--out", tmp_path) == 2
    assert "line 3" in capsys.readouterr().err
    assert run("holevo", "--dataset", tmp_path / "missing.csv", "--out", tmp_path) == 2


def test_bloch_pure_and_dark(tmp_path):
    ds = tmp_path / "h.csv"
    ds.write_text(CSV_HEADER + "\n0,0,520,1,0,0,0\n0,0,530,0,0.5,0,0\n", encoding="utf-8")
    assert run("bloch", "--dataset", ds, "--out", tmp_path) == 0
    pts = parse_bloch_points((tmp_path / "bloch.csv").read_text())
    assert np.array_equal(pts[:, 3:], [[0, 0, 1], [0, 0, 1]])
    ds.write_text(CSV_HEADER + "\n0,0,520,0,0,0,0\n", encoding="utf-8")
    assert run("bloch", "--dataset", ds, "--out", tmp_path) == 0
    text = (tmp_path / "bloch.csv").read_text().strip().splitlines()
    assert text == ["tau_fs,T_fs,lambda_nm,r1,r2,r3"]


def test_interference_map_panels(tmp_path):
    cfg = write_config(tmp_path / "run.json", interference_map={"grid_density": 30})
    assert run("interference-map", "--config", cfg, "--out", tmp_path, "--format", "svg") == 0
    csvs = sorted(tmp_path.glob("interference_map_*fs.csv"))
    svgs = sorted(tmp_path.glob("interference_map_*fs.svg"))
    assert len(csvs) == len(svgs) == 6
    values = [parse_map_panel(p.read_text())[2] for p in csvs]
    assert sum(int((v == 1.0).sum()) for v in values) == 1
    summary = json.loads((tmp_path / "interference_map_summary.json").read_text())["panel_max"]
    assert summary["interference_map_500nm_tau0fs"] > summary["interference_map_540nm_tau0fs"]
    svg = svgs[0].read_text()
    assert svg.startswith("<?xml") and "value->color" in svg and "data:image/png;base64," in svg


def test_interference_map_zero_coefficients(tmp_path):
    params = {"alpha0_par": 0, "alpha0_perp": 0, "beta0_par": 0, "beta0_perp": 0}
    cfg = write_config(tmp_path / "run.json", synthesis={"params": params}, interference_map={"grid_density": 10})
    assert run("interference-map", "--config", cfg, "--out", tmp_path) == 0
    for p in tmp_path.glob("interference_map_*fs.csv"):
        assert np.all(parse_map_panel(p.read_text())[2] == 0)


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "fwmsec", "holevo", "--dataset", str(tmp_path / "nope.csv")],
        capture_output=True, text=True,
    )
    assert proc.returncode == 2
    assert "error" in proc.stderr
    proc = subprocess.run([sys.executable, "-m", "fwmsec", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    for verb in ("simulate", "bloch", "holevo", "keyrate", "interference-map"):
        assert verb in proc.stdout


def test_detection_block_sets_wave_plate():
    cfg = RunConfig.from_dict({"detection": {"theta_qwp": 0.5}})
    assert cfg.detection.theta_qwp == 0.5 and cfg.scheme.theta_qwp == 0.5
    cfg = RunConfig.from_dict({"detection": {"theta_qwp": 0.5}, "scheme": {"theta_qwp": 0.25}})
    assert cfg.scheme.theta_qwp == 0.25
