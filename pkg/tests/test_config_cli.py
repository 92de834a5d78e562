import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

import rqtraj as rq
from rqtraj.cli import main
from rqtraj.config import RunConfig, parse_config_text
from rqtraj.errors import ConfigError
from rqtraj.output import read_csv

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def small_const_config(out_dir, **overrides):
    cfg = RunConfig(
        energy=2.0,
        potential_kind="constant",
        u0=0.0,
        param_sets=[(0.2, 0.0), (4 / 3, -1.05), (0.25, 8.0)],
        x0=0.0,
        t_min=0.0,
        t_max=5 * rq.node_period(rq.PhysicalSetup(E=2.0, m0c2=0.510999), 0.0),
        samples=50001,
        grid_min=-200.0,
        grid_max=2000.0,
        grid_step=0.5,
        out_dir=str(out_dir),
    )
    for k, v in overrides.items():
        setattr(cfg, k, v)
    return cfg.validate()


def test_config_round_trip_bit_exact(tmp_path):
    cfg = small_const_config(tmp_path, t_max=5.4321e-21, param_sets=[(0.1, -2.25)])
    text = cfg.canonical_text()
    back = parse_config_text(text)
    assert back.canonical_text() == text
    for field in ("energy", "rest_energy", "t_max", "grid_step", "x0"):
        assert getattr(back, field) == getattr(cfg, field)
    assert back.param_sets == cfg.param_sets
    assert back.hash == cfg.hash


def test_config_requires_units():
    with pytest.raises(ConfigError, match=r"line \d+.*energy.*MeV"):
        parse_config_text("[particle]\nenergy = 2.0\n")
    with pytest.raises(ConfigError, match="MeV"):
        parse_config_text("[particle]\nenergy = 2.0 GeV\n")


def test_config_rejects_zero_a():
    with pytest.raises(ConfigError, match="non-zero"):
        parse_config_text("[trajectories]\nsets = 0,1\n")


def test_config_rejects_bad_direction():
    with pytest.raises(ConfigError, match="direction"):
        parse_config_text("[trajectories]\ndirection = up\n")


def test_cli_exit_code_2_on_bad_config(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("[trajectories]\nsets = 0,1\n")
    result = CliRunner().invoke(main, ["trace", "--config", str(bad)])
    assert result.exit_code == 2
    assert "non-zero" in (result.output + str(result.stderr_bytes or b""))


def test_cli_exit_code_3_on_numerical_failure(tmp_path):
    cfg = RunConfig(potential_kind="linear", slope=1e-3, grid_min=-500.0,
                    grid_max=500.0, grid_step=40.0, out_dir=str(tmp_path / "o"))
    path = tmp_path / "steptoolarge.cfg"
    cfg.to_file(path)
    result = CliRunner().invoke(main, ["basis", "--config", str(path)])
    assert result.exit_code == 3


def test_cli_basis_constant(tmp_path):
    cfgp = tmp_path / "c.cfg"
    small_const_config(tmp_path / "out").to_file(cfgp)
    result = CliRunner().invoke(main, ["basis", "--config", str(cfgp)])
    assert result.exit_code == 0, result.output
    meta, cols = read_csv(tmp_path / "out" / "basis_analytic.csv")
    w = cols["wronskian_per_fm"]
    assert np.max(np.abs(w / w[0] - 1)) < 1e-12
    assert "config_hash" in meta


def test_cli_basis_compare_methods(tmp_path):
    cfg = RunConfig(potential_kind="linear", slope=1e-3, grid_min=-500.0,
                    grid_max=500.0, grid_step=0.2, out_dir=str(tmp_path / "out"))
    cfgp = tmp_path / "lin.cfg"
    cfg.to_file(cfgp)
    result = CliRunner().invoke(main, ["basis", "--config", str(cfgp), "--compare-methods"])
    assert result.exit_code == 0, result.output
    manifest = json.loads((tmp_path / "out" / "basis_manifest.json").read_text())
    assert set(manifest["drift"]) == {"euler", "rk4"}
    assert manifest["drift"]["euler"] > 1e2 * manifest["drift"]["rk4"]
    assert (tmp_path / "out" / "basis_euler.csv").exists()
    assert (tmp_path / "out" / "basis_rk4.csv").exists()


def test_cli_trace_emits_per_set_files(tmp_path):
    cfgp = tmp_path / "c.cfg"
    small_const_config(tmp_path / "out", samples=5001).to_file(cfgp)
    result = CliRunner().invoke(main, ["trace", "--config", str(cfgp)])
    assert result.exit_code == 0, result.output
    manifest = json.loads((tmp_path / "out" / "trace_manifest.json").read_text())
    assert len(manifest["sets"]) == 3
    assert all(s["status"] == "ok" for s in manifest["sets"])
    assert Path(manifest["classical"]).exists()
    for s in manifest["sets"]:
        meta, cols = read_csv(s["file"])
        assert meta["config_hash"] == manifest["config_hash"]
        assert list(cols)[:4] == ["t_s", "x_fm", "branch_n", "regime"]


def test_cli_trace_continues_after_per_set_error(tmp_path):
    # second set is fine, first set hits the branch-resolution guard on a
    # deliberately coarse sampling of an extremely peaky staircase
    cfg = small_const_config(tmp_path / "out", samples=5001,
                             param_sets=[(1.0, 0.0), (0.2, 0.0)])
    cfg.energy = cfg.rest_energy  # turning point: closed form must refuse
    cfgp = tmp_path / "c.cfg"
    cfg.to_file(cfgp)
    result = CliRunner().invoke(main, ["trace", "--config", str(cfgp)])
    assert result.exit_code == 0
    manifest = json.loads((tmp_path / "out" / "trace_manifest.json").read_text())
    assert all(s["status"] == "error" for s in manifest["sets"])
    assert "TurningPointSingular" in manifest["sets"][0]["error"]


def test_cli_trace_evanescent_divergence_marker(tmp_path):
    cfg = RunConfig(energy=0.3, potential_kind="constant", u0=0.0,
                    param_sets=[(0.25, 8.0)], t_min=0.0, t_max=1.9e-21,
                    samples=2001, window=2.0e4, out_dir=str(tmp_path / "out"))
    cfgp = tmp_path / "e.cfg"
    cfg.to_file(cfgp)
    result = CliRunner().invoke(main, ["trace", "--config", str(cfgp)])
    assert result.exit_code == 0, result.output
    meta, cols = read_csv(tmp_path / "out" / "trajectory_0.csv")
    assert "divergence_time_s" in meta
    assert float(meta["divergence_time_s"]) > 0
    manifest = json.loads((tmp_path / "out" / "trace_manifest.json").read_text())
    assert manifest["sets"][0]["divergence_kind"] == "tan_singularity"
    assert cols["regime"][0] == "evanescent"


def test_cli_outputs_are_deterministic(tmp_path):
    cfgp = tmp_path / "c.cfg"
    small_const_config(tmp_path / "out", samples=2001).to_file(cfgp)
    runner = CliRunner()
    snap = {}
    for round_ in range(2):
        result = runner.invoke(main, ["trace", "--config", str(cfgp)])
        assert result.exit_code == 0
        for f in sorted((tmp_path / "out").iterdir()):
            data = f.read_bytes()
            if round_ == 0:
                snap[f.name] = data
            else:
                assert snap[f.name] == data, f"{f.name} not byte-identical"


def test_cli_analyze_summary(tmp_path):
    cfgp = tmp_path / "c.cfg"
    small_const_config(tmp_path / "out").to_file(cfgp)
    result = CliRunner().invoke(main, ["analyze", "--config", str(cfgp)])
    assert result.exit_code == 0, result.output
    assert "de Broglie wavelength" in result.output
    assert "dx == lambda/2" in result.output and "pass" in result.output
    nodes = json.loads((tmp_path / "out" / "nodes_detected.json").read_text())
    assert nodes["config_hash"]
    dx = np.array(nodes["dx"])
    assert np.max(np.abs(dx - 320.6016)) / 320.6016 < 1e-3
    # plumbing-grade sampling here; the acceptance suite pins the closure
    # tolerance at criterion-grade sampling
    val = json.loads((tmp_path / "out" / "validation.json").read_text())
    assert all(e["closure_max"] < 5e-3 for e in val["per_set"])
    assert all(e["quantum_hj_max"] < 1e-9 for e in val["per_set"])


def test_cli_analyze_epsilon_scaling(tmp_path):
    cfgp = tmp_path / "c.cfg"
    small_const_config(tmp_path / "out1").to_file(cfgp)
    runner = CliRunner()
    dx = {}
    for eps, out in ((1.0, "out1"), (0.5, "out2")):
        res = runner.invoke(main, ["analyze", "--config", str(cfgp),
                                   "--epsilon-hbar", str(eps),
                                   "--out", str(tmp_path / out)])
        assert res.exit_code == 0, res.output
        nodes = json.loads((tmp_path / out / "nodes_closed_form.json").read_text())
        dx[eps] = nodes["dx"][0]
    assert dx[0.5] / dx[1.0] == pytest.approx(0.5, abs=1e-12)


def test_cli_figure_scripts(tmp_path):
    runner = CliRunner()
    res = runner.invoke(main, ["figure", "--config", str(CONFIGS / "fig2.cfg"),
                               "--figure", "2", "--out", str(tmp_path / "f2")])
    assert res.exit_code == 0, res.output
    script = (tmp_path / "f2" / "figure2.gp").read_text()
    assert "set arrow" in script and "asymptote" in script
    assert "config_hash" in script


def test_console_entry_point(tmp_path):
    cfgp = tmp_path / "c.cfg"
    small_const_config(tmp_path / "out", samples=501).to_file(cfgp)
    proc = subprocess.run(
        [sys.executable, "-m", "rqtraj.cli", "trace", "--config", str(cfgp)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
