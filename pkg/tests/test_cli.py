import os

import numpy as np
import pytest
from click.testing import CliRunner

from fgnls.cli import main
from fgnls.config import RunConfig, emit_config, parse_config
from fgnls.errors import ConfigError


@pytest.fixture()
def runner():
    return CliRunner()


def write_cfg(tmp_path, **overrides):
    cfg = RunConfig(outdir=str(tmp_path / "out"), **overrides)
    path = tmp_path / "run.cfg"
    path.write_text(emit_config(cfg))
    return str(path), cfg


def test_config_round_trip():
    cfg = RunConfig(bands=[[-2.0, -1.0], [1.0, 2.0]], phases=[0.3],
                    perturbation_amplitude=0.05, outdir="x")
    assert parse_config(emit_config(cfg)) == cfg


def test_config_rejects_unknown_key():
    with pytest.raises(ConfigError):
        parse_config("not_a_key = 3\n")


def test_config_rejects_phase_length():
    with pytest.raises(ConfigError):
        parse_config("bands = [[-1.0, 1.0]]\nphases = [0.1]\n")


def test_background_csv_constant_modulus(runner, tmp_path):
    cfg_path, cfg = write_cfg(tmp_path)
    res = runner.invoke(main, ["background", "--config", cfg_path,
                               "--grid", "-3,3,7,0,1,3"])
    assert res.exit_code == 0, res.output
    data = np.genfromtxt(os.path.join(cfg.outdir, "background.csv"),
                         delimiter=",", names=True, skip_header=1)
    assert np.allclose(data["abs_q"], 1.0, atol=1e-12)


def test_phase_report_values(runner, tmp_path):
    cfg_path, cfg = write_cfg(tmp_path)
    res = runner.invoke(main, ["phase-report", "--config", cfg_path,
                               "--sweep", "-6,6,5"])
    assert res.exit_code == 0, res.output
    rows = {}
    with open(os.path.join(cfg.outdir, "phase.csv")) as fh:
        for line in fh.read().splitlines()[2:]:
            kind, idx, val = line.split(",")
            rows.setdefault(kind, []).append(float(val))
    assert rows["f0"][0] == pytest.approx(0.0, abs=1e-11)
    assert rows["g0"][0] == pytest.approx(-1.0, abs=1e-11)
    assert rows["xihat"][0] == pytest.approx(-2.0, abs=1e-11)
    assert rows["xi"][0] == pytest.approx(2.0, abs=1e-11)


def test_csv_determinism(runner, tmp_path):
    cfg_path, cfg = write_cfg(tmp_path)
    args = ["background", "--config", cfg_path, "--grid", "-2,2,5,0,1,2"]
    assert runner.invoke(main, args).exit_code == 0
    first = open(os.path.join(cfg.outdir, "background.csv"), "rb").read()
    assert runner.invoke(main, args).exit_code == 0
    second = open(os.path.join(cfg.outdir, "background.csv"), "rb").read()
    assert first == second


def test_exit_code_config_error(runner, tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("bands = [[-1.0, 1.0]\n")   # unbalanced bracket
    res = runner.invoke(main, ["background", "--config", str(bad)])
    assert res.exit_code == 2


def test_exit_code_numerical_error(runner, tmp_path):
    bad = tmp_path / "bad.cfg"
    # interleaving violated -> OrderingViolation -> exit 3
    bad.write_text("bands = [[1.0, -1.0]]\nphases = []\n")
    res = runner.invoke(main, ["background", "--config", str(bad)])
    assert res.exit_code == 3


def test_surface_report_genus1(runner, tmp_path):
    cfg_path, cfg = write_cfg(tmp_path, bands=[[-2.0, -1.0], [1.0, 2.0]],
                              phases=[0.0])
    res = runner.invoke(main, ["surface-report", "--config", cfg_path])
    assert res.exit_code == 0, res.output
    text = open(os.path.join(cfg.outdir, "surface.csv")).read()
    assert "# schema=surface version=1" in text
    assert "divisor,1,0,0" in text.replace("-0,", "0,")


def test_p34_checksum(runner, tmp_path):
    cfg_path, cfg = write_cfg(tmp_path, p34_half_width=8.0, p34_nodes=401)
    res = runner.invoke(main, ["p34", "--config", cfg_path])
    assert res.exit_code == 0, res.output
    import zlib
    lines = open(os.path.join(cfg.outdir, "p34.csv")).read().splitlines()
    declared = lines[0].split("checksum=")[1]
    body = "\n".join(lines[2:])
    assert f"{zlib.crc32(body.encode()):08x}" == declared


def test_simulate_and_asymptote_smoke(runner, tmp_path):
    cfg_path, cfg = write_cfg(
        tmp_path, sim_half_width=20.0, sim_grid_points=512,
        sim_dt=0.0006, sim_t_final=0.3, sim_snapshot_times=[0.3],
        perturbation_support=6.0, support_radius=7.0)
    res = runner.invoke(main, ["simulate", "--config", cfg_path])
    assert res.exit_code == 0, res.output
    sim_csv = os.path.join(cfg.outdir, "simulate.csv")
    assert os.path.exists(sim_csv)

    cfg_path2, cfg2 = write_cfg(
        tmp_path, perturbation_profile="none")
    res = runner.invoke(main, ["asymptote", "--config", cfg_path2,
                               "--t", "50", "--x", "0.0"])
    assert res.exit_code == 0, res.output
    data = np.genfromtxt(os.path.join(cfg2.outdir, "asymptote.csv"),
                         delimiter=",", names=True, skip_header=1,
                         dtype=None, encoding="utf-8")
    lead = complex(float(data["re_leading"]), float(data["im_leading"]))
    assert lead == pytest.approx(1j * np.exp(-100j), abs=1e-10)
