"""CLI tests: subcommand behavior, determinism, exit codes."""

import os

import numpy as np
import pytest

from flapesc import cli, telemetry_io as tio

GOLDEN_DIR = os.path.join(os.path.dirname(__file__), "golden")
FREE_FALL = os.path.join(GOLDEN_DIR, "free_fall.csv")


@pytest.fixture()
def quick_scenario(tmp_path):
    text = open(tio.scenario_path("scenario_a")).read()
    text = text.replace("duration = 60.0", "duration = 2.0")
    path = tmp_path / "quick.ini"
    path.write_text(text)
    return str(path)


def test_run_is_deterministic(quick_scenario, tmp_path, capsys):
    out1, out2 = str(tmp_path / "r1.csv"), str(tmp_path / "r2.csv")
    assert cli.main(["run", "--scenario", quick_scenario, "--seed", "1",
                     "--out", out1]) == 0
    assert cli.main(["run", "--scenario", quick_scenario, "--seed", "1",
                     "--out", out2]) == 0
    assert open(out1, "rb").read() == open(out2, "rb").read()


def test_run_reports_convergence_fields(quick_scenario, capsys):
    assert cli.main(["run", "--scenario", quick_scenario]) == 0
    out = capsys.readouterr().out
    assert "converged=" in out
    assert "terminal_mean_abs_error_mm=" in out


def test_config_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text(open(tio.scenario_path("scenario_a")).read()
                   .replace("duration = 60.0", "duration = -1"))
    assert cli.main(["run", "--scenario", str(bad)]) == 2
    err = capsys.readouterr().err
    assert err.startswith("error kind=config")
    assert "sim.duration" in err


def test_missing_scenario_exit_code(capsys):
    assert cli.main(["run", "--scenario", "no_such_scenario"]) == 2


def test_divergence_exit_code(tmp_path, capsys):
    bad = tmp_path / "boom.ini"
    bad.write_text(open(tio.scenario_path("scenario_a")).read()
                   .replace("kappa_m = 18.26499222912436", "kappa_m = 1e12")
                   .replace("duration = 60.0", "duration = 2.0"))
    assert cli.main(["run", "--scenario", str(bad)]) == 3
    assert capsys.readouterr().err.startswith("error kind=divergence")


def test_io_error_exit_code(capsys):
    assert cli.main(["analyze", "--log", "/nonexistent/log.csv"]) == 4
    assert capsys.readouterr().err.startswith("error kind=io")


def test_analyze_free_fall_golden(capsys):
    assert cli.main(["analyze", "--log", FREE_FALL, "--target", "700",
                     "--band", "5"]) == 0
    out = capsys.readouterr().out
    assert "converged=no" in out
    # no control applied: error away from the target grows monotonically
    log = tio.read_log(FREE_FALL)
    err = np.abs(log.column("z") - 700.0)
    assert np.all(np.diff(err) >= 0)


def test_analyze_accepts_schedule_target(tmp_path, capsys):
    # a log tracking a stepped target parses a schedule-form --target
    assert cli.main(["analyze", "--log", FREE_FALL,
                     "--target", "0:700, 40:800", "--band", "5"]) == 0
    assert "converged=no" in capsys.readouterr().out


def test_natural_reports_double_carrier_peak(capsys):
    assert cli.main(["natural", "--scenario", "scenario_n",
                     "--command", "0.38"]) == 0
    out = capsys.readouterr().out
    carrier = float(out.split("carrier_hz=")[1].split()[0])
    peak = float(out.split("J_spectrum_peak_hz=")[1].split()[0])
    # dominant tone at twice the flapping carrier, within one FFT bin
    assert abs(peak - 2.0 * carrier) <= 1.0 / 30.0 + 1e-9
