import os

import pytest

from dcsched.cli import main

TINY = """\
dc:
  total_servers: 50
  p_peak_mw: 10.0
  p_idle_mw: 3.0
signals:
  hours: 24
profiles:
  jobs: 40
  k_buckets: [1, 2]
  max_runtime_hours: 4
sweep:
  horizon_t: [4]
  seeds: [1]
solver:
  time_limit_s: 30
output_dir: {out}
"""


def tiny_config(tmp_path, **extra_lines):
    out = tmp_path / "results"
    text = TINY.format(out=out)
    for line in extra_lines.values():
        text += line
    path = tmp_path / "tiny.yaml"
    path.write_text(text)
    return str(path), str(out)


def test_validate_ok(tmp_path, capsys):
    path, _ = tiny_config(tmp_path)
    assert main(["validate", path]) == 0
    assert "config ok" in capsys.readouterr().out


def test_validate_defaults_without_file(capsys):
    assert main(["validate"]) == 0
    assert main(["--desk-scale", "validate"]) == 0


def test_validate_bad_config(tmp_path, capsys):
    path = tmp_path / "bad.yaml"
    path.write_text("dc:\n  total_servers: -1\n")
    assert main(["validate", str(path)]) == 2
    assert "dc.total_servers" in capsys.readouterr().err


def test_validate_missing_file(capsys):
    assert main(["validate", "/nonexistent/config.yaml"]) == 2
    assert "config error" in capsys.readouterr().err


def test_run_tiny_sweep(tmp_path, capsys):
    path, out = tiny_config(tmp_path)
    assert main(["run", path]) == 0
    files = sorted(os.listdir(out))
    assert "summary.csv" in files
    assert any(f.endswith("_trajectory.csv") for f in files)
    assert any(f.endswith("_manifest.txt") for f in files)
    lines = open(os.path.join(out, "summary.csv")).read().strip().splitlines()
    assert lines[0].startswith("profile,lambda_ce")
    assert len(lines) == 2  # one sweep cell
    manifest = next(f for f in files if f.endswith("_manifest.txt"))
    text = open(os.path.join(out, manifest)).read()
    assert "config_sha256" in text
    assert "stages 24" in text


def test_run_is_deterministic(tmp_path):
    path, out = tiny_config(tmp_path)
    assert main(["run", path]) == 0
    first = open(os.path.join(out, "summary.csv")).read()
    assert main(["run", path]) == 0
    assert open(os.path.join(out, "summary.csv")).read() == first


def test_offline_subcommand(tmp_path, capsys):
    path, out = tiny_config(tmp_path)
    assert main(["offline", path]) == 0
    assert os.path.exists(os.path.join(out, "offline_uniform_s1.csv"))
    assert "goodput" in capsys.readouterr().out


def test_gen_signals(tmp_path, capsys):
    out = str(tmp_path / "results")
    cfg = tmp_path / "gen.yaml"
    cfg.write_text(
        "dc:\n  total_servers: 50\n"
        "signals:\n  hours: 24\n  capacity:\n    mode: walk\n"
        "profiles:\n  jobs: 40\n"
        "sweep:\n  forecast: [noisy_both]\n  seeds: [3]\n"
        f"output_dir: {out}\n"
    )
    assert main(["gen-signals", str(cfg)]) == 0
    files = sorted(os.listdir(out))
    assert "carbon.csv" in files
    assert "capacity_s3.csv" in files
    assert "carbon_forecast_s3.csv" in files
    assert "capacity_forecast_s3.csv" in files
    assert "profile_s3.csv" in files


def test_time_limit_env_override(tmp_path, monkeypatch):
    path, out = tiny_config(tmp_path)
    monkeypatch.setenv("DCSCHED_TIME_LIMIT", "5")
    assert main(["run", path]) == 0
