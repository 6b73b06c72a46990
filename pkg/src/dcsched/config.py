"""Experiment configuration: YAML sections {dc, horizons, weights, signals,
profiles, sweep, solver} with production-scale defaults and field-level
validation errors."""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Any

import yaml


class ConfigError(ValueError):
    """Invalid configuration; message names the offending field."""


DEFAULTS: dict[str, Any] = {
    "dc": {
        "total_servers": 20000,
        "p_peak_mw": 100.0,
        "p_idle_mw": 30.0,
        "dt_hours": 1.0,
    },
    "horizons": {"t_h": 24, "t_j": 24, "t_c": 24},
    "weights": {"lambda_ce": 0.0, "lambda_pd": 0.0},
    "signals": {
        "hours": 168,
        "carbon": {"source": "synthetic", "base": 500.0, "amplitude": 1.0, "csv": None},
        "capacity": {
            "mode": "fixed",  # fixed | walk | csv
            "step_stddev_frac": 0.05,
            "floor_frac": 0.5,
            "csv": None,
        },
        "carbon_forecast_sigma": 0.11,
        "capacity_forecast_sigma": 0.07,
        "sigma_is_variance": False,
    },
    "profiles": {
        "source": "synthetic",  # synthetic | trace
        "trace_csv": None,
        "jobs": 2000,
        "k_buckets": [1, 2, 4, 8, 16],
        "max_runtime_hours": 24,
        "shapes": ["uniform"],
    },
    "sweep": {
        "lambda_ce": [0.0],
        "lambda_pd": [0.0],
        "horizon_t": [24],
        "forecast": ["accurate"],
        "seeds": [1],
    },
    "solver": {
        "gap": 1e-4,
        "time_limit_s": 60.0,
        "lp_dump": False,
        "workers": 1,
    },
    "output_dir": "results",
}

DESK_SCALE_OVERRIDES: dict[str, Any] = {
    "dc": {"total_servers": 200},
    "signals": {"hours": 72},
    "profiles": {"jobs": 300, "k_buckets": [1, 2, 4], "max_runtime_hours": 8},
}

FORECAST_MODES = ("accurate", "noisy_carbon", "noisy_capacity", "noisy_both")


@dataclass
class ExperimentConfig:
    data: dict[str, Any] = field(default_factory=lambda: copy.deepcopy(DEFAULTS))

    def __getitem__(self, key: str) -> Any:
        return self.data[key]


def _merge(base: dict, extra: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, value in extra.items():
        where = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(f"unknown config key: {where}")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{where}: expected a mapping")
            out[key] = _merge(base[key], value, where)
        else:
            out[key] = value
    return out


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(message)


def validate(data: dict[str, Any]) -> None:
    dc = data["dc"]
    _require(int(dc["total_servers"]) >= 1, "dc.total_servers: must be >= 1")
    _require(
        0 <= float(dc["p_idle_mw"]) <= float(dc["p_peak_mw"]),
        "dc.p_idle_mw: need 0 <= p_idle_mw <= p_peak_mw",
    )
    _require(float(dc["dt_hours"]) > 0, "dc.dt_hours: must be positive")
    for key in ("t_h", "t_j", "t_c"):
        _require(int(data["horizons"][key]) >= 1, f"horizons.{key}: must be >= 1")
    for key in ("lambda_ce", "lambda_pd"):
        _require(float(data["weights"][key]) >= 0, f"weights.{key}: must be >= 0")

    sig = data["signals"]
    _require(int(sig["hours"]) >= 24, "signals.hours: must be >= 24")
    _require(
        sig["carbon"]["source"] in ("synthetic", "csv"),
        "signals.carbon.source: must be 'synthetic' or 'csv'",
    )
    if sig["carbon"]["source"] == "csv":
        _require(bool(sig["carbon"]["csv"]), "signals.carbon.csv: path required")
    _require(
        sig["capacity"]["mode"] in ("fixed", "walk", "csv"),
        "signals.capacity.mode: must be 'fixed', 'walk' or 'csv'",
    )
    if sig["capacity"]["mode"] == "csv":
        _require(bool(sig["capacity"]["csv"]), "signals.capacity.csv: path required")
    _require(
        0 <= float(sig["capacity"]["floor_frac"]) <= 1,
        "signals.capacity.floor_frac: must be in [0, 1]",
    )
    for key in ("carbon_forecast_sigma", "capacity_forecast_sigma"):
        _require(float(sig[key]) >= 0, f"signals.{key}: must be >= 0")

    prof = data["profiles"]
    _require(prof["source"] in ("synthetic", "trace"), "profiles.source: must be 'synthetic' or 'trace'")
    if prof["source"] == "trace":
        _require(bool(prof["trace_csv"]), "profiles.trace_csv: path required")
    else:
        _require(int(prof["jobs"]) >= 0, "profiles.jobs: must be >= 0")
    _require(bool(prof["shapes"]), "profiles.shapes: at least one shape required")
    for shape in prof["shapes"]:
        _require(
            shape in ("uniform", "small_var", "large_var"),
            f"profiles.shapes: unknown shape {shape!r}",
        )

    sweep = data["sweep"]
    for key in ("lambda_ce", "lambda_pd", "horizon_t", "forecast", "seeds"):
        _require(
            isinstance(sweep[key], list) and len(sweep[key]) > 0,
            f"sweep.{key}: non-empty list required",
        )
    for mode in sweep["forecast"]:
        _require(mode in FORECAST_MODES, f"sweep.forecast: unknown mode {mode!r}")
    for lam in sweep["lambda_ce"] + sweep["lambda_pd"]:
        _require(float(lam) >= 0, "sweep.lambda_ce/lambda_pd: weights must be >= 0")
    for t in sweep["horizon_t"]:
        _require(int(t) >= 1, "sweep.horizon_t: horizons must be >= 1")

    solver = data["solver"]
    _require(float(solver["gap"]) >= 0, "solver.gap: must be >= 0")
    _require(float(solver["time_limit_s"]) > 0, "solver.time_limit_s: must be positive")
    _require(int(solver["workers"]) >= 1, "solver.workers: must be >= 1")


def load_config(path: str | None, desk_scale: bool = False) -> ExperimentConfig:
    """Load YAML on top of the defaults; `desk_scale` applies the small
    CI-speed preset before the user file."""
    data = copy.deepcopy(DEFAULTS)
    if desk_scale:
        data = _merge(data, DESK_SCALE_OVERRIDES)
    if path is not None:
        with open(path) as fh:
            user = yaml.safe_load(fh) or {}
        if not isinstance(user, dict):
            raise ConfigError("top level of the config must be a mapping")
        data = _merge(data, user)
    validate(data)
    return ExperimentConfig(data)


def dump_config(cfg: ExperimentConfig) -> str:
    return yaml.safe_dump(cfg.data, sort_keys=True)
