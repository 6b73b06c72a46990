"""Batch experiment driver.

Subcommands:
  run <config>         full receding-horizon sweep with reports
  offline <config>     perfect-information baseline only
  validate <config>    parse and validate the config, nothing else
  gen-signals <config> emit the signal CSVs a run would use

Exit codes: 0 success, 1 solver failure (partial artifacts preserved),
2 invalid config or empty sweep. DCSCHED_TIME_LIMIT overrides
solver.time_limit_s.
"""

from __future__ import annotations

import argparse
import hashlib
import itertools
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .config import ConfigError, ExperimentConfig, dump_config, load_config
from .core import ArrivalProfile, DCConfig, HorizonConfig, JobClass, ObjectiveWeights
from .engine import RunAborted, run, write_trajectory_csv
from .metrics import summary_row, write_summary_csv
from .offline import solve_offline, write_schedule_csv
from .signals import (
    CAPACITY,
    CARBON,
    SignalSeries,
    capacity_walk,
    constant_capacity,
    load_signal_csv,
    noisy_forecast,
    save_signal_csv,
    synthetic_carbon,
)
from .traces import (
    AggregationRule,
    group_jobs,
    load_trace_csv,
    sample_arrivals,
    synthetic_jobs,
    write_profile_csv,
)

# fixed offsets so the independent random streams of one cell never collide
_SEED_WALK = 1009
_SEED_CARBON_FC = 2003
_SEED_CAPACITY_FC = 3001


def _dc_config(cfg: ExperimentConfig) -> DCConfig:
    dc = cfg["dc"]
    return DCConfig(
        int(dc["total_servers"]), float(dc["p_peak_mw"]),
        float(dc["p_idle_mw"]), float(dc["dt_hours"]),
    )


def _class_totals(cfg: ExperimentConfig) -> dict[JobClass, int]:
    prof = cfg["profiles"]
    rule = AggregationRule(tuple(prof["k_buckets"]), int(prof["max_runtime_hours"]))
    if prof["source"] == "trace":
        report = group_jobs(load_trace_csv(prof["trace_csv"]), rule)
        if report.dropped_long or report.dropped_oversize:
            print(
                f"trace: dropped {report.dropped_long} over-long and "
                f"{report.dropped_oversize} over-wide jobs",
                file=sys.stderr,
            )
        return report.class_totals
    return synthetic_jobs(
        int(prof["jobs"]), tuple(prof["k_buckets"]), int(prof["max_runtime_hours"]),
        seed=0,
    )


def _profile(cfg: ExperimentConfig, shape: str, seed: int) -> ArrivalProfile:
    return sample_arrivals(_class_totals(cfg), shape, int(cfg["signals"]["hours"]), seed)


def _carbon_truth(cfg: ExperimentConfig) -> SignalSeries:
    sig = cfg["signals"]
    hours = int(sig["hours"])
    if sig["carbon"]["source"] == "csv":
        return load_signal_csv(sig["carbon"]["csv"], CARBON)
    return synthetic_carbon(hours, float(sig["carbon"]["base"]), float(sig["carbon"]["amplitude"]))


def _capacity_truth(cfg: ExperimentConfig, seed: int) -> SignalSeries:
    sig = cfg["signals"]
    dc = _dc_config(cfg)
    hours = int(sig["hours"])
    mode = sig["capacity"]["mode"]
    if mode == "csv":
        return load_signal_csv(sig["capacity"]["csv"], CAPACITY)
    if mode == "walk":
        return capacity_walk(
            dc.total_servers, hours,
            float(sig["capacity"]["step_stddev_frac"]),
            float(sig["capacity"]["floor_frac"]),
            seed=seed + _SEED_WALK,
        )
    return constant_capacity(dc.total_servers, hours)


def _forecasts(
    cfg: ExperimentConfig, mode: str, seed: int,
    carbon: SignalSeries, capacity: SignalSeries,
) -> tuple[SignalSeries | None, SignalSeries | None]:
    sig = cfg["signals"]
    carbon_fc = capacity_fc = None
    if mode in ("noisy_carbon", "noisy_both"):
        carbon_fc = noisy_forecast(
            carbon, float(sig["carbon_forecast_sigma"]), seed + _SEED_CARBON_FC,
            sigma_is_variance=bool(sig["sigma_is_variance"]),
        )
    if mode in ("noisy_capacity", "noisy_both"):
        capacity_fc = noisy_forecast(
            capacity, float(sig["capacity_forecast_sigma"]), seed + _SEED_CAPACITY_FC,
            total_servers=_dc_config(cfg).total_servers,
            sigma_is_variance=bool(sig["sigma_is_variance"]),
        )
    return carbon_fc, capacity_fc


def _time_limit(cfg: ExperimentConfig) -> float:
    override = os.environ.get("DCSCHED_TIME_LIMIT")
    return float(override) if override else float(cfg["solver"]["time_limit_s"])


def _cells(cfg: ExperimentConfig) -> list[tuple]:
    sweep = cfg["sweep"]
    return list(itertools.product(
        cfg["profiles"]["shapes"],
        [float(x) for x in sweep["lambda_ce"]],
        [float(x) for x in sweep["lambda_pd"]],
        [int(t) for t in sweep["horizon_t"]],
        sweep["forecast"],
        [int(s) for s in sweep["seeds"]],
    ))


def _cell_name(cell: tuple) -> str:
    shape, lce, lpd, t, mode, seed = cell
    return f"{shape}_ce{lce:g}_pd{lpd:g}_T{t}_{mode}_s{seed}"


def _run_cell(config_data: dict, cell: tuple, out_dir: str) -> dict:
    cfg = ExperimentConfig(config_data)
    shape, lce, lpd, horizon_t, mode, seed = cell
    dc = _dc_config(cfg)
    profile = _profile(cfg, shape, seed)
    classes = tuple(sorted(_class_totals(cfg)))
    carbon = _carbon_truth(cfg)
    capacity = _capacity_truth(cfg, seed)
    carbon_fc, capacity_fc = _forecasts(cfg, mode, seed, carbon, capacity)
    horizons = HorizonConfig(horizon_t, horizon_t, horizon_t)
    weights = ObjectiveWeights(lce, lpd)

    name = _cell_name(cell)
    label = dict(profile=shape, lambda_ce=f"{lce:g}", lambda_pd=f"{lpd:g}",
                 horizon_t=horizon_t, forecast=mode, seed=seed)
    traj = run(
        dc, profile, classes, capacity, carbon, horizons, weights,
        capacity_forecast=capacity_fc, carbon_forecast=carbon_fc,
        gap_tol=float(cfg["solver"]["gap"]), time_limit=_time_limit(cfg),
    )
    write_trajectory_csv(traj, os.path.join(out_dir, f"{name}_trajectory.csv"))
    _write_manifest(cfg, cell, traj, os.path.join(out_dir, f"{name}_manifest.txt"))
    return summary_row(traj, carbon, capacity, dc, label)


def _write_manifest(cfg: ExperimentConfig, cell: tuple, traj, path: str) -> None:
    digest = hashlib.sha256(dump_config(cfg).encode()).hexdigest()
    max_gap = max((rec.gap for rec in traj.records), default=0.0)
    lines = [
        f"dcsched {__version__}",
        f"config_sha256 {digest}",
        f"cell {_cell_name(cell)}",
        f"stages {len(traj.records)}",
        f"max_mip_gap {max_gap:.3g}",
        f"slack_events {traj.slack_events()}",
        "solver highs-via-scipy",
    ]
    Path(path).write_text("\n".join(lines) + "\n")


def cmd_run(cfg: ExperimentConfig) -> int:
    cells = _cells(cfg)
    if not cells:
        print("error: empty sweep", file=sys.stderr)
        return 2
    out_dir = cfg["output_dir"]
    os.makedirs(out_dir, exist_ok=True)
    workers = int(cfg["solver"]["workers"])
    rows: dict[tuple, dict] = {}
    failed = False
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {
                pool.submit(_run_cell, cfg.data, cell, out_dir): cell for cell in cells
            }
            for future, cell in futures.items():
                try:
                    rows[cell] = future.result()
                except RunAborted as exc:
                    failed = True
                    print(f"error: {_cell_name(cell)}: {exc}", file=sys.stderr)
    else:
        for cell in cells:
            try:
                rows[cell] = _run_cell(cfg.data, cell, out_dir)
            except RunAborted as exc:
                failed = True
                print(f"error: {_cell_name(cell)}: {exc}", file=sys.stderr)
                write_trajectory_csv(
                    exc.trajectory,
                    os.path.join(out_dir, f"{_cell_name(cell)}_trajectory.partial.csv"),
                )
    ordered = [rows[cell] for cell in sorted(rows, key=_cell_name)]
    write_summary_csv(ordered, os.path.join(out_dir, "summary.csv"))
    print(f"wrote {len(ordered)} of {len(cells)} cells to {out_dir}/summary.csv")
    return 1 if failed else 0


def cmd_offline(cfg: ExperimentConfig) -> int:
    out_dir = cfg["output_dir"]
    os.makedirs(out_dir, exist_ok=True)
    classes = tuple(sorted(_class_totals(cfg)))
    seeds = [int(s) for s in cfg["sweep"]["seeds"]]
    for shape in cfg["profiles"]["shapes"]:
        for seed in seeds:
            profile = _profile(cfg, shape, seed)
            capacity = _capacity_truth(cfg, seed)
            schedule = solve_offline(
                profile, [int(v) for v in capacity.values], classes,
                gap_tol=float(cfg["solver"]["gap"]), time_limit=_time_limit(cfg),
            )
            path = os.path.join(out_dir, f"offline_{shape}_s{seed}.csv")
            write_schedule_csv(schedule, path)
            print(f"{shape} seed {seed}: goodput {schedule.goodput} server-hours -> {path}")
    return 0


def cmd_gen_signals(cfg: ExperimentConfig) -> int:
    out_dir = cfg["output_dir"]
    os.makedirs(out_dir, exist_ok=True)
    carbon = _carbon_truth(cfg)
    save_signal_csv(carbon, os.path.join(out_dir, "carbon.csv"))
    seeds = [int(s) for s in cfg["sweep"]["seeds"]]
    for seed in seeds:
        capacity = _capacity_truth(cfg, seed)
        save_signal_csv(capacity, os.path.join(out_dir, f"capacity_s{seed}.csv"))
        for mode in cfg["sweep"]["forecast"]:
            carbon_fc, capacity_fc = _forecasts(cfg, mode, seed, carbon, capacity)
            if carbon_fc is not None:
                save_signal_csv(
                    carbon_fc, os.path.join(out_dir, f"carbon_forecast_s{seed}.csv")
                )
            if capacity_fc is not None:
                save_signal_csv(
                    capacity_fc, os.path.join(out_dir, f"capacity_forecast_s{seed}.csv")
                )
        profile = _profile(cfg, cfg["profiles"]["shapes"][0], seed)
        write_profile_csv(profile, os.path.join(out_dir, f"profile_s{seed}.csv"))
    print(f"signal CSVs written to {out_dir}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="dcsched", description="Receding-horizon data-center scheduling experiments"
    )
    parser.add_argument("--desk-scale", action="store_true",
                        help="small preset (200 servers, 72 h) for quick runs")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("run", "offline", "validate", "gen-signals"):
        p = sub.add_parser(name)
        p.add_argument("config", nargs="?", default=None,
                       help="YAML config (defaults used when omitted)")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config, desk_scale=args.desk_scale)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    if args.command == "validate":
        print("config ok")
        return 0
    if args.command == "run":
        return cmd_run(cfg)
    if args.command == "offline":
        return cmd_offline(cfg)
    if args.command == "gen-signals":
        return cmd_gen_signals(cfg)
    return 2


if __name__ == "__main__":
    sys.exit(main())
