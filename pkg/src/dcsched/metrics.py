"""Post-processing of trajectories: emissions, volatility, queue load,
goodput, and the CSV result tables."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

from .core import DCConfig, DomainError, SystemState, power_of
from .engine import Trajectory, goodput_components
from .signals import SignalSeries

VOLATILITY_WINDOW = 144  # hours used for the trajectory stddev


def total_emissions(traj: Trajectory, carbon: SignalSeries, cfg: DCConfig) -> float:
    """Realized emissions in kg CO2: true carbon rate times facility power,
    hour by hour, regardless of the forecast that drove the decisions."""
    if len(carbon) < len(traj.records):
        raise DomainError(
            f"carbon series covers {len(carbon)} of {len(traj.records)} hours"
        )
    return sum(
        carbon.at(rec.hour) * power_of(rec.active, cfg) * cfg.dt_hours
        for rec in traj.records
    )


def volatility(m: Sequence[float], window: int = VOLATILITY_WINDOW) -> float:
    """Population standard deviation of the first `window` hours."""
    if window <= 0:
        raise DomainError("volatility window must be positive")
    if window > len(m):
        raise DomainError(f"window {window} exceeds series length {len(m)}")
    head = list(m[:window])
    mean = sum(head) / window
    return math.sqrt(sum((x - mean) ** 2 for x in head) / window)


def peak_power(traj: Trajectory, cfg: DCConfig) -> float:
    """True horizon-wide peak power (MW), not the per-stage epigraph value."""
    return max(power_of(rec.active, cfg) for rec in traj.records)


def queued_load(state: SystemState, cfg: DCConfig) -> tuple[float, float]:
    """(energy MWh, power MW) needed to clear the queue, using only the
    marginal per-server slope: the idle floor is a facility constant and is
    not attributed to individual jobs."""
    slope = cfg.slope_mw_per_server
    energy = sum(
        num * c.server_hours * slope * cfg.dt_hours
        for c, num in state.queued.items()
    )
    power = sum(num * c.servers * slope for c, num in state.queued.items())
    return energy, power


@dataclass
class GoodputReport:
    completed_server_hours: int
    wasted_server_hours: int
    ratio: float


def goodput(traj: Trajectory, capacity: SignalSeries) -> GoodputReport:
    """Completed server-hours, server-hours burned by later-terminated
    runs, and the ratio of completed work to total capacity."""
    completed, wasted = goodput_components(traj)
    available = sum(capacity.at(rec.hour) for rec in traj.records)
    ratio = completed / available if available else 0.0
    return GoodputReport(completed, wasted, ratio)


SUMMARY_COLUMNS = [
    "profile", "lambda_ce", "lambda_pd", "horizon_t", "forecast", "seed",
    "co2_kg", "volatility", "peak_mw", "goodput_server_hours",
    "goodput_ratio", "terminations", "wasted_server_hours", "slack_events",
]


def summary_row(
    traj: Trajectory,
    carbon: SignalSeries,
    capacity: SignalSeries,
    cfg: DCConfig,
    label: dict,
    vol_window: int | None = None,
) -> dict:
    window = vol_window or min(VOLATILITY_WINDOW, len(traj.records))
    gp = goodput(traj, capacity)
    row = dict(label)
    row.update(
        co2_kg=f"{total_emissions(traj, carbon, cfg):.6g}",
        volatility=f"{volatility(traj.active_series(), window):.6g}",
        peak_mw=f"{peak_power(traj, cfg):.6g}",
        goodput_server_hours=gp.completed_server_hours,
        goodput_ratio=f"{gp.ratio:.6g}",
        terminations=traj.total_terminations(),
        wasted_server_hours=gp.wasted_server_hours,
        slack_events=traj.slack_events(),
    )
    return row


def write_summary_csv(rows: list[dict], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=SUMMARY_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def write_plot_data_csv(
    traj: Trajectory, carbon: SignalSeries, path: str
) -> None:
    """Per-hour (hour, active servers, capacity, carbon rate) for plotting."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["hour", "active_servers", "capacity", "carbon_rate"])
        for rec in traj.records:
            writer.writerow([rec.hour, rec.active, rec.capacity, f"{carbon.at(rec.hour):.6g}"])
