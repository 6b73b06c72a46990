"""Domain types and pure state arithmetic for data-center job scheduling.

All job counts are exact integers; power and energy are floats with
explicit units (MW, MWh). Types are immutable or treated as immutable so
they can be shared freely across parallel experiment runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping


class DomainError(ValueError):
    """Raised when a value violates a domain precondition."""


@dataclass(frozen=True, order=True)
class JobClass:
    """An aggregated job group: `servers` machines for `runtime` whole hours."""

    servers: int
    runtime: int

    def __post_init__(self) -> None:
        if self.servers < 1 or self.runtime < 1:
            raise DomainError(f"job class needs servers >= 1 and runtime >= 1, got {self!r}")

    @property
    def server_hours(self) -> int:
        return self.servers * self.runtime


@dataclass(frozen=True)
class DCConfig:
    """Facility configuration: fleet size and the affine power model."""

    total_servers: int
    p_peak_mw: float
    p_idle_mw: float
    dt_hours: float = 1.0

    def __post_init__(self) -> None:
        if self.total_servers < 1:
            raise DomainError("total_servers must be >= 1")
        if not (0.0 <= self.p_idle_mw <= self.p_peak_mw):
            raise DomainError("need 0 <= p_idle_mw <= p_peak_mw")
        if self.dt_hours <= 0:
            raise DomainError("dt_hours must be positive")

    @property
    def slope_mw_per_server(self) -> float:
        """Marginal power of one active server."""
        return (self.p_peak_mw - self.p_idle_mw) / self.total_servers


@dataclass(frozen=True)
class HorizonConfig:
    """Decision window length and forecast visibility, all in hours."""

    t_h: int
    t_j: int
    t_c: int

    def __post_init__(self) -> None:
        if min(self.t_h, self.t_j, self.t_c) < 1:
            raise DomainError("all horizons must be >= 1")


@dataclass(frozen=True)
class ObjectiveWeights:
    """Weights on the carbon (per kg CO2) and peak-demand (per MW) terms."""

    lambda_ce: float = 0.0
    lambda_pd: float = 0.0

    def __post_init__(self) -> None:
        if self.lambda_ce < 0 or self.lambda_pd < 0:
            raise DomainError("objective weights must be non-negative")


@dataclass(frozen=True)
class ArrivalProfile:
    """Job arrival counts per (hour, class), hours 1..horizon."""

    counts: Mapping[tuple[int, JobClass], int]
    horizon: int

    def __post_init__(self) -> None:
        for (t, c), num in self.counts.items():
            if num < 0:
                raise DomainError(f"negative arrival count for {(t, c)}")
            if not (1 <= t <= self.horizon):
                raise DomainError(f"arrival hour {t} outside 1..{self.horizon}")

    def at(self, t: int) -> dict[JobClass, int]:
        return {c: num for (h, c), num in self.counts.items() if h == t and num}

    def classes(self) -> frozenset[JobClass]:
        return frozenset(c for (_, c), num in self.counts.items() if num)

    def totals(self) -> dict[JobClass, int]:
        out: dict[JobClass, int] = {}
        for (_, c), num in self.counts.items():
            out[c] = out.get(c, 0) + num
        return out

    def total_jobs(self) -> int:
        return sum(self.counts.values())


@dataclass
class SystemState:
    """Job/server inventories at the start of hour `stage`.

    running maps (class, start hour) -> count of jobs still executing;
    queued and completed map class -> count; arrived maps class -> total
    arrivals observed so far (hours < stage), used for the conservation
    invariant.
    """

    stage: int
    running: dict[tuple[JobClass, int], int] = field(default_factory=dict)
    queued: dict[JobClass, int] = field(default_factory=dict)
    completed: dict[JobClass, int] = field(default_factory=dict)
    arrived: dict[JobClass, int] = field(default_factory=dict)

    def copy(self) -> "SystemState":
        return SystemState(
            stage=self.stage,
            running=dict(self.running),
            queued=dict(self.queued),
            completed=dict(self.completed),
            arrived=dict(self.arrived),
        )

    def running_by_class(self) -> dict[JobClass, int]:
        out: dict[JobClass, int] = {}
        for (c, _), num in self.running.items():
            out[c] = out.get(c, 0) + num
        return out


@dataclass
class StageDecision:
    """Control actions chosen at one stage.

    starts maps (class, start hour) -> count over the decision window;
    terminations maps (class, original start hour) -> count of running
    jobs cancelled at the current hour; active maps hour -> server count
    over the extended window; peak is the stage peak power in MW.
    """

    starts: dict[tuple[JobClass, int], int] = field(default_factory=dict)
    terminations: dict[tuple[JobClass, int], int] = field(default_factory=dict)
    active: dict[int, int] = field(default_factory=dict)
    peak: float = 0.0
    objective: float = 0.0
    gap: float = 0.0
    status: str = "optimal"
    slack: dict[JobClass, int] = field(default_factory=dict)

    def starts_at(self, t: int) -> dict[JobClass, int]:
        return {c: num for (c, h), num in self.starts.items() if h == t and num}


def power_of(m: int, cfg: DCConfig) -> float:
    """Facility power in MW with `m` active servers (affine in m)."""
    if not (0 <= m <= cfg.total_servers):
        raise DomainError(f"active servers {m} outside 0..{cfg.total_servers}")
    return cfg.slope_mw_per_server * m + cfg.p_idle_mw


def energy_of(m: int, cfg: DCConfig) -> float:
    """Energy in MWh consumed over one interval with `m` active servers."""
    return power_of(m, cfg) * cfg.dt_hours


def committed_servers(state: SystemState, t: int) -> int:
    """Servers held at hour t by jobs started before `state.stage`.

    Ignores any termination decided at the current stage; t >= stage.
    """
    if t < state.stage:
        raise DomainError(f"hour {t} precedes stage {state.stage}")
    return sum(
        c.servers * num
        for (c, t_b), num in state.running.items()
        if t_b + c.runtime > t and num
    )


def server_commitments(state: SystemState, max_runtime: int) -> list[int]:
    """Derived commitment vector: index l-1 holds servers committed for
    exactly l more hours (l = 1..max_runtime-1)."""
    u = [0] * max(max_runtime - 1, 0)
    r = state.stage
    for (c, t_b), num in state.running.items():
        remaining = c.runtime - (r - t_b)
        if not (1 <= remaining <= max_runtime - 1):
            raise DomainError(
                f"running entry {(c, t_b)} has remaining time {remaining} "
                f"outside 1..{max_runtime - 1} at stage {r}"
            )
        u[remaining - 1] += c.servers * num
    return u


def check_state(state: SystemState, max_runtime: int) -> None:
    """Assert structural invariants: non-negative counts and no running
    entry that should already have finished."""
    r = state.stage
    for (c, t_b), num in state.running.items():
        if num < 0:
            raise DomainError(f"negative running count for {(c, t_b)}")
        if c.runtime == 1 or t_b <= r - c.runtime:
            raise DomainError(f"running entry {(c, t_b)} is stale at stage {r}")
    for name, table in (("queued", state.queued), ("completed", state.completed)):
        for c, num in table.items():
            if num < 0:
                raise DomainError(f"negative {name} count for {c}")
    # conservation: queued + running + completed == observed arrivals
    per_class: dict[JobClass, int] = {}
    for (c, _), num in state.running.items():
        per_class[c] = per_class.get(c, 0) + num
    classes = set(per_class) | set(state.queued) | set(state.completed) | set(state.arrived)
    for c in classes:
        total = (
            state.queued.get(c, 0)
            + per_class.get(c, 0)
            + state.completed.get(c, 0)
        )
        if total != state.arrived.get(c, 0):
            raise DomainError(
                f"conservation violated for {c}: queued+running+completed={total} "
                f"but observed arrivals={state.arrived.get(c, 0)}"
            )
    # derived commitment vector must be computable (raises on stale entries)
    server_commitments(state, max_runtime)


def max_runtime_of(classes: Iterable[JobClass]) -> int:
    ls = [c.runtime for c in classes]
    return max(ls) if ls else 1
