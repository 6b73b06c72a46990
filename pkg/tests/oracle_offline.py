"""Exhaustive enumeration oracle for tiny offline scheduling instances.

Independent of the MILP path: explicit depth-first search over per-job
start-time assignments with symmetry breaking for identical jobs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from dcsched.core import ArrivalProfile, JobClass


@dataclass(frozen=True)
class TinyInstance:
    jobs: tuple[tuple[int, int, int], ...]  # (k, l, arrival hour)
    capacity: tuple[int, ...]
    t_end: int

    def profile(self) -> ArrivalProfile:
        counts: dict[tuple[int, JobClass], int] = {}
        for k, l, arr in self.jobs:
            key = (arr, JobClass(k, l))
            counts[key] = counts.get(key, 0) + 1
        return ArrivalProfile(counts, self.t_end)

    def classes(self) -> tuple[JobClass, ...]:
        return tuple(sorted({JobClass(k, l) for k, l, _ in self.jobs}))

    def total_server_hours(self) -> int:
        return sum(k * l for k, l, _ in self.jobs)


def brute_force_goodput(inst: TinyInstance, require_completion: bool = False) -> int:
    """Best total k*l over started jobs, enumerating every start assignment."""
    jobs = sorted(inst.jobs)
    t_end = inst.t_end
    occupancy = [0] * t_end
    n = len(jobs)
    suffix_potential = [0] * (n + 1)
    for i in range(n - 1, -1, -1):
        k, l, _ = jobs[i]
        suffix_potential[i] = suffix_potential[i + 1] + k * l
    best = 0

    def options(i: int, min_start: int) -> range:
        k, l, arr = jobs[i]
        last = t_end - l + 1 if require_completion else t_end
        return range(max(arr, min_start), last + 1)

    def dfs(i: int, gained: int, starts: tuple) -> None:
        nonlocal best
        if gained + suffix_potential[i] <= best:
            return
        if i == n:
            best = max(best, gained)
            return
        k, l, arr = jobs[i]
        # identical jobs start in nondecreasing order
        min_start = starts[-1] if i > 0 and jobs[i] == jobs[i - 1] and starts[-1] is not None else 1
        dfs(i + 1, gained, starts + (None,))  # skip this job
        for t in options(i, min_start or 1):
            hours = range(t, min(t + l - 1, t_end) + 1)
            if all(occupancy[h - 1] + k <= inst.capacity[h - 1] for h in hours):
                for h in hours:
                    occupancy[h - 1] += k
                dfs(i + 1, gained + k * l, starts + (t,))
                for h in hours:
                    occupancy[h - 1] -= k
        return

    dfs(0, 0, ())
    return best


def random_instance(rng: np.random.Generator, clearable: bool = False) -> TinyInstance:
    """A random tiny instance (T <= 6, |KL| <= 3, I <= 6, <= 8 jobs).

    With clearable=True, resample until every job can be scheduled to
    completion within the horizon (checked by the oracle itself).
    """
    while True:
        t_end = int(rng.integers(3, 7))
        n_classes = int(rng.integers(1, 4))
        classes = set()
        while len(classes) < n_classes:
            classes.add((int(rng.integers(1, 4)), int(rng.integers(1, min(4, t_end) + 1))))
        classes = sorted(classes)
        n_jobs = int(rng.integers(1, 9))
        cap = int(rng.integers(1, 7))
        jobs = []
        for _ in range(n_jobs):
            k, l = classes[int(rng.integers(0, len(classes)))]
            arr = int(rng.integers(1, t_end + 1))
            jobs.append((k, l, arr))
        inst = TinyInstance(tuple(sorted(jobs)), (cap,) * t_end, t_end)
        if not clearable:
            return inst
        if brute_force_goodput(inst, require_completion=True) == inst.total_server_hours():
            return inst
