"""Activation policies and the round-robin grid loop that accumulates lifetime."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .barrier import DEPLETED, Cover, GridContext, bfs_cover, minmax_cover
from .field import SensorField
from .geometry import EPS_GEOM

ALGORITHMS = ("minmax", "bfs", "lp")
POLICIES = ("uniform", "nonuniform", "nonpreemptive")
DEFAULT_MAX_LOAD = 2
DEFAULT_DECAY = 1.0
MIN_DELTA = 1e-9
SCHEDULE_HEADER = ["entry_index", "grid_index", "algorithm", "policy", "delta", "cover_size", "sensor_ids"]


@dataclass
class ScheduleEntry:
    cover: Cover
    delta: float
    grid_index: int = -1
    algorithm: str = ""
    policy: str = ""


@dataclass
class ScheduleResult:
    entries: list
    policy: str
    algorithm: str = ""
    per_grid: dict = field(default_factory=dict)       # grid index -> {"covers": n, "time": t}
    final_battery: np.ndarray | None = None

    @property
    def lifetime(self) -> float:
        return float(sum(e.delta for e in self.entries))

    def __len__(self):
        return len(self.entries)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SCHEDULE_HEADER)
        for i, e in enumerate(self.entries):
            w.writerow([i, e.grid_index, e.algorithm, e.policy, f"{e.delta:.12g}", len(e.cover),
                        ";".join(str(s) for s in e.cover.sensor_ids)])
        return buf.getvalue()

    def save(self, path) -> None:
        Path(path).write_text(self.to_csv())


def load_schedule(path_or_text) -> ScheduleResult:
    text = Path(path_or_text).read_text() if isinstance(path_or_text, Path) or (
        isinstance(path_or_text, str) and "\n" not in path_or_text and Path(path_or_text).exists()
    ) else str(path_or_text)
    rows = list(csv.DictReader(io.StringIO(text)))
    if rows and list(rows[0].keys()) != SCHEDULE_HEADER:
        raise ValueError("unexpected schedule header")
    entries = []
    for r in rows:
        ids = [int(t) for t in r["sensor_ids"].split(";") if t]
        if len(ids) != int(r["cover_size"]):
            raise ValueError(f"cover_size mismatch in entry {r['entry_index']}")
        gi = int(r["grid_index"])
        entries.append(ScheduleEntry(Cover(ids, gi, 0.0, r["algorithm"]), float(r["delta"]),
                                     gi, r["algorithm"], r["policy"]))
    policy = entries[0].policy if entries else ""
    algorithm = entries[0].algorithm if entries else ""
    return ScheduleResult(entries, policy, algorithm)


# --- activation policies --------------------------------------------------

def _ids(cover) -> list:
    return list(cover.sensor_ids) if isinstance(cover, Cover) else sorted(int(i) for i in cover)


def activate_uniform(field: SensorField, cover, m: int = DEFAULT_MAX_LOAD) -> ScheduleEntry:
    """Run ``cover`` for ``1/m``; every member loses ``1/m`` of battery."""
    if int(m) != m or m < 1:
        raise ValueError("max load m must be a positive integer")
    ids = _ids(cover)
    if not ids:
        raise ValueError("empty cover")
    delta = 1.0 / m
    if np.any(field.battery[ids] < delta - EPS_GEOM):
        raise ValueError("cover contains a sensor below 1/m")
    field.drain(ids, delta)
    return ScheduleEntry(_as_cover(cover), delta, policy="uniform")


def activate_nonuniform(field: SensorField, cover, d: float = DEFAULT_DECAY) -> ScheduleEntry:
    """Run ``cover`` for ``d`` times its weakest battery."""
    if not 0 < d <= 1:
        raise ValueError("decay must lie in (0, 1]")
    ids = _ids(cover)
    if not ids:
        raise ValueError("empty cover")
    b = float(field.battery[ids].min())
    if b <= DEPLETED:
        raise ValueError("cover contains a depleted sensor")
    delta = d * b
    field.drain(ids, delta)
    return ScheduleEntry(_as_cover(cover), delta, policy="nonuniform")


def activate_nonpreemptive(field: SensorField, cover) -> ScheduleEntry:
    """Run ``cover`` until its (untouched, hence equal) batteries are used up."""
    ids = _ids(cover)
    if not ids:
        raise ValueError("empty cover")
    b = field.battery[ids]
    if b.min() < 1.0 - EPS_GEOM:
        raise ValueError("non-preemptive covers need untouched batteries")
    delta = float(b.min())
    field.drain(ids, delta)
    return ScheduleEntry(_as_cover(cover), delta, policy="nonpreemptive")


def _as_cover(cover) -> Cover:
    return cover if isinstance(cover, Cover) else Cover(tuple(cover))


# --- grid loop ------------------------------------------------------------

def _find_cover(ctx: GridContext, algorithm: str, policy: str, params: dict, epsilon: float):
    if policy == "uniform":
        b_min = 1.0 / params.get("m", DEFAULT_MAX_LOAD)
    elif policy == "nonpreemptive":
        b_min = 1.0
    else:
        b_min = 0.0
    fn = bfs_cover if algorithm == "bfs" else minmax_cover
    res = fn(ctx.field, ctx, min_battery=b_min, epsilon=epsilon, grid_index=ctx.grid_index)
    if res is None:
        return None
    return res[0] if algorithm == "bfs" else res


def _lp_round(ctx: GridContext, epsilon: float, lp_method: str) -> list:
    from .flow import build_flow_network, decompose_paths, flow_covers, to_standard_lp
    from .lp import solve_lp

    net = build_flow_network(ctx.field, ctx)
    if not net.sensor_ids:
        return []
    flp = to_standard_lp(net)
    sol = solve_lp(flp.problem, lp_method)
    if not sol.optimal or sol.objective <= MIN_DELTA:
        return []
    return flow_covers(decompose_paths(flp, sol), epsilon, ctx.grid_index)


def grid_based_lifetime(field: SensorField, family, algorithm: str = "bfs", policy: str = "nonuniform",
                        params: dict | None = None, *, strip_half_width: float = 0.0,
                        epsilon: float = 0.0, inplace: bool = False,
                        max_entries: int = 1_000_000) -> ScheduleResult:
    """Cycle over the grids, activating one cover per grid visit.

    The loop ends once a full pass over the family finds no cover. The LP
    algorithm activates every path of its flow decomposition on a visit and
    is restricted to the non-uniform policy. ``params`` may hold ``m``
    (uniform max load), ``d`` (decay) and ``lp_method``. Unless
    ``inplace`` is set, the input field's batteries are left untouched.
    """
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}")
    if algorithm == "lp" and policy != "nonuniform":
        raise ValueError("the LP algorithm schedules non-uniformly only")
    params = dict(params or {})
    work = field if inplace else field.copy()
    grids = list(family)
    contexts = [GridContext(work, g, strip_half_width, grid_index=i) for i, g in enumerate(grids)]
    per_grid = {i: {"covers": 0, "time": 0.0} for i in range(len(grids))}
    entries: list[ScheduleEntry] = []
    idle = 0
    gi = 0
    while grids and idle < len(grids) and len(entries) < max_entries:
        ctx = contexts[gi]
        found = []
        if algorithm == "lp":
            for cover, delta in _lp_round(ctx, epsilon, params.get("lp_method", "auto")):
                # guard against rounding: never run longer than the weakest member allows
                delta = min(delta, float(work.battery[list(cover.sensor_ids)].min()))
                if delta <= MIN_DELTA:
                    continue
                work.drain(cover.sensor_ids, delta)
                found.append(ScheduleEntry(cover, delta, gi, algorithm, policy))
        else:
            cover = _find_cover(ctx, algorithm, policy, params, epsilon)
            if cover is not None:
                if policy == "uniform":
                    e = activate_uniform(work, cover, params.get("m", DEFAULT_MAX_LOAD))
                elif policy == "nonpreemptive":
                    e = activate_nonpreemptive(work, cover)
                else:
                    if params.get("d", DEFAULT_DECAY) * float(work.battery[list(cover.sensor_ids)].min()) <= MIN_DELTA:
                        e = None
                    else:
                        e = activate_nonuniform(work, cover, params.get("d", DEFAULT_DECAY))
                if e is not None:
                    e.grid_index, e.algorithm = gi, algorithm
                    found.append(e)
        if found:
            idle = 0
            entries.extend(found)
            per_grid[gi]["covers"] += len(found)
            per_grid[gi]["time"] += sum(e.delta for e in found)
        else:
            idle += 1
        gi = (gi + 1) % len(grids)
    return ScheduleResult(entries, policy, algorithm, per_grid, work.battery.copy())
