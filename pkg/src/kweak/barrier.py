"""Per-line barriers and grid covers (BFS bottleneck search and Min-Max).

A grid is covered when every grid segment that is not part of the region
boundary carries a *barrier*: a chain of pairwise overlapping disks, each
meeting the segment's strip, running from a sensor that anchors the first
endpoint to one that anchors the second. An interior endpoint is anchored
by covering it; an endpoint on the region boundary is anchored by touching
the part of the boundary that lies inside the strip.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .field import SensorField
from .geometry import EPS_GEOM, SENSING_RADIUS, Point, Segment, clip_segment_to_strip, strip_distance
from .grids import Grid

DEPLETED = 1e-9


def strip_half_width(epsilon: float, kappa: float, mode: str = "relative") -> float:
    """Half-width of the approximation strip.

    ``relative``: the strip is ``epsilon * kappa`` wide. ``absolute``: it is
    ``epsilon`` wide.
    """
    if mode == "relative":
        return epsilon * kappa / 2.0
    if mode == "absolute":
        return epsilon / 2.0
    raise ValueError(f"unknown strip mode {mode!r}")


@dataclass(frozen=True)
class Cover:
    sensor_ids: tuple
    grid_ref: object = "none"
    epsilon: float = 0.0
    algorithm: str = ""
    b_max: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "sensor_ids", tuple(sorted(int(i) for i in self.sensor_ids)))

    def __len__(self):
        return len(self.sensor_ids)

    def __iter__(self):
        return iter(self.sensor_ids)

    def dump_line(self) -> str:
        b = "nan" if self.b_max is None else f"{self.b_max:.9g}"
        ids = " ".join(str(i) for i in self.sensor_ids)
        return f"{self.grid_ref} {self.epsilon:.9g} {self.algorithm} {b} {ids}".rstrip()

    @classmethod
    def parse_line(cls, line: str) -> "Cover":
        tok = line.split()
        grid_ref = int(tok[0]) if tok[0].lstrip("-").isdigit() else tok[0]
        b = None if tok[3] == "nan" else float(tok[3])
        return cls(tuple(int(t) for t in tok[4:]), grid_ref, float(tok[1]), tok[2], b)


@dataclass
class LineBarrier:
    line: Segment
    sensor_ids: list


@dataclass
class LineSpec:
    """Battery-independent data for one grid segment."""

    seg: tuple
    candidates: np.ndarray          # sensors whose disk meets the strip
    start: frozenset                # anchors of the first endpoint
    end: frozenset                  # anchors of the second endpoint


def _on_sides(p, L: float) -> list:
    x, y = p
    sides = []
    if abs(x) <= EPS_GEOM:
        sides.append(((0.0, 0.0), (0.0, L)))
    if abs(x - L) <= EPS_GEOM:
        sides.append(((L, 0.0), (L, L)))
    if abs(y) <= EPS_GEOM:
        sides.append(((0.0, 0.0), (L, 0.0)))
    if abs(y - L) <= EPS_GEOM:
        sides.append(((0.0, L), (L, L)))
    return sides


def endpoint_anchors(positions: np.ndarray, ids: np.ndarray, p, a, b, half_width: float,
                     L: float) -> np.ndarray:
    """Subset of ``ids`` anchoring endpoint ``p`` of the segment ``a``-``b``."""
    if len(ids) == 0:
        return ids
    pts = positions[ids]
    sides = _on_sides(p, L)
    reach = SENSING_RADIUS + EPS_GEOM
    if not sides:
        d = np.hypot(pts[:, 0] - p[0], pts[:, 1] - p[1])
        return ids[d <= reach]
    hit = np.zeros(len(ids), dtype=bool)
    for s0, s1 in sides:
        piece = clip_segment_to_strip(s0, s1, a, b, half_width)
        if piece is None:
            continue
        (x0, y0), (x1, y1) = piece
        if abs(x1 - x0) + abs(y1 - y0) <= EPS_GEOM:
            d = np.hypot(pts[:, 0] - x0, pts[:, 1] - y0)
        else:
            d = strip_distance(pts, (x0, y0), (x1, y1), 0.0)
        hit |= d <= reach
    return ids[hit]


def line_spec(field: SensorField, seg, half_width: float) -> LineSpec:
    x1, y1, x2, y2 = (float(v) for v in seg)
    a, b = (x1, y1), (x2, y2)
    if field.n:
        dist = strip_distance(field.positions, a, b, half_width)
        cand = np.flatnonzero(dist <= SENSING_RADIUS + EPS_GEOM)
    else:
        cand = np.zeros(0, dtype=np.int64)
    start = endpoint_anchors(field.positions, cand, a, a, b, half_width, field.L)
    end = endpoint_anchors(field.positions, cand, b, a, b, half_width, field.L)
    return LineSpec((x1, y1, x2, y2), cand, frozenset(start.tolist()), frozenset(end.tolist()))


class GridContext:
    """Strip candidates and endpoint anchors of every required grid segment.

    Built once per (field, grid, half-width); reused while batteries change.
    """

    def __init__(self, field: SensorField, grid: Grid, half_width: float, grid_index=None):
        self.field = field
        self.grid = grid
        self.half_width = half_width
        self.grid_index = grid_index
        keep = ~grid.on_boundary
        self.segment_index = np.flatnonzero(keep)
        self.lines = [line_spec(field, grid.segments[i], half_width) for i in self.segment_index]
        member: dict[int, list[int]] = {}
        for k, ls in enumerate(self.lines):
            for s in ls.candidates.tolist():
                member.setdefault(s, []).append(k)
        self.lines_of = member
        self.all_candidates = np.array(sorted(member), dtype=np.int64)

    def __len__(self):
        return len(self.lines)


def _context(field, grid, half_width, grid_index=None) -> GridContext:
    if isinstance(grid, GridContext):
        return grid
    return GridContext(field, grid, half_width, grid_index)


def shortest_barrier(neighbors, allowed, start: Iterable[int], end) -> list | None:
    """Fewest-hop chain from any ``start`` sensor to any ``end`` sensor.

    ``allowed`` is a set of usable sensor ids. Ties go to the smallest id:
    frontier nodes claim unvisited neighbours in ascending order, and the
    smallest reachable end sensor of the first level that reaches ``end``
    terminates the path.
    """
    frontier = sorted(s for s in start if s in allowed)
    if not frontier:
        return None
    pred = {s: -1 for s in frontier}
    while frontier:
        hits = [s for s in frontier if s in end]
        if hits:
            node = hits[0]
            path = []
            while node != -1:
                path.append(node)
                node = pred[node]
            path.reverse()
            return path
        nxt = []
        for u in frontier:
            for v in neighbors[u]:
                if v in allowed and v not in pred:
                    pred[v] = u
                    nxt.append(v)
        nxt.sort()
        frontier = nxt
    return None


def _usable(field: SensorField, ids: np.ndarray, b_min: float) -> set:
    if len(ids) == 0:
        return set()
    bat = field.battery[ids]
    ok = (bat >= b_min - EPS_GEOM) & (bat > DEPLETED)
    return set(ids[ok].tolist())


def line_barrier(field: SensorField, line, strip_half_width: float, b_min: float,
                 region_side: float | None = None) -> LineBarrier | None:
    """Barrier for one segment using sensors with battery at least ``b_min``."""
    if region_side is not None and abs(region_side - field.L) > EPS_GEOM:
        field = SensorField(region_side, field.positions, field.battery, field.seed,
                            field._graph, field._tree)
    if isinstance(line, Segment):
        seg = (line.a.x, line.a.y, line.b.x, line.b.y)
    else:
        seg = tuple(float(v) for v in line)
    ls = line_spec(field, seg, strip_half_width)
    allowed = _usable(field, ls.candidates, b_min)
    path = shortest_barrier(field.graph.neighbors, allowed, ls.start, ls.end)
    if path is None:
        return None
    x1, y1, x2, y2 = seg
    return LineBarrier(Segment(Point(x1, y1), Point(x2, y2)), path)


def _barriers_at(ctx: GridContext, b: float):
    nbrs = ctx.field.graph.neighbors
    paths = []
    for ls in ctx.lines:
        allowed = _usable(ctx.field, ls.candidates, b)
        p = shortest_barrier(nbrs, allowed, ls.start, ls.end)
        if p is None:
            return None
        paths.append(p)
    return paths


def battery_levels(ctx: GridContext, min_battery: float = 0.0) -> list:
    if len(ctx.all_candidates) == 0:
        return []
    bat = ctx.field.battery[ctx.all_candidates]
    bat = bat[(bat > DEPLETED) & (bat >= min_battery - EPS_GEOM)]
    return sorted(set(bat.tolist()))


def bfs_cover(field: SensorField, grid, strip_half_width: float = 0.0, *,
              min_battery: float = 0.0, epsilon: float = 0.0, grid_index=None):
    """Cover maximizing the weakest battery, by binary search over battery levels.

    Returns ``(Cover, b_max)`` or ``None`` when no level admits a barrier on
    every line.
    """
    ctx = _context(field, grid, strip_half_width, grid_index)
    levels = battery_levels(ctx, min_battery)
    if not levels:
        return None
    if not ctx.lines:
        return None
    lo, hi = 0, len(levels) - 1
    best = None
    while lo <= hi:
        mid = (lo + hi) // 2
        paths = _barriers_at(ctx, levels[mid])
        if paths is not None:
            best = (mid, paths)
            lo = mid + 1
        else:
            hi = mid - 1
    if best is None:
        return None
    mid, paths = best
    ids = set()
    for p in paths:
        ids.update(p)
    cover = Cover(tuple(ids), ctx.grid_index if ctx.grid_index is not None else "none",
                  epsilon, "bfs", levels[mid])
    return cover, levels[mid]


def bfs_threshold_scan(field: SensorField, grid, strip_half_width: float = 0.0,
                       min_battery: float = 0.0):
    """Largest feasible battery level by trying every level (test oracle)."""
    ctx = _context(field, grid, strip_half_width)
    best = None
    for b in battery_levels(ctx, min_battery):
        if ctx.lines and _barriers_at(ctx, b) is not None:
            best = b
    return best


def grid_is_covered(ctx: GridContext, active: set) -> bool:
    nbrs = ctx.field.graph.neighbors
    for ls in ctx.lines:
        allowed = active.intersection(ls.candidates.tolist())
        if shortest_barrier(nbrs, allowed, ls.start, ls.end) is None:
            return False
    return bool(ctx.lines)


def minmax_cover(field: SensorField, grid, strip_half_width: float = 0.0, *,
                 min_battery: float = 0.0, epsilon: float = 0.0, grid_index=None):
    """Minimal cover by greedy removal in decreasing battery order.

    Starting from every usable sensor meeting some strip, each sensor is
    dropped unless that breaks a barrier on one of its own lines. Returns
    ``None`` when the starting set does not cover the grid.
    """
    ctx = _context(field, grid, strip_half_width, grid_index)
    if not ctx.lines:
        return None
    nbrs = field.graph.neighbors
    active = _usable(field, ctx.all_candidates, max(min_battery, 0.0))
    line_sets = [set(ls.candidates.tolist()) & active for ls in ctx.lines]
    paths = []
    for ls, allowed in zip(ctx.lines, line_sets):
        p = shortest_barrier(nbrs, allowed, ls.start, ls.end)
        if p is None:
            return None
        paths.append(set(p))
    bat = field.battery
    order = sorted(active, key=lambda s: (-bat[s], s))
    for s in order:
        affected = ctx.lines_of.get(s, [])
        new_paths = {}
        ok = True
        for k in affected:
            if s not in paths[k]:
                continue
            allowed = line_sets[k]
            allowed.discard(s)
            p = shortest_barrier(nbrs, allowed, ctx.lines[k].start, ctx.lines[k].end)
            allowed.add(s)
            if p is None:
                ok = False
                break
            new_paths[k] = set(p)
        if ok:
            active.discard(s)
            for k in affected:
                line_sets[k].discard(s)
            for k, p in new_paths.items():
                paths[k] = p
    return Cover(tuple(active), ctx.grid_index if ctx.grid_index is not None else "none",
                 epsilon, "minmax",
                 float(min(bat[s] for s in active)) if active else None)


def is_grid_cover(cover, field: SensorField, grid, strip_half_width: float = 0.0) -> bool:
    ctx = _context(field, grid, strip_half_width)
    return grid_is_covered(ctx, set(int(i) for i in cover))


def is_minimal(cover, field: SensorField, grid, strip_half_width: float = 0.0) -> bool:
    """True when dropping any single sensor breaks some line barrier."""
    ctx = _context(field, grid, strip_half_width)
    ids = set(int(i) for i in cover)
    nbrs = field.graph.neighbors
    for s in sorted(ids):
        rest = ids - {s}
        broken = False
        for k in ctx.lines_of.get(s, []):
            ls = ctx.lines[k]
            if shortest_barrier(nbrs, rest.intersection(ls.candidates.tolist()), ls.start, ls.end) is None:
                broken = True
                break
        if not broken:
            return False
    return True
