"""Planar primitives: points, disks, segments, strips and the unit-disk graph.

Every distance comparison uses the absolute tolerance ``EPS_GEOM`` and
treats boundaries as part of the set (closed disks, closed strips).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

EPS_GEOM = 1e-9
SENSING_RADIUS = 1.0


@dataclass(frozen=True)
class Point:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite point ({self.x}, {self.y})")

    def __iter__(self):
        yield self.x
        yield self.y

    def dist(self, other: "Point") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class Disk:
    center: Point
    radius: float = SENSING_RADIUS

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("disk radius must be positive")


@dataclass(frozen=True)
class Segment:
    a: Point
    b: Point

    def __post_init__(self):
        if self.a == self.b:
            raise ValueError("degenerate segment")

    @property
    def length(self) -> float:
        return self.a.dist(self.b)

    def as_array(self) -> np.ndarray:
        return np.array([self.a.x, self.a.y, self.b.x, self.b.y])


@dataclass(frozen=True)
class Strip:
    """Closed rectangle of half-width ``half_width`` around ``axis``.

    The rectangle has no end caps: it spans exactly the axis length.
    """

    axis: Segment
    half_width: float = 0.0

    def __post_init__(self):
        if self.half_width < 0:
            raise ValueError("strip half-width must be >= 0")


def _as_xy(points) -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    return arr.reshape(-1, 2)


def strip_distance(points, a, b, half_width: float = 0.0) -> np.ndarray:
    """Distance from each point to the closed strip around segment ``a``-``b``.

    ``points`` is an ``(n, 2)`` array. With ``half_width == 0`` this is the
    ordinary point-to-segment distance.
    """
    pts = _as_xy(points)
    ax, ay = float(a[0]), float(a[1])
    dx, dy = float(b[0]) - ax, float(b[1]) - ay
    length = math.hypot(dx, dy)
    ux, uy = dx / length, dy / length
    rx, ry = pts[:, 0] - ax, pts[:, 1] - ay
    along = rx * ux + ry * uy
    across = np.abs(-rx * uy + ry * ux)
    over = np.maximum(np.maximum(-along, along - length), 0.0)
    side = np.maximum(across - half_width, 0.0)
    return np.hypot(over, side)


def segment_distance(points, a, b) -> np.ndarray:
    return strip_distance(points, a, b, 0.0)


def disk_intersects_strip(d: Disk, s: Strip) -> bool:
    dist = strip_distance([tuple(d.center)], tuple(s.axis.a), tuple(s.axis.b), s.half_width)[0]
    return bool(dist <= d.radius + EPS_GEOM)


def disk_intersects_segment(d: Disk, seg: Segment) -> bool:
    return disk_intersects_strip(d, Strip(seg, 0.0))


def point_covered(p: Point, sensors: Sequence[Disk]) -> bool:
    """True if some disk in ``sensors`` contains ``p`` (boundary included)."""
    for d in sensors:
        if math.hypot(p.x - d.center.x, p.y - d.center.y) <= d.radius + EPS_GEOM:
            return True
    return False


def clip_segment_to_box(x1, y1, x2, y2, lo: float, hi: float):
    """Liang-Barsky clip of a segment to the square ``[lo, hi]^2``.

    Returns the clipped endpoints or ``None`` when nothing (or only a point)
    remains inside.
    """
    dx, dy = x2 - x1, y2 - y1
    t0, t1 = 0.0, 1.0
    for p, q in ((-dx, x1 - lo), (dx, hi - x1), (-dy, y1 - lo), (dy, hi - y1)):
        if abs(p) < 1e-15:
            if q < -EPS_GEOM:
                return None
            continue
        t = q / p
        if p < 0:
            t0 = max(t0, t)
        else:
            t1 = min(t1, t)
        if t0 > t1:
            return None
    cx1, cy1 = x1 + t0 * dx, y1 + t0 * dy
    cx2, cy2 = x1 + t1 * dx, y1 + t1 * dy
    if math.hypot(cx2 - cx1, cy2 - cy1) <= EPS_GEOM:
        return None
    return cx1, cy1, cx2, cy2


def clip_segment_to_strip(p, q, a, b, half_width: float):
    """Portion of segment ``p``-``q`` inside the strip around ``a``-``b``.

    Returns ``(start, end)`` points (possibly equal) or ``None``.
    """
    ax, ay = float(a[0]), float(a[1])
    dx, dy = float(b[0]) - ax, float(b[1]) - ay
    length = math.hypot(dx, dy)
    ux, uy = dx / length, dy / length

    def local(pt):
        rx, ry = pt[0] - ax, pt[1] - ay
        return rx * ux + ry * uy, -rx * uy + ry * ux

    (u1, v1), (u2, v2) = local(p), local(q)
    du, dv = u2 - u1, v2 - v1
    t0, t1 = 0.0, 1.0
    tol = EPS_GEOM
    for pp, qq in ((-du, u1 + tol), (du, length + tol - u1),
                   (-dv, v1 + half_width + tol), (dv, half_width + tol - v1)):
        if abs(pp) < 1e-15:
            if qq < 0:
                return None
            continue
        t = qq / pp
        if pp < 0:
            t0 = max(t0, t)
        else:
            t1 = min(t1, t)
        if t0 > t1:
            return None
    px, py = float(p[0]), float(p[1])
    qx, qy = float(q[0]), float(q[1])
    start = (px + t0 * (qx - px), py + t0 * (qy - py))
    end = (px + t1 * (qx - px), py + t1 * (qy - py))
    return start, end


class AdjacencyGraph:
    """Unit-disk graph: sensors ``i`` and ``j`` are adjacent when their
    sensing disks overlap, i.e. centers are at most ``2`` apart.

    ``neighbors[i]`` is a sorted list of vertex ids.
    """

    def __init__(self, n: int, edges: np.ndarray):
        self.n = n
        self.edges = edges
        nbrs: list[list[int]] = [[] for _ in range(n)]
        for i, j in edges.tolist():
            nbrs[i].append(j)
            nbrs[j].append(i)
        for lst in nbrs:
            lst.sort()
        self.neighbors = nbrs

    def has_edge(self, i: int, j: int) -> bool:
        lst = self.neighbors[i]
        k = np.searchsorted(lst, j)
        return k < len(lst) and lst[k] == j

    def edge_set(self) -> set[tuple[int, int]]:
        return {(int(i), int(j)) for i, j in self.edges.tolist()}

    def __len__(self):
        return self.n


def build_adjacency_graph(sensors) -> AdjacencyGraph:
    """Unit-disk graph over sensor centers.

    ``sensors`` may be a list of :class:`Disk` or an ``(n, 2)`` array of
    centers (all radii are the sensing radius).
    """
    if len(sensors) and isinstance(sensors[0], Disk):
        if any(abs(d.radius - SENSING_RADIUS) > EPS_GEOM for d in sensors):
            raise ValueError("adjacency graph requires unit sensing radii")
        centers = np.array([[d.center.x, d.center.y] for d in sensors], dtype=float)
    else:
        centers = _as_xy(sensors) if len(sensors) else np.zeros((0, 2))
    n = len(centers)
    if n < 2:
        return AdjacencyGraph(n, np.zeros((0, 2), dtype=np.int64))
    tree = cKDTree(centers)
    pairs = tree.query_pairs(2 * SENSING_RADIUS + EPS_GEOM, output_type="ndarray")
    pairs = np.sort(pairs, axis=1)
    order = np.lexsort((pairs[:, 1], pairs[:, 0]))
    return AdjacencyGraph(n, pairs[order].astype(np.int64))
