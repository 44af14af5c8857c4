"""Sensor fields: Poisson generation, battery ledger, depth and lifetime bound."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .geometry import EPS_GEOM, SENSING_RADIUS, AdjacencyGraph, Point, build_adjacency_graph

DEFAULT_DEPTH_RESOLUTION = 0.1
FIELD_HEADER = "kweak-field v1"


@dataclass(frozen=True)
class Sensor:
    id: int
    pos: Point
    battery: float


@dataclass
class SensorField:
    """Sensors in the square ``[0, L]^2``.

    Positions are immutable; ``battery`` is the mutable ledger (one entry per
    sensor, in ``[0, 1]``). Use :meth:`copy` before running a schedule when
    the initial state must be preserved.
    """

    L: float
    positions: np.ndarray
    battery: np.ndarray
    seed: int = 0
    _graph: AdjacencyGraph | None = dc_field(default=None, repr=False, compare=False)
    _tree: cKDTree | None = dc_field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float).reshape(-1, 2)
        self.positions.setflags(write=False)
        self.battery = np.asarray(self.battery, dtype=float).copy()
        if len(self.battery) != len(self.positions):
            raise ValueError("one battery value per sensor required")
        if np.any(self.battery < -EPS_GEOM) or np.any(self.battery > 1 + EPS_GEOM):
            raise ValueError("battery values must lie in [0, 1]")
        if len(self.positions) and (
            self.positions.min() < -EPS_GEOM or self.positions.max() > self.L + EPS_GEOM
        ):
            raise ValueError("sensor outside the region")

    def __len__(self):
        return len(self.positions)

    @property
    def n(self) -> int:
        return len(self.positions)

    @property
    def sensors(self) -> list[Sensor]:
        return [Sensor(i, Point(*p), float(b))
                for i, (p, b) in enumerate(zip(self.positions.tolist(), self.battery.tolist()))]

    @property
    def graph(self) -> AdjacencyGraph:
        if self._graph is None:
            self._graph = build_adjacency_graph(self.positions)
        return self._graph

    @property
    def tree(self) -> cKDTree:
        if self._tree is None:
            self._tree = cKDTree(self.positions if self.n else np.zeros((0, 2)))
        return self._tree

    def copy(self) -> "SensorField":
        """Fresh battery ledger sharing positions and cached graph."""
        return SensorField(self.L, self.positions, self.battery.copy(), self.seed,
                           self._graph, self._tree)

    def drain(self, ids, amount: float) -> None:
        """Subtract ``amount`` from each listed sensor; tiny remainders snap to 0."""
        if amount < 0:
            raise ValueError("battery can only decrease")
        ids = np.asarray(sorted(set(int(i) for i in ids)), dtype=np.int64)
        b = self.battery[ids] - amount
        if np.any(b < -EPS_GEOM):
            raise ValueError("activation would drive a battery negative")
        b[b < EPS_GEOM] = 0.0
        self.battery[ids] = b

    # --- serialization -------------------------------------------------

    def dumps(self) -> str:
        lines = [f"{FIELD_HEADER} L={self.L:.9g} seed={self.seed}"]
        for i, ((x, y), b) in enumerate(zip(self.positions.tolist(), self.battery.tolist())):
            lines.append(f"{i} {x:.9g} {y:.9g} {b:.9g}")
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def loads(cls, text: str) -> "SensorField":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith(FIELD_HEADER):
            raise ValueError("not a kweak field file")
        meta = dict(tok.split("=", 1) for tok in lines[0].split()[2:])
        rows = [ln.split() for ln in lines[1:]]
        ids = [int(r[0]) for r in rows]
        if ids != list(range(len(ids))):
            raise ValueError("sensor ids must be dense and ordered 0..n-1")
        pos = np.array([[float(r[1]), float(r[2])] for r in rows]).reshape(-1, 2)
        bat = np.array([float(r[3]) for r in rows])
        return cls(float(meta["L"]), pos, bat, int(meta.get("seed", 0)))

    @classmethod
    def load(cls, path) -> "SensorField":
        return cls.loads(Path(path).read_text())


def _poisson_inversion(rng: np.random.Generator, lam: float) -> int:
    # sequential search on the CDF with a single uniform draw
    u = rng.random()
    k = 0
    p = math.exp(-lam)
    cdf = p
    while u > cdf:
        k += 1
        p *= lam / k
        cdf += p
        if p == 0.0:
            break
    return k


def generate_field(L: float, intensity: float, seed: int) -> SensorField:
    """Poisson field: each ``1x1`` cell receives ``Poisson(intensity)`` sensors.

    Cells are visited in row-major order, each with its own child stream of
    ``seed``, so the result does not depend on evaluation order.
    """
    if L <= 0 or intensity < 0:
        raise ValueError("need L > 0 and intensity >= 0")
    ncell = int(math.ceil(L - EPS_GEOM))
    children = np.random.SeedSequence(seed).spawn(ncell * ncell)
    pts = []
    for row in range(ncell):
        for col in range(ncell):
            rng = np.random.default_rng(children[row * ncell + col])
            k = _poisson_inversion(rng, intensity) if intensity > 0 else 0
            if k:
                w = min(1.0, L - col)
                h = min(1.0, L - row)
                xy = rng.random((k, 2))
                xy[:, 0] = col + xy[:, 0] * w
                xy[:, 1] = row + xy[:, 1] * h
                pts.append(xy)
    positions = np.concatenate(pts) if pts else np.zeros((0, 2))
    return SensorField(float(L), positions, np.ones(len(positions)), int(seed))


@dataclass(frozen=True)
class DepthReport:
    d_R: int
    resolution: float
    depth_histogram: dict


def depth_at(field: SensorField, points) -> np.ndarray:
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if field.n == 0:
        return np.zeros(len(pts), dtype=np.int64)
    return field.tree.query_ball_point(pts, SENSING_RADIUS + EPS_GEOM, return_length=True)


def region_depth(field: SensorField, resolution: float = DEFAULT_DEPTH_RESOLUTION) -> DepthReport:
    """Maximum sensor depth over a lattice of sample points of spacing ``resolution``."""
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    m = int(math.floor(field.L / resolution + EPS_GEOM)) + 1
    axis = np.arange(m) * resolution
    xx, yy = np.meshgrid(axis, axis)
    depth = depth_at(field, np.column_stack([xx.ravel(), yy.ravel()]))
    hist = Counter(depth.tolist())
    d_max = int(depth.max()) if len(depth) else 0
    # sensor centers are extra samples so that d_R bounds every center's depth
    if field.n:
        d_max = max(d_max, int(depth_at(field, field.positions).max()))
    return DepthReport(d_max, resolution, dict(sorted(hist.items())))


def lifetime_upper_bound(field: SensorField, kappa: float,
                         resolution: float = DEFAULT_DEPTH_RESOLUTION) -> float:
    """Upper bound ``kappa * d_R`` on the lifetime of any schedule."""
    if kappa <= 1:
        raise ValueError("kappa must exceed 1")
    return kappa * region_depth(field, resolution).d_R
