"""Square and hexagonal grids, shift families and total edge length."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geometry import EPS_GEOM, Point, clip_segment_to_box

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)
DEFAULT_GRANULARITY = 2.0


@dataclass
class Grid:
    """Edges of a tiling clipped to ``[0, L]^2``.

    ``segments`` is an ``(m, 4)`` array of ``x1 y1 x2 y2`` rows. For square
    grids ``orientation`` holds ``'h'`` or ``'v'`` per segment.
    """

    kind: str
    segments: np.ndarray
    offset: Point
    kappa: float
    L: float
    orientation: list = field(default_factory=list)

    def __post_init__(self):
        self.segments = np.asarray(self.segments, dtype=float).reshape(-1, 4)

    def __len__(self):
        return len(self.segments)

    @property
    def lengths(self) -> np.ndarray:
        s = self.segments
        return np.hypot(s[:, 2] - s[:, 0], s[:, 3] - s[:, 1])

    @property
    def on_boundary(self) -> np.ndarray:
        """Mask of segments lying along the region boundary."""
        s, L = self.segments, self.L
        out = np.zeros(len(s), dtype=bool)
        for c in (0.0, L):
            out |= (np.abs(s[:, 0] - c) <= EPS_GEOM) & (np.abs(s[:, 2] - c) <= EPS_GEOM)
            out |= (np.abs(s[:, 1] - c) <= EPS_GEOM) & (np.abs(s[:, 3] - c) <= EPS_GEOM)
        return out

    def dumps(self) -> str:
        lines = [f"{self.kind} {self.kappa:.9g} {self.offset.x:.9g} {self.offset.y:.9g}"]
        lines += [" ".join(f"{v:.9g}" for v in row) for row in self.segments.tolist()]
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def loads(cls, text: str, L: float | None = None) -> "Grid":
        lines = [ln.split() for ln in text.splitlines() if ln.strip()]
        kind, kappa, ox, oy = lines[0][0], float(lines[0][1]), float(lines[0][2]), float(lines[0][3])
        segs = np.array([[float(v) for v in row] for row in lines[1:]]).reshape(-1, 4)
        if L is None:
            L = float(segs.max()) if len(segs) else 0.0
        orient = []
        if kind == "square":
            orient = ["h" if abs(r[1] - r[3]) <= EPS_GEOM else "v" for r in segs.tolist()]
        return cls(kind, segs, Point(ox, oy), kappa, L, orient)


@dataclass
class GridFamily:
    grids: list
    granularity: float

    def __len__(self):
        return len(self.grids)

    def __iter__(self):
        return iter(self.grids)

    def __getitem__(self, i):
        return self.grids[i]


def square_tile_side(kappa: float) -> float:
    return kappa / SQRT2


def _line_positions(start: float, step: float, L: float) -> list[float]:
    k0 = math.ceil((-EPS_GEOM - start) / step)
    out = []
    k = k0
    while start + k * step <= L + EPS_GEOM:
        out.append(min(max(start + k * step, 0.0), L))
        k += 1
    return out


def square_grid(L: float, kappa: float, offset: Point = Point(0.0, 0.0)) -> Grid:
    """Full-length horizontal and vertical lines at spacing ``kappa / sqrt(2)``."""
    if kappa <= 1 or L <= 0:
        raise ValueError("need kappa > 1 and L > 0")
    side = square_tile_side(kappa)
    segs, orient = [], []
    for y in _line_positions(offset.y, side, L):
        segs.append((0.0, y, L, y))
        orient.append("h")
    for x in _line_positions(offset.x, side, L):
        segs.append((x, 0.0, x, L))
        orient.append("v")
    return Grid("square", np.array(segs).reshape(-1, 4), offset, kappa, L, orient)


def _hex_vertex_angles():
    return [math.radians(60 * k) for k in range(6)]


def hex_grid(L: float, kappa: float, offset: Point = Point(0.0, 0.0)) -> Grid:
    """Edges of a flat-topped hexagonal tiling (side ``kappa / 2``).

    The unshifted tiling has a hexagon centred on the origin; ``offset``
    translates the whole tiling. Shared edges appear once.
    """
    if kappa <= 1 or L <= 0:
        raise ValueError("need kappa > 1 and L > 0")
    a = kappa / 2.0
    ax_, ay_ = 1.5 * a, SQRT3 / 2 * a        # lattice vector A
    by_ = SQRT3 * a                          # lattice vector B = (0, by_)
    ox, oy = offset.x, offset.y
    imin = math.floor((-2 * a - ox) / ax_) - 1
    imax = math.ceil((L + 2 * a - ox) / ax_) + 1
    verts = [(a * math.cos(t), a * math.sin(t)) for t in _hex_vertex_angles()]
    seen = {}
    for i in range(imin, imax + 1):
        cx = ox + i * ax_
        cy0 = oy + i * ay_
        jmin = math.floor((-2 * a - cy0) / by_) - 1
        jmax = math.ceil((L + 2 * a - cy0) / by_) + 1
        for j in range(jmin, jmax + 1):
            cy = cy0 + j * by_
            for k in range(6):
                x1, y1 = cx + verts[k][0], cy + verts[k][1]
                x2, y2 = cx + verts[(k + 1) % 6][0], cy + verts[(k + 1) % 6][1]
                p, q = sorted([(round(x1, 7), round(y1, 7)), (round(x2, 7), round(y2, 7))])
                if (p, q) in seen:
                    continue
                clipped = clip_segment_to_box(x1, y1, x2, y2, 0.0, L)
                seen[(p, q)] = clipped
    segs = sorted({tuple(round(v, 12) for v in c) for c in seen.values() if c is not None},
                  key=lambda r: (min(r[1], r[3]), min(r[0], r[2]), r))
    return Grid("hexagonal", np.array(segs).reshape(-1, 4), offset, kappa, L)


def make_grid(kind: str, L: float, kappa: float, offset: Point = Point(0.0, 0.0)) -> Grid:
    if kind in ("square", "sq"):
        return square_grid(L, kappa, offset)
    if kind in ("hexagonal", "hex"):
        return hex_grid(L, kappa, offset)
    raise ValueError(f"unknown grid kind {kind!r}")


def square_shift_offsets(kappa: float, g_eff: float) -> list[float]:
    """Diagonal shifts ``t = 0, g, 2g, ...`` below the tile side.

    A shift whose wrap-around gap to the next period is below ``g / 2``
    nearly duplicates the unshifted grid and is dropped.
    """
    side = square_tile_side(kappa)
    out = [0.0]
    k = 1
    while k * g_eff < side - EPS_GEOM:
        t = k * g_eff
        if side - t >= g_eff / 2 - EPS_GEOM:
            out.append(t)
        k += 1
    return out


def _in_flat_hex(dx: float, dy: float, a: float) -> bool:
    tol = 1e-9
    return abs(dy) <= SQRT3 / 2 * a + tol and SQRT3 * abs(dx) + abs(dy) <= SQRT3 * a + tol


def hex_shift_offsets(kappa: float, g_eff: float) -> list[Point]:
    """Triangular-lattice points (spacing ``g_eff``) inside one hexagon,
    deduplicated modulo the period lattice of the tiling."""
    a = kappa / 2.0
    cx = a                                    # hexagon with a vertex at the origin
    n = int(math.ceil(2 * a / g_eff)) + 2
    keys = {}
    for j in range(-2 * n, 2 * n + 1):
        for i in range(-2 * n, 2 * n + 1):
            x = i * g_eff + j * g_eff / 2
            y = j * g_eff * SQRT3 / 2
            if not _in_flat_hex(x - cx, y, a):
                continue
            u = x / (1.5 * a)
            v = (y - u * SQRT3 / 2 * a) / (SQRT3 * a)
            key = (round(u - math.floor(u + 1e-9), 6) % 1.0, round(v - math.floor(v + 1e-9), 6) % 1.0)
            if key not in keys:
                keys[key] = Point(round(x, 12) + 0.0, round(y, 12) + 0.0)
    pts = sorted(keys.values(), key=lambda p: (p.x != 0 or p.y != 0, round(p.x, 9), round(p.y, 9)))
    return pts


def shift_family(kind: str, L: float, kappa: float, g_eff: float) -> GridFamily:
    """Family of shifted copies of one tiling at granularity ``g_eff``."""
    if g_eff <= 0:
        raise ValueError("granularity must be positive")
    if kind in ("square", "sq"):
        grids = [square_grid(L, kappa, Point(t, t)) for t in square_shift_offsets(kappa, g_eff)]
    elif kind in ("hexagonal", "hex"):
        grids = [hex_grid(L, kappa, p) for p in hex_shift_offsets(kappa, g_eff)]
    else:
        raise ValueError(f"unknown grid kind {kind!r}")
    return GridFamily(grids, g_eff)


def effective_granularity(g: float, strip_half_width: float) -> float:
    """Shift spacing widened so strips of neighbouring shifts stay apart."""
    return g + 2.0 * strip_half_width


def total_edge_length(grid: Grid) -> float:
    """Sum of clipped segment lengths (each shared edge once)."""
    return float(grid.lengths.sum())


def tiling_edge_length(grid: Grid) -> float:
    """Sum of tile perimeters inside the region.

    Interior edges bound two tiles and count twice; edges lying on the
    region boundary are not tile edges of the clipped tiling and are left out.
    This is the quantity the closed forms ``4*sqrt(2)*L^2/kappa`` (square) and
    ``8/sqrt(3)*L^2/kappa`` (hexagonal) describe.
    """
    return float(2.0 * grid.lengths[~grid.on_boundary].sum())


def tel_square_closed_form(L: float, kappa: float) -> float:
    return 4 * SQRT2 * L * L / kappa


def tel_hex_closed_form(L: float, kappa: float) -> float:
    return 8 / SQRT3 * L * L / kappa
