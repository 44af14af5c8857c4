"""Raster oracle for weak coverage: uncovered components and their diameters."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree
from scipy.spatial.distance import pdist

from .geometry import EPS_GEOM, SENSING_RADIUS

DEFAULT_CELL_SIZE = 0.1
BRUTE_FORCE_LIMIT = 2000
FOUR_CONNECTED = ndimage.generate_binary_structure(2, 1)


@dataclass
class CoverageMask:
    cell_size: float
    covered: np.ndarray          # bool, indexed [row (y), col (x)]

    @property
    def shape(self):
        return self.covered.shape

    def centers(self, rows, cols):
        c = self.cell_size
        return np.column_stack([(np.asarray(cols) + 0.5) * c, (np.asarray(rows) + 0.5) * c])


@dataclass
class Hole:
    cells: int
    diameter: float


@dataclass
class HoleReport:
    holes: list
    max_diameter: float
    threshold: float
    passed: bool
    cell_size: float
    kappa: float
    epsilon: float

    @property
    def hole_count(self) -> int:
        return len(self.holes)

    def to_dict(self) -> dict:
        return {"pass": bool(self.passed), "max_diameter": float(self.max_diameter),
                "hole_count": self.hole_count, "cell_size": self.cell_size,
                "kappa": self.kappa, "epsilon": self.epsilon}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def rasterize(field, active_ids, cell_size: float = DEFAULT_CELL_SIZE) -> CoverageMask:
    """Covered/uncovered bitmap of ``[0, L]^2`` sampled at cell centers."""
    if cell_size <= 0:
        raise ValueError("cell_size must be positive")
    m = int(math.ceil(field.L / cell_size - 1e-9))
    ids = np.asarray(sorted(set(int(i) for i in active_ids)), dtype=np.int64)
    covered = np.zeros((m, m), dtype=bool)
    if len(ids):
        axis = (np.arange(m) + 0.5) * cell_size
        xx, yy = np.meshgrid(axis, axis)
        pts = np.column_stack([xx.ravel(), yy.ravel()])
        tree = cKDTree(field.positions[ids])
        d, _ = tree.query(pts, k=1, distance_upper_bound=SENSING_RADIUS + 2 * EPS_GEOM)
        covered = (d <= SENSING_RADIUS + EPS_GEOM).reshape(m, m)
    return CoverageMask(cell_size, covered)


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Monotone-chain hull, counter-clockwise, no repeated endpoint.

    Works for collinear and single-point inputs.
    """
    pts = np.unique(np.asarray(points, dtype=float), axis=0)
    if len(pts) <= 2:
        return pts
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))].tolist()

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1])


def hull_diameter(points) -> float:
    """Largest pairwise distance via rotating calipers over the convex hull."""
    h = convex_hull(points)
    n = len(h)
    if n == 1:
        return 0.0
    if n == 2:
        return float(np.hypot(*(h[1] - h[0])))

    def area2(i, j, k):
        return abs((h[j][0] - h[i][0]) * (h[k][1] - h[i][1]) - (h[j][1] - h[i][1]) * (h[k][0] - h[i][0]))

    best = 0.0
    j = 1
    for i in range(n):
        ni = (i + 1) % n
        # advance the antipodal pointer while the triangle area grows
        while area2(i, ni, (j + 1) % n) > area2(i, ni, j):
            j = (j + 1) % n
        for k in (i, ni):
            d = math.hypot(h[k][0] - h[j][0], h[k][1] - h[j][1])
            best = max(best, d)
    return best


def brute_diameter(points) -> float:
    pts = np.asarray(points, dtype=float)
    if len(pts) < 2:
        return 0.0
    return float(pdist(pts).max())


def component_diameter(points) -> float:
    if len(points) <= BRUTE_FORCE_LIMIT:
        return brute_diameter(points)
    return hull_diameter(points)


def hole_report(mask: CoverageMask):
    labels, count = ndimage.label(~mask.covered, structure=FOUR_CONNECTED)
    holes = []
    if count:
        rows, cols = np.nonzero(labels)
        lab = labels[rows, cols]
        order = np.argsort(lab, kind="stable")
        rows, cols, lab = rows[order], cols[order], lab[order]
        bounds = np.searchsorted(lab, np.arange(1, count + 2))
        for k in range(count):
            r = rows[bounds[k]:bounds[k + 1]]
            c = cols[bounds[k]:bounds[k + 1]]
            pts = mask.centers(r, c)
            # only points on the hull matter for the diameter
            if len(pts) > 64:
                pts = _boundary_cells(r, c, pts)
            holes.append(Hole(int(bounds[k + 1] - bounds[k]), component_diameter(pts)))
    return holes


def _boundary_cells(r, c, pts):
    # keep extreme cells of each row and column; the hull of these equals the full hull
    keep = np.zeros(len(r), dtype=bool)
    for key in (r, c):
        order = np.lexsort((c if key is r else r, key))
        k = key[order]
        first = np.r_[True, k[1:] != k[:-1]]
        last = np.r_[k[1:] != k[:-1], True]
        keep[order[first]] = True
        keep[order[last]] = True
    return pts[keep]


def kappa_threshold(kappa: float, epsilon: float, cell_size: float) -> float:
    return (1.0 + epsilon) * kappa + 2.0 * cell_size * math.sqrt(2.0)


def verify_kappa_weak(field, active_ids, kappa: float, epsilon: float = 0.0,
                      cell_size: float = DEFAULT_CELL_SIZE) -> HoleReport:
    """Certify that no uncovered component spans ``(1 + epsilon) * kappa``.

    The verdict allows ``2 * cell_size * sqrt(2)`` of raster slack.
    """
    if cell_size > kappa / 20 + 1e-12:
        raise ValueError("cell_size must be at most kappa / 20")
    mask = rasterize(field, active_ids, cell_size)
    holes = hole_report(mask)
    dmax = max((h.diameter for h in holes), default=0.0)
    thr = kappa_threshold(kappa, epsilon, cell_size)
    return HoleReport(holes, dmax, thr, dmax < thr, cell_size, kappa, epsilon)
