"""Location-free covers: deactivate hop balls around random seeds.

All seeds grow breadth-first searches in lockstep over the disk graph of
live sensors. A search stops at the hop limit or where it meets another
seed's search; the sensors where it stops stay on (``boundary``), the
sensors strictly inside go to sleep (``deactivated``), and every sensor no
search reached stays on as well.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .barrier import DEPLETED, Cover
from .field import SensorField
from .scheduling import DEFAULT_DECAY, MIN_DELTA, ScheduleEntry, ScheduleResult, activate_nonuniform

UNLABELED, BOUNDARY, DEACTIVATED = "unlabeled", "boundary", "deactivated"


@dataclass
class SeedRoundState:
    labels: dict                    # sensor id -> label, for every live sensor
    seeds: list
    hop_limit: int
    owner: dict = field(default_factory=dict)       # reached sensor -> seed index
    hops: dict = field(default_factory=dict)        # reached sensor -> hop distance

    def with_label(self, label: str) -> list:
        return sorted(s for s, lab in self.labels.items() if lab == label)


def default_hop_limit(kappa: float) -> int:
    # one hop spans at most 2 length units, so a ball of h hops has diameter <= 4h
    return int(math.floor(kappa / 4.0))


def default_seed_count(L: float, kappa: float) -> int:
    return max(1, int(round(L * L / (kappa * kappa))))


def grow_seeds(field: SensorField, seeds, hop_limit: int, kappa: float | None = None,
               mode: str = "hops") -> SeedRoundState:
    """Lockstep search from ``seeds``; see the module docstring.

    ``mode="euclidean"`` replaces the hop test by ``|u - seed| >= kappa``.
    A sensor claimed by one seed next to a sensor already claimed by another
    becomes boundary, so sleeping regions of different seeds never touch.
    """
    if mode not in ("hops", "euclidean"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "euclidean" and kappa is None:
        raise ValueError("euclidean mode needs kappa")
    bat = field.battery
    live = bat > DEPLETED
    nbrs = field.graph.neighbors
    labels = {int(s): UNLABELED for s in np.flatnonzero(live)}
    seeds = [int(s) for s in seeds]
    if len(set(seeds)) != len(seeds) or any(not live[s] for s in seeds):
        raise ValueError("seeds must be distinct live sensors")
    owner, hops = {}, {}
    pos = field.positions

    def at_limit(v, k, h):
        if mode == "hops":
            return h >= hop_limit
        return math.dist(pos[v], pos[seeds[k]]) >= kappa - 1e-12

    frontier = []
    for k, s in enumerate(seeds):
        owner[s], hops[s] = k, 0
        labels[s] = BOUNDARY if at_limit(s, k, 0) else DEACTIVATED
        if labels[s] == DEACTIVATED:
            frontier.append(s)
    # seeds adjacent to each other's regions separate immediately
    for s in seeds:
        if labels[s] == DEACTIVATED and any(owner.get(u, owner[s]) != owner[s] for u in nbrs[s]):
            labels[s] = BOUNDARY
    frontier = [s for s in frontier if labels[s] == DEACTIVATED]
    h = 0
    while frontier:
        h += 1
        proposals: dict[int, set] = {}
        for u in frontier:
            for v in nbrs[u]:
                if live[v] and labels[v] == UNLABELED:
                    proposals.setdefault(v, set()).add(owner[u])
        nxt = []
        for v in sorted(proposals):
            ks = proposals[v]
            k = min(ks)
            owner[v], hops[v] = k, h
            if len(ks) > 1 or at_limit(v, k, h):
                labels[v] = BOUNDARY
            elif any(u in owner and owner[u] != k and labels[u] != BOUNDARY for u in nbrs[v]):
                labels[v] = BOUNDARY
            else:
                labels[v] = DEACTIVATED
                nxt.append(v)
        frontier = nxt
    return SeedRoundState(labels, seeds, hop_limit, owner, hops)


def random_seeds_cover(field: SensorField, k: int, kappa: float, seed: int, *,
                       hop_limit: int | None = None, mode: str = "hops") -> Cover:
    """Active set after one round with ``k`` random seeds (deterministic in ``seed``)."""
    if k < 1:
        raise ValueError("k must be at least 1")
    state = random_seeds_round(field, k, kappa, seed, hop_limit=hop_limit, mode=mode)
    active = [s for s, lab in state.labels.items() if lab != DEACTIVATED]
    return Cover(active, "seeds", 0.0, "random_seeds")


def random_seeds_round(field: SensorField, k: int, kappa: float, seed: int, *,
                       hop_limit: int | None = None, mode: str = "hops") -> SeedRoundState:
    if hop_limit is None:
        hop_limit = default_hop_limit(kappa)
    live = np.flatnonzero(field.battery > DEPLETED)
    rng = np.random.default_rng(seed)
    k = min(k, len(live))
    seeds = sorted(rng.choice(live, size=k, replace=False).tolist()) if k else []
    return grow_seeds(field, seeds, hop_limit, kappa, mode)


def random_seeds_lifetime(field: SensorField, kappa: float, seed: int, *, k: int | None = None,
                          epsilon: float = 0.0, d: float = DEFAULT_DECAY, hop_limit: int | None = None,
                          mode: str = "hops", cell_size: float = 0.1, inplace: bool = False,
                          max_rounds: int = 10_000) -> ScheduleResult:
    """Repeated rounds with fresh seeds, each cover run non-uniformly.

    Stops at the first round whose active set fails the weak-coverage check
    (or is empty).
    """
    from .verification import verify_kappa_weak

    work = field if inplace else field.copy()
    if k is None:
        k = default_seed_count(field.L, kappa)
    ss = np.random.SeedSequence(seed)
    entries = []
    for r, child in enumerate(ss.spawn(max_rounds)):
        if not np.any(work.battery > DEPLETED):
            break
        round_seed = int(child.generate_state(1)[0])
        cover = random_seeds_cover(work, k, kappa, round_seed, hop_limit=hop_limit, mode=mode)
        if not len(cover):
            break
        if not verify_kappa_weak(work, cover.sensor_ids, kappa, epsilon, cell_size).passed:
            break
        if d * float(work.battery[list(cover.sensor_ids)].min()) <= MIN_DELTA:
            break
        e = activate_nonuniform(work, cover, d)
        entries.append(ScheduleEntry(cover, e.delta, r, "random_seeds", "nonuniform"))
    return ScheduleResult(entries, "nonuniform", "random_seeds", {}, work.battery.copy())
