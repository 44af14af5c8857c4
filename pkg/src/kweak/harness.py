"""Seeded lifetime sweeps with CSV output."""
from __future__ import annotations

import csv
import hashlib
import io
import itertools
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
import yaml

from .barrier import strip_half_width
from .field import generate_field, region_depth
from .grids import effective_granularity, shift_family
from .random_seeds import random_seeds_lifetime
from .scheduling import grid_based_lifetime
from .verification import verify_kappa_weak

ROW_HEADER = ["intensity", "kappa", "epsilon", "grid", "algorithm", "policy", "trial", "seed",
              "lifetime", "upper_bound", "verifier_pass", "max_hole_diameter", "runtime_ms"]
AGG_HEADER = ["intensity", "kappa", "epsilon", "grid", "algorithm", "policy", "trials",
              "mean_lifetime", "mean_upper_bound", "pass_rate", "max_hole_diameter"]
KEY_FIELDS = ["intensity", "kappa", "epsilon", "grid", "algorithm", "policy"]


@dataclass
class ExperimentConfig:
    L: float = 30.0
    intensity: list = field(default_factory=lambda: [2.0])
    kappa: list = field(default_factory=lambda: [10.0])
    epsilon: list = field(default_factory=lambda: [0.0, 0.1, 0.2, 0.3])
    algorithms: list = field(default_factory=lambda: ["minmax", "bfs", "lp"])
    policies: list = field(default_factory=lambda: ["nonuniform"])
    grids: list = field(default_factory=lambda: ["square"])
    trials: int = 20
    base_seed: int = 0
    granularity: float = 2.0
    decay: float = 1.0
    max_load: int = 2
    cell_size: float = 0.1
    strip_mode: str = "relative"
    seeds_mode: str = "hops"
    seeds_k: int | None = None
    hop_limit: int | None = None
    lp_method: str = "auto"
    workers: int = 1
    record_runtime: bool = False

    def __post_init__(self):
        for name in ("intensity", "kappa", "epsilon", "algorithms", "policies", "grids"):
            v = getattr(self, name)
            if not isinstance(v, (list, tuple)):
                v = [v]
            if not v:
                raise ValueError(f"{name} must be a nonempty list")
            setattr(self, name, list(v))
        if int(self.trials) != self.trials or self.trials < 1:
            raise ValueError("trials must be a positive integer")
        self.trials = int(self.trials)
        if self.L <= 0 or self.cell_size <= 0 or self.granularity <= 0:
            raise ValueError("L, cell_size and granularity must be positive")
        bad = set(self.algorithms) - {"minmax", "bfs", "lp", "random_seeds"}
        if bad:
            raise ValueError(f"unknown algorithms {sorted(bad)}")
        bad = set(self.policies) - {"uniform", "nonuniform", "nonpreemptive"}
        if bad:
            raise ValueError(f"unknown policies {sorted(bad)}")
        bad = set(self.grids) - {"square", "hexagonal"}
        if bad:
            raise ValueError(f"unknown grids {sorted(bad)}")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown config keys {sorted(extra)}")
        return cls(**d)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        text = Path(path).read_text()
        data = json.loads(text) if str(path).endswith(".json") else yaml.safe_load(text)
        return cls.from_dict(data or {})


@dataclass
class SweepRow:
    intensity: float
    kappa: float
    epsilon: float
    grid: str
    algorithm: str
    policy: str
    trial: int
    seed: int
    lifetime: float
    upper_bound: float
    verifier_pass: bool
    max_hole_diameter: float
    runtime_ms: float | None = None
    error: str = ""

    def csv_cells(self) -> list:
        return [_fmt(self.intensity), _fmt(self.kappa), _fmt(self.epsilon), self.grid, self.algorithm,
                self.policy, self.trial, self.seed, _fmt(self.lifetime), _fmt(self.upper_bound),
                "true" if self.verifier_pass else "false", _fmt(self.max_hole_diameter),
                "" if self.runtime_ms is None else f"{self.runtime_ms:.1f}"]


def _fmt(x) -> str:
    return f"{float(x):.12g}"


def trial_seed(base_seed: int, L: float, intensity: float, trial: int) -> int:
    """Field seed shared by every algorithm/policy/epsilon at one (L, intensity, trial)."""
    h = hashlib.blake2b(f"{base_seed}|{float(L)!r}|{float(intensity)!r}|{trial}".encode(), digest_size=8)
    return int.from_bytes(h.digest(), "big") >> 1


def combinations(cfg: ExperimentConfig) -> list:
    """Valid (kappa, epsilon, grid, algorithm, policy) tuples in deterministic order."""
    out = []
    for kappa, eps, grid, alg, pol in itertools.product(cfg.kappa, cfg.epsilon, cfg.grids,
                                                        cfg.algorithms, cfg.policies):
        if alg == "lp" and (grid != "square" or pol != "nonuniform"):
            continue
        if alg == "random_seeds":
            if pol != "nonuniform":
                continue
            grid = "none"
        if (kappa, eps, grid, alg, pol) not in out:
            out.append((kappa, eps, grid, alg, pol))
    return out


def _trial_job(args):
    cfg, intensity, trial = args
    seed = trial_seed(cfg.base_seed, cfg.L, intensity, trial)
    field0 = generate_field(cfg.L, intensity, seed)
    depth = region_depth(field0).d_R
    rows = []
    families = {}
    for kappa, eps, grid, alg, pol in combinations(cfg):
        t0 = time.perf_counter()
        ub = float(kappa * depth)
        try:
            if alg == "random_seeds":
                res = random_seeds_lifetime(field0, kappa, seed, k=cfg.seeds_k, epsilon=eps, d=cfg.decay,
                                            hop_limit=cfg.hop_limit, mode=cfg.seeds_mode,
                                            cell_size=cfg.cell_size)
                w = 0.0
            else:
                w = strip_half_width(eps, kappa, cfg.strip_mode)
                key = (grid, kappa, w)
                if key not in families:
                    families[key] = shift_family(grid, cfg.L, kappa, effective_granularity(cfg.granularity, w))
                res = grid_based_lifetime(field0, families[key], alg, pol,
                                          {"m": cfg.max_load, "d": cfg.decay, "lp_method": cfg.lp_method},
                                          strip_half_width=w, epsilon=eps)
            ok, dmax = True, 0.0
            seen = {}
            for e in res.entries:
                ids = e.cover.sensor_ids
                if ids not in seen:
                    seen[ids] = verify_kappa_weak(field0, ids, kappa, eps, cfg.cell_size)
                rep = seen[ids]
                ok &= rep.passed
                dmax = max(dmax, rep.max_diameter)
            life, err = res.lifetime, ""
        except Exception as exc:          # recorded in the row, never aborts the sweep
            life, ok, dmax, err = float("nan"), False, float("nan"), f"{type(exc).__name__}: {exc}"
        ms = (time.perf_counter() - t0) * 1000 if cfg.record_runtime else None
        rows.append(SweepRow(intensity, kappa, eps, grid, alg, pol, trial, seed, life, ub, bool(ok),
                             dmax, ms, err))
    return rows


def run_sweep(cfg: ExperimentConfig):
    """All rows (sorted by coordinates, then trial) and per-coordinate aggregates."""
    jobs = [(cfg, lam, t) for lam in cfg.intensity for t in range(cfg.trials)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as ex:
            parts = list(ex.map(_trial_job, jobs))
    else:
        parts = [_trial_job(j) for j in jobs]
    order = {c: i for i, c in enumerate(combinations(cfg))}
    rows = [r for p in parts for r in p]
    rows.sort(key=lambda r: (cfg.intensity.index(r.intensity),
                             order[(r.kappa, r.epsilon, r.grid, r.algorithm, r.policy)], r.trial))
    return rows, aggregate(rows)


def aggregate(rows) -> list:
    groups: dict = {}
    for r in rows:
        groups.setdefault(tuple(getattr(r, k) for k in KEY_FIELDS), []).append(r)
    out = []
    for key, rs in groups.items():
        out.append({**dict(zip(KEY_FIELDS, key)), "trials": len(rs),
                    "mean_lifetime": float(np.mean([r.lifetime for r in rs])),
                    "mean_upper_bound": float(np.mean([r.upper_bound for r in rs])),
                    "pass_rate": float(np.mean([r.verifier_pass for r in rs])),
                    "max_hole_diameter": float(max(r.max_hole_diameter for r in rs))})
    return out


def rows_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ROW_HEADER)
    for r in rows:
        w.writerow(r.csv_cells())
    return buf.getvalue()


def aggregates_csv(aggs) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(AGG_HEADER)
    for a in aggs:
        w.writerow([_fmt(a["intensity"]), _fmt(a["kappa"]), _fmt(a["epsilon"]), a["grid"], a["algorithm"],
                    a["policy"], a["trials"], _fmt(a["mean_lifetime"]), _fmt(a["mean_upper_bound"]),
                    _fmt(a["pass_rate"]), _fmt(a["max_hole_diameter"])])
    return buf.getvalue()


def read_rows(path_or_text) -> list:
    text = path_or_text if "\n" in str(path_or_text) else Path(path_or_text).read_text()
    out = []
    for d in csv.DictReader(io.StringIO(text)):
        out.append(SweepRow(float(d["intensity"]), float(d["kappa"]), float(d["epsilon"]), d["grid"],
                            d["algorithm"], d["policy"], int(d["trial"]), int(d["seed"]),
                            float(d["lifetime"]), float(d["upper_bound"]), d["verifier_pass"] == "true",
                            float(d["max_hole_diameter"]),
                            float(d["runtime_ms"]) if d["runtime_ms"] else None))
    return out


def config_dict(cfg: ExperimentConfig) -> dict:
    return asdict(cfg)
