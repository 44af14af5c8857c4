"""Command line entry point: ``kweak <subcommand> ...``.

Exit codes: 0 success, 1 verification failure, 2 bad input.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .barrier import Cover, bfs_cover, minmax_cover, strip_half_width
from .field import SensorField, generate_field, lifetime_upper_bound
from .grids import Grid, effective_granularity, shift_family, tiling_edge_length, total_edge_length
from .harness import ExperimentConfig, aggregate, aggregates_csv, read_rows, rows_csv, run_sweep
from .scheduling import grid_based_lifetime, load_schedule
from .verification import DEFAULT_CELL_SIZE, verify_kappa_weak

EXIT_OK, EXIT_FAIL, EXIT_BAD_INPUT = 0, 1, 2


class BadInput(Exception):
    pass


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _cfg(args) -> ExperimentConfig:
    if getattr(args, "config", None):
        try:
            return ExperimentConfig.load(args.config)
        except (OSError, ValueError, TypeError) as exc:
            raise BadInput(f"cannot read config {args.config}: {exc}") from exc
    return ExperimentConfig()


def _pick(value, default):
    return default if value is None else value


def _load_field(path) -> SensorField:
    try:
        return SensorField.load(path)
    except (OSError, ValueError, KeyError, IndexError) as exc:
        raise BadInput(f"cannot read field {path}: {exc}") from exc


def _grid_setup(args, cfg, L):
    kappa = _pick(args.kappa, cfg.kappa[0])
    eps = _pick(args.epsilon, cfg.epsilon[0])
    kind = _pick(args.kind, cfg.grids[0])
    g = _pick(args.granularity, cfg.granularity)
    w = strip_half_width(eps, kappa, cfg.strip_mode)
    try:
        fam = shift_family(kind, L, kappa, effective_granularity(g, w))
    except ValueError as exc:
        raise BadInput(str(exc)) from exc
    return kappa, eps, w, fam


def _add_grid_args(p):
    p.add_argument("--kind", choices=["square", "hexagonal"])
    p.add_argument("--kappa", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--granularity", type=float)


def cmd_gen_field(args) -> int:
    cfg = _cfg(args)
    L = _pick(args.L, cfg.L)
    lam = _pick(args.intensity, cfg.intensity[0])
    seed = _pick(args.seed, cfg.base_seed)
    if L <= 0 or lam < 0:
        raise BadInput("need L > 0 and intensity >= 0")
    f = generate_field(L, lam, seed)
    _emit(f.dumps(), args.out)
    print(f"{f.n} sensors in [0, {L:g}]^2 (seed {seed})", file=sys.stderr)
    return EXIT_OK


def cmd_grid(args) -> int:
    cfg = _cfg(args)
    L = _pick(args.L, cfg.L)
    kappa, eps, w, fam = _grid_setup(args, cfg, L)
    if args.all:
        if not args.out:
            raise BadInput("--all needs --out <directory>")
        d = Path(args.out)
        d.mkdir(parents=True, exist_ok=True)
        for i, g in enumerate(fam):
            g.save(d / f"grid_{i:03d}.txt")
    else:
        if not 0 <= args.index < len(fam):
            raise BadInput(f"grid index {args.index} outside family of {len(fam)}")
        _emit(fam[args.index].dumps(), args.out)
    g0 = fam[args.index if 0 <= args.index < len(fam) else 0]
    print(f"{len(fam)} grids; grid {args.index}: {len(g0)} segments, edge length "
          f"{total_edge_length(g0):.2f}, tile perimeter sum {tiling_edge_length(g0):.2f}", file=sys.stderr)
    return EXIT_OK


def cmd_cover(args) -> int:
    cfg = _cfg(args)
    f = _load_field(args.field)
    kappa, eps, w, fam = _grid_setup(args, cfg, f.L)
    if not 0 <= args.index < len(fam):
        raise BadInput(f"grid index {args.index} outside family of {len(fam)}")
    grid = fam[args.index]
    lines = []
    if args.algorithm == "bfs":
        res = bfs_cover(f, grid, w, epsilon=eps, grid_index=args.index)
        covers = [res[0]] if res else []
    elif args.algorithm == "minmax":
        res = minmax_cover(f, grid, w, epsilon=eps, grid_index=args.index)
        covers = [res] if res else []
    else:
        from .flow import build_flow_network, decompose_paths, flow_covers, to_standard_lp
        from .lp import solve_lp, write_lp_file
        if grid.kind != "square":
            raise BadInput("the LP algorithm needs a square grid")
        flp = to_standard_lp(build_flow_network(f, grid, w))
        if args.lp_dump:
            write_lp_file(flp.problem, args.lp_dump)
        sol = solve_lp(flp.problem)
        covers = [c for c, _ in flow_covers(decompose_paths(flp, sol), eps, args.index)] if sol.optimal else []
    for c in covers:
        lines.append(c.dump_line())
    _emit("".join(ln + "\n" for ln in lines), args.out)
    if not covers:
        print("no cover found", file=sys.stderr)
    status = EXIT_OK
    if args.verify:
        for c in covers:
            rep = verify_kappa_weak(f, c.sensor_ids, kappa, eps, args.cell_size)
            print(rep.to_json(), file=sys.stderr)
            if not rep.passed:
                status = EXIT_FAIL
    return status


def cmd_schedule(args) -> int:
    cfg = _cfg(args)
    f = _load_field(args.field)
    kappa, eps, w, fam = _grid_setup(args, cfg, f.L)
    alg = _pick(args.algorithm, cfg.algorithms[0])
    pol = _pick(args.policy, cfg.policies[0])
    try:
        res = grid_based_lifetime(f, fam, alg, pol,
                                  {"m": _pick(args.m, cfg.max_load), "d": _pick(args.d, cfg.decay)},
                                  strip_half_width=w, epsilon=eps)
    except ValueError as exc:
        raise BadInput(str(exc)) from exc
    _emit(res.to_csv(), args.out)
    print(f"lifetime {res.lifetime:.6g} over {len(res)} entries; upper bound "
          f"{lifetime_upper_bound(f, kappa):.6g}", file=sys.stderr)
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = _cfg(args)
    f = _load_field(args.field)
    kappa = _pick(args.kappa, cfg.kappa[0])
    eps = _pick(args.epsilon, cfg.epsilon[0])
    cell = _pick(args.cell_size, cfg.cell_size)
    if cell > kappa / 20 + 1e-12:
        raise BadInput("cell size must be at most kappa / 20")
    try:
        if args.schedule:
            covers = [e.cover for e in load_schedule(Path(args.schedule)).entries]
        elif args.cover:
            covers = [Cover.parse_line(ln) for ln in Path(args.cover).read_text().splitlines() if ln.strip()]
        else:
            covers = [Cover(tuple(range(f.n)))]
    except (OSError, ValueError, KeyError, IndexError) as exc:
        raise BadInput(f"cannot read covers: {exc}") from exc
    for c in covers:
        if any(i < 0 or i >= f.n for i in c.sensor_ids):
            raise BadInput("cover references a sensor missing from the field")
    reports = []
    seen = {}
    for c in covers:
        if c.sensor_ids not in seen:
            seen[c.sensor_ids] = verify_kappa_weak(f, c.sensor_ids, kappa, eps, cell)
        reports.append(seen[c.sensor_ids].to_dict())
    _emit(json.dumps(reports if len(reports) != 1 else reports[0], sort_keys=True, indent=1) + "\n", args.out)
    return EXIT_OK if all(r["pass"] for r in reports) else EXIT_FAIL


def cmd_sweep(args) -> int:
    cfg = _cfg(args)
    if args.seed is not None:
        cfg.base_seed = args.seed
    if args.trials is not None:
        cfg.trials = args.trials
    rows, aggs = run_sweep(cfg)
    _emit(rows_csv(rows), args.out)
    if args.aggregates:
        Path(args.aggregates).write_text(aggregates_csv(aggs))
    bad = [r for r in rows if not r.verifier_pass]
    for r in rows:
        if r.error:
            print(f"row error ({r.algorithm}, trial {r.trial}): {r.error}", file=sys.stderr)
    return EXIT_FAIL if bad else EXIT_OK


def cmd_report(args) -> int:
    try:
        rows = read_rows(Path(args.input))
    except (OSError, ValueError, KeyError) as exc:
        raise BadInput(f"cannot read sweep CSV: {exc}") from exc
    _emit(aggregates_csv(aggregate(rows)), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML or JSON experiment config")
    common.add_argument("--seed", type=int)
    common.add_argument("--out")

    p = argparse.ArgumentParser(prog="kweak", description="Weak barrier coverage lifetime toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("gen-field", parents=[common], help="generate a Poisson sensor field")
    q.add_argument("--L", type=float)
    q.add_argument("--intensity", type=float)
    q.set_defaults(func=cmd_gen_field)

    q = sub.add_parser("grid", parents=[common], help="write a grid of a shift family")
    q.add_argument("--L", type=float)
    _add_grid_args(q)
    q.add_argument("--index", type=int, default=0)
    q.add_argument("--all", action="store_true", help="write every grid into the --out directory")
    q.set_defaults(func=cmd_grid)

    q = sub.add_parser("cover", parents=[common], help="find covers for one grid")
    q.add_argument("--field", required=True)
    _add_grid_args(q)
    q.add_argument("--index", type=int, default=0)
    q.add_argument("--algorithm", choices=["bfs", "minmax", "lp"], default="bfs")
    q.add_argument("--verify", action="store_true")
    q.add_argument("--cell-size", type=float, default=DEFAULT_CELL_SIZE)
    q.add_argument("--lp-dump", help="write the LP in CPLEX-LP format")
    q.set_defaults(func=cmd_cover)

    q = sub.add_parser("schedule", parents=[common], help="run the grid loop and write a schedule CSV")
    q.add_argument("--field", required=True)
    _add_grid_args(q)
    q.add_argument("--algorithm", choices=["bfs", "minmax", "lp"])
    q.add_argument("--policy", choices=["uniform", "nonuniform", "nonpreemptive"])
    q.add_argument("--m", type=int)
    q.add_argument("--d", type=float)
    q.set_defaults(func=cmd_schedule)

    q = sub.add_parser("verify", parents=[common], help="check covers for weak coverage")
    q.add_argument("--field", required=True)
    q.add_argument("--schedule")
    q.add_argument("--cover")
    q.add_argument("--kappa", type=float)
    q.add_argument("--epsilon", type=float)
    q.add_argument("--cell-size", type=float)
    q.set_defaults(func=cmd_verify)

    q = sub.add_parser("sweep", parents=[common], help="run a seeded experiment sweep")
    q.add_argument("--trials", type=int)
    q.add_argument("--aggregates", help="also write per-coordinate means here")
    q.set_defaults(func=cmd_sweep)

    q = sub.add_parser("report", parents=[common], help="aggregate a sweep CSV")
    q.add_argument("--input", "--in", dest="input", required=True)
    q.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except BadInput as exc:
        print(f"kweak: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
