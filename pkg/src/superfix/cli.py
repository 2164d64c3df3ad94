"""Command-line front end.

Subcommands: `simulate` (Monte Carlo fixation estimate), `exact` (linear
solve on the full occupancy chain), `restricted` (conditional-takeover
chain and its closed-form limits), `grid` (experiment grid with CSV,
json-lines, plot-data, and figure output).  Exit codes: 0 success, 1
runtime failure, 2 argument error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from fractions import Fraction

from .exactsolve import EXACT_CAP, FLOAT_CAP, exact_fixation_full
from .experiments import (
    ENGINES,
    ExperimentGrid,
    emit_plot_data,
    emit_table,
    estimate_fixation,
    parse_grid_file,
    row_to_csv,
    rows_to_csv,
    run_grid,
    CSV_HEADER,
)
from .graphs import SuperstarSpec, build_complete, build_star, build_superstar
from .restricted import (
    j_of_r,
    limit_h,
    solve_restricted,
    theorem_bound,
)


def parse_r(text: str) -> Fraction:
    """Fitness parses exactly: a decimal like `1.1` or a ratio `p/q`."""
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"bad fitness value {text!r}")
    if value <= 0:
        raise argparse.ArgumentTypeError("fitness must be positive")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _add_target_flags(sub: argparse.ArgumentParser) -> None:
    group = sub.add_mutually_exclusive_group(required=True)
    group.add_argument("--superstar", nargs=3, type=_positive_int,
                       metavar=("K", "LEAVES", "RESERVOIR"),
                       help="superstar parameters")
    group.add_argument("--complete", type=_positive_int, metavar="N",
                       help="complete graph on N vertices")
    group.add_argument("--star", type=_positive_int, metavar="N",
                       help="bidirectional star on N vertices")


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("MORAN_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise SystemExit2(f"MORAN_SEED must be an integer, got {env!r}")
    return 0


class SystemExit2(Exception):
    """Argument-level error discovered after parsing."""


def _build_graph(args):
    if args.superstar is not None:
        k, ell, m = args.superstar
        return build_superstar(SuperstarSpec(k=k, leaves=ell, reservoir=m))
    if args.complete is not None:
        return build_complete(args.complete)
    return build_star(args.star)


def _row_fields(args, est, r: Fraction, wall_s: float, seed: int) -> dict:
    if args.superstar is not None:
        k, ell, m = args.superstar
        ref = float(r) ** (-k)
    else:
        k = ell = m = ref = None
    return {
        "k": k, "r": float(r), "leaves": ell, "reservoir": m,
        "runs": est.trials, "fixations": est.fixations,
        "p_hat": est.p_hat, "ci_lo": est.ci.lo, "ci_hi": est.ci.hi,
        "extinction_hat": 1.0 - est.p_hat, "ref_r_pow_minus_k": ref,
        "engine": est.engine, "seed": seed, "wall_s": round(wall_s, 3),
    }


def _fields_to_csv(fields: dict) -> str:
    parts = []
    for name in CSV_HEADER.split(","):
        value = fields[name]
        parts.append("" if value is None else repr(value)
                     if isinstance(value, float) else str(value))
    return ",".join(parts)


def _write(text: str, path) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as handle:
            handle.write(text)


def cmd_simulate(args) -> int:
    seed = _resolve_seed(args)
    r = args.r
    if args.superstar is not None and args.engine in ("lumped", "leafskip"):
        k, ell, m = args.superstar
        target = SuperstarSpec(k=k, leaves=ell, reservoir=m)
    elif args.engine in ("lumped", "leafskip"):
        raise SystemExit2(f"engine {args.engine!r} needs --superstar")
    else:
        target = _build_graph(args)
    start = time.perf_counter()
    est = estimate_fixation(target, float(r), args.runs, seed,
                            engine=args.engine, confidence=args.confidence)
    fields = _row_fields(args, est, r, time.perf_counter() - start, seed)
    if args.format == "json-lines":
        _write(json.dumps(fields) + "\n", args.output)
    else:
        _write(CSV_HEADER + "\n" + _fields_to_csv(fields) + "\n",
               args.output)
    return 0


def cmd_exact(args) -> int:
    graph = _build_graph(args)
    if graph.n > FLOAT_CAP:
        raise SystemExit2(
            f"graph has {graph.n} vertices; the exact solver caps at "
            f"{EXACT_CAP} vertices (float mode at {FLOAT_CAP})")
    if graph.n <= EXACT_CAP:
        value = exact_fixation_full(graph, args.r, mode="exact")
        print(f"{value} ≈ {float(value):.12g}")
    else:
        value = exact_fixation_full(graph, float(args.r), mode="float")
        print(f"{value!r}")
    return 0


def cmd_restricted(args) -> int:
    r = args.r
    h = limit_h(r)
    j = j_of_r(r)
    if args.limit_only:
        print(f"h(r) = {h} ≈ {float(h):.12g}")
        print(f"j(r) = {j} ≈ {float(j):.12g}")
        return 0
    if args.L is None or args.M is None:
        raise SystemExit2("--L and --M are required unless --limit-only")
    q = solve_restricted(args.L, args.M, r)
    bound = theorem_bound(args.L, args.M, r)
    print(f"q(L={args.L}, M={args.M}, r={r}) = {q} ≈ {float(q):.12g}")
    print(f"h(r) = {h} ≈ {float(h):.12g}")
    print(f"j(r) = {j} ≈ {float(j):.12g}")
    print(f"fixation upper bound (leaves={args.L}, reservoir={args.M}) = "
          f"{bound} ≈ {float(bound):.12g}")
    print(f"gap h(r) - q = {h - q} ≈ {float(h - q):.12g}")
    return 0


def cmd_grid(args) -> int:
    seed = _resolve_seed(args)
    try:
        with open(args.grid_file) as handle:
            cells = parse_grid_file(handle.read())
    except OSError as exc:
        raise SystemExit2(f"cannot read grid file: {exc}")
    except ValueError as exc:
        raise SystemExit2(str(exc))
    grid = ExperimentGrid(cells=tuple(cells), engine=args.engine,
                          master_seed=seed, confidence=args.confidence)
    rows = run_grid(grid, threads=args.threads)
    os.makedirs(args.out_dir, exist_ok=True)
    with open(os.path.join(args.out_dir, "results.csv"), "w") as handle:
        handle.write(rows_to_csv(rows))
    with open(os.path.join(args.out_dir, "results.jsonl"), "w") as handle:
        names = CSV_HEADER.split(",")
        for row in rows:
            values = row_to_csv(row).split(",")
            record = dict(zip(names, values))
            record["error"] = row.error
            handle.write(json.dumps(record) + "\n")
    for k, text in emit_plot_data(rows).items():
        with open(os.path.join(args.out_dir,
                               f"plot_data_k{k}.csv"), "w") as handle:
            handle.write(text)
    if args.table:
        with open(os.path.join(args.out_dir, "table.txt"), "w") as handle:
            handle.write(emit_table(rows))
    if args.figures:
        from .plotting import render_extinction_figures
        render_extinction_figures(rows, args.out_dir)
    failed = [row for row in rows if row.error is not None]
    for row in failed:
        print(f"cell {row.cell} failed: {row.error}", file=sys.stderr)
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="superfix",
        description="Fixation probabilities of the Moran process on "
                    "superstar and other directed graphs.")
    subs = parser.add_subparsers(dest="command", required=True)

    sim = subs.add_parser("simulate", help="Monte Carlo fixation estimate")
    _add_target_flags(sim)
    sim.add_argument("--r", type=parse_r, required=True,
                     help="fitness, decimal or p/q")
    sim.add_argument("--runs", type=_positive_int, required=True)
    sim.add_argument("--seed", type=int, default=None,
                     help="master seed (falls back to MORAN_SEED, then 0)")
    sim.add_argument("--engine", choices=ENGINES, default="event")
    sim.add_argument("--confidence", type=float, default=0.995)
    sim.add_argument("--format", choices=("csv", "json-lines"),
                     default="csv")
    sim.add_argument("--output", default=None, help="file instead of stdout")
    sim.set_defaults(func=cmd_simulate)

    ex = subs.add_parser("exact", help="exact fixation probability")
    _add_target_flags(ex)
    ex.add_argument("--r", type=parse_r, required=True)
    ex.set_defaults(func=cmd_exact)

    res = subs.add_parser("restricted",
                          help="conditional-takeover chain for k=5")
    res.add_argument("--L", type=_positive_int, default=None,
                     help="number of leaves")
    res.add_argument("--M", type=_positive_int, default=None,
                     help="reservoir size per leaf")
    res.add_argument("--r", type=parse_r, required=True)
    res.add_argument("--limit-only", action="store_true",
                     help="print only the large-size limit quantities")
    res.set_defaults(func=cmd_restricted)

    grid = subs.add_parser("grid", help="run an experiment grid")
    grid.add_argument("--grid-file", required=True,
                      help="CSV of cells: k,leaves,reservoir,r,runs")
    grid.add_argument("--out-dir", required=True)
    grid.add_argument("--engine", choices=ENGINES, default="leafskip")
    grid.add_argument("--seed", type=int, default=None)
    grid.add_argument("--confidence", type=float, default=0.995)
    grid.add_argument("--threads", type=_positive_int, default=1)
    grid.add_argument("--table", action="store_true",
                      help="also write a rendered text table")
    grid.add_argument("--figures", action="store_true",
                      help="also render per-k extinction figures")
    grid.set_defaults(func=cmd_grid)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 0
    try:
        return args.func(args)
    except SystemExit2 as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure
        print(f"failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
