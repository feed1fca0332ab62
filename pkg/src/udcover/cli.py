"""Command-line interface: gen, solve, verify, render, benchmark.

Exit codes: 0 ok, 2 usage, 3 infeasible, 4 verification failure, 5 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
import time
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import instance as inst_mod
from .baselines import BudgetExceeded, exact_solve, greedy_solve
from .blocksolver import BlockConfig, BlockReport, block_box, solve_block
from .dp import InfeasibleAssembly
from .geom import Point, dist
from .instance import GUESS, Infeasible, Instance, ParseError, Solution, ValidationError
from .shifting import decompose, shifted_solve

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_VERIFY, EXIT_INVARIANT = 0, 2, 3, 4, 5
ALGOS = ("exact", "greedy", "ptas")


@dataclass
class RunReport:
    instance_digest: str
    algorithm: str
    params: dict
    weight: float
    disk_ids: list[int]
    ratio: float | None = None
    wall_time: float | None = None
    ledger: dict = field(default_factory=dict)
    invariants: dict = field(default_factory=dict)

    def to_json(self) -> str:
        data = {
            "instance_digest": self.instance_digest,
            "algorithm": self.algorithm,
            "params": self.params,
            "weight": self.weight,
            "disk_ids": self.disk_ids,
            "ledger": self.ledger,
            "invariants": self.invariants,
        }
        if self.ratio is not None:
            data["ratio"] = self.ratio
        if self.wall_time is not None:
            data["wall_time"] = self.wall_time
        return json.dumps(data, sort_keys=True)


def digest(instance: Instance) -> str:
    return hashlib.sha256(inst_mod.dumps(instance).encode()).hexdigest()[:16]


def solution_text(sol: Solution) -> str:
    return json.dumps(sol.to_json(), indent=1) + "\n"


def load_solution(path: str | Path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"solution line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict) or not isinstance(data.get("disk_ids"), list):
        raise ParseError("solution must be an object with a 'disk_ids' array")
    return data


# ---------------------------------------------------------------- solving

def run_solver(instance: Instance, algo: str, eps: float = 1.0, C: int = 3, L: int = 6,
               budget: int = 10**7, threads: int = 1) -> tuple[Solution, dict]:
    """Solve with one algorithm; returns the solution and aggregated block statistics."""
    info: dict = {}
    if algo == "exact":
        return exact_solve(instance, node_budget=budget), info
    if algo == "greedy":
        return greedy_solve(instance), info
    if algo != "ptas":
        raise ValueError(f"unknown algorithm {algo!r}")
    cfg = BlockConfig(eps=eps, C=C, node_budget=budget)
    reports: list[BlockReport] = []

    def block_solver(sub: Instance) -> Solution:
        r = BlockReport()
        sol = solve_block(sub, cfg, r)
        reports.append(r)
        return sol

    sol = shifted_solve(instance, L, block_solver, threads=threads)
    stages: Counter = Counter(r.stage for r in reports)
    skipped: Counter = Counter()
    stats: Counter = Counter()
    for r in reports:
        skipped.update(r.skipped)
        stats.update(r.invariant_stats)
    info = {
        "blocks_solved": len(reports),
        "stages": dict(sorted(stages.items())),
        "guesses_evaluated": sum(r.evaluated for r in reports),
        "guesses_pruned": sum(r.pruned for r in reports),
        "skipped": dict(sorted(skipped.items())),
        "ledger_max": max((r.ledger_total for r in reports), default=0),
        "helper_max": max((r.helper_size for r in reports), default=0),
        "stats": dict(sorted(stats.items())),
    }
    return sol, info


# ---------------------------------------------------------------- commands

def cmd_gen(args) -> int:
    seed = int(os.environ.get("UDC_SEED", args.seed))
    try:
        inst = inst_mod.generate(args.n, args.m, args.side, seed, args.weights)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    inst_mod.save(inst, args.output)
    return EXIT_OK


def cmd_solve(args) -> int:
    instance = inst_mod.load(args.instance)
    t0 = time.perf_counter()
    try:
        sol, info = run_solver(instance, args.algo, args.eps, args.C, args.L, int(args.budget), args.threads)
    except Infeasible as exc:
        print(json.dumps({"error": "infeasible", "detail": str(exc)}, sort_keys=True))
        return EXIT_INFEASIBLE
    except BudgetExceeded as exc:
        print(json.dumps({"error": "budget", "detail": str(exc)}, sort_keys=True))
        return EXIT_INFEASIBLE
    except (InfeasibleAssembly, AssertionError) as exc:
        print(json.dumps({"error": "invariant", "detail": str(exc)}, sort_keys=True))
        return EXIT_INVARIANT
    elapsed = time.perf_counter() - t0
    ratio = None
    if args.oracle:
        ref = exact_solve(instance, node_budget=int(args.budget))
        ratio = sol.total_weight / ref.total_weight if ref.total_weight > 0 else 1.0
    params = {"algo": args.algo}
    if args.algo == "ptas":
        params.update({"eps": args.eps, "C": args.C, "L": args.L})
    report = RunReport(
        digest(instance), args.algo, params, sol.total_weight, sorted(sol.disk_ids), ratio,
        round(elapsed, 6) if args.timing else None,
        {k: info[k] for k in ("ledger_max", "helper_max") if k in info},
        {k: v for k, v in info.items() if k not in ("ledger_max", "helper_max")},
    )
    if args.output:
        Path(args.output).write_text(solution_text(sol))
    print(report.to_json())
    return EXIT_OK


def cmd_verify(args) -> int:
    instance = inst_mod.load(args.instance)
    data = load_solution(args.solution)
    ids = [int(i) for i in data["disk_ids"]]
    table = instance.by_id()
    unknown = sorted(i for i in ids if i not in table)
    if unknown:
        print(json.dumps({"ok": False, "unknown_disks": unknown}, sort_keys=True))
        return EXIT_VERIFY
    miss = inst_mod.uncovered_points(instance, ids)
    if miss:
        pts = [{"index": k, "x": instance.points[k].x, "y": instance.points[k].y} for k in miss]
        print(json.dumps({"ok": False, "uncovered": pts}, sort_keys=True))
        return EXIT_VERIFY
    result = {"ok": True, "weight": inst_mod.weight_of(instance, ids)}
    if args.deep:
        violations = deep_check(instance, data, args.eps, args.L)
        result["deep"] = violations
        if any(v for v in violations.values()):
            result["ok"] = False
            print(json.dumps(result, sort_keys=True))
            return EXIT_INVARIANT
    print(json.dumps(result, sort_keys=True))
    return EXIT_OK


def deep_check(instance: Instance, solution: dict, eps: float, L: int) -> dict:
    """Replay the helper-set pipeline per block of the zero shift and collect violations.

    Disks traced as guesses act as the guess; without a trace the guess is empty.
    """
    from .hbuilder import HConfig, check_properties, init_state, run_pipeline

    trace = {int(k): v for k, v in solution.get("trace", {}).items()}
    guess = {i for i, tag in trace.items() if tag == GUESS}
    table = instance.by_id()
    out: dict = {}
    for b in decompose(instance, L, 0).blocks:
        sub = instance.restrict(b.point_idx, b.disk_ids)
        g = [table[i] for i in sorted(guess) if i in b.disk_ids]
        w_t = min((d.weight for d in g), default=float("inf"))
        rem = [p for p in sub.points if not any(dist(d.center, p) <= 1.0 + 1e-9 for d in g)]
        pool = [d for d in sub.disks if d.id not in guess and d.weight <= w_t
                and any(dist(d.center, p) <= 1.0 + 1e-9 for p in rem)]
        st = init_state(pool, rem, Point(b.box[0], b.box[1]), float(L), HConfig(eps))
        try:
            run_pipeline(st)
        except Exception as exc:  # report, do not crash the verifier
            out[f"block{b.index}"] = {"error": type(exc).__name__}
            continue
        v = check_properties(st)
        if v:
            out[f"block{b.index}"] = v
    return out


def cmd_render(args) -> int:
    from .render import render_svg

    instance = inst_mod.load(args.instance)
    chosen: list[int] = []
    if args.solution:
        chosen = [int(i) for i in load_solution(args.solution)["disk_ids"]]
    helper: set[int] = set()
    baselines, envelopes, regions = [], [], []
    if args.helper and instance.disks:
        from .hbuilder import HConfig, init_state, run_pipeline
        from .substructures import baseline_polylines, envelope_polylines, region_polygon

        origin, side = block_box(instance)
        st = init_state(list(instance.disks), list(instance.points), origin, side, HConfig(args.eps))
        run_pipeline(st)
        helper = set(st.H)
        baselines = baseline_polylines(st.sts, st.ctx)
        envelopes = envelope_polylines(st.sts)
        keys = set().union(*st.region_arcs.values()) if st.region_arcs else set()
        regions = [region_polygon(a, st.ctx) for a in sorted(st.arcs, key=lambda a: a.key) if a.key in keys]
    svg = render_svg(instance, chosen, helper, baselines, title=Path(args.instance).name,
                     regions=regions, envelopes=envelopes)
    Path(args.output).write_text(svg)
    return EXIT_OK


def cmd_benchmark(args) -> int:
    algos = [a for a in args.algos.split(",") if a]
    bad = [a for a in algos if a not in ALGOS]
    if bad:
        print(f"error: unknown algorithms {bad}", file=sys.stderr)
        return EXIT_USAGE
    seed0 = int(os.environ.get("UDC_SEED", args.seed))
    rows = []
    seed = seed0
    while len({r["seed"] for r in rows}) < args.count and seed < seed0 + 100 * args.count:
        instance = inst_mod.generate(args.n, args.m, args.side, seed, args.weights)
        seed += 1
        if instance.meta.get("feasible") != "true":
            continue
        ref = exact_solve(instance)
        for algo in algos:
            t0 = time.perf_counter()
            sol, _ = run_solver(instance, algo, args.eps, args.C, args.L)
            dt = time.perf_counter() - t0
            row = {
                "seed": seed - 1, "n": instance.n, "m": instance.m, "algo": algo,
                "weight": sol.total_weight, "exact": ref.total_weight,
                "ratio": sol.total_weight / ref.total_weight if ref.total_weight else 1.0,
            }
            if args.timing:
                row["seconds"] = round(dt, 6)
            rows.append(row)
    with open(args.output, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]) if rows else ["seed"], delimiter=args.delimiter)
        w.writeheader()
        w.writerows(rows)
    for algo in algos:
        rs = [r["ratio"] for r in rows if r["algo"] == algo]
        if rs:
            print(f"{algo}\tinstances={len(rs)}\tmax_ratio={max(rs):.4f}\tmean_ratio={sum(rs) / len(rs):.4f}")
    if args.plot_dir:
        from .report import plot_benchmark

        for p in plot_benchmark(rows, args.plot_dir):
            print(f"figure\t{p}")
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="udcover", description="Weighted unit disk cover tools.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a random instance")
    g.add_argument("--n", type=int, required=True, help="number of disks")
    g.add_argument("--m", type=int, required=True, help="number of points")
    g.add_argument("--side", type=float, default=3.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--weights", default="uniform:1:10")
    g.add_argument("-o", "--output", required=True)
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="solve an instance")
    s.add_argument("instance")
    s.add_argument("--algo", choices=ALGOS, default="ptas")
    s.add_argument("--eps", type=float, default=1.0)
    s.add_argument("--C", type=int, default=3)
    s.add_argument("--L", type=int, default=6)
    s.add_argument("--budget", type=float, default=1e7)
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--oracle", action="store_true", help="also run the exact solver and report the ratio")
    s.add_argument("--timing", action="store_true", help="include wall time (breaks byte-identical reports)")
    s.add_argument("-o", "--output", help="solution file")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="check a solution")
    v.add_argument("instance")
    v.add_argument("solution")
    v.add_argument("--deep", action="store_true", help="replay the helper-set pipeline and check invariants")
    v.add_argument("--eps", type=float, default=1.0)
    v.add_argument("--L", type=int, default=6)
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("render", help="draw an instance as SVG")
    r.add_argument("instance")
    r.add_argument("--solution")
    r.add_argument("--helper", action="store_true", help="draw the helper set and baselines")
    r.add_argument("--eps", type=float, default=1.0)
    r.add_argument("-o", "--output", required=True)
    r.set_defaults(func=cmd_render)

    b = sub.add_parser("benchmark", help="compare algorithms on generated instances")
    b.add_argument("--count", type=int, default=20)
    b.add_argument("--n", type=int, default=12)
    b.add_argument("--m", type=int, default=20)
    b.add_argument("--side", type=float, default=3.0)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--weights", default="uniform:1:10")
    b.add_argument("--algos", default="ptas,greedy")
    b.add_argument("--eps", type=float, default=1.0)
    b.add_argument("--C", type=int, default=3)
    b.add_argument("--L", type=int, default=6)
    b.add_argument("--delimiter", default=",")
    b.add_argument("--timing", action="store_true", help="add a seconds column (breaks byte-identical output)")
    b.add_argument("--plot-dir", help="write matplotlib figures here")
    b.add_argument("-o", "--output", required=True)
    b.set_defaults(func=cmd_benchmark)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "C", 1) < 1 or getattr(args, "eps", 1.0) <= 0:
            parser.error("--C must be >= 1 and --eps > 0")
        return args.func(args)
    except (ParseError, ValidationError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
