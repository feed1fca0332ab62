"""Shifted-grid decomposition into L x L blocks and the best-of-shifts combiner."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

from .geom import TOL
from .instance import Infeasible, Instance, Solution, is_cover, weight_of


@dataclass(frozen=True)
class Block:
    index: tuple[int, int]
    box: tuple[float, float, float, float]  # x0, y0, x1, y1; half-open on the top/right
    point_idx: tuple[int, ...]
    disk_ids: tuple[int, ...]


@dataclass(frozen=True)
class BlockDecomposition:
    L: int
    shift: int
    blocks: tuple[Block, ...]


BlockSolver = Callable[[Instance], Solution]


def _box_dist(p, box) -> float:
    x0, y0, x1, y1 = box
    dx = max(x0 - p[0], 0.0, p[0] - x1)
    dy = max(y0 - p[1], 0.0, p[1] - y1)
    return math.hypot(dx, dy)


def decompose(instance: Instance, L: int, shift: int) -> BlockDecomposition:
    if int(L) != L or L < 3:
        raise ValueError("L must be an integer >= 3")
    L = int(L)
    shift = int(shift) % L
    groups: dict[tuple[int, int], list[int]] = {}
    for k, p in enumerate(instance.points):
        key = (math.floor((p.x - shift) / L), math.floor((p.y - shift) / L))
        groups.setdefault(key, []).append(k)
    blocks = []
    for key in sorted(groups):
        x0, y0 = key[0] * L + shift, key[1] * L + shift
        box = (float(x0), float(y0), float(x0 + L), float(y0 + L))
        cands = tuple(d.id for d in instance.disks if _box_dist(d.center, box) <= 1.0 + TOL)
        blocks.append(Block(key, box, tuple(groups[key]), cands))
    return BlockDecomposition(L, shift, tuple(blocks))


def solve_shift(instance: Instance, L: int, shift: int, block_solver: BlockSolver,
                threads: int = 1) -> Solution:
    dec = decompose(instance, L, shift)
    subs = []
    for b in dec.blocks:
        sub = instance.restrict(b.point_idx, b.disk_ids)
        meta = dict(sub.meta)
        meta["block"] = ",".join(repr(v) for v in b.box)
        subs.append(Instance(sub.disks, sub.points, meta))
    if threads > 1 and len(subs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            sols = list(pool.map(block_solver, subs))
    else:
        sols = [block_solver(s) for s in subs]
    ids: set[int] = set()
    trace: dict[int, str] = {}
    for sol in sols:  # already in block-index order
        for i in sorted(sol.disk_ids):
            if i not in ids:
                ids.add(i)
                trace[i] = sol.trace.get(i, "BASELINE")
    if not is_cover(instance, ids):
        raise AssertionError(f"shift {shift}: combined block solutions do not cover the instance")
    return Solution(frozenset(ids), weight_of(instance, ids), {i: trace[i] for i in sorted(ids)})


def shifted_solve(instance: Instance, L: int, block_solver: BlockSolver, threads: int = 1) -> Solution:
    """Minimum-weight union of per-block solutions over the L diagonal shifts."""
    best: Solution | None = None
    last_err: Exception | None = None
    for shift in range(int(L)):
        try:
            sol = solve_shift(instance, L, shift, block_solver, threads)
        except Infeasible as exc:
            last_err = exc
            continue
        if best is None or sol.total_weight < best.total_weight:
            best = sol
    if best is None:
        raise Infeasible(f"every shift has an infeasible block: {last_err}")
    return best
