"""Per-block solver: small-cover enumeration plus guess, helper set and DP."""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .baselines import CoverageMatrix, price_lower_bound
from .dp import (
    DEFAULT_STATE_BUDGET, InfeasibleAssembly, NoFeasiblePath, StateBudgetExceeded, StuckState,
    assemble_block_solution, solve_component,
)
from .geom import Disk, Point
from .hbuilder import CycleDetected, HConfig, init_state, run_pipeline
from .instance import GUESS, Infeasible, Instance, Solution, is_cover, weight_of

MAX_C = 6


@dataclass(frozen=True)
class BlockConfig:
    eps: float = 1.0
    C: int = 3
    mu: float | None = None
    angle_cap: float | None = None
    node_budget: int = 10**7  # subsets tried by the small-cover enumeration
    state_budget: int = DEFAULT_STATE_BUDGET  # DP states per component
    c0: float = 1.0

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be > 0")
        if not 1 <= self.C <= MAX_C:
            raise ValueError(f"C must be in 1..{MAX_C}")
        if self.mu is not None and not self.mu > 0:
            raise ValueError("mu must be > 0")


@dataclass
class BlockReport:
    stage: str = ""
    guesses: int = 0
    evaluated: int = 0
    pruned: int = 0
    skipped: Counter = field(default_factory=Counter)
    helper_size: int = 0
    ledger_total: int = 0
    ledger_counts: dict = field(default_factory=dict)
    invariant_stats: Counter = field(default_factory=Counter)


@dataclass(frozen=True)
class Guess:
    ids: tuple[int, ...]
    w_t: float
    pool: tuple[int, ...]


def candidate_guesses(disks: Sequence[Disk], C: int) -> Iterator[Guess]:
    """All size-``C`` subsets in lexicographic id order, with the weight-pruned pool."""
    ds = sorted(disks, key=lambda d: d.id)
    for combo in itertools.combinations(ds, C):
        w_t = min(d.weight for d in combo)
        chosen = {d.id for d in combo}
        pool = tuple(d.id for d in ds if d.id not in chosen and d.weight <= w_t)
        yield Guess(tuple(d.id for d in combo), w_t, pool)


def block_box(instance: Instance) -> tuple[Point, float]:
    raw = instance.meta.get("block")
    if raw:
        x0, y0, x1, y1 = (float(v) for v in raw.split(","))
        return Point(x0, y0), max(x1 - x0, y1 - y0)
    if not instance.points:
        return Point(0.0, 0.0), 1.0
    xs = [p.x for p in instance.points]
    ys = [p.y for p in instance.points]
    side = max(max(xs) - min(xs), max(ys) - min(ys), 1e-9)
    return Point(math.floor(min(xs)), math.floor(min(ys))), float(math.ceil(side) + 1)


def small_cover(instance: Instance, C: int, budget: int = 10**7) -> Solution | None:
    """Minimum-weight cover using at most ``C`` disks, or None."""
    cov = CoverageMatrix.build(instance)
    full = (1 << instance.m) - 1
    ids = cov.disk_ids
    order = sorted(range(len(ids)), key=lambda j: ids[j])
    best: tuple[float, tuple[int, ...]] | None = None
    tried = 0
    for r in range(0, C + 1):
        for combo in itertools.combinations(order, r):
            tried += 1
            if tried > budget:
                raise Infeasible(f"small-cover budget {budget} exhausted")
            m = 0
            for j in combo:
                m |= cov.disk_masks[j]
            if m & full != full:
                continue
            chosen = tuple(sorted(ids[j] for j in combo))
            w = weight_of(instance, chosen)
            if best is None or (w, chosen) < best:
                best = (w, chosen)
    if best is None:
        return None
    return Solution.build(instance, best[1], default=GUESS)


def evaluate_guess(instance: Instance, guess: Guess, config: BlockConfig,
                   report: BlockReport | None = None) -> Solution:
    """Guess plus helper set plus DP for one candidate; raises on a failed candidate."""
    table = instance.by_id()
    gids = set(guess.ids)
    gcent = [table[i].center for i in guess.ids]
    rem = [p for p in instance.points
           if not any((p.x - c.x) ** 2 + (p.y - c.y) ** 2 <= (1.0 + 1e-9) ** 2 for c in gcent)]
    pool = [table[i] for i in guess.pool
            if any((p.x - table[i].center.x) ** 2 + (p.y - table[i].center.y) ** 2 <= (1.0 + 1e-9) ** 2
                   for p in rem)]
    if not rem:
        return assemble_block_solution(instance, gids, (), ())
    origin, L = block_box(instance)
    hc = HConfig(config.eps, config.c0, config.angle_cap, config.mu)
    st = init_state(pool, rem, origin, L, hc)
    run_pipeline(st)
    dp_disks: set[int] = set()
    by = {s.id: s for s in st.sts}
    for comp in st.graph.components():
        views = [by[s].view() for s in comp]
        req = 0
        for v in views:
            req |= v.covered_points()
        res = solve_component(views, req, budget=config.state_budget)
        dp_disks |= res.disks
    if report is not None:
        report.helper_size = len(st.H)
        report.ledger_total = st.ledger.total
        report.ledger_counts = st.ledger.counts()
        report.invariant_stats.update(st.stats)
    return assemble_block_solution(instance, gids, st.H, dp_disks, cut=st.cut_ids, gadget=st.gadget_ids)


def solve_block(instance: Instance, config: BlockConfig = BlockConfig(),
                report: BlockReport | None = None) -> Solution:
    """Best of the small-cover enumeration and every guess candidate."""
    report = report if report is not None else BlockReport()
    if not instance.points:
        report.stage = "empty"
        return Solution(frozenset(), 0.0, {})
    cov = CoverageMatrix.build(instance)
    if cov.uncoverable():
        raise Infeasible(f"points {cov.uncoverable()} are not covered by any disk")
    best: tuple | None = None  # (weight, stage rank, guess rank, solution)
    small = small_cover(instance, config.C, config.node_budget)
    if small is not None:
        best = (small.total_weight, 0, 0, small)
        report.stage = "a"
    if instance.n > config.C:
        ids = cov.disk_ids
        col = {d: j for j, d in enumerate(ids)}
        weights = [instance.disk(i).weight for i in ids]
        full = (1 << instance.m) - 1
        cands = []
        for rank, g in enumerate(candidate_guesses(instance.disks, config.C)):
            report.guesses += 1
            gm = 0
            for i in g.ids:
                gm |= cov.disk_masks[col[i]]
            allowed = 0
            for i in g.pool:
                allowed |= 1 << col[i]
            lb = price_lower_bound(cov, weights, full & ~gm, allowed)
            if math.isinf(lb):
                report.skipped["infeasible"] += 1
                continue
            wg = weight_of(instance, g.ids)
            cands.append((wg + lb, rank, g))
        cands.sort(key=lambda c: (c[0], c[1]))
        for key, rank, g in cands:
            # value >= key, so a candidate whose bound exceeds the incumbent cannot win
            if best is not None and key > best[0] + 1e-12 * max(1.0, best[0]):
                report.pruned += 1
                continue
            report.evaluated += 1
            sub = BlockReport()
            try:
                sol = evaluate_guess(instance, g, config, sub)
            except CycleDetected:
                report.skipped["cycle"] += 1
                continue
            except NoFeasiblePath:
                report.skipped["no_path"] += 1
                continue
            except StuckState:
                report.skipped["stuck"] += 1
                continue
            except StateBudgetExceeded:
                report.skipped["state_budget"] += 1
                continue
            except InfeasibleAssembly:
                report.skipped["assembly"] += 1
                continue
            report.invariant_stats.update(sub.invariant_stats)
            cand = (sol.total_weight, 1, rank, sol)
            if best is None or cand[:3] < best[:3]:
                best = cand
                report.stage = "b"
                report.helper_size = sub.helper_size
                report.ledger_total = sub.ledger_total
                report.ledger_counts = sub.ledger_counts
    if best is None:
        raise Infeasible("no candidate produced a feasible cover")
    sol = best[3]
    if not is_cover(instance, sol.disk_ids):
        raise InfeasibleAssembly("block solution does not cover the block")
    return sol
