"""Exact branch-and-bound and greedy solvers for weighted unit disk cover."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geom import TOL
from .instance import BASELINE, Infeasible, Instance, Solution, weight_of

DEFAULT_NODE_BUDGET = 10**7


class BudgetExceeded(Exception):
    pass


@dataclass(frozen=True)
class CoverageMatrix:
    """Point-by-disk incidence, plus the same data as python bitmasks."""

    disk_ids: tuple[int, ...]
    bits: np.ndarray  # shape (m, n), bool
    disk_masks: tuple[int, ...]  # per disk column: bitmask over points
    point_masks: tuple[int, ...]  # per point row: bitmask over disk columns

    @staticmethod
    def build(instance: Instance, tol: float = TOL) -> "CoverageMatrix":
        ids = tuple(d.id for d in instance.disks)
        m, n = instance.m, instance.n
        if m and n:
            pts = np.array(instance.points, dtype=float)
            cen = np.array([d.center for d in instance.disks], dtype=float)
            d2 = np.hypot(pts[:, None, 0] - cen[None, :, 0], pts[:, None, 1] - cen[None, :, 1])
            bits = d2 <= 1.0 + tol
        else:
            bits = np.zeros((m, n), dtype=bool)
        bits.setflags(write=False)
        disk_masks = tuple(sum(1 << int(k) for k in np.flatnonzero(bits[:, j])) for j in range(n))
        point_masks = tuple(sum(1 << int(j) for j in np.flatnonzero(bits[k, :])) for k in range(m))
        return CoverageMatrix(ids, bits, disk_masks, point_masks)

    def uncoverable(self) -> list[int]:
        return [k for k, mask in enumerate(self.point_masks) if mask == 0]


def _popcount(x: int) -> int:
    return bin(x).count("1")


def exact_solve(instance: Instance, node_budget: int = DEFAULT_NODE_BUDGET) -> Solution:
    """Minimum-weight cover; ties go to the lexicographically smallest id set."""
    cov = CoverageMatrix.build(instance)
    bad = cov.uncoverable()
    if bad:
        raise Infeasible(f"points {bad} are not covered by any disk")
    ids = cov.disk_ids
    weights = [instance.disk(i).weight for i in ids]
    n = len(ids)
    full = (1 << instance.m) - 1
    # candidate order inside a branch: cheap per covered point first, then id
    order_key = [(weights[j] / max(1, _popcount(cov.disk_masks[j])), ids[j]) for j in range(n)]
    best: list = [math.inf, None]
    nodes = [0]

    def lower_bound(uncov: int, banned: int) -> float:
        # every uncovered point pays at least its cheapest per-point price
        lb = 0.0
        rem = uncov
        while rem:
            low = rem & -rem
            k = low.bit_length() - 1
            rem ^= low
            price = math.inf
            dm = cov.point_masks[k] & ~banned
            while dm:
                lj = dm & -dm
                j = lj.bit_length() - 1
                dm ^= lj
                c = _popcount(cov.disk_masks[j] & uncov)
                price = min(price, weights[j] / c)
            lb += price
        return lb

    def better(w: float, chosen: tuple[int, ...]) -> bool:
        if best[1] is None:
            return True
        if w < best[0] - 1e-12 * max(1.0, abs(best[0])):
            return True
        if w <= best[0] + 1e-12 * max(1.0, abs(best[0])):
            return tuple(sorted(chosen)) < best[1]
        return False

    def rec(uncov: int, chosen: list[int], w: float, banned: int) -> None:
        nodes[0] += 1
        if nodes[0] > node_budget:
            raise BudgetExceeded(f"node budget {node_budget} exhausted")
        if uncov == 0:
            ch = tuple(sorted(ids[j] for j in chosen))
            wt = weight_of(instance, ch)
            if better(wt, ch):
                best[0], best[1] = wt, ch
            return
        if best[1] is not None:
            lb = w + lower_bound(uncov, banned)
            if lb > best[0] + 1e-9 * max(1.0, abs(best[0])):
                return
        # branch on the uncovered point with the fewest usable disks
        pick, pick_opts = -1, None
        rem = uncov
        while rem:
            low = rem & -rem
            k = low.bit_length() - 1
            rem ^= low
            opts = cov.point_masks[k] & ~banned
            c = _popcount(opts)
            if pick_opts is None or c < _popcount(pick_opts):
                pick, pick_opts = k, opts
                if c <= 1:
                    break
        if not pick_opts:
            return
        cands = []
        dm = pick_opts
        while dm:
            lj = dm & -dm
            cands.append(lj.bit_length() - 1)
            dm ^= lj
        cands.sort(key=lambda j: order_key[j])
        ban = banned
        for j in cands:
            chosen.append(j)
            rec(uncov & ~cov.disk_masks[j], chosen, w + weights[j], ban)
            chosen.pop()
            ban |= 1 << j

    rec(full, [], 0.0, 0)
    if best[1] is None:
        raise Infeasible("no cover found")
    return Solution.build(instance, best[1], default=BASELINE)


def price_lower_bound(cov: CoverageMatrix, weights: Sequence[float], uncov: int, allowed: int) -> float:
    """Sum over uncovered points of the cheapest weight-per-new-point among allowed disks.

    ``allowed`` is a bitmask over columns of ``cov``. Returns inf if a point has no allowed disk.
    """
    lb = 0.0
    rem = uncov
    while rem:
        low = rem & -rem
        k = low.bit_length() - 1
        rem ^= low
        price = math.inf
        dm = cov.point_masks[k] & allowed
        while dm:
            lj = dm & -dm
            j = lj.bit_length() - 1
            dm ^= lj
            price = min(price, weights[j] / _popcount(cov.disk_masks[j] & uncov))
        if math.isinf(price):
            return math.inf
        lb += price
    return lb


def greedy_solve(instance: Instance) -> Solution:
    """Classic ratio greedy: minimize weight per newly covered point, ties to smaller id."""
    cov = CoverageMatrix.build(instance)
    bad = cov.uncoverable()
    if bad:
        raise Infeasible(f"points {bad} are not covered by any disk")
    ids = cov.disk_ids
    weights = [instance.disk(i).weight for i in ids]
    uncov = (1 << instance.m) - 1
    chosen = []
    while uncov:
        best_j, best_w, best_c = -1, 0.0, 0
        for j in range(len(ids)):
            c = _popcount(cov.disk_masks[j] & uncov)
            if c == 0:
                continue
            if best_j < 0:
                best_j, best_w, best_c = j, weights[j], c
                continue
            # compare w/c < best_w/best_c without division
            lhs, rhs = weights[j] * best_c, best_w * c
            if lhs < rhs or (lhs == rhs and ids[j] < ids[best_j]):
                best_j, best_w, best_c = j, weights[j], c
        chosen.append(ids[best_j])
        uncov &= ~cov.disk_masks[best_j]
    return Solution.build(instance, chosen, default=BASELINE)


def harmonic(m: int) -> float:
    return math.fsum(1.0 / i for i in range(1, m + 1))
