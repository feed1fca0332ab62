"""Synthetic substructures for testing the dynamic program.

Each strip has a straight baseline on the x-axis with the helper set below it.
Every arc is the upper part of a unit circle centered at ``(c, -d)`` with
``0 < d < 1``, so two arcs cross at most once above the axis and the region an
arc covers is exactly the disk cap above the axis.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .substructures import StructView


@dataclass(frozen=True)
class StripArc:
    disk: int
    c: float
    d: float
    weight: float

    @property
    def half(self) -> float:
        return math.sqrt(1.0 - self.d * self.d)

    @property
    def a(self) -> float:
        return self.c - self.half

    @property
    def b(self) -> float:
        return self.c + self.half

    def covers(self, x: float, y: float) -> bool:
        return y > 0 and (x - self.c) ** 2 + (y + self.d) ** 2 <= 1.0


def _crossing(p: StripArc, q: StripArc) -> float | None:
    """x-coordinate of the crossing above the axis, if any."""
    dx, dy = q.c - p.c, -q.d + p.d
    r = math.hypot(dx, dy)
    if r < 1e-12 or r >= 2.0:
        return None
    mx, my = p.c + dx / 2, -p.d + dy / 2
    h = math.sqrt(max(0.0, 1.0 - (r / 2) ** 2))
    for sgn in (1, -1):
        x, y = mx - sgn * dy / r * h, my + sgn * dx / r * h
        if y > 1e-9:
            return x
    return None


def strip_view(arcs: list[StripArc], points: list[tuple[float, float]], sid: int = 0,
               point_offset: int = 0) -> StructView:
    """Combinatorial view of a strip; point ``k`` gets mask bit ``point_offset + k``."""
    arcs = sorted(arcs, key=lambda s: (s.a, s.disk))
    lo = min((s.a for s in arcs), default=0.0)
    hi = max((s.b for s in arcs), default=1.0)
    A = [s.a - lo for s in arcs]
    B = [s.b - lo for s in arcs]
    pts = []
    for s in arcs:
        m = 0
        for k, (x, y) in enumerate(points):
            if s.covers(x, y):
                m |= 1 << (point_offset + k)
        pts.append(m)
    cross = {}
    for i in range(len(arcs)):
        for j in range(i + 1, len(arcs)):
            x = _crossing(arcs[i], arcs[j])
            if x is None:
                continue
            fi = (x - arcs[i].a) / (arcs[i].b - arcs[i].a)
            fj = (x - arcs[j].a) / (arcs[j].b - arcs[j].a)
            if 1e-9 < fi < 1 - 1e-9 and 1e-9 < fj < 1 - 1e-9:
                cross[(i, j)] = [(fi, fj)]
    return StructView(hi - lo, A, B, [s.disk for s in arcs], [s.weight for s in arcs], pts, cross, sid=sid)


def random_strip(rng: random.Random, n_arcs: int, n_points: int, first_disk: int = 0,
                 width: float = 3.0) -> tuple[list[StripArc], list[tuple[float, float]]]:
    arcs = [
        StripArc(first_disk + k, rng.uniform(0.0, width), rng.uniform(0.05, 0.95), float(rng.randint(1, 9)))
        for k in range(n_arcs)
    ]
    pts: list[tuple[float, float]] = []
    tries = 0
    while len(pts) < n_points and tries < 1000 * (n_points + 1):
        tries += 1
        x, y = rng.uniform(-1.0, width + 1.0), rng.uniform(0.0, 1.0)
        if any(s.covers(x, y) for s in arcs):
            pts.append((x, y))
    return arcs, pts


def single_fixture(seed: int, max_arcs: int = 10) -> tuple[StructView, int]:
    rng = random.Random(seed)
    n = rng.randint(1, max_arcs)
    arcs, pts = random_strip(rng, n, rng.randint(0, 8))
    v = strip_view(arcs, pts)
    return v, (1 << len(pts)) - 1


def two_fixture(seed: int, max_arcs: int = 8) -> tuple[list[StructView], int]:
    """Two strips with disjoint disks; the second is traversed in the opposite direction."""
    rng = random.Random(seed)
    n1, n2 = rng.randint(1, max_arcs), rng.randint(1, max_arcs)
    a1, p1 = random_strip(rng, n1, rng.randint(0, 6))
    a2, p2 = random_strip(rng, n2, rng.randint(0, 6), first_disk=100)
    v1 = strip_view(a1, p1, sid=0)
    v2 = strip_view(a2, p2, sid=1, point_offset=len(p1)).reversed()
    return [v1, v2], (1 << (len(p1) + len(p2))) - 1


def sibling_fixture(seed: int, max_arcs: int = 6) -> tuple[list[StructView], int, int]:
    """Two strips sharing one disk, made cheap so that both of its arcs are worth using.

    Returns the views, the required point mask and the shared disk id.
    """
    rng = random.Random(seed)
    n1, n2 = rng.randint(2, max_arcs), rng.randint(2, max_arcs)
    a1, p1 = random_strip(rng, n1, 0)
    a2, p2 = random_strip(rng, n2, 0, first_disk=100)
    shared = a1[rng.randrange(n1)]
    k2 = rng.randrange(n2)
    w = 1.0
    a1 = [StripArc(s.disk, s.c, s.d, w if s.disk == shared.disk else s.weight) for s in a1]
    a2 = [StripArc(shared.disk if k == k2 else s.disk, s.c, s.d, w if k == k2 else s.weight)
          for k, s in enumerate(a2)]
    # one point only the shared arc covers in each strip, plus random extras
    pts1 = _private_points(rng, a1, shared.disk) + _covered_points(rng, a1, rng.randint(0, 4))
    pts2 = _private_points(rng, a2, shared.disk) + _covered_points(rng, a2, rng.randint(0, 4))
    v1 = strip_view(a1, pts1, sid=0)
    v2 = strip_view(a2, pts2, sid=1, point_offset=len(pts1))
    return [v1, v2], (1 << (len(pts1) + len(pts2))) - 1, shared.disk


def _covered_points(rng: random.Random, arcs: list[StripArc], k: int) -> list[tuple[float, float]]:
    lo, hi = min(s.a for s in arcs), max(s.b for s in arcs)
    out: list[tuple[float, float]] = []
    while len(out) < k:
        x, y = rng.uniform(lo, hi), rng.uniform(0.0, 1.0)
        if any(s.covers(x, y) for s in arcs):
            out.append((x, y))
    return out


def _private_points(rng: random.Random, arcs: list[StripArc], disk: int) -> list[tuple[float, float]]:
    own = next(s for s in arcs if s.disk == disk)
    for _ in range(20000):
        x, y = rng.uniform(own.a, own.b), rng.uniform(0.0, 1.0 - own.d)
        if own.covers(x, y) and not any(s.covers(x, y) for s in arcs if s.disk != disk):
            return [(x, y)]
    return []


def cluster_block(seed: int, eps: float, clusters: int = 4, per_cluster: int = 4, m: int = 30,
                  side: float = 3.0):
    """Disks bunched inside a few grid squares, points where the square gadgets leave gaps.

    Returns ``(disks, points, origin, side)`` ready for the helper-set builder.
    """
    from .gadgets import build_gadgets, build_grid
    from .geom import Disk, Point

    rng = random.Random(seed)
    grid = build_grid(side, eps)
    disks = []
    for c in range(clusters):
        i, j = rng.randrange(grid.K), rng.randrange(grid.K)
        x0, y0, x1, y1 = grid.box((i, j))
        for _ in range(rng.randint(2, per_cluster)):
            x, y = rng.uniform(x0, x1), rng.uniform(y0, y1)
            disks.append(Disk(len(disks), Point(x, y), float(rng.randint(1, 9))))
    gadgets = build_gadgets(disks, grid)
    hcent = [disks[i].center for g in gadgets.values() for i in g.disk_ids]
    pts = []
    tries = 0
    while len(pts) < m and tries < 200 * m:
        tries += 1
        d = disks[rng.randrange(len(disks))]
        ang, r = rng.uniform(0, 2 * math.pi), math.sqrt(rng.random())
        p = Point(d.center.x + r * math.cos(ang), d.center.y + r * math.sin(ang))
        if all(math.hypot(p.x - c.x, p.y - c.y) > 1.0 for c in hcent):
            pts.append(p)
    return disks, pts, Point(0.0, 0.0), side
