"""Small-square grid, farthest-pair square gadgets, active regions and domes."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .geom import TOL, Disk, Point, circle_intersections, cross, dist, on_circle, _circle_pts

MU_CAP = 0.7


class DegenerateGadget(Exception):
    pass


@dataclass(frozen=True)
class SquareGrid:
    mu: float
    K: int
    origin: Point
    L: float

    def square_of(self, p: Sequence[float]) -> tuple[int, int]:
        i = math.floor((p[0] - self.origin.x) / self.mu)
        j = math.floor((p[1] - self.origin.y) / self.mu)
        return (i, j)

    def box(self, sq: tuple[int, int]) -> tuple[float, float, float, float]:
        x0 = self.origin.x + sq[0] * self.mu
        y0 = self.origin.y + sq[1] * self.mu
        return (x0, y0, x0 + self.mu, y0 + self.mu)


def build_grid(block, eps: float) -> SquareGrid:
    """Grid of ``K x K`` squares of side ``mu`` over a block.

    ``block`` is either the block side ``L`` or an ``(origin, L)`` pair.
    """
    if eps <= 0:
        raise ValueError("eps must be > 0")
    if isinstance(block, (int, float)):
        origin, L = Point(0.0, 0.0), float(block)
    else:
        origin, L = Point(*block[0]), float(block[1])
    if L <= 0:
        raise ValueError("block side must be > 0")
    K = math.ceil(L / min(eps, MU_CAP) - 1e-12)
    return SquareGrid(L / K, K, origin, L)


@dataclass(frozen=True)
class Gadget:
    square: tuple[int, int]
    ds: int
    dt: int
    ds_center: Point
    dt_center: Point
    p: Point | None  # circle intersection on the left of ds -> dt
    q: Point | None
    axis: Point | None
    singleton: bool
    members: tuple[int, ...] = ()

    def side(self, x: Sequence[float]) -> int:
        """+1 left of the ds -> dt line, -1 right, 0 on it."""
        if self.singleton:
            raise DegenerateGadget("singleton gadget has no axis")
        c = cross(self.ds_center, self.dt_center, x)
        if abs(c) <= TOL:
            return 0
        return 1 if c > 0 else -1

    @property
    def r_st(self) -> float:
        return dist(self.ds_center, self.dt_center)

    @property
    def disk_ids(self) -> tuple[int, ...]:
        return (self.ds,) if self.singleton else (self.ds, self.dt)


def build_gadget(square_disks: Sequence[Disk], square: tuple[int, int] = (0, 0)) -> Gadget | None:
    if not square_disks:
        return None
    ds_sorted = sorted(square_disks, key=lambda d: d.id)
    members = tuple(d.id for d in ds_sorted)
    if len(ds_sorted) == 1:
        d = ds_sorted[0]
        return Gadget(square, d.id, d.id, d.center, d.center, None, None, None, True, members)
    best = None
    for a in range(len(ds_sorted)):
        for b in range(a + 1, len(ds_sorted)):
            r = dist(ds_sorted[a].center, ds_sorted[b].center)
            if best is None or r > best[0] + 1e-12:
                best = (r, a, b)
    r, a, b = best
    s, t = ds_sorted[a], ds_sorted[b]
    if r < TOL:
        # coincident centers: the pair is the gadget but it has no axis
        return Gadget(square, s.id, t.id, s.center, t.center, None, None, None, True, members)
    pts = _circle_pts(s.center, t.center)
    left = [x for x in pts if cross(s.center, t.center, x) > 0]
    right = [x for x in pts if cross(s.center, t.center, x) < 0]
    axis = Point((t.center.x - s.center.x) / r, (t.center.y - s.center.y) / r)
    g = Gadget(square, s.id, t.id, s.center, t.center, left[0], right[0], axis, False, members)
    for d in ds_sorted:
        if not in_central_area(d.center, g):
            raise AssertionError(f"disk {d.id} outside the central area of gadget {s.id},{t.id}")
    return g


def in_central_area(x: Sequence[float], g: Gadget, tol: float = TOL) -> bool:
    r = g.r_st
    return dist(x, g.ds_center) <= r + tol and dist(x, g.dt_center) <= r + tol


def in_core_central(x: Sequence[float], g: Gadget, tol: float = TOL) -> bool:
    if g.singleton:
        raise DegenerateGadget("core-central area undefined for a singleton gadget")
    return dist(x, g.p) <= 1.0 + tol and dist(x, g.q) <= 1.0 + tol


@dataclass(frozen=True)
class ActiveRegion:
    square: tuple[int, int]
    sign: int
    disk_ids: tuple[int, ...]


def _pokes_out(center: Sequence[float], g: Gadget, sign: int, samples: int = 256) -> bool:
    for k in range(samples):
        x = on_circle(center, 2 * math.pi * (k + 0.5) / samples)
        if g.side(x) != sign:
            continue
        if dist(x, g.ds_center) > 1.0 + TOL and dist(x, g.dt_center) > 1.0 + TOL:
            return True
    return False


def active_regions(g: Gadget, disks: Iterable[Disk], exclude: Iterable[int] = ()) -> list[ActiveRegion]:
    """Per halfplane, the disks centered in the core-central area that stick out of the gadget."""
    if g.singleton:
        raise DegenerateGadget("no active regions for a singleton gadget")
    skip = set(exclude) | {g.ds, g.dt}
    core = [d for d in sorted(disks, key=lambda d: d.id) if d.id not in skip and in_core_central(d.center, g)]
    out = []
    for sign in (1, -1):
        ids = tuple(d.id for d in core if _pokes_out(d.center, g, sign))
        if ids:
            out.append(ActiveRegion(g.square, sign, ids))
    return out


@dataclass(frozen=True)
class Dome:
    point: Point
    sign: int
    apex: Point  # P or Q
    qs: Point
    qt: Point
    contains: Callable[[Sequence[float]], bool] = field(compare=False, repr=False)


def dome_region(g: Gadget, sign: int) -> Dome:
    if g.singleton:
        raise DegenerateGadget("no dome for a singleton gadget")
    # the radius-2 disk around the opposite intersection point touches ds and dt
    # at qs, qt; the dome point is where their unit circles meet on this side
    apex = g.q if sign > 0 else g.p
    qs = Point(2 * g.ds_center.x - apex.x, 2 * g.ds_center.y - apex.y)
    qt = Point(2 * g.dt_center.x - apex.x, 2 * g.dt_center.y - apex.y)
    cands = _circle_pts(qs, qt)
    if not cands:
        raise DegenerateGadget("tangent points too far apart for a dome point")
    d = max(cands, key=lambda x: dist(x, apex))

    def contains(x: Sequence[float], tol: float = TOL) -> bool:
        if dist(x, d) > 1.0 + tol:
            return False
        if dist(x, g.ds_center) < 1.0 - tol or dist(x, g.dt_center) < 1.0 - tol:
            return False
        return g.side(x) == sign

    return Dome(d, sign, apex, qs, qt, contains)


def build_gadgets(disks: Sequence[Disk], grid: SquareGrid) -> dict[tuple[int, int], Gadget]:
    by_sq: dict[tuple[int, int], list[Disk]] = {}
    for d in disks:
        by_sq.setdefault(grid.square_of(d.center), []).append(d)
    return {sq: build_gadget(ds, sq) for sq, ds in sorted(by_sq.items())}
