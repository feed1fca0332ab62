"""Planar primitives for unit circles.

Every tolerance-sensitive comparison goes through the helpers in this module so
that robustness questions have a single place to look.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

TOL = 1e-9
TWO_PI = 2.0 * math.pi
MAX_JITTER = 1e-7
MAX_RETRIES = 3


class DegenerateArrangement(Exception):
    """Tangent or concurrent circles that the tolerance cannot resolve."""


class Point(NamedTuple):
    x: float
    y: float

    def __add__(self, other):  # type: ignore[override]
        return Point(self.x + other[0], self.y + other[1])

    def __sub__(self, other):
        return Point(self.x - other[0], self.y - other[1])

    def scale(self, s: float) -> "Point":
        return Point(self.x * s, self.y * s)


@dataclass(frozen=True, slots=True)
class Disk:
    id: int
    center: Point
    weight: float

    def __post_init__(self):
        if not (math.isfinite(self.center[0]) and math.isfinite(self.center[1])):
            raise ValueError(f"disk {self.id}: non-finite center")
        if not math.isfinite(self.weight) or self.weight < 0:
            raise ValueError(f"disk {self.id}: weight must be finite and >= 0")
        if not isinstance(self.center, Point):
            object.__setattr__(self, "center", Point(float(self.center[0]), float(self.center[1])))

    @property
    def radius(self) -> float:
        return 1.0


@dataclass(frozen=True, slots=True)
class AngularInterval:
    """Counterclockwise interval ``[start, start + extent]`` on a unit circle."""

    disk_id: int
    start: float
    extent: float

    def __post_init__(self):
        if not (0.0 <= self.start < TWO_PI):
            raise ValueError(f"start {self.start} outside [0, 2pi)")
        # a full circle (extent == 2pi) is allowed for isolated disks
        if not (0.0 < self.extent <= TWO_PI):
            raise ValueError(f"extent {self.extent} outside (0, 2pi]")

    @property
    def end(self) -> float:
        return norm_angle(self.start + self.extent)

    @property
    def is_full(self) -> bool:
        return self.extent >= TWO_PI

    def offset(self, angle: float) -> float:
        """Counterclockwise distance from ``start`` to ``angle``."""
        return ccw_delta(self.start, angle)

    def contains(self, angle: float, tol: float = TOL) -> bool:
        if self.is_full:
            return True
        off = self.offset(angle)
        return off <= self.extent + tol or off >= TWO_PI - tol

    def angle_at(self, frac: float) -> float:
        return norm_angle(self.start + frac * self.extent)

    def sample(self, k: int) -> list[float]:
        """``k`` interior angles, evenly spaced."""
        return [self.angle_at((i + 0.5) / k) for i in range(k)]


def norm_angle(a: float) -> float:
    a = math.fmod(a, TWO_PI)
    if a < 0:
        a += TWO_PI
    if a >= TWO_PI:
        a = 0.0
    return a


def ccw_delta(a: float, b: float) -> float:
    """Counterclockwise angle from ``a`` to ``b`` in ``[0, 2pi)``."""
    return norm_angle(b - a)


def dist(p: Sequence[float], q: Sequence[float]) -> float:
    return math.hypot(p[0] - q[0], p[1] - q[1])


def angle_of(center: Sequence[float], p: Sequence[float]) -> float:
    return norm_angle(math.atan2(p[1] - center[1], p[0] - center[0]))


def on_circle(center: Sequence[float], angle: float, radius: float = 1.0) -> Point:
    return Point(center[0] + radius * math.cos(angle), center[1] + radius * math.sin(angle))


def cross(o: Sequence[float], a: Sequence[float], b: Sequence[float]) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def point_in_disk(p: Sequence[float], d: Disk, tol: float = TOL) -> bool:
    if tol < 0:
        raise ValueError("tol must be >= 0")
    return dist(p, d.center) <= 1.0 + tol


def strictly_inside(p: Sequence[float], center: Sequence[float], tol: float = TOL) -> bool:
    return dist(p, center) < 1.0 - tol


def central_angle(interval: AngularInterval) -> float:
    return interval.extent


class Crossings(list):
    """List of intersection points carrying a ``degenerate`` flag."""

    degenerate: bool = False


def circle_intersections(a: Disk, b: Disk, tol: float = TOL) -> Crossings:
    """Intersections of two unit circles, sorted by angle around ``a.center``."""
    return _circle_pts(a.center, b.center, tol)


def _circle_pts(ca: Sequence[float], cb: Sequence[float], tol: float = TOL) -> Crossings:
    out = Crossings()
    d = dist(ca, cb)
    if d < tol:
        out.degenerate = True
        return out
    if d > 2.0 + tol:
        return out
    ux, uy = (cb[0] - ca[0]) / d, (cb[1] - ca[1]) / d
    mx, my = ca[0] + ux * d / 2, ca[1] + uy * d / 2
    if abs(d - 2.0) <= tol:
        out.append(Point(mx, my))
        return out
    h = math.sqrt(max(0.0, 1.0 - d * d / 4))
    pts = [Point(mx - uy * h, my + ux * h), Point(mx + uy * h, my - ux * h)]
    pts.sort(key=lambda p: angle_of(ca, p))
    out.extend(pts)
    return out


def covered_interval(ci: Sequence[float], cj: Sequence[float]) -> tuple[float, float] | None:
    """Angular interval ``(start, extent)`` of circle ``i`` lying inside disk ``j``.

    Returns ``None`` if the circles do not overlap.
    """
    d = dist(ci, cj)
    if d >= 2.0:
        return None
    phi = math.atan2(cj[1] - ci[1], cj[0] - ci[0])
    alpha = math.acos(d / 2.0)
    return norm_angle(phi - alpha), 2.0 * alpha


def _complement(intervals: list[tuple[float, float, int]]) -> list[tuple[float, float, int, int]]:
    """Exposed parts of a circle given covered ``(start, extent, owner)`` intervals.

    Returns ``(start, extent, enter_owner, exit_owner)``: ``exit_owner`` is the
    disk whose cover ends at ``start``, ``enter_owner`` the one starting at the end.
    """
    if not intervals:
        return [(0.0, TWO_PI, -1, -1)]
    # unroll around the smallest start so that everything is a plain line sweep
    ivs = sorted(intervals)
    base = ivs[0][0]
    segs = sorted((ccw_delta(base, s), ccw_delta(base, s) + e, o) for s, e, o in ivs)
    merged: list[list] = []
    for s, e, o in segs:
        if merged and s <= merged[-1][1]:
            if e > merged[-1][1]:
                merged[-1][1] = e
                merged[-1][3] = o
        else:
            merged.append([s, e, o, o])
    last = merged[-1]
    # the last cover may wrap past 2pi and swallow leading covers
    while len(merged) > 1 and merged[0][0] <= last[1] - TWO_PI:
        first = merged.pop(0)
        if first[1] + TWO_PI > last[1]:
            last[1] = first[1] + TWO_PI
            last[3] = first[3]
    if last[1] - last[0] >= TWO_PI:
        return []
    out = []
    for k, cur in enumerate(merged):
        nxt = merged[(k + 1) % len(merged)]
        gap_start = cur[1]
        gap_end = nxt[0] + (TWO_PI if k + 1 == len(merged) else 0.0)
        if gap_end - gap_start > 0:
            out.append((norm_angle(base + gap_start), gap_end - gap_start, nxt[2], cur[3]))
    return out


Curve = list  # list of (disk_id, AngularInterval)


def union_boundary(disks: Sequence[Disk], tol: float = TOL) -> list[Curve]:
    """Boundary components of the union of unit disks.

    Each curve is a cyclic list of ``(disk_id, AngularInterval)`` traversed with
    the union on the left. Raises :class:`DegenerateArrangement` on tangencies or
    concurrent vertices that ``tol`` cannot separate.
    """
    if not disks:
        raise ValueError("union_boundary needs at least one disk")
    centers = {d.id: d.center for d in disks}
    return _union_boundary(centers, tol)


def _union_boundary(centers: dict[int, Point], tol: float) -> list[Curve]:
    ids = sorted(centers)
    pieces: dict[int, list[tuple[float, float, int, int]]] = {}
    for i in ids:
        ci = centers[i]
        cov = []
        for j in ids:
            if j == i:
                continue
            d = dist(ci, centers[j])
            if d < tol:
                raise DegenerateArrangement(f"disks {i} and {j} coincide")
            if abs(d - 2.0) <= tol:
                raise DegenerateArrangement(f"disks {i} and {j} are tangent")
            iv = covered_interval(ci, centers[j])
            if iv is not None:
                cov.append((iv[0], iv[1], j))
        exposed = _complement(cov)
        for s, e, _, _ in exposed:
            if e < 1e3 * tol:
                raise DegenerateArrangement(f"sliver on disk {i}")
        # a boundary vertex sitting on a third circle is a concurrency
        for s, e, enter, leave in exposed:
            if enter < 0:
                continue
            for ang in (s, norm_angle(s + e)):
                p = on_circle(ci, ang)
                for k in ids:
                    if k in (i, enter, leave):
                        continue
                    if abs(dist(p, centers[k]) - 1.0) <= tol:
                        raise DegenerateArrangement(f"vertex of disk {i} lies on circle {k}")
        pieces[i] = exposed

    curves: list[Curve] = []
    used: set[tuple[int, int]] = set()
    for i in ids:
        for k, (s, e, enter, _) in enumerate(pieces[i]):
            if (i, k) in used:
                continue
            if enter < 0:
                used.add((i, k))
                curves.append([(i, AngularInterval(i, s, min(e, TWO_PI)))])
                continue
            curve: Curve = []
            cur = (i, k)
            while cur not in used:
                used.add(cur)
                di, dk = cur
                ps, pe, penter, _ = pieces[di][dk]
                curve.append((di, AngularInterval(di, ps, pe)))
                vertex = on_circle(centers[di], ps + pe)
                nj = penter
                ang = angle_of(centers[nj], vertex)
                cand = pieces.get(nj, [])
                if not cand:
                    raise DegenerateArrangement(f"dangling boundary at disk {di}")
                best = min(range(len(cand)), key=lambda q: _circ_gap(cand[q][0], ang))
                if _circ_gap(cand[best][0], ang) > 1e-6:
                    raise DegenerateArrangement(f"cannot link boundary at disk {di}")
                cur = (nj, best)
            curves.append(curve)
    return curves


def _circ_gap(a: float, b: float) -> float:
    d = ccw_delta(a, b)
    return min(d, TWO_PI - d)


def jitter(disks: Sequence[Disk], attempt: int) -> list[Disk]:
    """Deterministic id-seeded perturbation of centers, at most ``MAX_JITTER``."""
    out = []
    for d in disks:
        rng = random.Random(d.id * 7919 + attempt)
        dx = rng.uniform(-MAX_JITTER, MAX_JITTER) / math.sqrt(2)
        dy = rng.uniform(-MAX_JITTER, MAX_JITTER) / math.sqrt(2)
        out.append(Disk(d.id, Point(d.center.x + dx, d.center.y + dy), d.weight))
    return out


def robust_union_boundary(disks: Sequence[Disk], tol: float = TOL) -> tuple[list[Curve], dict[int, Point]]:
    """:func:`union_boundary` with perturbation retries.

    Returns the curves together with the centers they were computed for.
    """
    work = list(disks)
    for attempt in range(MAX_RETRIES + 1):
        try:
            return union_boundary(work, tol), {d.id: d.center for d in work}
        except DegenerateArrangement:
            if attempt == MAX_RETRIES:
                raise
            work = jitter(disks, attempt + 1)
    raise AssertionError("unreachable")


def curve_points(curve: Curve, centers: dict[int, Point], per_piece: int = 32) -> list[Point]:
    """Polyline approximation of a boundary curve (closed, last point omitted)."""
    pts = []
    for did, iv in curve:
        n = max(2, int(per_piece * iv.extent / math.pi) + 2)
        for q in range(n):
            pts.append(on_circle(centers[did], iv.start + iv.extent * q / n))
    return pts


def winding_number(poly: Sequence[Sequence[float]], p: Sequence[float]) -> int:
    """Winding number of a closed polyline around ``p``."""
    wn = 0
    n = len(poly)
    px, py = p[0], p[1]
    for k in range(n):
        ax, ay = poly[k][0], poly[k][1]
        bx, by = poly[(k + 1) % n][0], poly[(k + 1) % n][1]
        if ay <= py:
            if by > py and (bx - ax) * (py - ay) - (px - ax) * (by - ay) > 0:
                wn += 1
        elif by <= py and (bx - ax) * (py - ay) - (px - ax) * (by - ay) < 0:
            wn -= 1
    return wn


def covered_by_any(p: Sequence[float], centers: Iterable[Sequence[float]], tol: float = TOL) -> bool:
    return any(dist(p, c) <= 1.0 + tol for c in centers)


def winding_numbers(poly: Sequence[Sequence[float]], pts) -> "np.ndarray":
    """Vectorized :func:`winding_number` for many query points."""
    import numpy as np

    P = np.asarray(pts, dtype=float).reshape(-1, 2)
    V = np.asarray(poly, dtype=float)
    A, B = V, np.roll(V, -1, axis=0)
    px, py = P[:, 0][:, None], P[:, 1][:, None]
    ax, ay, bx, by = A[:, 0][None], A[:, 1][None], B[:, 0][None], B[:, 1][None]
    side = (bx - ax) * (py - ay) - (px - ax) * (by - ay)
    up = (ay <= py) & (by > py) & (side > 0)
    down = (ay > py) & (by <= py) & (side < 0)
    return up.sum(axis=1) - down.sum(axis=1)
