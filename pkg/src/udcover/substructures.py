"""Uncovered arcs, baselines along the helper-set boundary, and substructures.

Two layers live here. The geometric layer extracts arcs and baselines from
actual disks. The combinatorial layer (:class:`StructView`) reduces a
substructure to baseline positions, arc crossings and covered point masks; the
order, adjacency, envelope and dynamic-programming code only ever sees that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .gadgets import Gadget
from .geom import (
    TOL, TWO_PI, AngularInterval, Disk, Point, _circle_pts, angle_of, ccw_delta, dist,
    norm_angle, on_circle, robust_union_boundary, winding_number, winding_numbers,
)

EARLIER = "Earlier"
LATER = "Later"
INCOMPARABLE = "Incomparable"

CCW = "ccw"
CW = "cw"

# frames of interior crossings closer than this to an arc end are ignored
END_EPS = 1e-7


class BrokenChain(Exception):
    """The greedy successor chain stopped before the end of the baseline."""


# ---------------------------------------------------------------- geometry

class HContext:
    """Union boundary of the helper set with arclength bookkeeping."""

    def __init__(self, h_disks: Sequence[Disk]):
        self.disks = {d.id: d for d in h_disks}
        if h_disks:
            self.curves, self.centers = robust_union_boundary(list(h_disks))
        else:
            self.curves, self.centers = [], {}
        self.cum: list[list[float]] = []
        self.total: list[float] = []
        self._by_disk: dict[int, list[tuple[int, int]]] = {}
        for c, curve in enumerate(self.curves):
            acc, run = [], 0.0
            for k, (did, iv) in enumerate(curve):
                acc.append(run)
                run += iv.extent
                self._by_disk.setdefault(did, []).append((c, k))
            self.cum.append(acc)
            self.total.append(run)

    def covers(self, p: Sequence[float], tol: float = TOL) -> bool:
        return any(dist(p, c) <= 1.0 + tol for c in self.centers.values())

    def strictly_covers(self, p: Sequence[float], tol: float = TOL, skip: Iterable[int] = ()) -> bool:
        sk = set(skip)
        return any(dist(p, c) < 1.0 - tol for i, c in self.centers.items() if i not in sk)

    def locate(self, p: Sequence[float], hint: int | None = None) -> tuple[int, float] | None:
        """Curve index and arclength position of a point on the boundary."""
        owners = [hint] if hint is not None else list(self._by_disk)
        best = None
        for did in owners:
            center = self.centers[did]
            ang = angle_of(center, p)
            err = abs(dist(p, center) - 1.0)
            for c, k in self._by_disk.get(did, []):
                iv = self.curves[c][k][1]
                off = ccw_delta(iv.start, ang)
                if off > iv.extent:
                    # allow tiny overshoot at piece ends
                    over = min(off - iv.extent, TWO_PI - off)
                    if over > 1e-6:
                        continue
                    off = iv.extent if off - iv.extent < TWO_PI - off else 0.0
                score = err
                if best is None or score < best[0]:
                    best = (score, c, self.cum[c][k] + off)
        if best is None:
            return None
        return best[1], best[2] % self.total[best[1]] if self.total[best[1]] > 0 else 0.0

    def point_at(self, c: int, pos: float) -> Point:
        pos = pos % self.total[c]
        acc = self.cum[c]
        lo, hi = 0, len(acc) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if acc[mid] <= pos:
                lo = mid
            else:
                hi = mid - 1
        did, iv = self.curves[c][lo]
        return on_circle(self.centers[did], iv.start + (pos - acc[lo]))

    def sample(self, c: int, start: float, length: float, step: float = 0.05) -> list[Point]:
        n = max(2, int(length / step) + 2)
        return [self.point_at(c, start + length * q / (n - 1)) for q in range(n)]


@dataclass
class UncoveredArc:
    key: int
    disk_id: int
    sign: int
    center: Point
    interval: AngularInterval
    weight: float
    start_pt: Point
    end_pt: Point
    start_loc: tuple[int, float] | None = None
    end_loc: tuple[int, float] | None = None
    points: int = 0
    st_id: int | None = None

    @property
    def central_angle(self) -> float:
        return self.interval.extent

    @property
    def bridging(self) -> bool:
        return (self.start_loc is None or self.end_loc is None
                or self.start_loc[0] != self.end_loc[0])

    def point_at(self, frac: float) -> Point:
        return on_circle(self.center, self.interval.start + frac * self.interval.extent)

    def frac_of(self, p: Sequence[float]) -> float:
        return ccw_delta(self.interval.start, angle_of(self.center, p)) / self.interval.extent


def uncovered_arcs(d: Disk, ctx: HContext, gadget: Gadget, key0: int = 0) -> list[UncoveredArc]:
    """Per halfplane of the gadget axis, the subarc of the circle from its first to its
    last crossing with the helper-set boundary."""
    if d.id in ctx.centers:
        return []
    cen = d.center
    hits = []
    for hid, hc in ctx.centers.items():
        for x in _circle_pts(cen, hc):
            if ctx.strictly_covers(x, skip=(hid,)):
                continue
            hits.append((angle_of(cen, x), hid, x))
    if not hits:
        return []
    hits.sort()
    stretches = []
    for k in range(len(hits)):
        a0, h0, _ = hits[k]
        a1, h1, _ = hits[(k + 1) % len(hits)]
        span = ccw_delta(a0, a1) if len(hits) > 1 else TWO_PI
        if span <= 1e-12:
            continue
        mid = on_circle(cen, a0 + span / 2)
        if not ctx.covers(mid):
            stretches.append((a0, span, h0, h1, mid))
    if gadget.singleton:
        raise ValueError("uncovered arcs need a non-degenerate gadget")
    nx, ny = -gadget.axis.y, gadget.axis.x
    out = []
    for sign in (1, -1):
        group = [s for s in stretches if (gadget.side(s[4]) or 1) == sign]
        if not group:
            continue
        ref = math.atan2(-sign * ny, -sign * nx)
        group.sort(key=lambda s: ccw_delta(ref, s[0] + s[1] / 2))
        start = group[0][0]
        end = norm_angle(group[-1][0] + group[-1][1])
        ext = ccw_delta(start, end)
        if ext <= 1e-12:
            ext = TWO_PI
        iv = AngularInterval(d.id, norm_angle(start), min(ext, TWO_PI))
        sp, ep = on_circle(cen, iv.start), on_circle(cen, iv.start + iv.extent)
        arc = UncoveredArc(key0 + len(out), d.id, sign, cen, iv, d.weight, sp, ep)
        arc.start_loc = ctx.locate(sp, group[0][2])
        arc.end_loc = ctx.locate(ep, group[-1][3])
        out.append(arc)
    return out


@dataclass
class Baseline:
    curve: int
    start: float
    length: float
    curve_length: float
    cyclic: bool = False
    orientation: str = CCW

    def rel(self, pos: float) -> float:
        """Canonical offset of a curve position from the baseline start."""
        if self.curve_length <= 0:
            return pos - self.start
        return (pos - self.start) % self.curve_length


@dataclass
class Substructure:
    id: int
    baseline: Baseline
    arcs: list[UncoveredArc]
    active: list = field(default_factory=list)
    cross: dict = field(default_factory=dict)
    _view: "StructView | None" = None

    def view(self) -> "StructView":
        if self._view is None or self._view.orientation != self.baseline.orientation:
            self._view = make_view(self)
        return self._view

    def invalidate(self) -> None:
        self._view = None


def footprint(arc: UncoveredArc, ctx: HContext) -> tuple[int, float, float]:
    c, p0 = arc.start_loc
    _, p1 = arc.end_loc
    T = ctx.total[c]
    return c, p0, (p1 - p0) % T


def _merge_circular(ivs: list[tuple[float, float]], T: float) -> tuple[list[tuple[float, float]], bool]:
    """Union of circular intervals ``(start, length)``; returns pieces and a full-cover flag."""
    if not ivs:
        return [], False
    ivs = sorted(ivs)
    base = ivs[0][0]
    segs = sorted(((s - base) % T, (s - base) % T + ln) for s, ln in ivs)
    merged: list[list[float]] = []
    for s, e in segs:
        if merged and s <= merged[-1][1] + 1e-12:
            merged[-1][1] = max(merged[-1][1], e)
        else:
            merged.append([s, e])
    last = merged[-1]
    while len(merged) > 1 and merged[0][0] <= last[1] - T + 1e-12:
        first = merged.pop(0)
        last[1] = max(last[1], first[1] + T)
    if last[1] - last[0] >= T - 1e-12:
        return [(0.0, T)], True
    return [((s + base) % T, e - s) for s, e in merged], False


def region_polygon(arc: UncoveredArc, ctx: HContext, step: float = 0.04) -> list[Point]:
    """Closed loop around the region between the arc and its baseline footprint."""
    n = max(4, int(arc.interval.extent / step) + 2)
    poly = [arc.point_at(q / (n - 1)) for q in range(n)]
    c, p0, ln = footprint(arc, ctx)
    back = ctx.sample(c, p0, ln, step)
    poly.extend(reversed(back))
    return poly


def point_covered_by_arc(p: Sequence[float], arc: UncoveredArc, ctx: HContext) -> bool:
    """Membership in the region bounded by the arc and its footprint."""
    if ctx.covers(p, tol=-TOL):
        return False
    if dist(p, arc.center) > 1.0 + TOL:
        return False
    if arc.bridging:
        return False
    poly = region_polygon(arc, ctx)
    if winding_number(poly, p) != 0:
        return True
    # boundary counts as covered
    return abs(dist(p, arc.center) - 1.0) <= 1e-9 and arc.interval.contains(angle_of(arc.center, p), 1e-9)


def assign_points(arcs: Sequence[UncoveredArc], ctx: HContext, points: Sequence[Sequence[float]],
                  idx: Sequence[int]) -> None:
    """Set each arc's point mask over ``idx`` (indices into ``points``, bit = position in ``idx``)."""
    for a in arcs:
        a.points = 0
        if a.bridging:
            continue
        near = [(b, points[k]) for b, k in enumerate(idx) if dist(points[k], a.center) <= 1.0 + TOL]
        if not near:
            continue
        wn = winding_numbers(region_polygon(a, ctx), [p for _, p in near])
        for (b, p), w in zip(near, wn):
            if w != 0 or (abs(dist(p, a.center) - 1.0) <= 1e-9
                          and a.interval.contains(angle_of(a.center, p), 1e-9)):
                a.points |= 1 << b


def extract_baselines(arcs: Sequence[UncoveredArc], ctx: HContext) -> list[Baseline]:
    """Maximal covered stretches of the boundary, one per connected union of footprints."""
    per_curve: dict[int, list[tuple[float, float]]] = {}
    for a in arcs:
        if a.bridging:
            continue
        c, p0, ln = footprint(a, ctx)
        per_curve.setdefault(c, []).append((p0, ln))
    out = []
    for c in sorted(per_curve):
        pieces, full = _merge_circular(per_curve[c], ctx.total[c])
        for s, ln in pieces:
            out.append(Baseline(c, s, ln, ctx.total[c], cyclic=full))
    return out


def arc_crossings(a: UncoveredArc, b: UncoveredArc, ctx: HContext | None) -> list[tuple[float, float]]:
    """Crossings of two arcs outside the helper set, as fractions along each arc."""
    if a.disk_id == b.disk_id:
        return []
    out = []
    for x in _circle_pts(a.center, b.center):
        fa, fb = a.frac_of(x), b.frac_of(x)
        if not (END_EPS < fa < 1 - END_EPS and END_EPS < fb < 1 - END_EPS):
            continue
        if ctx is not None and ctx.strictly_covers(x):
            continue
        out.append((fa, fb))
    return out


def build_substructures(arcs: Sequence[UncoveredArc], ctx: HContext, first_id: int = 0) -> list[Substructure]:
    bls = extract_baselines(arcs, ctx)
    sts = [Substructure(first_id + k, b, []) for k, b in enumerate(bls)]
    for a in arcs:
        if a.bridging:
            continue
        c, p0, ln = footprint(a, ctx)
        for st in sts:
            b = st.baseline
            if b.curve != c:
                continue
            if b.cyclic or b.rel(p0) <= b.length + 1e-9:
                st.arcs.append(a)
                a.st_id = st.id
                break
    for st in sts:
        st.arcs.sort(key=lambda a: (st.baseline.rel(a.start_loc[1]), a.key))
        for i in range(len(st.arcs)):
            for j in range(i + 1, len(st.arcs)):
                xs = arc_crossings(st.arcs[i], st.arcs[j], ctx)
                if xs:
                    st.cross[(i, j)] = xs
    return sts


# ---------------------------------------------------------------- combinatorial view

@dataclass
class StructView:
    """Baseline positions, crossings and point masks of one oriented substructure.

    Arcs are indexed ``0..n-1``; ``A[i] < B[i]`` are baseline positions of the
    arc ends in the oriented direction; ``cross[(i, j)]`` lists crossings as
    ``(frac along i, frac along j)``, fractions also in the oriented direction.
    """

    length: float
    A: list[float]
    B: list[float]
    disk: list[int]
    weight: list[float]
    pts: list[int]
    cross: dict[tuple[int, int], list[tuple[float, float]]]
    orientation: str = CCW
    sid: int = 0

    @property
    def n(self) -> int:
        return len(self.A)

    def crossings(self, i: int, j: int) -> list[tuple[float, float]]:
        if (i, j) in self.cross:
            return self.cross[(i, j)]
        if (j, i) in self.cross:
            return [(fj, fi) for fi, fj in self.cross[(j, i)]]
        return []

    def covered_points(self) -> int:
        out = 0
        for m in self.pts:
            out |= m
        return out

    def reversed(self) -> "StructView":
        L = self.length
        return StructView(
            L,
            [L - b for b in self.B],
            [L - a for a in self.A],
            list(self.disk),
            list(self.weight),
            list(self.pts),
            {k: [(1 - fi, 1 - fj) for fi, fj in v] for k, v in self.cross.items()},
            CW if self.orientation == CCW else CCW,
            self.sid,
        )


def make_view(st: Substructure) -> StructView:
    b = st.baseline
    A, B = [], []
    for a in st.arcs:
        s = b.rel(a.start_loc[1])
        ln = (a.end_loc[1] - a.start_loc[1]) % b.curve_length
        A.append(s)
        B.append(s + ln)
    v = StructView(
        b.length if not b.cyclic else b.curve_length,
        A, B,
        [a.disk_id for a in st.arcs],
        [a.weight for a in st.arcs],
        [a.points for a in st.arcs],
        {k: list(x) for k, x in st.cross.items()},
        CCW,
        st.id,
    )
    return v.reversed() if b.orientation == CW else v


def arc_order(a: int, c: int, st: "StructView | Substructure") -> str:
    v = st.view() if isinstance(st, Substructure) else st
    if a == c:
        return INCOMPARABLE
    if v.A[a] < v.A[c] and v.B[a] < v.B[c]:
        return EARLIER
    if v.A[c] < v.A[a] and v.B[c] < v.B[a]:
        return LATER
    return INCOMPARABLE


def precedes(v: StructView, a: int, c: int) -> bool:
    return v.A[a] < v.A[c] and v.B[a] < v.B[c]


def adjacent(v: StructView, a: int, c: int) -> bool:
    """``c`` is an adjacent successor of ``a``."""
    return precedes(v, a, c) and v.A[c] < v.B[a]


def first_adjacent_successor(a: int, from_frac: float, st: "StructView | Substructure") -> int | None:
    """Adjacent successor crossing ``a`` after ``from_frac`` closest to that start."""
    v = st.view() if isinstance(st, Substructure) else st
    best = None
    for c in range(v.n):
        if c == a or not adjacent(v, a, c):
            continue
        for fa, _ in v.crossings(a, c):
            if fa > from_frac and (best is None or (fa, c) < best):
                best = (fa, c)
    return None if best is None else best[1]


@dataclass(frozen=True)
class PathStep:
    arc: int  # -1 is the baseline
    start: float  # fraction along the arc, or baseline position
    end: float


@dataclass(frozen=True)
class ValidPath:
    steps: tuple[PathStep, ...]

    @property
    def arcs(self) -> tuple[int, ...]:
        return tuple(s.arc for s in self.steps if s.arc >= 0)


def envelope(st: "StructView | Substructure") -> ValidPath:
    v = st.view() if isinstance(st, Substructure) else st
    steps: list[PathStep] = []
    pos = 0.0
    if v.n == 0:
        return ValidPath((PathStep(-1, 0.0, v.length),))
    while True:
        # climb on the first arc that starts at or after the current baseline position
        starts = [(v.A[c], c) for c in range(v.n) if v.A[c] >= pos - 1e-12]
        if not starts:
            steps.append(PathStep(-1, pos, v.length))
            break
        a0, cur = min(starts)
        if a0 > pos + 1e-9:
            # an uncovered stretch is only legal if no arc spans it
            if any(v.A[c] < pos < v.B[c] for c in range(v.n)):
                raise BrokenChain(f"baseline position {pos} covered but not reachable")
            steps.append(PathStep(-1, pos, a0))
        frac = 0.0
        while True:
            nxt = first_adjacent_successor(cur, frac, v)
            if nxt is None:
                steps.append(PathStep(cur, frac, 1.0))
                pos = v.B[cur]
                break
            fa = min(x for x, _ in v.crossings(cur, nxt) if x > frac)
            fn = min(y for x, y in v.crossings(cur, nxt) if x == fa)
            steps.append(PathStep(cur, frac, fa))
            cur, frac = nxt, fn
        if any(v.A[c] < pos - 1e-9 and v.B[c] > pos + 1e-9 for c in range(v.n)):
            raise BrokenChain(f"envelope dropped to the baseline at {pos} under another arc")
        if pos >= v.length - 1e-9:
            break
    return ValidPath(tuple(steps))


def path_points(v: StructView, path: ValidPath) -> int:
    out = 0
    for a in path.arcs:
        out |= v.pts[a]
    return out


def self_intersections(v: StructView, required: int | None = None) -> list[tuple[int, int]]:
    """Pairs of non-overlapping arcs that cover a common point."""
    out = []
    for i in range(v.n):
        for j in range(v.n):
            if i != j and v.B[i] <= v.A[j] and (v.pts[i] & v.pts[j] & (required if required is not None else -1)):
                out.append((i, j))
    return out


def multi_crossings(v: StructView) -> list[tuple[int, int]]:
    return [k for k, xs in v.cross.items() if len(xs) > 1]


def baseline_polylines(sts: Sequence[Substructure], ctx: HContext) -> list[list[Point]]:
    return [ctx.sample(s.baseline.curve, s.baseline.start, s.baseline.length) for s in sts]


def envelope_polylines(sts: Sequence[Substructure], samples: int = 24) -> list[list[Point]]:
    """Arc pieces walked by each envelope, as point lists; baseline stretches are left out."""
    out = []
    for s in sts:
        v = s.view()
        for step in envelope(v).steps:
            if step.arc < 0:
                continue
            a = s.arcs[step.arc]
            f0, f1 = step.start, step.end
            if v.orientation == CW:
                f0, f1 = 1 - f0, 1 - f1
            out.append([a.point_at(f0 + (f1 - f0) * q / (samples - 1)) for q in range(samples)])
    return out


def dump_svg(path, sts: Sequence[Substructure], ctx: HContext, disks: Sequence[Disk],
             points: Sequence[Point], title: str = "") -> None:
    """Debug drawing: helper set dashed, baselines in green."""
    from pathlib import Path

    from .instance import Instance
    from .render import render_svg

    inst = Instance(tuple(disks), tuple(points), {})
    svg = render_svg(inst, helper=ctx.centers.keys(), baselines=baseline_polylines(sts, ctx), title=title)
    Path(path).write_text(svg)
