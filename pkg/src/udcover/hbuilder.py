"""Grow the helper set until the substructures around it are ready for the DP.

The builder starts from the square gadgets and repeatedly rebuilds the arcs and
substructures around the current helper set. Each pass runs the repair stages
in a fixed order (bridging arcs, orphan points, cyclic baselines, active-region
separation, double crossings, self-intersections, multi-overlaps, cycles, point
order) and the first stage that finds a problem adds disks to the helper set.
When a pass finds nothing the state satisfies every checker.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .gadgets import ActiveRegion, Gadget, SquareGrid, active_regions, build_gadgets, build_grid
from .geom import TOL, Disk, Point, dist
from .substructures import (
    CCW, CW, BrokenChain, HContext, StructView, Substructure, UncoveredArc, assign_points,
    build_substructures, envelope, precedes, uncovered_arcs,
)


class SingleMixtureDetected(Exception):
    pass


class NotSeparable(Exception):
    pass


class LabelConflict(Exception):
    pass


class CycleDetected(Exception):
    def __init__(self, msg: str, diagnostic: dict):
        super().__init__(msg)
        self.diagnostic = diagnostic


@dataclass
class HConfig:
    eps: float
    c0: float = 1.0
    angle_cap: float | None = None  # defaults to 8 * mu
    mu: float | None = None  # overrides the grid side derived from eps


@dataclass
class CutLedger:
    entries: list[dict] = field(default_factory=list)

    def add(self, op: str, disks: Iterable[int], sts: Iterable[int] = ()) -> None:
        self.entries.append({"op": op, "disks": sorted(set(disks)), "substructures": sorted(set(sts))})

    @property
    def total(self) -> int:
        return sum(len(e["disks"]) for e in self.entries)

    def counts(self) -> dict[str, int]:
        c: Counter = Counter()
        for e in self.entries:
            c[e["op"]] += len(e["disks"])
        return dict(sorted(c.items()))

    def to_json(self) -> str:
        return json.dumps({"entries": self.entries, "counts": self.counts(), "total": self.total},
                          sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "CutLedger":
        return CutLedger(list(json.loads(text)["entries"]))


# ---------------------------------------------------------------- relation graph

@dataclass
class RelationGraph:
    nodes: list[int]
    blue: set[tuple[int, int]]
    red: set[tuple[int, int]]

    def neighbors(self, s: int) -> list[tuple[int, str]]:
        out = []
        for a, b in sorted(self.blue):
            if s in (a, b):
                out.append((b if a == s else a, "blue"))
        for a, b in sorted(self.red):
            if s in (a, b):
                out.append((b if a == s else a, "red"))
        return out

    def degree(self, s: int, color: str) -> int:
        edges = self.blue if color == "blue" else self.red
        return sum(1 for e in edges if s in e)

    def is_matching(self, color: str) -> bool:
        return all(self.degree(s, color) <= 1 for s in self.nodes)

    def find_cycle(self) -> list[int] | None:
        """Nodes of some cycle (multi-edges count), or None."""
        adj: dict[int, list[tuple[int, int]]] = {s: [] for s in self.nodes}
        eid = 0
        for a, b in sorted(self.blue) + sorted(self.red):
            adj[a].append((b, eid))
            adj[b].append((a, eid))
            eid += 1
        seen: dict[int, int | None] = {}
        for root in self.nodes:
            if root in seen:
                continue
            seen[root] = None
            stack = [(root, -1)]
            parent = {root: None}
            while stack:
                u, via = stack.pop()
                for v, e in adj[u]:
                    if e == via:
                        continue
                    if v in seen:
                        # walk both ends back to the common ancestor
                        pu, pv = _ancestry(parent, u), _ancestry(parent, v)
                        common = next(x for x in pu if x in pv)
                        return pu[: pu.index(common) + 1] + list(reversed(pv[: pv.index(common)]))
                    seen[v] = u
                    parent[v] = u
                    stack.append((v, e))
        return None

    def components(self) -> list[list[int]]:
        comp: dict[int, int] = {}
        out = []
        for s in self.nodes:
            if s in comp:
                continue
            group, stack = [], [s]
            comp[s] = len(out)
            while stack:
                u = stack.pop()
                group.append(u)
                for v, _ in self.neighbors(u):
                    if v not in comp:
                        comp[v] = len(out)
                        stack.append(v)
            out.append(sorted(group))
        return out


def _ancestry(parent: dict, u: int) -> list[int]:
    out = [u]
    while parent.get(out[-1]) is not None:
        out.append(parent[out[-1]])
    return out


def assert_acyclic(graph: RelationGraph, positions: dict[int, Point] | None = None) -> RelationGraph:
    cyc = graph.find_cycle()
    if cyc is None:
        return graph
    diag: dict = {"cycle": cyc}
    if positions:
        poly = [positions[s] for s in cyc if s in positions]
        diag["polygon"] = [list(p) for p in poly]
        turns = []
        for k in range(len(poly)):
            a, b, c = poly[k - 1], poly[k], poly[(k + 1) % len(poly)]
            t = math.atan2(c[1] - b[1], c[0] - b[0]) - math.atan2(b[1] - a[1], b[0] - a[0])
            turns.append((t + math.pi) % (2 * math.pi) - math.pi)
        diag["turns"] = turns
    raise CycleDetected(f"relation graph has a cycle through {cyc}", diag)


def orient_baselines(graph: RelationGraph) -> dict[int, str]:
    """Alternate cw/ccw along every path; the smallest-id endpoint is ccw."""
    out: dict[int, str] = {}
    for comp in graph.components():
        ends = [s for s in comp if len(graph.neighbors(s)) <= 1]
        start = min(ends) if ends else min(comp)
        out[start] = CCW
        stack = [start]
        while stack:
            u = stack.pop()
            for v, _ in graph.neighbors(u):
                if v not in out:
                    out[v] = CW if out[u] == CCW else CCW
                    stack.append(v)
    return out


# ---------------------------------------------------------------- label helpers

def order_separable(A1: Iterable[int], A2: Iterable[int], v: StructView) -> bool:
    A2 = list(A2)
    return all(precedes(v, a, b) for a in A1 for b in A2)


def l_segments(seq: Sequence) -> list[tuple[int, int, object]]:
    """Long segments ``(start, end, label)`` of an envelope label sequence.

    A nonzero label ``i`` absorbs the longest stretch made only of ``0`` and ``i``
    that starts and ends with ``i``; a run of zeros outside such a stretch is a
    segment of its own.
    """
    out = []
    k, n = 0, len(seq)
    while k < n:
        lab = seq[k]
        j = last = k
        while j < n and seq[j] in (0, lab):
            if seq[j] == lab:
                last = j
            j += 1
        out.append((k, last, lab))
        k = last + 1
    return out


def compress_labels(seq: Sequence) -> list:
    """One letter per long segment, so ``0101020`` becomes ``01020``."""
    return [lab for _, _, lab in l_segments(seq)]


def has_abab(seq: Sequence) -> bool:
    """True if some ``a..b..a..b`` alternation occurs (order-2 sequence violation)."""
    s = compress_labels(seq)
    letters = sorted(set(s), key=str)
    for a in letters:
        for b in letters:
            if a == b:
                continue
            state = 0
            for x in s:
                if x == (a, b)[state % 2]:
                    state += 1
                    if state == 4:
                        return True
    return False


def label_cut(v: StructView, A1: Iterable[int], A2: Iterable[int]) -> set[int]:
    """Arc indices (at most two) whose disks split ``A1`` from ``A2`` along the envelope."""
    A1, A2 = sorted(set(A1)), sorted(set(A2))
    if not A1 or not A2:
        return set()
    if not order_separable(A1, A2, v):
        raise NotSeparable("label sets are not order-separable")
    try:
        env = [a for a in envelope(v).arcs]
    except BrokenChain:
        env = sorted(range(v.n), key=lambda a: (v.A[a], a))
    S1, S2 = set(A1), set(A2)
    for e in env:
        if e in S1 or e in S2:
            continue
        if all(precedes(v, a, e) for a in A1) and all(precedes(v, e, b) for b in A2):
            return {e}
    # label 1 until the envelope passes every arc of A1
    labels = [1 if (e in S1 or not all(precedes(v, a, e) for a in A1 if a != e)) and e not in S2 else 2
              for e in env]
    for k in range(len(env) - 1):
        if labels[k] == 1 and labels[k + 1] == 2:
            return {env[k], env[k + 1]}
    # the envelope never switches: cut right after the last A1 arc along the baseline
    last = max(A1, key=lambda a: (v.B[a], a))
    nxt = [e for e in env if v.A[e] > v.A[last]]
    return {last} | ({nxt[0]} if nxt else set())


def isolate_active_region(v: StructView, region: set[int]) -> set[int]:
    """Up to two label cuts leaving ``region`` alone in its substructure."""
    others = [a for a in range(v.n) if a not in region]
    if not others or not region:
        return set()
    before = [a for a in others if all(precedes(v, a, r) for r in region)]
    after = [a for a in others if all(precedes(v, r, a) for r in region)]
    out: set[int] = set()
    if before:
        out |= label_cut(v, before, region)
    if after:
        out |= label_cut(v, region, after)
    return out


# ---------------------------------------------------------------- block state

@dataclass
class RegionClass:
    key: int
    regions: list[tuple[tuple[int, int], int]]  # (square, sign)
    disks: set[int]


@dataclass
class BlockState:
    pool: dict[int, Disk]
    points: list[Point]
    grid: SquareGrid
    config: HConfig
    gadgets: dict[tuple[int, int], Gadget] = field(default_factory=dict)
    H: set[int] = field(default_factory=set)
    gadget_ids: set[int] = field(default_factory=set)
    cut_ids: set[int] = field(default_factory=set)
    ledger: CutLedger = field(default_factory=CutLedger)
    ctx: HContext | None = None
    arcs: list[UncoveredArc] = field(default_factory=list)
    sts: list[Substructure] = field(default_factory=list)
    required: list[int] = field(default_factory=list)
    regions: list[ActiveRegion] = field(default_factory=list)
    region_arcs: dict[int, set[int]] = field(default_factory=dict)  # region index -> arc keys
    merged: dict[int, int] = field(default_factory=dict)  # region index -> class representative
    graph: RelationGraph | None = None
    orientation: dict[int, str] = field(default_factory=dict)
    stats: Counter = field(default_factory=Counter)

    @property
    def K(self) -> int:
        return self.grid.K

    def st_of_arc(self) -> dict[int, int]:
        return {a.key: a.st_id for a in self.arcs if a.st_id is not None}

    def arc_by_key(self) -> dict[int, UncoveredArc]:
        return {a.key: a for a in self.arcs}


def init_state(pool: Sequence[Disk], points: Sequence[Point], block_origin: Point, L: float,
               config: HConfig) -> BlockState:
    grid = build_grid((block_origin, L), config.eps)
    if config.mu is not None:
        K = max(1, math.ceil(L / config.mu - 1e-12))
        grid = SquareGrid(L / K, K, block_origin, L)
    st = BlockState({d.id: d for d in pool}, list(points), grid, config)
    st.gadgets = build_gadgets(sorted(pool, key=lambda d: d.id), grid)
    for sq, g in st.gadgets.items():
        st.gadget_ids.update(g.disk_ids)
        st.ledger.add("gadget", g.disk_ids)
    st.H = set(st.gadget_ids)
    rebuild(st)
    return st


def rebuild(st: BlockState) -> None:
    hd = [st.pool[i] for i in sorted(st.H)]
    st.ctx = HContext(hd)
    st.required = [k for k, p in enumerate(st.points) if not st.ctx.covers(p)] if hd else list(range(len(st.points)))
    st.arcs = []
    for i in sorted(st.pool):
        if i in st.H:
            continue
        d = st.pool[i]
        g = st.gadgets.get(st.grid.square_of(d.center))
        if g is None or g.singleton or not hd:
            continue
        st.arcs.extend(uncovered_arcs(d, st.ctx, g, key0=len(st.arcs)))
    for k, a in enumerate(st.arcs):
        a.key = k
    assign_points(st.arcs, st.ctx, st.points, st.required)
    # arcs that cover no point never help a path
    st.arcs = [a for a in st.arcs if a.points or a.bridging]
    for k, a in enumerate(st.arcs):
        a.key = k
        a.st_id = None
    st.sts = build_substructures([a for a in st.arcs if not a.bridging], st.ctx)
    _find_regions(st)
    st.graph = None
    st.orientation = {}


def _find_regions(st: BlockState) -> None:
    free = [d for i, d in sorted(st.pool.items()) if i not in st.H]
    st.regions = []
    for sq, g in st.gadgets.items():
        if g.singleton:
            continue
        st.regions.extend(active_regions(g, free, exclude=st.H))
    st.region_arcs = {}
    for r, reg in enumerate(st.regions):
        g = st.gadgets[reg.square]
        keys = {a.key for a in st.arcs
                if a.disk_id in reg.disk_ids and not a.bridging and g.side(a.point_at(0.5)) in (reg.sign, 0)}
        st.region_arcs[r] = keys
    st.merged = {r: r for r in range(len(st.regions))}


def _class(st: BlockState, r: int) -> int:
    while st.merged[r] != r:
        r = st.merged[r]
    return r


def _regions_in(st: BlockState, s: Substructure) -> dict[int, set[int]]:
    """Region class -> local arc indices of ``s`` belonging to it."""
    local = {a.key: k for k, a in enumerate(s.arcs)}
    out: dict[int, set[int]] = {}
    for r, keys in st.region_arcs.items():
        hit = {local[k] for k in keys if k in local}
        if hit:
            out.setdefault(_class(st, r), set()).update(hit)
    return out


# ---------------------------------------------------------------- stages

def _add(st: BlockState, op: str, disks: Iterable[int], sts: Iterable[int] = ()) -> bool:
    new = sorted(set(disks) - st.H)
    if not new:
        return False
    st.H.update(new)
    st.cut_ids.update(new)
    st.ledger.add(op, new, sts)
    rebuild(st)
    return True


def _disks_of(s: Substructure, local: Iterable[int]) -> list[int]:
    return [s.arcs[k].disk_id for k in local]


def fix_bridging(st: BlockState) -> bool:
    bad = [a.disk_id for a in st.arcs if a.bridging]
    return _add(st, "bridge", bad[:1]) if bad else False


def fix_orphans(st: BlockState) -> bool:
    covered = 0
    for a in st.arcs:
        covered |= a.points
    for b, k in enumerate(st.required):
        if not (covered >> b) & 1:
            p = st.points[k]
            cands = [d for i, d in sorted(st.pool.items()) if i not in st.H and dist(p, d.center) <= 1.0 + TOL]
            if not cands:
                continue  # infeasible with this pool; the DP reports it
            best = min(cands, key=lambda d: (d.weight, d.id))
            return _add(st, "orphan", [best.id])
    return False


def break_cyclic_baselines(st: BlockState) -> bool:
    for s in st.sts:
        if not s.baseline.cyclic or not s.arcs:
            continue
        in_region = set()
        for ks in _regions_in(st, s).values():
            in_region |= ks
        plain = [k for k in range(len(s.arcs)) if k not in in_region]
        v = s.view()
        if plain:
            pick = max(plain, key=lambda k: (v.B[k] - v.A[k], -k))
            return _add(st, "cycle", _disks_of(s, [pick]), [s.id])
        return _add(st, "cycle", _disks_of(s, [0]), [s.id])
    return False


def merge_or_mark_mixtures(st: BlockState, strict: bool = False) -> int:
    """Merge region pairs of two gadgets that interleave on both halfplanes.

    Returns the number of merges. A pair that interleaves on one halfplane only
    is counted in ``stats['single_mixture']`` (or raised when ``strict``).
    """
    merges = 0
    by_gadget: dict[tuple[int, int], list[int]] = {}
    for r, reg in enumerate(st.regions):
        by_gadget.setdefault(reg.square, []).append(r)
    sq_list = sorted(by_gadget)
    cap = st.config.angle_cap if st.config.angle_cap is not None else 8 * st.grid.mu
    for x in range(len(sq_list)):
        for y in range(x + 1, len(sq_list)):
            mixes = []
            for r1 in by_gadget[sq_list[x]]:
                for r2 in by_gadget[sq_list[y]]:
                    if _mixed(st, r1, r2):
                        mixes.append((r1, r2))
            if len(mixes) >= 2:
                g1, g2 = st.gadgets[sq_list[x]], st.gadgets[sq_list[y]]
                if max(abs(sq_list[x][0] - sq_list[y][0]), abs(sq_list[x][1] - sq_list[y][1])) > 1:
                    st.stats["mixture_not_adjacent"] += 1
                ang = math.acos(max(-1.0, min(1.0, abs(g1.axis.x * g2.axis.x + g1.axis.y * g2.axis.y))))
                if ang > cap:
                    st.stats["mixture_angle"] += 1
                for r1, r2 in mixes:
                    a, b = _class(st, r1), _class(st, r2)
                    if a != b:
                        st.merged[max(a, b)] = min(a, b)
                        merges += 1
            elif len(mixes) == 1:
                st.stats["single_mixture"] += 1
                if strict:
                    raise SingleMixtureDetected(f"gadgets {sq_list[x]} and {sq_list[y]} mix on one side only")
    return merges


def _mixed(st: BlockState, r1: int, r2: int) -> bool:
    sid = st.st_of_arc()
    for s in st.sts:
        local = {a.key: k for k, a in enumerate(s.arcs)}
        A1 = [local[k] for k in st.region_arcs[r1] if sid.get(k) == s.id]
        A2 = [local[k] for k in st.region_arcs[r2] if sid.get(k) == s.id]
        if A1 and A2:
            v = s.view()
            if set(A1) & set(A2):
                return True
            if not order_separable(A1, A2, v) and not order_separable(A2, A1, v):
                return True
    return False


def fix_region_uniqueness(st: BlockState) -> bool:
    for s in st.sts:
        classes = _regions_in(st, s)
        if len(classes) <= 1:
            continue
        keys = sorted(classes)
        A1, A2 = classes[keys[0]], classes[keys[1]]
        v = s.view()
        try:
            if order_separable(A1 - A2, A2 - A1, v) and not (A1 & A2):
                cut = label_cut(v, A1, A2)
            elif order_separable(A2 - A1, A1 - A2, v) and not (A1 & A2):
                cut = label_cut(v, A2, A1)
            else:
                raise NotSeparable("interleaved regions")
            if _add(st, "region", _disks_of(s, cut), [s.id]):
                return True
        except NotSeparable:
            st.stats["region_fallback"] += 1
        smaller = min((A1, A2), key=lambda A: (len(A), sorted(A)))
        if _add(st, "region", _disks_of(s, smaller), [s.id]):
            return True
    return False


def fix_double_crossings(st: BlockState) -> bool:
    for s in st.sts:
        for (i, j), xs in sorted(s.cross.items()):
            if len(xs) > 1:
                a, b = s.arcs[i], s.arcs[j]
                pick = max((a, b), key=lambda x: (x.central_angle, x.key))
                if _add(st, "double-crossing", [pick.disk_id], [s.id]):
                    return True
    return False


def self_intersecting_pairs(v: StructView) -> list[tuple[int, int]]:
    return [(i, j) for i in range(v.n) for j in range(v.n)
            if i != j and v.B[i] <= v.A[j] and (v.pts[i] & v.pts[j])]


def eliminate_self_intersections(st: BlockState) -> bool:
    for s in st.sts:
        v = s.view()
        bad = self_intersecting_pairs(v)
        if not bad:
            continue
        i, j = min(bad, key=lambda p: (v.A[p[1]], p))
        cut = label_cut(v, [i], [j])
        if _add(st, "self-intersection", _disks_of(s, cut), [s.id]):
            return True
        if _add(st, "self-intersection", [s.arcs[j].disk_id], [s.id]):
            return True
    return False


def build_relation_graph(st: BlockState) -> RelationGraph:
    nodes = [s.id for s in st.sts]
    mask = {s.id: s.view().covered_points() for s in st.sts}
    red = set()
    for x in range(len(nodes)):
        for y in range(x + 1, len(nodes)):
            if mask[nodes[x]] & mask[nodes[y]]:
                red.add((nodes[x], nodes[y]))
    # substructures holding the two halfplane regions of one gadget
    holder: dict[tuple[int, int], dict[int, set[int]]] = {}
    sid = st.st_of_arc()
    for r, reg in enumerate(st.regions):
        for k in st.region_arcs[r]:
            if sid.get(k) is not None:
                holder.setdefault(reg.square, {}).setdefault(reg.sign, set()).add(sid[k])
    blue = set()
    for sq, sides in holder.items():
        for a in sides.get(1, ()):
            for b in sides.get(-1, ()):
                if a != b:
                    e = (min(a, b), max(a, b))
                    if e not in red:
                        blue.add(e)
    return RelationGraph(nodes, blue, red)


def _overlap_arcs(s: Substructure, other_mask: int) -> list[int]:
    v = s.view()
    return [k for k in range(v.n) if v.pts[k] & other_mask]


def _envelope_arcs(v: StructView) -> list[int]:
    try:
        return list(envelope(v).arcs)
    except BrokenChain:
        return sorted(range(v.n), key=lambda a: (v.A[a], a))


def segment_cuts(env: Sequence[int], labels: Sequence[int]) -> set[int]:
    """Last arc of each long segment and first arc of the next one."""
    segs = l_segments(labels)
    out: set[int] = set()
    for (_, end, _), (start, _, _) in zip(segs, segs[1:]):
        out |= {env[end], env[start]}
    return out


def envelope_labels(st: BlockState, s: Substructure) -> list[int]:
    """Per envelope arc: 0, or the id of the one foreign substructure sharing its points."""
    v = s.view()
    masks = {t.id: t.view().covered_points() for t in st.sts if t.id != s.id}
    env = _envelope_arcs(v)
    out = []
    for e in env:
        owners = [t for t, m in sorted(masks.items()) if v.pts[e] & m]
        if len(owners) > 1:
            raise LabelConflict(f"arc {e} of substructure {s.id} shares points with {owners}")
        out.append(owners[0] + 1 if owners else 0)
    return out


def cut_multi_overlaps(st: BlockState) -> bool:
    g = build_relation_graph(st)
    for s in st.sts:
        if g.degree(s.id, "red") <= 1:
            continue
        partners = sorted(b if a == s.id else a for a, b in g.red if s.id in (a, b))
        v = s.view()
        try:
            labels = envelope_labels(st, s)
            if has_abab([x for x in labels if x]):
                st.stats["abab"] += 1
            if len({x for x in labels if x}) > 1:
                cut = segment_cuts(_envelope_arcs(v), labels)
                if cut and _add(st, "multi-overlap", _disks_of(s, cut), [s.id]):
                    return True
        except LabelConflict:
            st.stats["label_conflict"] += 1
        masks = {t.id: t.view().covered_points() for t in st.sts}
        AX = set(_overlap_arcs(s, masks[partners[0]]))
        AY = set(_overlap_arcs(s, masks[partners[1]]))
        cut: set[int] = set()
        try:
            if not (AX & AY) and order_separable(AX, AY, v):
                cut = label_cut(v, AX, AY)
            elif not (AX & AY) and order_separable(AY, AX, v):
                cut = label_cut(v, AY, AX)
        except NotSeparable:
            cut = set()
        if cut and _add(st, "multi-overlap", _disks_of(s, cut), [s.id]):
            return True
        smaller = min((AX, AY), key=lambda A: (len(A), sorted(A)))
        if _add(st, "multi-overlap", _disks_of(s, smaller), [s.id]):
            return True
    return False


def fix_blue_matching(st: BlockState) -> bool:
    g = build_relation_graph(st)
    for s in st.sts:
        if g.degree(s.id, "blue") > 1:
            # drop the region arcs of all but the first partner side
            classes = _regions_in(st, s)
            ks = sorted(classes)
            if len(ks) > 1:
                return _add(st, "blue", _disks_of(s, classes[ks[-1]]), [s.id])
            st.stats["blue_degree"] += 1
    return False


def repair_cycles(st: BlockState) -> bool:
    g = build_relation_graph(st)
    cyc = g.find_cycle()
    if cyc is None:
        return False
    by = {s.id: s for s in st.sts}
    # remove one overlap on the cycle by covering its shared points
    for k in range(len(cyc)):
        a, b = sorted((cyc[k], cyc[(k + 1) % len(cyc)]))
        if (a, b) in g.red:
            sa, sb = by[a], by[b]
            ma, mb = sa.view().covered_points(), sb.view().covered_points()
            ka, kb = _overlap_arcs(sa, mb), _overlap_arcs(sb, ma)
            wa = sum(sa.arcs[i].weight for i in ka)
            wb = sum(sb.arcs[i].weight for i in kb)
            s, ks = (sa, ka) if (wa, a) <= (wb, b) else (sb, kb)
            if _add(st, "cycle-repair", _disks_of(s, ks), [a, b]):
                return True
    for k in range(len(cyc)):
        s = by[cyc[k]]
        classes = _regions_in(st, s)
        if classes:
            if _add(st, "cycle-repair", _disks_of(s, classes[min(classes)]), [s.id]):
                return True
    return False


def point_order_violations(views: dict[int, StructView], graph: RelationGraph) -> list[tuple]:
    """Quadruples breaking point-order consistency between overlapping substructures."""
    out = []
    for s, t in sorted(graph.red):
        vs, vt = views[s], views[t]
        shared = vs.covered_points() & vt.covered_points()
        bits = [b for b in range(shared.bit_length()) if (shared >> b) & 1]
        for x in range(len(bits)):
            for y in range(x + 1, len(bits)):
                p1, p2 = 1 << bits[x], 1 << bits[y]
                A1 = [a for a in range(vs.n) if vs.pts[a] & p1 and not vs.pts[a] & p2]
                A2 = [a for a in range(vs.n) if vs.pts[a] & p2 and not vs.pts[a] & p1]
                B1 = [b for b in range(vt.n) if vt.pts[b] & p1 and not vt.pts[b] & p2]
                B2 = [b for b in range(vt.n) if vt.pts[b] & p2 and not vt.pts[b] & p1]
                for a1 in A1:
                    for a2 in A2:
                        fa = 1 if precedes(vs, a1, a2) else -1 if precedes(vs, a2, a1) else 0
                        if not fa:
                            continue
                        for b1 in B1:
                            for b2 in B2:
                                fb = 1 if precedes(vt, b1, b2) else -1 if precedes(vt, b2, b1) else 0
                                if fb and fb != fa:
                                    out.append((s, t, bits[x], bits[y], a1, a2, b1, b2))
    return out


def oriented_views(st: BlockState) -> dict[int, StructView]:
    out = {}
    for s in st.sts:
        s.baseline.orientation = st.orientation.get(s.id, CCW)
        s.invalidate()
        out[s.id] = s.view()
    return out


def enforce_point_order_consistency(st: BlockState) -> bool:
    st.graph = build_relation_graph(st)
    st.orientation = orient_baselines(st.graph)
    views = oriented_views(st)
    bad = point_order_violations(views, st.graph)
    if not bad:
        return False
    s, t, _, _, a1, a2, b1, b2 = bad[0]
    by = {x.id: x for x in st.sts}
    # cut in the substructure that holds no active region
    if _regions_in(st, by[s]) and not _regions_in(st, by[t]):
        host, arcs = by[t], (b1, b2)
    else:
        host, arcs = by[s], (a1, a2)
    pick = min(arcs, key=lambda k: (host.arcs[k].weight, host.arcs[k].disk_id))
    return _add(st, "point-order", [host.arcs[pick].disk_id], [s, t])


STAGES = (
    fix_bridging,
    fix_orphans,
    break_cyclic_baselines,
    fix_region_uniqueness,
    fix_double_crossings,
    eliminate_self_intersections,
    cut_multi_overlaps,
    fix_blue_matching,
    repair_cycles,
    enforce_point_order_consistency,
)


def run_pipeline(st: BlockState, max_rounds: int = 10_000) -> BlockState:
    merge_or_mark_mixtures(st)
    for _ in range(max_rounds):
        for stage in STAGES:
            if stage(st):
                merge_or_mark_mixtures(st)
                break
        else:
            break
    st.graph = build_relation_graph(st)
    assert_acyclic(st.graph, _positions(st))
    st.orientation = orient_baselines(st.graph)
    oriented_views(st)
    return st


def _positions(st: BlockState) -> dict[int, Point]:
    out = {}
    for s in st.sts:
        xs = [a.point_at(0.5) for a in s.arcs]
        if xs:
            out[s.id] = Point(sum(p.x for p in xs) / len(xs), sum(p.y for p in xs) / len(xs))
    return out


# ---------------------------------------------------------------- checkers

def check_properties(st: BlockState) -> dict[str, int]:
    """Violation counts of every post-pipeline property."""
    out: Counter = Counter()
    for s in st.sts:
        if len(_regions_in(st, s)) > 1:
            out["region_uniqueness"] += 1
        v = s.view()
        out["self_intersection"] += len(self_intersecting_pairs(v))
        out["double_crossing"] += sum(1 for xs in s.cross.values() if len(xs) > 1)
        if s.baseline.cyclic:
            out["cyclic"] += 1
    for a in st.arcs:
        if a.central_angle >= math.pi:
            out["central_angle"] += 1
        if a.bridging:
            out["bridging"] += 1
    g = build_relation_graph(st)
    if not g.is_matching("red"):
        out["red_matching"] += 1
    if not g.is_matching("blue"):
        out["blue_matching"] += 1
    if g.find_cycle() is not None:
        out["cycle"] += 1
    masks = [s.view().covered_points() for s in st.sts]
    for b in range(len(st.required)):
        if sum(1 for m in masks if (m >> b) & 1) > 2:
            out["point_in_three"] += 1
    orient = orient_baselines(g)
    views = {}
    for s in st.sts:
        v = s.view()
        views[s.id] = v.reversed() if orient.get(s.id, CCW) != v.orientation else v
    out["point_order"] += len(point_order_violations(views, g))
    if st.ledger.total > 64 * st.K * st.K:
        out["ledger"] += 1
    return {k: v for k, v in sorted(out.items()) if v}
