"""Minimum-weight valid paths over one or more substructures.

A state holds one handle per substructure: the arc currently followed (or the
baseline, ``BASE``) and the index of the next event on it. Events on an arc are
its crossings with later arcs in frac order followed by its end; events on the
baseline are arc starts in baseline order followed by the terminal.

The points still owed at a state are those of every arc reachable from the
handles, minus those of the arcs currently followed. A disk is ready when it
is followed somewhere and not reachable anywhere else; moving off its arcs pays
its weight exactly once.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

from .instance import CUT, DP, GADGET, GUESS, Instance, Solution, uncovered_points, weight_of
from .substructures import PathStep, StructView, ValidPath

BASE = -1
UNPROCESSED = "unprocessed"
PROCESSING = "processing"
DONE = "done"
DEFAULT_STATE_BUDGET = 2_000_000


class NoFeasiblePath(Exception):
    pass


class StuckState(Exception):
    pass


class InfeasibleAssembly(Exception):
    pass


class StateBudgetExceeded(Exception):
    pass


Handle = tuple[int, int]


@dataclass(frozen=True)
class DPState:
    handles: tuple[Handle, ...]


class _Track:
    """Event lists and reachability for one oriented substructure."""

    def __init__(self, v: StructView):
        self.v = v
        n = v.n
        self.ev: dict[int, list[tuple[float, int, float]]] = {}
        for i in range(n):
            evs = []
            for j in range(n):
                if j != i and v.A[i] < v.A[j] and v.B[i] < v.B[j]:
                    for fi, fj in v.crossings(i, j):
                        evs.append((fi, j, fj))
            evs.sort()
            evs.append((1.0, BASE, 0.0))
            self.ev[i] = evs
        starts = sorted((v.A[j], j) for j in range(n))
        self.ev[BASE] = [(a, j, 0.0) for a, j in starts] + [(math.inf, BASE, 0.0)]
        self.last = len(self.ev[BASE]) - 1
        self._reach: dict[Handle, tuple[int, int]] = {}

    def next_on(self, j: int, frac: float) -> int:
        evs = self.ev[j]
        for k, (f, _, _) in enumerate(evs):
            if f > frac or k == len(evs) - 1:
                return k
        return len(evs) - 1

    def base_after(self, pos: float) -> int:
        for k, (a, _, _) in enumerate(self.ev[BASE]):
            if a > pos:
                return k
        return self.last

    def step_t(self, h: Handle) -> Handle | None:
        """Leave the current arc (or baseline) along the event at ``h``."""
        i, k = h
        _, j, fj = self.ev[i][k]
        if i == BASE:
            return None if j == BASE else (j, 0)
        if j == BASE:
            return (BASE, self.base_after(self.v.B[i]))
        return (j, self.next_on(j, fj))

    def reach(self, h: Handle) -> tuple[int, int]:
        """Bitmasks of reachable arcs and of the points they cover."""
        got = self._reach.get(h)
        if got is not None:
            return got
        # iterative post-order to keep deep tracks off the call stack
        stack = [h]
        while stack:
            cur = stack[-1]
            if cur in self._reach:
                stack.pop()
                continue
            deps = self._deps(cur)
            missing = [d for d in deps if d not in self._reach]
            if missing:
                stack.extend(missing)
                continue
            arcs = pts = 0
            i, k = cur
            _, j, _ = self.ev[i][k]
            if i == BASE and j != BASE:
                arcs |= 1 << j
                pts |= self.v.pts[j]
            elif i != BASE and j != BASE:
                arcs |= 1 << j
                pts |= self.v.pts[j]
            for d in deps:
                a, p = self._reach[d]
                arcs |= a
                pts |= p
            self._reach[cur] = (arcs, pts)
            stack.pop()
        return self._reach[h]

    def _deps(self, h: Handle) -> list[Handle]:
        i, k = h
        if i == BASE and k == self.last:
            return []
        out = []
        t = self.step_t(h)
        if t is not None:
            out.append(t)
        if self.ev[i][k][1] != BASE:
            out.append((i, k + 1))
        return out

    def base_pts(self, h: Handle) -> int:
        return 0 if h[0] == BASE else self.v.pts[h[0]]


class IncidenceGraph:
    """Disk-substructure labels at a state."""

    def __init__(self, tracks: Sequence[_Track]):
        self.tracks = tracks
        self.disk_arcs: dict[int, list[tuple[int, int]]] = {}
        for s, t in enumerate(tracks):
            for a, d in enumerate(t.v.disk):
                self.disk_arcs.setdefault(d, []).append((s, a))
        self.weight = {}
        for t in tracks:
            for d, w in zip(t.v.disk, t.v.weight):
                self.weight[d] = w

    def labels(self, state: DPState, disk: int) -> dict[int, str]:
        out: dict[int, str] = {}
        for s, a in self.disk_arcs[disk]:
            h = state.handles[s]
            if h[0] == a:
                out[s] = PROCESSING
            elif out.get(s) != PROCESSING:
                if (self.tracks[s].reach(h)[0] >> a) & 1:
                    out[s] = UNPROCESSED
                else:
                    out.setdefault(s, DONE)
        return out

    def ready(self, state: DPState) -> list[tuple[int, tuple[int, ...]]]:
        """Ready disks in id order, each with the substructures it is processing in."""
        cands = sorted({self.tracks[s].v.disk[h[0]] for s, h in enumerate(state.handles) if h[0] != BASE})
        out = []
        for d in cands:
            lab = self.labels(state, d)
            if UNPROCESSED in lab.values():
                continue
            out.append((d, tuple(s for s in sorted(lab) if lab[s] == PROCESSING)))
        return out


ReadySet = list


def subproblem_points(tracks: Sequence[_Track], state: DPState, required: int) -> int:
    reach = base = 0
    for t, h in zip(tracks, state.handles):
        reach |= t.reach(h)[1]
        base |= t.base_pts(h)
    return reach & required & ~base


@dataclass
class DPResult:
    weight: float
    paths: list[ValidPath]
    disks: frozenset[int]
    states: int
    value: float = 0.0


class _Solver:
    def __init__(self, views: Sequence[StructView], required: int, budget: int, trace: IO[str] | None):
        self.tracks = [_Track(v) for v in views]
        self.graph = IncidenceGraph(self.tracks)
        self.required = required
        self.budget = budget
        self.trace = trace
        self.memo: dict[tuple[Handle, ...], tuple[float, tuple | None]] = {}
        self.stuck = 0

    def owed(self, hs: tuple[Handle, ...]) -> int:
        return subproblem_points(self.tracks, DPState(hs), self.required)

    def moves(self, hs: tuple[Handle, ...]):
        """Candidate transitions in tie-break order: (cost, next handles, disk or None)."""
        cur = self.owed(hs)
        out = []
        for s, t in enumerate(self.tracks):
            i, k = hs[s]
            _, j, _ = t.ev[i][k]
            if j == BASE:
                continue
            b = hs[:s] + ((i, k + 1),) + hs[s + 1:]
            if self.owed(b) == cur:
                out.append((0.0, b, None))
            if i == BASE:
                nt = hs[:s] + (t.step_t(hs[s]),) + hs[s + 1:]
                if self._no_loss(cur, nt):
                    out.append((0.0, nt, None))
        for d, procs in self.graph.ready(DPState(hs)):
            nh = list(hs)
            for s in procs:
                nh[s] = self.tracks[s].step_t(hs[s])
            nt = tuple(nh)
            if self._no_loss(cur, nt):
                out.append((self.graph.weight[d], nt, d))
        return out

    def _no_loss(self, cur: int, nt: tuple[Handle, ...]) -> bool:
        base = 0
        for t, h in zip(self.tracks, nt):
            base |= t.base_pts(h)
        return cur & ~(self.owed(nt) | base) == 0

    def final(self, hs: tuple[Handle, ...]) -> bool:
        return all(h == (BASE, t.last) for t, h in zip(self.tracks, hs))

    def solve(self) -> float:
        start = tuple((BASE, 0) for _ in self.tracks)
        stack = [start]
        while stack:
            hs = stack[-1]
            if hs in self.memo:
                stack.pop()
                continue
            if self.final(hs):
                self._store(hs, 0.0 if self.owed(hs) == 0 else math.inf, None)
                stack.pop()
                continue
            mv = self.moves(hs)
            pending = [m[1] for m in mv if m[1] not in self.memo]
            if pending:
                stack.extend(pending)
                continue
            if not mv and not self._structural(hs):
                self.stuck += 1
            best, arg = math.inf, None
            for cost, nt, d in mv:
                val = cost + self.memo[nt][0]
                if val < best:
                    best, arg = val, (cost, nt, d)
            self._store(hs, best, arg)
            stack.pop()
        return self.memo[start][0]

    def _structural(self, hs) -> bool:
        # some event could fire if the point checks allowed it
        if any(t.ev[h[0]][h[1]][1] != BASE for t, h in zip(self.tracks, hs)):
            return True
        return bool(self.graph.ready(DPState(hs)))

    def _store(self, hs, val, arg) -> None:
        self.memo[hs] = (val, arg)
        if len(self.memo) > self.budget:
            raise StateBudgetExceeded(f"more than {self.budget} DP states")
        if self.trace is not None:
            rec = {"state": [list(h) for h in hs], "value": None if math.isinf(val) else val,
                   "disk": None if arg is None else arg[2]}
            self.trace.write(json.dumps(rec, sort_keys=True) + "\n")

    def paths(self) -> tuple[list[ValidPath], set[int]]:
        hs = tuple((BASE, 0) for _ in self.tracks)
        steps: list[list[PathStep]] = [[] for _ in self.tracks]
        entry = [0.0 for _ in self.tracks]
        disks: set[int] = set()
        while not self.final(hs):
            _, arg = self.memo[hs]
            cost, nt, d = arg
            if d is not None:
                disks.add(d)
            for s, (h0, h1) in enumerate(zip(hs, nt)):
                if h0[0] != h1[0]:
                    t = self.tracks[s]
                    i, k = h0
                    if i == BASE:
                        steps[s].append(PathStep(BASE, entry[s], t.v.A[h1[0]]))
                        entry[s] = 0.0
                    else:
                        f, j, fj = t.ev[i][k]
                        steps[s].append(PathStep(i, entry[s], f))
                        entry[s] = t.v.B[i] if j == BASE else fj
            hs = nt
        for s, t in enumerate(self.tracks):
            steps[s].append(PathStep(BASE, entry[s], t.v.length))
        return [ValidPath(tuple(x)) for x in steps], disks


def solve_component(views: Sequence[StructView], required: int, budget: int = DEFAULT_STATE_BUDGET,
                    trace: IO[str] | None = None) -> DPResult:
    """Minimum total weight of one valid path per substructure covering ``required``.

    ``required`` is a point bitmask; bits no arc covers make the problem infeasible.
    """
    if not views:
        if required:
            raise NoFeasiblePath("points remain but there are no substructures")
        return DPResult(0.0, [], frozenset(), 0)
    cover = 0
    for v in views:
        cover |= v.covered_points()
    if required & ~cover:
        raise NoFeasiblePath(f"points {_bits(required & ~cover)} are covered by no arc")
    solver = _Solver(views, required, budget, trace)
    val = solver.solve()
    if math.isinf(val):
        if solver.stuck:
            raise StuckState(f"{solver.stuck} reachable states have no ready disk")
        raise NoFeasiblePath("no valid paths cover the required points")
    paths, disks = solver.paths()
    weights = solver.graph.weight
    total = math.fsum(weights[d] for d in sorted(disks))
    return DPResult(total, paths, frozenset(disks), len(solver.memo), val)


def solve_two(v1: StructView, v2: StructView, required: int, **kw) -> DPResult:
    return solve_component([v1, v2], required, **kw)


def _bits(x: int) -> list[int]:
    out, k = [], 0
    while x:
        if x & 1:
            out.append(k)
        x >>= 1
        k += 1
    return out


def assemble_block_solution(instance: Instance, guess: Iterable[int], helper: Iterable[int],
                            dp_disks: Iterable[int], cut: Iterable[int] = (),
                            gadget: Iterable[int] = ()) -> Solution:
    """Union of guess, helper set and DP choices, each disk paid once."""
    guess, helper, dp_disks = set(guess), set(helper), set(dp_disks)
    cut, gadget = set(cut), set(gadget)
    ids = guess | helper | dp_disks
    miss = uncovered_points(instance, ids)
    if miss:
        raise InfeasibleAssembly(f"uncovered points {miss}")
    trace = {}
    for i in sorted(ids):
        if i in guess:
            trace[i] = GUESS
        elif i in gadget:
            trace[i] = GADGET
        elif i in helper or i in cut:
            trace[i] = CUT if i in cut else GADGET
        else:
            trace[i] = DP
    return Solution(frozenset(ids), weight_of(instance, ids), trace)
