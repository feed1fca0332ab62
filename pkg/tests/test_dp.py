import io
import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import best_paths, valid_chains
from udcover.dp import (
    BASE, DPState, InfeasibleAssembly, NoFeasiblePath, StateBudgetExceeded, _Track,
    assemble_block_solution, solve_component, solve_two, subproblem_points,
)
from udcover.fixtures import StripArc, sibling_fixture, single_fixture, strip_view, two_fixture
from udcover.geom import Disk, Point
from udcover.instance import CUT, DP, GADGET, GUESS, Instance, weight_of


def _reach_from_arc(v, c, f, inclusive=False):
    """Arcs reachable when standing on arc ``c`` at fraction ``f``."""
    out = set()
    for d in range(v.n):
        if d != c and v.A[c] < v.A[d] and v.B[c] < v.B[d]:
            for fa, fd in v.crossings(c, d):
                if fa > f or (inclusive and fa == f):
                    out |= {d} | _reach_from_arc(v, d, fd)
    for e in range(v.n):
        if v.A[e] > v.B[c]:
            out |= {e} | _reach_from_arc(v, e, 0.0)
    return out


def _owed_oracle(v, track, h, required):
    i, k = h
    if i == BASE:
        arcs = set()
        for _, j, _ in track.ev[BASE][k:-1]:
            arcs |= {j} | _reach_from_arc(v, j, 0.0)
        base = 0
    else:
        arcs = _reach_from_arc(v, i, track.ev[i][k][0], inclusive=True)
        base = v.pts[i]
    pts = 0
    for a in arcs:
        pts |= v.pts[a]
    return pts & required & ~base


def test_initial_and_final_owed_points():
    v, R = single_fixture(3)
    t = _Track(v)
    assert subproblem_points([t], DPState(((BASE, 0),)), R) == v.covered_points() & R
    assert subproblem_points([t], DPState(((BASE, t.last),)), R) == 0


@pytest.mark.parametrize("seed", range(30))
def test_owed_points_match_definition(seed):
    v, R = single_fixture(seed, max_arcs=7)
    t = _Track(v)
    for i, evs in t.ev.items():
        for k in range(len(evs)):
            h = (i, k)
            assert subproblem_points([t], DPState((h,)), R) == _owed_oracle(v, t, h, R), h


def test_nothing_to_cover_uses_baselines_only():
    v1, _ = single_fixture(1)
    v2, _ = single_fixture(2)
    res = solve_two(v1, v2.reversed(), 0)
    assert res.weight == 0.0 and res.disks == frozenset()
    assert all(p.arcs == () for p in res.paths)


def test_single_point_only_one_arc_covers():
    a = [StripArc(0, 0.0, 0.5, 3.0), StripArc(1, 2.5, 0.5, 1.0)]
    b = [StripArc(10, 0.0, 0.5, 2.0)]
    v1 = strip_view(a, [(0.0, 0.3)], sid=0)
    v2 = strip_view(b, [], sid=1, point_offset=1)
    res = solve_two(v1, v2, 0b1)
    assert res.weight == 3.0 and res.disks == {0}


def test_uncoverable_point_raises():
    v = strip_view([StripArc(0, 0.0, 0.5, 1.0)], [(5.0, 0.1)])
    with pytest.raises(NoFeasiblePath):
        solve_component([v], 0b1)


def test_state_budget():
    v, R = single_fixture(5)
    with pytest.raises(StateBudgetExceeded):
        solve_component([v], R, budget=1)


@pytest.mark.parametrize("seed", range(40))
def test_single_matches_exhaustive(seed):
    v, R = single_fixture(seed)
    res = solve_component([v], R)
    assert res.weight == best_paths([v], R)
    chains = valid_chains(v)
    (path,) = res.paths
    assert frozenset(path.arcs) in chains
    assert R & ~chains[frozenset(path.arcs)] == 0


@pytest.mark.parametrize("seed", range(15))
def test_two_matches_exhaustive(seed):
    views, R = two_fixture(seed, max_arcs=6)
    assert solve_two(*views, R).weight == best_paths(views, R)


@pytest.mark.parametrize("seed", range(10))
def test_two_node_component_equals_solve_two(seed):
    views, R = two_fixture(seed, max_arcs=6)
    a = solve_component(views, R)
    b = solve_two(views[0], views[1], R)
    assert (a.weight, a.disks) == (b.weight, b.disks)


@pytest.mark.parametrize("seed", range(8))
def test_shared_disk_paid_once(seed):
    views, R, shared = sibling_fixture(seed)
    res = solve_component(views, R)
    assert shared in res.disks
    assert res.weight == best_paths(views, R)
    table = {}
    for v in views:
        table.update(zip(v.disk, v.weight))
    assert res.weight == math.fsum(table[d] for d in sorted(res.disks))


def test_reported_value_equals_weight():
    views, R, _ = sibling_fixture(2)
    res = solve_component(views, R)
    assert res.value == pytest.approx(res.weight)


def test_trace_is_json_lines():
    v, R = single_fixture(4)
    buf = io.StringIO()
    res = solve_component([v], R, trace=buf)
    lines = buf.getvalue().splitlines()
    assert len(lines) == res.states
    rec = json.loads(lines[-1])
    assert set(rec) == {"state", "value", "disk"}


def test_deterministic_choice_on_ties():
    arcs = [StripArc(0, 0.0, 0.5, 2.0), StripArc(1, 0.05, 0.5, 2.0)]
    v = strip_view(arcs, [(0.02, 0.2)])
    picks = {solve_component([v], 0b1).disks for _ in range(5)}
    assert len(picks) == 1


@settings(max_examples=40)
@given(st.integers(0, 10**6))
def test_dp_never_beats_or_loses_to_oracle(seed):
    v, R = single_fixture(seed, max_arcs=7)
    assert solve_component([v], R).weight == best_paths([v], R)


# ---------------------------------------------------------------- assembly

def _inst():
    ds = (Disk(0, Point(0, 0), 1.0), Disk(1, Point(1.5, 0), 2.0), Disk(2, Point(3, 0), 4.0))
    return Instance(ds, (Point(0, 0), Point(1.5, 0), Point(3, 0)))


def test_empty_remainder_is_guess_plus_helper():
    sol = assemble_block_solution(_inst(), {0}, {1, 2}, (), gadget={1, 2})
    assert sol.disk_ids == {0, 1, 2}
    assert sol.trace == {0: GUESS, 1: GADGET, 2: GADGET}


def test_disk_in_helper_and_dp_paid_once():
    inst = _inst()
    sol = assemble_block_solution(inst, {0}, {1}, {1, 2}, cut={1})
    assert sol.total_weight == 7.0
    assert sol.total_weight == weight_of(inst, sol.disk_ids)
    assert sol.trace[1] == CUT and sol.trace[2] == DP


def test_assembly_must_cover():
    with pytest.raises(InfeasibleAssembly):
        assemble_block_solution(_inst(), {0}, (), ())
