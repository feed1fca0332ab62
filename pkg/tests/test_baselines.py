import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import exhaustive_cover
from udcover.baselines import (
    BudgetExceeded, CoverageMatrix, exact_solve, greedy_solve, harmonic, price_lower_bound,
)
from udcover.geom import Disk, Point
from udcover.instance import Infeasible, Instance, generate, is_cover


def make(disks, points):
    return Instance(tuple(Disk(i, Point(x, y), w) for i, (x, y, w) in enumerate(disks)),
                    tuple(Point(*p) for p in points))


def test_single_disk_single_point():
    inst = make([(0, 0, 4.5)], [(0.2, 0.2)])
    sol = exact_solve(inst)
    assert sol.disk_ids == {0} and sol.total_weight == 4.5
    assert greedy_solve(inst).disk_ids == {0}


def test_cheaper_of_two():
    inst = make([(0, 0, 3.0), (0.5, 0, 2.0)], [(0.25, 0)])
    assert exact_solve(inst).disk_ids == {1}


def test_greedy_ratio_rule_hand_example():
    # A covers both points for 3, B and C cover one each for 1
    inst = make([(0, 0, 3.0), (-0.9, 0, 1.0), (0.9, 0, 1.0)], [(-0.5, 0), (0.5, 0)])
    g = greedy_solve(inst)
    assert g.disk_ids == {1, 2} and g.total_weight == 2.0
    assert exact_solve(inst).total_weight == 2.0


def test_empty_instance():
    inst = make([], [])
    assert exact_solve(inst).disk_ids == frozenset()
    assert greedy_solve(inst).disk_ids == frozenset()


def test_infeasible():
    inst = make([(0, 0, 1.0)], [(5, 5)])
    with pytest.raises(Infeasible):
        exact_solve(inst)
    with pytest.raises(Infeasible):
        greedy_solve(inst)


def test_budget():
    inst = generate(14, 25, 3.0, 11)
    with pytest.raises(BudgetExceeded):
        exact_solve(inst, node_budget=1)


def test_exact_matches_exhaustive_on_n12_m20():
    inst = generate(12, 20, 2.5, 3)
    assert inst.meta["feasible"] == "true"
    assert exact_solve(inst).total_weight == exhaustive_cover(inst)


@pytest.mark.parametrize("seed", range(25))
def test_exact_matches_exhaustive(seed):
    inst = generate(9, 12, 3.0, 100 + seed)
    if inst.meta["feasible"] != "true":
        with pytest.raises(Infeasible):
            exact_solve(inst)
        return
    sol = exact_solve(inst)
    assert is_cover(inst, sol.disk_ids)
    assert sol.total_weight == exhaustive_cover(inst)


@pytest.mark.parametrize("seed", range(30))
def test_greedy_within_harmonic_bound(seed):
    inst = generate(12, 20, 3.0, 200 + seed)
    if inst.meta["feasible"] != "true":
        return
    g, e = greedy_solve(inst), exact_solve(inst)
    assert is_cover(inst, g.disk_ids)
    assert g.total_weight <= harmonic(20) * e.total_weight + 1e-9


def test_harmonic_values():
    assert harmonic(1) == 1.0
    assert harmonic(20) == pytest.approx(3.5977396571436819)


@settings(max_examples=40)
@given(st.integers(0, 10**6))
def test_price_bound_is_a_lower_bound(seed):
    inst = generate(8, 10, 2.5, seed)
    if inst.meta["feasible"] != "true":
        return
    cov = CoverageMatrix.build(inst)
    w = [d.weight for d in inst.disks]
    full = (1 << inst.m) - 1
    lb = price_lower_bound(cov, w, full, (1 << inst.n) - 1)
    assert lb <= exact_solve(inst).total_weight + 1e-9


def test_price_bound_inf_without_allowed_disk():
    inst = make([(0, 0, 1.0), (3, 0, 1.0)], [(0, 0), (3, 0)])
    cov = CoverageMatrix.build(inst)
    assert math.isinf(price_lower_bound(cov, [1.0, 1.0], 0b11, 0b01))


def test_coverage_matrix_agrees_with_distances():
    inst = generate(10, 15, 3.0, 4)
    cov = CoverageMatrix.build(inst)
    for k, p in enumerate(inst.points):
        for j, d in enumerate(inst.disks):
            inside = math.hypot(p.x - d.center.x, p.y - d.center.y) <= 1.0 + 1e-9
            assert bool(cov.bits[k, j]) == inside
            assert bool((cov.disk_masks[j] >> k) & 1) == inside


def test_exact_tie_break_smallest_ids():
    inst = make([(0, 0, 1.0), (0.1, 0, 1.0), (0.2, 0, 1.0)], [(0.1, 0.1)])
    assert exact_solve(inst).disk_ids == {0}
