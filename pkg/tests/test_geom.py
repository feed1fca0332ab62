import math

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from udcover.geom import (
    MAX_JITTER, TWO_PI, AngularInterval, DegenerateArrangement, Disk, Point, angle_of, ccw_delta,
    central_angle, circle_intersections, covered_interval, curve_points, dist, jitter, norm_angle,
    point_in_disk, robust_union_boundary, union_boundary, winding_number, winding_numbers,
)

coord = st.floats(-3.0, 3.0, allow_nan=False)


def disk(i, x, y, w=1.0):
    return Disk(i, Point(x, y), w)


@pytest.mark.parametrize("b, expected", [
    ((3.0, 0.0), []),
    ((2.0, 0.0), [(1.0, 0.0)]),
    ((1.0, 0.0), [(0.5, math.sqrt(3) / 2), (0.5, -math.sqrt(3) / 2)]),
])
def test_circle_intersections_examples(b, expected):
    got = circle_intersections(disk(0, 0, 0), disk(1, *b))
    assert sorted(got) == pytest.approx(sorted(expected))


def test_circle_intersections_coincident_is_degenerate():
    got = circle_intersections(disk(0, 0, 0), disk(1, 0, 0))
    assert got == [] and got.degenerate


@given(coord, coord, coord, coord)
def test_intersections_lie_on_both_circles(ax, ay, bx, by):
    a, b = disk(0, ax, ay), disk(1, bx, by)
    assume(dist(a.center, b.center) > 1e-6)
    for p in circle_intersections(a, b):
        assert dist(p, a.center) == pytest.approx(1.0, abs=1e-7)
        assert dist(p, b.center) == pytest.approx(1.0, abs=1e-7)


@pytest.mark.parametrize("p, tol, expected", [
    ((0.0, 0.0), 1e-9, True),
    ((1.0, 0.0), 0.0, True),
    ((1.0000001, 0.0), 1e-9, False),
])
def test_point_in_disk(p, tol, expected):
    assert point_in_disk(p, disk(0, 0, 0), tol) is expected


def test_point_in_disk_rejects_negative_tolerance():
    with pytest.raises(ValueError):
        point_in_disk((0, 0), disk(0, 0, 0), -1.0)


def test_central_angle_quarter():
    assert central_angle(AngularInterval(0, 0.0, math.pi / 2)) == math.pi / 2


def test_central_angle_from_endpoints():
    o = (0.0, 0.0)
    start, end = angle_of(o, (1.0, 0.0)), angle_of(o, (0.0, 1.0))
    iv = AngularInterval(0, start, ccw_delta(start, end))
    assert central_angle(iv) == pytest.approx(math.pi / 2)


@pytest.mark.parametrize("start, extent", [(-0.1, 1.0), (TWO_PI, 1.0), (0.0, 0.0), (0.0, 7.0)])
def test_angular_interval_rejects_bad_values(start, extent):
    with pytest.raises(ValueError):
        AngularInterval(0, start, extent)


def test_interval_contains_wraps():
    iv = AngularInterval(0, 6.0, 1.0)
    assert iv.contains(0.5) and iv.contains(6.1) and not iv.contains(3.0)


@given(st.floats(-100, 100, allow_nan=False))
def test_norm_angle_range(a):
    r = norm_angle(a)
    assert 0.0 <= r < TWO_PI
    assert math.cos(r) == pytest.approx(math.cos(a), abs=1e-9)


def test_union_of_one_disk_is_full_circle():
    curves = union_boundary([disk(4, 1, 1)])
    assert len(curves) == 1 and len(curves[0]) == 1
    did, iv = curves[0][0]
    assert did == 4 and iv.is_full


def test_union_of_disjoint_disks():
    curves = union_boundary([disk(0, 0, 0), disk(1, 5, 0)])
    assert len(curves) == 2
    assert all(len(c) == 1 and c[0][1].is_full for c in curves)


def test_union_of_two_disks_at_distance_one():
    ds = [disk(0, 0, 0), disk(1, 1, 0)]
    curves = union_boundary(ds)
    assert len(curves) == 1 and len(curves[0]) == 2
    for _, iv in curves[0]:
        assert iv.extent == pytest.approx(2 * math.pi - 2 * math.acos(0.5))
        assert iv.extent == pytest.approx(4 * math.pi / 3)
    centers = {d.id: d.center for d in ds}
    for p in curve_points(curves[0], centers):
        assert not any(dist(p, c) < 1.0 - 1e-9 for c in centers.values())


def test_union_rejects_tangent_and_coincident():
    with pytest.raises(DegenerateArrangement):
        union_boundary([disk(0, 0, 0), disk(1, 2, 0)])
    with pytest.raises(DegenerateArrangement):
        union_boundary([disk(0, 0, 0), disk(1, 0, 0)])


def test_robust_union_recovers_from_tangency():
    ds = [disk(0, 0, 0), disk(1, 2, 0)]
    curves, centers = robust_union_boundary(ds)
    assert len(curves) in (1, 2)
    for d in ds:
        assert dist(centers[d.id], d.center) <= MAX_JITTER


@given(st.lists(st.tuples(coord, coord), min_size=1, max_size=7))
def test_union_boundary_points_are_on_the_union_boundary(cs):
    ds = [disk(i, x, y) for i, (x, y) in enumerate(cs)]
    try:
        curves, centers = robust_union_boundary(ds)
    except DegenerateArrangement:
        assume(False)
    for curve in curves:
        for p in curve_points(curve, centers, per_piece=8):
            ds_to = [dist(p, c) for c in centers.values()]
            assert min(ds_to) == pytest.approx(1.0, abs=1e-7)
            assert all(d > 1.0 - 1e-7 for d in ds_to)


@given(st.lists(st.tuples(coord, coord), min_size=1, max_size=6), st.integers(1, 3))
def test_jitter_is_bounded_and_seeded(cs, attempt):
    ds = [disk(i, x, y) for i, (x, y) in enumerate(cs)]
    a, b = jitter(ds, attempt), jitter(ds, attempt)
    assert a == b
    for d, e in zip(ds, a):
        assert dist(d.center, e.center) <= MAX_JITTER


@given(coord, coord)
def test_covered_interval_endpoints_are_crossings(x, y):
    ci, cj = (0.0, 0.0), (x, y)
    d = dist(ci, cj)
    assume(1e-3 < d < 2.0 - 1e-3)
    s, e = covered_interval(ci, cj)
    for ang in (s, s + e):
        p = (math.cos(ang), math.sin(ang))
        assert dist(p, cj) == pytest.approx(1.0, abs=1e-9)
    mid = (math.cos(s + e / 2), math.sin(s + e / 2))
    assert dist(mid, cj) < 1.0


@given(st.lists(st.tuples(coord, coord), min_size=1, max_size=20))
def test_vectorized_winding_matches_scalar(pts):
    square = [(-1, -1), (1, -1), (1, 1), (-1, 1)]
    got = winding_numbers(square, pts)
    assert list(got) == [winding_number(square, p) for p in pts]


def test_winding_number_of_square():
    square = [(0, 0), (1, 0), (1, 1), (0, 1)]
    assert winding_number(square, (0.5, 0.5)) == 1
    assert winding_number(square, (2, 0.5)) == 0
    assert winding_number(list(reversed(square)), (0.5, 0.5)) == -1


@pytest.mark.parametrize("w", [-1.0, math.inf, math.nan])
def test_disk_rejects_bad_weight(w):
    with pytest.raises(ValueError):
        Disk(0, Point(0, 0), w)
