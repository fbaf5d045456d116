import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rado.errors import DimensionMismatch, InputError, KindError, ResourceLimitError
from rado.geometry import (Collection, adjacency_matrix, ball, box, contains_point, diameter, dilate,
                           from_balls, from_boxes, intersects, load_collection, rotrect, save_collection,
                           translate, union_volume, union_volume_boxes, union_volume_mc, volume)


# -- independent helpers ----------------------------------------------------------

def _raster_area(c, step=0.5):
    """Area of a union of boxes with half-integer faces, by counting grid cells."""
    lo = (c.centers - c.radii[:, None]).min(axis=0)
    hi = (c.centers + c.radii[:, None]).max(axis=0)
    axes = [np.arange(lo[a] + step / 2, hi[a], step) for a in range(c.dimension)]
    pts = np.array(list(itertools.product(*axes)))
    inside = np.zeros(len(pts), dtype=bool)
    for b in c:
        inside |= np.all(np.abs(pts - b.center) < b.radius, axis=1)
    return inside.sum() * step ** c.dimension


def _corners(b):
    if b.kind == "box":
        a = h = b.radius
        t = 0.0
    else:
        a, h = b.half_extents
        t = b.angle
    u = np.array([math.cos(t), math.sin(t)])
    v = np.array([-math.sin(t), math.cos(t)])
    c = np.asarray(b.center)
    return [c + sa * a * u + sh * h * v for sa, sh in ((1, 1), (-1, 1), (-1, -1), (1, -1))]


def _inside_convex(poly, p, tol=1e-9):
    signs = []
    for k in range(len(poly)):
        e = poly[(k + 1) % len(poly)] - poly[k]
        w = p - poly[k]
        signs.append(e[0] * w[1] - e[1] * w[0])
    return all(s >= -tol for s in signs) or all(s <= tol for s in signs)


def _segments_cross(p1, p2, q1, q2):
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    d1, d2 = orient(q1, q2, p1), orient(q1, q2, p2)
    d3, d4 = orient(p1, p2, q1), orient(p1, p2, q2)
    return d1 * d2 < 0 and d3 * d4 < 0


def _polygons_meet(P, Q):
    if any(_inside_convex(Q, p) for p in P) or any(_inside_convex(P, q) for q in Q):
        return True
    return any(_segments_cross(P[i], P[(i + 1) % 4], Q[j], Q[(j + 1) % 4])
               for i in range(4) for j in range(4))


# -- bodies ------------------------------------------------------------------------

def test_body_validation():
    with pytest.raises(InputError):
        box((0, 0), -1)
    with pytest.raises(InputError):
        ball((0, float("nan")), 1)
    with pytest.raises(InputError):
        rotrect((0, 0, 0), (1, 1))
    with pytest.raises(DimensionMismatch):
        Collection(2, (box((0, 0), 1), box((0, 0, 0), 1)))
    with pytest.raises(InputError):
        Collection(2, ())


def test_volumes():
    assert volume(box((0, 0, 0), 0.5)) == 1.0
    assert volume(ball((0, 0), 2)) == pytest.approx(4 * math.pi)
    assert volume(ball((0, 0, 0), 1)) == pytest.approx(4 * math.pi / 3)
    assert volume(rotrect((0, 0), (0.5, 0.25), 1.0)) == pytest.approx(0.5)
    assert volume(dilate(ball((0,), 1), 3)) == pytest.approx(6)
    assert translate(box((1, 2), 1), (1, -2)).center == (2.0, 0.0)


def test_touching_bodies_intersect():
    assert intersects(box((0.5,), 0.5), box((1.5,), 0.5))
    assert intersects(ball((0, 0), 1), ball((2, 0), 1))
    assert not intersects(ball((0, 0), 1), ball((2 + 1e-6, 0), 1))
    # square corner (1, 1) against a disk centred at (2, 2)
    assert intersects(box((0, 0), 1), ball((2, 2), math.sqrt(2)))
    assert not intersects(box((0, 0), 1), ball((2, 2), 1.4))
    assert intersects(rotrect((0, 0), (1, 0.1), math.pi / 4), box((1.5, 1.5), 0.8))


def test_intersects_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        intersects(box((0,), 1), box((0, 0), 1))


planar = st.floats(-3, 3, allow_nan=False)
extent = st.floats(0.05, 2, allow_nan=False)
angle = st.floats(0, math.pi, allow_nan=False)


@given(st.tuples(planar, planar, extent, extent, angle), st.tuples(planar, planar, extent, extent, angle))
@settings(max_examples=300, deadline=None)
def test_rectangle_test_matches_polygon_check(a, b):
    ra = rotrect(a[:2], a[2:4], a[4])
    rb = rotrect(b[:2], b[2:4], b[4])
    expected = _polygons_meet(_corners(ra), _corners(rb))
    if intersects(ra, rb) != expected:
        # disagreement is only acceptable for near-touching pairs
        grown = _polygons_meet(_corners(dilate(ra, 1 + 1e-6)), _corners(dilate(rb, 1 + 1e-6)))
        shrunk = _polygons_meet(_corners(dilate(ra, 1 - 1e-6)), _corners(dilate(rb, 1 - 1e-6)))
        assert grown and not shrunk


@given(st.tuples(planar, planar, extent, extent, angle), st.tuples(planar, planar, extent))
@settings(max_examples=200, deadline=None)
def test_rectangle_disk_against_sampled_boundary(r, c):
    rect = rotrect(r[:2], r[2:4], r[4])
    disk = ball(c[:2], c[2])
    corners = _corners(rect)
    # distance from the disk centre to the rectangle, computed from its edges
    p = np.asarray(disk.center)
    if _inside_convex(corners, p):
        dist = 0.0
    else:
        dist = min(np.min(np.linalg.norm(corners[k] + np.linspace(0, 1, 2001)[:, None]
                                         * (corners[(k + 1) % 4] - corners[k]) - p, axis=1))
                   for k in range(4))
    if abs(dist - disk.radius) > 1e-3:
        assert intersects(rect, disk) == (dist <= disk.radius)


def test_adjacency_matches_pairwise():
    rng = np.random.default_rng(3)
    for make in (from_boxes, from_balls):
        c = make(rng.uniform(-2, 2, (15, 3)), rng.uniform(0.2, 1, 15))
        adj = adjacency_matrix(c)
        for i, j in itertools.combinations(range(len(c)), 2):
            assert adj[i, j] == adj[j, i] == intersects(c[i], c[j])
        assert not adj.diagonal().any()


def test_contains_point_and_diameter():
    assert contains_point(box((0, 0), 1), (1, -1))
    assert not contains_point(ball((0, 0), 1), (0.8, 0.8))
    assert contains_point(rotrect((0, 0), (1, 0.1), math.pi / 2), (0.05, 0.9))
    assert diameter(from_balls([[0, 0], [3, 4]], 1)) == pytest.approx(7)
    with pytest.raises(KindError):
        diameter(from_boxes([[0, 0]], 1))


# -- union volumes ------------------------------------------------------------------

@pytest.mark.parametrize("d", [1, 2, 3])
def test_box_union_matches_raster(d):
    rng = np.random.default_rng(d)
    for _ in range(20):
        n = int(rng.integers(1, 8))
        centers = rng.integers(-4, 5, (n, d)) / 2
        radii = rng.integers(1, 4, n) / 2
        c = from_boxes(centers, radii)
        assert union_volume_boxes(c).value == pytest.approx(_raster_area(c))


def test_box_union_cell_cap():
    c = from_boxes(np.arange(30)[:, None] * [1.0, 1.1], 2.0)
    with pytest.raises(ResourceLimitError):
        union_volume_boxes(c, max_cells=10)
    with pytest.raises(KindError):
        union_volume_boxes(from_balls([[0, 0]], 1))


def test_mc_union_of_two_disks_within_error_bar():
    # lens area of two unit disks at distance 1
    c = from_balls([[0, 0], [1, 0]], 1.0)
    lens = 2 * math.acos(0.5) - 0.5 * math.sqrt(3)
    est = union_volume_mc(c, rel_tol=0.002, seed=7)
    assert abs(est.value - (2 * math.pi - lens)) <= est.abs_error
    assert est.method == "monte_carlo"


def test_mc_agrees_with_exact_boxes():
    rng = np.random.default_rng(11)
    for seed in range(5):
        c = from_boxes(rng.uniform(0, 3, (6, 2)), rng.uniform(0.2, 1, 6))
        est = union_volume_mc(c, seed=seed)
        assert abs(est.value - union_volume_boxes(c).value) <= est.abs_error


def test_mc_is_reproducible():
    c = from_balls([[0, 0, 0], [1, 1, 0]], [1.0, 0.7])
    assert union_volume_mc(c, seed=4) == union_volume_mc(c, seed=4)


def test_union_volume_dispatch():
    assert union_volume(from_balls([[0], [1.5]], 1.0)).value == pytest.approx(3.5)
    assert union_volume(from_balls([[0, 0]], 1.0)).value == pytest.approx(math.pi)
    assert union_volume(from_boxes([[0, 0], [1, 0]], 1.0)).method == "exact"


def test_collection_json_round_trip(tmp_path):
    c = Collection(2, (box((0, 0), 1), ball((1, 2), 0.5), rotrect((0, 1), (1, 0.2), 0.3)), "mixed")
    path = tmp_path / "c.json"
    save_collection(c, path)
    assert load_collection(path) == c
    (tmp_path / "bad.json").write_text('{"dimension": 2, "bodies": [{"kind": "blob"}]}')
    with pytest.raises(InputError):
        load_collection(tmp_path / "bad.json")
    (tmp_path / "broken.json").write_text("{")
    with pytest.raises(InputError):
        load_collection(tmp_path / "broken.json")
