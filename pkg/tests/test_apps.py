import math

import numpy as np
import pytest

from oddson.apps import (
    ConvexPolygonMembership,
    Membership,
    PostOffice,
    RectCount,
    app_class,
    generate_app,
    make_app,
)
from oddson.geometry import Box, ConvexRegion, HalfPlane, Orientation, orientation, sample_points
from oddson.oracles import MIXED, UNREACHABLE, BackupOracle, InterferenceOracle, Uniform

EMPTY = ConvexRegion([HalfPlane((1.0, 0.0), -1.0), HalfPlane((-1.0, 0.0), -1.0)])


def _ccw_triangle(rng, center, size):
    a, b, c = (tuple(center + rng.uniform(-size, size, size=2)) for _ in range(3))
    turn = orientation(a, b, c)
    if turn is Orientation.COLLINEAR:
        return None
    return ConvexRegion.from_polygon([a, b, c] if turn is Orientation.LEFT else [a, c, b])


# --- convex polygon membership ---------------------------------------------

@pytest.mark.parametrize("q, expected", [
    ((0.5, 0.5), Membership.INSIDE),
    ((2.0, 0.0), Membership.OUTSIDE),
    ((1.0, 0.5), Membership.INSIDE),
    ((0.0, 0.0), Membership.INSIDE),
    ((-0.1, 0.5), Membership.OUTSIDE),
])
def test_polygon_backup(square_polygon, q, expected):
    assert square_polygon.answer(q) is expected


def test_polygon_backup_matches_scan(rng):
    polygon = ConvexPolygonMembership.generate(60, rng)
    queries = rng.uniform(0.0, 1000.0, size=(10_000, 2))
    expected = polygon.reference_many(queries)
    bound = 2 * math.ceil(math.log2(60)) + 3
    for q, want in zip(queries, expected):
        answer, ops = polygon.answer_with_cost(q)
        assert answer is want
        assert ops <= bound


def test_polygon_backup_on_vertices_and_edge_midpoints(rng):
    polygon = ConvexPolygonMembership.generate(20, rng)
    vs = polygon.points
    for q in np.vstack([vs, (vs + np.roll(vs, -1, axis=0)) / 2.0]):
        assert polygon.reference(q) is Membership.INSIDE
        assert polygon.answer(q) is Membership.INSIDE


def test_polygon_reference_many_matches_reference(square_polygon, rng):
    queries = rng.uniform(-0.5, 1.5, size=(500, 2))
    assert square_polygon.reference_many(queries) == [square_polygon.reference(q) for q in queries]


@pytest.mark.parametrize("vertices", [
    [(0, 0), (0, 1), (1, 1), (1, 0)],
    [(0, 0), (1, 0), (2, 0), (1, 1)],
    [(0, 0), (1, 0)],
])
def test_polygon_rejects_bad_vertex_lists(vertices):
    with pytest.raises(ValueError):
        ConvexPolygonMembership(np.array(vertices, dtype=float))


def test_polygon_interference_examples(square_polygon):
    tiny = ConvexRegion.from_polygon([(0.5, 0.5), (0.51, 0.5), (0.5, 0.51)])
    assert square_polygon.classify(tiny) == Uniform(Membership.INSIDE)
    straddling = ConvexRegion.from_polygon([(0.9, 0.5), (1.1, 0.4), (1.1, 0.6)])
    assert square_polygon.classify(straddling) is MIXED
    far = ConvexRegion.from_polygon([(2.0, 2.0), (3.0, 2.0), (2.0, 3.0)])
    assert square_polygon.classify(far) == Uniform(Membership.OUTSIDE)


def test_polygon_interference_edge_cases(square_polygon):
    assert square_polygon.classify(EMPTY) == Uniform(UNREACHABLE)
    assert square_polygon.classify(ConvexRegion([HalfPlane((1.0, 0.0), -5.0)])) is MIXED
    around = ConvexRegion.from_polygon([(-1.0, -1.0), (2.0, -1.0), (2.0, 2.0), (-1.0, 2.0)])
    assert square_polygon.classify(around) is MIXED
    touching = ConvexRegion.from_polygon([(1.0, 0.5), (2.0, 0.0), (2.0, 1.0)])
    assert square_polygon.classify(touching) is MIXED
    assert square_polygon.classify(Box((3.0, 3.0), (4.0, 4.0))) == Uniform(Membership.OUTSIDE)


def test_polygon_interference_is_sound(rng):
    polygon = ConvexPolygonMembership.generate(12, rng)
    uniform_seen = 0
    for _ in range(300):
        region = _ccw_triangle(rng, rng.uniform(0.0, 1000.0, size=2), 80.0)
        if region is None:
            continue
        verdict = polygon.classify(region)
        if verdict is MIXED:
            continue
        uniform_seen += 1
        points = sample_points(region, rng, 30)
        assert all(polygon.reference(p) is verdict.answer for p in points)
    assert uniform_seen > 0


def test_polygon_labels_encode_as_strings(square_polygon):
    assert square_polygon.encode_label(Membership.INSIDE) == 'inside'
    assert square_polygon.decode_label('outside') is Membership.OUTSIDE


def test_generated_polygon_is_on_circle(rng):
    polygon = ConvexPolygonMembership.generate(30, rng)
    radii = np.hypot(polygon.points[:, 0] - 500.0, polygon.points[:, 1] - 500.0)
    assert np.allclose(radii, 400.0)
    assert polygon.size == 30


# --- post office -------------------------------------------------------------

@pytest.mark.parametrize("q, expected", [
    ((1.0, 0.0), 0),
    ((5.0, 0.0), 0),
    ((5.0, 3.0), 0),
    ((6.0, 0.0), 1),
])
def test_postoffice_backup(two_sites, q, expected):
    assert two_sites.answer(q) == expected


def test_postoffice_backup_matches_scan(rng):
    sites = PostOffice.generate(300, rng)
    for q in rng.uniform(-200.0, 1200.0, size=(10_000, 2)):
        answer, ops = sites.answer_with_cost(q)
        assert answer == sites.reference(q)
        assert 1 <= ops <= 300


def test_postoffice_ties_go_to_lowest_index(rng):
    grid = np.array([(x, y) for x in range(8) for y in range(8)], dtype=float)
    order = rng.permutation(len(grid))
    sites = PostOffice(grid[order])
    for q in np.array([(x / 2.0, y / 2.0) for x in range(-1, 16) for y in range(-1, 16)]):
        assert sites.answer(q) == sites.reference(q)


def test_postoffice_rejects_duplicate_sites():
    with pytest.raises(ValueError):
        PostOffice(np.array([[1.0, 1.0], [1.0, 1.0]]))


def test_postoffice_interference_examples(two_sites):
    left = ConvexRegion.from_polygon([(1.0, 0.0), (2.0, -1.0), (2.0, 1.0)])
    assert two_sites.classify(left) == Uniform(0)
    across = ConvexRegion.from_polygon([(4.0, 0.0), (6.0, -1.0), (6.0, 1.0)])
    assert two_sites.classify(across) is MIXED
    assert two_sites.classify(EMPTY) == Uniform(UNREACHABLE)
    assert two_sites.classify(Box((7.0, -1.0), (9.0, 1.0))) == Uniform(1)


def test_postoffice_interference_is_sound(rng):
    sites = PostOffice.generate(20, rng)
    uniform_seen = 0
    for _ in range(300):
        region = _ccw_triangle(rng, rng.uniform(0.0, 1000.0, size=2), 60.0)
        if region is None:
            continue
        verdict = sites.classify(region)
        if verdict is MIXED:
            continue
        uniform_seen += 1
        for p in sample_points(region, rng, 30):
            assert sites.reference(p) == verdict.answer
    assert uniform_seen > 0


def test_single_site_is_uniform_everywhere():
    app = PostOffice(np.array([[3.0, 4.0]]))
    assert app.classify(ConvexRegion([HalfPlane((1.0, 0.0), 0.0)])) == Uniform(0)


# --- rectangle counting ------------------------------------------------------

def test_rectcount_backup_examples(single_point_counts):
    assert single_point_counts.answer((0.0, 10.0, 0.0, 10.0)) == 1
    assert single_point_counts.answer((6.0, 4.0, 0.0, 10.0)) == 0
    assert single_point_counts.answer((5.0, 5.0, 5.0, 5.0)) == 1


def test_rectcount_backup_matches_scan(rng):
    counts = RectCount.generate(257, rng)
    for _ in range(10_000):
        q = rng.uniform(-50.0, 1050.0, size=4)
        if rng.random() < 0.9:
            q[0:2].sort()
            q[2:4].sort()
        answer, ops = counts.answer_with_cost(q)
        assert answer == counts.reference(q)
        assert ops >= 1


def test_rectcount_handles_repeated_coordinates(rng):
    points = rng.integers(0, 5, size=(60, 2)).astype(float)
    counts = RectCount(points)
    for q in rng.integers(-1, 6, size=(2000, 4)).astype(float):
        assert counts.answer(q) == counts.reference(q)


def test_rectcount_interference_examples(single_point_counts):
    inner_outer_agree = Box((0.0, 9.0, 0.0, 9.0), (1.0, 10.0, 1.0, 10.0))
    assert single_point_counts.classify(inner_outer_agree) == Uniform(1)
    disagree = Box((0.0, 4.0, 0.0, 9.0), (1.0, 6.0, 1.0, 10.0))
    assert single_point_counts.classify(disagree) is MIXED
    inverted = Box((8.0, 1.0, 0.0, 9.0), (9.0, 2.0, 1.0, 10.0))
    assert single_point_counts.classify(inverted) == Uniform(0)


def test_rectcount_rejects_planar_regions(single_point_counts, unit_square):
    with pytest.raises(TypeError):
        single_point_counts.classify(unit_square)
    assert not single_point_counts.supports_model('linear')


def test_rectcount_is_monotone_under_inclusion(rng):
    counts = RectCount.generate(100, rng)
    for _ in range(500):
        x1, x2, y1, y2 = np.sort(rng.uniform(0, 1000, size=2)).tolist() + np.sort(rng.uniform(0, 1000, size=2)).tolist()
        grow = rng.uniform(0, 100, size=4)
        assert counts.count(x1, x2, y1, y2) <= counts.count(x1 - grow[0], x2 + grow[1], y1 - grow[2], y2 + grow[3])


def test_rectcount_interference_is_sound(rng):
    counts = RectCount.generate(30, rng)
    uniform_seen = 0
    for _ in range(500):
        lo = rng.uniform(0.0, 1000.0, size=4)
        box = Box(tuple(lo), tuple(lo + rng.uniform(0.0, 40.0, size=4)))
        verdict = counts.classify(box)
        if verdict is MIXED:
            continue
        uniform_seen += 1
        for q in sample_points(box, rng, 20):
            assert counts.reference(q) == verdict.answer
    assert uniform_seen > 0


# --- registry ----------------------------------------------------------------

def test_apps_satisfy_oracle_protocols(two_sites, square_polygon, single_point_counts):
    for app in (two_sites, square_polygon, single_point_counts):
        assert isinstance(app, BackupOracle)
        assert isinstance(app, InterferenceOracle)


def test_registry_lookup(rng):
    assert app_class('postoffice') is PostOffice
    assert isinstance(make_app('rectcount', np.array([[1.0, 2.0]])), RectCount)
    assert generate_app('polygon', 5, rng).size == 5
    with pytest.raises(ValueError):
        app_class('voronoi')
    with pytest.raises(ValueError):
        generate_app('postoffice', 0, rng)


def test_fingerprint_tracks_inputs():
    a = PostOffice(np.array([[0.0, 0.0], [1.0, 1.0]]))
    b = PostOffice(np.array([[0.0, 0.0], [1.0, 1.0]]))
    c = PostOffice(np.array([[0.0, 0.0], [1.0, 2.0]]))
    assert a.fingerprint == b.fingerprint != c.fingerprint
    assert RectCount(a.points).fingerprint != a.fingerprint
