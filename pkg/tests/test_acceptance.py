"""
Desk-scale acceptance runs. Deselect with `pytest -m "not slow"`.
"""

import numpy as np
import pytest

from oddson.apps import ConvexPolygonMembership, PostOffice, RectCount
from oddson.bench import BenchConfig, BenchRunner
from oddson.checks import check_frequency_bound, check_partition
from oddson.config import CHECK_SETTINGS
from oddson.distributions import AtomsPlusNoise, GaussianMixture, RegionFocused, UniformBox, isolated_point
from oddson.geometry import Box, ConvexRegion, Orientation, orientation, sample_points
from oddson.oracles import MIXED
from oddson.partition import KdRule, TwoLineRule
from oddson.report import row_violations
from oddson.tree import OddsOnConfig, build, query

pytestmark = pytest.mark.slow

SQUARE_LO, SQUARE_HI = (0.0, 0.0), (1000.0, 1000.0)


class NeverUniform:
    """Interference oracle that never trims, so the tree grows to its cap."""

    def classify(self, region):
        return MIXED


def _planar_distributions(points):
    center, nearest = isolated_point(points)
    return [
        UniformBox(SQUARE_LO, SQUARE_HI),
        GaussianMixture([((250.0, 250.0), 20.0, 0.5), ((700.0, 600.0), 5.0, 0.5)]),
        AtomsPlusNoise([((100.0, 900.0), 0.2), ((800.0, 150.0), 0.1)], 0.7, SQUARE_LO, SQUARE_HI),
        RegionFocused(center, 0.1 * nearest, 0.99, SQUARE_LO, SQUARE_HI),
    ]


def _rectangle_distributions():
    lo, hi = (0.0,) * 4, (1000.0,) * 4
    return [
        UniformBox(lo, hi),
        GaussianMixture([((200.0, 800.0, 200.0, 800.0), 50.0, 0.5),
                         ((400.0, 600.0, 100.0, 900.0), 20.0, 0.5)]),
        AtomsPlusNoise([((100.0, 900.0, 100.0, 900.0), 0.2), ((500.0, 500.0, 500.0, 500.0), 0.1)],
                       0.7, lo, hi),
        RegionFocused((300.0, 700.0, 300.0, 700.0), 30.0, 0.99, lo, hi),
    ]


def _mismatches(app, rule, dist, seed):
    tree = build(OddsOnConfig(n=app.size, seed=seed), dist, app, rule)
    queries = dist.draw_many(np.random.default_rng(seed), 10_000)
    expected = app.reference_many(queries)
    return sum(query(tree, tuple(q), app).answer != want for q, want in zip(queries, expected))


@pytest.mark.parametrize("make_app, rule", [
    (lambda rng: PostOffice.generate(100_000, rng), TwoLineRule()),
    (lambda rng: ConvexPolygonMembership.generate(10_000, rng), TwoLineRule()),
    (lambda rng: RectCount.generate(100_000, rng), KdRule()),
])
def test_answers_are_exact(make_app, rule):
    app = make_app(np.random.default_rng(1))
    if app.dimension == 4:
        dists = _rectangle_distributions()
    else:
        dists = _planar_distributions(app.points)
    for seed, dist in enumerate(dists):
        assert _mismatches(app, rule, dist, seed) == 0, dist


def test_two_line_partition_invariants():
    result = check_partition(TwoLineRule(), 2, np.random.default_rng(2))
    assert result.passed, result.message


def test_visit_frequencies_decay_by_depth():
    sampler = UniformBox((0.0, 0.0), (1.0, 1.0))
    tree = build(OddsOnConfig(n=4096, tau=1.0, seed=3), sampler, NeverUniform(), TwoLineRule())
    assert tree.stats['sample_size'] == 4096
    result = check_frequency_bound(tree, sampler, np.random.default_rng(4), CHECK_SETTINGS)
    assert result.passed, result.message


def test_concentrated_queries_beat_the_backup():
    rng = np.random.default_rng(5)
    app = PostOffice.generate(100_000, rng)
    center, nearest = isolated_point(app.points)
    dist = RegionFocused(center, 0.1 * nearest, 0.99, SQUARE_LO, SQUARE_HI)
    tree = build(OddsOnConfig(n=app.size, tau=0.8, seed=5), dist, app, TwoLineRule())

    queries = dist.draw_many(np.random.default_rng(6), 10_000)
    stats = [query(tree, tuple(q), app) for q in queries]
    baseline_ops = np.mean([app.answer_with_cost(tuple(q))[1] for q in queries])
    filtered_cost = np.mean([s.nodes_visited + s.backup_ops for s in stats])
    fallback_rate = np.mean([s.used_backup for s in stats])

    assert fallback_rate <= 0.05
    assert filtered_cost <= 0.5 * baseline_ops



def test_fully_focused_run_mostly_avoids_the_backup(tmp_path):
    # Wedges reaching the working box edge cross neighbouring cells, so a
    # few focused queries still land on frontier leaves.
    config = BenchConfig.from_dict({
        'app': 'postoffice', 'n': 10_000, 'tau': 0.8, 'depth_cap_mode': 'lemma',
        'query_count': 10_000, 'seed': 11, 'output': str(tmp_path),
        'distributions': [{'id': 'isolated', 'kind': 'region-focused', 'center': 'isolated-site',
                           'radius_factor': 0.1, 'focus_mass': 1.0}],
    })
    row = BenchRunner(config).cmd_bench()[0]
    assert row['fallback_rate'] <= 0.15
    assert row['mean_visits'] <= 5.0
    assert row['answer_entropy_bits'] == 0.0

def _suite():
    return [
        {'id': 'uniform', 'kind': 'uniform', 'lo': [0, 0], 'hi': [1000, 1000]},
        {'id': 'corner', 'kind': 'uniform', 'lo': [100, 100], 'hi': [300, 300]},
        {'id': 'clusters', 'kind': 'gaussian-mixture',
         'components': [{'mean': [250, 250], 'sigma': 20, 'weight': 0.5},
                        {'mean': [700, 600], 'sigma': 5, 'weight': 0.5}]},
        {'id': 'wide', 'kind': 'gaussian-mixture',
         'components': [{'mean': [500, 500], 'sigma': 150, 'weight': 1.0}]},
        {'id': 'light-atoms', 'kind': 'atoms',
         'atoms': [{'point': [100, 900], 'weight': 0.05}, {'point': [800, 150], 'weight': 0.05}],
         'noise_weight': 0.9, 'noise': {'lo': [0, 0], 'hi': [1000, 1000]}},
        {'id': 'focused', 'kind': 'region-focused', 'center': [500, 500], 'radius': 50,
         'focus_mass': 0.9, 'background': {'lo': [0, 0], 'hi': [1000, 1000]}},
    ]


@pytest.mark.parametrize("app, n", [('postoffice', 2000), ('polygon', 200)])
def test_cost_tracks_leaf_entropy(tmp_path, app, n):
    config = BenchConfig.from_dict({
        'app': app, 'n': n, 'rule': 'two-line', 'query_count': 10_000, 'seed': 7,
        'output': str(tmp_path), 'distributions': _suite(),
    })
    rows = BenchRunner(config).cmd_bench()
    assert len(rows) == 6
    for row in rows:
        assert row_violations(row) == [], row['distribution']


def _ccw_triangle(rng, size):
    center = rng.uniform(0.0, 1000.0, size=2)
    a, b, c = (tuple(center + rng.uniform(-size, size, size=2)) for _ in range(3))
    turn = orientation(a, b, c)
    if turn is Orientation.COLLINEAR:
        return None
    return ConvexRegion.from_polygon([a, b, c] if turn is Orientation.LEFT else [a, c, b])


def _nearest_sites(sites, points):
    dx = points[:, None, 0] - sites[None, :, 0]
    dy = points[:, None, 1] - sites[None, :, 1]
    return np.argmin(dx * dx + dy * dy, axis=1)


def _rectangle_counts(points, queries):
    x, y = points[None, :, 0], points[None, :, 1]
    inside = ((x >= queries[:, None, 0]) & (x <= queries[:, None, 1])
              & (y >= queries[:, None, 2]) & (y <= queries[:, None, 3]))
    return inside.sum(axis=1)


def test_interference_soundness():
    rng = np.random.default_rng(8)
    polygon = ConvexPolygonMembership.generate(500, rng)
    sites = PostOffice.generate(500, rng)
    counts = RectCount.generate(300, rng)
    seen = {'polygon': 0, 'postoffice': 0, 'rectcount': 0}

    for _ in range(1000):
        region = _ccw_triangle(rng, 100.0)
        if region is not None:
            verdict = polygon.classify(region)
            if verdict is not MIXED:
                seen['polygon'] += 1
                answers = polygon.reference_many(sample_points(region, rng, 1000))
                assert all(a is verdict.answer for a in answers)

        region = _ccw_triangle(rng, 50.0)
        if region is not None:
            verdict = sites.classify(region)
            if verdict is not MIXED:
                seen['postoffice'] += 1
                nearest = _nearest_sites(sites.points, sample_points(region, rng, 1000))
                assert np.all(nearest == verdict.answer)

        lo = rng.uniform(0.0, 1000.0, size=4)
        box = Box(tuple(lo), tuple(lo + rng.uniform(0.0, 50.0, size=4)))
        verdict = counts.classify(box)
        if verdict is not MIXED:
            seen['rectcount'] += 1
            assert np.all(_rectangle_counts(counts.points, sample_points(box, rng, 1000)) == verdict.answer)

    assert all(seen.values()), seen


def test_runs_are_reproducible(tmp_path):
    outputs = []
    for name in ('first', 'second'):
        config = BenchConfig.from_dict({
            'app': 'postoffice', 'n': 5000, 'query_count': 2000, 'seed': 9,
            'output': str(tmp_path / name), 'distributions': _suite()[:3],
        })
        runner = BenchRunner(config)
        trees = runner.cmd_build()
        runner.cmd_bench()
        outputs.append(([path.read_bytes() for path in trees], config.csv_path.read_bytes()))
    assert outputs[0] == outputs[1]
