import math

import numpy as np
import pytest

from oddson.apps import PostOffice
from oddson.distributions import (
    AtomsPlusNoise,
    GaussianMixture,
    RegionFocused,
    UniformBox,
    answer_entropy,
    from_spec,
    isolated_point,
)
from oddson.oracles import SamplingOracle


def test_single_atom_is_always_drawn(rng):
    dist = AtomsPlusNoise([((3.0, 4.0), 1.0)], noise_weight=0.0)
    assert np.all(dist.draw_many(rng, 1000) == [3.0, 4.0])
    assert dist.draw(rng) == (3.0, 4.0)


def test_uniform_box_moments(rng):
    points = UniformBox((0.0, 0.0), (1.0, 1.0)).draw_many(rng, 100_000)
    assert np.allclose(points.mean(axis=0), [0.5, 0.5], atol=0.01)
    assert points.min() >= 0.0 and points.max() <= 1.0


def test_region_focused_mass(rng):
    dist = RegionFocused((500.0, 500.0), 10.0, 0.99, (0.0, 0.0), (1000.0, 1000.0))
    points = dist.draw_many(rng, 100_000)
    inside = np.hypot(points[:, 0] - 500.0, points[:, 1] - 500.0) <= 10.0
    assert inside.mean() >= 0.985


def test_fully_focused_needs_no_background(rng):
    dist = RegionFocused((1.0, 2.0), 0.5, 1.0)
    points = dist.draw_many(rng, 1000)
    assert np.all(np.hypot(points[:, 0] - 1.0, points[:, 1] - 2.0) <= 0.5)


def test_gaussian_mixture_is_truncated(rng):
    dist = GaussianMixture([((0.0, 0.0), 5.0, 0.5), ((10.0, 10.0), 1.0, 0.5)],
                           lo=(0.0, 0.0), hi=(20.0, 20.0))
    points = dist.draw_many(rng, 5000)
    assert points.min() >= 0.0 and points.max() <= 20.0
    near_second = np.hypot(points[:, 0] - 10.0, points[:, 1] - 10.0) < 5.0
    assert 0.4 < near_second.mean() < 0.6


def test_gaussian_mixture_defaults_to_configured_working_box(rng):
    spec = {'kind': 'gaussian-mixture', 'components': [{'mean': [0, 0], 'sigma': 50, 'weight': 1}]}
    dist = from_spec(spec, extent=10.0)
    assert tuple(dist.lo) == (-10.0, -10.0) and tuple(dist.hi) == (10.0, 10.0)
    assert np.all(np.abs(dist.draw_many(rng, 500)) <= 10.0)

def test_four_dimensional_distributions(rng):
    dist = GaussianMixture([((1.0, 2.0, 3.0, 4.0), 1.0, 1.0)])
    assert dist.dimension == 4
    assert dist.draw_many(rng, 10).shape == (10, 4)


@pytest.mark.parametrize("make", [
    lambda: AtomsPlusNoise([((0.0, 0.0), 0.5)], noise_weight=0.4, noise_lo=(0, 0), noise_hi=(1, 1)),
    lambda: AtomsPlusNoise([((0.0, 0.0), 0.5)], noise_weight=0.5),
    lambda: GaussianMixture([((0.0, 0.0), 0.0, 1.0)]),
    lambda: GaussianMixture([((0.0, 0.0), 1.0, -1.0), ((1.0, 1.0), 1.0, 2.0)]),
    lambda: RegionFocused((0.0, 0.0), 1.0, 0.5),
    lambda: RegionFocused((0.0, 0.0), 0.0, 1.0),
    lambda: UniformBox((1.0, 0.0), (0.0, 1.0)),
])
def test_invalid_parameters_are_rejected(make):
    with pytest.raises(ValueError):
        make()


def test_same_seed_same_stream():
    dist = GaussianMixture([((0.0, 0.0), 3.0, 0.3), ((5.0, 5.0), 1.0, 0.7)])
    a = dist.draw_many(np.random.default_rng(99), 500)
    b = dist.draw_many(np.random.default_rng(99), 500)
    assert np.array_equal(a, b)


def test_distributions_are_sampling_oracles():
    assert isinstance(UniformBox((0.0,), (1.0,)), SamplingOracle)


def test_isolated_point():
    center, distance = isolated_point(np.array([[0.0, 0.0], [1.0, 0.0], [10.0, 10.0]]))
    assert tuple(center) == (10.0, 10.0)
    assert distance == pytest.approx(math.hypot(9.0, 10.0))


@pytest.mark.parametrize("spec, cls", [
    ({'kind': 'uniform', 'lo': [0, 0], 'hi': [1, 1]}, UniformBox),
    ({'kind': 'gaussian-mixture', 'components': [{'mean': [0, 0], 'sigma': 1, 'weight': 1}]},
     GaussianMixture),
    ({'kind': 'atoms', 'atoms': [{'point': [1, 1], 'weight': 0.5}], 'noise_weight': 0.5,
      'noise': {'lo': [0, 0], 'hi': [2, 2]}}, AtomsPlusNoise),
    ({'kind': 'region-focused', 'center': [5, 5], 'radius': 1, 'focus_mass': 0.9,
      'background': {'lo': [0, 0], 'hi': [10, 10]}}, RegionFocused),
])
def test_from_spec(spec, cls):
    dist = from_spec(spec)
    assert isinstance(dist, cls)
    assert dist.dist_id == cls.kind


def test_from_spec_keeps_id_and_resolves_isolated_site():
    points = np.array([[0.0, 0.0], [1.0, 0.0], [10.0, 10.0]])
    dist = from_spec({'kind': 'region-focused', 'id': 'lonely', 'center': 'isolated-site',
                      'radius_factor': 0.1, 'focus_mass': 1.0}, points)
    assert dist.dist_id == 'lonely'
    assert tuple(dist.center) == (10.0, 10.0)
    assert dist.radius == pytest.approx(0.1 * math.hypot(9.0, 10.0))
    assert dist.spec['center'] == 'isolated-site'


@pytest.mark.parametrize("spec", [
    {'kind': 'zipf'},
    {'kind': 'uniform', 'lo': [0, 0]},
    {'lo': [0, 0], 'hi': [1, 1]},
    {'kind': 'region-focused', 'center': 'isolated-site', 'focus_mass': 1.0},
])
def test_from_spec_rejects_bad_specs(spec):
    with pytest.raises(ValueError):
        from_spec(spec)


def test_answer_entropy_single_answer(rng):
    app = PostOffice(np.array([[0.0, 0.0]]))
    assert answer_entropy(UniformBox((0, 0), (1, 1)), app, 1000, rng) == 0.0


def test_answer_entropy_two_symmetric_sites(two_sites, rng):
    dist = UniformBox((-5.0, -5.0), (15.0, 5.0))
    assert answer_entropy(dist, two_sites, 100_000, rng) == pytest.approx(1.0, abs=0.05)


def test_answer_entropy_four_corners(rng):
    corners = PostOffice(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]))
    dist = UniformBox((0.0, 0.0), (1.0, 1.0))
    assert answer_entropy(dist, corners, 100_000, rng) == pytest.approx(2.0, abs=0.05)
