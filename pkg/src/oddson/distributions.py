"""
Query distributions (sampling oracles) and plug-in answer entropy.

Distribution specs are the JSON objects found in benchmark configs:

    {"kind": "uniform", "lo": [0, 0], "hi": [1000, 1000]}
    {"kind": "gaussian-mixture", "components": [{"mean": [..], "sigma": 5, "weight": 1}]}
    {"kind": "atoms", "atoms": [{"point": [..], "weight": 0.3}], "noise_weight": 0.7,
     "noise": {"lo": [..], "hi": [..]}}
    {"kind": "region-focused", "center": [..], "radius": 10, "focus_mass": 0.99,
     "background": {"lo": [..], "hi": [..]}}

Every spec may carry an "id" used in reports. A region-focused spec may use
"center": "isolated-site" with "radius_factor" to focus on the input point
farthest from its nearest neighbour.
"""

from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import WORKING_BOX_EXTENT
from .geometry import Point
from .oracles import BackupOracle
from .utils import plugin_entropy

WEIGHT_TOLERANCE = 1e-12
MAX_REDRAW_ROUNDS = 1000


def _check_weights(weights: Sequence[float]) -> np.ndarray:
    weights = np.asarray(weights, dtype=float)
    if len(weights) == 0:
        raise ValueError("a mixture needs at least one component")
    if np.any(weights < 0) or not np.all(np.isfinite(weights)):
        raise ValueError("weights must be non-negative")
    if abs(weights.sum() - 1.0) > WEIGHT_TOLERANCE:
        raise ValueError(f"weights must sum to 1 (got {weights.sum()!r})")
    return weights


def _bounds(lo: Sequence[float], hi: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if lo.shape != hi.shape or lo.ndim != 1 or len(lo) == 0:
        raise ValueError("bounds must be two coordinate lists of the same length")
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))) or np.any(lo > hi):
        raise ValueError(f"invalid bounds lo={lo.tolist()} hi={hi.tolist()}")
    return lo, hi


class QueryDistribution:
    """A sampling oracle; subclasses implement `draw_many`."""

    kind = ''

    def __init__(self, dimension: int, dist_id: Optional[str] = None):
        self.dimension = dimension
        self.dist_id = dist_id or self.kind
        self.spec: Dict[str, Any] = {}

    def __repr__(self) -> str:
        return f"{type(self).__name__}(id={self.dist_id!r}, d={self.dimension})"

    def draw(self, rng: np.random.Generator) -> Point:
        return tuple(float(v) for v in self.draw_many(rng, 1)[0])

    def draw_many(self, rng: np.random.Generator, count: int) -> np.ndarray:
        raise NotImplementedError


class UniformBox(QueryDistribution):
    kind = 'uniform'

    def __init__(self, lo: Sequence[float], hi: Sequence[float], dist_id: Optional[str] = None):
        self.lo, self.hi = _bounds(lo, hi)
        super().__init__(len(self.lo), dist_id)

    def draw_many(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, size=(count, self.dimension))


class GaussianMixture(QueryDistribution):
    """
    Isotropic Gaussian components, truncated to `bounds` by redrawing.

    Args:
        components: (mean, sigma, weight) triples
        lo, hi: truncation bounds (default: the working box [-extent, extent]^d)
    """

    kind = 'gaussian-mixture'

    def __init__(self, components: Sequence[Tuple[Sequence[float], float, float]],
                 lo: Optional[Sequence[float]] = None, hi: Optional[Sequence[float]] = None,
                 dist_id: Optional[str] = None, extent: float = WORKING_BOX_EXTENT):
        if not components:
            raise ValueError("a mixture needs at least one component")
        self.means = np.array([c[0] for c in components], dtype=float)
        self.sigmas = np.array([c[1] for c in components], dtype=float)
        self.weights = _check_weights([c[2] for c in components])
        if np.any(~(self.sigmas > 0)):
            raise ValueError("sigma must be positive")
        dimension = self.means.shape[1]
        if lo is None:
            lo = [-extent] * dimension
        if hi is None:
            hi = [extent] * dimension
        self.lo, self.hi = _bounds(lo, hi)
        if len(self.lo) != dimension:
            raise ValueError("bounds and means differ in dimension")
        super().__init__(dimension, dist_id)

    def _component_draw(self, rng: np.random.Generator, k: int, count: int) -> np.ndarray:
        out = np.empty((0, self.dimension))
        for _ in range(MAX_REDRAW_ROUNDS):
            need = count - len(out)
            if need == 0:
                return out
            batch = rng.normal(self.means[k], self.sigmas[k], size=(max(need, 16), self.dimension))
            keep = np.all((batch >= self.lo) & (batch <= self.hi), axis=1)
            out = np.vstack([out, batch[keep][:need]])
        raise ValueError(f"component {k} puts almost no mass inside the bounds")

    def draw_many(self, rng: np.random.Generator, count: int) -> np.ndarray:
        choice = rng.choice(len(self.weights), size=count, p=self.weights)
        points = np.empty((count, self.dimension))
        for k in range(len(self.weights)):
            slots = np.flatnonzero(choice == k)
            if len(slots):
                points[slots] = self._component_draw(rng, k, len(slots))
        return points


class AtomsPlusNoise(QueryDistribution):
    """Point masses plus a uniform noise box."""

    kind = 'atoms'

    def __init__(self, atoms: Sequence[Tuple[Sequence[float], float]], noise_weight: float,
                 noise_lo: Optional[Sequence[float]] = None, noise_hi: Optional[Sequence[float]] = None,
                 dist_id: Optional[str] = None):
        if not atoms:
            raise ValueError("at least one atom is required")
        self.atoms = np.array([a[0] for a in atoms], dtype=float)
        self.noise_weight = float(noise_weight)
        self.weights = _check_weights([a[1] for a in atoms] + [self.noise_weight])
        dimension = self.atoms.shape[1]
        self.noise_lo = self.noise_hi = None
        if self.noise_weight > 0:
            if noise_lo is None or noise_hi is None:
                raise ValueError("noise bounds are required when noise_weight > 0")
            self.noise_lo, self.noise_hi = _bounds(noise_lo, noise_hi)
            if len(self.noise_lo) != dimension:
                raise ValueError("noise bounds and atoms differ in dimension")
        super().__init__(dimension, dist_id)

    def draw_many(self, rng: np.random.Generator, count: int) -> np.ndarray:
        choice = rng.choice(len(self.weights), size=count, p=self.weights)
        noise = choice == len(self.atoms)
        points = np.empty((count, self.dimension))
        points[~noise] = self.atoms[choice[~noise]]
        if noise.any():
            points[noise] = rng.uniform(self.noise_lo, self.noise_hi,
                                        size=(int(noise.sum()), self.dimension))
        return points


class RegionFocused(QueryDistribution):
    """Mass `focus_mass` uniform in a ball, the rest uniform in a background box."""

    kind = 'region-focused'

    def __init__(self, center: Sequence[float], radius: float, focus_mass: float,
                 background_lo: Optional[Sequence[float]] = None,
                 background_hi: Optional[Sequence[float]] = None,
                 dist_id: Optional[str] = None):
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        self.focus_mass = float(focus_mass)
        if not self.radius > 0:
            raise ValueError("focus radius must be positive")
        if not 0.0 <= self.focus_mass <= 1.0:
            raise ValueError("focus_mass must lie in [0, 1]")
        if background_lo is None or background_hi is None:
            if self.focus_mass < 1.0:
                raise ValueError("background bounds are required when focus_mass < 1")
            background_lo = background_hi = self.center
        self.background_lo, self.background_hi = _bounds(background_lo, background_hi)
        if len(self.background_lo) != len(self.center):
            raise ValueError("background bounds and center differ in dimension")
        super().__init__(len(self.center), dist_id)

    def draw_many(self, rng: np.random.Generator, count: int) -> np.ndarray:
        focused = rng.random(count) < self.focus_mass
        k = int(focused.sum())
        points = np.empty((count, self.dimension))
        direction = rng.normal(size=(k, self.dimension))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        radii = self.radius * rng.random(k) ** (1.0 / self.dimension)
        points[focused] = self.center + direction * radii[:, None]
        points[~focused] = rng.uniform(self.background_lo, self.background_hi,
                                       size=(count - k, self.dimension))
        return points


def isolated_point(points: np.ndarray) -> Tuple[np.ndarray, float]:
    """The input point with the largest nearest-neighbour distance, and that distance."""
    points = np.asarray(points, dtype=float)
    n = len(points)
    if n < 2:
        raise ValueError("need at least two points")
    order = np.argsort(points[:, 0], kind='stable')
    xs, ys = points[order, 0], points[order, 1]
    nearest = np.full(n, np.inf)
    # Sweep pairs k apart in x order until no pair can improve either endpoint.
    for k in range(1, n):
        dx = xs[k:] - xs[:-k]
        if not np.any(dx < np.maximum(nearest[:-k], nearest[k:])):
            break
        d = np.hypot(dx, ys[k:] - ys[:-k])
        nearest[:-k] = np.minimum(nearest[:-k], d)
        nearest[k:] = np.minimum(nearest[k:], d)
    best = int(np.argmax(nearest))
    return points[order[best]], float(nearest[best])


def _spec_bounds(spec: Dict[str, Any], key: str) -> Tuple[Optional[List[float]], Optional[List[float]]]:
    box = spec.get(key)
    if box is None:
        return None, None
    return box['lo'], box['hi']


def from_spec(spec: Dict[str, Any], points: Optional[np.ndarray] = None,
              extent: float = WORKING_BOX_EXTENT) -> QueryDistribution:
    """
    Build a distribution from its JSON spec.

    The returned distribution keeps a copy of the spec in `spec`.

    Args:
        spec: Distribution spec (see module docstring)
        points: App inputs, needed only for "center": "isolated-site"
        extent: Working box extent; Gaussian mixtures without "bounds" truncate to it

    Raises:
        ValueError: Unknown kind, missing fields or invalid parameters
    """
    dist = _build_from_spec(spec, points, extent)
    dist.spec = dict(spec)
    return dist


def _build_from_spec(spec: Dict[str, Any], points: Optional[np.ndarray], extent: float) -> QueryDistribution:
    try:
        kind = spec['kind']
        dist_id = spec.get('id')
        if kind == UniformBox.kind:
            return UniformBox(spec['lo'], spec['hi'], dist_id)
        if kind == GaussianMixture.kind:
            lo, hi = _spec_bounds(spec, 'bounds')
            components = [(c['mean'], c['sigma'], c['weight']) for c in spec['components']]
            return GaussianMixture(components, lo, hi, dist_id, extent)
        if kind == AtomsPlusNoise.kind:
            lo, hi = _spec_bounds(spec, 'noise')
            atoms = [(a['point'], a['weight']) for a in spec['atoms']]
            return AtomsPlusNoise(atoms, spec.get('noise_weight', 0.0), lo, hi, dist_id)
        if kind == RegionFocused.kind:
            lo, hi = _spec_bounds(spec, 'background')
            center, radius = spec['center'], spec.get('radius')
            if center == 'isolated-site':
                if points is None:
                    raise ValueError("'isolated-site' needs the app inputs")
                center, nearest = isolated_point(points)
                radius = spec.get('radius_factor', 0.1) * nearest
            return RegionFocused(center, radius, spec['focus_mass'], lo, hi, dist_id)
    except (KeyError, TypeError) as e:
        raise ValueError(f"invalid distribution spec {spec!r}: {e}")
    raise ValueError(f"Unknown distribution kind '{kind}'")


def answer_entropy(dist: QueryDistribution, answerer: BackupOracle, N: int,
                   rng: np.random.Generator) -> float:
    """
    Plug-in entropy (bits) of the answers to N drawn queries.

    Estimates the lower bound H on the expected cost of any decision tree
    for the problem under this distribution.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    queries = dist.draw_many(rng, N)
    return plugin_entropy(answerer.answer(q) for q in queries)

