"""
Split rules used at every internal node of an odds-on tree.

Two rules are provided:
    TwoLineRule - two lines cut the plane into four wedges (linear model, r=4)
    KdRule      - median split on a cycling axis (comparison model, r=2)
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Protocol, Sequence, Tuple, Union

import numpy as np

from .geometry import AxisPlane, Box, ConvexRegion, HalfPlane, Region
from .utils import ceil_div

Boundary = Union[HalfPlane, AxisPlane]

MAX_BISECTION_STEPS = 200


@dataclass
class SplitResult:
    """Ordered child regions plus the sample indices each child received."""

    child_regions: Tuple[Region, ...]
    assigned_samples: List[np.ndarray]
    boundaries: Tuple[Boundary, ...] = field(default=())

    @property
    def arity(self) -> int:
        return len(self.child_regions)

    @property
    def sizes(self) -> List[int]:
        return [len(indices) for indices in self.assigned_samples]


class SplitRule(Protocol):
    name: str
    model: str

    def arity(self) -> int: ...

    def split(self, sample: np.ndarray, depth: int) -> SplitResult: ...


def assign_first_containing(regions: Sequence[Region], points: np.ndarray) -> List[np.ndarray]:
    """Give each point to the first region (in order) that contains it."""
    points = np.asarray(points, dtype=float)
    unassigned = np.ones(len(points), dtype=bool)
    groups = []
    for region in regions:
        hit = unassigned & region.contains_many(points)
        groups.append(np.flatnonzero(hit))
        unassigned &= ~hit
    if unassigned.any():
        # Tolerance gaps only; the regions of a split cover the whole space.
        groups[-1] = np.sort(np.concatenate([groups[-1], np.flatnonzero(unassigned)]))
    return groups


def _wedges(first: HalfPlane, second_below: HalfPlane) -> Tuple[ConvexRegion, ...]:
    left, right = first, first.flipped()
    below, above = second_below, second_below.flipped()
    return (
        ConvexRegion([left, below]),
        ConvexRegion([right, below]),
        ConvexRegion([right, above]),
        ConvexRegion([left, above]),
    )


def _tilt(points: np.ndarray, a: int) -> float:
    """
    Slope delta for the key x + delta*y.

    Zero unless x-coordinates tie across the median; the tilt is small
    enough to keep every strict x-order intact.
    """
    xs = np.sort(points[:, 0])
    if xs[a - 1] != xs[a]:
        return 0.0
    yspan = float(points[:, 1].max() - points[:, 1].min())
    if yspan == 0.0:
        return 0.0
    gaps = np.diff(np.unique(xs))
    min_gap = float(gaps.min()) if len(gaps) else yspan
    return 0.5 * min_gap / yspan


def _degenerate_split(points: np.ndarray, keys: np.ndarray) -> SplitResult:
    order = np.argsort(keys, kind='stable')
    px, py = points[order[(len(points) - 1) // 2]]
    vertical = HalfPlane((1.0, 0.0), px)
    horizontal = HalfPlane((0.0, 1.0), py)
    regions = _wedges(vertical, horizontal)
    return SplitResult(regions, assign_first_containing(regions, points), (vertical, horizontal))


def _median_point(values: np.ndarray, points: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind='stable')
    return points[order[(len(values) - 1) // 2]]


def two_line_split(sample: Sequence[Sequence[float]], depth: int = 0) -> SplitResult:
    """
    Cut a planar sample into four wedges holding at most ceil(m/4) points each.

    The first line splits the sample in half by the key x + delta*y. The
    second line bisects both halves at once: it is found by bisecting on its
    slope, measured in a frame aligned with the first line, until the lower
    medians of the two halves line up. The cells come counterclockwise:
    left/below, right/below, right/above, left/above.

    The size bound assumes points in general position. Points lying on the
    second line fall to the closed lower cells, so a heavily collinear input
    such as a square lattice can put more than ceil(m/4) points in a cell.
    Every point is still assigned to exactly one cell.

    Args:
        sample: m points of the plane
        depth: node depth (unused; the rule is depth independent)

    Returns:
        SplitResult with four wedge regions and their assigned samples
    """
    points = np.asarray(sample, dtype=float).reshape(-1, 2)
    m = len(points)
    if m == 0:
        raise ValueError("cannot split an empty sample")
    if m == 1:
        return _degenerate_split(points, points[:, 0])

    a = ceil_div(m, 2)
    delta = _tilt(points, a)
    keys = points[:, 0] + delta * points[:, 1]
    sorted_keys = np.sort(keys)
    c1 = (sorted_keys[a - 1] + sorted_keys[a]) / 2.0
    left_mask = keys < c1
    right_mask = keys > c1
    if not left_mask.any() or not right_mask.any():
        return _degenerate_split(points, keys)

    first = HalfPlane((1.0, delta), c1)
    scale = math.sqrt(1.0 + delta * delta)
    u = (keys - c1) / scale
    w = (points[:, 1] - delta * points[:, 0]) / scale
    uL, wL, PL = u[left_mask], w[left_mask], points[left_mask]
    uR, wR, PR = u[right_mask], w[right_mask], points[right_mask]
    kL, kR = (len(uL) - 1) // 2, (len(uR) - 1) // 2

    def gap(s: float) -> float:
        return float(np.partition(wL - s * uL, kL)[kL] - np.partition(wR - s * uR, kR)[kR])

    s_lo, s_hi = _bracket(gap)
    root: Optional[float] = None
    for _ in range(MAX_BISECTION_STEPS):
        mid = (s_lo + s_hi) / 2.0
        if mid <= s_lo or mid >= s_hi:
            break
        g = gap(mid)
        if g == 0.0:
            root = mid
            break
        if g < 0.0:
            s_lo = mid
        else:
            s_hi = mid

    bound = ceil_div(m, 4)
    best = None
    for s in ([root] if root is not None else []) + [s_hi, s_lo]:
        p = _median_point(wL - s * uL, PL)
        q = _median_point(wR - s * uR, PR)
        dx, dy = q[0] - p[0], q[1] - p[1]
        offset = dy * p[0] - dx * p[1]
        below = HalfPlane((-dy, dx), -offset)
        regions = _wedges(first, below)
        groups = assign_first_containing(regions, points)
        worst = max(len(g) for g in groups)
        if best is None or worst < best[0]:
            best = (worst, SplitResult(regions, groups, (first, below)))
        if worst <= bound:
            break
    return best[1]


def _bracket(gap) -> Tuple[float, float]:
    """Slopes s_lo < s_hi with gap(s_lo) < 0 <= gap(s_hi); gap is increasing."""
    g0 = gap(0.0)
    if g0 == 0.0:
        return 0.0, 0.0
    step = 1.0
    if g0 < 0.0:
        lo = 0.0
        for _ in range(MAX_BISECTION_STEPS):
            if gap(step) >= 0.0:
                return lo, step
            lo, step = step, step * 2.0
        return lo, step
    hi = 0.0
    for _ in range(MAX_BISECTION_STEPS):
        if gap(-step) < 0.0:
            return -step, hi
        hi, step = -step, step * 2.0
    return -step, hi


def kd_split(sample: Sequence[Sequence[float]], depth: int = 0) -> SplitResult:
    """
    Split at the lower median of axis depth mod d.

    Children are {x[axis] <= median} then {x[axis] >= median}; ties go to
    the first child.

    Example:
        >>> kd_split([[1.0], [2.0], [3.0], [4.0]], 0).sizes
        [2, 2]
    """
    points = np.asarray(sample, dtype=float)
    if points.ndim == 1:
        points = points.reshape(-1, 1)
    m, dimension = points.shape
    if m == 0:
        raise ValueError("cannot split an empty sample")
    axis = depth % dimension
    median = float(np.sort(points[:, axis])[(m - 1) // 2])
    regions = Box.everything(dimension).split(axis, median)
    lower = points[:, axis] <= median
    groups = [np.flatnonzero(lower), np.flatnonzero(~lower)]
    return SplitResult(regions, groups, (AxisPlane(axis, median),))


def crossing_count(result: SplitResult, line: Boundary) -> int:
    """Number of child regions whose interior the given line passes through."""
    return sum(1 for region in result.child_regions if region.interior_crossed_by(line))


class TwoLineRule:
    """Linear decision tree model: four wedges per node."""

    name = 'two-line'
    model = 'linear'

    def arity(self) -> int:
        return 4

    def split(self, sample: np.ndarray, depth: int) -> SplitResult:
        return two_line_split(sample, depth)


class KdRule:
    """Comparison tree model: halve the box on a cycling axis."""

    name = 'kd'
    model = 'comparison'

    def arity(self) -> int:
        return 2

    def split(self, sample: np.ndarray, depth: int) -> SplitResult:
        return kd_split(sample, depth)


def rule_for(name: str) -> SplitRule:
    """Look up a split rule by its configuration name."""
    rules = {TwoLineRule.name: TwoLineRule, KdRule.name: KdRule}
    if name not in rules:
        raise ValueError(f"Unknown split rule '{name}' (expected one of {sorted(rules)})")
    return rules[name]()
