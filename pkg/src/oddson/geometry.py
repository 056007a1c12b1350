"""
Geometric primitives: orientation tests, segment intersection, halfplane
clipping, convex regions, axis-aligned boxes and triangulation.

Arithmetic is plain double precision with the tolerances from `config`;
exact predicates are out of scope.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .config import (
    CONTAINMENT_TOLERANCE,
    FRAME_EXTENT,
    ORIENTATION_EPSILON,
    WORKING_BOX_EXTENT,
)

Point = Tuple[float, ...]
Triangle = Tuple[Point, Point, Point]


class DegenerateSegmentError(ValueError):
    """Raised when a zero-length segment is passed to the strict intersection test."""


class UnboundedRegionError(ValueError):
    """Raised when an operation needs a bounded region."""


class Orientation(Enum):
    LEFT = 1
    RIGHT = -1
    COLLINEAR = 0


class SegmentMode(Enum):
    STRICT = "strict"
    CLOSED = "closed"


def _orientation_sign(ax: float, ay: float, bx: float, by: float,
                      cx: float, cy: float) -> int:
    ux, uy = bx - ax, by - ay
    vx, vy = cx - ax, cy - ay
    det = ux * vy - uy * vx
    scale = math.hypot(ux, uy) * math.hypot(vx, vy)
    if abs(det) <= ORIENTATION_EPSILON * scale:
        return 0
    return 1 if det > 0 else -1


def orientation(a: Sequence[float], b: Sequence[float], c: Sequence[float]) -> Orientation:
    """
    Sign of the cross product (b - a) x (c - a).

    Args:
        a, b, c: 2-D points

    Returns:
        LEFT if c lies left of the directed line a->b, RIGHT if right,
        COLLINEAR within the relative epsilon

    Example:
        >>> orientation((0, 0), (1, 0), (0, 1))
        <Orientation.LEFT: 1>
    """
    return Orientation(_orientation_sign(a[0], a[1], b[0], b[1], c[0], c[1]))


def orientation_signs(a: Sequence[float], b: Sequence[float], c: np.ndarray) -> np.ndarray:
    """Vectorized orientation of many points c (shape (k, 2)) against one line a->b."""
    c = np.asarray(c, dtype=float)
    ux, uy = b[0] - a[0], b[1] - a[1]
    vx = c[:, 0] - a[0]
    vy = c[:, 1] - a[1]
    det = ux * vy - uy * vx
    scale = math.hypot(ux, uy) * np.hypot(vx, vy)
    signs = np.sign(det).astype(int)
    signs[np.abs(det) <= ORIENTATION_EPSILON * scale] = 0
    return signs


def _on_segment_box(p: Sequence[float], q: Sequence[float], r: Sequence[float]) -> bool:
    """r lies within the bounding box of segment pq (r assumed collinear)."""
    return (min(p[0], q[0]) <= r[0] <= max(p[0], q[0])
            and min(p[1], q[1]) <= r[1] <= max(p[1], q[1]))


def segments_intersect(u: Sequence[float], w: Sequence[float], x: Sequence[float],
                       y: Sequence[float], mode: SegmentMode = SegmentMode.CLOSED) -> bool:
    """
    Test whether segments uw and xy intersect.

    STRICT evaluates the pair of conjunctions
    L(u,w,y) & L(x,y,u) & L(w,u,x) & L(y,x,w) (and the same with R),
    i.e. a proper crossing. CLOSED also reports touching and collinear
    overlap, and accepts zero-length segments.

    Raises:
        DegenerateSegmentError: zero-length segment in STRICT mode
    """
    if mode is SegmentMode.STRICT:
        if tuple(u) == tuple(w) or tuple(x) == tuple(y):
            raise DegenerateSegmentError("strict intersection needs non-degenerate segments")
        turns = (
            orientation(u, w, y),
            orientation(x, y, u),
            orientation(w, u, x),
            orientation(y, x, w),
        )
        return (all(t is Orientation.LEFT for t in turns)
                or all(t is Orientation.RIGHT for t in turns))

    d1 = orientation(x, y, u).value
    d2 = orientation(x, y, w).value
    d3 = orientation(u, w, x).value
    d4 = orientation(u, w, y).value
    if d1 * d2 < 0 and d3 * d4 < 0:
        return True
    if d1 == 0 and _on_segment_box(x, y, u):
        return True
    if d2 == 0 and _on_segment_box(x, y, w):
        return True
    if d3 == 0 and _on_segment_box(u, w, x):
        return True
    if d4 == 0 and _on_segment_box(u, w, y):
        return True
    return False


def segment_hits_any(u: Sequence[float], w: Sequence[float],
                     starts: np.ndarray, ends: np.ndarray) -> bool:
    """
    Closed-mode intersection of one segment uw against many segments at once.

    Same decision procedure as `segments_intersect(..., CLOSED)`, vectorized
    over the arrays of segment endpoints `starts`/`ends` (shape (k, 2)).
    """
    starts = np.asarray(starts, dtype=float)
    ends = np.asarray(ends, dtype=float)
    if len(starts) == 0:
        return False
    ux, uy = float(u[0]), float(u[1])
    wx, wy = float(w[0]), float(w[1])

    def orient(ax, ay, bx, by, cx, cy):
        px, py = bx - ax, by - ay
        qx, qy = cx - ax, cy - ay
        det = px * qy - py * qx
        scale = np.hypot(px, py) * np.hypot(qx, qy)
        signs = np.sign(det)
        return np.where(np.abs(det) <= ORIENTATION_EPSILON * scale, 0.0, signs)

    def within(ax, ay, bx, by, cx, cy):
        return ((np.minimum(ax, bx) <= cx) & (cx <= np.maximum(ax, bx))
                & (np.minimum(ay, by) <= cy) & (cy <= np.maximum(ay, by)))

    xs, ys = starts[:, 0], starts[:, 1]
    xe, ye = ends[:, 0], ends[:, 1]
    d1 = orient(xs, ys, xe, ye, ux, uy)
    d2 = orient(xs, ys, xe, ye, wx, wy)
    d3 = orient(ux, uy, wx, wy, xs, ys)
    d4 = orient(ux, uy, wx, wy, xe, ye)
    hit = (d1 * d2 < 0) & (d3 * d4 < 0)
    hit |= (d1 == 0) & within(xs, ys, xe, ye, ux, uy)
    hit |= (d2 == 0) & within(xs, ys, xe, ye, wx, wy)
    hit |= (d3 == 0) & within(ux, uy, wx, wy, xs, ys)
    hit |= (d4 == 0) & within(ux, uy, wx, wy, xe, ye)
    return bool(np.any(hit))


@dataclass(frozen=True)
class HalfPlane:
    """Closed halfplane {x : normal . x <= offset}; its boundary doubles as a line."""

    normal: Tuple[float, float]
    offset: float

    def __post_init__(self):
        normal = (float(self.normal[0]), float(self.normal[1]))
        offset = float(self.offset)
        if normal == (0.0, 0.0):
            raise ValueError("halfplane normal must not be the zero vector")
        if not all(math.isfinite(v) for v in normal + (offset,)):
            raise ValueError("halfplane coefficients must be finite")
        object.__setattr__(self, 'normal', normal)
        object.__setattr__(self, 'offset', offset)

    @classmethod
    def left_of(cls, a: Sequence[float], b: Sequence[float]) -> "HalfPlane":
        """Closed halfplane to the left of the directed line a->b."""
        dx, dy = b[0] - a[0], b[1] - a[1]
        return cls((dy, -dx), dy * a[0] - dx * a[1])

    @property
    def norm(self) -> float:
        return math.hypot(self.normal[0], self.normal[1])

    def value(self, p: Sequence[float]) -> float:
        return self.normal[0] * p[0] + self.normal[1] * p[1] - self.offset

    def values(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        return points[:, 0] * self.normal[0] + points[:, 1] * self.normal[1] - self.offset

    def tolerance(self) -> float:
        return CONTAINMENT_TOLERANCE * self.norm

    def satisfied(self, p: Sequence[float]) -> bool:
        return self.value(p) <= self.tolerance()

    def flipped(self) -> "HalfPlane":
        return HalfPlane((-self.normal[0], -self.normal[1]), -self.offset)


def _dedupe(vertices: List[Tuple[float, float]]) -> List[Tuple[float, float]]:
    out: List[Tuple[float, float]] = []
    for v in vertices:
        if out and _close(out[-1], v):
            continue
        out.append(v)
    while len(out) > 1 and _close(out[0], out[-1]):
        out.pop()
    return out


def _close(a: Tuple[float, float], b: Tuple[float, float]) -> bool:
    scale = max(1.0, abs(a[0]), abs(a[1]))
    return abs(a[0] - b[0]) <= 1e-12 * scale and abs(a[1] - b[1]) <= 1e-12 * scale


def _clip_polygon(vertices: List[Tuple[float, float]], h: HalfPlane) -> List[Tuple[float, float]]:
    """Sutherland-Hodgman step: keep the part of a convex polygon inside h."""
    if not vertices:
        return []
    tol = h.tolerance()
    values = [h.value(v) for v in vertices]
    if all(val <= tol for val in values):
        return list(vertices)
    out = []
    k = len(vertices)
    for i in range(k):
        cur, nxt = vertices[i], vertices[(i + 1) % k]
        vc, vn = values[i], values[(i + 1) % k]
        cur_in = vc <= tol
        nxt_in = vn <= tol
        if cur_in:
            out.append(cur)
        if cur_in != nxt_in and k > 1:
            t = vc / (vc - vn)
            out.append((cur[0] + t * (nxt[0] - cur[0]), cur[1] + t * (nxt[1] - cur[1])))
    return _dedupe(out)


def _frame_vertices() -> List[Tuple[float, float]]:
    e = FRAME_EXTENT
    return [(-e, -e), (e, -e), (e, e), (-e, e)]


class ConvexRegion:
    """
    Intersection of closed halfplanes in the plane.

    Vertices are cached counterclockwise. They are obtained by clipping a
    large square frame, so an unbounded region carries frame vertices and
    reports `is_bounded() == False`; its recession directions are in `rays`.
    """

    def __init__(self, constraints: Sequence[HalfPlane] = (),
                 vertices: Optional[Sequence[Sequence[float]]] = None):
        self.constraints: Tuple[HalfPlane, ...] = tuple(constraints)
        if vertices is None:
            polygon = _frame_vertices()
            for h in self.constraints:
                polygon = _clip_polygon(polygon, h)
                if not polygon:
                    break
        else:
            polygon = _dedupe([(float(v[0]), float(v[1])) for v in vertices])
        self._vertices: Tuple[Tuple[float, float], ...] = tuple(polygon)

    def __repr__(self) -> str:
        return f"ConvexRegion({len(self.constraints)} constraints, {len(self._vertices)} vertices)"

    @classmethod
    def from_box(cls, box: "Box") -> "ConvexRegion":
        """The 2-D box as a region; infinite sides add no constraint."""
        if box.dimension != 2:
            raise ValueError("only 2-D boxes convert to planar regions")
        (x0, y0), (x1, y1) = box.lo, box.hi
        constraints = []
        if math.isfinite(x1):
            constraints.append(HalfPlane((1.0, 0.0), x1))
        if math.isfinite(y1):
            constraints.append(HalfPlane((0.0, 1.0), y1))
        if math.isfinite(x0):
            constraints.append(HalfPlane((-1.0, 0.0), -x0))
        if math.isfinite(y0):
            constraints.append(HalfPlane((0.0, -1.0), -y0))
        if box.is_bounded():
            return cls(constraints, [(x0, y0), (x1, y0), (x1, y1), (x0, y1)])
        return cls(constraints)

    @classmethod
    def from_polygon(cls, points: Sequence[Sequence[float]]) -> "ConvexRegion":
        """
        Region spanned by a counterclockwise convex vertex list.

        Degenerate inputs (a segment or a single point) produce the matching
        degenerate region instead of failing.
        """
        vertices = _dedupe([(float(p[0]), float(p[1])) for p in points])
        if not vertices:
            raise ValueError("polygon needs at least one vertex")
        if len(vertices) == 1:
            (px, py), = vertices
            constraints = [
                HalfPlane((1.0, 0.0), px), HalfPlane((-1.0, 0.0), -px),
                HalfPlane((0.0, 1.0), py), HalfPlane((0.0, -1.0), -py),
            ]
            return cls(constraints, vertices)
        if len(vertices) == 2:
            a, b = vertices
            dx, dy = b[0] - a[0], b[1] - a[1]
            side = HalfPlane.left_of(a, b)
            constraints = [
                side, side.flipped(),
                HalfPlane((dx, dy), dx * b[0] + dy * b[1]),
                HalfPlane((-dx, -dy), -(dx * a[0] + dy * a[1])),
            ]
            return cls(constraints, vertices)
        k = len(vertices)
        constraints = [HalfPlane.left_of(vertices[i], vertices[(i + 1) % k]) for i in range(k)]
        return cls(constraints, vertices)

    @property
    def vertices(self) -> List[Point]:
        return list(self._vertices)

    def is_empty(self) -> bool:
        return not self._vertices

    def is_bounded(self) -> bool:
        limit = FRAME_EXTENT * (1 - 1e-6)
        return all(abs(x) < limit and abs(y) < limit for x, y in self._vertices)

    @property
    def rays(self) -> List[Point]:
        """Extreme recession directions; empty for bounded or empty regions."""
        if self.is_empty() or self.is_bounded():
            return []
        if not self.constraints:
            return [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)]
        candidates = []
        for h in self.constraints:
            nx, ny = h.normal[0] / h.norm, h.normal[1] / h.norm
            candidates.extend([(-ny, nx), (ny, -nx)])
        rays = []
        for d in candidates:
            if all(g.normal[0] * d[0] + g.normal[1] * d[1] <= 1e-12 * g.norm
                   for g in self.constraints):
                if not any(_close(d, r) for r in rays):
                    rays.append(d)
        return rays

    def contains(self, p: Sequence[float]) -> bool:
        return all(h.satisfied(p) for h in self.constraints)

    def contains_many(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float).reshape(-1, 2)
        mask = np.ones(len(points), dtype=bool)
        for h in self.constraints:
            mask &= h.values(points) <= h.tolerance()
        return mask

    def clip(self, h: HalfPlane) -> "ConvexRegion":
        """This region intersected with h; redundant constraints are dropped."""
        if self.is_bounded() and not self.is_empty():
            tol = h.tolerance()
            if all(h.value(v) <= tol for v in self._vertices):
                return self
        return ConvexRegion(self.constraints + (h,), _clip_polygon(list(self._vertices), h))

    def intersect(self, other: "ConvexRegion") -> "ConvexRegion":
        region = self
        for h in other.constraints:
            region = region.clip(h)
        return region

    def area(self) -> float:
        vs = self._vertices
        if len(vs) < 3:
            return 0.0
        total = 0.0
        for i in range(len(vs)):
            x0, y0 = vs[i]
            x1, y1 = vs[(i + 1) % len(vs)]
            total += x0 * y1 - x1 * y0
        return abs(total) / 2.0

    def centroid(self) -> Point:
        if self.is_empty():
            raise ValueError("empty region has no centroid")
        xs = [v[0] for v in self._vertices]
        ys = [v[1] for v in self._vertices]
        return (sum(xs) / len(xs), sum(ys) / len(ys))

    def interior_crossed_by(self, line: HalfPlane) -> bool:
        """Does the boundary line of `line` pass through the interior of the region?"""
        if self.is_empty():
            return False
        n2 = line.normal[0] ** 2 + line.normal[1] ** 2
        p0 = (line.normal[0] * line.offset / n2, line.normal[1] * line.offset / n2)
        d = (-line.normal[1], line.normal[0])
        d_norm = math.hypot(d[0], d[1])
        lo, hi = -math.inf, math.inf
        for h in self.constraints:
            alpha = h.value(p0)
            beta = h.normal[0] * d[0] + h.normal[1] * d[1]
            tol = h.tolerance()
            if abs(beta) <= 1e-12 * h.norm * d_norm:
                if alpha >= -tol:
                    return False
                continue
            bound = (-tol - alpha) / beta
            if beta > 0:
                hi = min(hi, bound)
            else:
                lo = max(lo, bound)
            if lo >= hi:
                return False
        return lo < hi


@dataclass(frozen=True)
class AxisPlane:
    """Axis-aligned hyperplane {x : x[axis] == value}."""

    axis: int
    value: float


@dataclass(frozen=True)
class Box:
    """
    Closed axis-aligned box with extended-real bounds (lo[i] <= hi[i]).

    The rectangle-query space uses 4-D boxes; 2-D boxes serve the planar
    problems under the comparison model.
    """

    lo: Tuple[float, ...]
    hi: Tuple[float, ...]

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != len(hi) or not lo:
            raise ValueError("box bounds must have the same positive dimension")
        for a, b in zip(lo, hi):
            if math.isnan(a) or math.isnan(b) or a > b:
                raise ValueError(f"invalid box bounds lo={lo} hi={hi}")
        object.__setattr__(self, 'lo', lo)
        object.__setattr__(self, 'hi', hi)

    @classmethod
    def everything(cls, dimension: int) -> "Box":
        return cls((-math.inf,) * dimension, (math.inf,) * dimension)

    @classmethod
    def cube(cls, dimension: int, extent: float) -> "Box":
        return cls((-extent,) * dimension, (extent,) * dimension)

    @property
    def dimension(self) -> int:
        return len(self.lo)

    def is_bounded(self) -> bool:
        return all(math.isfinite(v) for v in self.lo + self.hi)

    def contains(self, p: Sequence[float]) -> bool:
        return all(a <= c <= b for a, c, b in zip(self.lo, p, self.hi))

    def contains_many(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float).reshape(-1, self.dimension)
        return np.all((points >= np.array(self.lo)) & (points <= np.array(self.hi)), axis=1)

    def intersect(self, other: "Box") -> Optional["Box"]:
        lo = tuple(max(a, b) for a, b in zip(self.lo, other.lo))
        hi = tuple(min(a, b) for a, b in zip(self.hi, other.hi))
        if any(a > b for a, b in zip(lo, hi)):
            return None
        return Box(lo, hi)

    def split(self, axis: int, value: float) -> Tuple["Box", "Box"]:
        """Halves {x[axis] <= value} and {x[axis] >= value} of this box."""
        lower_hi = list(self.hi)
        lower_hi[axis] = min(value, self.hi[axis])
        upper_lo = list(self.lo)
        upper_lo[axis] = max(value, self.lo[axis])
        return Box(self.lo, tuple(lower_hi)), Box(tuple(upper_lo), self.hi)

    def interior_crossed_by(self, plane: AxisPlane) -> bool:
        return self.lo[plane.axis] < plane.value < self.hi[plane.axis]

    def centroid(self) -> Point:
        if not self.is_bounded():
            raise UnboundedRegionError("unbounded box has no centroid")
        return tuple((a + b) / 2.0 for a, b in zip(self.lo, self.hi))


Region = Union[ConvexRegion, Box]


def working_box(dimension: int, extent: float = WORKING_BOX_EXTENT) -> Box:
    """Default construction box [-extent, extent]^dimension."""
    return Box.cube(dimension, extent)


def clip(region: ConvexRegion, h: HalfPlane) -> ConvexRegion:
    """region intersected with the halfplane h (may be empty)."""
    return region.clip(h)


def contains(region: Region, p: Sequence[float]) -> bool:
    """Closed containment test; boundary points count as inside."""
    return region.contains(p)


def triangulate(region: ConvexRegion) -> List[Triangle]:
    """
    Fan triangulation from the lexicographically smallest vertex.

    Regions with fewer than three distinct vertices yield a single
    degenerate triangle.

    Raises:
        ValueError: empty region
        UnboundedRegionError: unbounded region (clip to the working box first)
    """
    if region.is_empty():
        raise ValueError("cannot triangulate an empty region")
    if not region.is_bounded():
        raise UnboundedRegionError("cannot triangulate an unbounded region")
    vs = region.vertices
    start = min(range(len(vs)), key=lambda i: vs[i])
    vs = vs[start:] + vs[:start]
    if len(vs) < 3:
        return [(vs[0], vs[-1], vs[-1])]
    return [(vs[0], vs[i], vs[i + 1]) for i in range(1, len(vs) - 1)]


def triangle_area(tri: Triangle) -> float:
    (ax, ay), (bx, by), (cx, cy) = tri
    return abs((bx - ax) * (cy - ay) - (by - ay) * (cx - ax)) / 2.0


def sample_points(region: Region, rng: np.random.Generator, count: int) -> np.ndarray:
    """
    Draw `count` points uniformly from a bounded, non-empty region.

    Returns:
        Array of shape (count, dimension)
    """
    if isinstance(region, Box):
        if not region.is_bounded():
            raise UnboundedRegionError("cannot sample an unbounded box")
        return rng.uniform(np.array(region.lo), np.array(region.hi),
                           size=(count, region.dimension))

    triangles = triangulate(region)
    areas = np.array([triangle_area(t) for t in triangles])
    if areas.sum() <= 0:
        vs = np.array(region.vertices, dtype=float)
        weights = rng.dirichlet(np.ones(len(vs)), size=count)
        return weights @ vs
    picks = rng.choice(len(triangles), size=count, p=areas / areas.sum())
    corners = np.array(triangles, dtype=float)[picks]
    r1 = np.sqrt(rng.random(count))[:, None]
    r2 = rng.random(count)[:, None]
    return ((1 - r1) * corners[:, 0]
            + r1 * (1 - r2) * corners[:, 1]
            + r1 * r2 * corners[:, 2])
