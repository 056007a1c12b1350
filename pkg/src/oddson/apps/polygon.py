"""
Point location in a single convex polygon (inside / outside).
"""

import math
from enum import Enum
from typing import Hashable, List, Tuple

import numpy as np

from ..config import INPUT_EXTENT
from ..geometry import Orientation, Point, Region, orientation, orientation_signs, segment_hits_any
from ..oracles import MIXED, UNREACHABLE, Uniform, Verdict
from .base import App, planar_region


class Membership(str, Enum):
    INSIDE = 'inside'
    OUTSIDE = 'outside'


class ConvexPolygonMembership(App):
    """
    Membership in a strictly convex polygon given counterclockwise.

    The backup searches the fan of triangles around the vertex centroid:
    one orientation test places q in the upper or lower half-turn relative
    to the first fan ray, a binary search finds the fan wedge, and a final
    test against the wedge's polygon edge decides membership. The closed
    boundary counts as inside.
    """

    name = 'polygon'

    def __init__(self, vertices: np.ndarray):
        super().__init__(vertices)
        if self.points.ndim != 2 or self.points.shape[1] != 2 or len(self.points) < 3:
            raise ValueError("a polygon needs at least 3 planar vertices")
        n = len(self.points)
        self._vertices: List[Point] = [tuple(v) for v in self.points.tolist()]
        for i in range(n):
            a, b, c = self._vertices[i], self._vertices[(i + 1) % n], self._vertices[(i + 2) % n]
            if orientation(a, b, c) is not Orientation.LEFT:
                raise ValueError(f"polygon must be strictly convex and counterclockwise (vertex {i + 1})")
        self.anchor: Point = (float(np.mean(self.points[:, 0])), float(np.mean(self.points[:, 1])))
        self._halves = [self._half(v)[0] for v in self._vertices]
        self._edge_starts = self.points
        self._edge_ends = np.roll(self.points, -1, axis=0)

    @classmethod
    def generate(cls, n: int, rng: np.random.Generator) -> "ConvexPolygonMembership":
        """n vertices on the circle of radius 0.4*extent around the center of the input square."""
        if n < 3:
            raise ValueError("a polygon needs at least 3 vertices")
        center, radius = INPUT_EXTENT / 2.0, 0.4 * INPUT_EXTENT
        angles = np.unique(rng.uniform(0.0, 2.0 * math.pi, size=n))
        while len(angles) < n:
            angles = np.unique(np.concatenate([angles, rng.uniform(0.0, 2.0 * math.pi, size=n - len(angles))]))
        vertices = np.column_stack([center + radius * np.cos(angles), center + radius * np.sin(angles)])
        return cls(vertices)

    def _half(self, p: Point) -> Tuple[int, int]:
        """(0 or 1, orientation tests used): which half-turn from the ray anchor->v0 holds p."""
        c, v0 = self.anchor, self._vertices[0]
        turn = orientation(c, v0, p)
        if turn is Orientation.LEFT:
            return 0, 1
        if turn is Orientation.RIGHT:
            return 1, 1
        same_direction = (v0[0] - c[0]) * (p[0] - c[0]) + (v0[1] - c[1]) * (p[1] - c[1]) >= 0
        return (0 if same_direction else 1), 1

    def answer_with_cost(self, q: Point) -> Tuple[Hashable, int]:
        q = (float(q[0]), float(q[1]))
        c = self.anchor
        if q == c:
            return Membership.INSIDE, 0
        half_q, ops = self._half(q)

        # Largest i whose vertex precedes q in angular order starting at v0.
        lo, hi = 0, len(self._vertices) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            half_v = self._halves[mid]
            if half_v != half_q:
                precedes = half_v < half_q
            else:
                ops += 1
                precedes = orientation(c, self._vertices[mid], q) is not Orientation.RIGHT
            if precedes:
                lo = mid
            else:
                hi = mid - 1

        a = self._vertices[lo]
        b = self._vertices[(lo + 1) % len(self._vertices)]
        ops += 1
        inside = orientation(a, b, q) is not Orientation.RIGHT
        return (Membership.INSIDE if inside else Membership.OUTSIDE), ops

    def reference(self, q: Point) -> Hashable:
        n = len(self._vertices)
        for i in range(n):
            if orientation(self._vertices[i], self._vertices[(i + 1) % n], q) is Orientation.RIGHT:
                return Membership.OUTSIDE
        return Membership.INSIDE

    def reference_many(self, queries: np.ndarray) -> List[Hashable]:
        queries = np.asarray(queries, dtype=float).reshape(-1, 2)
        inside = np.ones(len(queries), dtype=bool)
        n = len(self._vertices)
        for i in range(n):
            inside &= orientation_signs(self._vertices[i], self._vertices[(i + 1) % n], queries) >= 0
        return [Membership.INSIDE if flag else Membership.OUTSIDE for flag in inside]

    def classify(self, region: Region) -> Verdict:
        region = planar_region(region)
        if region.is_empty():
            return Uniform(UNREACHABLE)
        if not region.is_bounded():
            return MIXED
        if region.contains_many(self.points).any():
            return MIXED
        vertices = region.vertices
        k = len(vertices)
        for i in range(k):
            if segment_hits_any(vertices[i], vertices[(i + 1) % k], self._edge_starts, self._edge_ends):
                return MIXED
        return Uniform(self.answer(region.centroid()))

    def encode_label(self, answer: Hashable) -> str:
        return Membership(answer).value

    def decode_label(self, value: str) -> Hashable:
        return Membership(value)
