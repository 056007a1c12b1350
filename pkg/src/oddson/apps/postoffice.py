"""
Planar post-office problem: the nearest site, ties to the lowest index.
"""

from typing import Hashable, List, Tuple

import numpy as np

from ..config import INPUT_EXTENT
from ..geometry import Point, Region
from ..oracles import MIXED, UNREACHABLE, Uniform, Verdict
from .base import App, planar_region


class PostOffice(App):
    """
    Nearest-site queries over distinct planar sites.

    The backup is a balanced k-d tree stored implicitly: node arrays hold
    the site at the node, its split axis, the two child slots and the
    bounding box of the subtree.
    """

    name = 'postoffice'

    def __init__(self, sites: np.ndarray):
        super().__init__(sites)
        if self.points.ndim != 2 or self.points.shape[1] != 2 or len(self.points) == 0:
            raise ValueError("post office needs at least one planar site")
        if len(np.unique(self.points, axis=0)) != len(self.points):
            raise ValueError("sites must be pairwise distinct")
        self._xs = self.points[:, 0].tolist()
        self._ys = self.points[:, 1].tolist()
        self._build_index()

    @classmethod
    def generate(cls, n: int, rng: np.random.Generator) -> "PostOffice":
        """n sites uniform in the input square."""
        return cls(rng.uniform(0.0, INPUT_EXTENT, size=(n, 2)))

    def _build_index(self) -> None:
        n = len(self.points)
        self._site = np.full(n, -1, dtype=int)
        self._axis = np.zeros(n, dtype=int)
        self._left = np.full(n, -1, dtype=int)
        self._right = np.full(n, -1, dtype=int)
        self._bounds = np.zeros((n, 4))

        slots = 0
        root_slot = slots
        slots += 1
        stack = [(root_slot, np.arange(n), 0)]
        while stack:
            slot, indices, depth = stack.pop()
            subset = self.points[indices]
            self._bounds[slot] = (subset[:, 0].min(), subset[:, 0].max(),
                                  subset[:, 1].min(), subset[:, 1].max())
            axis = depth % 2
            mid = len(indices) // 2
            order = np.argpartition(self.points[indices, axis], mid)
            indices = indices[order]
            self._site[slot] = indices[mid]
            self._axis[slot] = axis
            if mid > 0:
                self._left[slot] = slots
                stack.append((slots, indices[:mid], depth + 1))
                slots += 1
            if mid + 1 < len(indices):
                self._right[slot] = slots
                stack.append((slots, indices[mid + 1:], depth + 1))
                slots += 1
        self._site = self._site.tolist()
        self._axis = self._axis.tolist()
        self._left = self._left.tolist()
        self._right = self._right.tolist()
        self._bounds = self._bounds.tolist()

    def _box_distance2(self, slot: int, qx: float, qy: float) -> float:
        lox, hix, loy, hiy = self._bounds[slot]
        dx = max(lox - qx, 0.0, qx - hix)
        dy = max(loy - qy, 0.0, qy - hiy)
        return dx * dx + dy * dy

    def answer_with_cost(self, q: Point) -> Tuple[Hashable, int]:
        qx, qy = float(q[0]), float(q[1])
        best_d2, best_index = float('inf'), -1
        visited = 0
        stack = [0]
        while stack:
            slot = stack.pop()
            # Ties may sit in any subtree, so only a strictly farther box is pruned.
            if self._box_distance2(slot, qx, qy) > best_d2:
                continue
            visited += 1
            site = self._site[slot]
            dx = self._xs[site] - qx
            dy = self._ys[site] - qy
            d2 = dx * dx + dy * dy
            if (d2, site) < (best_d2, best_index):
                best_d2, best_index = d2, site
            if self._axis[slot] == 0:
                diff = qx - self._xs[site]
            else:
                diff = qy - self._ys[site]
            near, far = (self._left[slot], self._right[slot]) if diff <= 0 else (self._right[slot], self._left[slot])
            if far >= 0:
                stack.append(far)
            if near >= 0:
                stack.append(near)
        return best_index, visited

    def reference(self, q: Point) -> Hashable:
        dx = self.points[:, 0] - float(q[0])
        dy = self.points[:, 1] - float(q[1])
        return int(np.argmin(dx * dx + dy * dy))

    def reference_many(self, queries: np.ndarray) -> List[Hashable]:
        return [self.reference(q) for q in np.asarray(queries, dtype=float)]

    def classify(self, region: Region) -> Verdict:
        """
        Uniform(p) when every vertex of the region has nearest site p.

        The tie-broken Voronoi cell of p is convex, so its vertices lying in
        the cell put the whole region in it.
        """
        region = planar_region(region)
        if region.is_empty():
            return Uniform(UNREACHABLE)
        if len(self.points) == 1:
            return Uniform(0)
        if not region.is_bounded():
            return MIXED
        vertices = region.vertices
        p = self.answer(vertices[0])
        for v in vertices[1:]:
            if self.answer(v) != p:
                return MIXED
        return Uniform(p)

    def encode_label(self, answer: Hashable) -> int:
        return int(answer)

    def decode_label(self, value: int) -> Hashable:
        return int(value)
