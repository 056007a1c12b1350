"""
Orthogonal range counting: how many points lie in the closed rectangle
[q1, q2] x [q3, q4].
"""

import math
from typing import Hashable, List, Tuple

import numpy as np

from ..config import INPUT_EXTENT
from ..geometry import Box, Point, Region
from ..oracles import MIXED, Uniform, Verdict
from .base import App


def _search_cost(length: int) -> int:
    return max(1, math.ceil(math.log2(length + 1)))


class RectCount(App):
    """
    Rectangle counting over planar points; queries are points of R^4.

    The backup is a layered range tree kept as arrays: points sorted by x,
    and for every level l the y-coordinates sorted inside each aligned block
    of 2^l consecutive x-positions. A query splits its x-range into O(log n)
    aligned blocks and binary-searches y in each.
    """

    name = 'rectcount'
    dimension = 4
    models = ('comparison',)

    def __init__(self, points: np.ndarray):
        super().__init__(points)
        if self.points.ndim != 2 or self.points.shape[1] != 2:
            raise ValueError("rectangle counting needs planar points")
        order = np.argsort(self.points[:, 0], kind='stable')
        self._xs = self.points[order, 0]
        ys = self.points[order, 1]
        positions = np.arange(len(ys))
        self._levels: List[np.ndarray] = []
        level = 0
        while True:
            layer = np.lexsort((ys, positions >> level))
            self._levels.append(ys[layer])
            if (1 << level) >= len(ys):
                break
            level += 1

    @classmethod
    def generate(cls, n: int, rng: np.random.Generator) -> "RectCount":
        """n points uniform in the input square."""
        return cls(rng.uniform(0.0, INPUT_EXTENT, size=(n, 2)))

    def count_with_cost(self, x1: float, x2: float, y1: float, y2: float) -> Tuple[int, int]:
        """Points in [x1, x2] x [y1, y2] and the binary-search steps spent."""
        if x1 > x2 or y1 > y2:
            return 0, 1
        n = len(self._xs)
        start = int(np.searchsorted(self._xs, x1, side='left'))
        stop = int(np.searchsorted(self._xs, x2, side='right'))
        ops = 2 * _search_cost(n)
        total = 0
        while start < stop:
            level = 0
            while (start % (2 << level) == 0 and start + (2 << level) <= stop
                   and level + 1 < len(self._levels)):
                level += 1
            width = 1 << level
            block = self._levels[level][start:start + width]
            total += int(np.searchsorted(block, y2, side='right') - np.searchsorted(block, y1, side='left'))
            ops += 2 * _search_cost(width)
            start += width
        return total, ops

    def count(self, x1: float, x2: float, y1: float, y2: float) -> int:
        return self.count_with_cost(x1, x2, y1, y2)[0]

    def answer_with_cost(self, q: Point) -> Tuple[Hashable, int]:
        q1, q2, q3, q4 = (float(v) for v in q)
        return self.count_with_cost(q1, q2, q3, q4)

    def reference(self, q: Point) -> Hashable:
        q1, q2, q3, q4 = (float(v) for v in q)
        x, y = self.points[:, 0], self.points[:, 1]
        return int(np.count_nonzero((x >= q1) & (x <= q2) & (y >= q3) & (y <= q4)))

    def classify(self, region: Region) -> Verdict:
        """
        Uniform count over a box of rectangles, via inner and outer rectangles.

        Closed counts grow under inclusion, so every rectangle of the box
        counts between count(inner) and count(outer).
        """
        if not isinstance(region, Box) or region.dimension != 4:
            raise TypeError("rectangle counting classifies 4-D boxes only")
        (l1, l2, l3, l4), (h1, h2, h3, h4) = region.lo, region.hi
        if l1 > h2 or l3 > h4:
            return Uniform(0)
        outer = self.count(l1, h2, l3, h4)
        if h1 > l2 or h3 > l4:
            return Uniform(0) if outer == 0 else MIXED
        inner = self.count(h1, l2, h3, l4)
        return Uniform(outer) if inner == outer else MIXED

    def encode_label(self, answer: Hashable) -> int:
        return int(answer)

    def decode_label(self, value: int) -> Hashable:
        return int(value)
