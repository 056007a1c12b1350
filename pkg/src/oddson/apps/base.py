"""
Common surface of the problem instantiations.

Every app is at the same time a BackupOracle (`answer`, `answer_with_cost`),
an InterferenceOracle (`classify`) and carries an independent linear-scan
reference (`reference`, `reference_many`) used by the tests and checks.
"""

from typing import Any, Hashable, List, Optional, Tuple

import numpy as np

from ..geometry import Box, ConvexRegion, Point, Region
from ..oracles import BackupBase, Verdict
from ..utils import fingerprint


class App(BackupBase):
    """Base class for a problem P with its oracles."""

    name: str = ''
    dimension: int = 2
    models: Tuple[str, ...] = ('linear', 'comparison')

    def __init__(self, points: np.ndarray):
        self.points = np.asarray(points, dtype=float)
        self._fingerprint: Optional[str] = None

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={self.size})"

    @property
    def size(self) -> int:
        return len(self.points)

    @property
    def fingerprint(self) -> str:
        if self._fingerprint is None:
            self._fingerprint = fingerprint(self.points, self.name)
        return self._fingerprint

    def supports_model(self, model: str) -> bool:
        return model in self.models

    def answer_with_cost(self, q: Point) -> Tuple[Hashable, int]:
        raise NotImplementedError

    def classify(self, region: Region) -> Verdict:
        raise NotImplementedError

    def reference(self, q: Point) -> Hashable:
        raise NotImplementedError

    def reference_many(self, queries: np.ndarray) -> List[Hashable]:
        return [self.reference(q) for q in np.asarray(queries, dtype=float)]

    def encode_label(self, answer: Hashable) -> Any:
        return answer

    def decode_label(self, value: Any) -> Hashable:
        return value


def planar_region(region: Region) -> ConvexRegion:
    """Planar apps accept 2-D boxes from the comparison model as regions."""
    if isinstance(region, Box):
        if region.dimension != 2:
            raise TypeError(f"expected a planar region, got a {region.dimension}-D box")
        return ConvexRegion.from_box(region)
    return region
