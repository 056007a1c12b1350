"""
Problem instantiations: convex polygon membership, post office and
rectangle counting.
"""

from typing import Dict, Type

import numpy as np

from .base import App, planar_region
from .polygon import ConvexPolygonMembership, Membership
from .postoffice import PostOffice
from .rectcount import RectCount

APPS: Dict[str, Type[App]] = {
    ConvexPolygonMembership.name: ConvexPolygonMembership,
    PostOffice.name: PostOffice,
    RectCount.name: RectCount,
}


def app_class(name: str) -> Type[App]:
    if name not in APPS:
        raise ValueError(f"Unknown app '{name}' (expected one of {sorted(APPS)})")
    return APPS[name]


def make_app(name: str, points: np.ndarray) -> App:
    """App over explicit inputs (polygon vertices, sites or data points)."""
    return app_class(name)(points)


def generate_app(name: str, n: int, rng: np.random.Generator) -> App:
    """App over n generated inputs."""
    if n < 1:
        raise ValueError("n must be positive")
    return app_class(name).generate(n, rng)


__all__ = [
    'APPS', 'App', 'ConvexPolygonMembership', 'Membership', 'PostOffice', 'RectCount',
    'app_class', 'generate_app', 'make_app', 'planar_region',
]
