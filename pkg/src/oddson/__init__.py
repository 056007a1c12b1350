"""
Odds-on trees: entropy-bounded filters in front of exact query structures.
"""

__version__ = "1.0.0"

from .geometry import Box, ConvexRegion, HalfPlane, clip, contains, orientation, segments_intersect, triangulate
from .oracles import MIXED, UNREACHABLE, Uniform
from .partition import KdRule, TwoLineRule, crossing_count, kd_split, two_line_split
from .tree import (
    OddsOnConfig,
    OddsOnTree,
    QueryStats,
    build,
    estimate_leaf_probabilities,
    leaf_entropy,
    query,
    route_child,
)

__all__ = [
    'Box', 'ConvexRegion', 'HalfPlane', 'KdRule', 'MIXED', 'OddsOnConfig', 'OddsOnTree',
    'QueryStats', 'TwoLineRule', 'UNREACHABLE', 'Uniform', 'build', 'clip', 'contains',
    'crossing_count', 'estimate_leaf_probabilities', 'kd_split', 'leaf_entropy',
    'orientation', 'query', 'route_child', 'segments_intersect', 'triangulate',
    'two_line_split',
]
