"""
Shared fixtures for the odds-on tree test suite.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(ROOT / "src"))
sys.path.insert(0, str(ROOT))

from oddson.apps import ConvexPolygonMembership, PostOffice, RectCount  # noqa: E402
from oddson.geometry import ConvexRegion  # noqa: E402

UNIT_SQUARE = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: desk-scale acceptance runs (deselect with -m 'not slow')")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def unit_square():
    return ConvexRegion.from_polygon(UNIT_SQUARE)


@pytest.fixture
def square_polygon():
    return ConvexPolygonMembership(np.array(UNIT_SQUARE))


@pytest.fixture
def two_sites():
    return PostOffice(np.array([[0.0, 0.0], [10.0, 0.0]]))


@pytest.fixture
def single_point_counts():
    return RectCount(np.array([[5.0, 5.0]]))
