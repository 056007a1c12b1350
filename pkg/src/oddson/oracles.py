"""
Oracle contracts consumed by the odds-on tree, and the interference verdicts.
"""

from dataclasses import dataclass
from typing import Any, Hashable, Protocol, Tuple, Union, runtime_checkable

import numpy as np

from .geometry import Point, Region


class _Unreachable:
    """Label of a node whose region is empty; no query can reach it."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "UNREACHABLE"

    def __reduce__(self):
        return (_Unreachable, ())


UNREACHABLE = _Unreachable()


@dataclass(frozen=True)
class Uniform:
    """Every point of the classified region has this answer."""

    answer: Any


class _Mixed:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "MIXED"

    def __reduce__(self):
        return (_Mixed, ())


MIXED = _Mixed()

Verdict = Union[Uniform, _Mixed]


@runtime_checkable
class SamplingOracle(Protocol):
    """Draws i.i.d. query points from a distribution D."""

    dimension: int

    def draw(self, rng: np.random.Generator) -> Point: ...

    def draw_many(self, rng: np.random.Generator, count: int) -> np.ndarray: ...


@runtime_checkable
class BackupOracle(Protocol):
    """Answers any query exactly, reporting the work it took."""

    def answer(self, q: Point) -> Hashable: ...

    def answer_with_cost(self, q: Point) -> Tuple[Hashable, int]: ...


@runtime_checkable
class InterferenceOracle(Protocol):
    """
    Decides whether a region is answer-uniform.

    Uniform(a) must be sound; answering MIXED for a uniform region is allowed.
    """

    def classify(self, region: Region) -> Verdict: ...


class BackupBase:
    """Mixin deriving `answer` from `answer_with_cost`."""

    def answer(self, q: Point) -> Hashable:
        return self.answer_with_cost(q)[0]

    def answer_with_cost(self, q: Point) -> Tuple[Hashable, int]:
        raise NotImplementedError
