"""
Utility functions for the odds-on tree benchmark
"""

import hashlib
import json
import math
from collections import Counter
from pathlib import Path
from typing import Any, Dict, Hashable, Iterable, Union

import numpy as np


def derive_seed(root_seed: int, *labels: Union[str, int]) -> int:
    """
    Derive a 64-bit child seed from the root seed and a list of stream labels.

    All randomness of a run flows from one root seed; every consumer asks for
    its own named stream so that adding a consumer never shifts the others.

    Args:
        root_seed: The run's root seed
        labels: Stream names, e.g. ("queries", "uniform")

    Returns:
        Unsigned 64-bit integer seed

    Example:
        >>> derive_seed(7, "inputs") == derive_seed(7, "inputs")
        True
    """
    text = "/".join([str(int(root_seed))] + [str(label) for label in labels])
    digest = hashlib.sha256(text.encode('utf-8')).digest()
    return int.from_bytes(digest[:8], 'little')


def make_rng(seed: int) -> np.random.Generator:
    """Create the numpy generator used everywhere in the package."""
    return np.random.default_rng(seed)


def entropy_bits(probabilities: Iterable[float]) -> float:
    """
    Shannon entropy in bits of a list of non-negative weights.

    Weights are renormalized to sum to 1 first.

    Args:
        probabilities: Non-negative weights

    Returns:
        Entropy in bits

    Raises:
        ValueError: If a weight is negative or all weights are zero
    """
    values = [float(p) for p in probabilities]
    if any(p < 0 or math.isnan(p) for p in values):
        raise ValueError("probabilities must be non-negative")
    total = sum(values)
    if total <= 0:
        raise ValueError("probabilities must not all be zero")
    entropy = 0.0
    for p in values:
        if p > 0:
            share = p / total
            entropy -= share * math.log2(share)
    return max(entropy, 0.0)


def plugin_entropy(outcomes: Iterable[Hashable]) -> float:
    """Plug-in entropy (bits) of the empirical distribution of outcomes."""
    counts = Counter(outcomes)
    if not counts:
        raise ValueError("no outcomes to estimate entropy from")
    return entropy_bits(counts.values())


def read_points(path: Path) -> np.ndarray:
    """
    Read a plain-text point file: one point per line, whitespace-separated decimals.

    Blank lines and lines starting with '#' are ignored.
    """
    rows = []
    with open(path, 'r', encoding='utf-8') as f:
        for line_number, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith('#'):
                continue
            try:
                rows.append([float(token) for token in line.split()])
            except ValueError:
                raise ValueError(f"{path}:{line_number}: not a list of decimals: {line!r}")
    if not rows:
        raise ValueError(f"{path}: no points found")
    width = len(rows[0])
    if any(len(row) != width for row in rows):
        raise ValueError(f"{path}: points have inconsistent dimensions")
    points = np.array(rows, dtype=float)
    if not np.all(np.isfinite(points)):
        raise ValueError(f"{path}: coordinates must be finite")
    return points


def write_points(path: Path, points: np.ndarray) -> None:
    """Write points in the format read by `read_points` (exact float repr)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        for row in np.asarray(points, dtype=float):
            f.write(" ".join(repr(float(value)) for value in row) + "\n")


def fingerprint(points: np.ndarray, label: str = "") -> str:
    """sha256 of an input array, used to tie a serialized tree to its inputs."""
    array = np.ascontiguousarray(np.asarray(points, dtype='<f8'))
    digest = hashlib.sha256(label.encode('utf-8'))
    digest.update(str(array.shape).encode('utf-8'))
    digest.update(array.tobytes())
    return digest.hexdigest()


def spec_digest(spec: Dict[str, Any]) -> str:
    """sha256 of a JSON document in canonical form (sorted keys, no whitespace)."""
    text = json.dumps(spec, sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(text.encode('utf-8')).hexdigest()


def ceil_div(a: int, b: int) -> int:
    """Integer ceiling of a / b for positive b."""
    return -(-a // b)
