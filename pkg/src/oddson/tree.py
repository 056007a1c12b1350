"""
The odds-on tree: construction with interference trimming, routing,
querying with backup fallback, leaf-probability estimation and JSON
serialization.
"""

import json
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Dict, Hashable, Iterable, List, Mapping, Optional, Union

import numpy as np

from .config import (
    DEFAULT_DEPTH_CAP_MODE,
    DEFAULT_MIN_SAMPLES,
    DEFAULT_SEED,
    DEFAULT_TAU,
    DEPTH_CAP_MODES,
    TREE_FORMAT,
    TREE_FORMAT_VERSION,
    WORKING_BOX_EXTENT,
)
from .geometry import Box, ConvexRegion, HalfPlane, Point, Region, triangulate, working_box
from .oracles import MIXED, UNREACHABLE, BackupOracle, InterferenceOracle, SamplingOracle, Uniform, Verdict
from .partition import SplitRule
from .utils import derive_seed, entropy_bits, make_rng


class TreeFormatError(ValueError):
    """Raised when a serialized tree cannot be read."""


class NodeKind(Enum):
    INTERNAL = "internal"
    TERMINAL = "terminal"
    FRONTIER = "frontier"


def depth_cap_for(m: int, r: int, mode: str = DEFAULT_DEPTH_CAP_MODE) -> int:
    """
    Maximum depth of a tree built from m samples with split arity r.

    Modes:
        theoretical - floor(log_r(m) / 4)
        lemma       - floor(log_{r/3}(m) / 4), or the theoretical cap when r <= 3
        practical   - ceil(log_r(m))

    All caps are at least 1.
    """
    if mode not in DEPTH_CAP_MODES:
        raise ValueError(f"Unknown depth cap mode '{mode}'")
    if m <= 1:
        return 1
    log_m = math.log(m)
    theoretical = max(1, math.floor(log_m / (4 * math.log(r)) + 1e-9))
    if mode == 'theoretical':
        return theoretical
    if mode == 'lemma':
        if r <= 3:
            return theoretical
        return max(1, math.floor(log_m / (4 * math.log(r / 3)) + 1e-9))
    return max(1, math.ceil(log_m / math.log(r) - 1e-9))


@dataclass
class OddsOnConfig:
    """Construction parameters; m = max(1, ceil(n ** tau))."""

    n: int
    tau: float = DEFAULT_TAU
    depth_cap: Optional[int] = None
    depth_cap_mode: str = DEFAULT_DEPTH_CAP_MODE
    min_samples: int = DEFAULT_MIN_SAMPLES
    seed: int = DEFAULT_SEED
    working_box_extent: float = WORKING_BOX_EXTENT

    def __post_init__(self):
        if int(self.n) < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")
        if not 0 < float(self.tau) <= 1:
            raise ValueError(f"tau must lie in (0, 1], got {self.tau}")
        if self.depth_cap is not None and int(self.depth_cap) < 0:
            raise ValueError(f"depth_cap must be non-negative, got {self.depth_cap}")
        if self.depth_cap_mode not in DEPTH_CAP_MODES:
            raise ValueError(f"Unknown depth cap mode '{self.depth_cap_mode}'")
        if int(self.min_samples) < 0:
            raise ValueError("min_samples must be non-negative")
        if not self.working_box_extent > 0:
            raise ValueError("working_box_extent must be positive")

    @property
    def sample_size(self) -> int:
        # n ** tau may land a few ulps above an integer; ceil() must not round that up
        value = self.n ** self.tau
        nearest = round(value)
        if abs(value - nearest) <= 1e-9 * max(1.0, value):
            value = nearest
        return max(1, math.ceil(value))

    def resolve_depth_cap(self, arity: int) -> int:
        if self.depth_cap is not None:
            return int(self.depth_cap)
        return depth_cap_for(self.sample_size, arity, self.depth_cap_mode)


@dataclass
class Node:
    node_id: int
    depth: int
    delta: Optional[Region]
    poly: Optional[Region]
    kind: NodeKind = NodeKind.FRONTIER
    label: Any = None
    children: List["Node"] = field(default_factory=list)
    parent_id: Optional[int] = None
    sample_count: int = 0

    @property
    def is_leaf(self) -> bool:
        return self.kind is not NodeKind.INTERNAL

    @property
    def is_unreachable(self) -> bool:
        return self.kind is NodeKind.TERMINAL and self.label is UNREACHABLE


@dataclass
class QueryStats:
    nodes_visited: int
    used_backup: bool
    answer: Hashable
    backup_ops: int = 0
    leaf_id: Optional[int] = None


@dataclass
class LeafFrequencies:
    """Empirical visit frequencies of N routed samples."""

    node_frequencies: Dict[int, float]
    leaf_frequencies: Dict[int, float]
    outside_fraction: float
    sample_count: int


class OddsOnTree:
    """A built (immutable) odds-on tree."""

    def __init__(self, root: Node, nodes: List[Node], model: str, rule_name: str,
                 box: Box, config: OddsOnConfig, stats: Dict[str, int],
                 metadata: Optional[Dict[str, Any]] = None):
        self.root = root
        self.nodes = nodes
        self.model = model
        self.rule_name = rule_name
        self.working_box = box
        self.config = config
        self.stats = stats
        self.metadata = dict(metadata or {})

    def __repr__(self) -> str:
        return (f"OddsOnTree(rule={self.rule_name}, nodes={len(self.nodes)}, "
                f"terminal={self.stats.get('terminal', 0)})")

    @property
    def dimension(self) -> int:
        return self.working_box.dimension

    def leaves(self) -> List[Node]:
        return [node for node in self.nodes if node.is_leaf]

    def query(self, q: Point, backup: BackupOracle) -> QueryStats:
        return query(self, q, backup)


def _root_poly(model: str, box: Box) -> Region:
    if model == 'linear':
        return ConvexRegion.from_box(box)
    return box


def _child_poly(parent_poly: Region, delta: Region) -> Optional[Region]:
    """poly(child) = poly(parent) intersected with the child's delta; None when empty."""
    if isinstance(parent_poly, Box):
        return parent_poly.intersect(delta)
    poly = parent_poly.intersect(delta)
    return None if poly.is_empty() else poly


def _count_stats(nodes: List[Node], m: int, cap: int, calls: int) -> Dict[str, int]:
    stats = {
        'sample_size': m,
        'depth_cap': cap,
        'nodes': len(nodes),
        'internal': 0,
        'terminal': 0,
        'frontier': 0,
        'unreachable': 0,
        'max_depth': 0,
        'interference_calls': calls,
    }
    for node in nodes:
        stats['max_depth'] = max(stats['max_depth'], node.depth)
        if node.kind is NodeKind.INTERNAL:
            stats['internal'] += 1
        elif node.kind is NodeKind.FRONTIER:
            stats['frontier'] += 1
        elif node.is_unreachable:
            stats['unreachable'] += 1
        else:
            stats['terminal'] += 1
    return stats


class _Builder:
    """Top-down construction that trims each node as soon as it is created."""

    def __init__(self, interference: InterferenceOracle, rule: SplitRule,
                 cap: int, min_samples: int):
        self.interference = interference
        self.rule = rule
        self.cap = cap
        self.min_samples = min_samples
        self.nodes: List[Node] = []
        self.calls = 0

    def classify(self, poly: Region) -> Verdict:
        if isinstance(poly, Box):
            self.calls += 1
            return self.interference.classify(poly)

        # Linear model: decompose poly into triangles and combine their verdicts.
        answer = UNREACHABLE
        for triangle in triangulate(poly):
            self.calls += 1
            verdict = self.interference.classify(ConvexRegion.from_polygon(triangle))
            if verdict is MIXED:
                return MIXED
            if verdict.answer is UNREACHABLE:
                continue
            if answer is UNREACHABLE:
                answer = verdict.answer
            elif verdict.answer != answer:
                return MIXED
        return Uniform(answer)

    def grow(self, delta: Optional[Region], poly: Optional[Region], samples: np.ndarray,
             depth: int, parent_id: Optional[int]) -> Node:
        node = Node(len(self.nodes), depth, delta, poly, parent_id=parent_id,
                    sample_count=len(samples))
        self.nodes.append(node)

        if poly is None:
            node.kind, node.label = NodeKind.TERMINAL, UNREACHABLE
            return node
        verdict = self.classify(poly)
        if isinstance(verdict, Uniform):
            node.kind, node.label = NodeKind.TERMINAL, verdict.answer
            return node
        if (depth >= self.cap or len(samples) == 0 or len(samples) <= self.min_samples
                or bool(np.all(samples == samples[0]))):
            node.kind = NodeKind.FRONTIER
            return node

        result = self.rule.split(samples, depth)
        node.kind = NodeKind.INTERNAL
        for region, indices in zip(result.child_regions, result.assigned_samples):
            child = self.grow(region, _child_poly(poly, region), samples[indices],
                              depth + 1, node.node_id)
            node.children.append(child)
        return node


def build(config: OddsOnConfig, sampler: SamplingOracle, interference: InterferenceOracle,
          rule: SplitRule, rng: Optional[np.random.Generator] = None) -> OddsOnTree:
    """
    Build an odds-on tree.

    Draws m samples, then grows the tree top-down. A node whose poly the
    interference oracle reports uniform becomes a terminal leaf and is not
    split further; a node that hits the depth cap, holds at most
    min_samples samples, or whose samples all coincide becomes a frontier
    leaf. Node ids follow preorder.

    Args:
        config: Construction parameters
        sampler: Draws the construction sample
        interference: Decides uniformity of node regions
        rule: Split rule (fixes the model and the arity)
        rng: Optional generator; derived from config.seed when omitted

    Returns:
        The built tree; `tree.stats` holds the construction counters
    """
    if rng is None:
        rng = make_rng(derive_seed(config.seed, "samples"))
    m = config.sample_size
    samples = np.asarray(sampler.draw_many(rng, m), dtype=float).reshape(m, -1)
    dimension = samples.shape[1]
    if rule.model == 'linear' and dimension != 2:
        raise ValueError("the two-line rule needs planar samples")

    box = working_box(dimension, config.working_box_extent)
    cap = config.resolve_depth_cap(rule.arity())
    builder = _Builder(interference, rule, cap, config.min_samples)
    root = builder.grow(None, _root_poly(rule.model, box), samples, 0, None)
    stats = _count_stats(builder.nodes, m, cap, builder.calls)
    return OddsOnTree(root, builder.nodes, rule.model, rule.name, box, config, stats)


def route_child(node: Node, q: Point) -> int:
    """Index of the first child whose delta contains q."""
    for index, child in enumerate(node.children):
        if child.delta.contains(q):
            return index
    raise LookupError(f"no child of node {node.node_id} contains {tuple(q)}")


def query(tree: OddsOnTree, q: Point, backup: BackupOracle) -> QueryStats:
    """
    Answer q through the tree, falling back to the backup oracle.

    Terminal leaves answer directly; frontier leaves and queries outside
    the working box are handed to the backup.
    """
    if not tree.working_box.contains(q):
        answer, ops = backup.answer_with_cost(q)
        return QueryStats(1, True, answer, ops, None)
    node = tree.root
    visited = 1
    while node.kind is NodeKind.INTERNAL:
        node = node.children[route_child(node, q)]
        visited += 1
    if node.kind is NodeKind.TERMINAL and node.label is not UNREACHABLE:
        return QueryStats(visited, False, node.label, 0, node.node_id)
    answer, ops = backup.answer_with_cost(q)
    return QueryStats(visited, True, answer, ops, node.node_id)


def route_many(tree: OddsOnTree, points: np.ndarray) -> np.ndarray:
    """
    Leaf id reached by each point (-1 outside the working box).

    Vectorized equivalent of repeated `route_child` walks.
    """
    points = np.asarray(points, dtype=float).reshape(-1, tree.dimension)
    leaf_ids = np.full(len(points), -1, dtype=int)
    inside = np.flatnonzero(tree.working_box.contains_many(points))
    stack = [(tree.root, inside)]
    while stack:
        node, indices = stack.pop()
        if node.kind is not NodeKind.INTERNAL:
            leaf_ids[indices] = node.node_id
            continue
        remaining = indices
        for child in node.children:
            if len(remaining) == 0:
                break
            hit = child.delta.contains_many(points[remaining])
            stack.append((child, remaining[hit]))
            remaining = remaining[~hit]
    return leaf_ids


def estimate_leaf_probabilities(tree: OddsOnTree, sampler: SamplingOracle, N: int,
                                rng: Optional[np.random.Generator] = None) -> LeafFrequencies:
    """
    Route N fresh samples and report visit frequencies per node and per leaf.

    Leaf frequencies plus `outside_fraction` sum to 1.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    if rng is None:
        rng = make_rng(derive_seed(tree.config.seed, "leaf-probabilities"))
    points = np.asarray(sampler.draw_many(rng, N), dtype=float)
    leaf_ids = route_many(tree, points)

    parents = {node.node_id: node.parent_id for node in tree.nodes}
    leaf_counts = np.bincount(leaf_ids[leaf_ids >= 0], minlength=len(tree.nodes))
    node_counts = np.zeros(len(tree.nodes), dtype=np.int64)
    for node_id in np.flatnonzero(leaf_counts):
        current = int(node_id)
        while current is not None:
            node_counts[current] += leaf_counts[node_id]
            current = parents[current]

    leaf_frequencies = {node.node_id: float(leaf_counts[node.node_id] / N) for node in tree.leaves()}
    node_frequencies = {node.node_id: float(node_counts[node.node_id] / N) for node in tree.nodes}
    outside = int(np.count_nonzero(leaf_ids < 0))
    return LeafFrequencies(node_frequencies, leaf_frequencies, outside / N, N)


def leaf_entropy(probabilities: Union[Mapping[Any, float], Iterable[float]]) -> float:
    """
    Entropy in bits of leaf probabilities, renormalized to sum to 1.

    Examples:
        >>> leaf_entropy({1: 0.5, 2: 0.5})
        1.0
        >>> leaf_entropy([0.25] * 4)
        2.0
    """
    if isinstance(probabilities, Mapping):
        probabilities = probabilities.values()
    return entropy_bits(probabilities)


# --- serialization ---------------------------------------------------------

def _floats_out(values: Iterable[float]) -> List[str]:
    return [repr(float(v)) for v in values]


def _floats_in(values: Iterable[str]) -> List[float]:
    return [float(v) for v in values]


def _encode_region(region: Optional[Region]) -> Optional[Dict[str, Any]]:
    if region is None:
        return None
    if isinstance(region, Box):
        return {'lo': _floats_out(region.lo), 'hi': _floats_out(region.hi)}
    return {'constraints': [_floats_out(h.normal + (h.offset,)) for h in region.constraints]}


def _decode_region(data: Optional[Dict[str, Any]]) -> Optional[Region]:
    if data is None:
        return None
    if 'constraints' in data:
        constraints = []
        for row in data['constraints']:
            nx, ny, offset = _floats_in(row)
            constraints.append(HalfPlane((nx, ny), offset))
        return ConvexRegion(constraints)
    return Box(tuple(_floats_in(data['lo'])), tuple(_floats_in(data['hi'])))


def tree_to_dict(tree: OddsOnTree, encode_label: Callable[[Any], Any] = lambda a: a) -> Dict[str, Any]:
    """Versioned JSON-ready description of the tree."""
    nodes = []
    for node in tree.nodes:
        label = None
        if node.kind is NodeKind.TERMINAL and node.label is not UNREACHABLE:
            label = encode_label(node.label)
        nodes.append({
            'id': node.node_id,
            'parent': node.parent_id,
            'depth': node.depth,
            'kind': node.kind.value,
            'label': label,
            'samples': node.sample_count,
            'delta': _encode_region(node.delta),
        })
    return {
        'format': TREE_FORMAT,
        'version': TREE_FORMAT_VERSION,
        'model': tree.model,
        'rule': tree.rule_name,
        'working_box': _encode_region(tree.working_box),
        'config': asdict(tree.config),
        'stats': dict(tree.stats),
        'metadata': dict(tree.metadata),
        'nodes': nodes,
    }


def tree_from_dict(data: Dict[str, Any], decode_label: Callable[[Any], Any] = lambda a: a) -> OddsOnTree:
    """Rebuild a tree; poly regions are recomputed from the stored deltas."""
    if not isinstance(data, dict):
        raise TreeFormatError("tree document must be a JSON object")
    if data.get('format') != TREE_FORMAT:
        raise TreeFormatError(f"not an odds-on tree document (format={data.get('format')!r})")
    if data.get('version') != TREE_FORMAT_VERSION:
        raise TreeFormatError(f"unsupported tree format version {data.get('version')!r}")
    try:
        box = _decode_region(data['working_box'])
        model, rule_name = data['model'], data['rule']
        nodes: List[Node] = []
        for entry in data['nodes']:
            kind = NodeKind(entry['kind'])
            delta = _decode_region(entry['delta'])
            parent = None if entry['parent'] is None else nodes[entry['parent']]
            if parent is None:
                poly = _root_poly(model, box)
            else:
                poly = None if parent.poly is None else _child_poly(parent.poly, delta)
            label = None
            if kind is NodeKind.TERMINAL:
                label = UNREACHABLE if entry['label'] is None else decode_label(entry['label'])
            node = Node(entry['id'], entry['depth'], delta, poly, kind, label,
                        parent_id=entry['parent'], sample_count=entry.get('samples', 0))
            if node.node_id != len(nodes):
                raise TreeFormatError("node ids must be consecutive in preorder")
            nodes.append(node)
            if parent is not None:
                parent.children.append(node)
        config = OddsOnConfig(**data['config'])
    except TreeFormatError:
        raise
    except (KeyError, IndexError, TypeError, ValueError) as e:
        raise TreeFormatError(f"malformed tree document: {e}")
    if not nodes:
        raise TreeFormatError("tree has no nodes")
    return OddsOnTree(nodes[0], nodes, model, rule_name, box, config,
                      dict(data.get('stats', {})), data.get('metadata'))


def save_tree(tree: OddsOnTree, path: Path, encode_label: Callable[[Any], Any] = lambda a: a) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(tree_to_dict(tree, encode_label), f, indent=2, sort_keys=True)


def load_tree(path: Path, decode_label: Callable[[Any], Any] = lambda a: a) -> OddsOnTree:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise TreeFormatError(f"{path}: invalid JSON: {e}")
    return tree_from_dict(data, decode_label)
