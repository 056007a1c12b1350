"""
Invariant suite run by the `check` subcommand.

Every check returns a CheckResult; a failing result names the offending
node where there is one.
"""

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from .config import CHECK_SETTINGS
from .geometry import AxisPlane, HalfPlane, sample_points
from .oracles import UNREACHABLE
from .partition import SplitResult, SplitRule, crossing_count
from .tree import NodeKind, OddsOnTree, estimate_leaf_probabilities, query, route_many


@dataclass
class CheckResult:
    name: str
    passed: bool
    message: str = ''
    node_id: Optional[int] = None

    def __str__(self) -> str:
        status = "✅" if self.passed else "❌"
        where = f" (node {self.node_id})" if self.node_id is not None else ""
        return f"{status} {self.name}{where}: {self.message}"


@dataclass
class CheckReport:
    results: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(result.passed for result in self.results)

    @property
    def failures(self) -> List[CheckResult]:
        return [result for result in self.results if not result.passed]

    def add(self, result: CheckResult) -> None:
        self.results.append(result)


def _random_line(rng: np.random.Generator, lo: float, hi: float) -> HalfPlane:
    a, b = rng.uniform(lo, hi, size=(2, 2))
    while np.array_equal(a, b):
        b = rng.uniform(lo, hi, size=2)
    return HalfPlane.left_of(a, b)


def _recount(result: SplitResult, points: np.ndarray) -> List[int]:
    """Independent first-containing assignment, one point at a time."""
    sizes = [0] * result.arity
    for p in points:
        for index, region in enumerate(result.child_regions):
            if region.contains(p):
                sizes[index] += 1
                break
    return sizes


def check_partition(rule: SplitRule, dimension: int, rng: np.random.Generator,
                    settings: Dict = CHECK_SETTINGS) -> CheckResult:
    """Size bound, recount agreement and crossing bound on random generic samples."""
    name = f"partition[{rule.name}]"
    max_crossings = 3 if rule.model == 'linear' else 1
    for m in settings['partition_sizes']:
        bound = math.ceil(m / rule.arity())
        for trial in range(settings['partition_trials']):
            points = rng.uniform(0.0, 1.0, size=(m, dimension))
            result = rule.split(points, trial)
            if max(result.sizes) > bound:
                return CheckResult(name, False, f"m={m}: cell sizes {result.sizes} exceed {bound}")
            if rule.model == 'linear' and _recount(result, points) != result.sizes:
                return CheckResult(name, False, f"m={m}: recount disagrees with {result.sizes}")
            for _ in range(settings['random_lines']):
                if rule.model == 'linear':
                    line = _random_line(rng, -1.0, 2.0)
                else:
                    line = AxisPlane(result.boundaries[0].axis, float(rng.uniform(-1.0, 2.0)))
                count = crossing_count(result, line)
                if count > max_crossings:
                    return CheckResult(name, False, f"m={m}: a line crosses {count} cells")
    return CheckResult(name, True, f"sizes {list(settings['partition_sizes'])} within bounds")


def check_node_crossings(tree: OddsOnTree, rng: np.random.Generator,
                         settings: Dict = CHECK_SETTINGS) -> CheckResult:
    """Random lines cross at most 3 (linear) or 1 (k-d, same axis) children of each node."""
    name = "node-crossings"
    extent = tree.working_box.hi[0]
    for node in tree.nodes:
        if node.kind is not NodeKind.INTERNAL:
            continue
        result = SplitResult(tuple(child.delta for child in node.children),
                             [np.empty(0, dtype=int)] * len(node.children))
        for _ in range(settings['random_lines']):
            if tree.model == 'linear':
                line = _random_line(rng, -extent, extent)
                limit = 3
            else:
                first = node.children[0].delta
                axis = next(i for i, v in enumerate(first.hi) if math.isfinite(v))
                line = AxisPlane(axis, float(rng.uniform(-extent, extent)))
                limit = 1
            if crossing_count(result, line) > limit:
                return CheckResult(name, False, "a line crosses too many children", node.node_id)
    return CheckResult(name, True, "crossing bound holds at every internal node")


def check_soundness(tree: OddsOnTree, app, rng: np.random.Generator,
                    settings: Dict = CHECK_SETTINGS) -> CheckResult:
    """Points sampled from every terminal poly have the terminal's label."""
    name = "terminal-soundness"
    checked = 0
    for node in tree.nodes:
        if node.kind is not NodeKind.TERMINAL or node.label is UNREACHABLE:
            continue
        points = sample_points(node.poly, rng, settings['soundness_points'])
        answers = app.reference_many(points)
        for point, answer in zip(points, answers):
            if answer != node.label:
                return CheckResult(name, False,
                                   f"label {node.label!r} but {tuple(point)} answers {answer!r}",
                                   node.node_id)
        checked += 1
    return CheckResult(name, True, f"{checked} terminal leaves sound")


def check_nesting(tree: OddsOnTree, rng: np.random.Generator,
                  settings: Dict = CHECK_SETTINGS) -> CheckResult:
    """Points of every child poly lie in the parent poly."""
    name = "nesting"
    for node in tree.nodes:
        if node.parent_id is None or node.poly is None:
            continue
        parent = tree.nodes[node.parent_id]
        points = sample_points(node.poly, rng, settings['nesting_points'])
        if not np.all(parent.poly.contains_many(points)):
            return CheckResult(name, False, "child poly leaves its parent", node.node_id)
    return CheckResult(name, True, "every poly nests in its parent")


def frequency_bound(depth: int, N: int, ratio: float = 0.75) -> float:
    """Visit-frequency ceiling ratio^depth plus three binomial standard errors."""
    base = ratio ** depth
    return base + 3.0 * math.sqrt(base / N)


def check_frequency_bound(tree: OddsOnTree, sampler, rng: np.random.Generator,
                          settings: Dict = CHECK_SETTINGS) -> CheckResult:
    """
    Each depth-i node of a four-way tree is visited with frequency at most
    (3/4)^i (plus sampling slack), for the configured quantile of nodes per depth.
    """
    name = "visit-frequency"
    if tree.rule_name != 'two-line':
        return CheckResult(name, True, "skipped (only defined for the two-line rule)")
    N = settings['frequency_samples']
    frequencies = estimate_leaf_probabilities(tree, sampler, N, rng).node_frequencies
    by_depth = defaultdict(list)
    for node in tree.nodes:
        by_depth[node.depth].append(node)
    for depth, nodes in sorted(by_depth.items()):
        bound = frequency_bound(depth, N)
        over = [node for node in nodes if frequencies[node.node_id] > bound]
        if len(over) > (1.0 - settings['frequency_quantile']) * len(nodes):
            worst = max(over, key=lambda node: frequencies[node.node_id])
            return CheckResult(name, False,
                               f"depth {depth}: frequency {frequencies[worst.node_id]:.4f} > {bound:.4f}",
                               worst.node_id)
    return CheckResult(name, True, f"all depths within (3/4)^i at N={N}")


def check_routing(tree: OddsOnTree, app, sampler, rng: np.random.Generator,
                  settings: Dict = CHECK_SETTINGS) -> CheckResult:
    """
    Tree answers equal the reference on drawn queries, no query reaches an
    unreachable node, and each path visits depth + 1 nodes.
    """
    name = "routing"
    queries = sampler.draw_many(rng, settings['routing_queries'])
    expected = app.reference_many(queries)
    leaf_ids = route_many(tree, queries)
    for q, answer, leaf_id in zip(queries, expected, leaf_ids):
        stats = query(tree, tuple(q), app)
        if stats.answer != answer:
            return CheckResult(name, False, f"{tuple(q)}: tree says {stats.answer!r}, reference {answer!r}",
                               stats.leaf_id)
        if stats.leaf_id is None:
            continue
        leaf = tree.nodes[stats.leaf_id]
        if leaf.is_unreachable:
            return CheckResult(name, False, f"{tuple(q)} reached an unreachable node", leaf.node_id)
        if stats.nodes_visited != leaf.depth + 1 or leaf_id != stats.leaf_id:
            return CheckResult(name, False, f"{tuple(q)}: inconsistent path", leaf.node_id)
    return CheckResult(name, True, f"{len(queries)} queries match the reference")


def run_checks(tree: OddsOnTree, app, sampler, rule: SplitRule, rng: np.random.Generator,
               settings: Optional[Dict] = None) -> CheckReport:
    """Run the whole suite against one built tree."""
    settings = {**CHECK_SETTINGS, **(settings or {})}
    report = CheckReport()
    report.add(check_partition(rule, tree.dimension, rng, settings))
    report.add(check_node_crossings(tree, rng, settings))
    report.add(check_soundness(tree, app, rng, settings))
    report.add(check_nesting(tree, rng, settings))
    report.add(check_frequency_bound(tree, sampler, rng, settings))
    report.add(check_routing(tree, app, sampler, rng, settings))
    return report
