"""
Benchmark driver: configuration, input generation, tree building, query
workloads and invariant checks.
"""

import json
import math
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .apps import App, app_class, generate_app, make_app
from .checks import CheckReport, run_checks
from .config import (
    APP_DIMENSIONS,
    CSV_SCHEMA_VERSION,
    DEFAULT_DEPTH_CAP_MODE,
    DEFAULT_MIN_SAMPLES,
    DEFAULT_QUERY_COUNT,
    DEFAULT_RULES,
    DEFAULT_SEED,
    DEFAULT_TAU,
    DEPTH_CAP_MODES,
    SUPPORTED_APPS,
    SUPPORTED_RULES,
    WORKING_BOX_EXTENT,
)
from .distributions import QueryDistribution, from_spec
from .partition import rule_for
from .report import append_rows, write_sidecar
from .tree import (
    NodeKind,
    OddsOnConfig,
    OddsOnTree,
    QueryStats,
    TreeFormatError,
    build,
    load_tree,
    query,
    save_tree,
)
from .utils import derive_seed, make_rng, plugin_entropy, read_points, spec_digest, write_points


class ConfigError(ValueError):
    """Invalid benchmark configuration."""


class TreeMismatchError(ValueError):
    """A serialized tree was built for other inputs or settings."""


@dataclass
class BenchConfig:
    app: str
    n: int
    tau: float = DEFAULT_TAU
    rule: Optional[str] = None
    depth_cap_mode: str = DEFAULT_DEPTH_CAP_MODE
    depth_cap: Optional[int] = None
    min_samples: int = DEFAULT_MIN_SAMPLES
    distributions: List[Dict[str, Any]] = field(default_factory=list)
    query_count: int = DEFAULT_QUERY_COUNT
    seed: int = DEFAULT_SEED
    output: str = 'results'
    inputs: Optional[str] = None
    working_box_extent: float = WORKING_BOX_EXTENT
    check: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.app not in SUPPORTED_APPS:
            raise ConfigError(f"Unknown app '{self.app}' (expected one of {sorted(SUPPORTED_APPS)})")
        if self.rule is None:
            self.rule = DEFAULT_RULES[self.app]
        if self.rule not in SUPPORTED_RULES:
            raise ConfigError(f"Unknown rule '{self.rule}' (expected one of {sorted(SUPPORTED_RULES)})")
        if rule_for(self.rule).model not in app_class(self.app).models:
            raise ConfigError(f"app '{self.app}' does not support the '{self.rule}' rule")
        if not isinstance(self.n, int) or self.n < 1:
            raise ConfigError("n must be a positive integer")
        if not 0 < self.tau <= 1:
            raise ConfigError("tau must lie in (0, 1]")
        if self.depth_cap_mode not in DEPTH_CAP_MODES | {'explicit'}:
            raise ConfigError(f"Unknown depth_cap_mode '{self.depth_cap_mode}'")
        if self.depth_cap_mode == 'explicit' and (self.depth_cap is None or self.depth_cap < 1):
            raise ConfigError("an explicit depth cap must be a positive integer")
        if self.min_samples < 0:
            raise ConfigError("min_samples must be non-negative")
        if not self.distributions:
            raise ConfigError("at least one distribution is required")
        if self.query_count < 1:
            raise ConfigError("query_count must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if not self.working_box_extent > 0:
            raise ConfigError("working_box_extent must be positive")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "BenchConfig":
        """
        Parse a config document.

        `depth_cap_mode` may be a mode name, an integer, or {"explicit": k};
        `distribution` (one spec) is accepted in place of `distributions`.
        """
        data = dict(data)
        known = set(cls.__dataclass_fields__) | {'distribution'}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"Unknown config keys: {sorted(unknown)}")
        if 'distribution' in data:
            data.setdefault('distributions', []).append(data.pop('distribution'))
        mode = data.get('depth_cap_mode', DEFAULT_DEPTH_CAP_MODE)
        if isinstance(mode, bool):
            raise ConfigError("depth_cap_mode must be a name or an integer")
        if isinstance(mode, int):
            data['depth_cap_mode'], data['depth_cap'] = 'explicit', mode
        elif isinstance(mode, dict):
            if set(mode) != {'explicit'}:
                raise ConfigError(f"invalid depth_cap_mode {mode!r}")
            data['depth_cap_mode'], data['depth_cap'] = 'explicit', mode['explicit']
        try:
            return cls(**data)
        except TypeError as e:
            raise ConfigError(f"invalid config: {e}")

    @classmethod
    def load(cls, path: Path) -> "BenchConfig":
        try:
            with open(path, 'r', encoding='utf-8') as f:
                data = json.load(f)
        except FileNotFoundError:
            raise ConfigError(f"Config file not found: {path}")
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: invalid JSON: {e}")
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        return cls.from_dict(data)

    def odds_on_config(self) -> OddsOnConfig:
        mode = DEFAULT_DEPTH_CAP_MODE if self.depth_cap_mode == 'explicit' else self.depth_cap_mode
        cap = self.depth_cap if self.depth_cap_mode == 'explicit' else None
        return OddsOnConfig(self.n, self.tau, cap, mode, self.min_samples, self.seed,
                            self.working_box_extent)

    @property
    def output_dir(self) -> Path:
        return Path(self.output)

    @property
    def inputs_path(self) -> Path:
        return Path(self.inputs) if self.inputs else self.output_dir / f"inputs-{self.app}.txt"

    def tree_path(self, dist_id: str) -> Path:
        return self.output_dir / f"tree-{self.app}-{self.rule}-{self.depth_cap_mode}-{dist_id}.json"

    @property
    def csv_path(self) -> Path:
        return self.output_dir / "bench.csv"

    def sidecar_path(self, dist_id: str, baseline: bool) -> Path:
        suffix = "-baseline" if baseline else ""
        return self.output_dir / f"bench-{self.app}-{self.rule}-{self.depth_cap_mode}-{dist_id}{suffix}.json"


def nearest_rank(values: np.ndarray, quantile: float) -> float:
    """Nearest-rank percentile of a non-empty array."""
    ordered = np.sort(values)
    rank = max(1, math.ceil(quantile * len(ordered)))
    return float(ordered[rank - 1])


class BenchRunner:
    """Runs the subcommands for one configuration."""

    def __init__(self, config: BenchConfig, verbose: bool = False, threads: int = 1,
                 baseline: bool = False, tree_path: Optional[Path] = None):
        if threads < 1:
            raise ConfigError("threads must be positive")
        self.config = config
        self.verbose = verbose
        self.threads = threads
        self.baseline = baseline
        self.tree_path = Path(tree_path) if tree_path else None
        self.rule = rule_for(config.rule)
        self._app: Optional[App] = None
        self.stats = {
            'trees_built': 0,
            'queries': 0,
            'rows_written': 0,
            'checks_failed': 0,
        }

    # --- inputs ------------------------------------------------------------

    @property
    def app(self) -> App:
        if self._app is None:
            self._app = self._load_app()
        return self._app

    def _load_app(self) -> App:
        if self.config.inputs:
            try:
                points = read_points(self.config.inputs_path)
            except (OSError, ValueError) as e:
                raise ConfigError(f"cannot read inputs: {e}")
            if len(points) != self.config.n:
                raise ConfigError(f"{self.config.inputs_path}: {len(points)} points but n={self.config.n}")
            try:
                return make_app(self.config.app, points)
            except ValueError as e:
                raise ConfigError(f"invalid inputs: {e}")
        rng = make_rng(derive_seed(self.config.seed, "inputs"))
        return generate_app(self.config.app, self.config.n, rng)

    def distributions(self) -> List[QueryDistribution]:
        dists = []
        for spec in self.config.distributions:
            try:
                dist = from_spec(spec, self.app.points, self.config.working_box_extent)
            except ValueError as e:
                raise ConfigError(str(e))
            if dist.dimension != APP_DIMENSIONS[self.config.app]:
                raise ConfigError(f"distribution '{dist.dist_id}' is {dist.dimension}-D but "
                                  f"{self.config.app} queries are {APP_DIMENSIONS[self.config.app]}-D")
            dists.append(dist)
        ids = [dist.dist_id for dist in dists]
        if len(set(ids)) != len(ids):
            raise ConfigError(f"distribution ids must be unique: {ids}")
        return dists

    def cmd_gen(self) -> Path:
        path = self.config.output_dir / f"inputs-{self.config.app}.txt"
        write_points(path, self.app.points)
        if self.verbose:
            print(f"📄 Wrote {self.app.size} {self.config.app} inputs to {path}")
        return path

    # --- trees -------------------------------------------------------------

    def build_tree(self, dist: QueryDistribution) -> OddsOnTree:
        rng = make_rng(derive_seed(self.config.seed, "samples", dist.dist_id))
        started = time.perf_counter()
        tree = build(self.config.odds_on_config(), dist, self.app, self.rule, rng)
        tree.metadata.update({
            'app': self.config.app,
            'app_fingerprint': self.app.fingerprint,
            'distribution': dist.dist_id,
            'distribution_digest': spec_digest(dist.spec),
            'depth_cap_mode': self.config.depth_cap_mode,
        })
        self.stats['trees_built'] += 1
        if self.verbose:
            self._print_build_summary(tree, dist, time.perf_counter() - started)
        return tree

    def cmd_build(self) -> List[Path]:
        paths = []
        for dist in self.distributions():
            tree = self.build_tree(dist)
            path = self.config.tree_path(dist.dist_id)
            save_tree(tree, path, self.app.encode_label)
            paths.append(path)
            print(f"🌳 {dist.dist_id}: m={tree.stats['sample_size']} nodes={tree.stats['nodes']} "
                  f"terminal={tree.stats['terminal']} interference_calls={tree.stats['interference_calls']} "
                  f"-> {path}")
        return paths

    def load_tree_for(self, dist: QueryDistribution) -> OddsOnTree:
        """Load the tree built for `dist`, building it first when missing."""
        path = self.tree_path or self.config.tree_path(dist.dist_id)
        if not path.exists():
            if self.tree_path:
                raise ConfigError(f"Tree file not found: {path}")
            tree = self.build_tree(dist)
            save_tree(tree, path, self.app.encode_label)
            return tree
        try:
            tree = load_tree(path, self.app.decode_label)
        except (TreeFormatError, ValueError) as e:
            raise ConfigError(f"{path}: {e}")
        if tree.metadata.get('app_fingerprint') != self.app.fingerprint:
            raise TreeMismatchError(f"{path} was built for different {self.config.app} inputs")
        if tree.metadata.get('distribution') != dist.dist_id:
            raise TreeMismatchError(f"{path} was built for distribution "
                                    f"'{tree.metadata.get('distribution')}', not '{dist.dist_id}'")
        if tree.metadata.get('distribution_digest') != spec_digest(dist.spec):
            raise TreeMismatchError(f"{path} was built for a different definition of distribution '{dist.dist_id}'")
        if tree.rule_name != self.config.rule:
            raise TreeMismatchError(f"{path} was built with rule '{tree.rule_name}', not '{self.config.rule}'")
        built, expected = asdict(tree.config), asdict(self.config.odds_on_config())
        differing = [name for name in built if built[name] != expected.get(name)]
        if differing:
            details = ", ".join(f"{name}={built[name]!r} (config: {expected.get(name)!r})"
                                for name in differing)
            raise TreeMismatchError(f"{path} was built with different parameters: {details}")
        return tree

    # --- workloads ---------------------------------------------------------

    def _run_shard(self, tree: Optional[OddsOnTree], queries: np.ndarray) -> List[QueryStats]:
        results = []
        for q in queries:
            q = tuple(float(v) for v in q)
            if tree is None:
                answer, ops = self.app.answer_with_cost(q)
                results.append(QueryStats(1, True, answer, ops, None))
            else:
                results.append(query(tree, q, self.app))
        return results

    def run_workload(self, tree: Optional[OddsOnTree], queries: np.ndarray) -> List[QueryStats]:
        """Answer all queries, sharded over threads; results keep query order."""
        if self.threads == 1 or len(queries) < self.threads:
            return self._run_shard(tree, queries)
        shards = np.array_split(queries, self.threads)
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            parts = list(pool.map(lambda shard: self._run_shard(tree, shard), shards))
        return [stats for part in parts for stats in part]

    def measure(self, tree: Optional[OddsOnTree], dist: QueryDistribution) -> Tuple[Dict[str, Any], Dict[str, Any]]:
        """One CSV row and its sidecar payload for `dist`."""
        N = self.config.query_count
        rng = make_rng(derive_seed(self.config.seed, "queries", dist.dist_id))
        queries = dist.draw_many(rng, N)
        results = self.run_workload(tree, queries)
        self.stats['queries'] += len(results)

        visits = np.array([r.nodes_visited for r in results])
        answers = [r.answer for r in results]
        combined = [(r.leaf_id, r.answer if r.used_backup else None) for r in results]
        filter_leaves = [r.leaf_id for r in results]

        if tree is None:
            m, cap, terminal_fraction = 0, 0, 0.0
        else:
            leaves = tree.leaves()
            terminal = sum(1 for leaf in leaves
                           if leaf.kind is NodeKind.TERMINAL and not leaf.is_unreachable)
            m, cap = tree.stats['sample_size'], tree.stats['depth_cap']
            terminal_fraction = terminal / len(leaves)

        row = {
            'schema_version': CSV_SCHEMA_VERSION,
            'app': self.config.app,
            'rule': self.config.rule,
            'n': self.config.n,
            'm': m,
            'tau': self.config.tau,
            'depth_cap_mode': self.config.depth_cap_mode,
            'depth_cap': cap,
            'distribution': dist.dist_id,
            'N': N,
            'baseline': int(tree is None),
            'mean_visits': float(visits.mean()),
            'p99_visits': nearest_rank(visits, 0.99),
            'fallback_rate': float(np.mean([r.used_backup for r in results])),
            'terminal_fraction': terminal_fraction,
            'leaf_entropy_bits': plugin_entropy(combined),
            'filter_leaf_entropy_bits': plugin_entropy(filter_leaves),
            'answer_entropy_bits': plugin_entropy(answers),
            'mean_backup_ops': float(np.mean([r.backup_ops for r in results])),
            'seed': self.config.seed,
        }
        sidecar = {
            'row': row,
            'visits_histogram': {str(k): v for k, v in sorted(Counter(visits.tolist()).items())},
            'leaf_depth_histogram': self._leaf_depths(tree, results),
            'build_stats': dict(tree.stats) if tree is not None else {},
        }
        return row, sidecar

    @staticmethod
    def _leaf_depths(tree: Optional[OddsOnTree], results: List[QueryStats]) -> Dict[str, int]:
        counts = Counter()
        for r in results:
            if tree is None or r.leaf_id is None:
                counts['outside' if tree is not None else 'baseline'] += 1
            else:
                counts[str(tree.nodes[r.leaf_id].depth)] += 1
        return dict(sorted(counts.items()))

    def cmd_bench(self) -> List[Dict[str, Any]]:
        rows = []
        for dist in self.distributions():
            tree = None if self.baseline else self.load_tree_for(dist)
            started = time.perf_counter()
            row, sidecar = self.measure(tree, dist)
            write_sidecar(self.config.sidecar_path(dist.dist_id, self.baseline), sidecar)
            rows.append(row)
            if self.verbose:
                self._print_bench_summary(row, time.perf_counter() - started)
        append_rows(self.config.csv_path, rows)
        self.stats['rows_written'] += len(rows)
        print(f"📊 Appended {len(rows)} row{'s' if len(rows) != 1 else ''} to {self.config.csv_path}")
        return rows

    def cmd_check(self) -> bool:
        passed = True
        for dist in self.distributions():
            tree = self.load_tree_for(dist)
            rng = make_rng(derive_seed(self.config.seed, "check", dist.dist_id))
            report: CheckReport = run_checks(tree, self.app, dist, self.rule, rng, self.config.check)
            print(f"🔍 {dist.dist_id}:")
            for result in report.results:
                print(f"   {result}")
            if not report.passed:
                passed = False
                self.stats['checks_failed'] += len(report.failures)
        return passed

    # --- output ------------------------------------------------------------

    def _print_build_summary(self, tree: OddsOnTree, dist: QueryDistribution, elapsed: float) -> None:
        stats = tree.stats
        print(f"🌳 Build Summary ({self.config.app}, {dist.dist_id}):")
        print(f"   Sample size m: {stats['sample_size']}")
        print(f"   Depth cap: {stats['depth_cap']} ({self.config.depth_cap_mode})")
        print(f"   Nodes: {stats['nodes']} (max depth {stats['max_depth']})")
        print(f"   Terminal leaves: {stats['terminal']}")
        print(f"   Frontier leaves: {stats['frontier']}")
        if stats['unreachable']:
            print(f"   Unreachable leaves: {stats['unreachable']}")
        print(f"   Interference calls: {stats['interference_calls']}")
        print(f"   ⏱️  {elapsed:.2f}s")

    def _print_bench_summary(self, row: Dict[str, Any], elapsed: float) -> None:
        mode = "baseline" if row['baseline'] else "filtered"
        print(f"📈 Bench Summary ({row['app']}, {row['distribution']}, {mode}):")
        print(f"   Queries: {row['N']}")
        print(f"   Mean visits: {row['mean_visits']:.3f} (p99 {row['p99_visits']:.0f})")
        print(f"   Fallback rate: {row['fallback_rate']:.3f}")
        print(f"   Leaf entropy: {row['leaf_entropy_bits']:.3f} bits")
        print(f"   Answer entropy: {row['answer_entropy_bits']:.3f} bits")
        print(f"   Mean backup ops: {row['mean_backup_ops']:.2f}")
        print(f"   ⏱️  {elapsed:.2f}s")
