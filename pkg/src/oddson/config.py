"""
Configuration settings for the odds-on tree benchmark
"""

# Geometry tolerances
ORIENTATION_EPSILON = 1e-12     # relative to |b-a| * |c-a|
CONTAINMENT_TOLERANCE = 1e-9    # absolute, per unit normal length
FRAME_EXTENT = 1e12             # clipping frame used to compute vertices of unbounded regions

# Working bounding box: every tree lives inside [-extent, extent]^d
WORKING_BOX_EXTENT = 1e6

# Odds-on tree defaults
DEFAULT_TAU = 0.5
DEFAULT_MIN_SAMPLES = 1
DEFAULT_QUERY_COUNT = 10_000
DEFAULT_SEED = 20240601

# Supported problems, split rules and depth-cap modes
SUPPORTED_APPS = {'polygon', 'postoffice', 'rectcount'}
SUPPORTED_RULES = {'two-line', 'kd'}
DEFAULT_RULES = {
    'polygon': 'two-line',
    'postoffice': 'two-line',
    'rectcount': 'kd',
}
APP_DIMENSIONS = {
    'polygon': 2,
    'postoffice': 2,
    'rectcount': 4,
}
DEPTH_CAP_MODES = {'theoretical', 'lemma', 'practical'}
DEFAULT_DEPTH_CAP_MODE = 'lemma'

# Generated inputs live in [0, INPUT_EXTENT]^2
INPUT_EXTENT = 1000.0

# Serialization
TREE_FORMAT = "oddson-tree"
TREE_FORMAT_VERSION = 1
CSV_SCHEMA_VERSION = 1
CSV_COLUMNS = [
    'schema_version', 'app', 'rule', 'n', 'm', 'tau', 'depth_cap_mode', 'depth_cap',
    'distribution', 'N', 'baseline', 'mean_visits', 'p99_visits', 'fallback_rate',
    'terminal_fraction', 'leaf_entropy_bits', 'filter_leaf_entropy_bits',
    'answer_entropy_bits', 'mean_backup_ops', 'seed',
]

# Acceptance relations checked by `report`
ENTROPY_COST_SLACK = 3.0
DOMINANCE_SLACK = 0.1

# Exit codes
EXIT_OK = 0
EXIT_INVARIANT_FAILURE = 1
EXIT_CONFIG_ERROR = 2

# Invariant suite behavior (`check` subcommand)
CHECK_SETTINGS = {
    'partition_trials': 100,          # random samples per size for split checks
    'partition_sizes': (16, 64, 256, 1024),
    'random_lines': 100,              # test lines per split
    'soundness_points': 100,          # sampled points per terminal poly
    'nesting_points': 100,            # sampled points per child poly
    'frequency_samples': 100_000,     # N for the visit-frequency bound
    'frequency_quantile': 0.99,       # fraction of nodes per depth that must pass
    'routing_queries': 10_000,        # end-to-end equivalence queries
}
