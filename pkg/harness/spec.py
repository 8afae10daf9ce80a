"""
Experiment Specification
Parameters of one benchmark invocation and the records it produces
"""

from dataclasses import asdict, dataclass, field

from core.graph import WeightKind
from core.objects import ObjectKind
from spatial.rtree import DEFAULT_CAPACITY

METHODS = ('ine', 'ier-dijkstra', 'ier-gtree', 'disbrw', 'db-enn', 'road', 'gtree')

# Parameter ranges of the experiment matrix; defaults k=10, d=0.001
K_VALUES = (1, 5, 10, 25, 50)
DENSITIES = (1.0, 0.1, 0.01, 0.001, 0.0001)
DEFAULT_K = 10
DEFAULT_DENSITY = 0.001

WARMUP_QUERIES = 100

# Methods and the indexes they need
METHOD_INDEXES = {
    'ine': (),
    'ier-dijkstra': (),
    'ier-gtree': ('gtree',),
    'disbrw': ('silc',),
    'db-enn': ('silc',),
    'road': ('road',),
    'gtree': ('gtree',),
}


@dataclass
class ExperimentSpec:
    """Everything needed to replay a build, query or verify invocation"""
    graph: str = None
    coords: str = None
    dataset: str = None
    weight_kind: WeightKind = WeightKind.DISTANCE
    methods: list = field(default_factory=lambda: list(METHODS))

    # index parameters
    fanout: int = 4
    leaf_capacity: int = 64
    levels: int = None
    rtree_capacity: int = DEFAULT_CAPACITY
    workers: int = 1

    # workload
    object_kind: ObjectKind = ObjectKind.UNIFORM
    densities: list = field(default_factory=lambda: [DEFAULT_DENSITY])
    clusters: int = 10
    cluster_size: int = 5
    bucket: int = 1
    buckets: int = 5
    min_dist_size: int = 100
    object_files: list = field(default_factory=list)
    object_sets: int = 1
    query_count: int = 10_000
    k_values: list = field(default_factory=lambda: [DEFAULT_K])
    seed: int = 0
    warmup: int = WARMUP_QUERIES

    verify: bool = False
    output: str = None
    index_dir: str = None

    def __post_init__(self):
        self.weight_kind = WeightKind(self.weight_kind)
        self.object_kind = ObjectKind(self.object_kind)
        unknown = [m for m in self.methods if m not in METHOD_INDEXES]
        if unknown:
            raise ValueError(f'unknown method(s): {", ".join(unknown)}')
        if any(k < 1 for k in self.k_values):
            raise ValueError('every k must be at least 1')
        if any(not 0 < d <= 1 for d in self.densities):
            raise ValueError('densities must lie in (0, 1]')

    def required_indexes(self):
        """Network indexes the selected methods need, in build order"""
        needed = {name for m in self.methods for name in METHOD_INDEXES[m]}
        return [name for name in ('gtree', 'road', 'silc') if name in needed]

    def to_dict(self):
        data = asdict(self)
        data['weight_kind'] = self.weight_kind.value
        data['object_kind'] = self.object_kind.value
        return data


@dataclass
class RunRecord:
    """Aggregated statistics of one method at one parameter point"""
    method: str
    dataset: str
    parameters: dict
    query_count: int = 0
    mean_us: float = 0.0
    p50_us: float = 0.0
    p95_us: float = 0.0
    p99_us: float = 0.0
    settled: float = 0.0
    pushes: float = 0.0
    oracle_calls: float = None
    false_hits: float = None
    path_cost: float = None
    vertices_bypassed: float = None
    lookups: float = None
    refinements: float = None
    cursor_pulls: float = None
    index_bytes: int = 0
    build_ms: float = 0.0
    mismatches: int = 0

    def to_dict(self):
        return asdict(self)
