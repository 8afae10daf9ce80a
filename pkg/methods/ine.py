"""
Incremental Network Expansion
Dijkstra from the query vertex until the kth object settles; also home of the
result and statistics types shared by every kNN method
"""

from dataclasses import asdict, dataclass, field

from core.dijkstra import expand
from core.search import SearchScratch


@dataclass
class QueryStats:
    """Per-query operation counters; each method fills the ones it has"""
    settled: int = 0
    pushes: int = 0
    oracle_calls: int = 0
    false_hits: int = 0
    path_cost: int = 0
    matrix_sweeps: int = 0
    vertices_bypassed: int = 0
    lookups: int = 0
    refinements: int = 0
    cursor_pulls: int = 0

    def to_dict(self):
        return asdict(self)


@dataclass
class KnnResult:
    """Objects with their network distances, ranked by (distance, id)"""
    items: list = field(default_factory=list)
    stats: QueryStats = field(default_factory=QueryStats)

    def __len__(self):
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def ids(self):
        return [v for v, _ in self.items]

    def distances(self):
        return [d for _, d in self.items]


def knn_ine(q, k, graph, objects, scratch=None):
    """
    k nearest objects of q by network expansion

    Vertices settle in ascending (distance, id) order, so the first k settled
    objects are the answer with ties at the kth distance going to lower ids.
    """
    if k < 1:
        raise ValueError('k must be at least 1')
    scratch = scratch or SearchScratch(graph.vertex_count)
    result = KnnResult()
    mask = objects.mask
    want = min(k, len(objects))
    settled = 0
    for v, d in expand(q, graph, scratch):
        settled += 1
        if mask[v]:
            result.items.append((v, d))
            if len(result.items) == want:
                break
    result.stats.settled = settled
    result.stats.pushes = scratch.queue.pushes
    return result
