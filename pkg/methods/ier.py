"""
Incremental Euclidean Restriction
Euclidean nearest neighbors as candidates, verified by a pluggable
network-distance oracle and pruned by the kth candidate distance D_k
"""

import heapq
import logging
from typing import Protocol, runtime_checkable

from core.dijkstra import dijkstra_distance
from core.graph import floor_bound
from core.search import SearchScratch
from methods.gtree import AssemblyState
from methods.ine import KnnResult
from spatial.rtree import open_nn_cursor

logger = logging.getLogger(__name__)


@runtime_checkable
class DistanceOracle(Protocol):
    """
    Exact network distances from one source at a time.

    reset_source(s) selects the source; distance(t) returns d(s, t). Oracles with
    supports_materialization reuse work across targets of the same source.
    """
    supports_materialization: bool

    def reset_source(self, source): ...

    def distance(self, target): ...


class DijkstraOracle:
    """Fresh point-to-point Dijkstra per call, no reuse between calls"""

    supports_materialization = False

    def __init__(self, graph):
        self.graph = graph
        self.source = None
        self.calls = 0
        self._scratch = SearchScratch(graph.vertex_count)

    def reset_source(self, source):
        self.source = source

    def distance(self, target):
        self.calls += 1
        return dijkstra_distance(self.source, target, self.graph, self._scratch)

    def between(self, source, target):
        self.reset_source(source)
        return self.distance(target)


class GTreeOracle:
    """
    G-tree assembly with materialization: border distances of every node touched
    for the current source stay cached, as does the leaf-restricted search.
    """

    supports_materialization = True

    def __init__(self, index, graph):
        self.index = index
        self.graph = graph
        self.state = None
        self.calls = 0

    def reset_source(self, source):
        self.state = AssemblyState(self.index, self.graph, source)

    def distance(self, target):
        self.calls += 1
        return self.state.distance(target)

    def between(self, source, target):
        self.reset_source(source)
        return self.distance(target)

    @property
    def matrix_sweeps(self):
        return self.state.matrix_sweeps if self.state else 0

    @property
    def path_cost(self):
        return self.state.path_cost if self.state else 0


def dijkstra_oracle(graph):
    return DijkstraOracle(graph)


def gtree_materialized_oracle(index, graph):
    return GTreeOracle(index, graph)


class CandidateHeap:
    """Best k (distance, id) candidates; D_k is the worst of them once k are held"""

    __slots__ = ('k', '_heap')

    def __init__(self, k):
        self.k = k
        self._heap = []

    def __len__(self):
        return len(self._heap)

    @property
    def full(self):
        return len(self._heap) >= self.k

    def kth(self):
        """(D_k, id) of the current kth candidate, or None while fewer than k are held"""
        if not self.full:
            return None
        d, v = self._heap[0]
        return -d, -v

    @property
    def bound(self):
        kth = self.kth()
        return kth[0] if kth else float('inf')

    def offer(self, d, v):
        """Insert (d, v) if it ranks among the best k; returns True when kept"""
        entry = (-d, -v)
        if not self.full:
            heapq.heappush(self._heap, entry)
            return True
        if entry > self._heap[0]:
            heapq.heapreplace(self._heap, entry)
            return True
        return False

    def items(self):
        """Candidates ranked by (distance, id)"""
        return sorted((-d, -v) for d, v in self._heap)


def knn_ier(q, k, oracle, rtree, coords, lb_scale=1.0):
    """
    k nearest objects of q by Incremental Euclidean Restriction

    Args:
        q: query vertex
        k: number of neighbors
        oracle: DistanceOracle used to verify candidates
        rtree: R-tree over the object set
        coords: vertex coordinates
        lb_scale: factor making floor(d_E * lb_scale) a lower bound on network distance
    """
    if k < 1:
        raise ValueError('k must be at least 1')
    result = KnnResult()
    candidates = CandidateHeap(k)
    cursor = open_nn_cursor(rtree, coords.point(q))
    oracle.reset_source(q)
    computed = set()

    while True:
        emitted = cursor.next()
        if emitted is None:
            break
        obj, euclidean = emitted
        bound = floor_bound(euclidean, lb_scale)
        kth = candidates.kth()
        if kth is not None:
            if bound > kth[0]:
                break
            if (bound, obj) > kth:
                continue
        d = oracle.distance(obj)
        computed.add(obj)
        candidates.offer(d, obj)

    result.items = [(v, d) for d, v in candidates.items()]
    stats = result.stats
    stats.oracle_calls = len(computed)
    stats.false_hits = len(computed) - len(result.items)
    stats.cursor_pulls = cursor.pulls
    if isinstance(oracle, GTreeOracle):
        stats.path_cost = oracle.path_cost
        stats.matrix_sweeps = oracle.matrix_sweeps
    return result
