"""
Method Suite
Builds the network indexes once, the object indexes once per object set, and
binds every method name to a `query(q, k) -> KnnResult` callable
"""

import logging
import time
from dataclasses import dataclass, field

from core.graph import lower_bound_scale
from core.search import SearchScratch
from methods.distance_browsing import knn_db_enn, knn_disbrw
from methods.gtree import build_gtree, build_occurrence_list, default_leaf_capacity, knn_gtree
from methods.ier import DijkstraOracle, GTreeOracle, knn_ier
from methods.ine import knn_ine
from methods.road import build_association_directory, build_road, default_levels, knn_road
from methods.silc import build_silc
from spatial.object_hierarchy import build_object_hierarchy
from spatial.rtree import DEFAULT_CAPACITY, build_rtree

logger = logging.getLogger(__name__)


def _timed(build, *args, **kwargs):
    started = time.perf_counter()
    value = build(*args, **kwargs)
    return value, (time.perf_counter() - started) * 1000.0


@dataclass
class NetworkIndexes:
    """Graph-side indexes; shared by every object set"""
    graph: object
    coords: object
    lb_scale: float = 1.0
    gtree: object = None
    road: object = None
    silc: object = None
    build_ms: dict = field(default_factory=dict)

    def size_bytes(self, name):
        index = getattr(self, name)
        return index.size_bytes() if index is not None else 0


def build_network_indexes(graph, coords, names, fanout=4, leaf_capacity=None, levels=None, seed=0,
                          workers=1, progress=None):
    """
    Build the named network indexes ('gtree', 'road', 'silc')

    Raises:
        IndexBuildError: infeasible G-tree or ROAD parameters
        MemoryBudgetError: SILC would not fit the memory budget
    """
    n = graph.vertex_count
    network = NetworkIndexes(graph, coords, lower_bound_scale(graph, coords) if coords is not None else 1.0)
    if 'gtree' in names:
        tau = leaf_capacity or default_leaf_capacity(n)
        network.gtree, network.build_ms['gtree'] = _timed(build_gtree, graph, fanout, tau, seed)
    if 'road' in names:
        depth = levels or default_levels(n)
        network.road, network.build_ms['road'] = _timed(build_road, graph, fanout, depth, seed)
    if 'silc' in names:
        network.silc, network.build_ms['silc'] = _timed(
            build_silc, graph, coords, workers=workers, progress=progress
        )
    return network


@dataclass
class ObjectIndexes:
    """Object-side indexes for one object set"""
    objects: object
    rtree: object = None
    hierarchy: object = None
    occurrence: object = None
    directory: object = None
    build_ms: dict = field(default_factory=dict)


def build_object_indexes(network, objects, methods, rtree_capacity=DEFAULT_CAPACITY):
    """Only what the selected methods read is built"""
    built = ObjectIndexes(objects)
    wanted = set(methods)
    if wanted & {'ier-dijkstra', 'ier-gtree', 'db-enn'}:
        built.rtree, built.build_ms['rtree'] = _timed(build_rtree, objects, network.coords, rtree_capacity)
    if 'disbrw' in wanted:
        built.hierarchy, built.build_ms['hierarchy'] = _timed(build_object_hierarchy, objects, network.coords)
    if 'gtree' in wanted:
        built.occurrence, built.build_ms['occurrence'] = _timed(build_occurrence_list, network.gtree, objects)
    if 'road' in wanted:
        built.directory, built.build_ms['directory'] = _timed(
            build_association_directory, network.road.hierarchy, objects
        )
    return built


def method_footprint(method, network, built):
    """(index bytes, build milliseconds) of everything the method reads"""
    parts = {
        'ine': [],
        'ier-dijkstra': [('rtree', built.rtree)],
        'ier-gtree': [('gtree', network.gtree), ('rtree', built.rtree)],
        'disbrw': [('silc', network.silc), ('hierarchy', built.hierarchy)],
        'db-enn': [('silc', network.silc), ('rtree', built.rtree)],
        'road': [('road', network.road), ('directory', built.directory)],
        'gtree': [('gtree', network.gtree), ('occurrence', built.occurrence)],
    }[method]
    size = sum(index.size_bytes() for _, index in parts)
    ms = sum(network.build_ms.get(name, built.build_ms.get(name, 0.0)) for name, _ in parts)
    return size, ms


def bind_method(method, network, built):
    """
    Returns:
        callable (q, k) -> KnnResult holding its own scratch space; one per worker
    """
    graph, coords, scale = network.graph, network.coords, network.lb_scale
    if method == 'ine':
        scratch = SearchScratch(graph.vertex_count)
        return lambda q, k: knn_ine(q, k, graph, built.objects, scratch)
    if method == 'ier-dijkstra':
        oracle = DijkstraOracle(graph)
        return lambda q, k: knn_ier(q, k, oracle, built.rtree, coords, scale)
    if method == 'ier-gtree':
        oracle = GTreeOracle(network.gtree, graph)
        return lambda q, k: knn_ier(q, k, oracle, built.rtree, coords, scale)
    if method == 'disbrw':
        return lambda q, k: knn_disbrw(q, k, network.silc, coords, graph, built.hierarchy, scale)
    if method == 'db-enn':
        return lambda q, k: knn_db_enn(q, k, network.silc, coords, graph, built.rtree, scale)
    if method == 'road':
        scratch = SearchScratch(graph.vertex_count)
        return lambda q, k: knn_road(q, k, network.road, built.directory, scratch=scratch)
    if method == 'gtree':
        return lambda q, k: knn_gtree(q, k, network.gtree, built.occurrence, graph)
    raise ValueError(f'unknown method {method!r}')
