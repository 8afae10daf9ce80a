"""
Dijkstra Oracle
Exact network distances used as ground truth by every index and test
"""

import numpy as np
from scipy.sparse.csgraph import dijkstra as csgraph_dijkstra

from core.search import SearchScratch

INFINITY = float('inf')


def expand(source, graph, scratch, stop_at=None, allowed=None):
    """
    Duplicate-tolerant Dijkstra from source.

    Yields (vertex, distance) in settle order, i.e. ascending (distance, id).
    `allowed` restricts the search to a vertex subset given as a boolean array.
    """
    scratch.reset()
    queue, settled, distance = scratch.queue, scratch.settled, scratch.distance
    distance[source] = 0
    queue.push(0, source)
    while queue:
        d, v = queue.pop_min()
        if v in settled:
            continue
        settled.mark(v)
        yield v, d
        if v == stop_at:
            return
        for u, w in graph.neighbors(v):
            if u in settled or (allowed is not None and not allowed[u]):
                continue
            nd = d + w
            if nd < distance.get(u, INFINITY):
                distance[u] = nd
                queue.push(nd, u)


def dijkstra_distance(source, target, graph, scratch=None):
    """Exact d(source, target); the graph is connected so a value always exists"""
    if source == target:
        return 0
    scratch = scratch or SearchScratch(graph.vertex_count)
    for v, d in expand(source, graph, scratch, stop_at=target):
        if v == target:
            return d
    return INFINITY


def dijkstra_sssp(source, graph, scratch=None):
    """Distances from source to every vertex, as an int64 array"""
    scratch = scratch or SearchScratch(graph.vertex_count)
    table = np.full(graph.vertex_count, -1, dtype=np.int64)
    for v, d in expand(source, graph, scratch):
        table[v] = d
    return table


def expansion_order(source, graph, limit=None, scratch=None, allowed=None):
    """First `limit` settled (vertex, distance) pairs of a Dijkstra expansion"""
    scratch = scratch or SearchScratch(graph.vertex_count)
    result = []
    for item in expand(source, graph, scratch, allowed=allowed):
        result.append(item)
        if limit is not None and len(result) >= limit:
            break
    return result


def restricted_sssp(source, graph, allowed, scratch=None):
    """Distances from source within the subgraph induced by `allowed`; dict vertex -> distance"""
    scratch = scratch or SearchScratch(graph.vertex_count)
    return dict(expand(source, graph, scratch, allowed=allowed))


def bulk_distances(graph, sources, csgraph=None, batch=64):
    """
    Distance rows from many sources at once (scipy), int64 array len(sources) x |V|.

    Unreachable entries (only possible on a restricted csgraph) are -1.
    """
    csgraph = graph.to_csr() if csgraph is None else csgraph
    sources = np.asarray(sources, dtype=np.int64)
    rows = np.empty((len(sources), csgraph.shape[0]), dtype=np.int64)
    for start in range(0, len(sources), batch):
        chunk = csgraph_dijkstra(csgraph, directed=False, indices=sources[start:start + batch])
        chunk = np.atleast_2d(chunk)
        unreachable = ~np.isfinite(chunk)
        chunk[unreachable] = -1
        rows[start:start + batch] = chunk.astype(np.int64)
    return rows
