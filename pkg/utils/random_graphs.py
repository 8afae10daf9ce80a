"""
Random Road-Like Graphs
Connected planar-ish test networks: points in a square joined to their nearest
neighbours, with Euclidean or random integer weights
"""

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from core.graph import CoordinateTable, Graph, WeightKind

EUCLIDEAN = 'euclidean'
RANDOM = 'random'


def random_road_graph(vertex_count, seed=0, neighbours=3, weights=EUCLIDEAN, extent=10_000.0,
                      max_weight=1000, weight_kind=WeightKind.DISTANCE):
    """
    Build a connected random network

    Args:
        vertex_count: number of vertices (>= 2)
        seed: generator seed; equal seeds give equal graphs
        neighbours: each point is joined to this many nearest points
        weights: 'euclidean' rounds lengths up to integers (so Euclidean bounds hold),
            'random' draws integers in 1..max_weight
        extent: side of the square holding the points

    Returns:
        (Graph, CoordinateTable)
    """
    if vertex_count < 2:
        raise ValueError('a random graph needs at least two vertices')
    rng = np.random.default_rng(seed)
    points = rng.uniform(0.0, extent, size=(vertex_count, 2))
    tree = cKDTree(points)
    _, nearest = tree.query(points, k=min(neighbours, vertex_count - 1) + 1)
    u = np.repeat(np.arange(vertex_count), nearest.shape[1] - 1)
    v = nearest[:, 1:].ravel()
    pairs = {(min(a, b), max(a, b)) for a, b in zip(u.tolist(), v.tolist()) if a != b}

    # join every stray component to its nearest vertex in the first one
    while True:
        a = np.array([p[0] for p in pairs], dtype=np.int64)
        b = np.array([p[1] for p in pairs], dtype=np.int64)
        adjacency = coo_matrix((np.ones(len(a)), (a, b)), shape=(vertex_count, vertex_count))
        count, labels = connected_components(adjacency, directed=False)
        if count == 1:
            break
        main = np.flatnonzero(labels == labels[0])
        main_tree = cKDTree(points[main])
        for label in range(count):
            if label == labels[0]:
                continue
            members = np.flatnonzero(labels == label)
            distances, index = main_tree.query(points[members])
            best = int(np.argmin(distances))
            x, y = int(members[best]), int(main[index[best]])
            pairs.add((min(x, y), max(x, y)))

    edges = []
    for x, y in sorted(pairs):
        if weights == RANDOM:
            w = int(rng.integers(1, max_weight + 1))
        else:
            w = max(1, int(np.ceil(np.hypot(*(points[x] - points[y])))))
        edges.append((x, y, w))
    graph = Graph.from_edges(vertex_count, edges, weight_kind)
    return graph, CoordinateTable(points[:, 0], points[:, 1])
