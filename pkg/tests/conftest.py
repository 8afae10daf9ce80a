"""
Shared fixtures: hand-built graphs, seeded random road-like networks and
networkx mirrors used as an independent shortest-path reference
"""

import networkx as nx
import numpy as np
import pytest

from core.graph import CoordinateTable, Graph
from core.objects import ObjectSet, gen_uniform
from utils.random_graphs import RANDOM, random_road_graph


def to_networkx(graph):
    g = nx.Graph()
    g.add_nodes_from(range(graph.vertex_count))
    g.add_weighted_edges_from(graph.edges())
    return g


def reference_knn(graph, objects, q, k):
    """(id, distance) of the k nearest objects, ranked by (distance, id), from networkx"""
    lengths = nx.single_source_dijkstra_path_length(to_networkx(graph), q)
    ranked = sorted((d, v) for v, d in lengths.items() if v in objects)
    return [(v, d) for d, v in ranked[:k]]


@pytest.fixture
def path_graph():
    """a - b - c with weights 5 and 7, on a line"""
    graph = Graph.from_edges(3, [(0, 1, 5), (1, 2, 7)])
    coords = CoordinateTable(np.array([0.0, 5.0, 12.0]), np.array([0.0, 0.0, 0.0]))
    return graph, coords


@pytest.fixture
def grid_graph():
    """8 x 8 grid with unit spacing and edge weight 1 (Euclidean bounds hold)"""
    side = 8
    edges = []
    for r in range(side):
        for c in range(side):
            v = r * side + c
            if c + 1 < side:
                edges.append((v, v + 1, 1))
            if r + 1 < side:
                edges.append((v, v + side, 1))
    xs = np.array([v % side for v in range(side * side)], dtype=np.float64)
    ys = np.array([v // side for v in range(side * side)], dtype=np.float64)
    return Graph.from_edges(side * side, edges), CoordinateTable(xs, ys)


@pytest.fixture
def road_network():
    """300-vertex random network with Euclidean weights"""
    return random_road_graph(300, seed=7)


@pytest.fixture
def random_weight_network():
    """250-vertex random network whose weights ignore geometry"""
    return random_road_graph(250, seed=11, weights=RANDOM)


@pytest.fixture
def road_objects(road_network):
    graph, _ = road_network
    return gen_uniform(graph, 0.05, seed=3)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def make_objects():
    def factory(graph, ids):
        return ObjectSet(np.asarray(ids), graph.vertex_count)
    return factory
