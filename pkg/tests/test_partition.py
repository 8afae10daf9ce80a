import numpy as np

from core.graph import Graph
from core.partition import MultilevelPartitioner, induced_adjacency, partition_vertices


def _cut_edges(graph, parts):
    owner = {}
    for p, part in enumerate(parts):
        for v in part.tolist():
            owner[v] = p
    return sum(1 for u, v, _ in graph.edges() if u in owner and v in owner and owner[u] != owner[v])


def test_induced_adjacency_keeps_only_inner_edges(grid_graph):
    graph, _ = grid_graph
    vertices = np.array([0, 1, 8, 9, 20], dtype=np.int64)
    xadj, adjncy = induced_adjacency(graph, vertices)
    assert xadj.tolist() == [0, 2, 4, 6, 8, 8]
    assert sorted(adjncy[xadj[0]:xadj[1]].tolist()) == [1, 2]
    assert sorted(adjncy[xadj[3]:xadj[4]].tolist()) == [1, 2]


def test_split_covers_every_vertex_once(road_network):
    graph, _ = road_network
    parts = MultilevelPartitioner(seed=3).split(graph, np.arange(graph.vertex_count), 4)
    assert 2 <= len(parts) <= 4
    assert all(len(p) for p in parts)
    assert all(p.dtype == np.int64 and np.all(np.diff(p) > 0) for p in parts)
    assert sorted(np.concatenate(parts).tolist()) == list(range(graph.vertex_count))


def test_split_is_deterministic_for_a_seed(road_network):
    graph, _ = road_network
    first = partition_vertices(graph, np.arange(graph.vertex_count), 4, seed=5)
    second = partition_vertices(graph, np.arange(graph.vertex_count), 4, seed=5)
    assert [p.tolist() for p in first] == [p.tolist() for p in second]


def test_grid_split_is_balanced_with_a_small_cut(grid_graph):
    graph, _ = grid_graph
    parts = MultilevelPartitioner(seed=0).split(graph, np.arange(64), 4)
    assert len(parts) == 4
    assert all(12 <= len(p) <= 20 for p in parts)
    # four 4x4 quadrants cut 16 edges
    assert _cut_edges(graph, parts) <= 24


def test_split_of_a_subset_stays_inside_it(road_network):
    graph, _ = road_network
    subset = np.arange(0, graph.vertex_count, 2)
    parts = MultilevelPartitioner(seed=1).split(graph, subset, 2)
    assert sorted(np.concatenate(parts).tolist()) == subset.tolist()


def test_tiny_and_edgeless_sets():
    graph = Graph.from_edges(6, [(0, 1, 1), (2, 3, 1), (4, 5, 1)], check_connected=False)
    partitioner = MultilevelPartitioner()
    assert [p.tolist() for p in partitioner.split(graph, [3, 1], 4)] == [[1], [3]]
    assert [p.tolist() for p in partitioner.split(graph, [5], 2)] == [[5]]
    assert partitioner.split(graph, [], 2) == []
    assert [p.tolist() for p in partitioner.split(graph, [0, 2, 4], 1)] == [[0, 2, 4]]
    edgeless = partitioner.split(graph, [0, 2, 4], 2)
    assert [p.tolist() for p in edgeless] == [[0, 2], [4]]
