import numpy as np
import pytest

from core.dijkstra import dijkstra_distance, dijkstra_sssp
from core.errors import MemoryBudgetError
from core.graph import CoordinateTable, Graph
from methods.ine import QueryStats
from methods.silc import (
    build_chain_table, build_silc, check_silc, estimate_silc_bytes, initial_interval, next_hop, path,
    refine, refine_to_exact, silc_distance,
)
from utils.random_graphs import RANDOM, random_road_graph


@pytest.fixture(scope='module')
def network():
    return random_road_graph(150, seed=5, weights=RANDOM)


@pytest.fixture(scope='module')
def silc(network):
    graph, coords = network
    return build_silc(graph, coords, progress=False)


def chain_network():
    """Hub 0 and vertex 49 of degree three joined by the chain 1..48"""
    edges = [(i, i + 1, 1) for i in range(49)]
    edges += [(0, 50, 1), (0, 51, 1), (49, 52, 1), (49, 53, 1)]
    graph = Graph.from_edges(54, edges)
    x = np.array([float(i) for i in range(50)] + [0.0, 0.0, 49.0, 49.0])
    y = np.array([0.0] * 50 + [1.0, -1.0, 1.0, -1.0])
    return graph, CoordinateTable(x, y)


def test_first_hops_and_bounds_match_dijkstra(silc, network):
    graph, coords = network
    assert check_silc(silc, graph, coords) == []


def test_paths_have_shortest_length(silc, network, rng):
    graph, _ = network
    for s, t in rng.integers(0, graph.vertex_count, size=(40, 2)).tolist():
        if s == t:
            continue
        vertices = path(silc, s, t)
        assert vertices[0] == s and vertices[-1] == t
        length = sum(graph.weight(a, b) for a, b in zip(vertices, vertices[1:]))
        assert length == dijkstra_distance(s, t, graph)


def test_next_hop_needs_distinct_vertices(silc):
    with pytest.raises(ValueError):
        next_hop(silc, 4, 4)


def test_intervals_tighten_until_exact(silc, network):
    graph, coords = network
    table = dijkstra_sssp(0, graph)
    for t in range(1, graph.vertex_count, 7):
        d = int(table[t])
        iv = initial_interval(silc, coords, 0, t)
        hops = len(path(silc, 0, t)) - 1
        steps = 0
        while not iv.exact:
            lower, upper = iv.lower, iv.upper
            assert lower <= d <= upper
            refine(silc, coords, iv, graph)
            assert iv.lower >= lower and iv.upper <= upper
            steps += 1
        assert iv.upper == d
        assert steps <= hops


def test_silc_distance_with_and_without_chains(silc, network, rng):
    graph, coords = network
    for s, t in rng.integers(0, graph.vertex_count, size=(30, 2)).tolist():
        expected = dijkstra_distance(s, t, graph)
        assert silc_distance(silc, coords, graph, s, t, chains=True) == expected
        assert silc_distance(silc, coords, graph, s, t, chains=False) == expected


def test_chain_is_crossed_in_one_refinement():
    graph, coords = chain_network()
    index = build_silc(graph, coords, progress=False)
    chained, plain = QueryStats(), QueryStats()
    iv = refine_to_exact(index, coords, initial_interval(index, coords, 0, 49), graph, chained, chains=True)
    assert iv.upper == 49
    iv = refine_to_exact(index, coords, initial_interval(index, coords, 0, 49), graph, plain, chains=False)
    assert iv.upper == 49
    assert chained.refinements == 1
    assert plain.refinements == 49


def test_chain_table():
    graph, _ = chain_network()
    chain_id, table = build_chain_table(graph)
    members = np.flatnonzero(chain_id >= 0).tolist()
    assert members == list(range(1, 49))
    assert len(set(chain_id[members].tolist())) == 1
    assert {int(table['lo'][1]), int(table['hi'][1])} == {0, 49}
    for v in members:
        assert table['lo_w'][v] + table['hi_w'][v] == 49
    assert sorted(table['pos'][members].tolist()) == list(range(48))


def test_cycle_stays_unchained():
    graph = Graph.from_edges(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1)])
    chain_id, _ = build_chain_table(graph)
    assert np.all(chain_id == -1)


def test_memory_budget_is_enforced(network):
    graph, coords = network
    with pytest.raises(MemoryBudgetError) as info:
        build_silc(graph, coords, memory_budget=1, progress=False)
    assert info.value.estimate_bytes == estimate_silc_bytes(graph.vertex_count)


def test_parallel_build_is_identical(silc, network):
    graph, coords = network
    again = build_silc(graph, coords, workers=2, progress=False)
    for name, array in silc.arrays.items():
        assert np.array_equal(array, again.arrays[name]), name
