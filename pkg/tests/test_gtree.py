import numpy as np
import pytest

from core.dijkstra import bulk_distances
from core.errors import IndexBuildError
from core.objects import gen_uniform
from methods.gtree import (
    LEAF_SEARCH_BASIC, LEAF_SEARCH_IMPROVED, MATRICES_BOTTOM_UP, MATRICES_DIRECT, AssemblyState, build_gtree,
    build_occurrence_list, check_matrices, default_leaf_capacity, knn_gtree,
)
from methods.ine import knn_ine
from utils.random_graphs import RANDOM, random_road_graph
from utils.serialization import KIND_GTREE, load_index, save_index


@pytest.fixture
def gtree(random_weight_network):
    graph, _ = random_weight_network
    return build_gtree(graph, fanout=4, leaf_capacity=16, seed=1)


def test_every_vertex_in_exactly_one_leaf(gtree, random_weight_network):
    graph, _ = random_weight_network
    seen = np.concatenate([gtree.leaf_vertices(leaf) for leaf in gtree.leaves()])
    assert sorted(seen.tolist()) == list(range(graph.vertex_count))
    assert all(len(gtree.leaf_vertices(leaf)) <= 16 for leaf in gtree.leaves())
    assert len(gtree.borders(gtree.root)) == 0


def test_borders_have_an_edge_leaving_the_node(gtree, random_weight_network):
    graph, _ = random_weight_network
    for leaf in gtree.leaves():
        inside = set(gtree.leaf_vertices(leaf).tolist())
        for b in gtree.borders(leaf).tolist():
            assert any(u not in inside for u, _ in graph.neighbors(b))


def test_matrices_hold_exact_distances(gtree, random_weight_network):
    graph, _ = random_weight_network
    assert check_matrices(gtree, graph) == []


def test_corrupted_entry_is_reported(gtree, random_weight_network):
    graph, _ = random_weight_network
    gtree.arrays['matrix'][np.flatnonzero(gtree.arrays['matrix'] > 0)[0]] += 1
    assert len(check_matrices(gtree, graph)) >= 1


@pytest.mark.parametrize('seed', range(3))
def test_assembly_matches_dijkstra_for_all_pairs(seed):
    graph, _ = random_road_graph(120, seed=seed, weights=RANDOM)
    index = build_gtree(graph, fanout=3, leaf_capacity=10, seed=seed)
    rows = bulk_distances(graph, list(range(graph.vertex_count)))
    for s in range(graph.vertex_count):
        state = AssemblyState(index, graph, s)
        assert [state.distance(t) for t in range(graph.vertex_count)] == rows[s].tolist()


@pytest.mark.parametrize('density', [0.01, 0.1])
@pytest.mark.parametrize('k', [1, 5, 10])
def test_knn_matches_ine(gtree, random_weight_network, density, k):
    graph, _ = random_weight_network
    objects = gen_uniform(graph, density, seed=int(density * 1000) + k)
    occurrence = build_occurrence_list(gtree, objects)
    for q in range(0, graph.vertex_count, 10):
        expected = knn_ine(q, k, graph, objects).items
        assert knn_gtree(q, k, gtree, occurrence, graph, LEAF_SEARCH_IMPROVED).items == expected
        assert knn_gtree(q, k, gtree, occurrence, graph, LEAF_SEARCH_BASIC).items == expected


def test_improved_leaf_search_settles_fewer_vertices(grid_graph):
    graph, _ = grid_graph
    index = build_gtree(graph, fanout=2, leaf_capacity=16)
    objects = gen_uniform(graph, 1.0, seed=0)
    occurrence = build_occurrence_list(index, objects)
    improved = knn_gtree(27, 1, index, occurrence, graph, LEAF_SEARCH_IMPROVED)
    basic = knn_gtree(27, 1, index, occurrence, graph, LEAF_SEARCH_BASIC)
    assert improved.items == basic.items == [(27, 0)]
    assert improved.stats.settled < basic.stats.settled


def test_occurrence_list_prunes_empty_children(gtree, random_weight_network, make_objects):
    graph, _ = random_weight_network
    occurrence = build_occurrence_list(gtree, make_objects(graph, [0]))
    leaf = gtree.vertex_leaf[0]
    assert occurrence.objects(leaf) == [0]
    assert occurrence.count == 1
    for node in gtree.ancestors(leaf)[1:]:
        assert len(occurrence.children(node)) == 1


def test_path_cost_is_reported(gtree, random_weight_network):
    graph, _ = random_weight_network
    objects = gen_uniform(graph, 0.01, seed=2)
    occurrence = build_occurrence_list(gtree, objects)
    home = gtree.vertex_leaf[int(objects.ids[0])]
    far = next(v for v in range(graph.vertex_count) if gtree.vertex_leaf[v] != home)
    result = knn_gtree(far, 1, gtree, occurrence, graph)
    assert result.stats.path_cost > 0


def test_invalid_parameters(path_graph):
    graph, _ = path_graph
    with pytest.raises(IndexBuildError):
        build_gtree(graph, fanout=1)
    with pytest.raises(IndexBuildError):
        build_gtree(graph, leaf_capacity=0)


def test_default_leaf_capacity_tiers():
    assert default_leaf_capacity(48_812) == 64
    assert default_leaf_capacity(435_666) == 128
    assert default_leaf_capacity(23_947_347) == 512


def test_serialized_index_answers_identically(tmp_path, gtree, random_weight_network):
    graph, _ = random_weight_network
    path = str(tmp_path / 'net.gtree.bin')
    save_index(gtree, KIND_GTREE, path)
    loaded = load_index(path, KIND_GTREE)
    for name, array in gtree.arrays.items():
        assert np.array_equal(loaded.arrays[name], array)
    objects = gen_uniform(graph, 0.05, seed=6)
    a, b = build_occurrence_list(gtree, objects), build_occurrence_list(loaded, objects)
    for q in (0, 50, 200):
        assert knn_gtree(q, 5, loaded, b, graph).items == knn_gtree(q, 5, gtree, a, graph).items


def test_same_seed_builds_identical_arrays(random_weight_network):
    graph, _ = random_weight_network
    a = build_gtree(graph, fanout=4, leaf_capacity=16, seed=3)
    b = build_gtree(graph, fanout=4, leaf_capacity=16, seed=3)
    assert all(np.array_equal(a.arrays[name], b.arrays[name]) for name in a.arrays)


@pytest.mark.parametrize('fanout,leaf_capacity', [(2, 8), (4, 16), (3, 30)])
def test_bottom_up_matrices_equal_direct_matrices(random_weight_network, fanout, leaf_capacity):
    graph, _ = random_weight_network
    chained = build_gtree(graph, fanout, leaf_capacity, seed=2, matrix_mode=MATRICES_BOTTOM_UP)
    direct = build_gtree(graph, fanout, leaf_capacity, seed=2, matrix_mode=MATRICES_DIRECT)
    assert check_matrices(chained, graph) == []
    assert check_matrices(direct, graph) == []
    for name in ('matrix', 'leaf_matrix'):
        assert np.array_equal(chained.arrays[name], direct.arrays[name])


def test_bottom_up_is_the_default_matrix_mode(road_network):
    graph, _ = road_network
    default = build_gtree(graph, fanout=4, leaf_capacity=20, seed=4)
    chained = build_gtree(graph, fanout=4, leaf_capacity=20, seed=4, matrix_mode=MATRICES_BOTTOM_UP)
    assert np.array_equal(default.arrays['matrix'], chained.arrays['matrix'])
    assert check_matrices(default, graph) == []


def test_single_leaf_tree_has_empty_matrices(path_graph):
    graph, _ = path_graph
    index = build_gtree(graph, fanout=2, leaf_capacity=8)
    assert index.leaves() == [index.root]
    assert index.leaf_matrix(index.root).shape == (3, 0)
    assert AssemblyState(index, graph, 0).distance(2) == 12


def test_unknown_matrix_mode(path_graph):
    graph, _ = path_graph
    with pytest.raises(ValueError):
        build_gtree(graph, matrix_mode='sideways')
