import numpy as np
import pytest

from core.errors import IndexBuildError
from core.objects import gen_uniform
from methods.ine import knn_ine
from methods.road import (
    SHORTCUTS_BOTTOM_UP, SHORTCUTS_DIRECT, build_association_directory, build_road, check_shortcuts,
    default_levels, knn_road,
)


@pytest.fixture
def road(random_weight_network):
    graph, _ = random_weight_network
    return build_road(graph, fanout=4, levels=2, seed=1)


def test_hierarchy_shape(road, random_weight_network):
    graph, _ = random_weight_network
    h = road.hierarchy
    assert 2 <= len(h.children(0)) <= 4
    assert all(h.level[r] == 2 for r in h.leaves())
    assert len(h.borders(0)) == 0
    # every vertex is owned by exactly one Rnet per level
    for level in range(1, 3):
        assert set(np.unique(h.owner[level]).tolist()) == {r for r in range(h.rnet_count) if h.level[r] == level}
    assert road.size_bytes() > 0


def test_borders_have_an_edge_outside(road, random_weight_network):
    graph, _ = random_weight_network
    h = road.hierarchy
    triples = np.array(list(graph.edges()), dtype=np.int64)
    eu, ev = triples[:, 0], triples[:, 1]
    for r in range(1, h.rnet_count):
        inside = h.edge_mask((eu, ev), r)
        for b in h.borders(r).tolist():
            touching = ((eu == b) | (ev == b))
            assert np.any(touching & ~inside)


def test_shortcuts_match_restricted_dijkstra(road, random_weight_network):
    graph, _ = random_weight_network
    assert check_shortcuts(road, graph) == []


def test_bottom_up_and_direct_shortcuts_agree(random_weight_network):
    graph, _ = random_weight_network
    bottom_up = build_road(graph, 4, 2, seed=3, shortcut_mode=SHORTCUTS_BOTTOM_UP)
    direct = build_road(graph, 4, 2, seed=3, shortcut_mode=SHORTCUTS_DIRECT)
    assert np.array_equal(bottom_up.hierarchy.arrays['shortcuts'], direct.hierarchy.arrays['shortcuts'])
    assert np.array_equal(bottom_up.hierarchy.arrays['border_ids'], direct.hierarchy.arrays['border_ids'])


def test_corrupted_shortcut_is_reported(road, random_weight_network):
    graph, _ = random_weight_network
    shortcuts = road.hierarchy.arrays['shortcuts']
    entry = int(np.flatnonzero(shortcuts > 0)[0])
    shortcuts[entry] += 1
    assert check_shortcuts(road, graph)


def test_association_directory(road, random_weight_network, make_objects):
    graph, _ = random_weight_network
    h = road.hierarchy
    owner = h.owner[h.levels]
    obj = next(v for v in range(graph.vertex_count) if all(owner[u] == owner[v] for u, _ in graph.neighbors(v)))
    leaf = int(owner[obj])
    directory = build_association_directory(h, make_objects(graph, [obj]))
    assert directory.has_object(0)
    assert directory.has_object(leaf)
    assert directory.has_object(h.parent[leaf])
    assert directory.is_object(obj)
    assert directory.count == 1
    assert sum(directory.has_object(r) for r in h.leaves()) == 1


@pytest.mark.parametrize('k', [1, 5, 10])
def test_knn_road_matches_ine(road, random_weight_network, k):
    graph, _ = random_weight_network
    objects = gen_uniform(graph, 0.05, seed=k)
    directory = build_association_directory(road.hierarchy, objects)
    for q in range(0, graph.vertex_count, 13):
        assert knn_road(q, k, road, directory).items == knn_ine(q, k, graph, objects).items


def test_sparse_objects_are_bypassed(road, random_weight_network, make_objects):
    graph, _ = random_weight_network
    directory = build_association_directory(road.hierarchy, make_objects(graph, [0]))
    bypassed = 0
    for q in range(1, graph.vertex_count, 10):
        result = knn_road(q, 1, road, directory)
        assert result.items == knn_ine(q, 1, graph, make_objects(graph, [0])).items
        bypassed += result.stats.vertices_bypassed
    assert bypassed > 0


def test_visited_pruning_only_saves_pushes(road, random_weight_network):
    graph, _ = random_weight_network
    objects = gen_uniform(graph, 0.02, seed=5)
    directory = build_association_directory(road.hierarchy, objects)
    pruned_total = plain_total = 0
    for q in range(0, graph.vertex_count, 17):
        pruned = knn_road(q, 5, road, directory, visited_pruning=True)
        plain = knn_road(q, 5, road, directory, visited_pruning=False)
        assert pruned.items == plain.items
        assert pruned.stats.pushes <= plain.stats.pushes
        pruned_total += pruned.stats.pushes
        plain_total += plain.stats.pushes
    assert pruned_total < plain_total


def test_knn_road_rejects_k_zero(road, random_weight_network, make_objects):
    graph, _ = random_weight_network
    directory = build_association_directory(road.hierarchy, make_objects(graph, [3]))
    with pytest.raises(ValueError):
        knn_road(0, 0, road, directory)


def test_too_many_levels(path_graph):
    graph, _ = path_graph
    with pytest.raises(IndexBuildError):
        build_road(graph, fanout=2, levels=4)


@pytest.mark.parametrize('fanout, levels', [(1, 2), (4, 0)])
def test_invalid_parameters(path_graph, fanout, levels):
    graph, _ = path_graph
    with pytest.raises(IndexBuildError):
        build_road(graph, fanout=fanout, levels=levels)


def test_default_levels_grow_with_size():
    assert default_levels(1000) <= default_levels(1_000_000)
    assert default_levels(1000) >= 1
