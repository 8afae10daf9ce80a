import pytest

from core.graph import lower_bound_scale
from core.objects import gen_clustered, gen_uniform
from methods.distance_browsing import INFINITE, UpperBoundList, knn_db_enn, knn_disbrw
from methods.ine import knn_ine
from methods.silc import build_silc
from spatial.object_hierarchy import build_object_hierarchy
from spatial.rtree import build_rtree
from utils.random_graphs import RANDOM, random_road_graph


@pytest.fixture(scope='module', params=['euclidean', RANDOM])
def browsing(request):
    graph, coords = random_road_graph(160, seed=9, weights=request.param)
    index = build_silc(graph, coords, progress=False)
    return graph, coords, index, lower_bound_scale(graph, coords)


def test_upper_bound_list_tracks_kth():
    bounds = UpperBoundList(2)
    assert bounds.kth == INFINITE
    bounds.update(7, 40)
    assert bounds.kth == INFINITE
    bounds.update(3, 25)
    assert bounds.kth == (40, 7)
    bounds.update(9, 30)
    assert bounds.kth == (30, 9)
    bounds.update(7, 10)
    assert bounds.kth == (25, 3)


@pytest.mark.parametrize('k', [1, 5, 10])
@pytest.mark.parametrize('chains', [True, False])
def test_disbrw_matches_ine(browsing, k, chains):
    graph, coords, index, scale = browsing
    objects = gen_uniform(graph, 0.1, seed=k)
    hierarchy = build_object_hierarchy(objects, coords, capacity=4)
    for q in range(0, graph.vertex_count, 11):
        result = knn_disbrw(q, k, index, coords, graph, hierarchy, scale, chains=chains)
        assert result.items == knn_ine(q, k, graph, objects).items


@pytest.mark.parametrize('k', [1, 5, 10])
@pytest.mark.parametrize('chains', [True, False])
def test_db_enn_matches_ine(browsing, k, chains):
    graph, coords, index, scale = browsing
    objects = gen_uniform(graph, 0.1, seed=k)
    rtree = build_rtree(objects, coords, capacity=4)
    for q in range(0, graph.vertex_count, 11):
        result = knn_db_enn(q, k, index, coords, graph, rtree, scale, chains=chains)
        assert result.items == knn_ine(q, k, graph, objects).items


def test_clustered_objects(browsing):
    graph, coords, index, scale = browsing
    objects = gen_clustered(graph, 4, 5, seed=2)
    hierarchy = build_object_hierarchy(objects, coords, capacity=4)
    rtree = build_rtree(objects, coords, capacity=4)
    for q in range(3, graph.vertex_count, 19):
        expected = knn_ine(q, 5, graph, objects).items
        assert knn_disbrw(q, 5, index, coords, graph, hierarchy, scale).items == expected
        assert knn_db_enn(q, 5, index, coords, graph, rtree, scale).items == expected


def test_browsing_counts_lookups_and_refinements(browsing):
    graph, coords, index, scale = browsing
    objects = gen_uniform(graph, 0.05, seed=4)
    hierarchy = build_object_hierarchy(objects, coords, capacity=4)
    rtree = build_rtree(objects, coords, capacity=4)
    q = next(v for v in range(graph.vertex_count) if v not in objects)
    disbrw = knn_disbrw(q, 3, index, coords, graph, hierarchy, scale)
    db_enn = knn_db_enn(q, 3, index, coords, graph, rtree, scale)
    assert disbrw.stats.lookups >= 3
    assert db_enn.stats.lookups >= 3
    assert db_enn.stats.cursor_pulls >= 3


def test_k_larger_than_object_count(browsing, make_objects):
    graph, coords, index, scale = browsing
    objects = make_objects(graph, [1, 2])
    hierarchy = build_object_hierarchy(objects, coords, capacity=4)
    result = knn_disbrw(0, 5, index, coords, graph, hierarchy, scale)
    assert result.items == knn_ine(0, 5, graph, objects).items


def test_k_zero_is_rejected(browsing, make_objects):
    graph, coords, index, scale = browsing
    objects = make_objects(graph, [1])
    with pytest.raises(ValueError):
        knn_disbrw(0, 0, index, coords, graph, build_object_hierarchy(objects, coords), scale)
    with pytest.raises(ValueError):
        knn_db_enn(0, 0, index, coords, graph, build_rtree(objects, coords), scale)
