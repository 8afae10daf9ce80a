import struct

import numpy as np
import pytest

from core.errors import IndexFormatError
from core.objects import gen_uniform
from methods.road import build_association_directory, build_road, knn_road
from methods.silc import build_silc, silc_distance
from utils.random_graphs import random_road_graph
from utils.serialization import (
    KIND_GRAPH, KIND_ROAD, KIND_SILC, MAGIC, VERSION, load_arrays, load_graph, load_index, save_arrays,
    save_graph, save_index,
)


def test_graph_round_trip(tmp_path, road_network):
    graph, coords = road_network
    path = str(tmp_path / 'net.graph.bin')
    save_graph(graph, coords, path)
    again, again_coords = load_graph(path)
    assert again.weight_kind == graph.weight_kind
    assert np.array_equal(again.first_edge, graph.first_edge)
    assert np.array_equal(again.edge_target, graph.edge_target)
    assert np.array_equal(again.edge_weight, graph.edge_weight)
    assert np.array_equal(again_coords.x, coords.x)
    assert np.array_equal(again_coords.y, coords.y)


def test_graph_without_coordinates(tmp_path, path_graph):
    graph, _ = path_graph
    path = str(tmp_path / 'path.graph.bin')
    save_graph(graph, None, path)
    again, coords = load_graph(path)
    assert coords is None
    assert again.weight(1, 2) == 7


def test_arrays_keep_dtype_shape_and_meta(tmp_path):
    path = str(tmp_path / 'a.bin')
    arrays = {'m': np.arange(12, dtype=np.int32).reshape(3, 4), 'f': np.array([0.5, 1.5])}
    save_arrays(path, 'custom', arrays, {'fanout': 4})
    kind, loaded, meta = load_arrays(path)
    assert kind == 'custom'
    assert meta == {'fanout': 4}
    assert loaded['m'].dtype == np.int32 and loaded['m'].shape == (3, 4)
    assert np.array_equal(loaded['m'], arrays['m'])
    assert np.array_equal(loaded['f'], arrays['f'])


def test_road_index_answers_identically(tmp_path, random_weight_network):
    graph, _ = random_weight_network
    road = build_road(graph, 4, 2, seed=2)
    path = str(tmp_path / 'net.road.bin')
    save_index(road, KIND_ROAD, path)
    loaded = load_index(path, KIND_ROAD)
    assert loaded.meta() == road.meta()
    objects = gen_uniform(graph, 0.05, seed=8)
    before = build_association_directory(road.hierarchy, objects)
    after = build_association_directory(loaded.hierarchy, objects)
    for q in range(0, graph.vertex_count, 31):
        assert knn_road(q, 5, loaded, after).items == knn_road(q, 5, road, before).items


def test_silc_index_answers_identically(tmp_path):
    graph, coords = random_road_graph(80, seed=4)
    silc = build_silc(graph, coords, progress=False)
    path = str(tmp_path / 'net.silc.bin')
    save_index(silc, KIND_SILC, path)
    loaded = load_index(path, KIND_SILC)
    for s, t in [(0, 79), (5, 40), (61, 2)]:
        assert silc_distance(loaded, coords, graph, s, t) == silc_distance(silc, coords, graph, s, t)


def test_bad_magic(tmp_path):
    path = tmp_path / 'junk.bin'
    path.write_bytes(b'JUNKJUNK')
    with pytest.raises(IndexFormatError, match='not a cache file'):
        load_arrays(str(path))


def test_wrong_version(tmp_path):
    path = tmp_path / 'old.bin'
    path.write_bytes(MAGIC + struct.pack('<H', VERSION + 1))
    with pytest.raises(IndexFormatError, match='version'):
        load_arrays(str(path))


def test_wrong_kind(tmp_path, path_graph):
    graph, coords = path_graph
    path = str(tmp_path / 'g.bin')
    save_graph(graph, coords, path)
    with pytest.raises(IndexFormatError, match=KIND_GRAPH):
        load_index(path, KIND_ROAD)


def test_unknown_index_kind(tmp_path):
    with pytest.raises(IndexFormatError):
        load_index(str(tmp_path / 'missing.bin'), 'quadtree')


def test_truncated_file(tmp_path, path_graph):
    graph, coords = path_graph
    path = tmp_path / 'g.bin'
    save_graph(graph, coords, str(path))
    path.write_bytes(path.read_bytes()[:-5])
    with pytest.raises(IndexFormatError, match='truncated'):
        load_graph(str(path))
