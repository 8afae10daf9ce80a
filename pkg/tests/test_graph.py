import gzip
import io

import networkx as nx
import numpy as np
import pytest

from core.dijkstra import bulk_distances, dijkstra_distance, dijkstra_sssp
from core.errors import ConnectivityError, GraphFormatError
from core.graph import (
    CoordinateTable, Graph, WeightKind, euclidean_distance, floor_bound, lower_bound_scale, max_speed,
)
from utils.dimacs import parse_dimacs_co, parse_dimacs_gr, write_dimacs_co, write_dimacs_gr
from tests.conftest import to_networkx

MINIMAL_GR = """c minimal
p sp 3 4
a 1 2 5
a 2 1 5
a 2 3 7
a 3 2 7
"""


def test_parse_minimal_gr():
    graph = parse_dimacs_gr(MINIMAL_GR)
    assert graph.vertex_count == 3
    assert graph.edge_count == 2
    assert graph.arc_count == 4
    assert graph.first_edge[0] == 0
    assert graph.first_edge[-1] == 4
    assert graph.weight(0, 1) == 5
    assert graph.weight(2, 1) == 7


def test_every_edge_stored_in_both_ranges(road_network):
    graph, _ = road_network
    for u in range(graph.vertex_count):
        for v, w in graph.neighbors(u):
            assert graph.weight(v, u) == w
    assert np.all(np.diff(graph.first_edge) >= 0)


def test_missing_reverse_arc_is_rejected():
    with pytest.raises(GraphFormatError) as info:
        parse_dimacs_gr("p sp 2 1\na 1 2 5\n")
    assert info.value.line_number == 2


def test_malformed_arc_line_reports_line_number():
    with pytest.raises(GraphFormatError) as info:
        parse_dimacs_gr("p sp 2 2\na 1 2 x\na 2 1 5\n")
    assert info.value.line_number == 2


def test_non_positive_weight_is_rejected():
    with pytest.raises(GraphFormatError):
        parse_dimacs_gr("p sp 2 2\na 1 2 0\na 2 1 0\n")


def test_disconnected_graph_names_stranded_vertex():
    text = "p sp 4 4\na 1 2 1\na 2 1 1\na 3 4 1\na 4 3 1\n"
    with pytest.raises(ConnectivityError) as info:
        parse_dimacs_gr(text)
    assert info.value.vertex in (2, 3)


def test_parse_co():
    coords = parse_dimacs_co("v 1 0 0\nv 2 3 4\n", 2)
    assert coords.point(0) == (0.0, 0.0)
    assert coords.point(1) == (3.0, 4.0)


def test_single_line_text_is_parsed_not_opened():
    graph = parse_dimacs_gr('p sp 1 0')
    assert graph.vertex_count == 1
    assert graph.edge_count == 0
    coords = parse_dimacs_co('v 1 3 4', 1)
    assert coords.point(0) == (3.0, 4.0)
    with pytest.raises(GraphFormatError, match='coordinate missing for vertex'):
        parse_dimacs_co('v 1 0 0', 2)


def test_path_objects_and_gzip_files_are_read(tmp_path):
    plain = tmp_path / 'minimal.gr'
    plain.write_text(MINIMAL_GR)
    packed = tmp_path / 'minimal.gr.gz'
    with gzip.open(packed, 'wt') as handle:
        handle.write(MINIMAL_GR)
    for source in (plain, str(plain), packed, str(packed)):
        graph = parse_dimacs_gr(source)
        assert graph.vertex_count == 3
        assert graph.weight(1, 2) == 7


def test_missing_file_name_still_raises(tmp_path):
    with pytest.raises(FileNotFoundError):
        parse_dimacs_gr(str(tmp_path / 'absent.gr'))


def test_co_missing_vertex():
    with pytest.raises(GraphFormatError, match='coordinate missing for vertex'):
        parse_dimacs_co("v 1 0 0\n", 2)


def test_co_duplicate_id():
    with pytest.raises(GraphFormatError, match='duplicate'):
        parse_dimacs_co("v 1 0 0\nv 1 1 1\nv 2 3 4\n", 2)


def test_round_trip_preserves_weighted_edges(road_network):
    graph, coords = road_network
    gr, co = io.StringIO(), io.StringIO()
    write_dimacs_gr(graph, gr, comment='round trip')
    write_dimacs_co(coords, co)
    again = parse_dimacs_gr(gr.getvalue())
    again_coords = parse_dimacs_co(co.getvalue(), again.vertex_count)
    assert again.vertex_count == graph.vertex_count
    assert sorted(again.edges()) == sorted(graph.edges())
    assert np.array_equal(again_coords.x, coords.x)
    assert np.array_equal(again_coords.y, coords.y)


def test_euclidean_distance():
    coords = CoordinateTable(np.array([0.0, 3.0]), np.array([0.0, 4.0]))
    assert euclidean_distance(0, 1, coords) == 5.0
    assert euclidean_distance(1, 0, coords) == 5.0
    assert euclidean_distance(1, 1, coords) == 0.0


def test_coincident_coordinates_are_separated():
    coords = CoordinateTable(np.array([1.0, 1.0, 1.0, 2.0]), np.array([1.0, 1.0, 1.0, 2.0]))
    points = {coords.point(v) for v in range(4)}
    assert len(points) == 4
    # the lowest id keeps its place
    assert coords.point(0) == (1.0, 1.0)
    assert euclidean_distance(0, 1, coords) < 1e-9


def test_dijkstra_on_path(path_graph):
    graph, _ = path_graph
    assert dijkstra_distance(0, 0, graph) == 0
    assert dijkstra_distance(0, 2, graph) == 12
    assert dijkstra_sssp(0, graph).tolist() == [0, 5, 12]


def test_dijkstra_matches_bellman_ford(random_weight_network, rng):
    graph, _ = random_weight_network
    g = to_networkx(graph)
    for s, t in rng.integers(0, graph.vertex_count, size=(50, 2)).tolist():
        expected = nx.bellman_ford_path_length(g, s, t)
        assert dijkstra_distance(s, t, graph) == expected


def test_sssp_matches_point_to_point_and_bulk(random_weight_network):
    graph, _ = random_weight_network
    table = dijkstra_sssp(17, graph)
    assert table[17] == 0
    for t in range(0, graph.vertex_count, 7):
        assert table[t] == dijkstra_distance(17, t, graph)
    assert np.array_equal(bulk_distances(graph, [17])[0], table)


def test_triangle_inequality(random_weight_network, rng):
    graph, _ = random_weight_network
    rows = bulk_distances(graph, list(range(20)))
    for a, b, c in rng.integers(0, 20, size=(100, 3)).tolist():
        assert rows[a][c] <= rows[a][b] + rows[b][c]


def test_euclidean_is_lower_bound_on_distance_graphs(road_network, rng):
    graph, coords = road_network
    assert lower_bound_scale(graph, coords) == 1.0
    for s, t in rng.integers(0, graph.vertex_count, size=(100, 2)).tolist():
        assert floor_bound(euclidean_distance(s, t, coords)) <= dijkstra_distance(s, t, graph)


def test_max_speed_single_edge():
    graph = Graph.from_edges(2, [(0, 1, 5)], WeightKind.TIME)
    coords = CoordinateTable(np.array([0.0, 3.0]), np.array([0.0, 4.0]))
    assert max_speed(graph, coords) == pytest.approx(1.0)


def test_max_speed_takes_the_largest_ratio():
    graph = Graph.from_edges(3, [(0, 1, 2), (1, 2, 1)], WeightKind.TIME)
    coords = CoordinateTable(np.array([0.0, 1.0, 3.0]), np.array([0.0, 0.0, 0.0]))
    assert max_speed(graph, coords) == pytest.approx(2.0)


def test_scaled_bound_on_travel_time_graph(random_weight_network, rng):
    graph, coords = random_weight_network
    timed = Graph(graph.first_edge, graph.edge_target, graph.edge_weight, WeightKind.TIME)
    scale = lower_bound_scale(timed, coords)
    assert scale == pytest.approx(1.0 / max_speed(timed, coords))
    for s, t in rng.integers(0, graph.vertex_count, size=(100, 2)).tolist():
        assert floor_bound(euclidean_distance(s, t, coords), scale) <= dijkstra_distance(s, t, timed)


def test_from_edges_collapses_parallel_edges():
    graph = Graph.from_edges(2, [(0, 1, 9), (1, 0, 4), (0, 0, 1)])
    assert graph.edge_count == 1
    assert graph.weight(0, 1) == 4


def test_degree_histogram(path_graph):
    graph, _ = path_graph
    assert graph.degree_histogram() == {1: 2, 2: 1}
