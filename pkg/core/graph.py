"""
Road Network Graph
Contiguous-adjacency undirected weighted graph with per-vertex coordinates
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from core.errors import ConnectivityError, GraphFormatError

logger = logging.getLogger(__name__)


class WeightKind(str, Enum):
    DISTANCE = 'distance'
    TIME = 'time'


def _readonly(array, dtype):
    array = np.ascontiguousarray(array, dtype=dtype)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Graph:
    """
    Undirected road network in a single adjacency array.

    The adjacency list of vertex u is edge_target[first_edge[u]:first_edge[u + 1]]
    with matching weights in edge_weight. Every undirected edge is stored once in
    each endpoint's range. The graph is frozen after construction.
    """
    first_edge: np.ndarray
    edge_target: np.ndarray
    edge_weight: np.ndarray
    weight_kind: WeightKind = WeightKind.DISTANCE
    _adjacency: list = field(default=None, repr=False)
    _csr: object = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, 'first_edge', _readonly(self.first_edge, np.int64))
        object.__setattr__(self, 'edge_target', _readonly(self.edge_target, np.int64))
        object.__setattr__(self, 'edge_weight', _readonly(self.edge_weight, np.int64))
        object.__setattr__(self, 'weight_kind', WeightKind(self.weight_kind))

        # Python-side mirror of the adjacency array; element access on lists is
        # much cheaper than on numpy arrays inside the search loops
        offsets = self.first_edge.tolist()
        targets = self.edge_target.tolist()
        weights = self.edge_weight.tolist()
        adjacency = [
            list(zip(targets[offsets[v]:offsets[v + 1]], weights[offsets[v]:offsets[v + 1]]))
            for v in range(len(offsets) - 1)
        ]
        object.__setattr__(self, '_adjacency', adjacency)

    @classmethod
    def from_edges(cls, vertex_count, edges, weight_kind=WeightKind.DISTANCE, check_connected=True):
        """
        Build a graph from undirected (u, v, w) triples with 0-based ids.

        Self-loops are dropped; parallel edges collapse to the lightest one.

        Raises:
            GraphFormatError: on out-of-range ids or non-positive weights
            ConnectivityError: when check_connected is set and the graph is disconnected
        """
        best = {}
        for u, v, w in edges:
            u, v, w = int(u), int(v), int(w)
            if not (0 <= u < vertex_count and 0 <= v < vertex_count):
                raise GraphFormatError(f'edge ({u}, {v}) references a vertex outside 0..{vertex_count - 1}')
            if w <= 0:
                raise GraphFormatError(f'edge ({u}, {v}) has non-positive weight {w}')
            if u == v:
                continue
            key = (u, v) if u < v else (v, u)
            if key not in best or w < best[key]:
                best[key] = w

        if best:
            pairs = np.array(list(best.keys()), dtype=np.int64)
            weights = np.array(list(best.values()), dtype=np.int64)
        else:
            pairs = np.zeros((0, 2), dtype=np.int64)
            weights = np.zeros(0, dtype=np.int64)

        source = np.concatenate([pairs[:, 0], pairs[:, 1]])
        target = np.concatenate([pairs[:, 1], pairs[:, 0]])
        weight = np.concatenate([weights, weights])
        order = np.lexsort((target, source))
        source, target, weight = source[order], target[order], weight[order]

        first_edge = np.zeros(vertex_count + 1, dtype=np.int64)
        np.cumsum(np.bincount(source, minlength=vertex_count), out=first_edge[1:])

        graph = cls(first_edge, target, weight, WeightKind(weight_kind))
        if check_connected:
            graph.check_connected()
        return graph

    # ------------------------------------------------------------------
    # Size and statistics
    # ------------------------------------------------------------------

    @property
    def vertex_count(self):
        return len(self.first_edge) - 1

    @property
    def arc_count(self):
        """Directed arcs, i.e. 2 x undirected edges"""
        return int(self.first_edge[-1])

    @property
    def edge_count(self):
        return self.arc_count // 2

    def degree(self, v):
        return len(self._adjacency[v])

    def degrees(self):
        return np.diff(self.first_edge)

    def degree_histogram(self):
        """Mapping degree -> number of vertices with that degree"""
        values, counts = np.unique(self.degrees(), return_counts=True)
        return dict(zip(values.tolist(), counts.tolist()))

    # ------------------------------------------------------------------
    # Adjacency
    # ------------------------------------------------------------------

    def neighbors(self, v):
        """List of (neighbor, weight) pairs of v"""
        return self._adjacency[v]

    def weight(self, u, v):
        """Weight of edge (u, v); KeyError when u and v are not adjacent"""
        for target, w in self._adjacency[u]:
            if target == v:
                return w
        raise KeyError(f'no edge between {u} and {v}')

    def edges(self):
        """Iterate undirected edges as (u, v, w) with u < v"""
        for u, adjacent in enumerate(self._adjacency):
            for v, w in adjacent:
                if u < v:
                    yield u, v, w

    def arc_sources(self):
        """Source vertex of every arc, aligned with edge_target"""
        return np.repeat(np.arange(self.vertex_count, dtype=np.int64), self.degrees())

    def to_csr(self):
        """scipy CSR adjacency matrix (float64 weights) for bulk shortest paths"""
        if self._csr is None:
            n = self.vertex_count
            matrix = csr_matrix(
                (self.edge_weight.astype(np.float64), self.edge_target, self.first_edge),
                shape=(n, n),
            )
            object.__setattr__(self, '_csr', matrix)
        return self._csr

    def check_connected(self):
        if self.vertex_count == 0:
            raise GraphFormatError('graph has no vertices')
        count, labels = connected_components(self.to_csr(), directed=False)
        if count > 1:
            stranded = int(np.flatnonzero(labels != labels[0])[0])
            raise ConnectivityError(stranded)


@dataclass(frozen=True, eq=False)
class CoordinateTable:
    """Per-vertex planar coordinates; coincident points are separated at construction"""
    x: np.ndarray
    y: np.ndarray
    _points: list = field(default=None, repr=False)

    def __post_init__(self):
        if len(self.x) != len(self.y):
            raise GraphFormatError('coordinate arrays differ in length')
        x, y = _separate_duplicates(np.asarray(self.x, dtype=np.float64), np.asarray(self.y, dtype=np.float64))
        object.__setattr__(self, 'x', _readonly(x, np.float64))
        object.__setattr__(self, 'y', _readonly(y, np.float64))
        object.__setattr__(self, '_points', list(zip(self.x.tolist(), self.y.tolist())))

    def __len__(self):
        return len(self.x)

    def point(self, v):
        return self._points[v]

    def bounds(self):
        """(min_x, min_y, max_x, max_y)"""
        return float(self.x.min()), float(self.y.min()), float(self.x.max()), float(self.y.max())


def _spiral_offsets():
    """Unit-grid offsets around the origin, ring by ring"""
    ring = 1
    while True:
        for dx in range(-ring, ring + 1):
            for dy in range(-ring, ring + 1):
                if max(abs(dx), abs(dy)) == ring:
                    yield dx, dy
        ring += 1


def _separate_duplicates(x, y):
    """
    Move every repeated coordinate onto a free spot of a spiral whose step is
    the floating point spacing at that coordinate. The lowest id keeps its place.
    """
    if len(x) == 0:
        return x, y
    points = np.stack([x, y], axis=1)
    _, first_index, counts = np.unique(points, axis=0, return_index=True, return_counts=True)
    if np.all(counts == 1):
        return x, y

    x, y = x.copy(), y.copy()
    occupied = set(zip(x.tolist(), y.tolist()))
    seen = {}
    moved = 0
    for v in range(len(x)):
        key = (x[v], y[v])
        if key not in seen:
            seen[key] = v
            continue
        step = float(np.spacing(max(abs(key[0]), abs(key[1]), 1.0)))
        for dx, dy in _spiral_offsets():
            candidate = (key[0] + dx * step, key[1] + dy * step)
            if candidate not in occupied:
                break
        occupied.add(candidate)
        x[v], y[v] = candidate
        moved += 1
    logger.debug('Separated %d coincident coordinates', moved)
    return x, y


def euclidean_distance(a, b, coords):
    """Straight-line distance between the coordinates of vertices a and b"""
    ax, ay = coords.point(a)
    bx, by = coords.point(b)
    return math.hypot(ax - bx, ay - by)


def edge_euclidean_lengths(graph, coords):
    """Euclidean length of every arc, aligned with graph.edge_target"""
    source = graph.arc_sources()
    target = graph.edge_target
    return np.hypot(coords.x[source] - coords.x[target], coords.y[source] - coords.y[target])


def max_speed(graph, coords):
    """
    S = max over edges of d_E(u, v) / w(u, v).

    d_E(p, q) / S is then a lower bound on the network distance between p and q.

    Raises:
        ValueError: if an edge has a non-positive weight
    """
    weights = graph.edge_weight
    if np.any(weights <= 0):
        raise ValueError('max_speed requires strictly positive edge weights')
    if len(weights) == 0:
        return 0.0
    return float(np.max(edge_euclidean_lengths(graph, coords) / weights))


def lower_bound_scale(graph, coords):
    """
    Factor turning Euclidean distance into a sound network-distance lower bound.

    Travel-time graphs use 1/S. Distance graphs use 1 unless some edge is
    shorter than its endpoints' separation, in which case they fall back to 1/S.
    """
    speed = max_speed(graph, coords)
    if speed <= 0.0:
        return 1.0
    # nudge S up so floating point error never overstates the bound
    scale = 1.0 / (speed * (1.0 + 1e-12))
    if graph.weight_kind is WeightKind.TIME:
        return scale
    if speed > 1.0:
        logger.warning('Coordinates overstate network distance (S=%.6g); scaling Euclidean bounds', speed)
        return scale
    return 1.0


def floor_bound(euclidean, scale=1.0):
    """Integer lower bound on a network distance from a Euclidean distance"""
    return math.floor(euclidean * scale)
