"""
Object Sets
Decoupled point-of-interest collections and the synthetic workload generators
"""

import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from core.dijkstra import dijkstra_sssp, expansion_order
from core.errors import InfeasibleBucketError, ObjectSetError

logger = logging.getLogger(__name__)


class ObjectKind(str, Enum):
    UNIFORM = 'uniform'
    CLUSTERED = 'clustered'
    MIN_DIST = 'min_dist'
    FILE = 'file'


@dataclass(frozen=True, eq=False)
class ObjectSet:
    """
    Sorted, unique object vertex ids over a graph of `vertex_count` vertices.

    `seed` records the generator seed (None for file-loaded sets) so a set can be
    regenerated from its header alone.
    """
    ids: np.ndarray
    vertex_count: int
    kind: ObjectKind = ObjectKind.FILE
    seed: int = None
    _mask: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        ids = np.unique(np.asarray(self.ids, dtype=np.int64))
        if len(ids) == 0:
            raise ObjectSetError('object set is empty')
        if ids[0] < 0 or ids[-1] >= self.vertex_count:
            bad = int(ids[0] if ids[0] < 0 else ids[-1])
            raise ObjectSetError(f'object id {bad} outside 0..{self.vertex_count - 1}')
        ids.setflags(write=False)
        mask = np.zeros(self.vertex_count, dtype=bool)
        mask[ids] = True
        mask.setflags(write=False)
        object.__setattr__(self, 'ids', ids)
        object.__setattr__(self, 'kind', ObjectKind(self.kind))
        object.__setattr__(self, '_mask', mask)

    def __len__(self):
        return len(self.ids)

    def __iter__(self):
        return iter(self.ids.tolist())

    def __contains__(self, v):
        return bool(self._mask[v])

    @property
    def mask(self):
        """Boolean per-vertex membership array"""
        return self._mask

    @property
    def density(self):
        return len(self.ids) / self.vertex_count


def gen_uniform(graph, density, seed):
    """
    Uniformly random objects without replacement

    Args:
        graph: road network
        density: |O| / |V|, in (0, 1]
        seed: generator seed

    Raises:
        ObjectSetError: density out of range
    """
    if not 0 < density <= 1:
        raise ObjectSetError(f'density {density} outside (0, 1]')
    n = graph.vertex_count
    count = max(1, int(round(density * n)))
    rng = np.random.default_rng(seed)
    ids = rng.choice(n, size=count, replace=False)
    return ObjectSet(ids, n, ObjectKind.UNIFORM, seed)


def gen_clustered(graph, clusters, max_size, seed):
    """
    Clusters grown around uniformly random centres.

    Each centre draws a size in 1..max_size and takes that many vertices in
    Dijkstra settle order, the centre first. Overlapping clusters are merged.
    """
    n = graph.vertex_count
    if clusters < 1 or max_size < 1:
        raise ObjectSetError('cluster count and cluster size must be at least 1')
    if clusters > n:
        raise ObjectSetError(f'{clusters} clusters requested on a graph with {n} vertices')
    rng = np.random.default_rng(seed)
    centres = rng.choice(n, size=clusters, replace=False)
    sizes = rng.integers(1, max_size + 1, size=clusters)
    members = set()
    for centre, size in zip(centres.tolist(), sizes.tolist()):
        members.update(v for v, _ in expansion_order(centre, graph, limit=size))
    logger.debug('Clustered set: %d clusters, %d distinct objects', clusters, len(members))
    return ObjectSet(np.fromiter(members, dtype=np.int64), n, ObjectKind.CLUSTERED, seed)


def centre_vertex(coords):
    """Vertex nearest the centre of the coordinate bounding box; ties go to the lowest id"""
    min_x, min_y, max_x, max_y = coords.bounds()
    cx, cy = (min_x + max_x) / 2, (min_y + max_y) / 2
    return int(np.argmin((coords.x - cx) ** 2 + (coords.y - cy) ** 2))


def _centre_distances(graph, coords):
    vc = centre_vertex(coords)
    table = dijkstra_sssp(vc, graph)
    return vc, table, int(table.max())


def gen_min_dist(graph, coords, size, bucket, buckets, seed):
    """
    Objects at least D_max / 2^(buckets - bucket + 1) away from the centre vertex.

    D_max is the network distance from the centre vertex to the vertex furthest
    from it. Objects are drawn uniformly from the qualifying vertices.

    Raises:
        ObjectSetError: bucket outside 1..buckets
        InfeasibleBucketError: fewer qualifying vertices than `size`
    """
    if not 1 <= bucket <= buckets:
        raise ObjectSetError(f'bucket {bucket} outside 1..{buckets}')
    if size < 1:
        raise ObjectSetError('object count must be at least 1')
    _, table, d_max = _centre_distances(graph, coords)
    threshold = d_max / 2 ** (buckets - bucket + 1)
    qualifying = np.flatnonzero(table >= threshold)
    if len(qualifying) < size:
        raise InfeasibleBucketError(
            f'bucket {bucket}/{buckets} has {len(qualifying)} vertices at distance >= {threshold:g}, '
            f'{size} requested'
        )
    rng = np.random.default_rng(seed)
    ids = rng.choice(qualifying, size=size, replace=False)
    return ObjectSet(ids, graph.vertex_count, ObjectKind.MIN_DIST, seed)


def min_dist_query_vertices(graph, coords, count, buckets, seed):
    """Query vertices closer to the centre vertex than the first bucket, i.e. d < D_max / 2^buckets"""
    _, table, d_max = _centre_distances(graph, coords)
    pool = np.flatnonzero(table < d_max / 2 ** buckets)
    rng = np.random.default_rng(seed)
    return rng.choice(pool, size=count, replace=len(pool) < count)
