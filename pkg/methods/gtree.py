"""
G-tree
Partition hierarchy with border sets and contiguous 1-D distance matrices,
assembly-based distances with per-source materialization, Occurrence Lists and
the kNN search with its leaf-search variants
"""

import heapq
import logging
import time

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as csgraph_dijkstra

from core.dijkstra import bulk_distances
from core.errors import IndexBuildError
from core.partition import MultilevelPartitioner
from core.search import MinQueue
from methods.ine import KnnResult

logger = logging.getLogger(__name__)

INFINITY = float('inf')

# queue element kinds; nodes pop before vertices at equal distance
NODE = 0
VERTEX = 1

LEAF_SEARCH_IMPROVED = 'improved'
LEAF_SEARCH_BASIC = 'basic'

MATRICES_BOTTOM_UP = 'bottom_up'
MATRICES_DIRECT = 'direct'

ARRAY_NAMES = (
    'parent', 'depth', 'child_ptr', 'child_ids', 'border_ptr', 'border_ids', 'own_pos',
    'union_ptr', 'union_ids', 'block_start', 'matrix_ptr', 'matrix',
    'leaf_ptr', 'leaf_vertices', 'leaf_matrix_ptr', 'leaf_matrix', 'vertex_leaf', 'vertex_row',
)


def default_leaf_capacity(vertex_count):
    """τ by network size: 64 for the smallest tier, doubling per tier up to 512"""
    if vertex_count <= 60_000:
        return 64
    if vertex_count <= 500_000:
        return 128
    if vertex_count <= 4_000_000:
        return 256
    return 512


def _ptr(lengths):
    ptr = np.zeros(len(lengths) + 1, dtype=np.int64)
    np.cumsum(lengths, out=ptr[1:])
    return ptr


def _flat(arrays):
    return np.concatenate(arrays).astype(np.int64) if arrays else np.zeros(0, dtype=np.int64)


class GTreeIndex:
    """
    Flat-array G-tree. Node 0 is the root; nodes are numbered breadth first.

    For node i, `union_ids[union_ptr[i]:union_ptr[i+1]]` concatenates the borders
    of its children in child order and its matrix is the |U_i| x |U_i| block of
    `matrix` starting at matrix_ptr[i], row major. A child's borders occupy the
    rows `block_start[c]:block_start[c] + |B_c|` of its parent's matrix;
    `own_pos` gives each node's own borders' positions in its own union.
    Leaves store a |V_i| x |B_i| vertex-to-border matrix instead. Every entry is
    a full-graph shortest distance.
    """

    root = 0

    def __init__(self, arrays, fanout, leaf_capacity, seed=0):
        self.arrays = {name: np.ascontiguousarray(arrays[name], dtype=np.int64) for name in ARRAY_NAMES}
        self.fanout = fanout
        self.leaf_capacity = leaf_capacity
        self.seed = seed
        self._make_views()

    def _make_views(self):
        a = self.arrays
        n = len(a['parent'])
        self.parent = a['parent'].tolist()
        self.depth = a['depth'].tolist()
        self.vertex_leaf = a['vertex_leaf'].tolist()
        self.vertex_row = a['vertex_row'].tolist()
        self._children = [a['child_ids'][a['child_ptr'][i]:a['child_ptr'][i + 1]].tolist() for i in range(n)]
        self._borders = [a['border_ids'][a['border_ptr'][i]:a['border_ptr'][i + 1]] for i in range(n)]
        self._own = [a['own_pos'][a['border_ptr'][i]:a['border_ptr'][i + 1]] for i in range(n)]
        self._union = [a['union_ids'][a['union_ptr'][i]:a['union_ptr'][i + 1]] for i in range(n)]
        self._matrix = []
        for i in range(n):
            width = len(self._union[i])
            start = a['matrix_ptr'][i]
            self._matrix.append(a['matrix'][start:start + width * width].reshape(width, width))
        self._leaf_vertices = [a['leaf_vertices'][a['leaf_ptr'][i]:a['leaf_ptr'][i + 1]] for i in range(n)]
        self._leaf_matrix = []
        for i in range(n):
            rows, cols = len(self._leaf_vertices[i]), len(self._borders[i])
            start = a['leaf_matrix_ptr'][i]
            self._leaf_matrix.append(a['leaf_matrix'][start:start + rows * cols].reshape(rows, cols))
        self._border_col = [
            {v: j for j, v in enumerate(self._borders[i].tolist())} if not self._children[i] else None
            for i in range(n)
        ]

    # ------------------------------------------------------------------
    # Structure
    # ------------------------------------------------------------------

    @property
    def node_count(self):
        return len(self.parent)

    @property
    def vertex_count(self):
        return len(self.vertex_leaf)

    def children(self, node):
        return self._children[node]

    def is_leaf(self, node):
        return not self._children[node]

    def borders(self, node):
        return self._borders[node]

    def own_positions(self, node):
        return self._own[node]

    def union(self, node):
        return self._union[node]

    def block(self, node):
        """Row range of the node's borders in its parent's matrix"""
        start = int(self.arrays['block_start'][node])
        return start, start + len(self._borders[node])

    def matrix(self, node):
        return self._matrix[node]

    def leaf_vertices(self, node):
        return self._leaf_vertices[node]

    def leaf_matrix(self, node):
        return self._leaf_matrix[node]

    def border_column(self, leaf):
        """Mapping border vertex -> column of the leaf matrix"""
        return self._border_col[leaf]

    def leaves(self):
        return [i for i in range(self.node_count) if not self._children[i]]

    def ancestors(self, node):
        """Node and its ancestors up to the root"""
        chain = []
        while node != -1:
            chain.append(node)
            node = self.parent[node]
        return chain

    def size_bytes(self):
        return sum(array.nbytes for array in self.arrays.values())

    def to_arrays(self):
        return dict(self.arrays)

    def meta(self):
        return {'fanout': self.fanout, 'leaf_capacity': self.leaf_capacity, 'seed': self.seed}

    @classmethod
    def from_arrays(cls, arrays, meta):
        return cls(arrays, meta['fanout'], meta['leaf_capacity'], meta.get('seed', 0))


def _compute_borders(graph, node_vertices, depth):
    """Per node: sorted vertices with an edge leaving the node's vertex set"""
    n = graph.vertex_count
    max_depth = max(depth)
    node_at = np.full((max_depth + 1, n), -1, dtype=np.int64)
    for node, vertices in enumerate(node_vertices):
        node_at[depth[node], vertices] = node

    source, target = graph.arc_sources(), graph.edge_target
    borders = [np.zeros(0, dtype=np.int64) for _ in node_vertices]
    for level in range(1, max_depth + 1):
        a, b = node_at[level, source], node_at[level, target]
        cross = (a != -1) & (a != b)
        if not np.any(cross):
            continue
        pairs = np.unique(np.stack([a[cross], source[cross]], axis=1), axis=0)
        nodes, starts = np.unique(pairs[:, 0], return_index=True)
        ends = np.append(starts[1:], len(pairs))
        for node, start, end in zip(nodes.tolist(), starts.tolist(), ends.tolist()):
            borders[node] = pairs[start:end, 1].copy()
    return borders


def _closure(weights):
    """All-pairs shortest distances over a dense weight matrix; inf marks a missing edge"""
    size = len(weights)
    if size == 0:
        return np.zeros((0, 0))
    i, j = np.nonzero(np.isfinite(weights) & (weights > 0))
    matrix = csr_matrix((weights[i, j], (i, j)), shape=(size, size))
    return np.atleast_2d(csgraph_dijkstra(matrix, directed=False))


def _direct_matrices(graph, children, borders, unions, leaf_vertices, batch):
    """One full-graph shortest path tree per distinct border vertex"""
    node_count = len(children)
    matrices = [np.zeros((len(u), len(u)), dtype=np.int64) for u in unions]
    leaf_matrices = [np.zeros((len(leaf_vertices[i]), len(borders[i])), dtype=np.int64) for i in range(node_count)]
    needed = {}
    for i in range(node_count):
        if children[i]:
            for r, v in enumerate(unions[i].tolist()):
                needed.setdefault(v, []).append((i, r, False))
        else:
            for j, v in enumerate(borders[i].tolist()):
                needed.setdefault(v, []).append((i, j, True))
    sources = sorted(needed)
    csgraph = graph.to_csr()
    for start in range(0, len(sources), batch):
        chunk = sources[start:start + batch]
        rows = bulk_distances(graph, chunk, csgraph=csgraph, batch=batch)
        for v, row in zip(chunk, rows):
            for i, index, is_leaf in needed[v]:
                if is_leaf:
                    leaf_matrices[i][:, index] = row[leaf_vertices[i]]
                else:
                    matrices[i][index, :] = row[unions[i]]
    return matrices, leaf_matrices


def _bottom_up_matrices(graph, children, borders, unions, own_pos, block_start, leaf_vertices):
    """
    Matrices from node-restricted distances, then made full-graph top-down.

    Going up, a leaf runs Dijkstra inside its own subgraph from each border and
    a node closes the graph on its union made of its children's restricted
    border cliques plus the edges between union vertices. Going down, a node's
    own borders take the full-graph border distances from its parent's matrix
    and the node's union is closed again over them. A leaf vertex reaches a
    border b either inside the leaf or through some border b' first.
    """
    node_count = len(children)
    csgraph = graph.to_csr()
    restricted = [None] * node_count
    own = [None] * node_count

    for i in range(node_count - 1, -1, -1):
        if children[i]:
            union = unions[i]
            weights = csgraph[union][:, union].toarray()
            weights[weights == 0] = np.inf
            for c in children[i]:
                start = block_start[c]
                block = weights[start:start + len(borders[c]), start:start + len(borders[c])]
                np.minimum(block, own[c], out=block)
                own[c] = None
            restricted[i] = _closure(weights)
            own[i] = restricted[i][np.ix_(own_pos[i], own_pos[i])]
        else:
            vertices = leaf_vertices[i]
            rows = np.searchsorted(vertices, borders[i])
            if len(rows):
                sub = csgraph[vertices][:, vertices]
                dist = np.atleast_2d(csgraph_dijkstra(sub, directed=False, indices=rows))
            else:
                dist = np.zeros((0, len(vertices)))
            restricted[i] = dist.T
            own[i] = dist[:, rows]

    matrices = [np.zeros((0, 0), dtype=np.int64)] * node_count
    leaf_matrices = [np.zeros((0, 0), dtype=np.int64)] * node_count
    outer = [None] * node_count
    for i in range(node_count):
        dist = restricted[i]
        restricted[i] = None
        if children[i]:
            if outer[i] is not None and len(own_pos[i]):
                cell = np.ix_(own_pos[i], own_pos[i])
                dist[cell] = np.minimum(dist[cell], outer[i])
                dist = _closure(dist)
            for c in children[i]:
                start = block_start[c]
                outer[c] = dist[start:start + len(borders[c]), start:start + len(borders[c])]
            matrices[i] = _as_distances(dist, i)
        else:
            full = dist.copy()
            for j in range(len(borders[i])):
                np.minimum(full, dist[:, j:j + 1] + outer[i][j][None, :], out=full)
            leaf_matrices[i] = _as_distances(full, i)
        outer[i] = None
    return matrices, leaf_matrices


def _as_distances(dist, node):
    if not np.all(np.isfinite(dist)):
        raise IndexBuildError(f'node {node} has a border unreachable in the full graph')
    return dist.astype(np.int64)


def build_gtree(graph, fanout=4, leaf_capacity=64, seed=0, batch=64, matrix_mode=MATRICES_BOTTOM_UP):
    """
    Build a G-tree over the whole graph

    Args:
        graph: road network
        fanout: children per internal node (f >= 2)
        leaf_capacity: maximum vertices per leaf (τ >= 1)
        seed: partitioner seed
        batch: Dijkstra sources per scipy call in the direct matrix mode
        matrix_mode: 'bottom_up' chains children's restricted matrices and
            corrects them top-down, 'direct' runs one full-graph Dijkstra per
            border vertex

    Raises:
        IndexBuildError: invalid parameters
    """
    if fanout < 2:
        raise IndexBuildError(f'G-tree fanout must be at least 2, got {fanout}')
    if leaf_capacity < 1:
        raise IndexBuildError(f'G-tree leaf capacity must be at least 1, got {leaf_capacity}')
    if matrix_mode not in (MATRICES_BOTTOM_UP, MATRICES_DIRECT):
        raise ValueError(f'unknown matrix mode {matrix_mode!r}')

    started = time.perf_counter()
    n = graph.vertex_count
    partitioner = MultilevelPartitioner(seed=seed)
    parent, depth = [-1], [0]
    node_vertices = [np.arange(n, dtype=np.int64)]
    children = [[]]

    node = 0
    while node < len(node_vertices):
        vertices = node_vertices[node]
        if len(vertices) > leaf_capacity:
            parts = partitioner.split(graph, vertices, fanout)
            if len(parts) < 2:
                raise IndexBuildError(f'node {node} with {len(vertices)} vertices could not be split', depth[node])
            for part in parts:
                children[node].append(len(node_vertices))
                parent.append(node)
                depth.append(depth[node] + 1)
                node_vertices.append(part)
                children.append([])
        node += 1
    node_count = len(node_vertices)
    logger.debug('G-tree partitioned into %d nodes, height %d', node_count, max(depth) + 1)

    borders = _compute_borders(graph, node_vertices, depth)

    unions, own_pos, block_start = [], [], [-1] * node_count
    for i in range(node_count):
        if children[i]:
            offset = 0
            for c in children[i]:
                block_start[c] = offset
                offset += len(borders[c])
            union = _flat([borders[c] for c in children[i]])
            position = {v: p for p, v in enumerate(union.tolist())}
            own_pos.append(np.array([position[v] for v in borders[i].tolist()], dtype=np.int64))
        else:
            union = np.zeros(0, dtype=np.int64)
            own_pos.append(np.arange(len(borders[i]), dtype=np.int64))
        unions.append(union)

    leaf_vertices = [node_vertices[i] if not children[i] else np.zeros(0, dtype=np.int64) for i in range(node_count)]
    vertex_leaf = np.zeros(n, dtype=np.int64)
    vertex_row = np.zeros(n, dtype=np.int64)
    for i in range(node_count):
        if not children[i]:
            vertex_leaf[leaf_vertices[i]] = i
            vertex_row[leaf_vertices[i]] = np.arange(len(leaf_vertices[i]))

    if matrix_mode == MATRICES_DIRECT:
        matrices, leaf_matrices = _direct_matrices(graph, children, borders, unions, leaf_vertices, batch)
    else:
        matrices, leaf_matrices = _bottom_up_matrices(
            graph, children, borders, unions, own_pos, block_start, leaf_vertices,
        )

    arrays = {
        'parent': np.array(parent, dtype=np.int64),
        'depth': np.array(depth, dtype=np.int64),
        'child_ptr': _ptr([len(c) for c in children]),
        'child_ids': np.array([c for cs in children for c in cs], dtype=np.int64),
        'border_ptr': _ptr([len(b) for b in borders]),
        'border_ids': _flat(borders),
        'own_pos': _flat(own_pos),
        'union_ptr': _ptr([len(u) for u in unions]),
        'union_ids': _flat(unions),
        'block_start': np.array(block_start, dtype=np.int64),
        'matrix_ptr': _ptr([m.size for m in matrices]),
        'matrix': _flat([m.ravel() for m in matrices]),
        'leaf_ptr': _ptr([len(v) for v in leaf_vertices]),
        'leaf_vertices': _flat(leaf_vertices),
        'leaf_matrix_ptr': _ptr([m.size for m in leaf_matrices]),
        'leaf_matrix': _flat([m.ravel() for m in leaf_matrices]),
        'vertex_leaf': vertex_leaf,
        'vertex_row': vertex_row,
    }
    index = GTreeIndex(arrays, fanout, leaf_capacity, seed)
    logger.info(
        'Built G-tree: %d nodes, %d leaves, %d bytes in %.0f ms',
        node_count, len(index.leaves()), index.size_bytes(), (time.perf_counter() - started) * 1000,
    )
    return index


def leaf_dijkstra(index, graph, source, leaf):
    """Dijkstra from source restricted to the vertices of one leaf; dict vertex -> distance"""
    vertex_leaf = index.vertex_leaf
    distance = {source: 0}
    done = {}
    heap = [(0, source)]
    while heap:
        d, v = heapq.heappop(heap)
        if v in done:
            continue
        done[v] = d
        for u, w in graph.neighbors(v):
            if u in done or vertex_leaf[u] != leaf:
                continue
            nd = d + w
            if nd < distance.get(u, INFINITY):
                distance[u] = nd
                heapq.heappush(heap, (nd, u))
    return done


class AssemblyState:
    """
    Distances from one source to the borders of any node, assembled by min-plus
    chaining along the tree path and cached per node.

    path_cost counts border-to-border additions; matrix_sweeps counts non-leaf
    matrix blocks scanned.
    """

    def __init__(self, index, graph, source):
        self.index = index
        self.graph = graph
        self.source = source
        self.leaf = index.vertex_leaf[source]
        self.path = index.ancestors(self.leaf)
        self.position = {node: p for p, node in enumerate(self.path)}
        row = index.leaf_matrix(self.leaf)[index.vertex_row[source]]
        self._cache = {self.leaf: row}
        self._local = None
        self.path_cost = 0
        self.matrix_sweeps = 0

    def _sweep(self, distances, block):
        self.path_cost += block.size
        self.matrix_sweeps += 1
        return (distances[:, None] + block).min(axis=0)

    def border_distances(self, node):
        """d(source, b) for every border b of node, in border order"""
        cached = self._cache.get(node)
        if cached is not None:
            return cached
        index = self.index
        if node in self.position:
            # up: from the child on the source path to this node's own borders
            child = self.path[self.position[node] - 1]
            start, stop = index.block(child)
            block = index.matrix(node)[start:stop][:, index.own_positions(node)]
            result = self._sweep(self.border_distances(child), block)
        else:
            par = index.parent[node]
            start, stop = index.block(node)
            matrix = index.matrix(par)
            if par in self.position:
                # across: from the source-side sibling at the lowest common ancestor
                sibling = self.path[self.position[par] - 1]
                s_start, s_stop = index.block(sibling)
                result = self._sweep(self.border_distances(sibling), matrix[s_start:s_stop, start:stop])
            else:
                # down: from the parent's own borders into this node's block
                block = matrix[index.own_positions(par)][:, start:stop]
                result = self._sweep(self.border_distances(par), block)
        self._cache[node] = result
        return result

    def min_border(self, node):
        """Smallest source-to-border distance of node (SPDist); infinity for the root"""
        distances = self.border_distances(node) if node != self.index.root else ()
        return int(distances.min()) if len(distances) else INFINITY

    def local_distances(self):
        """Leaf-restricted Dijkstra from the source, computed once"""
        if self._local is None:
            self._local = leaf_dijkstra(self.index, self.graph, self.source, self.leaf)
        return self._local

    def distance(self, target):
        """Exact d(source, target)"""
        if target == self.source:
            return 0
        index = self.index
        leaf = index.vertex_leaf[target]
        row = index.leaf_matrix(leaf)[index.vertex_row[target]]
        if leaf == self.leaf:
            best = self.local_distances().get(target, INFINITY)
            through = self._cache[leaf]
            if len(through):
                self.path_cost += len(through)
                best = min(best, int((through + row).min()))
            return best
        through = self.border_distances(leaf)
        self.path_cost += len(through)
        return int((through + row).min())


class OccurrenceList:
    """Occupied children per node and object vertices per leaf for one object set"""

    def __init__(self, occupied, children, objects):
        self.occupied = occupied
        self._children = children
        self._objects = objects
        self.count = sum(len(o) for o in objects)

    def children(self, node):
        return self._children[node]

    def objects(self, leaf):
        return self._objects[leaf]

    def size_bytes(self):
        return self.occupied.nbytes + 8 * sum(len(c) for c in self._children) + 8 * sum(len(o) for o in self._objects)


def build_occurrence_list(index, objects):
    """Mark each object's leaf and propagate occupancy up to the root"""
    occupied = np.zeros(index.node_count, dtype=bool)
    leaf_objects = [[] for _ in range(index.node_count)]
    parent = index.parent
    for v in objects:
        leaf = index.vertex_leaf[v]
        leaf_objects[leaf].append(v)
        node = leaf
        while node != -1 and not occupied[node]:
            occupied[node] = True
            node = parent[node]
    children = [[c for c in index.children(i) if occupied[c]] for i in range(index.node_count)]
    return OccurrenceList(occupied, children, leaf_objects)


def _leaf_search_improved(q, want, index, graph, occurrence, queue, result, state):
    """
    Dijkstra inside leaf(q) that also jumps between borders through the leaf
    matrix. Objects settled before the first border are final; later ones go to
    the main queue with their exact distances.
    """
    leaf = state.leaf
    targets = set(occurrence.objects(leaf))
    border_col = index.border_column(leaf)
    borders = list(border_col.items())
    matrix = index.leaf_matrix(leaf)
    vertex_leaf, vertex_row = index.vertex_leaf, index.vertex_row
    heap = [(0, q)]
    visited = set()
    found = 0
    border_found = False
    while heap and len(result.items) < want and found < want:
        d, v = heapq.heappop(heap)
        if v in visited:
            continue
        visited.add(v)
        result.stats.settled += 1
        if v in targets:
            found += 1
            if border_found:
                queue.push((d, VERTEX), v)
            else:
                result.items.append((v, d))
        for u, w in graph.neighbors(v):
            if u not in visited and vertex_leaf[u] == leaf:
                heapq.heappush(heap, (d + w, u))
                result.stats.pushes += 1
        if v in border_col:
            row = matrix[vertex_row[v]]
            for b, col in borders:
                if b not in visited:
                    heapq.heappush(heap, (d + int(row[col]), b))
                    result.stats.pushes += 1
            border_found = True


def _leaf_search_basic(q, index, occurrence, queue, result, state):
    """Every leaf object at min(leaf-restricted distance, best path through a border)"""
    local = state.local_distances()
    result.stats.settled += len(local)
    for o in occurrence.objects(state.leaf):
        queue.push((state.distance(o), VERTEX), o)


def knn_gtree(q, k, index, occurrence, graph, leaf_search=LEAF_SEARCH_IMPROVED):
    """
    k nearest objects of q over a G-tree

    Elements leave the queue in (distance, kind, id) order; a dequeued element is
    final when its distance does not exceed T_min, the distance to the nearest
    border of the current subtree T_n. Otherwise T_n climbs one level.
    """
    if k < 1:
        raise ValueError('k must be at least 1')
    state = AssemblyState(index, graph, q)
    result = KnnResult()
    queue = MinQueue()
    want = min(k, occurrence.count)

    if occurrence.objects(state.leaf):
        if leaf_search == LEAF_SEARCH_IMPROVED:
            _leaf_search_improved(q, want, index, graph, occurrence, queue, result, state)
        elif leaf_search == LEAF_SEARCH_BASIC:
            _leaf_search_basic(q, index, occurrence, queue, result, state)
        else:
            raise ValueError(f'unknown leaf search {leaf_search!r}')

    tn = state.leaf
    t_min = state.min_border(tn)

    def update_t(tn):
        previous, tn = tn, index.parent[tn]
        for c in occurrence.children(tn):
            if c != previous:
                queue.push((state.min_border(c), NODE), c)
        return tn, state.min_border(tn)

    while len(result.items) < want and (queue or tn != index.root):
        if not queue:
            tn, t_min = update_t(tn)
        if queue:
            (d, kind), e = queue.pop_min()
            if d > t_min:
                tn, t_min = update_t(tn)
                queue.push((d, kind), e)
            elif kind == VERTEX:
                result.items.append((e, d))
            elif index.is_leaf(e):
                for o in occurrence.objects(e):
                    queue.push((state.distance(o), VERTEX), o)
            else:
                for c in occurrence.children(e):
                    queue.push((state.min_border(c), NODE), c)

    result.stats.pushes += queue.pushes
    result.stats.path_cost = state.path_cost
    result.stats.matrix_sweeps = state.matrix_sweeps
    return result


def check_matrices(index, graph, samples=None, rng=None):
    """
    Compare matrix entries with Dijkstra distances

    Args:
        samples: number of random entries per matrix kind; None checks every entry

    Returns:
        list of (node, row_vertex, col_vertex, stored, expected) mismatches
    """
    entries = []
    for i in range(index.node_count):
        if index.is_leaf(i):
            vertices, borders = index.leaf_vertices(i), index.borders(i)
            entries.extend((i, r, c, True) for r in range(len(vertices)) for c in range(len(borders)))
        else:
            width = len(index.union(i))
            entries.extend((i, r, c, False) for r in range(width) for c in range(width))
    if samples is not None and len(entries) > samples:
        rng = rng or np.random.default_rng(0)
        entries = [entries[j] for j in rng.choice(len(entries), size=samples, replace=False)]

    by_source = {}
    for i, r, c, is_leaf in entries:
        if is_leaf:
            u, v, stored = int(index.borders(i)[c]), int(index.leaf_vertices(i)[r]), index.leaf_matrix(i)[r, c]
        else:
            u, v, stored = int(index.union(i)[r]), int(index.union(i)[c]), index.matrix(i)[r, c]
        by_source.setdefault(u, []).append((i, v, int(stored)))

    mismatches = []
    sources = sorted(by_source)
    if sources:
        rows = bulk_distances(graph, sources)
        for u, row in zip(sources, rows):
            for i, v, stored in by_source[u]:
                if stored != row[v]:
                    mismatches.append((i, u, v, stored, int(row[v])))
    return mismatches
