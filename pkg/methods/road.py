"""
ROAD
Rnet hierarchy over edge subsets, border-to-border shortcuts, the Route
Overlay of per-vertex shortcut trees, the Association Directory and the kNN
expansion that bypasses object-free Rnets
"""

import logging
import time

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as csgraph_dijkstra

from core.errors import IndexBuildError
from core.partition import MultilevelPartitioner
from core.search import SearchScratch
from methods.ine import KnnResult

logger = logging.getLogger(__name__)

SHORTCUTS_BOTTOM_UP = 'bottom_up'
SHORTCUTS_DIRECT = 'direct'

HIERARCHY_ARRAYS = (
    'parent', 'level', 'child_ptr', 'child_ids', 'owner', 'vertex_ptr', 'vertex_ids',
    'border_ptr', 'border_ids', 'interior', 'shortcut_ptr', 'shortcuts',
)
OVERLAY_ARRAYS = (
    'tree_ptr', 'node_rnet', 'node_border', 'node_child_lo', 'node_child_hi',
    'node_sc_lo', 'node_sc_hi', 'node_edge_lo', 'node_edge_hi',
    'sc_target', 'sc_weight', 'edge_target', 'edge_weight',
)


def default_levels(vertex_count):
    """l by network size, one more level per tier"""
    if vertex_count <= 60_000:
        return 7
    if vertex_count <= 200_000:
        return 8
    if vertex_count <= 1_500_000:
        return 9
    if vertex_count <= 4_000_000:
        return 10
    return 11


def _ptr(lengths):
    ptr = np.zeros(len(lengths) + 1, dtype=np.int64)
    np.cumsum(lengths, out=ptr[1:])
    return ptr


def _flat(arrays):
    return np.concatenate(arrays).astype(np.int64) if arrays else np.zeros(0, dtype=np.int64)


def _within_distances(eu, ev, ew, edges, sources, targets):
    """
    Distances from `sources` to `targets` using only the given edges.

    Returns an int64 |sources| x |targets| matrix, -1 where unreachable.
    """
    if len(sources) == 0 or len(targets) == 0:
        return np.zeros((len(sources), len(targets)), dtype=np.int64)
    vertices = np.unique(np.concatenate([eu[edges], ev[edges], sources, targets]))
    a = np.searchsorted(vertices, eu[edges])
    b = np.searchsorted(vertices, ev[edges])
    size = len(vertices)
    matrix = csr_matrix((ew[edges].astype(np.float64), (a, b)), shape=(size, size))
    rows = csgraph_dijkstra(matrix, directed=False, indices=np.searchsorted(vertices, sources))
    rows = np.atleast_2d(rows)[:, np.searchsorted(vertices, targets)]
    out = np.full(rows.shape, -1, dtype=np.int64)
    finite = np.isfinite(rows)
    out[finite] = rows[finite].astype(np.int64)
    return out


def _clique_distances(nodes, cliques, sources, targets):
    """
    Distances over a graph on `nodes` made of weighted cliques.

    Each clique is (members, matrix) with -1 marking missing pairs.
    """
    a_parts, b_parts, w_parts = [], [], []
    for members, matrix in cliques:
        i, j = np.nonzero(matrix > 0)
        keep = i < j
        a_parts.append(np.searchsorted(nodes, members[i[keep]]))
        b_parts.append(np.searchsorted(nodes, members[j[keep]]))
        w_parts.append(matrix[i[keep], j[keep]])
    a, b, w = _flat(a_parts), _flat(b_parts), _flat(w_parts)
    size = len(nodes)
    if len(a):
        # csr_matrix sums duplicates, so keep only the lightest parallel pair
        order = np.lexsort((w, b, a))
        a, b, w = a[order], b[order], w[order]
        first = np.ones(len(a), dtype=bool)
        first[1:] = (a[1:] != a[:-1]) | (b[1:] != b[:-1])
        a, b, w = a[first], b[first], w[first]
    matrix = csr_matrix((w.astype(np.float64), (a, b)), shape=(size, size))
    rows = csgraph_dijkstra(matrix, directed=False, indices=np.searchsorted(nodes, sources))
    rows = np.atleast_2d(rows)[:, np.searchsorted(nodes, targets)]
    out = np.full(rows.shape, -1, dtype=np.int64)
    finite = np.isfinite(rows)
    out[finite] = rows[finite].astype(np.int64)
    return out


class RnetHierarchy:
    """
    Rnets numbered breadth first, the root (the whole graph) first.

    owner[j][v] is the level-j Rnet whose vertex partition holds v. An edge
    belongs to a child Rnet when it belongs to the parent and the child owns
    either endpoint, so cut edges sit in both neighbours. V_R is the set of
    endpoints of R's edges and B_R those with an edge outside R.
    """

    def __init__(self, arrays, fanout, levels, seed=0):
        self.arrays = {name: np.ascontiguousarray(arrays[name], dtype=np.int64) for name in HIERARCHY_ARRAYS}
        self.fanout = fanout
        self.levels = levels
        self.seed = seed
        a = self.arrays
        count = len(a['parent'])
        self.parent = a['parent'].tolist()
        self.level = a['level'].tolist()
        self.interior = a['interior'].tolist()
        self._children = [a['child_ids'][a['child_ptr'][i]:a['child_ptr'][i + 1]].tolist() for i in range(count)]
        self._borders = [a['border_ids'][a['border_ptr'][i]:a['border_ptr'][i + 1]] for i in range(count)]
        self._vertices = [a['vertex_ids'][a['vertex_ptr'][i]:a['vertex_ptr'][i + 1]] for i in range(count)]
        self._shortcuts = []
        for i in range(count):
            width = len(self._borders[i])
            start = a['shortcut_ptr'][i]
            self._shortcuts.append(a['shortcuts'][start:start + width * width].reshape(width, width))

    @property
    def rnet_count(self):
        return len(self.parent)

    @property
    def owner(self):
        return self.arrays['owner'].reshape(self.levels + 1, -1)

    def children(self, rnet):
        return self._children[rnet]

    def is_leaf(self, rnet):
        return not self._children[rnet]

    def borders(self, rnet):
        return self._borders[rnet]

    def vertices(self, rnet):
        return self._vertices[rnet]

    def shortcuts(self, rnet):
        """|B_R| x |B_R| within-Rnet distances between borders, -1 where unreachable"""
        return self._shortcuts[rnet]

    def leaves(self):
        return [r for r in range(self.rnet_count) if not self._children[r]]

    def edge_mask(self, graph_edges, rnet):
        """Boolean mask over (eu, ev) marking the edges of an Rnet"""
        eu, ev = graph_edges
        owner = self.owner
        mask = np.ones(len(eu), dtype=bool)
        chain = []
        node = rnet
        while node != -1:
            chain.append(node)
            node = self.parent[node]
        for node in chain:
            level = self.level[node]
            if level:
                mask &= (owner[level][eu] == node) | (owner[level][ev] == node)
        return mask


class RouteOverlay:
    """
    Per-vertex shortcut trees in global arrays.

    The tree of v holds the Rnets containing v in breadth-first order starting at
    tree_ptr[v] with the root. A tree node lists its child tree nodes as a
    contiguous range, v's shortcuts when v is a border of that Rnet, and v's
    edges inside it for leaf Rnets.
    """

    def __init__(self, arrays):
        self.arrays = {name: np.ascontiguousarray(arrays[name], dtype=np.int64) for name in OVERLAY_ARRAYS}
        a = self.arrays
        self.tree_ptr = a['tree_ptr'].tolist()
        self.node_rnet = a['node_rnet'].tolist()
        self.node_border = a['node_border'].astype(bool).tolist()
        self.node_child_lo = a['node_child_lo'].tolist()
        self.node_child_hi = a['node_child_hi'].tolist()
        self.node_sc_lo = a['node_sc_lo'].tolist()
        self.node_sc_hi = a['node_sc_hi'].tolist()
        self.node_edge_lo = a['node_edge_lo'].tolist()
        self.node_edge_hi = a['node_edge_hi'].tolist()
        self.sc_target = a['sc_target'].tolist()
        self.sc_weight = a['sc_weight'].tolist()
        self.edge_target = a['edge_target'].tolist()
        self.edge_weight = a['edge_weight'].tolist()


class RoadIndex:
    def __init__(self, hierarchy, overlay):
        self.hierarchy = hierarchy
        self.overlay = overlay

    def size_bytes(self):
        return (
            sum(a.nbytes for a in self.hierarchy.arrays.values())
            + sum(a.nbytes for a in self.overlay.arrays.values())
        )

    def to_arrays(self):
        arrays = {f'h_{k}': v for k, v in self.hierarchy.arrays.items()}
        arrays.update({f'o_{k}': v for k, v in self.overlay.arrays.items()})
        return arrays

    def meta(self):
        h = self.hierarchy
        return {'fanout': h.fanout, 'levels': h.levels, 'seed': h.seed}

    @classmethod
    def from_arrays(cls, arrays, meta):
        hierarchy = RnetHierarchy(
            {k[2:]: v for k, v in arrays.items() if k.startswith('h_')},
            meta['fanout'], meta['levels'], meta.get('seed', 0),
        )
        overlay = RouteOverlay({k[2:]: v for k, v in arrays.items() if k.startswith('o_')})
        return cls(hierarchy, overlay)


def _boundary_by_level(source, target, owner_row):
    """(rnet, vertex) pairs where an arc crosses between two Rnets of one level"""
    a, b = owner_row[source], owner_row[target]
    cross = a != b
    if not np.any(cross):
        return {}
    pairs = np.unique(np.stack([a[cross], source[cross]], axis=1), axis=0)
    rnets, starts = np.unique(pairs[:, 0], return_index=True)
    ends = np.append(starts[1:], len(pairs))
    return {r: pairs[s:e, 1] for r, s, e in zip(rnets.tolist(), starts.tolist(), ends.tolist())}


def build_road(graph, fanout=4, levels=7, seed=0, shortcut_mode=SHORTCUTS_BOTTOM_UP):
    """
    Build the Rnet hierarchy, shortcuts and Route Overlay

    Args:
        graph: road network
        fanout: children per Rnet (f >= 2)
        levels: partition levels below the root (l >= 1)
        seed: partitioner seed
        shortcut_mode: 'bottom_up' chains children's distances, 'direct' runs a
            restricted Dijkstra per Rnet

    Raises:
        IndexBuildError: invalid parameters, or an Rnet too small to split at some level
    """
    if fanout < 2:
        raise IndexBuildError(f'ROAD fanout must be at least 2, got {fanout}')
    if levels < 1:
        raise IndexBuildError(f'ROAD needs at least one level, got {levels}')
    if shortcut_mode not in (SHORTCUTS_BOTTOM_UP, SHORTCUTS_DIRECT):
        raise ValueError(f'unknown shortcut mode {shortcut_mode!r}')

    started = time.perf_counter()
    n = graph.vertex_count
    triples = np.array(list(graph.edges()), dtype=np.int64).reshape(-1, 3)
    eu, ev, ew = triples[:, 0], triples[:, 1], triples[:, 2]
    degree = graph.degrees()
    partitioner = MultilevelPartitioner(seed=seed)

    parent, level, children = [-1], [0], [[]]
    owned = [np.arange(n, dtype=np.int64)]
    edges = [np.arange(len(eu), dtype=np.int64)]
    owner = np.zeros((levels + 1, n), dtype=np.int64)

    frontier = [0]
    for lev in range(1, levels + 1):
        next_frontier = []
        for r in frontier:
            if len(owned[r]) < fanout:
                raise IndexBuildError(
                    f'Rnet {r} at level {lev - 1} holds {len(owned[r])} vertices, '
                    f'too few to split into {fanout}; use fewer levels',
                    level=lev,
                )
            for part in partitioner.split(graph, owned[r], fanout):
                c = len(parent)
                parent.append(r)
                level.append(lev)
                children.append([])
                children[r].append(c)
                owned.append(part)
                owner[lev, part] = c
            e = edges[r]
            ou, ov = owner[lev, eu[e]], owner[lev, ev[e]]
            for c in children[r]:
                edges.append(e[(ou == c) | (ov == c)])
            next_frontier.extend(children[r])
        frontier = next_frontier
        logger.debug('ROAD level %d: %d Rnets', lev, len(frontier))
    count = len(parent)

    vertices, borders, interior = [], [], []
    for r in range(count):
        if r == 0:
            vr = np.arange(n, dtype=np.int64)
            br = np.zeros(0, dtype=np.int64)
        else:
            endpoints = np.concatenate([eu[edges[r]], ev[edges[r]]])
            vr, inside = np.unique(endpoints, return_counts=True)
            br = vr[inside < degree[vr]]
        vertices.append(vr)
        borders.append(br)
        interior.append(len(vr) - len(br))

    # extended boundary: borders plus owned vertices with a neighbour owned elsewhere
    source, target = graph.arc_sources(), graph.edge_target
    gates = {}
    for lev in range(1, levels + 1):
        gates.update(_boundary_by_level(source, target, owner[lev]))

    shortcuts = [np.zeros((0, 0), dtype=np.int64)] * count
    if shortcut_mode == SHORTCUTS_DIRECT:
        for r in range(1, count):
            shortcuts[r] = _within_distances(eu, ev, ew, edges[r], borders[r], borders[r])
    else:
        extended = [None] * count
        distances = [None] * count
        for r in range(count - 1, 0, -1):
            ext = np.union1d(borders[r], gates.get(r, np.zeros(0, dtype=np.int64)))
            if children[r]:
                nodes = np.unique(np.concatenate([extended[c] for c in children[r]]))
                cliques = [(extended[c], distances[c]) for c in children[r]]
                dist = _clique_distances(nodes, cliques, ext, ext)
                for c in children[r]:
                    extended[c] = distances[c] = None
            else:
                dist = _within_distances(eu, ev, ew, edges[r], ext, ext)
            extended[r], distances[r] = ext, dist
            position = np.searchsorted(ext, borders[r])
            shortcuts[r] = dist[np.ix_(position, position)]

    hierarchy = RnetHierarchy({
        'parent': np.array(parent, dtype=np.int64),
        'level': np.array(level, dtype=np.int64),
        'child_ptr': _ptr([len(c) for c in children]),
        'child_ids': np.array([c for cs in children for c in cs], dtype=np.int64),
        'owner': owner.ravel(),
        'vertex_ptr': _ptr([len(v) for v in vertices]),
        'vertex_ids': _flat(vertices),
        'border_ptr': _ptr([len(b) for b in borders]),
        'border_ids': _flat(borders),
        'interior': np.array(interior, dtype=np.int64),
        'shortcut_ptr': _ptr([s.size for s in shortcuts]),
        'shortcuts': _flat([s.ravel() for s in shortcuts]),
    }, fanout, levels, seed)

    overlay = _build_overlay(hierarchy, eu, ev, ew, edges, n)
    index = RoadIndex(hierarchy, overlay)
    logger.info(
        'Built ROAD: %d Rnets over %d levels, %d bytes in %.0f ms',
        count, levels, index.size_bytes(), (time.perf_counter() - started) * 1000,
    )
    return index


def _build_overlay(hierarchy, eu, ev, ew, edges, n):
    """Lay out every vertex's shortcut tree in breadth-first Rnet order"""
    count = hierarchy.rnet_count
    memberships = [[] for _ in range(n)]
    for r in range(count):
        for v in hierarchy.vertices(r).tolist():
            memberships[v].append(r)

    border_row = [None] * count
    for r in range(1, count):
        border_row[r] = {v: i for i, v in enumerate(hierarchy.borders(r).tolist())}

    leaf_edges = {}
    for r in hierarchy.leaves():
        if r == 0:
            continue
        adjacency = {}
        for u, v, w in zip(eu[edges[r]].tolist(), ev[edges[r]].tolist(), ew[edges[r]].tolist()):
            adjacency.setdefault(u, []).append((v, w))
            adjacency.setdefault(v, []).append((u, w))
        leaf_edges[r] = adjacency

    tree_ptr = [0]
    node_rnet, node_border, child_lo, child_hi = [], [], [], []
    sc_lo, sc_hi, edge_lo, edge_hi = [], [], [], []
    sc_target, sc_weight, edge_target, edge_weight = [], [], [], []
    parent = hierarchy.parent

    for v in range(n):
        rnets = memberships[v]
        base = len(node_rnet)
        slot = {r: base + i for i, r in enumerate(rnets)}
        kids = {}
        for r in rnets[1:]:
            kids.setdefault(parent[r], []).append(slot[r])
        for r in rnets:
            node_rnet.append(r)
            mine = kids.get(r, [])
            child_lo.append(mine[0] if mine else 0)
            child_hi.append(mine[-1] + 1 if mine else 0)
            row = border_row[r].get(v) if border_row[r] is not None else None
            node_border.append(1 if row is not None else 0)
            sc_lo.append(len(sc_target))
            if row is not None:
                weights = hierarchy.shortcuts(r)[row]
                for b, w in zip(hierarchy.borders(r).tolist(), weights.tolist()):
                    if b != v and w >= 0:
                        sc_target.append(b)
                        sc_weight.append(w)
            sc_hi.append(len(sc_target))
            edge_lo.append(len(edge_target))
            if r in leaf_edges:
                for u, w in leaf_edges[r].get(v, ()):
                    edge_target.append(u)
                    edge_weight.append(w)
            edge_hi.append(len(edge_target))
        tree_ptr.append(len(node_rnet))

    def arr(values):
        return np.array(values, dtype=np.int64)

    return RouteOverlay({
        'tree_ptr': arr(tree_ptr), 'node_rnet': arr(node_rnet), 'node_border': arr(node_border),
        'node_child_lo': arr(child_lo), 'node_child_hi': arr(child_hi),
        'node_sc_lo': arr(sc_lo), 'node_sc_hi': arr(sc_hi),
        'node_edge_lo': arr(edge_lo), 'node_edge_hi': arr(edge_hi),
        'sc_target': arr(sc_target), 'sc_weight': arr(sc_weight),
        'edge_target': arr(edge_target), 'edge_weight': arr(edge_weight),
    })


class AssociationDirectory:
    """Object bit per vertex and occupancy bit per Rnet for one object set"""

    def __init__(self, rnet_occupied, vertex_object):
        self.rnet_occupied = rnet_occupied
        self.vertex_object = vertex_object
        self._occupied = rnet_occupied.tolist()
        self.count = int(vertex_object.sum())

    def has_object(self, rnet):
        return self._occupied[rnet]

    def is_object(self, v):
        return bool(self.vertex_object[v])

    def size_bytes(self):
        return self.rnet_occupied.nbytes + self.vertex_object.nbytes


def build_association_directory(hierarchy, objects):
    """Leaf Rnets check their vertices; internal Rnets OR their children"""
    occupied = np.zeros(hierarchy.rnet_count, dtype=bool)
    mask = objects.mask
    for r in range(hierarchy.rnet_count - 1, -1, -1):
        if hierarchy.is_leaf(r):
            occupied[r] = bool(mask[hierarchy.vertices(r)].any())
        else:
            occupied[r] = bool(occupied[hierarchy.children(r)].any())
    return AssociationDirectory(occupied, mask)


def relax_shortcuts(v, d, queue, overlay, directory, hierarchy, settled, stats, visited_pruning=True):
    """
    Walk v's shortcut tree from the root. An object-free Rnet with v on its
    border is crossed through its shortcuts; otherwise the walk descends, and
    leaf Rnets relax v's plain edges.
    """
    stack = [overlay.tree_ptr[v]]
    while stack:
        t = stack.pop()
        r = overlay.node_rnet[t]
        if overlay.node_border[t] and not directory.has_object(r):
            for j in range(overlay.node_sc_lo[t], overlay.node_sc_hi[t]):
                b = overlay.sc_target[j]
                if visited_pruning and b in settled:
                    continue
                queue.push(d + overlay.sc_weight[j], b)
            stats.vertices_bypassed += hierarchy.interior[r]
        elif overlay.node_child_hi[t] > overlay.node_child_lo[t]:
            stack.extend(range(overlay.node_child_lo[t], overlay.node_child_hi[t]))
        else:
            for j in range(overlay.node_edge_lo[t], overlay.node_edge_hi[t]):
                u = overlay.edge_target[j]
                if visited_pruning and u in settled:
                    continue
                queue.push(d + overlay.edge_weight[j], u)


def knn_road(q, k, index, directory, visited_pruning=True, scratch=None):
    """
    k nearest objects of q: network expansion where shortcut-tree relaxation
    replaces plain edge relaxation

    Vertices settle in (distance, id) order as in INE.
    """
    if k < 1:
        raise ValueError('k must be at least 1')
    overlay, hierarchy = index.overlay, index.hierarchy
    scratch = scratch or SearchScratch(len(overlay.tree_ptr) - 1)
    scratch.reset()
    queue, settled = scratch.queue, scratch.settled
    result = KnnResult()
    stats = result.stats
    want = min(k, directory.count)

    queue.push(0, q)
    while queue and len(result.items) < want:
        d, v = queue.pop_min()
        if v in settled:
            continue
        settled.mark(v)
        stats.settled += 1
        if directory.is_object(v):
            result.items.append((v, d))
        relax_shortcuts(v, d, queue, overlay, directory, hierarchy, settled, stats, visited_pruning)
    stats.pushes = queue.pushes
    return result


def check_shortcuts(index, graph, samples=None, rng=None):
    """
    Compare stored shortcuts with a Dijkstra restricted to each Rnet's edges

    Returns:
        list of (rnet, b_i, b_j, stored, expected) mismatches
    """
    hierarchy = index.hierarchy
    triples = np.array(list(graph.edges()), dtype=np.int64).reshape(-1, 3)
    eu, ev, ew = triples[:, 0], triples[:, 1], triples[:, 2]
    entries = [
        (r, i, j)
        for r in range(1, hierarchy.rnet_count)
        for i in range(len(hierarchy.borders(r)))
        for j in range(len(hierarchy.borders(r)))
    ]
    if samples is not None and len(entries) > samples:
        rng = rng or np.random.default_rng(0)
        entries = [entries[x] for x in rng.choice(len(entries), size=samples, replace=False)]

    by_rnet = {}
    for r, i, j in entries:
        by_rnet.setdefault(r, []).append((i, j))
    mismatches = []
    for r, pairs in by_rnet.items():
        borders = hierarchy.borders(r)
        edge_ids = np.flatnonzero(hierarchy.edge_mask((eu, ev), r))
        expected = _within_distances(eu, ev, ew, edge_ids, borders, borders)
        stored = hierarchy.shortcuts(r)
        for i, j in pairs:
            if stored[i, j] != expected[i, j]:
                mismatches.append((r, int(borders[i]), int(borders[j]), int(stored[i, j]), int(expected[i, j])))
    return mismatches
