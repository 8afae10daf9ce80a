"""
SILC
Per-vertex first-hop colourings compressed into Morton-ordered quadtree blocks
carrying network/Euclidean ratio bounds, the degree-2 chain table, next-hop
path stepping and distance-interval refinement
"""

import logging
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as csgraph_dijkstra
from tqdm import tqdm

import config
from core.errors import MemoryBudgetError
from spatial.morton import Grid

logger = logging.getLogger(__name__)

# block start, level, colour and two ratios
ENTRY_BYTES = 40
CHUNK = 16
# relative slack on float ratio products before rounding to integer bounds
RATIO_SLACK = 1e-9

ARRAY_NAMES = (
    'codes', 'block_ptr', 'block_start', 'block_level', 'block_color', 'block_lo', 'block_hi',
    'exc_ptr', 'exc_vertex', 'exc_color', 'exc_dist',
    'chain_id', 'chain_pos', 'chain_lo', 'chain_lo_weight', 'chain_hi', 'chain_hi_weight',
)


def estimate_silc_bytes(vertex_count):
    """Projected index size, assuming about 3 sqrt(|V|) blocks per vertex"""
    return int(vertex_count * (3 * math.sqrt(vertex_count) + 1) * ENTRY_BYTES)


# ----------------------------------------------------------------------
# Construction (runs in worker processes)
# ----------------------------------------------------------------------

_worker = {}


def _init_worker(first_edge, edge_target, edge_weight, x, y, codes, bits):
    n = len(first_edge) - 1
    order = np.argsort(codes, kind='stable')
    _worker.update(
        csr=csr_matrix((edge_weight.astype(np.float64), edge_target, first_edge), shape=(n, n)),
        first_edge=first_edge, edge_target=edge_target, edge_weight=edge_weight,
        x=x, y=y, order=order, sorted_codes=codes[order], bits=bits,
    )


def first_hops(s, rows, row_of, first_edge, edge_target, edge_weight):
    """
    First hop from s towards every vertex, preferring the lowest-id neighbour
    among those on some shortest path. -1 at s itself.
    """
    ds = rows[row_of[s]]
    hop = np.full(len(ds), -1, dtype=np.int64)
    for j in range(first_edge[s], first_edge[s + 1]):
        a, w = int(edge_target[j]), float(edge_weight[j])
        hop[(hop < 0) & (rows[row_of[a]] + w == ds)] = a
    hop[s] = -1
    return hop


def _source_blocks(s, ds, hop):
    """Maximal single-colour Morton blocks of one source, plus exceptions"""
    w = _worker
    order, codes, bits = w['order'], w['sorted_codes'], w['bits']
    keep = order != s
    order, codes = order[keep], codes[keep]
    colors = hop[order]
    dist = ds[order]
    de = np.hypot(w['x'][order] - w['x'][s], w['y'][order] - w['y'][s])

    change = np.zeros(len(order), dtype=np.int64)
    change[1:] = np.cumsum(colors[1:] != colors[:-1])

    starts, levels, los = [], [], []
    exceptional = np.zeros(len(order), dtype=bool)
    exceptional[de == 0] = True
    stack = [(0, len(order), 0, 0)]
    while stack:
        lo, hi, level, base = stack.pop()
        if hi <= lo:
            continue
        uniform = change[hi - 1] == change[lo] and not exceptional[lo:hi].any()
        if uniform:
            starts.append(base)
            levels.append(level)
            los.append(lo)
            continue
        if level == bits:
            exceptional[lo:hi] = True
            continue
        quarter = 1 << (2 * (bits - level - 1))
        cuts = [lo] + (np.searchsorted(codes[lo:hi], [base + quarter * q for q in (1, 2, 3)]) + lo).tolist() + [hi]
        for q in range(3, -1, -1):
            stack.append((cuts[q], cuts[q + 1], level + 1, base + quarter * q))

    ratio = np.divide(dist, de, out=np.zeros_like(dist), where=de > 0)
    rank = np.argsort(np.array(starts, dtype=np.int64), kind='stable')
    starts = np.array(starts, dtype=np.int64)[rank]
    levels = np.array(levels, dtype=np.int64)[rank]
    los = np.array(los, dtype=np.int64)[rank]
    if len(los):
        lo_ratio = np.where(exceptional, np.inf, ratio)
        hi_ratio = np.where(exceptional, -np.inf, ratio)
        lam_lo = np.minimum.reduceat(lo_ratio, los)
        lam_hi = np.maximum.reduceat(hi_ratio, los)
    else:
        lam_lo = lam_hi = np.zeros(0)
    colors_out = colors[los]

    exc = np.sort(order[exceptional])
    return (
        starts, levels, colors_out,
        np.nextafter(lam_lo, 0.0), np.nextafter(lam_hi, np.inf),
        exc, hop[exc], ds[exc].astype(np.int64),
    )


def _build_chunk(sources):
    w = _worker
    first_edge, edge_target = w['first_edge'], w['edge_target']
    needed = set(sources)
    for s in sources:
        needed.update(edge_target[first_edge[s]:first_edge[s + 1]].tolist())
    needed = sorted(needed)
    row_of = {v: i for i, v in enumerate(needed)}
    rows = np.atleast_2d(csgraph_dijkstra(w['csr'], directed=False, indices=needed))
    out = []
    for s in sources:
        hop = first_hops(s, rows, row_of, first_edge, edge_target, w['edge_weight'])
        out.append(_source_blocks(s, rows[row_of[s]], hop))
    return out


# ----------------------------------------------------------------------
# Chains
# ----------------------------------------------------------------------

def build_chain_table(graph):
    """
    Maximal runs of degree-2 vertices. Each chain vertex records its chain id,
    position, both end vertices and the along-chain distance to each end.
    Pure cycles have no ends and stay unchained.
    """
    n = graph.vertex_count
    degree = graph.degrees()
    chain_id = np.full(n, -1, dtype=np.int64)
    table = {name: np.full(n, -1, dtype=np.int64) for name in ('pos', 'lo', 'lo_w', 'hi', 'hi_w')}
    next_id = 0
    cyclic = set()
    for v in np.flatnonzero(degree == 2).tolist():
        if chain_id[v] >= 0 or v in cyclic:
            continue
        (a, wa), (b, wb) = graph.neighbors(v)
        left, left_end, left_w = _walk(graph, degree, v, a, wa)
        if left_end is None:
            cyclic.update(left)
            cyclic.add(v)
            continue
        right, right_end, right_w = _walk(graph, degree, v, b, wb)
        members = left[::-1] + [v] + right
        # weights between consecutive members, from the lo end outward
        steps = left_w[::-1] + right_w
        offset = np.cumsum(steps)[:-1]
        total = int(offset[-1] + steps[-1])
        for i, m in enumerate(members):
            chain_id[m] = next_id
            table['pos'][m] = i
            table['lo'][m] = left_end
            table['hi'][m] = right_end
            table['lo_w'][m] = int(offset[i])
            table['hi_w'][m] = int(total - offset[i])
        next_id += 1
    return chain_id, table


def _walk(graph, degree, start, first, weight):
    """Follow degree-2 vertices from start through first; (interior, end, weights)"""
    interior, weights = [], [weight]
    prev, cur = start, first
    while degree[cur] == 2:
        if cur == start:
            return interior, None, weights
        interior.append(cur)
        (a, wa), (b, wb) = graph.neighbors(cur)
        prev, cur, w = (cur, b, wb) if a == prev else (cur, a, wa)
        weights.append(w)
    return interior, cur, weights


# ----------------------------------------------------------------------
# Index
# ----------------------------------------------------------------------

class SilcIndex:
    """
    All per-vertex block lists in global arrays.

    Source s owns blocks block_ptr[s]:block_ptr[s+1], sorted by Morton start, and
    exceptions exc_ptr[s]:exc_ptr[s+1], sorted by vertex, holding exact distances
    for vertices no block could separate.
    """

    def __init__(self, arrays, grid):
        self.arrays = {name: np.ascontiguousarray(arrays[name]) for name in ARRAY_NAMES}
        self.grid = grid
        a = self.arrays
        self.vertex_count = len(a['codes'])
        self._codes = a['codes'].tolist()
        self._block_ptr = a['block_ptr'].tolist()
        self._exc_ptr = a['exc_ptr'].tolist()
        self.chain_id = a['chain_id'].tolist()
        self.chain_pos = a['chain_pos'].tolist()
        self.chain_lo = a['chain_lo'].tolist()
        self.chain_lo_weight = a['chain_lo_weight'].tolist()
        self.chain_hi = a['chain_hi'].tolist()
        self.chain_hi_weight = a['chain_hi_weight'].tolist()

    def block_count(self):
        return len(self.arrays['block_start'])

    def size_bytes(self):
        return sum(a.nbytes for a in self.arrays.values())

    def to_arrays(self):
        return dict(self.arrays)

    def meta(self):
        return {'grid': self.grid.to_dict()}

    @classmethod
    def from_arrays(cls, arrays, meta):
        return cls(arrays, Grid(**meta['grid']))

    def lookup(self, s, t):
        """
        Block data for t in the tree of s: (colour, lambda_lo, lambda_hi, exact)
        where exact is the stored distance for exception vertices, else None
        """
        a = self.arrays
        lo, hi = self._exc_ptr[s], self._exc_ptr[s + 1]
        if hi > lo:
            j = lo + int(np.searchsorted(a['exc_vertex'][lo:hi], t))
            if j < hi and a['exc_vertex'][j] == t:
                return int(a['exc_color'][j]), 0.0, 0.0, int(a['exc_dist'][j])
        lo, hi = self._block_ptr[s], self._block_ptr[s + 1]
        j = lo + int(np.searchsorted(a['block_start'][lo:hi], self._codes[t], side='right')) - 1
        return int(a['block_color'][j]), float(a['block_lo'][j]), float(a['block_hi'][j]), None

    def source_blocks(self, s):
        """Blocks of s as (x0, y0, x1, y1, lambda_lo, lambda_hi) arrays, exceptions as points"""
        a = self.arrays
        lo, hi = self._block_ptr[s], self._block_ptr[s + 1]
        x0, y0, x1, y1 = self.grid.block_rects(a['block_start'][lo:hi], a['block_level'][lo:hi])
        return x0, y0, x1, y1, a['block_lo'][lo:hi], a['block_hi'][lo:hi]

    def exceptions(self, s):
        a = self.arrays
        lo, hi = self._exc_ptr[s], self._exc_ptr[s + 1]
        return a['exc_vertex'][lo:hi], a['exc_dist'][lo:hi]


def build_silc(graph, coords, workers=1, memory_budget=None, progress=None, chunk=CHUNK):
    """
    Build SILC for every vertex

    Args:
        graph: road network
        coords: vertex coordinates (duplicates already separated)
        workers: process count; sources are independent
        memory_budget: bytes, default from ROADKNN_SILC_MEMORY_BUDGET
        progress: show a progress bar; default when stderr is a terminal

    Raises:
        MemoryBudgetError: projected size exceeds the budget
    """
    n = graph.vertex_count
    budget = config.SILC_MEMORY_BUDGET if memory_budget is None else memory_budget
    estimate = estimate_silc_bytes(n)
    if estimate > budget:
        raise MemoryBudgetError(estimate, budget)
    if progress is None:
        progress = sys.stderr.isatty()

    started = time.perf_counter()
    grid = Grid.fit(coords)
    codes = grid.codes(coords.x, coords.y)
    payload = (
        np.asarray(graph.first_edge), np.asarray(graph.edge_target), np.asarray(graph.edge_weight),
        np.asarray(coords.x), np.asarray(coords.y), codes, grid.bits,
    )
    chunks = [list(range(i, min(i + chunk, n))) for i in range(0, n, chunk)]
    results = [None] * len(chunks)
    bar = tqdm(total=n, desc='SILC', unit='vertex', disable=not progress)
    if workers <= 1:
        _init_worker(*payload)
        for i, sources in enumerate(chunks):
            results[i] = _build_chunk(sources)
            bar.update(len(sources))
    else:
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker, initargs=payload) as ex:
            futures = {ex.submit(_build_chunk, sources): i for i, sources in enumerate(chunks)}
            for fut in as_completed(futures):
                i = futures[fut]
                results[i] = fut.result()
                bar.update(len(chunks[i]))
    bar.close()

    per_source = [entry for part in results for entry in part]
    fields = list(zip(*per_source))
    arrays = {
        'codes': codes,
        'block_ptr': _ptr([len(x) for x in fields[0]]),
        'block_start': np.concatenate(fields[0]).astype(np.int64),
        'block_level': np.concatenate(fields[1]).astype(np.int8),
        'block_color': np.concatenate(fields[2]).astype(np.int32),
        'block_lo': np.concatenate(fields[3]).astype(np.float64),
        'block_hi': np.concatenate(fields[4]).astype(np.float64),
        'exc_ptr': _ptr([len(x) for x in fields[5]]),
        'exc_vertex': np.concatenate(fields[5]).astype(np.int64),
        'exc_color': np.concatenate(fields[6]).astype(np.int64),
        'exc_dist': np.concatenate(fields[7]).astype(np.int64),
    }
    chain_id, table = build_chain_table(graph)
    arrays.update(
        chain_id=chain_id, chain_pos=table['pos'], chain_lo=table['lo'],
        chain_lo_weight=table['lo_w'], chain_hi=table['hi'], chain_hi_weight=table['hi_w'],
    )
    index = SilcIndex(arrays, grid)
    logger.info(
        'Built SILC: %d blocks, %d exceptions, %d bytes in %.0f ms (%d workers)',
        index.block_count(), len(arrays['exc_vertex']), index.size_bytes(),
        (time.perf_counter() - started) * 1000, workers,
    )
    return index


def _ptr(lengths):
    ptr = np.zeros(len(lengths) + 1, dtype=np.int64)
    np.cumsum(lengths, out=ptr[1:])
    return ptr


# ----------------------------------------------------------------------
# Paths and intervals
# ----------------------------------------------------------------------

def next_hop(index, s, t):
    """First vertex after s on the shortest path to t"""
    if s == t:
        raise ValueError(f'next_hop needs distinct vertices, got {s} twice')
    return index.lookup(s, t)[0]


def path(index, s, t):
    """Vertex sequence s..t by repeated next-hop lookups"""
    vertices = [s]
    while vertices[-1] != t:
        vertices.append(next_hop(index, vertices[-1], t))
    return vertices


@dataclass(slots=True)
class DistanceInterval:
    """[lower, upper] around d(source, target); `known` is the exact distance to `vertex`"""
    target: int
    vertex: int
    known: int
    lower: int
    upper: int
    hop: int = -1

    @property
    def exact(self):
        return self.lower == self.upper


def _bounds(known, lam_lo, lam_hi, euclidean):
    lower = known + math.floor(lam_lo * euclidean * (1.0 - RATIO_SLACK))
    upper = known + math.ceil(lam_hi * euclidean * (1.0 + RATIO_SLACK))
    return lower, upper


def _locate(index, coords, iv, stats):
    """Tighten iv from the block of its target in the tree of iv.vertex"""
    if stats is not None:
        stats.lookups += 1
    color, lam_lo, lam_hi, exact = index.lookup(iv.vertex, iv.target)
    iv.hop = color
    if exact is not None:
        iv.lower = iv.upper = iv.known + exact
        return iv
    (ux, uy), (tx, ty) = coords.point(iv.vertex), coords.point(iv.target)
    lower, upper = _bounds(iv.known, lam_lo, lam_hi, math.hypot(ux - tx, uy - ty))
    iv.lower = max(iv.lower, lower)
    iv.upper = min(iv.upper, upper)
    return iv


def initial_interval(index, coords, s, t, stats=None):
    if s == t:
        return DistanceInterval(t, t, 0, 0, 0)
    iv = DistanceInterval(t, s, 0, 0, sys.maxsize)
    return _locate(index, coords, iv, stats)


def refine(index, coords, iv, graph, stats=None):
    """Advance one hop along the shortest path and re-derive the bounds"""
    if iv.exact:
        return iv
    u = iv.hop
    iv.known += graph.weight(iv.vertex, u)
    iv.vertex = u
    if stats is not None:
        stats.refinements += 1
    if u == iv.target:
        iv.lower = iv.upper = iv.known
        return iv
    return _locate(index, coords, iv, stats)


def _chain_end(index, v, u):
    """(end, weight from u) when stepping v -> u enters a chain, else None"""
    cid = index.chain_id[u]
    if cid < 0:
        return None
    lo, hi = index.chain_lo[u], index.chain_hi[u]
    if index.chain_id[v] == cid:
        toward_hi = index.chain_pos[u] > index.chain_pos[v]
    elif lo == v and hi != v:
        toward_hi = True
    elif hi == v and lo != v:
        toward_hi = False
    else:
        return None
    return (hi, index.chain_hi_weight[u]) if toward_hi else (lo, index.chain_lo_weight[u])


def refine_with_chain(index, coords, iv, graph, stats=None):
    """
    As refine, but a hop into a chain that does not hold the target jumps
    straight to the chain's far end
    """
    if iv.exact:
        return iv
    u = iv.hop
    if index.chain_id[u] < 0 or index.chain_id[u] == index.chain_id[iv.target]:
        return refine(index, coords, iv, graph, stats)
    end = _chain_end(index, iv.vertex, u)
    if end is None:
        return refine(index, coords, iv, graph, stats)
    vertex, along = end
    iv.known += graph.weight(iv.vertex, u) + along
    iv.vertex = vertex
    if stats is not None:
        stats.refinements += 1
    if vertex == iv.target:
        iv.lower = iv.upper = iv.known
        return iv
    return _locate(index, coords, iv, stats)


def refine_to_exact(index, coords, iv, graph, stats=None, chains=True):
    step = refine_with_chain if chains else refine
    while not iv.exact:
        step(index, coords, iv, graph, stats)
    return iv


def silc_distance(index, coords, graph, s, t, chains=True):
    return refine_to_exact(index, coords, initial_interval(index, coords, s, t), graph, chains=chains).upper


# ----------------------------------------------------------------------
# Verification
# ----------------------------------------------------------------------

def check_silc(index, graph, coords, sources=None, targets_per_source=None, rng=None):
    """
    Compare first hops and ratio bounds with Dijkstra

    Returns:
        list of (source, target, problem) tuples
    """
    n = graph.vertex_count
    rng = rng or np.random.default_rng(0)
    if sources is None:
        sources = range(n)
    csr = graph.to_csr()
    problems = []
    for s in sources:
        s = int(s)
        needed = sorted({s, *(u for u, _ in graph.neighbors(s))})
        row_of = {v: i for i, v in enumerate(needed)}
        rows = np.atleast_2d(csgraph_dijkstra(csr, directed=False, indices=needed))
        hop = first_hops(s, rows, row_of, graph.first_edge, graph.edge_target, graph.edge_weight)
        targets = np.flatnonzero(np.arange(n) != s)
        if targets_per_source is not None and len(targets) > targets_per_source:
            targets = rng.choice(targets, size=targets_per_source, replace=False)
        ds = rows[row_of[s]]
        for t in targets.tolist():
            color, lam_lo, lam_hi, exact = index.lookup(s, t)
            if color != hop[t]:
                problems.append((s, t, f'first hop {color}, expected {hop[t]}'))
            d = int(ds[t])
            if exact is not None:
                if exact != d:
                    problems.append((s, t, f'exception distance {exact}, expected {d}'))
                continue
            (sx, sy), (tx, ty) = coords.point(s), coords.point(t)
            lower, upper = _bounds(0, lam_lo, lam_hi, math.hypot(sx - tx, sy - ty))
            if not lower <= d <= upper:
                problems.append((s, t, f'bounds [{lower}, {upper}] miss {d}'))
    return problems
