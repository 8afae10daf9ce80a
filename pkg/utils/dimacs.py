"""
DIMACS Parser Utility
Reads and writes the 9th DIMACS Challenge .gr (arcs) and .co (coordinates) formats
"""

import gzip
import io
import logging
import os
import re
from collections import Counter

import numpy as np

from core.errors import GraphFormatError
from core.graph import CoordinateTable, Graph, WeightKind

logger = logging.getLogger(__name__)

# a string opening with a record letter is DIMACS text, not a file name
_RECORD = re.compile(r'\s*[cpav](\s|$)')


def _open(path):
    path = os.fspath(path)
    opener = gzip.open if path.endswith('.gz') else open
    return opener(path, 'rt')


def _lines(source):
    """Accept a path (str or os.PathLike), a text stream, DIMACS text or an iterable of lines"""
    if isinstance(source, os.PathLike):
        with _open(source) as handle:
            yield from handle
    elif isinstance(source, str) and ('\n' in source or _RECORD.match(source)):
        yield from io.StringIO(source)
    elif isinstance(source, str):
        with _open(source) as handle:
            yield from handle
    else:
        yield from source


def parse_dimacs_gr(source, weight_kind=WeightKind.DISTANCE):
    """
    Parse a .gr file into an undirected Graph

    Args:
        source: path, stream or text in `c` / `p sp n m` / `a u v w` syntax
        weight_kind: whether the weights are distances or travel times

    Returns:
        Graph with ids rebased to 0..n-1; each arc pair collapses to one edge

    Raises:
        GraphFormatError: malformed line, asymmetric arc pair, non-positive weight
        ConnectivityError: the graph is disconnected
    """
    vertex_count = None
    declared_arcs = 0
    arcs = Counter()
    first_line = {}

    for number, line in enumerate(_lines(source), start=1):
        line = line.strip()
        if not line or line[0] == 'c':
            continue
        fields = line.split()
        if fields[0] == 'p':
            if len(fields) != 4 or fields[1] != 'sp':
                raise GraphFormatError(f'bad problem line {line!r}', number)
            try:
                vertex_count, declared_arcs = int(fields[2]), int(fields[3])
            except ValueError:
                raise GraphFormatError(f'bad problem line {line!r}', number) from None
        elif fields[0] == 'a':
            if vertex_count is None:
                raise GraphFormatError('arc before problem line', number)
            if len(fields) != 4:
                raise GraphFormatError(f'bad arc line {line!r}', number)
            try:
                u, v, w = int(fields[1]) - 1, int(fields[2]) - 1, int(fields[3])
            except ValueError:
                raise GraphFormatError(f'bad arc line {line!r}', number) from None
            if not (0 <= u < vertex_count and 0 <= v < vertex_count):
                raise GraphFormatError(f'arc ({u + 1}, {v + 1}) outside 1..{vertex_count}', number)
            if w <= 0:
                raise GraphFormatError(f'arc ({u + 1}, {v + 1}) has non-positive weight {w}', number)
            arcs[(u, v, w)] += 1
            first_line.setdefault((u, v, w), number)
        else:
            raise GraphFormatError(f'unknown line type {fields[0]!r}', number)

    if vertex_count is None:
        raise GraphFormatError('missing problem line')

    total = sum(arcs.values())
    if total != declared_arcs:
        logger.warning('Problem line declares %d arcs, file has %d', declared_arcs, total)

    edges = []
    for (u, v, w), count in arcs.items():
        if arcs.get((v, u, w), 0) != count:
            raise GraphFormatError(
                f'arc ({u + 1}, {v + 1}, {w}) has no matching reverse arc', first_line[(u, v, w)]
            )
        if u < v:
            edges.append((u, v, w))

    graph = Graph.from_edges(vertex_count, edges, weight_kind)
    logger.info('Loaded graph: %d vertices, %d edges (%d arcs)', graph.vertex_count, graph.edge_count, graph.arc_count)
    return graph


def parse_dimacs_co(source, vertex_count):
    """
    Parse a .co file into a CoordinateTable aligned with graph ids

    Raises:
        GraphFormatError: missing vertex, duplicate id or malformed line
    """
    x = np.zeros(vertex_count, dtype=np.float64)
    y = np.zeros(vertex_count, dtype=np.float64)
    seen = np.zeros(vertex_count, dtype=bool)

    for number, line in enumerate(_lines(source), start=1):
        line = line.strip()
        if not line or line[0] in 'cp':
            continue
        fields = line.split()
        if fields[0] != 'v' or len(fields) != 4:
            raise GraphFormatError(f'bad coordinate line {line!r}', number)
        try:
            v, vx, vy = int(fields[1]) - 1, float(fields[2]), float(fields[3])
        except ValueError:
            raise GraphFormatError(f'bad coordinate line {line!r}', number) from None
        if not 0 <= v < vertex_count:
            raise GraphFormatError(f'coordinate for unknown vertex {v + 1}', number)
        if seen[v]:
            raise GraphFormatError(f'duplicate coordinate id {v + 1}', number)
        seen[v] = True
        x[v], y[v] = vx, vy

    if not seen.all():
        missing = int(np.flatnonzero(~seen)[0]) + 1
        raise GraphFormatError(f'coordinate missing for vertex {missing}')
    return CoordinateTable(x, y)


def write_dimacs_gr(graph, handle, comment=None):
    """Write a graph as .gr text, both arcs of every edge"""
    if comment:
        handle.write(f'c {comment}\n')
    handle.write(f'p sp {graph.vertex_count} {graph.arc_count}\n')
    for u, v, w in graph.edges():
        handle.write(f'a {u + 1} {v + 1} {w}\n')
        handle.write(f'a {v + 1} {u + 1} {w}\n')


def write_dimacs_co(coords, handle):
    handle.write(f'p aux sp co {len(coords)}\n')
    for v in range(len(coords)):
        x, y = coords.point(v)
        handle.write(f'v {v + 1} {x:.17g} {y:.17g}\n')


def load_network(gr_path, co_path, weight_kind=WeightKind.DISTANCE):
    """Load a .gr/.co pair"""
    graph = parse_dimacs_gr(gr_path, weight_kind)
    coords = parse_dimacs_co(co_path, graph.vertex_count)
    return graph, coords
