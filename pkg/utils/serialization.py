"""
Binary Cache
Versioned little-endian container of named arrays plus JSON metadata, used for
graphs and for every index kind
"""

import json
import logging
import struct

import numpy as np

from core.errors import IndexFormatError
from core.graph import CoordinateTable, Graph, WeightKind

logger = logging.getLogger(__name__)

MAGIC = b'RKNN'
VERSION = 1

KIND_GRAPH = 'graph'
KIND_GTREE = 'gtree'
KIND_ROAD = 'road'
KIND_SILC = 'silc'


def _write_blob(handle, data):
    handle.write(struct.pack('<I', len(data)))
    handle.write(data)


def _read_blob(handle):
    (size,) = struct.unpack('<I', _read_exact(handle, 4))
    return _read_exact(handle, size)


def _read_exact(handle, size):
    data = handle.read(size)
    if len(data) != size:
        raise IndexFormatError('truncated cache file')
    return data


def save_arrays(path, kind, arrays, meta=None):
    """
    Layout: magic, u16 version, kind, JSON meta, u32 array count, then per array
    its name, dtype string, u8 rank, u64 shape entries and raw bytes
    """
    with open(path, 'wb') as handle:
        handle.write(MAGIC)
        handle.write(struct.pack('<H', VERSION))
        _write_blob(handle, kind.encode())
        _write_blob(handle, json.dumps(meta or {}, sort_keys=True).encode())
        handle.write(struct.pack('<I', len(arrays)))
        for name in sorted(arrays):
            array = np.ascontiguousarray(arrays[name])
            array = array.astype(array.dtype.newbyteorder('<'), copy=False)
            _write_blob(handle, name.encode())
            _write_blob(handle, array.dtype.str.encode())
            handle.write(struct.pack('<B', array.ndim))
            handle.write(struct.pack(f'<{array.ndim}Q', *array.shape))
            handle.write(array.tobytes())
    logger.debug('Saved %s cache %s (%d arrays)', kind, path, len(arrays))


def load_arrays(path, kind=None):
    """
    Returns:
        (kind, arrays, meta)

    Raises:
        IndexFormatError: bad magic, unsupported version or unexpected kind
    """
    with open(path, 'rb') as handle:
        if handle.read(4) != MAGIC:
            raise IndexFormatError(f'{path} is not a cache file')
        (version,) = struct.unpack('<H', _read_exact(handle, 2))
        if version != VERSION:
            raise IndexFormatError(f'{path} has cache version {version}, expected {VERSION}')
        found = _read_blob(handle).decode()
        if kind is not None and found != kind:
            raise IndexFormatError(f'{path} holds a {found} cache, expected {kind}')
        meta = json.loads(_read_blob(handle).decode())
        (count,) = struct.unpack('<I', _read_exact(handle, 4))
        arrays = {}
        for _ in range(count):
            name = _read_blob(handle).decode()
            dtype = np.dtype(_read_blob(handle).decode())
            (ndim,) = struct.unpack('<B', _read_exact(handle, 1))
            shape = struct.unpack(f'<{ndim}Q', _read_exact(handle, 8 * ndim))
            size = int(np.prod(shape, dtype=np.int64)) * dtype.itemsize
            arrays[name] = np.frombuffer(_read_exact(handle, size), dtype=dtype).reshape(shape).copy()
    return found, arrays, meta


def save_graph(graph, coords, path):
    arrays = {
        'first_edge': graph.first_edge,
        'edge_target': graph.edge_target,
        'edge_weight': graph.edge_weight,
    }
    if coords is not None:
        arrays.update(x=coords.x, y=coords.y)
    save_arrays(path, KIND_GRAPH, arrays, {'weight_kind': graph.weight_kind.value})


def load_graph(path):
    """Returns (graph, coords); coords is None when none were stored"""
    _, arrays, meta = load_arrays(path, KIND_GRAPH)
    graph = Graph(arrays['first_edge'], arrays['edge_target'], arrays['edge_weight'], WeightKind(meta['weight_kind']))
    coords = CoordinateTable(arrays['x'], arrays['y']) if 'x' in arrays else None
    return graph, coords


def save_index(index, kind, path):
    save_arrays(path, kind, index.to_arrays(), index.meta())


def load_index(path, kind):
    from methods.gtree import GTreeIndex
    from methods.road import RoadIndex
    from methods.silc import SilcIndex

    classes = {KIND_GTREE: GTreeIndex, KIND_ROAD: RoadIndex, KIND_SILC: SilcIndex}
    if kind not in classes:
        raise IndexFormatError(f'unknown index kind {kind!r}')
    _, arrays, meta = load_arrays(path, kind)
    return classes[kind].from_arrays(arrays, meta)
