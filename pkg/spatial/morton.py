"""
Morton Codes
Z-order interleaving of grid cells and the grid that maps coordinates onto it
"""

from dataclasses import dataclass

import numpy as np

GRID_BITS = 16


def _spread(n):
    n = n.astype(np.uint64) & np.uint64(0xFFFF)
    n = (n ^ (n << np.uint64(8))) & np.uint64(0x00FF00FF)
    n = (n ^ (n << np.uint64(4))) & np.uint64(0x0F0F0F0F)
    n = (n ^ (n << np.uint64(2))) & np.uint64(0x33333333)
    return (n ^ (n << np.uint64(1))) & np.uint64(0x55555555)


def _compact(n):
    n = n.astype(np.uint64) & np.uint64(0x55555555)
    n = (n ^ (n >> np.uint64(1))) & np.uint64(0x33333333)
    n = (n ^ (n >> np.uint64(2))) & np.uint64(0x0F0F0F0F)
    n = (n ^ (n >> np.uint64(4))) & np.uint64(0x00FF00FF)
    return (n ^ (n >> np.uint64(8))) & np.uint64(0x0000FFFF)


def morton_code(ix, iy):
    """Interleave x bits (even positions) with y bits (odd positions)"""
    return (_spread(np.asarray(ix)) | (_spread(np.asarray(iy)) << np.uint64(1))).astype(np.int64)


def morton_decode(code):
    code = np.asarray(code).astype(np.uint64)
    return _compact(code).astype(np.int64), _compact(code >> np.uint64(1)).astype(np.int64)


@dataclass(frozen=True)
class Grid:
    """Square 2^bits x 2^bits grid snapped to a coordinate bounding box"""
    min_x: float
    min_y: float
    cell: float
    bits: int = GRID_BITS

    @classmethod
    def fit(cls, coords, bits=GRID_BITS):
        min_x, min_y, max_x, max_y = coords.bounds()
        span = max(max_x - min_x, max_y - min_y) or 1.0
        # widen slightly so the maximum coordinate stays inside the last cell
        return cls(min_x, min_y, span * (1.0 + 1e-9) / (1 << bits), bits)

    @property
    def side(self):
        return 1 << self.bits

    def cells(self, x, y):
        last = self.side - 1
        ix = np.clip(np.floor((np.asarray(x) - self.min_x) / self.cell), 0, last).astype(np.int64)
        iy = np.clip(np.floor((np.asarray(y) - self.min_y) / self.cell), 0, last).astype(np.int64)
        return ix, iy

    def codes(self, x, y):
        return morton_code(*self.cells(x, y))

    def block_span(self, level):
        """Codes covered by one block `level` splits below the root"""
        return 1 << (2 * (self.bits - level))

    def block_rects(self, starts, levels):
        """Closed rectangles (x0, y0, x1, y1) of blocks, padded by a sliver of a cell"""
        ix, iy = morton_decode(starts)
        size = np.left_shift(1, self.bits - np.asarray(levels, dtype=np.int64)).astype(np.float64) * self.cell
        pad = self.cell * 1e-6
        x0 = self.min_x + ix * self.cell - pad
        y0 = self.min_y + iy * self.cell - pad
        return x0, y0, x0 + size + 2 * pad, y0 + size + 2 * pad

    def to_dict(self):
        return {'min_x': self.min_x, 'min_y': self.min_y, 'cell': self.cell, 'bits': self.bits}
