"""
R-tree
Sort-tile-recursive packed R-tree over object coordinates with a resumable
best-first nearest-neighbor cursor
"""

import heapq
import logging
import math
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)

DEFAULT_CAPACITY = 64

# heap entry kinds; nodes sort before objects at equal distance
_NODE = 0
_OBJECT = 1


def _str_groups(x, y, capacity):
    """Sort-tile-recursive grouping of points into runs of at most `capacity` indices"""
    n = len(x)
    leaves = math.ceil(n / capacity)
    slabs = math.ceil(math.sqrt(leaves))
    slab_size = slabs * capacity
    by_x = np.lexsort((y, x))
    groups = []
    for start in range(0, n, slab_size):
        slab = by_x[start:start + slab_size]
        slab = slab[np.lexsort((x[slab], y[slab]))]
        for offset in range(0, len(slab), capacity):
            groups.append(slab[offset:offset + capacity])
    return groups


def _mindist(px, py, rect):
    min_x, min_y, max_x, max_y = rect
    dx = max(min_x - px, 0.0, px - max_x)
    dy = max(min_y - py, 0.0, py - max_y)
    return math.hypot(dx, dy)


@dataclass(frozen=True, eq=False)
class RTree:
    """
    Packed R-tree. Node i has bounding rectangle rects[i]; leaves hold object
    ids in children[i], internal nodes hold node ids. The root is the last node.
    """
    capacity: int
    rects: list
    leaf: list
    children: list
    points: dict
    height: int

    @property
    def root(self):
        return len(self.rects) - 1

    @property
    def node_count(self):
        return len(self.rects)

    @property
    def object_count(self):
        return len(self.points)

    def size_bytes(self):
        """Rectangles plus one id per child entry"""
        entries = sum(len(c) for c in self.children)
        return 32 * len(self.rects) + 8 * entries

    def contains(self, obj):
        """Exact-point membership search from the root"""
        if obj not in self.points:
            return False
        px, py = self.points[obj]
        stack = [self.root]
        while stack:
            node = stack.pop()
            min_x, min_y, max_x, max_y = self.rects[node]
            if not (min_x <= px <= max_x and min_y <= py <= max_y):
                continue
            if self.leaf[node]:
                if obj in self.children[node]:
                    return True
            else:
                stack.extend(self.children[node])
        return False


def build_rtree(objects, coords, capacity=DEFAULT_CAPACITY):
    """
    Bulk-load an R-tree over the objects' coordinates

    Args:
        objects: ObjectSet
        coords: CoordinateTable
        capacity: maximum entries per node
    """
    if capacity < 2:
        raise ValueError('R-tree capacity must be at least 2')
    ids = objects.ids
    x, y = coords.x[ids], coords.y[ids]
    rects, leaf, children = [], [], []

    level_nodes = []
    for group in _str_groups(x, y, capacity):
        gx, gy = x[group], y[group]
        rects.append((float(gx.min()), float(gy.min()), float(gx.max()), float(gy.max())))
        leaf.append(True)
        children.append(ids[group].tolist())
        level_nodes.append(len(rects) - 1)

    height = 1
    while len(level_nodes) > 1:
        boxes = np.array([rects[i] for i in level_nodes])
        cx, cy = (boxes[:, 0] + boxes[:, 2]) / 2, (boxes[:, 1] + boxes[:, 3]) / 2
        next_level = []
        for group in _str_groups(cx, cy, capacity):
            members = boxes[group]
            rects.append((float(members[:, 0].min()), float(members[:, 1].min()),
                          float(members[:, 2].max()), float(members[:, 3].max())))
            leaf.append(False)
            children.append([level_nodes[i] for i in group.tolist()])
            next_level.append(len(rects) - 1)
        level_nodes = next_level
        height += 1

    points = {int(v): coords.point(int(v)) for v in ids.tolist()}
    tree = RTree(capacity, rects, leaf, children, points, height)
    logger.debug('R-tree: %d objects, %d nodes, height %d', len(points), tree.node_count, height)
    return tree


class NNCursor:
    """
    Suspended best-first nearest-neighbor search.

    Objects are emitted in ascending (Euclidean distance, id) order.
    """

    __slots__ = ('tree', 'px', 'py', '_heap', 'pulls')

    def __init__(self, tree, point):
        self.tree = tree
        self.px, self.py = point
        self._heap = [(_mindist(self.px, self.py, tree.rects[tree.root]), _NODE, tree.root)]
        self.pulls = 0

    def front(self):
        """Distance bound of the next emission, or None when exhausted"""
        return self._heap[0][0] if self._heap else None

    def next(self):
        """Next (object, distance), or None once every object has been emitted"""
        tree, heap = self.tree, self._heap
        while heap:
            d, kind, item = heapq.heappop(heap)
            if kind == _OBJECT:
                self.pulls += 1
                return item, d
            if tree.leaf[item]:
                for obj in tree.children[item]:
                    ox, oy = tree.points[obj]
                    heapq.heappush(heap, (math.hypot(ox - self.px, oy - self.py), _OBJECT, obj))
            else:
                for child in tree.children[item]:
                    heapq.heappush(heap, (_mindist(self.px, self.py, tree.rects[child]), _NODE, child))
        return None


def open_nn_cursor(tree, point):
    return NNCursor(tree, point)


def next_nn(cursor):
    return cursor.next()
