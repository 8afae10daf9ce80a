"""
Object Hierarchy
Point quadtree over an object set with per-node object counts
"""

import logging

import numpy as np

logger = logging.getLogger(__name__)

LEAF_CAPACITY = 500
MAX_DEPTH = 64


class QuadNode:
    """
    One quadtree block.

    `block` is the quadrant rectangle, `bounds` the tight rectangle around the
    node's objects. Leaves keep their objects; internal nodes keep children only.
    """

    __slots__ = ('block', 'bounds', 'count', 'children', 'objects', 'depth')

    def __init__(self, block, bounds, count, depth):
        self.block = block
        self.bounds = bounds
        self.count = count
        self.depth = depth
        self.children = []
        self.objects = None

    @property
    def is_leaf(self):
        return not self.children


class ObjectHierarchy:
    def __init__(self, root, node_count, capacity):
        self.root = root
        self.node_count = node_count
        self.capacity = capacity

    def nodes(self):
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(node.children)

    def size_bytes(self):
        """Two rectangles and a count per node plus one id per leaf object"""
        return 72 * self.node_count + 8 * self.root.count


def _tight(x, y):
    return float(x.min()), float(y.min()), float(x.max()), float(y.max())


def build_object_hierarchy(objects, coords, capacity=LEAF_CAPACITY):
    """
    Build the quadtree; a block splits into four quadrants while it holds more
    than `capacity` objects (up to a depth of 64)
    """
    ids = objects.ids
    x, y = coords.x[ids], coords.y[ids]
    root = QuadNode(_tight(x, y), _tight(x, y), len(ids), 0)
    node_count = 1
    stack = [(root, np.arange(len(ids)))]
    while stack:
        node, members = stack.pop()
        if node.count <= capacity or node.depth >= MAX_DEPTH:
            node.objects = ids[members].tolist()
            continue
        min_x, min_y, max_x, max_y = node.block
        mid_x, mid_y = (min_x + max_x) / 2, (min_y + max_y) / 2
        east = x[members] >= mid_x
        north = y[members] >= mid_y
        quadrants = (
            (~east & ~north, (min_x, min_y, mid_x, mid_y)),
            (east & ~north, (mid_x, min_y, max_x, mid_y)),
            (~east & north, (min_x, mid_y, mid_x, max_y)),
            (east & north, (mid_x, mid_y, max_x, max_y)),
        )
        for selector, block in quadrants:
            part = members[selector]
            if len(part) == 0:
                continue
            child = QuadNode(block, _tight(x[part], y[part]), len(part), node.depth + 1)
            node.children.append(child)
            stack.append((child, part))
            node_count += 1
        if len(node.children) == 1:
            # no separation at this depth; keep splitting the single child
            only = node.children[0]
            node.children = []
            node.block = only.block
            node.depth = only.depth
            stack.pop()
            stack.append((node, members))
            node_count -= 1

    hierarchy = ObjectHierarchy(root, node_count, capacity)
    logger.debug('Object hierarchy: %d objects, %d nodes', len(ids), node_count)
    return hierarchy
