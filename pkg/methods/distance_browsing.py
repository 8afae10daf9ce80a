"""
Distance Browsing
Best-first kNN over SILC distance intervals, browsing either an Object
Hierarchy (DisBrw) or Euclidean nearest neighbors from an R-tree (DB-ENN)
"""

import heapq
import math
import sys

import numpy as np

from core.graph import floor_bound
from core.search import MinQueue
from methods.ine import KnnResult
from methods.silc import RATIO_SLACK, initial_interval, refine, refine_to_exact, refine_with_chain
from spatial.rtree import open_nn_cursor

MAXINT = sys.maxsize
INFINITE = (math.inf, MAXINT)


class UpperBoundList:
    """
    The set L: the k best (upper bound, id) pairs seen so far.

    Upper bounds of an object only shrink, so the kth pair only shrinks too.
    """

    def __init__(self, k):
        self.k = k
        self.bounds = {}
        self.kth = INFINITE

    def update(self, obj, upper):
        self.bounds[obj] = upper
        if len(self.bounds) >= self.k:
            best = heapq.nsmallest(self.k, ((u, o) for o, u in self.bounds.items()))
            self.kth = min(self.kth, best[-1])
            self.bounds = {o: u for u, o in best}


class _Browser:
    """Shared queue discipline of both browsing variants"""

    def __init__(self, q, k, index, coords, graph, lb_scale, chains, stats):
        self.q = q
        self.k = k
        self.index = index
        self.coords = coords
        self.graph = graph
        self.lb_scale = lb_scale
        self.stats = stats
        self.step = refine_with_chain if chains else refine
        self.chains = chains
        self.queue = MinQueue()
        self.upper = UpperBoundList(k)
        self.node_bound = INFINITE
        self.intervals = {}
        self.confirmed = []
        self._seq = 0
        self.qx, self.qy = coords.point(q)

    def bound(self):
        """D_k as a (distance, id) pair"""
        return min(self.upper.kth, self.node_bound)

    def queue_front(self):
        front = self.queue.front()
        return front[:2] if front is not None else INFINITE

    def push_node(self, lower, node):
        self._seq += 1
        self.queue.push((lower, -1, self._seq), node)

    def push_object(self, obj):
        iv = self.intervals[obj]
        if (iv.lower, obj) <= self.bound():
            self.queue.push((iv.lower, obj, 0), obj)

    def offer_object(self, obj, euclidean):
        """Interval for a newly met object, unless its Euclidean bound already loses"""
        cheap = floor_bound(euclidean, self.lb_scale)
        if (cheap, obj) > self.bound():
            return
        iv = initial_interval(self.index, self.coords, self.q, obj, self.stats)
        iv.lower = max(iv.lower, cheap)
        self.intervals[obj] = iv
        self.upper.update(obj, iv.upper)
        self.push_object(obj)

    def visit_object(self, obj, front):
        """Confirm obj when its upper bound beats everything still pending, else refine"""
        iv = self.intervals[obj]
        if iv.exact or (iv.upper, obj) < front:
            self.confirmed.append(obj)
            return
        self.step(self.index, self.coords, iv, self.graph, self.stats)
        self.upper.update(obj, iv.upper)
        self.push_object(obj)

    def finish(self, result):
        items = []
        for obj in self.confirmed:
            iv = refine_to_exact(self.index, self.coords, self.intervals[obj], self.graph, self.stats, self.chains)
            items.append((iv.upper, obj))
        items.sort()
        result.items = [(obj, d) for d, obj in items]
        result.stats.pushes = self.queue.pushes
        return result


def node_interval(blocks, qx, qy, bounds):
    """
    [lower, upper] on distances from the source to anything inside `bounds`,
    from the source's blocks that intersect the rectangle
    """
    x0, y0, x1, y1, lam_lo, lam_hi = blocks
    min_x, min_y, max_x, max_y = bounds
    hit = (x0 <= max_x) & (x1 >= min_x) & (y0 <= max_y) & (y1 >= min_y)
    if not hit.any():
        return 0, math.inf
    near = math.hypot(max(min_x - qx, 0.0, qx - max_x), max(min_y - qy, 0.0, qy - max_y))
    far = math.hypot(max(qx - min_x, max_x - qx), max(qy - min_y, max_y - qy))
    lower = math.floor(float(lam_lo[hit].min()) * near * (1.0 - RATIO_SLACK))
    upper = math.ceil(float(lam_hi[hit].max()) * far * (1.0 + RATIO_SLACK))
    return lower, upper


def _source_view(index, coords, q):
    """Source blocks, with exception vertices folded in as point blocks"""
    x0, y0, x1, y1, lam_lo, lam_hi = index.source_blocks(q)
    vertices, dists = index.exceptions(q)
    if len(vertices):
        qx, qy = coords.point(q)
        px, py = coords.x[vertices], coords.y[vertices]
        de = np.hypot(px - qx, py - qy)
        ratio = np.divide(dists, de, out=np.zeros(len(de)), where=de > 0)
        x0, y0 = np.concatenate([x0, px]), np.concatenate([y0, py])
        x1, y1 = np.concatenate([x1, px]), np.concatenate([y1, py])
        lam_lo = np.concatenate([lam_lo, np.where(de > 0, ratio, 0.0)])
        lam_hi = np.concatenate([lam_hi, np.where(de > 0, ratio, np.inf)])
    return x0, y0, x1, y1, lam_lo, lam_hi


def knn_disbrw(q, k, index, coords, graph, hierarchy, lb_scale=1.0, chains=True):
    """
    k nearest objects of q by Distance Browsing over an Object Hierarchy

    Queue keys are (lower bound, id) pairs, nodes using id -1 so they precede
    objects at equal bounds. A node with at least k objects caps D_k by its
    upper bound.
    """
    if k < 1:
        raise ValueError('k must be at least 1')
    result = KnnResult()
    browser = _Browser(q, k, index, coords, graph, lb_scale, chains, result.stats)
    want = min(k, hierarchy.root.count)
    blocks = _source_view(index, coords, q)
    qx, qy = browser.qx, browser.qy

    def enter(node):
        lower, upper = node_interval(blocks, qx, qy, node.bounds)
        if node.count >= k:
            browser.node_bound = min(browser.node_bound, (upper, MAXINT))
        if (lower, -1) <= browser.bound():
            browser.push_node(lower, node)

    enter(hierarchy.root)
    while browser.queue and len(browser.confirmed) < want:
        key, item = browser.queue.pop_min()
        if key[:2] > browser.bound():
            break
        if key[1] == -1:
            if item.is_leaf:
                for obj in item.objects:
                    ox, oy = coords.point(obj)
                    browser.offer_object(obj, math.hypot(ox - qx, oy - qy))
            else:
                for child in item.children:
                    enter(child)
        else:
            browser.visit_object(item, browser.queue_front())
    return browser.finish(result)


def knn_db_enn(q, k, index, coords, graph, rtree, lb_scale=1.0, chains=True):
    """
    k nearest objects of q by Distance Browsing fed with Euclidean nearest
    neighbors. The first k neighbors seed the queue; another is pulled
    whenever the cursor's bound is ahead of the queue front.
    """
    if k < 1:
        raise ValueError('k must be at least 1')
    result = KnnResult()
    browser = _Browser(q, k, index, coords, graph, lb_scale, chains, result.stats)
    want = min(k, rtree.object_count)
    cursor = open_nn_cursor(rtree, coords.point(q))

    def pull():
        emitted = cursor.next()
        if emitted is not None:
            browser.offer_object(*emitted)

    def cursor_front():
        front = cursor.front()
        return (floor_bound(front, lb_scale), -1) if front is not None else INFINITE

    for _ in range(k):
        pull()
    while len(browser.confirmed) < want:
        pending = cursor_front()
        while pending < browser.queue_front() and pending <= browser.bound():
            pull()
            pending = cursor_front()
        if not browser.queue:
            break
        key, obj = browser.queue.pop_min()
        if key[:2] > browser.bound():
            break
        front = min(browser.queue_front(), cursor_front())
        browser.visit_object(obj, front)
    result.stats.cursor_pulls = cursor.pulls
    return browser.finish(result)
