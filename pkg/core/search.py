"""
Search Primitives
Binary-heap queue without decrease-key and a bit-array settled set
"""

import heapq

from core.errors import QueueEmptyError


class MinQueue:
    """
    Binary min-heap of (key, payload) pairs stored inline in one list.

    There is no decrease-key: a better key for the same payload is simply
    pushed again and stale entries are skipped by the caller on pop. Equal keys
    pop in ascending payload order when payloads are comparable.
    """

    __slots__ = ('_heap', 'pushes')

    def __init__(self):
        self._heap = []
        self.pushes = 0

    def __len__(self):
        return len(self._heap)

    def __bool__(self):
        return bool(self._heap)

    def push(self, key, payload):
        heapq.heappush(self._heap, (key, payload))
        self.pushes += 1

    def pop_min(self):
        """
        Remove and return the (key, payload) pair with the smallest key

        Raises:
            QueueEmptyError: if the queue is empty
        """
        if not self._heap:
            raise QueueEmptyError('pop_min on an empty queue')
        return heapq.heappop(self._heap)

    def front(self):
        """Smallest key, or None when empty"""
        return self._heap[0][0] if self._heap else None

    def clear(self):
        self._heap.clear()
        self.pushes = 0


class SettledSet:
    """
    One bit per vertex.

    Reset clears only the recorded ids while few were marked (fewer than
    capacity / 64), otherwise it wipes the whole array.
    """

    __slots__ = ('_bits', '_dirty', '_capacity', '_threshold')

    def __init__(self, capacity):
        self._capacity = capacity
        self._bits = bytearray((capacity + 7) >> 3)
        self._dirty = []
        self._threshold = max(1, capacity // 64)

    def __len__(self):
        return len(self._dirty)

    @property
    def capacity(self):
        return self._capacity

    def _check(self, v):
        if not 0 <= v < self._capacity:
            raise IndexError(f'vertex {v} outside settled set of size {self._capacity}')

    def mark(self, v):
        self._check(v)
        byte, bit = v >> 3, 1 << (v & 7)
        if not self._bits[byte] & bit:
            self._bits[byte] |= bit
            self._dirty.append(v)

    def query(self, v):
        self._check(v)
        return bool(self._bits[v >> 3] & (1 << (v & 7)))

    __contains__ = query

    def reset(self):
        if len(self._dirty) < self._threshold:
            bits = self._bits
            for v in self._dirty:
                bits[v >> 3] = 0
        else:
            self._bits = bytearray(len(self._bits))
        self._dirty.clear()


class SearchScratch:
    """Per-query scratch: queue, settled set and tentative distances; reusable across queries"""

    __slots__ = ('queue', 'settled', 'distance')

    def __init__(self, vertex_count):
        self.queue = MinQueue()
        self.settled = SettledSet(vertex_count)
        self.distance = {}

    def reset(self):
        self.queue.clear()
        self.settled.reset()
        self.distance.clear()
