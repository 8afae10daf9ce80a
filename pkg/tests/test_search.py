import heapq

import numpy as np
import pytest

from core.dijkstra import dijkstra_sssp, expand
from core.errors import QueueEmptyError
from core.search import MinQueue, SearchScratch, SettledSet


def test_pop_returns_smaller_key():
    queue = MinQueue()
    queue.push(5, 'a')
    queue.push(3, 'b')
    assert queue.pop_min() == (3, 'b')


def test_duplicates_allowed():
    queue = MinQueue()
    queue.push(3, 1)
    queue.push(3, 1)
    assert queue.pop_min()[0] == 3
    assert queue.pop_min()[0] == 3
    assert not queue


def test_equal_keys_pop_first():
    queue = MinQueue()
    for key, payload in [(9, 0), (2, 1), (2, 2)]:
        queue.push(key, payload)
    assert [queue.pop_min()[0] for _ in range(2)] == [2, 2]


def test_empty_pop_raises():
    with pytest.raises(QueueEmptyError):
        MinQueue().pop_min()
    with pytest.raises(IndexError):
        MinQueue().pop_min()


def test_random_operations_match_sorted_reference(rng):
    queue, reference = MinQueue(), []
    for _ in range(1000):
        if reference and rng.random() < 0.4:
            assert queue.pop_min()[0] == heapq.heappop(reference)
        else:
            key = int(rng.integers(0, 100))
            queue.push(key, 0)
            heapq.heappush(reference, key)
        assert len(queue) == len(reference)
    drained = [queue.pop_min()[0] for _ in range(len(queue))]
    assert drained == sorted(drained)


def test_pushes_counter_resets_on_clear():
    queue = MinQueue()
    queue.push(1, 1)
    queue.push(2, 2)
    assert queue.pushes == 2
    queue.clear()
    assert queue.pushes == 0
    assert queue.front() is None


def test_settled_set_mark_query_reset():
    settled = SettledSet(100)
    assert not any(settled.query(v) for v in range(100))
    settled.mark(42)
    assert 42 in settled
    assert 41 not in settled
    settled.reset()
    assert 42 not in settled


def test_settled_set_full_wipe_after_large_search():
    settled = SettledSet(256)
    for v in range(0, 256, 2):
        settled.mark(v)
    assert len(settled) == 128
    settled.reset()
    assert len(settled) == 0
    assert not any(v in settled for v in range(256))


def test_settled_set_rejects_out_of_range():
    settled = SettledSet(10)
    with pytest.raises(IndexError):
        settled.mark(10)
    with pytest.raises(IndexError):
        settled.query(-1)


def test_expansion_settles_in_distance_then_id_order(grid_graph):
    graph, _ = grid_graph
    order = list(expand(0, graph, SearchScratch(graph.vertex_count)))
    keys = [(d, v) for v, d in order]
    assert keys == sorted(keys)
    assert len(order) == graph.vertex_count


def test_scratch_reuse_gives_same_distances(random_weight_network):
    graph, _ = random_weight_network
    scratch = SearchScratch(graph.vertex_count)
    first = dijkstra_sssp(5, graph, scratch)
    dijkstra_sssp(99, graph, scratch)
    assert np.array_equal(dijkstra_sssp(5, graph, scratch), first)
