"""
Workload Runner
Generates object sets and query vertices from one seeded generator, times every
method over the same batches and aggregates the results into RunRecords
"""

import logging
import time

import numpy as np

from core.errors import VerificationError
from core.objects import ObjectKind, gen_clustered, gen_min_dist, gen_uniform, min_dist_query_vertices
from harness.spec import RunRecord
from harness.suite import bind_method, build_object_indexes, method_footprint
from utils.object_io import load_objects

logger = logging.getLogger(__name__)

# Counters reported per method; other columns stay empty
METHOD_COUNTERS = {
    'ine': (),
    'ier-dijkstra': ('oracle_calls', 'false_hits', 'cursor_pulls'),
    'ier-gtree': ('oracle_calls', 'false_hits', 'cursor_pulls', 'path_cost'),
    'disbrw': ('lookups', 'refinements'),
    'db-enn': ('lookups', 'refinements', 'cursor_pulls'),
    'road': ('vertices_bypassed',),
    'gtree': ('path_cost',),
}


def draw_seed(rng):
    return int(rng.integers(0, 2**31 - 1))


def object_workload(spec, graph, coords, density, rng):
    """
    Object sets for one parameter point, each paired with its query vertices

    Returns:
        list of (ObjectSet, query vertex array)
    """
    n = graph.vertex_count
    workload = []
    sets = len(spec.object_files) if spec.object_kind is ObjectKind.FILE else spec.object_sets
    per_set = max(1, spec.query_count // max(1, sets))
    if spec.object_kind is ObjectKind.FILE:
        for path in spec.object_files:
            objects = load_objects(path, n)
            workload.append((objects, rng.integers(0, n, size=per_set)))
        return workload
    for _ in range(max(1, sets)):
        seed = draw_seed(rng)
        if spec.object_kind is ObjectKind.UNIFORM:
            objects = gen_uniform(graph, density, seed)
        elif spec.object_kind is ObjectKind.CLUSTERED:
            objects = gen_clustered(graph, spec.clusters, spec.cluster_size, seed)
        else:
            objects = gen_min_dist(graph, coords, spec.min_dist_size, spec.bucket, spec.buckets, seed)
        if spec.object_kind is ObjectKind.MIN_DIST:
            queries = min_dist_query_vertices(graph, coords, per_set, spec.buckets, draw_seed(rng))
        else:
            queries = rng.integers(0, n, size=per_set)
        workload.append((objects, queries))
    return workload


def summarize(times_ns):
    """Mean and percentiles in microseconds"""
    if not times_ns:
        return 0.0, 0.0, 0.0, 0.0
    us = np.asarray(times_ns, dtype=np.float64) / 1000.0
    p50, p95, p99 = np.percentile(us, [50, 95, 99])
    return float(us.mean()), float(p50), float(p95), float(p99)


def time_queries(query, queries, k, warmup=0):
    """
    Run the batch, timing the query call only

    Returns:
        (per-query nanoseconds, per-query results)
    """
    for i in range(min(warmup, len(queries))):
        query(int(queries[i]), k)
    times, results = [], []
    for q in queries.tolist():
        started = time.perf_counter_ns()
        result = query(q, k)
        times.append(time.perf_counter_ns() - started)
        results.append(result)
    return times, results


def compare_with_reference(method, results, reference, queries, k, context):
    """
    Raises:
        VerificationError: the first query whose ids differ from the reference
    """
    for q, got, expected in zip(queries.tolist(), results, reference):
        if got.ids() != expected.ids():
            reproducer = dict(context, method=method, q=q, k=k,
                              expected=expected.items, got=got.items)
            raise VerificationError(f'{method} disagrees with network expansion at q={q}, k={k}', reproducer)


def run_experiment(spec, network, dataset=None):
    """
    Time every method of the experiment over its workload matrix

    One record per (method, density, k); queries of all object sets of a point
    are pooled.

    Raises:
        VerificationError: spec.verify is set and a method disagrees with INE
    """
    rng = np.random.default_rng(spec.seed)
    records = []
    points = spec.densities if spec.object_kind is ObjectKind.UNIFORM else [None]
    for density in points:
        workload = object_workload(spec, network.graph, network.coords, density, rng)
        pooled = {(m, k): {'times': [], 'stats': [], 'size': 0, 'ms': 0.0}
                  for m in spec.methods for k in spec.k_values}
        for set_number, (objects, queries) in enumerate(workload):
            built = build_object_indexes(network, objects, spec.methods, spec.rtree_capacity)
            reference = {}
            if spec.verify:
                ine = bind_method('ine', network, built)
                reference = {k: [ine(q, k) for q in queries.tolist()] for k in spec.k_values}
            for method in spec.methods:
                query = bind_method(method, network, built)
                size, ms = method_footprint(method, network, built)
                for k in spec.k_values:
                    times, results = time_queries(query, queries, k, spec.warmup)
                    if spec.verify:
                        context = {'graph': spec.graph, 'seed': spec.seed, 'object_set': set_number,
                                   'object_seed': objects.seed, 'density': density}
                        compare_with_reference(method, results, reference[k], queries, k, context)
                    entry = pooled[(method, k)]
                    entry['times'].extend(times)
                    entry['stats'].extend(r.stats for r in results)
                    entry['size'] = max(entry['size'], size)
                    entry['ms'] += ms / len(workload)
        for (method, k), entry in pooled.items():
            record = _aggregate(method, dataset or spec.dataset, spec, density, k, entry)
            records.append(record)
            logger.info('%-12s k=%-3d d=%s mean %.1f us over %d queries',
                        method, k, density, record.mean_us, record.query_count)
    return records


def _aggregate(method, dataset, spec, density, k, entry):
    mean, p50, p95, p99 = summarize(entry['times'])
    stats = entry['stats']
    parameters = {'k': k, 'object_kind': spec.object_kind.value}
    if density is not None:
        parameters['density'] = density
    if spec.object_kind is ObjectKind.CLUSTERED:
        parameters.update(clusters=spec.clusters, cluster_size=spec.cluster_size)
    elif spec.object_kind is ObjectKind.MIN_DIST:
        parameters.update(bucket=spec.bucket, buckets=spec.buckets)
    record = RunRecord(
        method=method, dataset=dataset, parameters=parameters, query_count=len(entry['times']),
        mean_us=mean, p50_us=p50, p95_us=p95, p99_us=p99,
        settled=_mean(stats, 'settled'), pushes=_mean(stats, 'pushes'),
        index_bytes=entry['size'], build_ms=entry['ms'],
    )
    for counter in METHOD_COUNTERS[method]:
        setattr(record, counter, _mean(stats, counter))
    return record


def _mean(stats, name):
    if not stats:
        return 0.0
    return float(np.mean([getattr(s, name) for s in stats]))
