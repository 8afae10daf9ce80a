"""
Road-Network kNN Benchmark
Command-line entry point: build indexes, generate object sets, run query
suites and verify every method against network expansion
"""

import argparse
import json
import logging
import os
import sys
import time

import numpy as np

import config
from core.errors import RoadKnnError, VerificationError
from core.graph import WeightKind
from core.objects import ObjectKind, gen_clustered, gen_min_dist, gen_uniform
from database import db_session, init_db
from harness.csv_out import BUILD_COLUMNS, write_csv, write_records
from harness.runner import draw_seed, run_experiment
from harness.spec import DENSITIES, K_VALUES, METHODS, ExperimentSpec
from harness.suite import NetworkIndexes, build_network_indexes
from harness.verify import FAULTS, cmd_verify as verify_trials
from models import ExperimentRun, IndexBuildRow, RunRecordRow
from spatial.rtree import DEFAULT_CAPACITY
from utils.dimacs import load_network
from utils.object_io import save_objects
from utils.serialization import load_graph, load_index, save_graph, save_index

logger = logging.getLogger('app')

INDEX_KINDS = ('gtree', 'road', 'silc')

EXIT_ERROR = 2
EXIT_MISMATCH = 3


# ============================================================================
# Inputs
# ============================================================================

def dataset_name(spec):
    if spec.dataset:
        return spec.dataset
    return os.path.splitext(os.path.basename(spec.graph))[0]


def load_inputs(spec):
    """Graph and coordinates from a .gr/.co pair or a binary graph cache"""
    if spec.graph.endswith('.gr'):
        coords_path = spec.coords or spec.graph[:-3] + '.co'
        graph, coords = load_network(spec.graph, coords_path, spec.weight_kind)
    else:
        graph, coords = load_graph(spec.graph)
    logger.info('Loaded %s: %d vertices, %d edges', spec.graph, graph.vertex_count, graph.edge_count)
    return graph, coords


def index_path(spec, kind):
    directory = spec.index_dir or config.INDEX_DIR
    return os.path.join(directory, f'{dataset_name(spec)}.{spec.weight_kind.value}.{kind}.bin')


def load_or_build(spec, graph, coords, progress=None):
    """Cached indexes when present, fresh builds for the rest"""
    network = NetworkIndexes(graph, coords)
    missing = []
    for kind in spec.required_indexes():
        path = index_path(spec, kind)
        if os.path.exists(path):
            setattr(network, kind, load_index(path, kind))
            logger.info('Using cached %s index %s', kind, path)
        else:
            missing.append(kind)
    fresh = build_network_indexes(graph, coords, missing, spec.fanout, spec.leaf_capacity, spec.levels,
                                  spec.seed, spec.workers, progress)
    network.lb_scale = fresh.lb_scale
    for kind in missing:
        setattr(network, kind, getattr(fresh, kind))
    network.build_ms.update(fresh.build_ms)
    return network


# ============================================================================
# Results store
# ============================================================================

def _start_run(spec, command):
    with db_session() as db:
        run = ExperimentRun(command=command, dataset=dataset_name(spec) if spec.graph else 'random',
                            weight_kind=spec.weight_kind.value, seed=spec.seed, spec=spec.to_dict(),
                            csv_path=spec.output)
        db.add(run)
        db.flush()
        return run.id


def _finish_run(run_id, status, error_message=None, records=(), builds=()):
    with db_session() as db:
        run = db.query(ExperimentRun).filter_by(id=run_id).first()
        if not run:
            return
        run.status = status
        run.error_message = error_message
        for record in records:
            row = record.to_dict()
            row.pop('dataset', None)
            db.add(RunRecordRow(run_id=run_id, **row))
        for build in builds:
            db.add(IndexBuildRow(run_id=run_id, **build))


def _write_reproducer(spec, reproducer):
    base = spec.output or os.path.join(config.RESULTS_DIR, 'verify.csv')
    path = os.path.splitext(base)[0] + '.reproducer.json'
    os.makedirs(os.path.dirname(path) or '.', exist_ok=True)
    with open(path, 'w') as f:
        json.dump(reproducer, f, indent=2, default=str)
    return path


# ============================================================================
# Commands
# ============================================================================

def cmd_build(spec, kinds=INDEX_KINDS, progress=None):
    """Build, serialize and report the network indexes"""
    graph, coords = load_inputs(spec)
    directory = spec.index_dir or config.INDEX_DIR
    os.makedirs(directory, exist_ok=True)
    save_graph(graph, coords, os.path.join(directory, f'{dataset_name(spec)}.{spec.weight_kind.value}.graph.bin'))

    network = build_network_indexes(graph, coords, kinds, spec.fanout, spec.leaf_capacity, spec.levels,
                                    spec.seed, spec.workers, progress)
    builds = []
    for kind in kinds:
        path = index_path(spec, kind)
        save_index(getattr(network, kind), kind, path)
        builds.append({
            'method': kind,
            'dataset': dataset_name(spec),
            'parameters': {'fanout': spec.fanout, 'leaf_capacity': spec.leaf_capacity,
                           'levels': spec.levels, 'seed': spec.seed},
            'index_bytes': network.size_bytes(kind),
            'build_ms': network.build_ms[kind],
            'path': path,
        })
        print(f"{kind:<8} {network.size_bytes(kind):>14,} bytes {network.build_ms[kind]:>12.1f} ms  {path}")

    output = spec.output or os.path.join(config.RESULTS_DIR, f'{dataset_name(spec)}.build.csv')
    rows = [dict(b, index=b['method'], vertices=graph.vertex_count, arcs=graph.arc_count) for b in builds]
    write_csv(output, rows, BUILD_COLUMNS, {'command': 'build', 'seed': spec.seed, 'spec': spec.to_dict()})
    return builds


def cmd_genobjects(spec, directory):
    """Write `object_sets` files per density (or one cluster/min-dist point)"""
    graph, coords = load_inputs(spec)
    os.makedirs(directory, exist_ok=True)
    rng = np.random.default_rng(spec.seed)
    written = []
    points = spec.densities if spec.object_kind is ObjectKind.UNIFORM else [None]
    for density in points:
        for i in range(spec.object_sets):
            seed = draw_seed(rng)
            if spec.object_kind is ObjectKind.UNIFORM:
                objects = gen_uniform(graph, density, seed)
                tag = f'd{density:g}'
            elif spec.object_kind is ObjectKind.CLUSTERED:
                objects = gen_clustered(graph, spec.clusters, spec.cluster_size, seed)
                tag = f'c{spec.clusters}x{spec.cluster_size}'
            elif spec.object_kind is ObjectKind.MIN_DIST:
                objects = gen_min_dist(graph, coords, spec.min_dist_size, spec.bucket, spec.buckets, seed)
                tag = f'r{spec.bucket}of{spec.buckets}'
            else:
                raise ValueError('file object sets are loaded, not generated')
            path = os.path.join(directory, f'{dataset_name(spec)}.{spec.object_kind.value}.{tag}.{i:03d}.txt')
            save_objects(objects, path)
            written.append(path)
    logger.info('Wrote %d object files to %s', len(written), directory)
    return written


def cmd_query(spec, progress=None):
    """Run the query matrix; CSV of RunRecords"""
    graph, coords = load_inputs(spec)
    network = load_or_build(spec, graph, coords, progress)
    records = run_experiment(spec, network, dataset_name(spec))
    output = spec.output or os.path.join(config.RESULTS_DIR, f'{dataset_name(spec)}.query.csv')
    write_records(output, records, {
        'command': 'query', 'dataset': dataset_name(spec), 'vertices': graph.vertex_count,
        'edges': graph.edge_count, 'arcs': graph.arc_count, 'seed': spec.seed, 'spec': spec.to_dict(),
    })
    print(f"{'method':<14}{'k':>4}{'density':>10}{'mean us':>12}{'p99 us':>12}{'settled':>12}")
    for r in records:
        print(f"{r.method:<14}{r.parameters['k']:>4}{str(r.parameters.get('density', '-')):>10}"
              f"{r.mean_us:>12.1f}{r.p99_us:>12.1f}{r.settled:>12.1f}")
    return records


# ============================================================================
# Argument parsing
# ============================================================================

def _common(parser):
    parser.add_argument('--graph', help='DIMACS .gr file or binary graph cache')
    parser.add_argument('--coords', help='DIMACS .co file (default: next to the .gr file)')
    parser.add_argument('--dataset', help='dataset label (default: graph file stem)')
    parser.add_argument('--weight-kind', choices=[w.value for w in WeightKind], default=WeightKind.DISTANCE.value)
    parser.add_argument('--seed', type=int, default=0)
    parser.add_argument('--index-dir', default=None, help=f'default: {config.INDEX_DIR}')
    parser.add_argument('--output', help='CSV output path')
    parser.add_argument('--no-store', dest='store', action='store_false', help='skip the results database')
    parser.add_argument('--no-progress', dest='progress', action='store_const', const=False, default=None)


def _index_params(parser):
    parser.add_argument('--fanout', type=int, default=4)
    parser.add_argument('--leaf-capacity', type=int, default=None, help='G-tree tau (default by network size)')
    parser.add_argument('--levels', type=int, default=None, help='ROAD levels (default by network size)')
    parser.add_argument('--workers', type=int, default=config.WORKERS)


def _workload(parser):
    parser.add_argument('--object-kind', choices=[k.value for k in ObjectKind], default=ObjectKind.UNIFORM.value)
    parser.add_argument('--density', type=float, nargs='+', default=[0.001], help=f'choices used in the matrix: {DENSITIES}')
    parser.add_argument('--clusters', type=int, default=10)
    parser.add_argument('--cluster-size', type=int, default=5)
    parser.add_argument('--bucket', type=int, default=1)
    parser.add_argument('--buckets', type=int, default=5)
    parser.add_argument('--min-dist-size', type=int, default=100)
    parser.add_argument('--object-sets', type=int, default=1)


def build_parser():
    parser = argparse.ArgumentParser(description='kNN query processing on road networks: benchmark harness')
    sub = parser.add_subparsers(dest='command', required=True)

    build = sub.add_parser('build', help='build and serialize network indexes')
    _common(build)
    _index_params(build)
    build.add_argument('--indexes', nargs='+', choices=INDEX_KINDS, default=list(INDEX_KINDS))

    gen = sub.add_parser('genobjects', help='write object set files')
    _common(gen)
    _workload(gen)
    gen.add_argument('--out-dir', default='objects')

    query = sub.add_parser('query', help='time kNN queries across methods')
    _common(query)
    _index_params(query)
    _workload(query)
    query.add_argument('--methods', nargs='+', choices=METHODS, default=list(METHODS))
    query.add_argument('--k', type=int, nargs='+', default=[10], help=f'values used in the matrix: {K_VALUES}')
    query.add_argument('--queries', type=int, default=10_000)
    query.add_argument('--warmup', type=int, default=100)
    query.add_argument('--rtree-capacity', type=int, default=DEFAULT_CAPACITY, help='R-tree node capacity for IER')
    query.add_argument('--object-files', nargs='+', default=[])
    query.add_argument('--verify', action='store_true', help='compare every result with network expansion')

    verify = sub.add_parser('verify', help='all methods against network expansion on random graphs')
    _common(verify)
    verify.add_argument('--methods', nargs='+', choices=METHODS, default=list(METHODS))
    verify.add_argument('--trials', type=int, default=100)
    verify.add_argument('--workers', type=int, default=config.WORKERS)
    verify.add_argument('--inject-fault', choices=FAULTS, default=None)
    return parser


def spec_from_args(args):
    values = {
        'graph': args.graph, 'coords': args.coords, 'dataset': args.dataset,
        'weight_kind': args.weight_kind, 'seed': args.seed, 'output': args.output, 'index_dir': args.index_dir,
    }
    for name in ('fanout', 'leaf_capacity', 'levels', 'workers', 'clusters', 'cluster_size', 'bucket',
                 'buckets', 'min_dist_size', 'object_sets', 'methods', 'warmup', 'rtree_capacity', 'verify',
                 'object_files'):
        if hasattr(args, name):
            values[name] = getattr(args, name)
    if hasattr(args, 'object_kind'):
        values['object_kind'] = args.object_kind
        values['densities'] = args.density
    if hasattr(args, 'k'):
        values['k_values'] = args.k
        values['query_count'] = args.queries
    return ExperimentSpec(**values)


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=config.LOG_LEVEL, format=config.LOG_FORMAT)

    try:
        spec = spec_from_args(args)
    except ValueError as e:
        logger.error(str(e))
        return EXIT_ERROR
    if args.command != 'verify' and not spec.graph:
        logger.error('--graph is required for %s', args.command)
        return EXIT_ERROR

    run_id = None
    if args.store and args.command != 'genobjects':
        init_db()
        run_id = _start_run(spec, args.command)

    started = time.perf_counter()
    try:
        records, builds = [], []
        if args.command == 'build':
            builds = cmd_build(spec, args.indexes, args.progress)
        elif args.command == 'genobjects':
            cmd_genobjects(spec, args.out_dir)
        elif args.command == 'query':
            records = cmd_query(spec, args.progress)
        else:
            report = verify_trials(spec.methods, args.trials, spec.seed, args.workers, args.inject_fault,
                                   args.progress)
            print(f"verify: {report.trials} trials, {report.queries} queries, "
                  f"{report.structure_checks} structure checks, PASS")
    except VerificationError as e:
        path = _write_reproducer(spec, e.reproducer)
        logger.error('%s (reproducer: %s)', e, path)
        if run_id:
            _finish_run(run_id, 'failed', str(e))
        return EXIT_MISMATCH
    except (RoadKnnError, OSError) as e:
        logger.error(str(e))
        if run_id:
            _finish_run(run_id, 'failed', str(e))
        return EXIT_ERROR

    if run_id:
        _finish_run(run_id, 'complete', records=records, builds=builds)
    logger.info('%s finished in %.1f s', args.command, time.perf_counter() - started)
    return 0


if __name__ == '__main__':
    sys.exit(main())
