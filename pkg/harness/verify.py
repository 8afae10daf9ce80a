"""
Oracle Verification
Random road-like graphs, every method against network expansion, and the index
structure checks (G-tree matrices, ROAD shortcuts, SILC first hops and ratio bounds)
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field

import numpy as np
from tqdm import tqdm

from core.errors import VerificationError
from core.objects import gen_uniform
from harness.runner import draw_seed
from harness.spec import METHODS, ExperimentSpec
from harness.suite import bind_method, build_network_indexes, build_object_indexes
from methods.distance_browsing import knn_disbrw
from methods.gtree import LEAF_SEARCH_BASIC, check_matrices, knn_gtree
from methods.road import check_shortcuts, knn_road
from methods.silc import check_silc
from utils.random_graphs import RANDOM, random_road_graph

logger = logging.getLogger(__name__)

FAULTS = ('gtree-matrix',)

VERIFY_DENSITIES = (0.01, 0.1)
VERIFY_K = (1, 5, 10)
MIN_VERTICES = 50
MAX_VERTICES = 500
QUERIES_PER_POINT = 10
STRUCTURE_SAMPLES = 200


@dataclass
class VerifyReport:
    trials: int = 0
    queries: int = 0
    structure_checks: int = 0
    failures: list = field(default_factory=list)

    @property
    def passed(self):
        return not self.failures

    def to_dict(self):
        return {
            'trials': self.trials,
            'queries': self.queries,
            'structure_checks': self.structure_checks,
            'failures': self.failures,
            'passed': self.passed,
        }


def small_graph_levels(vertex_count, fanout):
    """ROAD depth leaving roughly 4f vertices per leaf Rnet"""
    return max(1, int(math.log(max(vertex_count / (4 * fanout), 1.0), fanout)))


def inject_matrix_fault(index, rng):
    """Add one to a random stored G-tree distance"""
    name = 'matrix' if len(index.arrays['matrix']) else 'leaf_matrix'
    flat = index.arrays[name]
    candidates = np.flatnonzero(flat > 0)
    position = int(rng.choice(candidates)) if len(candidates) else 0
    flat[position] += 1
    logger.warning('Injected fault: %s[%d] += 1', name, position)


def _variants(network, built):
    """Unoptimized counterparts that must return the same answers"""
    graph, coords = network.graph, network.coords
    variants = {}
    if built.occurrence is not None:
        variants['gtree-basic'] = lambda q, k: knn_gtree(
            q, k, network.gtree, built.occurrence, graph, leaf_search=LEAF_SEARCH_BASIC
        )
    if built.directory is not None:
        variants['road-unpruned'] = lambda q, k: knn_road(
            q, k, network.road, built.directory, visited_pruning=False
        )
    if built.hierarchy is not None:
        variants['disbrw-plain'] = lambda q, k: knn_disbrw(
            q, k, network.silc, coords, graph, built.hierarchy, network.lb_scale, chains=False
        )
    return variants


def _structure_failures(network, rng):
    """Returns (checks run, first problem or None)"""
    graph, checks = network.graph, 0
    if network.gtree is not None:
        checks += 1
        bad = check_matrices(network.gtree, graph)
        if bad:
            return checks, ('gtree-matrix', bad[0])
    if network.road is not None:
        checks += 1
        bad = check_shortcuts(network.road, graph, samples=STRUCTURE_SAMPLES, rng=rng)
        if bad:
            return checks, ('road-shortcut', bad[0])
    if network.silc is not None:
        checks += 1
        sources = rng.choice(graph.vertex_count, size=min(10, graph.vertex_count), replace=False)
        bad = check_silc(network.silc, graph, network.coords, sources=sources,
                         targets_per_source=STRUCTURE_SAMPLES // 10, rng=rng)
        if bad:
            return checks, ('silc', bad[0])
    return checks, None


def run_trial(seed, methods, fault=None):
    """
    One random graph, its indexes and the full query matrix

    Returns:
        dict with the trial counts and, on failure, a message and reproducer
    """
    rng = np.random.default_rng(seed)
    n = int(rng.integers(MIN_VERTICES, MAX_VERTICES + 1))
    graph, coords = random_road_graph(n, seed=seed, weights=RANDOM)
    spec = ExperimentSpec(methods=list(methods))
    fanout = spec.fanout
    network = build_network_indexes(
        graph, coords, spec.required_indexes(), fanout=fanout,
        leaf_capacity=max(4, n // 20), levels=small_graph_levels(n, fanout), seed=seed, progress=False,
    )
    outcome = {'seed': seed, 'vertices': n, 'queries': 0, 'structure_checks': 0}
    base = {'graph': 'random', 'seed': seed, 'vertices': n, 'weights': RANDOM}

    if fault == 'gtree-matrix' and network.gtree is not None:
        inject_matrix_fault(network.gtree, rng)
    checks, problem = _structure_failures(network, rng)
    outcome['structure_checks'] = checks
    if problem:
        kind, detail = problem
        outcome['message'] = f'{kind} check failed on trial seed {seed}: {detail}'
        outcome['reproducer'] = dict(base, check=kind, detail=[int(x) if isinstance(x, (int, np.integer)) else str(x)
                                                              for x in detail])
        return outcome

    all_methods = list(methods) + ['ine']
    for density in VERIFY_DENSITIES:
        objects = gen_uniform(graph, density, draw_seed(rng))
        built = build_object_indexes(network, objects, all_methods)
        queries = rng.choice(n, size=QUERIES_PER_POINT, replace=False).tolist()
        runners = {m: bind_method(m, network, built) for m in methods}
        runners.update(_variants(network, built))
        oracle = bind_method('ine', network, built)
        for k in VERIFY_K:
            for q in queries:
                expected = oracle(q, k)
                outcome['queries'] += 1
                for name, query in runners.items():
                    got = query(q, k)
                    if got.ids() != expected.ids():
                        outcome['message'] = f'{name} disagrees with network expansion at q={q}, k={k} (seed {seed})'
                        outcome['reproducer'] = dict(
                            base, method=name, q=q, k=k, density=density, object_seed=objects.seed,
                            expected=[[int(v), int(d)] for v, d in expected.items],
                            got=[[int(v), int(d)] for v, d in got.items],
                        )
                        return outcome
    return outcome


def cmd_verify(methods=METHODS, trials=100, seed=0, workers=1, fault=None, progress=None):
    """
    Run `trials` random trials; trials are independent and spread over processes

    Raises:
        VerificationError: the failure with the lowest trial index
    """
    if fault is not None and fault not in FAULTS:
        raise ValueError(f'unknown fault {fault!r}; choose from {", ".join(FAULTS)}')
    rng = np.random.default_rng(seed)
    seeds = [draw_seed(rng) for _ in range(trials)]
    report = VerifyReport()
    outcomes = {}
    disable = not progress if progress is not None else None

    if workers <= 1:
        for i, trial_seed in enumerate(tqdm(seeds, desc='verify', disable=disable)):
            outcomes[i] = run_trial(trial_seed, methods, fault)
            if 'message' in outcomes[i]:
                break
    else:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            futures = {executor.submit(run_trial, s, tuple(methods), fault): i for i, s in enumerate(seeds)}
            for future in tqdm(as_completed(futures), total=len(futures), desc='verify', disable=disable):
                outcomes[futures[future]] = future.result()

    for i in sorted(outcomes):
        outcome = outcomes[i]
        report.trials += 1
        report.queries += outcome['queries']
        report.structure_checks += outcome['structure_checks']
        if 'message' in outcome:
            report.failures.append(outcome['reproducer'])
            logger.error(outcome['message'])
            raise VerificationError(outcome['message'], outcome['reproducer'])
    logger.info('Verified %d trials, %d queries, %d structure checks', report.trials, report.queries,
                report.structure_checks)
    return report
