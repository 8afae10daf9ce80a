"""
Desk-scale agreement run on a real DIMACS network; set ROADKNN_DE_GRAPH to its .gr
file (the .co file must sit next to it)
"""

import os

import pytest

from harness.runner import run_experiment
from harness.spec import ExperimentSpec
from harness.suite import build_network_indexes
from utils.dimacs import load_network

GRAPH = os.getenv('ROADKNN_DE_GRAPH')

pytestmark = [
    pytest.mark.slow,
    pytest.mark.skipif(not GRAPH, reason='ROADKNN_DE_GRAPH is not set'),
]


def test_all_methods_agree_on_desk_scale_network():
    graph, coords = load_network(GRAPH, GRAPH[:-3] + '.co')
    network = build_network_indexes(graph, coords, ['gtree', 'road', 'silc'], workers=os.cpu_count() or 1,
                                    progress=False)
    spec = ExperimentSpec(graph=GRAPH, densities=[0.01, 0.001], k_values=[1, 10, 50], query_count=1000,
                          verify=True)
    records = run_experiment(spec, network, 'DE')
    assert len(records) == 7 * 2 * 3
    assert all(r.mismatches == 0 for r in records)
