"""
Graph Partitioner
METIS multilevel k-way partitioning of the subgraph induced by a vertex set,
used by G-tree and ROAD to split a node into f parts with few border vertices
"""

import logging

import numpy as np
import pymetis

logger = logging.getLogger(__name__)


def induced_adjacency(graph, vertices):
    """
    CSR adjacency (xadj, adjncy) of the subgraph induced by vertices, on local
    ids 0..len(vertices)-1 in the order given
    """
    vertices = np.asarray(vertices, dtype=np.int64)
    local = np.full(graph.vertex_count, -1, dtype=np.int64)
    local[vertices] = np.arange(len(vertices), dtype=np.int64)

    starts = graph.first_edge[vertices]
    counts = graph.first_edge[vertices + 1] - starts
    owner = np.repeat(np.arange(len(vertices), dtype=np.int64), counts)
    offsets = np.arange(int(counts.sum()), dtype=np.int64) - np.repeat(np.cumsum(counts) - counts, counts)
    targets = local[graph.edge_target[np.repeat(starts, counts) + offsets]]

    keep = targets >= 0
    owner, targets = owner[keep], targets[keep]
    xadj = np.zeros(len(vertices) + 1, dtype=np.int64)
    np.cumsum(np.bincount(owner, minlength=len(vertices)), out=xadj[1:])
    return xadj, targets


class MultilevelPartitioner:
    """
    Seeded wrapper around pymetis.part_graph.

    Args:
        seed: METIS random seed; equal seeds give equal splits
        imbalance: allowed part weight overshoot (METIS ufactor / 1000)
    """

    def __init__(self, seed=0, imbalance=0.03):
        self.seed = seed
        self.imbalance = imbalance

    def _options(self):
        return pymetis.Options(seed=int(self.seed), ufactor=max(1, int(round(self.imbalance * 1000))))

    def split(self, graph, vertices, parts):
        """
        Split vertices into at most parts non-empty groups, each returned as a
        sorted int64 array. Groups are ordered by their smallest vertex.
        """
        vertices = np.unique(np.asarray(vertices, dtype=np.int64))
        if parts <= 1 or len(vertices) <= 1:
            return [vertices] if len(vertices) else []
        if len(vertices) <= parts:
            return [vertices[i:i + 1] for i in range(len(vertices))]

        xadj, adjncy = induced_adjacency(graph, vertices)
        if len(adjncy) == 0:
            # no edges to cut; contiguous id ranges
            return [chunk for chunk in np.array_split(vertices, parts) if len(chunk)]

        _, membership = pymetis.part_graph(
            parts,
            xadj=xadj.tolist(),
            adjncy=adjncy.tolist(),
            options=self._options(),
        )
        membership = np.asarray(membership, dtype=np.int64)
        groups = [vertices[membership == p] for p in range(parts)]
        groups = sorted((g for g in groups if len(g)), key=lambda g: int(g[0]))
        logger.debug('split %d vertices into %s', len(vertices), [len(g) for g in groups])
        return groups


def partition_vertices(graph, vertices, parts, seed=0):
    """Convenience wrapper: MultilevelPartitioner(seed).split(graph, vertices, parts)"""
    return MultilevelPartitioner(seed=seed).split(graph, vertices, parts)
