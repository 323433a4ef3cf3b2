"""Shared test utilities: random graph construction and brute-force oracles."""

import numpy as np

from ctcluster.data import EdgeList
from ctcluster.graph import SimilarityGraph, edge_graph


def random_connected_graph(n, extra_edges, seed, weighted=True) -> SimilarityGraph:
    """Random spanning tree plus extra edges; connected by construction."""
    rng = np.random.default_rng(seed)
    heads, tails = [], []
    seen = set()
    for v in range(1, n):
        u = int(rng.integers(0, v))
        heads.append(u)
        tails.append(v)
        seen.add((u, v))
    added = 0
    while added < extra_edges:
        u, v = rng.integers(0, n, size=2)
        u, v = int(min(u, v)), int(max(u, v))
        if u == v or (u, v) in seen:
            continue
        seen.add((u, v))
        heads.append(u)
        tails.append(v)
        added += 1
    m = len(heads)
    weights = rng.uniform(0.5, 2.0, size=m) if weighted else np.ones(m)
    return edge_graph(EdgeList(heads=np.array(heads), tails=np.array(tails),
                               weights=weights, node_count=n))


def path_graph(weights) -> SimilarityGraph:
    """Path 0-1-2-... with the given edge weights."""
    m = len(weights)
    return edge_graph(EdgeList(heads=np.arange(m), tails=np.arange(1, m + 1),
                               weights=np.asarray(weights, dtype=float),
                               node_count=m + 1))


def single_edge_graph(w=1.0) -> SimilarityGraph:
    return path_graph([w])


def triangle_graph(w=1.0) -> SimilarityGraph:
    return edge_graph(EdgeList(heads=np.array([0, 1, 0]), tails=np.array([1, 2, 2]),
                               weights=np.full(3, float(w)), node_count=3))


def pairwise_sq_dists(coords) -> np.ndarray:
    """Dense squared Euclidean distances between rows (test-side oracle)."""
    sq = np.sum(coords**2, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * coords @ coords.T
    return np.maximum(d2, 0.0)


def bfs_components(adjacency) -> np.ndarray:
    """Independent BFS component labeling (oracle for csgraph paths)."""
    n = adjacency.shape[0]
    indptr, indices = adjacency.indptr, adjacency.indices
    labels = np.full(n, -1, dtype=np.int64)
    comp = 0
    for start in range(n):
        if labels[start] >= 0:
            continue
        queue = [start]
        labels[start] = comp
        while queue:
            u = queue.pop()
            for v in indices[indptr[u]:indptr[u + 1]]:
                if labels[v] < 0:
                    labels[v] = comp
                    queue.append(v)
        comp += 1
    return labels
