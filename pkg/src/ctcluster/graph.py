"""Similarity graphs and their Laplacian-family algebra.

Adjacency, Laplacians and incidence matrices are scipy CSR matrices built
symmetrically (mirror entries come from the same float product, so a_ij and
a_ji are bitwise equal).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .data import EdgeList, FeatureMatrix
from .errors import DegenerateDataError, GraphDisconnectedError

__all__ = [
    "SimilarityGraph",
    "IncidenceFactor",
    "build_graph",
    "edge_graph",
    "laplacian",
    "normalized_laplacian",
    "incidence_factorization",
    "largest_component",
    "to_edge_list",
]

# Gaussian weights this small are kept (clamped) instead of dropped so the
# union-rule graph stays connected as constructed.
_WEIGHT_FLOOR = 1e-300

# Above this dimension a kd-tree stops paying off; fall back to brute force.
_KDTREE_MAX_DIM = 20


@dataclass
class SimilarityGraph:
    """Weighted undirected graph with cached degrees and volume."""

    n: int
    adjacency: sparse.csr_matrix
    degrees: np.ndarray
    volume: float
    build_meta: dict = field(default_factory=dict)

    @property
    def edge_count(self) -> int:
        return self.adjacency.nnz // 2

    def is_connected(self) -> bool:
        ncomp, _ = connected_components(self.adjacency, directed=False)
        return ncomp == 1


@dataclass
class IncidenceFactor:
    """Signed edge-vertex incidence B (m x n) and edge weights w (m,).

    Each row of B holds +1 at the edge's head and -1 at its tail, heads
    being the lower node id. B.T @ diag(w) @ B reproduces the Laplacian.
    """

    incidence: sparse.csr_matrix
    weights: np.ndarray
    edge_order: np.ndarray  # (m, 2) array of (head, tail)

    @property
    def m(self) -> int:
        return self.incidence.shape[0]

    def weight_matrix(self) -> sparse.dia_matrix:
        return sparse.diags(self.weights)


def _graph_from_adjacency(A: sparse.csr_matrix, meta: dict) -> SimilarityGraph:
    A = A.tocsr()
    A.sum_duplicates()
    A.eliminate_zeros()
    A.sort_indices()
    degrees = np.asarray(A.sum(axis=1)).ravel()
    return SimilarityGraph(
        n=A.shape[0],
        adjacency=A,
        degrees=degrees,
        volume=float(degrees.sum()),
        build_meta=meta,
    )


def _pairwise_sq_dists(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    d2 = np.sum(X**2, axis=1)[:, None] + np.sum(Y**2, axis=1)[None, :] - 2.0 * (X @ Y.T)
    return np.maximum(d2, 0.0)


def _knn_candidates(X: np.ndarray, k1: int, workers: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-point k1 nearest neighbors (self excluded), ties toward lower id.

    Returns (dist, idx) of shape (n, k1). The tie rule is exact on the brute
    force path; on the kd-tree path it is applied within the candidate set
    the tree returns.
    """
    n, d = X.shape
    if d <= _KDTREE_MAX_DIM:
        tree = cKDTree(X)
        dist, idx = tree.query(X, k=k1 + 1, workers=workers)
    else:
        d2 = _pairwise_sq_dists(X, X)
        np.fill_diagonal(d2, np.inf)
        part = np.argpartition(d2, k1, axis=1)[:, : k1 + 1]
        dist = np.sqrt(np.take_along_axis(d2, part, axis=1))
        idx = part
    order = np.lexsort((idx, dist), axis=1)
    dist = np.take_along_axis(dist, order, axis=1)
    idx = np.take_along_axis(idx, order, axis=1)
    rows = np.arange(n)[:, None]
    self_hit = idx == rows
    # keep k1 entries per row: drop the self entry where present, else the
    # farthest candidate (duplicates of a point may crowd out "self")
    drop = np.where(self_hit.any(axis=1), self_hit.argmax(axis=1), k1)
    keep = np.ones((n, k1 + 1), dtype=bool)
    keep[np.arange(n), drop] = False
    return dist[keep].reshape(n, k1), idx[keep].reshape(n, k1)


def _resolve_sigma(sigma, knn_dist: np.ndarray) -> float:
    if sigma == "median":
        value = float(np.median(knn_dist[:, -1]))
        if value <= 0.0:
            raise DegenerateDataError(
                "median neighbor distance is zero; the data has no usable similarity scale"
            )
        return value
    value = float(sigma)
    if value <= 0.0:
        raise ValueError(f"sigma must be positive, got {value}")
    return value


def _gaussian_weights(dist: np.ndarray, sigma: float) -> np.ndarray:
    w = np.exp(-(dist**2) / (2.0 * sigma**2))
    return np.maximum(w, _WEIGHT_FLOOR)


def _symmetric_adjacency(n, rows, cols, dist, sigma) -> sparse.csr_matrix:
    """Dedupe directed pairs to canonical undirected edges, weight, mirror."""
    lo = np.minimum(rows, cols)
    hi = np.maximum(rows, cols)
    code = lo.astype(np.int64) * n + hi
    _, first = np.unique(code, return_index=True)
    lo, hi, dist = lo[first], hi[first], dist[first]
    w = _gaussian_weights(dist, sigma)
    A = sparse.coo_matrix(
        (np.concatenate([w, w]), (np.concatenate([lo, hi]), np.concatenate([hi, lo]))),
        shape=(n, n),
    )
    return A.tocsr()


def build_graph(
    fm: FeatureMatrix,
    mode: str = "knn",
    k1: int = 10,
    epsilon: float | None = None,
    sigma="median",
    workers: int = 1,
) -> SimilarityGraph:
    """Build a Gaussian-kernel similarity graph over feature rows.

    Modes:
      knn      union rule: i-j connected if either is among the other's
               k1 nearest neighbors
      epsilon  connect pairs with Euclidean distance strictly below epsilon
      full     all pairs

    ``sigma`` is the kernel bandwidth, or "median" for the median distance
    to the k1-th nearest neighbor.
    """
    X = fm.values
    n = X.shape[0]
    if n < 2:
        raise ValueError("graph construction needs at least 2 points")
    if mode == "knn" and (k1 < 1 or k1 >= n):
        raise ValueError(f"knn mode needs 1 <= k1 < n, got k1={k1}, n={n}")
    if mode == "epsilon" and (epsilon is None or epsilon <= 0):
        raise ValueError(f"epsilon mode needs epsilon > 0, got {epsilon}")
    if mode not in ("knn", "epsilon", "full"):
        raise ValueError(f"unknown graph mode {mode!r}")

    k_heur = min(k1 if mode == "knn" else 10, n - 1)
    knn_dist, knn_idx = _knn_candidates(X, k_heur, workers)
    sig = _resolve_sigma(sigma, knn_dist)

    if mode == "knn":
        rows = np.repeat(np.arange(n), k1)
        A = _symmetric_adjacency(n, rows, knn_idx.ravel(), knn_dist.ravel(), sig)
    elif mode == "epsilon":
        if X.shape[1] <= _KDTREE_MAX_DIM:
            tree = cKDTree(X)
            pairs = tree.query_pairs(epsilon, output_type="ndarray")
        else:
            d2 = _pairwise_sq_dists(X, X)
            iu, ju = np.triu_indices(n, k=1)
            inside = d2[iu, ju] <= epsilon**2
            pairs = np.column_stack([iu[inside], ju[inside]])
        if len(pairs) == 0:
            raise DegenerateDataError(f"epsilon={epsilon} produces an empty graph")
        dist = np.linalg.norm(X[pairs[:, 0]] - X[pairs[:, 1]], axis=1)
        strict = dist < epsilon
        pairs, dist = pairs[strict], dist[strict]
        A = _symmetric_adjacency(n, pairs[:, 0], pairs[:, 1], dist, sig)
    else:
        iu, ju = np.triu_indices(n, k=1)
        dist = np.sqrt(_pairwise_sq_dists(X, X)[iu, ju])
        A = _symmetric_adjacency(n, iu, ju, dist, sig)

    meta = {"mode": mode, "k1": k1 if mode == "knn" else None,
            "epsilon": epsilon if mode == "epsilon" else None,
            "sigma": sig, "source": "features"}
    return _graph_from_adjacency(A, meta)


def edge_graph(edge_list: EdgeList) -> SimilarityGraph:
    """Similarity graph straight from an edge list, weights unchanged."""
    if edge_list.edge_count == 0:
        raise ValueError("edge list is empty")
    n = edge_list.node_count
    A = sparse.coo_matrix(
        (
            np.concatenate([edge_list.weights, edge_list.weights]),
            (
                np.concatenate([edge_list.heads, edge_list.tails]),
                np.concatenate([edge_list.tails, edge_list.heads]),
            ),
        ),
        shape=(n, n),
    ).tocsr()
    return _graph_from_adjacency(A, {"mode": "edge_list", "sigma": None, "source": "edges"})


def laplacian(G: SimilarityGraph) -> sparse.csr_matrix:
    """Combinatorial Laplacian: degree matrix minus adjacency."""
    L = (sparse.diags(G.degrees) - G.adjacency).tocsr()
    L.sort_indices()
    return L


def normalized_laplacian(G: SimilarityGraph, kind: str = "sym") -> sparse.csr_matrix:
    """Normalized Laplacian, symmetric (D^-1/2 L D^-1/2) or random-walk (D^-1 L)."""
    if np.any(G.degrees <= 0):
        raise ValueError("normalized Laplacian undefined with isolated (degree 0) nodes")
    A = G.adjacency.tocoo()
    if kind == "sym":
        s = 1.0 / np.sqrt(G.degrees)
        # one commutative product per entry keeps the matrix exactly symmetric
        scaled = (s[A.row] * s[A.col]) * A.data
    elif kind == "rw":
        scaled = A.data / G.degrees[A.row]
    else:
        raise ValueError(f"unknown Laplacian kind {kind!r}")
    S = sparse.coo_matrix((scaled, (A.row, A.col)), shape=A.shape)
    Ln = (sparse.eye(G.n, format="csr") - S.tocsr()).tocsr()
    Ln.sort_indices()
    return Ln


def incidence_factorization(G: SimilarityGraph) -> IncidenceFactor:
    """Signed incidence factorization of the Laplacian.

    Edges are ordered lexicographically by (low id, high id) and oriented
    with the lower id as head, so the factor is deterministic.
    """
    U = sparse.triu(G.adjacency, k=1).tocoo()
    order = np.lexsort((U.col, U.row))
    heads, tails, w = U.row[order], U.col[order], U.data[order]
    m = len(w)
    rows = np.repeat(np.arange(m), 2)
    cols = np.column_stack([heads, tails]).ravel()
    vals = np.tile([1.0, -1.0], m)
    B = sparse.csr_matrix((vals, (rows, cols)), shape=(m, G.n))
    B.sort_indices()
    return IncidenceFactor(incidence=B, weights=w.copy(), edge_order=np.column_stack([heads, tails]))


def largest_component(G: SimilarityGraph) -> tuple[SimilarityGraph, np.ndarray]:
    """Induced subgraph on the largest connected component.

    Returns the subgraph and an old-to-new index map (-1 for dropped nodes).
    Ties between components of equal size go to the one containing the
    smallest original node id.
    """
    ncomp, labels = connected_components(G.adjacency, directed=False)
    if ncomp == 1:
        return G, np.arange(G.n, dtype=np.int64)
    sizes = np.bincount(labels, minlength=ncomp)
    min_id = np.full(ncomp, G.n, dtype=np.int64)
    np.minimum.at(min_id, labels, np.arange(G.n))
    best = min((int(-sizes[c]), int(min_id[c]), c) for c in range(ncomp))[2]
    keep = np.flatnonzero(labels == best)
    index_map = np.full(G.n, -1, dtype=np.int64)
    index_map[keep] = np.arange(len(keep))
    A_sub = G.adjacency[keep][:, keep].tocsr()
    meta = dict(G.build_meta)
    meta["largest_component_of"] = G.n
    return _graph_from_adjacency(A_sub, meta), index_map


def to_edge_list(G: SimilarityGraph) -> EdgeList:
    """Export the graph in the edge-list form used by the dataset loader."""
    fac = incidence_factorization(G)
    return EdgeList(
        heads=fac.edge_order[:, 0],
        tails=fac.edge_order[:, 1],
        weights=fac.weights,
        node_count=G.n,
    )
