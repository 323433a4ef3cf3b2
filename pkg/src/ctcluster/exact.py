"""Exact reference implementations: eigenvector spectral clustering, the
exact commute-time embedding, pseudoinverse commute times, and hitting
times from the first-step recursion.

These are the correctness oracles and accuracy baselines for the
approximate pipeline. They are meant for graphs up to a few thousand
nodes; the guards are explicit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy import sparse
from scipy.sparse.linalg import eigsh, spsolve

from .errors import GraphDisconnectedError
from .graph import SimilarityGraph, laplacian, normalized_laplacian
from .kmeans import ClusterAssignment, KMeansConfig, kmeans_cluster

__all__ = [
    "EigenPair",
    "laplacian_eigenpairs",
    "spectral_embedding",
    "spectral_cluster_exact",
    "exact_commute_embedding",
    "commute_pinv",
    "commute_matrix",
    "hitting_times",
    "transition_matrix",
]

# dense eigendecomposition up to here, Lanczos-style iterative beyond
DENSE_EIG_MAX_N = 2000
# hard guard for full-spectrum operations (pseudoinverse, exact embedding)
EXACT_MAX_N = 5000
# eigenvalues below this fraction of the largest are treated as zero
ZERO_EIG_RTOL = 1e-10


@dataclass
class EigenPair:
    """Ascending eigenvalues with orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _require_connected(G: SimilarityGraph, what: str) -> None:
    if not G.is_connected():
        raise GraphDisconnectedError(f"{what} requires a connected graph")


def laplacian_eigenpairs(M: sparse.csr_matrix, k: int | None = None) -> EigenPair:
    """Smallest k eigenpairs of a symmetric PSD matrix (all of them if k is None).

    Dense solve for small matrices; shift-inverted Lanczos for larger ones,
    which needs k well below n.
    """
    n = M.shape[0]
    if k is None or k >= n or n <= DENSE_EIG_MAX_N:
        dense = M.toarray() if sparse.issparse(M) else np.asarray(M)
        if k is not None and k < n:
            vals, vecs = scipy.linalg.eigh(dense, subset_by_index=(0, k - 1))
        else:
            vals, vecs = scipy.linalg.eigh(dense)
    else:
        shift = -1e-3 * max(M.diagonal().max(), 1.0)
        vals, vecs = eigsh(M.tocsc(), k=k, sigma=shift, which="LM", tol=1e-8)
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
    return EigenPair(eigenvalues=vals, eigenvectors=vecs)


def spectral_embedding(G: SimilarityGraph, k: int, variant: str = "njw") -> np.ndarray:
    """Rows of the k-eigenvector matrix the exact pipeline clusters.

    Variants:
      unnorm     eigenvectors of the combinatorial Laplacian
      shi_malik  eigenvectors of the random-walk Laplacian (computed
                 through the symmetric form and rescaled)
      njw        eigenvectors of the symmetric normalized Laplacian with
                 rows renormalized to unit length
    """
    if not 1 <= k <= G.n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={G.n}")
    _require_connected(G, "spectral clustering")
    if variant == "unnorm":
        pair = laplacian_eigenpairs(laplacian(G), k)
        U = pair.eigenvectors
    elif variant == "shi_malik":
        pair = laplacian_eigenpairs(normalized_laplacian(G, "sym"), k)
        U = pair.eigenvectors / np.sqrt(G.degrees)[:, None]
    elif variant == "njw":
        pair = laplacian_eigenpairs(normalized_laplacian(G, "sym"), k)
        U = pair.eigenvectors.copy()
        norms = np.linalg.norm(U, axis=1)
        norms[norms == 0] = 1.0
        U /= norms[:, None]
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return np.ascontiguousarray(U)


def spectral_cluster_exact(G: SimilarityGraph, k: int, variant: str = "njw",
                           kmeans_cfg: KMeansConfig | None = None,
                           workers: int = 1) -> ClusterAssignment:
    """Cluster by k-means on the first k Laplacian eigenvectors."""
    if kmeans_cfg is None:
        kmeans_cfg = KMeansConfig(k=k)
    if kmeans_cfg.k != k:
        raise ValueError("kmeans_cfg.k must match the requested cluster count")
    U = spectral_embedding(G, k, variant)
    return kmeans_cluster(U, kmeans_cfg, workers=workers)


def exact_commute_embedding(G: SimilarityGraph):
    """Exact commute-time embedding from the full eigendecomposition.

    Coordinates are sqrt(volume) * V S^(-1/2) over the nonzero eigenpairs,
    so squared pairwise row distances equal commute times.
    """
    from .embedding import Embedding

    _require_connected(G, "exact commute embedding")
    if G.n > EXACT_MAX_N:
        raise ValueError(f"exact embedding guarded at n <= {EXACT_MAX_N}, got {G.n}")
    pair = laplacian_eigenpairs(laplacian(G))
    vals, vecs = pair.eigenvalues, pair.eigenvectors
    cut = ZERO_EIG_RTOL * max(vals[-1], 0.0)
    nonzero = vals > cut
    coords = np.sqrt(G.volume) * vecs[:, nonzero] / np.sqrt(vals[nonzero])[None, :]
    return Embedding(coords=np.ascontiguousarray(coords), kind="exact", source_volume=G.volume)


def _pinv_laplacian(G: SimilarityGraph) -> np.ndarray:
    if G.n > EXACT_MAX_N:
        raise ValueError(f"dense pseudoinverse guarded at n <= {EXACT_MAX_N}, got {G.n}")
    return np.linalg.pinv(laplacian(G).toarray(), hermitian=True)


def commute_pinv(G: SimilarityGraph, i: int, j: int) -> float:
    """Commute time between nodes i and j via the Laplacian pseudoinverse."""
    _require_connected(G, "commute time")
    if not (0 <= i < G.n and 0 <= j < G.n):
        raise IndexError(f"node pair ({i}, {j}) out of range for {G.n} nodes")
    Lp = _pinv_laplacian(G)
    c = G.volume * (Lp[i, i] + Lp[j, j] - 2.0 * Lp[i, j])
    return max(float(c), 0.0)


def commute_matrix(G: SimilarityGraph) -> np.ndarray:
    """All-pairs commute times (bulk form of ``commute_pinv``)."""
    _require_connected(G, "commute time")
    Lp = _pinv_laplacian(G)
    d = np.diag(Lp)
    C = G.volume * (d[:, None] + d[None, :] - 2.0 * Lp)
    np.fill_diagonal(C, 0.0)
    return np.maximum(C, 0.0)


def hitting_times(G: SimilarityGraph, target: int) -> np.ndarray:
    """Expected steps for a random walk from each node to reach ``target``.

    Solves the grounded Laplacian system the first-step recursion reduces
    to: with the target's row and column deleted, L h = d.
    """
    _require_connected(G, "hitting times")
    if not 0 <= target < G.n:
        raise IndexError(f"target {target} out of range for {G.n} nodes")
    mask = np.arange(G.n) != target
    L = laplacian(G)
    L_grounded = L[mask][:, mask].tocsc()
    rhs = G.degrees[mask]
    h_rest = spsolve(L_grounded, rhs)
    h = np.zeros(G.n)
    h[mask] = h_rest
    return h


def transition_matrix(G: SimilarityGraph) -> sparse.csr_matrix:
    """Random-walk transition probabilities p_ij = w_ij / d_i."""
    return (sparse.diags(1.0 / G.degrees) @ G.adjacency).tocsr()
