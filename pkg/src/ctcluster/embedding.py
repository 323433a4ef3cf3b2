"""Approximate commute-time embedding.

The embedding is built in two steps: project the weighted incidence
factor through a random sign matrix, then solve one Laplacian system per
projection row. Squared Euclidean distances between embedding rows
approximate commute times between the corresponding nodes.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from . import _accel
from .errors import GraphDisconnectedError, SolverError
from .graph import SimilarityGraph, incidence_factorization, laplacian

__all__ = [
    "ProjectionMatrix",
    "Embedding",
    "SolverReport",
    "sample_projection",
    "laplacian_solve",
    "build_embedding",
    "approx_commute",
    "export_embedding_csv",
]

DEFAULT_K_RP = 50
DEFAULT_TOL = 1e-6

# Jacobi-preconditioned CG iteration counts grow with the graph's condition
# number, which on mesh-like graphs pushes total solve time well past linear
# in n; a smoothed-aggregation multigrid preconditioner keeps iteration
# counts flat. Small systems stay on the fused Jacobi kernel, which has far
# less per-solve overhead. The crossover sits below the sizes where scaling
# is measured so one regime covers the whole range.
AMG_MIN_NODES = 512


@dataclass
class ProjectionMatrix:
    """Random sign projection: entries are +-1/sqrt(k_rp), i.i.d. fair coin."""

    matrix: np.ndarray
    k_rp: int
    m: int
    seed: int


@dataclass
class Embedding:
    """n x k coordinate matrix; squared row distances are commute times
    (exactly or approximately, per ``kind``)."""

    coords: np.ndarray
    kind: str  # "approximate" or "exact"
    source_volume: float

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def dim(self) -> int:
        return self.coords.shape[1]


@dataclass
class SolverReport:
    """Per-solve diagnostics for the embedding construction."""

    iterations: np.ndarray
    residuals: np.ndarray
    tol: float
    preconditioner: str

    @property
    def max_residual(self) -> float:
        return float(self.residuals.max()) if len(self.residuals) else 0.0


def sample_projection(k_rp: int, m: int, seed: int) -> ProjectionMatrix:
    """Draw the k_rp x m random sign matrix.

    Uses a counter-based generator keyed on the seed, so the full matrix is
    reproducible and independent of any other random stream in the process.
    """
    if k_rp < 1 or m < 1:
        raise ValueError(f"k_rp and m must be >= 1, got {k_rp}, {m}")
    rng = np.random.Generator(np.random.Philox(key=seed))
    signs = rng.integers(0, 2, size=(k_rp, m), dtype=np.int8)
    matrix = (2.0 * signs - 1.0) / np.sqrt(k_rp)
    return ProjectionMatrix(matrix=matrix, k_rp=k_rp, m=m, seed=seed)


def _laplacian_edge_count(L: sparse.csr_matrix) -> int:
    return (L.nnz - L.shape[0]) // 2


def default_max_iter(edge_count: int) -> int:
    return int(10 * np.sqrt(max(edge_count, 1)) + 1000)


def _pcg_general(L, y, tol, max_iter, msolve):
    """CG with an arbitrary SPD preconditioner, nullspace-deflected.

    Same contract as the Jacobi kernel: assumes y is orthogonal to ones,
    verifies recursive convergence against the true residual, and returns
    (x, iterations, true relative residual).
    """
    n = L.shape[0]
    x = np.zeros(n)
    normy = np.linalg.norm(y)
    if normy == 0.0:
        return x, 0, 0.0
    r = y.copy()
    iters = 0
    fresh = True
    while iters < max_iter:
        if fresh:
            z = msolve(r)
            z = z - z.mean()
            p = z.copy()
            rz = r @ z
            fresh = False
        q = L @ p
        pq = p @ q
        if pq <= 0.0:
            break
        alpha = rz / pq
        x += alpha * p
        r -= alpha * q
        iters += 1
        if np.linalg.norm(r) <= tol * normy:
            r = y - L @ x
            if np.linalg.norm(r) <= tol * normy:
                break
            fresh = True
            continue
        z = msolve(r)
        z = z - z.mean()
        rz_new = r @ z
        beta = rz_new / rz
        rz = rz_new
        p = z + beta * p
    x -= x.mean()
    resid = np.linalg.norm(y - L @ x) / normy
    return x, iters, resid


def _amg_preconditioner(L: sparse.csr_matrix):
    import pyamg

    ml = pyamg.smoothed_aggregation_solver(
        L.tocsr(), B=np.ones((L.shape[0], 1)), max_coarse=50
    )
    return ml.aspreconditioner(cycle="V").matvec


class _LaplacianSolver:
    """Reusable solver context for repeated right-hand sides on one Laplacian."""

    def __init__(self, L: sparse.csr_matrix, tol: float = DEFAULT_TOL,
                 max_iter: int | None = None, precond: str = "auto"):
        L = L.tocsr()
        L.sort_indices()
        self.L = L
        self.n = L.shape[0]
        self.tol = float(tol)
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        self.max_iter = max_iter if max_iter is not None else default_max_iter(_laplacian_edge_count(L))
        if precond == "auto":
            precond = "amg" if self.n >= AMG_MIN_NODES else "jacobi"
        if precond not in ("jacobi", "amg", "none"):
            raise ValueError(f"unknown preconditioner {precond!r}")
        self.precond = precond
        if precond == "jacobi":
            diag = L.diagonal()
            if np.any(diag <= 0):
                raise ValueError("Laplacian diagonal must be positive")
            self._inv_diag = 1.0 / diag
            self._indptr = L.indptr.astype(np.int64)
            self._indices = L.indices.astype(np.int64)
            self._data = np.ascontiguousarray(L.data, dtype=np.float64)
        elif precond == "amg":
            self._msolve = _amg_preconditioner(L)
        else:
            self._msolve = lambda r: r

    def solve(self, y: np.ndarray, orth_tol: float = 1e-8):
        """Minimum-norm solution of L x = y. Returns (x, iterations, residual)."""
        y = np.asarray(y, dtype=np.float64)
        if y.shape != (self.n,):
            raise ValueError(f"rhs has shape {y.shape}, expected ({self.n},)")
        normy = np.linalg.norm(y)
        mean = y.mean()
        # component along the all-ones nullspace: must be noise, not signal
        if normy > 0 and abs(mean) * np.sqrt(self.n) > orth_tol * normy:
            raise ValueError(
                "rhs is not orthogonal to the ones vector "
                f"(nullspace component {abs(mean) * np.sqrt(self.n) / normy:.2e} of |y|)"
            )
        yd = y - mean
        if self.precond == "jacobi":
            x, iters, resid = _accel.pcg_jacobi(
                self._indptr, self._indices, self._data, self._inv_diag,
                yd, self.tol, self.max_iter,
            )
        else:
            x, iters, resid = _pcg_general(self.L, yd, self.tol, self.max_iter, self._msolve)
        if resid > self.tol:
            raise SolverError(
                f"no convergence in {iters} iterations (residual {resid:.3e}, tol {self.tol:.1e})",
                iterations=iters,
                residual=resid,
            )
        return x, iters, resid


def laplacian_solve(L, y, tol: float = DEFAULT_TOL, max_iter: int | None = None,
                    precond: str = "jacobi") -> np.ndarray:
    """Solve L x = y for a connected-graph Laplacian.

    The mean of y is deflated (y must be orthogonal to ones up to noise),
    and the returned x satisfies ones @ x = 0 and |L x - y| <= tol |y|.
    Raises SolverError when the residual contract cannot be met.
    """
    solver = _LaplacianSolver(L, tol=tol, max_iter=max_iter, precond=precond)
    x, _, _ = solver.solve(y)
    return x


def build_embedding(G: SimilarityGraph, k_rp: int = DEFAULT_K_RP, seed: int = 0,
                    tol: float = DEFAULT_TOL, precond: str = "auto",
                    workers: int = 1) -> tuple[Embedding, SolverReport]:
    """Construct the approximate commute-time embedding of a connected graph.

    Projects sqrt(volume) * W^(1/2) B through a k_rp-row random sign matrix
    and solves one Laplacian system per row; the solutions, stacked as
    columns, give the n x k_rp embedding. Solves are independent and run on
    ``workers`` threads without affecting the result.
    """
    if k_rp < 1:
        raise ValueError(f"k_rp must be >= 1, got {k_rp}")
    if not G.is_connected():
        raise GraphDisconnectedError(
            "embedding needs a connected graph; extract the largest component first"
        )
    fac = incidence_factorization(G)
    proj = sample_projection(k_rp, fac.m, seed)
    scaled = proj.matrix * np.sqrt(fac.weights)[None, :]
    Y = np.sqrt(G.volume) * (scaled @ fac.incidence)
    Y = np.ascontiguousarray(Y)

    L = laplacian(G)
    solver = _LaplacianSolver(L, tol=tol, precond=precond)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(solver.solve, Y))
    else:
        results = [solver.solve(row) for row in Y]

    coords = np.column_stack([x for x, _, _ in results])
    report = SolverReport(
        iterations=np.array([it for _, it, _ in results], dtype=np.int64),
        residuals=np.array([res for _, _, res in results]),
        tol=solver.tol,
        preconditioner=solver.precond,
    )
    emb = Embedding(coords=coords, kind="approximate", source_volume=G.volume)
    return emb, report


def approx_commute(emb: Embedding, i: int, j: int) -> float:
    """Squared Euclidean distance between embedding rows i and j."""
    n = emb.n
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"node pair ({i}, {j}) out of range for {n} nodes")
    diff = emb.coords[i] - emb.coords[j]
    return float(diff @ diff)


def export_embedding_csv(emb: Embedding, path) -> None:
    """Write embedding coordinates as CSV, one node per row."""
    np.savetxt(path, emb.coords, delimiter=",", fmt="%.17g")
