"""Pure-NumPy implementations of the compiled kernels.

Same contracts as ``_kernels``: the solver demeans the preconditioned
residual to stay orthogonal to the Laplacian nullspace and reports the true
residual; the Lloyd pass breaks ties toward the lower cluster id. Results
agree with the compiled kernels up to floating-point accumulation order.
"""

from __future__ import annotations

import numpy as np
from scipy import sparse


def pcg_jacobi(indptr, indices, data, inv_diag, y, tol, max_iter):
    n = len(y)
    L = sparse.csr_matrix((data, indices, indptr), shape=(n, n))
    y = np.asarray(y, dtype=np.float64)
    x = np.zeros(n)
    normy = np.linalg.norm(y)
    if normy == 0.0:
        return x, 0, 0.0
    r = y.copy()
    iters = 0
    fresh = True
    while iters < max_iter:
        if fresh:
            z = inv_diag * r
            z -= z.mean()
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
        z = inv_diag * r
        z -= z.mean()
        rz_new = r @ z
        beta = rz_new / rz
        rz = rz_new
        p = z + beta * p
    x -= x.mean()
    resid = np.linalg.norm(y - L @ x) / normy
    return x, iters, resid


def lloyd_iter(X, centroids, labels_out, sums_out, counts_out):
    k = centroids.shape[0]
    d2 = (
        np.sum(X**2, axis=1)[:, None]
        + np.sum(centroids**2, axis=1)[None, :]
        - 2.0 * (X @ centroids.T)
    )
    labels = d2.argmin(axis=1)
    labels_out[:] = labels
    counts_out[:] = np.bincount(labels, minlength=k)
    sums_out[:] = 0.0
    np.add.at(sums_out, labels, X)
    return float(((X - centroids[labels]) ** 2).sum())
