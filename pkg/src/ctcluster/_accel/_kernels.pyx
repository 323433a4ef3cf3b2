# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops.

Two kernels dominate the pipeline's runtime: the Jacobi-preconditioned
conjugate gradient solve against a graph Laplacian, and the Lloyd
assignment/accumulation step of k-means. Both run without the GIL so
independent solves and replications can use real threads.
"""

from libc.math cimport sqrt
from libc.stdint cimport int64_t

import numpy as np


cdef void _matvec(const int64_t[::1] indptr, const int64_t[::1] indices,
                  const double[::1] data, const double[::1] x,
                  double[::1] out) noexcept nogil:
    cdef Py_ssize_t i, j, n = out.shape[0]
    cdef double acc
    for i in range(n):
        acc = 0.0
        for j in range(indptr[i], indptr[i + 1]):
            acc += data[j] * x[indices[j]]
        out[i] = acc


cdef double _dot(const double[::1] a, const double[::1] b) noexcept nogil:
    cdef Py_ssize_t i
    cdef double acc = 0.0
    for i in range(a.shape[0]):
        acc += a[i] * b[i]
    return acc


cdef void _demean(double[::1] a) noexcept nogil:
    cdef Py_ssize_t i, n = a.shape[0]
    cdef double mean = 0.0
    for i in range(n):
        mean += a[i]
    mean /= n
    for i in range(n):
        a[i] -= mean


cdef void _copy(double[::1] dst, const double[::1] src) noexcept nogil:
    cdef Py_ssize_t i
    for i in range(dst.shape[0]):
        dst[i] = src[i]


def pcg_jacobi(indptr, indices, data, inv_diag, y, double tol, long max_iter):
    """Solve L x = y for a single-nullspace Laplacian, y orthogonal to ones.

    Search directions stay orthogonal to the nullspace because the
    preconditioned residual is demeaned each iteration. Convergence of the
    recursive residual is confirmed against the true residual; on
    disagreement the iteration restarts from the true one. Returns
    (x, iterations, true relative residual); the caller decides whether a
    residual miss is an error.
    """
    cdef const int64_t[::1] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const int64_t[::1] ix = np.ascontiguousarray(indices, dtype=np.int64)
    cdef const double[::1] dv = np.ascontiguousarray(data, dtype=np.float64)
    cdef const double[::1] minv = np.ascontiguousarray(inv_diag, dtype=np.float64)
    y_arr = np.ascontiguousarray(y, dtype=np.float64)
    cdef const double[::1] yv = y_arr
    cdef Py_ssize_t n = y_arr.shape[0]

    x_arr = np.zeros(n)
    cdef double[::1] x = x_arr
    cdef double[::1] r = y_arr.copy()
    cdef double[::1] z = np.empty(n)
    cdef double[::1] p = np.empty(n)
    cdef double[::1] q = np.empty(n)

    cdef double normy, rz = 0.0, rz_new, alpha, beta, pq, resid
    cdef Py_ssize_t i
    cdef long iters = 0
    cdef bint fresh = True

    with nogil:
        normy = sqrt(_dot(yv, yv))
        if normy > 0.0:
            while iters < max_iter:
                if fresh:
                    for i in range(n):
                        z[i] = minv[i] * r[i]
                    _demean(z)
                    _copy(p, z)
                    rz = _dot(r, z)
                    fresh = False
                _matvec(ip, ix, dv, p, q)
                pq = _dot(p, q)
                if pq <= 0.0:
                    break
                alpha = rz / pq
                for i in range(n):
                    x[i] += alpha * p[i]
                    r[i] -= alpha * q[i]
                iters += 1
                if sqrt(_dot(r, r)) <= tol * normy:
                    _matvec(ip, ix, dv, x, q)
                    for i in range(n):
                        r[i] = yv[i] - q[i]
                    if sqrt(_dot(r, r)) <= tol * normy:
                        break
                    fresh = True
                    continue
                for i in range(n):
                    z[i] = minv[i] * r[i]
                _demean(z)
                rz_new = _dot(r, z)
                beta = rz_new / rz
                rz = rz_new
                for i in range(n):
                    p[i] = z[i] + beta * p[i]
            _demean(x)
            _matvec(ip, ix, dv, x, q)
            for i in range(n):
                r[i] = yv[i] - q[i]
            resid = sqrt(_dot(r, r)) / normy
        else:
            resid = 0.0

    return x_arr, int(iters), resid


def lloyd_iter(X, centroids, labels_out, sums_out, counts_out):
    """One Lloyd pass: assign points, accumulate per-cluster sums/counts.

    Ties go to the lower cluster id. Accumulation runs in point order, so
    the result does not depend on how callers schedule surrounding work.
    Returns the summed squared distance of points to assigned centroids.
    """
    cdef const double[:, ::1] xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef const double[:, ::1] cv = np.ascontiguousarray(centroids, dtype=np.float64)
    cdef int64_t[::1] lab = labels_out
    cdef double[:, ::1] sums = sums_out
    cdef int64_t[::1] counts = counts_out
    cdef Py_ssize_t n = xv.shape[0], d = xv.shape[1], k = cv.shape[0]
    cdef Py_ssize_t i, j, c, best
    cdef double acc, diff, bestd, cost = 0.0

    with nogil:
        for c in range(k):
            counts[c] = 0
            for j in range(d):
                sums[c, j] = 0.0
        for i in range(n):
            best = 0
            bestd = 0.0
            for j in range(d):
                diff = xv[i, j] - cv[0, j]
                bestd += diff * diff
            for c in range(1, k):
                acc = 0.0
                for j in range(d):
                    diff = xv[i, j] - cv[c, j]
                    acc += diff * diff
                    if acc >= bestd:
                        break
                if acc < bestd:
                    bestd = acc
                    best = c
            lab[i] = best
            cost += bestd
            counts[best] += 1
            for j in range(d):
                sums[best, j] += xv[i, j]
    return cost
