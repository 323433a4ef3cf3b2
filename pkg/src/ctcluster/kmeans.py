"""Lloyd k-means with seeded restarts.

The assignment/accumulation step runs on the compiled kernel when
available. Replications use independently derived seeds and may run on
threads; results are identical at any worker count because each
replication is internally sequential and the winner is picked by
(cost, replication index).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _accel

__all__ = ["KMeansConfig", "ClusterAssignment", "kmeans_cluster", "plusplus_init"]


@dataclass
class KMeansConfig:
    k: int
    replications: int = 5
    max_iter: int = 100
    seed: int = 0
    init: str = "plusplus"  # or "sample"

    def __post_init__(self):
        if self.k < 1 or self.replications < 1 or self.max_iter < 1:
            raise ValueError("k, replications and max_iter must all be >= 1")
        if self.init not in ("plusplus", "sample"):
            raise ValueError(f"unknown init {self.init!r}")


@dataclass
class ClusterAssignment:
    labels: np.ndarray
    cost: float
    iterations: int
    replication_index: int


def _as_points(points) -> np.ndarray:
    if hasattr(points, "coords"):
        X = points.coords
    elif hasattr(points, "values"):
        X = points.values
    else:
        X = points
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"points must be 2-D, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("points contain non-finite values")
    return X


def plusplus_init(points, k: int, seed) -> np.ndarray:
    """k-means++ seeding: first centroid uniform, the rest proportional to
    squared distance from the nearest chosen centroid."""
    X = _as_points(points)
    n = X.shape[0]
    if k > n:
        raise ValueError(f"cannot place {k} centroids on {n} points")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    centroids = np.empty((k, X.shape[1]))
    centroids[0] = X[rng.integers(n)]
    closest = ((X - centroids[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = closest.sum()
        if total > 0:
            idx = rng.choice(n, p=closest / total)
        else:
            # every point coincides with a chosen centroid
            idx = rng.integers(n)
        centroids[c] = X[idx]
        np.minimum(closest, ((X - centroids[c]) ** 2).sum(axis=1), out=closest)
    return centroids


def _sample_init(X, k, rng):
    return X[rng.choice(X.shape[0], size=k, replace=False)].copy()


def _repair_empty(X, centroids, labels, sums, counts):
    """Give each empty cluster the point currently farthest from its centroid.

    Donors are restricted to clusters holding at least two points (one
    always exists while any cluster is empty), so a repair never empties
    another cluster.
    """
    dist = ((X - centroids[labels]) ** 2).sum(axis=1)
    for cid in np.flatnonzero(counts == 0):
        idx = int(np.argmax(np.where(counts[labels] >= 2, dist, -1.0)))
        old = labels[idx]
        counts[old] -= 1
        sums[old] -= X[idx]
        labels[idx] = cid
        counts[cid] = 1
        sums[cid] = X[idx]
        dist[idx] = 0.0


def _lloyd_single(X, k, max_iter, init, rng, centroids0=None, cost_trace=None):
    n, d = X.shape
    if centroids0 is not None:
        centroids = np.ascontiguousarray(centroids0, dtype=np.float64)
    elif init == "plusplus":
        centroids = plusplus_init(X, k, rng)
    else:
        centroids = _sample_init(X, k, rng)
    labels = np.empty(n, dtype=np.int64)
    prev = np.full(n, -1, dtype=np.int64)
    sums = np.empty((k, d))
    counts = np.empty(k, dtype=np.int64)
    cost = np.inf
    iterations = 0
    for _ in range(max_iter):
        cost = _accel.lloyd_iter(X, centroids, labels, sums, counts)
        iterations += 1
        if cost_trace is not None:
            cost_trace.append(cost)
        repaired = bool(np.any(counts == 0))
        if repaired:
            _repair_empty(X, centroids, labels, sums, counts)
        if not repaired and np.array_equal(labels, prev):
            break
        prev[:] = labels
        centroids = sums / counts[:, None]
    return labels.copy(), float(cost), iterations


def kmeans_cluster(points, cfg: KMeansConfig, workers: int = 1) -> ClusterAssignment:
    """Best-of-replications Lloyd k-means.

    Each replication draws its generator from a child of the configured
    seed; assignment ties break toward the lower cluster id and empty
    clusters are repaired by farthest-point seizure, so runs are
    deterministic for a given (points, cfg).
    """
    X = _as_points(points)
    n = X.shape[0]
    if cfg.k > n:
        raise ValueError(f"k={cfg.k} exceeds the number of points {n}")
    children = np.random.SeedSequence(cfg.seed).spawn(cfg.replications)

    def run(rep: int):
        rng = np.random.default_rng(children[rep])
        return _lloyd_single(X, cfg.k, cfg.max_iter, cfg.init, rng)

    if workers > 1 and cfg.replications > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, range(cfg.replications)))
    else:
        results = [run(rep) for rep in range(cfg.replications)]

    best = min(range(cfg.replications), key=lambda r: (results[r][1], r))
    labels, cost, iterations = results[best]
    return ClusterAssignment(labels=labels, cost=cost, iterations=iterations,
                             replication_index=best)
