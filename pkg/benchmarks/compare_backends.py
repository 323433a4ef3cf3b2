"""Benchmark the compiled kernels against the NumPy fallback.

Times the two hot loops (Jacobi-PCG Laplacian solves and Lloyd passes) on
the same inputs through both implementations and prints a table.

Usage: python benchmarks/compare_backends.py [--quick]
"""

import argparse
import time

import numpy as np

from ctcluster._accel import numpy_backend
from ctcluster.data import synth_shapes
from ctcluster.graph import build_graph, laplacian

try:
    from ctcluster._accel import _kernels as compiled
except ImportError:
    compiled = None


def time_call(fn, *args, repeat=3):
    best = np.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_pcg(n, n_rhs, tol):
    fm = synth_shapes("two_moons", n, 0.05, seed=0)
    G = build_graph(fm, "knn", k1=10)
    L = laplacian(G)
    parts = (L.indptr.astype(np.int64), L.indices.astype(np.int64),
             np.ascontiguousarray(L.data), 1.0 / L.diagonal())
    rng = np.random.default_rng(1)
    rhs = rng.choice([-1.0, 1.0], size=(n_rhs, n))
    rhs -= rhs.mean(axis=1, keepdims=True)

    def run(impl):
        iters = 0
        for y in rhs:
            _, it, resid = impl.pcg_jacobi(*parts, y, tol, 100000)
            assert resid <= tol
            iters += it
        return iters

    rows = []
    for name, impl in backends():
        secs, iters = time_call(run, impl, repeat=2)
        rows.append((name, secs, f"{iters} iters"))
    return f"pcg_jacobi  n={n} rhs={n_rhs} tol={tol:g}", rows


def bench_lloyd(n, dim, k, passes):
    rng = np.random.default_rng(2)
    X = rng.normal(size=(n, dim))
    C0 = X[rng.choice(n, k, replace=False)].copy()

    def run(impl):
        C = C0.copy()
        labels = np.empty(n, dtype=np.int64)
        sums = np.empty((k, dim))
        counts = np.empty(k, dtype=np.int64)
        cost = 0.0
        for _ in range(passes):
            cost = impl.lloyd_iter(X, C, labels, sums, counts)
            C = sums / np.maximum(counts, 1)[:, None]
        return cost

    rows = []
    for name, impl in backends():
        secs, cost = time_call(run, impl)
        rows.append((name, secs, f"cost {cost:.3e}"))
    return f"lloyd_iter  n={n} dim={dim} k={k} passes={passes}", rows


def backends():
    pairs = [("python", numpy_backend)]
    if compiled is not None:
        pairs.insert(0, ("compiled", compiled))
    return pairs


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true", help="smaller workloads")
    args = parser.parse_args()

    if compiled is None:
        print("note: compiled kernels unavailable, timing the fallback only")

    scale = 4 if args.quick else 1
    cases = [
        bench_pcg(4000 // scale, 20, 1e-6),
        bench_pcg(16000 // scale, 10, 1e-6),
        bench_lloyd(40000 // scale, 50, 10, 5),
        bench_lloyd(8000 // scale, 8, 50, 10),
    ]
    for title, rows in cases:
        print(f"\n{title}")
        base = rows[-1][1]  # python timing
        for name, secs, extra in rows:
            speedup = f"  x{base / secs:5.2f} vs python" if name != "python" else ""
            print(f"  {name:<9} {secs:8.4f}s  {extra}{speedup}")


if __name__ == "__main__":
    main()
