"""Parity between the compiled kernels and the NumPy fallback."""

import os
import subprocess
import sys

import numpy as np
import pytest

from ctcluster import _accel
from ctcluster._accel import numpy_backend
from ctcluster.graph import laplacian
from helpers import random_connected_graph

compiled = pytest.importorskip("ctcluster._accel._kernels",
                               reason="compiled kernels not built")


def csr_parts(L):
    return (L.indptr.astype(np.int64), L.indices.astype(np.int64),
            np.ascontiguousarray(L.data), 1.0 / L.diagonal())


class TestPcgParity:
    def test_solutions_agree(self):
        G = random_connected_graph(80, 200, seed=0)
        L = laplacian(G)
        parts = csr_parts(L)
        rng = np.random.default_rng(1)
        for _ in range(5):
            y = rng.normal(size=80)
            y -= y.mean()
            xc, ic, rc = compiled.pcg_jacobi(*parts, y, 1e-10, 10000)
            xp, ip, rp = numpy_backend.pcg_jacobi(*parts, y, 1e-10, 10000)
            assert rc <= 1e-10 and rp <= 1e-10
            scale = np.linalg.norm(xc)
            assert np.linalg.norm(xc - xp) <= 1e-6 * scale

    def test_zero_rhs(self):
        G = random_connected_graph(20, 30, seed=2)
        parts = csr_parts(laplacian(G))
        for impl in (compiled, numpy_backend):
            x, iters, resid = impl.pcg_jacobi(*parts, np.zeros(20), 1e-8, 100)
            np.testing.assert_array_equal(x, 0.0)
            assert iters == 0 and resid == 0.0


class TestLloydParity:
    def test_identical_assignment_and_stats(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(300, 5))
        C = X[rng.choice(300, 7, replace=False)].copy()
        out = {}
        for name, impl in (("c", compiled), ("py", numpy_backend)):
            labels = np.empty(300, dtype=np.int64)
            sums = np.empty((7, 5))
            counts = np.empty(7, dtype=np.int64)
            cost = impl.lloyd_iter(X, C, labels, sums, counts)
            out[name] = (labels.copy(), sums.copy(), counts.copy(), cost)
        np.testing.assert_array_equal(out["c"][0], out["py"][0])
        np.testing.assert_array_equal(out["c"][2], out["py"][2])
        np.testing.assert_allclose(out["c"][1], out["py"][1], rtol=1e-12)
        assert out["c"][3] == pytest.approx(out["py"][3], rel=1e-12)


class TestBackendSelection:
    def test_default_prefers_compiled(self):
        assert _accel.BACKEND == "compiled"

    def test_env_forces_python(self):
        code = ("import ctcluster._accel as a; print(a.BACKEND); "
                "import ctcluster as c, numpy as np; "
                "fm = c.synth_shapes('two_moons', 200, 0.05, 1); "
                "G = c.build_graph(fm, 'knn', k1=8); "
                "emb, rep = c.build_embedding(G, k_rp=6, seed=0); "
                "print(rep.max_residual <= rep.tol)")
        env = dict(os.environ, CTCLUSTER_BACKEND="python")
        proc = subprocess.run([sys.executable, "-c", code],
                              capture_output=True, text=True, env=env)
        assert proc.returncode == 0, proc.stderr
        assert proc.stdout.split() == ["python", "True"]

    def test_invalid_env_rejected(self):
        env = dict(os.environ, CTCLUSTER_BACKEND="fastest")
        proc = subprocess.run([sys.executable, "-c", "import ctcluster"],
                              capture_output=True, text=True, env=env)
        assert proc.returncode != 0
        assert "CTCLUSTER_BACKEND" in proc.stderr

    def test_backends_give_same_clustering(self):
        code = ("import ctcluster as c, numpy as np; "
                "fm = c.synth_shapes('two_moons', 400, 0.05, 2); "
                "G = c.build_graph(fm, 'knn', k1=10); "
                "emb, _ = c.build_embedding(G, k_rp=20, seed=3); "
                "a = c.kmeans_cluster(emb.coords, c.KMeansConfig(k=2, seed=4)); "
                "print(','.join(map(str, a.labels[:50])))")
        results = []
        for backend in ("compiled", "python"):
            env = dict(os.environ, CTCLUSTER_BACKEND=backend)
            proc = subprocess.run([sys.executable, "-c", code],
                                  capture_output=True, text=True, env=env)
            assert proc.returncode == 0, proc.stderr
            results.append(proc.stdout.strip())
        assert results[0] == results[1]
