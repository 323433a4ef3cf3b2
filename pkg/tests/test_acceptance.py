"""Acceptance suite.

Each test implements one numbered acceptance criterion at its stated
tolerance and prints one PASS line (run with ``pytest -s`` to see them;
a failed assertion is the FAIL case).
"""

import time

import numpy as np
import pytest

from ctcluster.cli import RunConfig, main as cli_main, run_bench
from ctcluster.data import synth_shapes
from ctcluster.embedding import _LaplacianSolver, build_embedding
from ctcluster.evaluation import hungarian_accuracy
from ctcluster.exact import (
    commute_matrix,
    exact_commute_embedding,
    hitting_times,
    spectral_embedding,
)
from ctcluster.graph import build_graph, incidence_factorization, laplacian
from ctcluster.kmeans import KMeansConfig, kmeans_cluster
from helpers import (
    pairwise_sq_dists,
    path_graph,
    random_connected_graph,
    single_edge_graph,
    triangle_graph,
)
from test_evaluation import exhaustive_accuracy


def ok(criterion, detail):
    print(f"\nACCEPTANCE {criterion}: PASS  ({detail})")


@pytest.fixture(scope="module")
def moons_graph():
    fm = synth_shapes("two_moons", 1000, 0.05, seed=0)
    return fm, build_graph(fm, "knn", k1=10)


@pytest.fixture(scope="module")
def text_graph():
    fm = synth_shapes("text_mask", 2000, 0.05, seed=0)
    return fm, build_graph(fm, "knn", k1=10)


@pytest.fixture(scope="module")
def moons_reference(moons_graph):
    _, G = moons_graph
    return spectral_embedding(G, 2, "njw")


@pytest.fixture(scope="module")
def text_reference(text_graph):
    _, G = text_graph
    return spectral_embedding(G, 10, "njw")


def cesc_labels(G, k, k_rp, seed):
    emb, _ = build_embedding(G, k_rp=k_rp, seed=seed)
    return kmeans_cluster(emb.coords, KMeansConfig(k=k, seed=seed)).labels


def exact_labels(U, k, seed):
    return kmeans_cluster(U, KMeansConfig(k=k, seed=seed)).labels


def test_criterion_1_exact_commute_identities():
    start = time.perf_counter()
    rng = np.random.default_rng(10)
    for trial in range(20):
        n = int(rng.integers(20, 101))
        G = random_connected_graph(n, int(rng.integers(n // 2, 2 * n)), seed=trial)
        C = commute_matrix(G)
        assert np.abs(np.diag(C)).max() == 0.0
        np.testing.assert_allclose(C, C.T, atol=1e-9 * max(C.max(), 1.0))
        D = np.sqrt(C)
        for k in range(n):
            assert (D <= D[:, [k]] + D[[k], :] + 1e-9 * D.max()).all()
        targets = rng.choice(n, size=4, replace=False)
        hits = {t: hitting_times(G, t) for t in targets}
        for a in targets:
            for b in targets:
                if a < b:
                    total = hits[b][a] + hits[a][b]
                    assert total == pytest.approx(C[a, b], rel=1e-6)
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0
    ok(1, f"20 graphs, triangle+symmetry+hitting consistency, {elapsed:.1f}s")


def test_criterion_2_analytic_values():
    for w in (0.3, 1.0, 2.5):
        G = single_edge_graph(w)
        C = commute_matrix(G)
        assert C[0, 1] == pytest.approx(2.0, abs=1e-9)
    P = path_graph([1.0, 1.0])
    assert commute_matrix(P)[0, 2] == pytest.approx(8.0, abs=1e-9)
    assert hitting_times(P, 2)[0] == pytest.approx(4.0, abs=1e-9)
    T = triangle_graph(1.0)
    for t in range(3):
        h = hitting_times(T, t)
        for i in range(3):
            if i != t:
                assert h[i] == pytest.approx(2.0, abs=1e-9)
    ok(2, "single edge c=2 (any w), path c02=8 h02=4, triangle h=2, to 1e-9")


def test_criterion_3_exact_embedding_matches_pinv():
    worst = 0.0
    for n, extra, seed in ((50, 90, 0), (120, 260, 1), (200, 420, 2)):
        G = random_connected_graph(n, extra, seed=seed)
        emb = exact_commute_embedding(G)
        d2 = pairwise_sq_dists(emb.coords)
        C = commute_matrix(G)
        mask = ~np.eye(n, dtype=bool)
        worst = max(worst, (np.abs(d2[mask] - C[mask]) / C[mask]).max())
    assert worst <= 1e-8
    ok(3, f"embedding distances vs pseudoinverse commute, max rel {worst:.2e}")


def test_criterion_4_incidence_factorization():
    worst = 0.0
    for seed in range(50):
        n = 20 + (seed % 30)
        G = random_connected_graph(n, 2 * n, seed=seed)
        fac = incidence_factorization(G)
        L = laplacian(G).toarray()
        L2 = (fac.incidence.T @ fac.weight_matrix() @ fac.incidence).toarray()
        rel = np.abs(L2 - L).max() / np.abs(L).max()
        worst = max(worst, rel)
    assert worst <= 1e-12
    ok(4, f"B'WB = L on 50 graphs, worst relative gap {worst:.2e}")


def test_criterion_5_solver_against_pseudoinverse():
    worst_err, worst_resid = 0.0, 0.0
    for seed in range(5):
        G = random_connected_graph(50, 110, seed=40 + seed)
        L = laplacian(G)
        Lp = np.linalg.pinv(L.toarray(), hermitian=True)
        solver = _LaplacianSolver(L, tol=1e-8, precond="jacobi")
        rng = np.random.default_rng(seed)
        for _ in range(10):
            y = rng.normal(size=50)
            y -= y.mean()
            z, _, resid = solver.solve(y)
            expected = Lp @ y
            err = np.linalg.norm(z - expected) / np.linalg.norm(expected)
            worst_err = max(worst_err, err)
            worst_resid = max(worst_resid, resid)
    assert worst_err <= 1e-6
    assert worst_resid <= 1e-8
    ok(5, f"50 solves: worst rel err {worst_err:.2e}, worst residual {worst_resid:.2e}")


def test_criterion_6_distortion_bounds():
    start = time.perf_counter()
    fm = synth_shapes("two_moons", 300, 0.05, seed=1)
    G = build_graph(fm, "knn", k1=10)
    C = commute_matrix(G)
    mask = ~np.eye(G.n, dtype=bool)

    def median_rel_err(k_rp, seed):
        emb, _ = build_embedding(G, k_rp=k_rp, seed=seed, tol=1e-8)
        rel = np.abs(pairwise_sq_dists(emb.coords)[mask] - C[mask]) / C[mask]
        return np.median(rel), np.quantile(rel, 0.99)

    med, p99 = median_rel_err(400, seed=0)
    assert med <= 0.15
    assert p99 <= 0.5

    med_200 = np.median([median_rel_err(200, s)[0] for s in range(5)])
    med_25 = np.median([median_rel_err(25, s)[0] for s in range(5)])
    assert med_200 <= med_25
    elapsed = time.perf_counter() - start
    assert elapsed < 60.0
    ok(6, f"k_rp=400: median {med:.3f} p99 {p99:.3f}; "
          f"k_rp 200 vs 25 medians {med_200:.3f} <= {med_25:.3f}; {elapsed:.0f}s")


def test_criterion_7_clustering_parity(moons_graph, text_graph,
                                       moons_reference, text_reference):
    results = {}
    for name, (fm, G), U, k in (("two_moons", moons_graph, moons_reference, 2),
                                ("text_mask", text_graph, text_reference, 10)):
        scores = [
            hungarian_accuracy(cesc_labels(G, k, 50, seed), exact_labels(U, k, seed))
            for seed in range(10)
        ]
        results[name] = float(np.median(scores))
        assert results[name] >= 0.95, (name, scores)
    ok(7, "median parity vs exact spectral: "
          + ", ".join(f"{k}={v:.3f}" for k, v in results.items()))


def test_criterion_8_krp_flatness(moons_graph, moons_reference):
    _, G = moons_graph
    U = moons_reference
    medians = {}
    for k_rp in (50, 100, 200):
        scores = [
            hungarian_accuracy(cesc_labels(G, 2, k_rp, seed), exact_labels(U, 2, seed))
            for seed in range(5)
        ]
        medians[k_rp] = float(np.median(scores))
    spread = max(medians.values()) - min(medians.values())
    assert spread <= 0.05, medians
    ok(8, f"accuracy medians {medians}, spread {spread:.3f} <= 0.05")


def test_criterion_9_near_linear_embedding_scaling():
    start = time.perf_counter()
    cfg = RunConfig(kind="synth:two_moons", noise=0.05, seed=0)
    rows, alpha = run_bench(cfg, [1000, 2000, 4000, 8000])
    elapsed = time.perf_counter() - start
    assert elapsed < 300.0
    assert alpha <= 1.3, rows
    ok(9, f"embedding time exponent alpha={alpha:.3f} <= 1.3, {elapsed:.0f}s")


def test_criterion_10_hungarian_equals_exhaustive():
    rng = np.random.default_rng(7)
    for _ in range(100):
        k = int(rng.integers(2, 7))
        n = int(rng.integers(k, 30))
        pred = rng.integers(0, k, n)
        ref = rng.integers(0, k, n)
        assert hungarian_accuracy(pred, ref) == pytest.approx(
            exhaustive_accuracy(pred, ref))
    perm = np.array([3, 0, 1, 2])
    labels = rng.integers(0, 4, 60)
    assert hungarian_accuracy(perm[labels], labels) == 1.0
    ok(10, "100 random instances match the exhaustive oracle; permutations score 1.0")


def test_criterion_11_byte_identical_determinism(tmp_path):
    blobs = []
    for threads, name in (("1", "t1"), ("0", "tmax"), ("1", "t1b")):
        out = str(tmp_path / name)
        code = cli_main(["cluster", "--kind", "synth:two_moons", "--n", "600",
                         "--seed", "13", "--threads", threads, "--out", out])
        assert code == 0
        blobs.append(open(out + ".labels.txt", "rb").read())
    assert blobs[0] == blobs[1] == blobs[2]
    ok(11, "labels byte-identical at 1 thread, max threads, and on rerun")
