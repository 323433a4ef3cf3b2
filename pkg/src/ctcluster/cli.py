"""Command-line front end.

Subcommands compose the pipeline: ingest, similarity graph, embedding
(approximate or exact eigenvectors), k-means, evaluation. ``sweep-krp``
and ``bench`` wrap it for parameter sensitivity and scaling measurements.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import _accel
from .data import FeatureMatrix, load_edge_list, load_features, synth_cluster_count, synth_shapes
from .embedding import build_embedding, export_embedding_csv
from .evaluation import RunReport, StageTimer, assemble_report, hungarian_accuracy
from .exact import spectral_cluster_exact, spectral_embedding
from .graph import build_graph, edge_graph, largest_component
from .kmeans import KMeansConfig, kmeans_cluster

SYNTH_KINDS = ("two_moons", "blobs", "text_mask")


@dataclass
class RunConfig:
    input: str | None = None
    kind: str = "auto"  # auto | csv | edgelist | synth:<kind>
    k: int | None = None
    k1: int = 10
    krp: int = 50
    sigma: str = "median"  # "median" or a number as text
    seed: int = 0
    tol: float = 1e-6
    reps: int = 5
    max_iter: int = 100
    pipeline: str = "cesc"  # cesc | exact | exact:<variant>
    variant: str = "njw"
    threads: int = 0  # 0 = machine parallelism
    out: str = "ctcluster-run"
    graph_mode: str = "knn"  # knn | epsilon | full
    epsilon: float | None = None
    n: int = 1000
    noise: float = 0.05
    centers: int = 3
    has_header: bool = False
    label_column: int | None = None
    reference: str = "none"  # none | exact
    precond: str = "auto"
    written: list = field(default_factory=list)

    @property
    def workers(self) -> int:
        return self.threads if self.threads > 0 else (os.cpu_count() or 1)

    def resolved_pipeline(self) -> tuple[str, str]:
        if self.pipeline == "cesc":
            return "cesc", self.variant
        if self.pipeline == "exact":
            return "exact", self.variant
        if self.pipeline.startswith("exact:"):
            return "exact", self.pipeline.split(":", 1)[1]
        raise ValueError(f"unknown pipeline {self.pipeline!r}")

    def sigma_value(self):
        return "median" if self.sigma == "median" else float(self.sigma)


def _resolve_kind(cfg: RunConfig) -> str:
    if cfg.kind != "auto":
        return cfg.kind
    if cfg.input is None:
        raise ValueError("no input path; pass --input or a synthetic --kind")
    return "csv" if cfg.input.endswith(".csv") else "edgelist"


def _ingest(cfg: RunConfig):
    """Returns ("features", FeatureMatrix) or ("edges", EdgeList)."""
    kind = _resolve_kind(cfg)
    if kind.startswith("synth:"):
        shape = kind.split(":", 1)[1]
        if shape not in SYNTH_KINDS:
            raise ValueError(f"unknown synthetic kind {shape!r}; choose from {SYNTH_KINDS}")
        return "features", synth_shapes(shape, cfg.n, cfg.noise, cfg.seed, centers=cfg.centers)
    if cfg.input is None:
        raise ValueError("no input path given")
    if kind == "csv":
        return "features", load_features(cfg.input, cfg.has_header, cfg.label_column)
    if kind == "edgelist":
        return "edges", load_edge_list(cfg.input)
    raise ValueError(f"unknown kind {kind!r}")


def _default_k(cfg: RunConfig) -> int:
    if cfg.k is not None:
        return cfg.k
    kind = _resolve_kind(cfg)
    if kind.startswith("synth:"):
        return synth_cluster_count(kind.split(":", 1)[1], cfg.centers)
    return 2


def _graph_stage(cfg: RunConfig, source, payload):
    """Build the similarity graph and reduce to the largest component."""
    if source == "features":
        G = build_graph(payload, mode=cfg.graph_mode, k1=cfg.k1,
                        epsilon=cfg.epsilon, sigma=cfg.sigma_value(),
                        workers=cfg.workers)
        truth = payload.labels
        d = payload.d
    else:
        G = edge_graph(payload)
        truth = None
        d = None
    G, index_map = largest_component(G)
    kept = index_map >= 0
    if truth is not None:
        truth = truth[kept]
    return G, index_map, kept, truth, d


def _cluster_once(cfg: RunConfig, G, timer: StageTimer):
    """Embedding plus k-means for the configured pipeline."""
    pipeline, variant = cfg.resolved_pipeline()
    k = _default_k(cfg)
    embed_meta = {}
    if pipeline == "cesc":
        with timer.stage("embedding"):
            emb, solver_report = build_embedding(
                G, k_rp=cfg.krp, seed=cfg.seed, tol=cfg.tol,
                precond=cfg.precond, workers=cfg.workers)
        points = emb.coords
        embed_meta = {
            "preconditioner": solver_report.preconditioner,
            "max_residual": solver_report.max_residual,
            "mean_iterations": float(solver_report.iterations.mean()),
        }
    else:
        with timer.stage("embedding"):
            points = spectral_embedding(G, k, variant)
    with timer.stage("kmeans"):
        assignment = kmeans_cluster(
            points,
            KMeansConfig(k=k, replications=cfg.reps, max_iter=cfg.max_iter, seed=cfg.seed),
            workers=cfg.workers,
        )
    return assignment, embed_meta


def _params_dict(cfg: RunConfig, G, embed_meta) -> dict:
    pipeline, variant = cfg.resolved_pipeline()
    return {
        "input": cfg.input,
        "kind": _resolve_kind(cfg),
        "graph_mode": cfg.graph_mode,
        "k1": cfg.k1,
        "epsilon": cfg.epsilon,
        "sigma": G.build_meta.get("sigma"),
        "k": _default_k(cfg),
        "k_rp": cfg.krp if pipeline == "cesc" else None,
        "seed": cfg.seed,
        "tol": cfg.tol,
        "replications": cfg.reps,
        "max_iter": cfg.max_iter,
        "pipeline": pipeline,
        "variant": variant,
        "threads": cfg.workers,
        "backend": _accel.BACKEND,
        **embed_meta,
    }


def run_cluster(cfg: RunConfig):
    """Full pipeline; returns (labels over original input rows, RunReport)."""
    timer = StageTimer()
    source, payload = _ingest(cfg)
    with timer.stage("graph"):
        G, index_map, kept, truth, d = _graph_stage(cfg, source, payload)
    assignment, embed_meta = _cluster_once(cfg, G, timer)

    accuracy = {}
    pipeline, variant = cfg.resolved_pipeline()
    k = _default_k(cfg)
    if cfg.reference == "exact" and pipeline == "cesc":
        with timer.stage("reference"):
            ref = spectral_cluster_exact(
                G, k, variant,
                KMeansConfig(k=k, replications=cfg.reps, max_iter=cfg.max_iter, seed=cfg.seed),
                workers=cfg.workers,
            )
        accuracy["vs_exact"] = hungarian_accuracy(assignment.labels, ref.labels)
    if truth is not None:
        accuracy["vs_truth"] = hungarian_accuracy(assignment.labels, truth)

    sizes = {"n": G.n, "m": G.edge_count, "d": d, "k": k,
             "k_rp": cfg.krp if pipeline == "cesc" else None,
             "n_input": int(len(index_map))}
    report = assemble_report(timer, _params_dict(cfg, G, embed_meta), sizes,
                             accuracy or None)

    # one label per original input row; dropped (disconnected) rows get -1
    full = np.full(len(index_map), -1, dtype=np.int64)
    full[kept] = assignment.labels
    return full, report


def run_sweep(cfg: RunConfig, krp_list):
    """Accuracy/time of the approximate pipeline across projection counts.

    The reference labeling is the exact pipeline at the base seed; row i
    uses a seed derived from (seed, i) so rows are comparable across calls.
    Failures are recorded per row and the sweep continues.
    """
    source, payload = _ingest(cfg)
    G, _, _, _, _ = _graph_stage(cfg, source, payload)
    k = _default_k(cfg)
    _, variant = cfg.resolved_pipeline()
    ref = spectral_cluster_exact(
        G, k, variant,
        KMeansConfig(k=k, replications=cfg.reps, max_iter=cfg.max_iter, seed=cfg.seed),
        workers=cfg.workers,
    )
    rows = []
    for i, krp in enumerate(krp_list):
        row_seed = int(np.random.SeedSequence((cfg.seed, i)).generate_state(1)[0])
        timer = StageTimer()
        try:
            with timer.stage("run"):
                emb, _ = build_embedding(G, k_rp=krp, seed=row_seed, tol=cfg.tol,
                                         precond=cfg.precond, workers=cfg.workers)
                assignment = kmeans_cluster(
                    emb.coords,
                    KMeansConfig(k=k, replications=cfg.reps, max_iter=cfg.max_iter,
                                 seed=row_seed),
                    workers=cfg.workers,
                )
            acc = hungarian_accuracy(assignment.labels, ref.labels)
            rows.append({"k_rp": krp, "accuracy": acc,
                         "seconds": timer.stages["run"], "status": "ok"})
        except Exception as exc:  # noqa: BLE001 - per-row isolation is the contract
            rows.append({"k_rp": krp, "accuracy": None,
                         "seconds": timer.stages.get("run", 0.0),
                         "status": f"error: {exc}"})
    return rows


def run_bench(cfg: RunConfig, sizes):
    """Stage timings across synthetic sizes plus the embedding-time exponent."""
    kind = _resolve_kind(cfg)
    if not kind.startswith("synth:"):
        raise ValueError("bench needs a synthetic input kind (synth:...)")
    rows = []
    for n in sizes:
        sub = RunConfig(**{**cfg.__dict__, "n": int(n), "written": []})
        timer = StageTimer()
        source, payload = _ingest(sub)
        with timer.stage("graph"):
            G, _, _, _, _ = _graph_stage(sub, source, payload)
        _cluster_once(sub, G, timer)
        rows.append({
            "n": G.n,
            "m": G.edge_count,
            "graph_seconds": timer.stages["graph"],
            "embed_seconds": timer.stages["embedding"],
            "kmeans_seconds": timer.stages["kmeans"],
            "total_seconds": timer.total(),
        })
    logn = np.log([r["n"] for r in rows])
    logt = np.log([max(r["embed_seconds"], 1e-9) for r in rows])
    alpha = float(np.polyfit(logn, logt, 1)[0]) if len(rows) >= 2 else float("nan")

    totals = [r["total_seconds"] for r in rows]
    if any(b < a for a, b in zip(totals, totals[1:])):
        print("note: total time is not monotone across sizes", file=sys.stderr)
    last = rows[-1]
    if last["graph_seconds"] < max(last["embed_seconds"], last["kmeans_seconds"]):
        print("note: graph stage is not the largest at the top size", file=sys.stderr)
    return rows, alpha


def _write_text(cfg: RunConfig, path, text):
    cfg.written.append(path)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _write_labels(cfg: RunConfig, path, labels):
    _write_text(cfg, path, "".join(f"{int(v)}\n" for v in labels))


def _write_csv(cfg: RunConfig, path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for key in header:
            value = row[key]
            if value is None:
                cells.append("")
            elif isinstance(value, float):
                cells.append(f"{value:.6g}")
            else:
                cells.append(str(value))
        lines.append(",".join(cells))
    _write_text(cfg, path, "\n".join(lines) + "\n")


def _cmd_cluster(cfg: RunConfig):
    labels, report = run_cluster(cfg)
    _write_labels(cfg, cfg.out + ".labels.txt", labels)
    _write_text(cfg, cfg.out + ".report.json", report.to_json() + "\n")
    print(report.summary())
    return 0


def _cmd_sweep(cfg: RunConfig, krp_list):
    rows = run_sweep(cfg, krp_list)
    _write_csv(cfg, cfg.out + ".sweep.csv",
               ["k_rp", "accuracy", "seconds", "status"], rows)
    for row in rows:
        acc = "-" if row["accuracy"] is None else f"{row['accuracy']:.4f}"
        print(f"k_rp={row['k_rp']:<6} accuracy={acc:<8} {row['seconds']:.3f}s {row['status']}")
    return 0


def _cmd_bench(cfg: RunConfig, sizes):
    rows, alpha = run_bench(cfg, sizes)
    _write_csv(cfg, cfg.out + ".bench.csv",
               ["n", "m", "graph_seconds", "embed_seconds", "kmeans_seconds",
                "total_seconds"], rows)
    for row in rows:
        print(f"n={row['n']:<7} m={row['m']:<8} graph={row['graph_seconds']:.3f}s "
              f"embed={row['embed_seconds']:.3f}s kmeans={row['kmeans_seconds']:.3f}s")
    print(f"embedding time exponent alpha = {alpha:.3f}")
    return 0


def _cmd_embed(cfg: RunConfig):
    source, payload = _ingest(cfg)
    G, _, _, _, _ = _graph_stage(cfg, source, payload)
    emb, report = build_embedding(G, k_rp=cfg.krp, seed=cfg.seed, tol=cfg.tol,
                                  precond=cfg.precond, workers=cfg.workers)
    path = cfg.out + ".embedding.csv"
    cfg.written.append(path)
    export_embedding_csv(emb, path)
    print(f"wrote {emb.n} x {emb.dim} embedding to {path} "
          f"(max residual {report.max_residual:.2e})")
    return 0


def _cmd_eval(cfg: RunConfig, pred_path, ref_path):
    pred = np.loadtxt(pred_path, dtype=np.int64, ndmin=1)
    ref = np.loadtxt(ref_path, dtype=np.int64, ndmin=1)
    acc = hungarian_accuracy(pred, ref)
    print(f"accuracy = {acc:.6f}")
    return 0


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--input", default=None, help="CSV or edge-list file")
    p.add_argument("--kind", default="auto",
                   help="auto|csv|edgelist|synth:two_moons|synth:blobs|synth:text_mask")
    p.add_argument("--k", type=int, default=None,
                   help="clusters (default: synthetic ground truth count, else 2)")
    p.add_argument("--k1", type=int, default=10, help="nearest neighbors for the graph")
    p.add_argument("--krp", type=int, default=50, help="random projection rows")
    p.add_argument("--sigma", default="median", help="kernel bandwidth or 'median'")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-6, help="solver residual tolerance")
    p.add_argument("--reps", type=int, default=5, help="k-means replications")
    p.add_argument("--max-iter", type=int, default=100, help="k-means iteration cap")
    p.add_argument("--pipeline", default="cesc", help="cesc | exact[:variant]")
    p.add_argument("--variant", default="njw", help="unnorm | shi_malik | njw")
    p.add_argument("--threads", type=int, default=0, help="0 = machine parallelism")
    p.add_argument("--out", default="ctcluster-run", help="output path prefix")
    p.add_argument("--graph-mode", default="knn", choices=["knn", "epsilon", "full"])
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--n", type=int, default=1000, help="synthetic sample count")
    p.add_argument("--noise", type=float, default=0.05, help="synthetic noise level")
    p.add_argument("--centers", type=int, default=3, help="blob count for synth:blobs")
    p.add_argument("--has-header", action="store_true")
    p.add_argument("--label-column", type=int, default=None)
    p.add_argument("--reference", default="none", choices=["none", "exact"],
                   help="also run the exact pipeline and report agreement")
    p.add_argument("--precond", default="auto", choices=["auto", "jacobi", "amg", "none"])


def _cfg_from_args(args) -> RunConfig:
    return RunConfig(
        input=args.input, kind=args.kind, k=args.k, k1=args.k1, krp=args.krp,
        sigma=args.sigma, seed=args.seed, tol=args.tol, reps=args.reps,
        max_iter=args.max_iter, pipeline=args.pipeline, variant=args.variant,
        threads=args.threads, out=args.out, graph_mode=args.graph_mode,
        epsilon=args.epsilon, n=args.n, noise=args.noise, centers=args.centers,
        has_header=args.has_header, label_column=args.label_column,
        reference=args.reference, precond=args.precond,
    )


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ctcluster",
        description="Spectral clustering through commute-time embeddings",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_cluster = sub.add_parser("cluster", help="run the clustering pipeline")
    _add_common(p_cluster)

    p_sweep = sub.add_parser("sweep-krp", help="accuracy across projection counts")
    _add_common(p_sweep)
    p_sweep.add_argument("--krp-list", default="10,25,50,100,200",
                         help="comma-separated projection counts")

    p_bench = sub.add_parser("bench", help="scaling benchmark on synthetic data")
    _add_common(p_bench)
    p_bench.add_argument("--sizes", default="1000,2000,4000,8000",
                         help="comma-separated sample counts")

    p_embed = sub.add_parser("embed", help="emit the embedding only")
    _add_common(p_embed)

    p_eval = sub.add_parser("eval", help="compare two label files")
    p_eval.add_argument("pred", help="predicted labels, one integer per line")
    p_eval.add_argument("ref", help="reference labels, one integer per line")

    args = parser.parse_args(argv)
    cfg = _cfg_from_args(args) if args.command != "eval" else RunConfig()
    try:
        if args.command == "eval":
            return _cmd_eval(cfg, args.pred, args.ref)
        if args.command == "cluster":
            return _cmd_cluster(cfg)
        if args.command == "sweep-krp":
            krp_list = [int(v) for v in args.krp_list.split(",") if v]
            return _cmd_sweep(cfg, krp_list)
        if args.command == "bench":
            sizes = [int(v) for v in args.sizes.split(",") if v]
            return _cmd_bench(cfg, sizes)
        if args.command == "embed":
            return _cmd_embed(cfg)
        raise ValueError(f"unknown command {args.command!r}")
    except Exception as exc:  # noqa: BLE001 - single CLI error boundary
        for path in cfg.written:
            try:
                os.unlink(path)
            except OSError:
                pass
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
