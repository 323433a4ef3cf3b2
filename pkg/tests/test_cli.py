"""End-to-end tests of the command-line interface."""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from ctcluster.cli import RunConfig, main, run_bench, run_cluster, run_sweep


def run(argv):
    return main(argv)


class TestClusterCommand:
    def test_synthetic_moons_end_to_end(self, tmp_path):
        out = str(tmp_path / "run")
        code = run(["cluster", "--kind", "synth:two_moons", "--n", "400",
                    "--seed", "3", "--threads", "1", "--out", out])
        assert code == 0
        labels = np.loadtxt(out + ".labels.txt", dtype=np.int64)
        assert labels.shape == (400,)
        assert set(labels.tolist()) <= {0, 1}
        report = json.load(open(out + ".report.json"))
        assert report["params"]["pipeline"] == "cesc"
        assert report["params"]["k"] == 2  # inferred from the synthetic kind
        assert report["sizes"]["n"] == 400
        assert 0.9 <= report["accuracy"]["vs_truth"] <= 1.0

    def test_report_validates_against_schema(self, tmp_path):
        jsonschema = pytest.importorskip("jsonschema")
        out = str(tmp_path / "run")
        assert run(["cluster", "--kind", "synth:two_moons", "--n", "300",
                    "--threads", "1", "--out", out]) == 0
        schema = json.load(open("docs/report.schema.json"))
        jsonschema.validate(json.load(open(out + ".report.json")), schema)

    def test_exact_pipeline(self, tmp_path):
        out = str(tmp_path / "run")
        code = run(["cluster", "--kind", "synth:two_moons", "--n", "300",
                    "--pipeline", "exact:njw", "--threads", "1", "--out", out])
        assert code == 0
        report = json.load(open(out + ".report.json"))
        assert report["params"]["pipeline"] == "exact"
        assert report["params"]["variant"] == "njw"
        assert report["params"]["k_rp"] is None

    def test_reference_accuracy_reported(self, tmp_path):
        out = str(tmp_path / "run")
        code = run(["cluster", "--kind", "synth:two_moons", "--n", "400",
                    "--reference", "exact", "--threads", "1", "--out", out])
        assert code == 0
        report = json.load(open(out + ".report.json"))
        assert 0.0 <= report["accuracy"]["vs_exact"] <= 1.0

    def test_csv_input_with_labels(self, tmp_path):
        from ctcluster.data import synth_shapes

        fm = synth_shapes("two_moons", 400, 0.05, seed=5)
        path = tmp_path / "data.csv"
        with open(path, "w") as fh:
            for row, lab in zip(fm.values, fm.labels):
                fh.write(f"{row[0]},{row[1]},{lab}\n")
        out = str(tmp_path / "run")
        code = run(["cluster", "--input", str(path), "--label-column", "-1",
                    "--k", "2", "--threads", "1", "--out", out])
        assert code == 0
        report = json.load(open(out + ".report.json"))
        assert report["sizes"]["n"] == 400
        assert report["accuracy"]["vs_truth"] >= 0.95

    def test_edge_list_input(self, tmp_path):
        path = tmp_path / "g.txt"
        lines = [f"{i} {i + 1}" for i in range(29)] + ["4 9", "12 20"]
        path.write_text("\n".join(lines) + "\n")
        out = str(tmp_path / "run")
        code = run(["cluster", "--input", str(path), "--kind", "edgelist",
                    "--k", "2", "--krp", "16", "--threads", "1", "--out", out])
        assert code == 0
        labels = np.loadtxt(out + ".labels.txt", dtype=np.int64)
        assert labels.shape == (30,)

    def test_dropped_nodes_marked(self, tmp_path):
        path = tmp_path / "g.txt"
        path.write_text("0 1\n1 2\n2 0\n3 4\n")  # triangle plus stray edge
        out = str(tmp_path / "run")
        code = run(["cluster", "--input", str(path), "--kind", "edgelist",
                    "--k", "2", "--krp", "4", "--threads", "1", "--out", out])
        assert code == 0
        labels = np.loadtxt(out + ".labels.txt", dtype=np.int64)
        assert (labels[3:] == -1).all()
        assert (labels[:3] >= 0).all()

    def test_failure_is_clean(self, tmp_path, capsys):
        out = str(tmp_path / "run")
        code = run(["cluster", "--input", str(tmp_path / "missing.csv"),
                    "--out", out])
        assert code == 1
        assert "error:" in capsys.readouterr().err
        assert not os.path.exists(out + ".labels.txt")
        assert not os.path.exists(out + ".report.json")

    def test_partial_outputs_removed_on_late_failure(self, tmp_path, monkeypatch):
        import ctcluster.cli as cli_mod

        out = str(tmp_path / "run")

        def boom(cfg, path, text):
            cfg.written.append(path)
            with open(path, "w") as fh:
                fh.write("partial")
            raise RuntimeError("disk full")

        monkeypatch.setattr(cli_mod, "_write_text", boom)
        code = run(["cluster", "--kind", "synth:blobs", "--n", "60",
                    "--noise", "1.0", "--threads", "1", "--out", out])
        assert code == 1
        assert not os.path.exists(out + ".labels.txt")


class TestDeterminism:
    def test_byte_identical_across_thread_counts(self, tmp_path):
        outs = []
        for threads, name in [("1", "a"), ("0", "b")]:  # 0 = machine parallelism
            out = str(tmp_path / name)
            assert run(["cluster", "--kind", "synth:two_moons", "--n", "500",
                        "--seed", "11", "--threads", threads, "--out", out]) == 0
            outs.append(open(out + ".labels.txt", "rb").read())
        assert outs[0] == outs[1]

    def test_byte_identical_across_reruns(self, tmp_path):
        blobs = []
        for name in ("a", "b"):
            out = str(tmp_path / name)
            assert run(["cluster", "--kind", "synth:text_mask", "--n", "300",
                        "--seed", "4", "--k", "10", "--threads", "2",
                        "--out", out]) == 0
            blobs.append(open(out + ".labels.txt", "rb").read())
        assert blobs[0] == blobs[1]


class TestOtherCommands:
    def test_embed_writes_csv(self, tmp_path):
        out = str(tmp_path / "emb")
        code = run(["embed", "--kind", "synth:two_moons", "--n", "200",
                    "--krp", "8", "--threads", "1", "--out", out])
        assert code == 0
        coords = np.loadtxt(out + ".embedding.csv", delimiter=",")
        assert coords.shape == (200, 8)

    def test_eval_command(self, tmp_path, capsys):
        a = tmp_path / "a.txt"
        b = tmp_path / "b.txt"
        a.write_text("0\n0\n1\n1\n")
        b.write_text("1\n1\n0\n0\n")
        assert run(["eval", str(a), str(b)]) == 0
        assert "accuracy = 1.000000" in capsys.readouterr().out

    def test_eval_length_mismatch_fails(self, tmp_path, capsys):
        a = tmp_path / "a.txt"
        b = tmp_path / "b.txt"
        a.write_text("0\n1\n")
        b.write_text("0\n")
        assert run(["eval", str(a), str(b)]) == 1
        assert "error:" in capsys.readouterr().err

    def test_sweep_single_row(self, tmp_path):
        out = str(tmp_path / "sweep")
        code = run(["sweep-krp", "--kind", "synth:two_moons", "--n", "300",
                    "--krp-list", "25", "--threads", "1", "--out", out])
        assert code == 0
        lines = open(out + ".sweep.csv").read().strip().splitlines()
        assert lines[0] == "k_rp,accuracy,seconds,status"
        assert len(lines) == 2
        assert lines[1].startswith("25,")

    def test_sweep_continues_after_row_error(self, tmp_path):
        cfg = RunConfig(kind="synth:two_moons", n=250, threads=1)
        rows = run_sweep(cfg, [0, 20])  # k_rp=0 is invalid and must not abort
        assert rows[0]["status"].startswith("error")
        assert rows[1]["status"] == "ok"

    def test_bench_tiny(self, tmp_path):
        out = str(tmp_path / "bench")
        code = run(["bench", "--kind", "synth:two_moons",
                    "--sizes", "200,400", "--threads", "1", "--out", out])
        assert code == 0
        lines = open(out + ".bench.csv").read().strip().splitlines()
        assert lines[0].startswith("n,m,graph_seconds")
        assert len(lines) == 3

    def test_bench_requires_synthetic(self):
        with pytest.raises(ValueError, match="synthetic"):
            run_bench(RunConfig(kind="csv", input="x.csv"), [100])

    def test_console_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "ctcluster.cli", "--help"],
                              capture_output=True, text=True)
        assert proc.returncode == 0
        assert "cluster" in proc.stdout


class TestRunConfig:
    def test_pipeline_parsing(self):
        assert RunConfig(pipeline="cesc").resolved_pipeline() == ("cesc", "njw")
        assert RunConfig(pipeline="exact").resolved_pipeline() == ("exact", "njw")
        assert RunConfig(pipeline="exact:unnorm").resolved_pipeline() == ("exact", "unnorm")
        with pytest.raises(ValueError):
            RunConfig(pipeline="fast").resolved_pipeline()

    def test_defaults_match_published_settings(self):
        cfg = RunConfig()
        assert cfg.k1 == 10
        assert cfg.krp == 50
        assert cfg.reps == 5
        assert cfg.max_iter == 100

    def test_kind_auto_detection(self):
        from ctcluster.cli import _resolve_kind

        assert _resolve_kind(RunConfig(input="a.csv")) == "csv"
        assert _resolve_kind(RunConfig(input="a.edges")) == "edgelist"
        with pytest.raises(ValueError):
            _resolve_kind(RunConfig())
