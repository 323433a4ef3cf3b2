"""Clustering accuracy via optimal label matching, and run reports."""

from __future__ import annotations

import json
import time
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

__all__ = ["hungarian_accuracy", "RunReport", "StageTimer", "assemble_report"]


def hungarian_accuracy(pred, ref) -> float:
    """Fraction of points matched under the best cluster-to-class assignment.

    Label sets may differ in size; the confusion matrix is zero-padded to
    square before solving the assignment problem.
    """
    pred = np.asarray(pred).ravel()
    ref = np.asarray(ref).ravel()
    if len(pred) != len(ref):
        raise ValueError(f"label vectors differ in length: {len(pred)} vs {len(ref)}")
    if len(pred) == 0:
        raise ValueError("label vectors are empty")
    _, p = np.unique(pred, return_inverse=True)
    _, r = np.unique(ref, return_inverse=True)
    kp, kr = p.max() + 1, r.max() + 1
    size = max(kp, kr)
    confusion = np.zeros((size, size), dtype=np.int64)
    np.add.at(confusion, (p, r), 1)
    rows, cols = linear_sum_assignment(confusion, maximize=True)
    return float(confusion[rows, cols].sum()) / len(pred)


class StageTimer:
    """Wall-clock timing of named pipeline stages."""

    def __init__(self):
        self._start = time.perf_counter()
        self.stages: dict[str, float] = {}

    @contextmanager
    def stage(self, name: str):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.stages[name] = self.stages.get(name, 0.0) + time.perf_counter() - t0

    def total(self) -> float:
        return time.perf_counter() - self._start


@dataclass
class RunReport:
    """Self-contained record of one clustering run."""

    params: dict
    timings: dict  # stage name -> seconds, plus "total"
    shares: dict = field(default_factory=dict)  # stage name -> percent of stage sum
    accuracy: dict | None = None  # e.g. {"vs_truth": ..., "vs_exact": ...}
    sizes: dict = field(default_factory=dict)  # n, m, d, k, k_rp

    def to_dict(self) -> dict:
        doc = {
            "params": self.params,
            "timings": self.timings,
            "shares": self.shares,
            "sizes": self.sizes,
        }
        if self.accuracy is not None:
            doc["accuracy"] = self.accuracy
        return doc

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    @classmethod
    def from_dict(cls, doc: dict) -> "RunReport":
        return cls(
            params=doc["params"],
            timings=doc["timings"],
            shares=doc.get("shares", {}),
            accuracy=doc.get("accuracy"),
            sizes=doc.get("sizes", {}),
        )

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        return cls.from_dict(json.loads(text))

    def summary(self) -> str:
        lines = [f"n={self.sizes.get('n')} m={self.sizes.get('m')} k={self.sizes.get('k')}"]
        for name, secs in self.timings.items():
            if name == "total":
                continue
            share = self.shares.get(name)
            pct = f" ({share:.1f}%)" if share is not None else ""
            lines.append(f"  {name:<10} {secs:8.3f}s{pct}")
        lines.append(f"  {'total':<10} {self.timings.get('total', 0.0):8.3f}s")
        if self.accuracy:
            for key, value in self.accuracy.items():
                lines.append(f"  accuracy {key}: {value:.4f}")
        return "\n".join(lines)


def assemble_report(timer: StageTimer, params: dict, sizes: dict,
                    accuracy: dict | None = None) -> RunReport:
    """Build a RunReport from recorded stages.

    Stage shares are percentages of the summed stage times; a zero-duration
    stage simply gets 0.
    """
    timings = dict(timer.stages)
    timings["total"] = timer.total()
    stage_sum = sum(v for k, v in timings.items() if k != "total")
    shares = {
        k: (100.0 * v / stage_sum if stage_sum > 0 else 0.0)
        for k, v in timings.items()
        if k != "total"
    }
    acc = dict(accuracy) if accuracy else None
    return RunReport(params=dict(params), timings=timings, shares=shares,
                     accuracy=acc, sizes=dict(sizes))
