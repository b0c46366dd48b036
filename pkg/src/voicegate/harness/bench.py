"""Latency benchmark of the local decision pipeline.

Timed in-process around the stages (normalize, per-axis predict, decide)
rather than over HTTP, pinned to one thread so timings are stable. Memory is
reported best-effort and is informational only.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from ..nlu.model import ClassifierModel, predict
from ..policy import Policy, decide
from ..text import normalize

DEFAULT_RUNS = 50
DEFAULT_WARMUP = 5


@dataclass(frozen=True)
class StageStats:
    mean_us: float
    std_us: float

    def to_dict(self) -> dict:
        return {"mean_us": self.mean_us, "std_us": self.std_us}


@dataclass(frozen=True)
class BenchReport:
    n_runs: int
    stages: Mapping[str, StageStats]
    model_file_sizes: Mapping[str, int]
    peak_rss_kb: int | None

    def to_dict(self) -> dict:
        return {
            "n_runs": self.n_runs,
            "stages": {name: stats.to_dict() for name, stats in self.stages.items()},
            "model_file_sizes": dict(self.model_file_sizes),
            "peak_rss_kb": self.peak_rss_kb,
        }

    def render(self) -> str:
        lines = [f"latency over {self.n_runs} runs (microseconds)"]
        for name, stats in self.stages.items():
            lines.append(f"  {name:10} mean {stats.mean_us:10.1f}  std {stats.std_us:10.1f}")
        for name, size in self.model_file_sizes.items():
            lines.append(f"  file {name}: {size} bytes")
        if self.peak_rss_kb is not None:
            lines.append(f"  peak rss: {self.peak_rss_kb} kb")
        return "\n".join(lines)


def _peak_rss_kb() -> int | None:
    try:
        import resource

        return int(resource.getrusage(resource.RUSAGE_SELF).ru_maxrss)
    except (ImportError, ValueError, OSError):
        return None


def bench_latency(
    models: Mapping,
    policy: Policy,
    texts: Sequence[str],
    n_runs: int = DEFAULT_RUNS,
    warmup: int = DEFAULT_WARMUP,
    model_file_sizes: Mapping[str, int] | None = None,
) -> BenchReport:
    """Wall-clock stage timings over exactly n_runs timed invocations.

    The total is measured around the whole pipeline invocation, so the sum
    of stage means can only fall short of the total by timer overhead, never
    exceed it beyond resolution.
    """
    if not texts:
        raise ValueError("bench needs at least one input text")
    if n_runs <= 0:
        raise ValueError(f"n_runs must be positive, got {n_runs}")
    axis_models: list[ClassifierModel] = [models[axis] for axis in policy.axis_priority]

    def one_pass(text: str) -> tuple[int, int, int, int]:
        t0 = time.perf_counter_ns()
        normalize(text)
        t1 = time.perf_counter_ns()
        predictions = {model.axis: predict(model, text) for model in axis_models}
        t2 = time.perf_counter_ns()
        decide(policy, predictions)
        t3 = time.perf_counter_ns()
        return t1 - t0, t2 - t1, t3 - t2, t3 - t0

    for i in range(warmup):
        one_pass(texts[i % len(texts)])

    samples = np.empty((n_runs, 4), dtype=np.float64)
    for i in range(n_runs):
        samples[i] = one_pass(texts[i % len(texts)])
    samples /= 1000.0  # ns -> us

    names = ("normalize", "nlu", "policy", "total")
    stages = {
        name: StageStats(mean_us=float(samples[:, j].mean()), std_us=float(samples[:, j].std()))
        for j, name in enumerate(names)
    }
    return BenchReport(
        n_runs=n_runs,
        stages=stages,
        model_file_sizes=dict(model_file_sizes or {}),
        peak_rss_kb=_peak_rss_kb(),
    )
