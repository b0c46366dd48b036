"""Reproduction harness: scenario suite, accuracy matrices, sensitive-class
metrics and latency benchmarks, shared by the CLI and the test suite."""

from __future__ import annotations

from .bench import BenchReport, bench_latency
from .evalmatrix import (
    EvalMatrix,
    MatrixCell,
    SensitiveEvalReport,
    eval_matrix,
    eval_matrix_reports,
    eval_sensitive,
    gold_sensitivity,
)
from .scenarios import ScenarioResult, ScenarioSpec, default_scenarios, run_scenarios

__all__ = [
    "BenchReport",
    "EvalMatrix",
    "MatrixCell",
    "ScenarioResult",
    "ScenarioSpec",
    "SensitiveEvalReport",
    "bench_latency",
    "default_scenarios",
    "eval_matrix",
    "eval_matrix_reports",
    "eval_sensitive",
    "gold_sensitivity",
    "run_scenarios",
]
