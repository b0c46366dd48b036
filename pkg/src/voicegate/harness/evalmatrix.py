"""Accuracy tables comparing clean-text and noisy-channel evaluation, and
binary sensitive-class metrics under a policy.

The same corrupted transcript is used for every model of a platform: the
channel is a pure function of (tokens, spec), so each utterance corrupts
identically across cells and differences between cells are attributable to
the model, not the noise draw.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from ..noise import NoiseSpec, corrupt_text
from ..nlu.metrics import EvalReport, evaluate
from ..nlu.model import ClassifierModel, predict
from ..policy import Policy, Sensitivity
from ..taxonomy import Corpus, IntentLabel, Platform, TaxonomyAxis


@dataclass(frozen=True)
class MatrixCell:
    platform: Platform
    axis: TaxonomyAxis
    precision: str
    nlu_accuracy: float
    e2e_accuracy: float
    support: int

    def to_dict(self) -> dict:
        return {
            "platform": self.platform.value,
            "axis": self.axis.value,
            "precision": self.precision,
            "nlu_accuracy": self.nlu_accuracy,
            "e2e_accuracy": self.e2e_accuracy,
            "support": self.support,
        }


@dataclass(frozen=True)
class EvalMatrix:
    cells: tuple[MatrixCell, ...]
    target_wer: float
    noise_seed: int

    def cell(self, axis: TaxonomyAxis, precision: str) -> MatrixCell:
        for cell in self.cells:
            if cell.axis is axis and cell.precision == precision:
                return cell
        raise KeyError(f"no cell for ({axis.value}, {precision})")

    def to_dict(self) -> dict:
        return {
            "target_wer": self.target_wer,
            "noise_seed": self.noise_seed,
            "cells": [cell.to_dict() for cell in self.cells],
        }

    def render(self) -> str:
        header = f"{'task':32} {'precision':10} {'NLU':>8} {'E2E':>8} {'n':>6}"
        lines = [header, "-" * len(header)]
        for cell in self.cells:
            task = f"{cell.platform.value}/{cell.axis.value}"
            lines.append(
                f"{task:32} {cell.precision:10} {cell.nlu_accuracy:8.4f} "
                f"{cell.e2e_accuracy:8.4f} {cell.support:6d}"
            )
        return "\n".join(lines)


def eval_matrix(
    models: Sequence[ClassifierModel],
    test_corpus: Corpus,
    noise_spec: NoiseSpec,
) -> EvalMatrix:
    """NLU (clean) and E2E (corrupted) accuracy for every given model."""
    corrupted_by_platform: dict[Platform, list[str]] = {}
    reports: list[MatrixCell] = []
    for model in models:
        utterances = test_corpus.for_platform(model.platform)
        if model.platform not in corrupted_by_platform:
            corrupted_by_platform[model.platform] = [
                corrupt_text(u.text, noise_spec) for u in utterances
            ]
        nlu = evaluate(model, test_corpus)
        e2e = evaluate(model, test_corpus, texts_override=corrupted_by_platform[model.platform])
        reports.append(
            MatrixCell(
                platform=model.platform,
                axis=model.axis,
                precision=model.precision.value,
                nlu_accuracy=nlu.accuracy,
                e2e_accuracy=e2e.accuracy,
                support=len(utterances),
            )
        )
    return EvalMatrix(
        cells=tuple(reports), target_wer=noise_spec.target_wer, noise_seed=noise_spec.seed
    )


def eval_matrix_reports(
    model: ClassifierModel, test_corpus: Corpus, noise_spec: NoiseSpec
) -> tuple[EvalReport, EvalReport]:
    """Full NLU and E2E reports for one model (used for identity checks)."""
    utterances = test_corpus.for_platform(model.platform)
    corrupted = [corrupt_text(u.text, noise_spec) for u in utterances]
    return evaluate(model, test_corpus), evaluate(model, test_corpus, texts_override=corrupted)


# --- sensitive-class metrics --------------------------------------------------


@dataclass(frozen=True)
class SensitiveEvalReport:
    true_positives: int
    false_positives: int
    false_negatives: int
    true_negatives: int
    precision: float | None
    recall: float | None
    f1: float | None
    note: str = ""

    @property
    def gold_positives(self) -> int:
        return self.true_positives + self.false_negatives

    def to_dict(self) -> dict:
        return {
            "true_positives": self.true_positives,
            "false_positives": self.false_positives,
            "false_negatives": self.false_negatives,
            "true_negatives": self.true_negatives,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "note": self.note,
        }


def gold_sensitivity(policy: Policy, labels: Mapping[TaxonomyAxis, str]) -> bool:
    """Ground-truth sensitivity: any axis's gold label sensitive under policy."""
    for axis in policy.axis_priority:
        name = labels.get(axis, "Custom")
        if policy.sensitivity_of(IntentLabel(axis, name)) is Sensitivity.SENSITIVE:
            return True
    return False


def eval_sensitive(
    models: Mapping[TaxonomyAxis, ClassifierModel],
    test_corpus: Corpus,
    policy: Policy,
    texts_override: Sequence[str] | None = None,
) -> SensitiveEvalReport:
    """Binary policy-sensitive-vs-not classification metrics.

    Predicted and gold labels are fused the same way: sensitive when any
    axis's label maps to Sensitive under the policy (most-restrictive-wins).
    The runtime confidence gate is deliberately excluded; it measures
    calibration, not whether the classifier finds the sensitive classes.
    """
    platform = policy.platform
    utterances = test_corpus.for_platform(platform)
    tp = fp = fn = tn = 0
    for i, utt in enumerate(utterances):
        text = utt.text if texts_override is None else texts_override[i]
        predicted = any(
            policy.sensitivity_of(predict(models[axis], text).top_label)
            is Sensitivity.SENSITIVE
            for axis in policy.axis_priority
        )
        actual = gold_sensitivity(policy, utt.labels)
        if predicted and actual:
            tp += 1
        elif predicted and not actual:
            fp += 1
        elif not predicted and actual:
            fn += 1
        else:
            tn += 1

    notes = []
    precision = recall = f1 = None
    if tp + fp > 0:
        precision = tp / (tp + fp)
    else:
        notes.append("no positives predicted")
    if tp + fn > 0:
        recall = tp / (tp + fn)
    else:
        notes.append("no gold positives; recall vacuous")
    if precision is not None and recall is not None and precision + recall > 0:
        f1 = 2 * precision * recall / (precision + recall)
    return SensitiveEvalReport(
        true_positives=tp,
        false_positives=fp,
        false_negatives=fn,
        true_negatives=tn,
        precision=precision,
        recall=recall,
        f1=f1,
        note="; ".join(notes),
    )
