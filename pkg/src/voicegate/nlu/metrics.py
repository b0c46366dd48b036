"""Evaluation of a classifier against a labeled corpus.

Everything is derived from one confusion matrix (rows = gold class, columns
= predicted class, both in model class order) so the report is internally
consistent by construction. Per-class precision and recall use the
zero-division-is-zero convention; macro averages skip classes with zero
support but those classes still appear in the per-class tables.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from ..errors import EmptyTestSetError
from ..taxonomy import Corpus
from .model import ClassifierModel, predict


@dataclass(frozen=True)
class EvalReport:
    classes: tuple[str, ...]
    confusion: np.ndarray
    accuracy: float
    precision: Mapping[str, float]
    recall: Mapping[str, float]
    f1: Mapping[str, float]
    support: Mapping[str, int]
    macro_precision: float
    macro_recall: float
    macro_f1: float
    precision_ecdf: tuple[float, ...]
    recall_ecdf: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "classes": list(self.classes),
            "confusion": self.confusion.tolist(),
            "accuracy": self.accuracy,
            "precision": dict(self.precision),
            "recall": dict(self.recall),
            "f1": dict(self.f1),
            "support": dict(self.support),
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "precision_ecdf": list(self.precision_ecdf),
            "recall_ecdf": list(self.recall_ecdf),
        }


def report_from_confusion(classes: Sequence[str], confusion: np.ndarray) -> EvalReport:
    confusion = np.asarray(confusion, dtype=np.int64)
    k = len(classes)
    if confusion.shape != (k, k):
        raise ValueError(f"confusion shape {confusion.shape} does not match {k} classes")
    total = int(confusion.sum())
    if total == 0:
        raise EmptyTestSetError("confusion matrix is empty")

    diag = np.diag(confusion).astype(np.float64)
    gold_counts = confusion.sum(axis=1).astype(np.float64)
    pred_counts = confusion.sum(axis=0).astype(np.float64)

    with np.errstate(divide="ignore", invalid="ignore"):
        prec = np.where(pred_counts > 0, diag / np.maximum(pred_counts, 1), 0.0)
        rec = np.where(gold_counts > 0, diag / np.maximum(gold_counts, 1), 0.0)
        denom = prec + rec
        f1 = np.where(denom > 0, 2 * prec * rec / np.maximum(denom, 1e-300), 0.0)

    evaluated = gold_counts > 0
    macro_p = float(prec[evaluated].mean()) if evaluated.any() else 0.0
    macro_r = float(rec[evaluated].mean()) if evaluated.any() else 0.0
    macro_f = float(f1[evaluated].mean()) if evaluated.any() else 0.0

    return EvalReport(
        classes=tuple(classes),
        confusion=confusion,
        accuracy=float(diag.sum() / total),
        precision={c: float(prec[i]) for i, c in enumerate(classes)},
        recall={c: float(rec[i]) for i, c in enumerate(classes)},
        f1={c: float(f1[i]) for i, c in enumerate(classes)},
        support={c: int(gold_counts[i]) for i, c in enumerate(classes)},
        macro_precision=macro_p,
        macro_recall=macro_r,
        macro_f1=macro_f,
        precision_ecdf=tuple(sorted(float(p) for p in prec[evaluated])),
        recall_ecdf=tuple(sorted(float(r) for r in rec[evaluated])),
    )


def evaluate(
    model: ClassifierModel,
    test_corpus: Corpus,
    texts_override: Sequence[str] | None = None,
) -> EvalReport:
    """Score the model on the corpus slice matching its platform.

    Utterances without the model's axis label count as gold Custom, the same
    convention training uses. ``texts_override`` substitutes the text fed to
    the model (gold labels unchanged); the noise channel uses this to score
    corrupted transcripts against clean labels.
    """
    utterances = test_corpus.for_platform(model.platform)
    if not utterances:
        raise EmptyTestSetError(f"no {model.platform.value} utterances in test corpus")
    if texts_override is not None and len(texts_override) != len(utterances):
        raise ValueError(
            f"texts_override length {len(texts_override)} != {len(utterances)} utterances"
        )

    index = {name: i for i, name in enumerate(model.classes)}
    confusion = np.zeros((len(model.classes), len(model.classes)), dtype=np.int64)
    for i, utt in enumerate(utterances):
        text = utt.text if texts_override is None else texts_override[i]
        gold = index[utt.label_for(model.axis)]
        pred = index[predict(model, text).top_label.name]
        confusion[gold, pred] += 1
    return report_from_confusion(model.classes, confusion)
