"""The frozen classifier artifact and the operations that produce/use it.

A ClassifierModel is immutable once built: training and quantization return
new instances, prediction never mutates. That makes models safe to share
across gateway worker threads without locks.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from ..errors import AlreadyQuantizedError, ClassWithZeroSamplesWarning, EmptyTrainingSetError
from ..taxonomy import Corpus, IntentLabel, Platform, TaxonomyAxis
from ..text import normalize
from .classifier import Hyperparams, IntentClassifier, softmax
from .features import featurize

FORMAT_VERSION = 1


class Precision(str, Enum):
    FLOAT32 = "float32"
    INT8 = "int8"


@dataclass(frozen=True)
class Prediction:
    """Full class ranking for one utterance on one axis."""

    axis: TaxonomyAxis
    ranking: tuple[tuple[IntentLabel, float], ...]

    @property
    def top_label(self) -> IntentLabel:
        return self.ranking[0][0]

    @property
    def top_probability(self) -> float:
        return self.ranking[0][1]


@dataclass(frozen=True)
class ClassifierModel:
    platform: Platform
    axis: TaxonomyAxis
    classes: tuple[str, ...]
    weights: np.ndarray
    bias: np.ndarray
    precision: Precision
    hyperparams: Hyperparams
    version: int = FORMAT_VERSION
    scales: np.ndarray | None = None
    loss_history: tuple[float, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if self.axis.platform is not self.platform:
            raise ValueError(f"axis {self.axis.value} does not belong to {self.platform.value}")
        k = len(self.classes)
        if self.weights.shape != (k, self.hyperparams.feature_dim):
            raise ValueError(
                f"weights shape {self.weights.shape} != ({k}, {self.hyperparams.feature_dim})"
            )
        if self.bias.shape != (k,) or self.bias.dtype != np.float32:
            raise ValueError("bias must be a float32 vector with one entry per class")
        if self.precision is Precision.FLOAT32:
            if self.weights.dtype != np.float32 or self.scales is not None:
                raise ValueError("float32 models carry float32 weights and no scales")
        else:
            if self.weights.dtype != np.int8:
                raise ValueError("int8 models carry int8 weights")
            if self.weights.size and int(np.abs(self.weights.astype(np.int16)).max()) > 127:
                raise ValueError("quantized weights must lie in [-127, 127]")
            if self.scales is None or self.scales.shape != (k,) or self.scales.dtype != np.float32:
                raise ValueError("int8 models need one positive float32 scale per class row")
            if self.scales.size and float(self.scales.min()) <= 0:
                raise ValueError("quantization scales must be positive")
        self.weights.setflags(write=False)
        self.bias.setflags(write=False)
        if self.scales is not None:
            self.scales.setflags(write=False)

    @property
    def task(self) -> tuple[Platform, TaxonomyAxis]:
        return (self.platform, self.axis)

    def label(self, index: int) -> IntentLabel:
        return IntentLabel(self.axis, self.classes[index])


def train(
    train_corpus: Corpus,
    task: tuple[Platform, TaxonomyAxis],
    hp: Hyperparams | None = None,
) -> ClassifierModel:
    """Train one axis classifier from the platform's slice of the corpus.

    Utterances missing the axis label count as class Custom. The class list
    is the full inventory for the axis (Custom included) in inventory order;
    classes with zero training samples are kept and flagged with a warning
    so downstream ranking length stays stable.
    """
    platform, axis = task
    if axis.platform is not platform:
        raise ValueError(f"axis {axis.value} does not belong to platform {platform.value}")
    if hp is None:
        hp = Hyperparams()

    utterances = train_corpus.for_platform(platform)
    if not utterances:
        raise EmptyTrainingSetError(f"no {platform.value} utterances in training corpus")

    classes = train_corpus.inventory.labels_for(axis)
    texts = [u.text for u in utterances]
    labels = [u.label_for(axis) for u in utterances]
    present = set(labels)
    for name in classes:
        if name not in present:
            warnings.warn(ClassWithZeroSamplesWarning(name), stacklevel=2)

    clf = IntentClassifier(**hp.to_dict())
    clf.fit(texts, labels, classes=classes)
    return ClassifierModel(
        platform=platform,
        axis=axis,
        classes=tuple(classes),
        weights=clf.weights_,
        bias=clf.bias_,
        precision=Precision.FLOAT32,
        hyperparams=hp,
        loss_history=clf.loss_history_,
    )


def _scores(model: ClassifierModel, features: Mapping[int, float]) -> np.ndarray:
    bias = model.bias.astype(np.float64)
    if not features:
        return bias
    idx = np.fromiter(features.keys(), dtype=np.int64, count=len(features))
    counts = np.fromiter(features.values(), dtype=np.float64, count=len(features))
    sub = model.weights[:, idx].astype(np.float64)
    scores = sub @ counts
    if model.precision is Precision.INT8:
        scores *= model.scales.astype(np.float64)
    return scores + bias


def predict(model: ClassifierModel, text: str) -> Prediction:
    """normalize → featurize → linear scores → softmax → full ranking.

    Ties are broken by class order so the ranking is total and stable; an
    empty text ranks purely by bias.
    """
    hp = model.hyperparams
    features = featurize(normalize(text), hp.feature_dim, hp.ngram_max)
    probs = softmax(_scores(model, features))
    order = np.argsort(-probs, kind="stable")
    ranking = tuple((model.label(int(i)), float(probs[i])) for i in order)
    return Prediction(axis=model.axis, ranking=ranking)


def predict_batch(model: ClassifierModel, texts: Sequence[str]) -> list[Prediction]:
    return [predict(model, text) for text in texts]


def quantize(model: ClassifierModel) -> ClassifierModel:
    """Per-row symmetric int8 quantization; bias stays float.

    scale = max|row|/127, with all-zero rows pinned to scale 1 so the stored
    row is zeros and dequantization is exact for them.
    """
    if model.precision is not Precision.FLOAT32:
        raise AlreadyQuantizedError("model weights are already int8")
    weights = model.weights.astype(np.float64)
    max_abs = np.abs(weights).max(axis=1)
    scales = np.where(max_abs > 0, max_abs / 127.0, 1.0)
    quantized = np.rint(weights / scales[:, None])
    quantized = np.clip(quantized, -127, 127).astype(np.int8)
    return ClassifierModel(
        platform=model.platform,
        axis=model.axis,
        classes=model.classes,
        weights=quantized,
        bias=model.bias,
        precision=Precision.INT8,
        hyperparams=model.hyperparams,
        version=model.version,
        scales=scales.astype(np.float32),
        loss_history=model.loss_history,
    )
