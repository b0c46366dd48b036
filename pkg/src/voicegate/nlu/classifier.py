"""Multinomial logistic regression over hashed n-gram features.

Trained from scratch with seeded mini-batch gradient descent so results are
reproducible bit-for-bit: float64 accumulation during training, one RNG for
shuffling, learning rate decayed as lr/sqrt(t), and L2 applied through a
lazy scale factor so each step touches only the active feature columns.

``IntentClassifier`` wraps the trainer in the scikit-learn estimator
protocol (fit/predict/predict_proba, get_params) for interactive use;
the pipeline proper consumes the frozen ``ClassifierModel`` artifact built
by :func:`voicegate.nlu.model.train`.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError

from ..text import normalize
from .features import featurize

# Fold the lazy L2 scale into the weights before it loses precision.
_SCALE_FLOOR = 1e-9


@dataclass(frozen=True)
class Hyperparams:
    epochs: int = 30
    batch_size: int = 32
    learning_rate: float = 0.1
    l2: float = 1e-4
    feature_dim: int = 2**18
    ngram_max: int = 2
    seed: int = 42

    def __post_init__(self):
        for name in ("epochs", "batch_size", "learning_rate", "l2", "feature_dim"):
            value = getattr(self, name)
            if value <= 0:
                raise ValueError(f"{name} must be positive, got {value}")
        if self.ngram_max not in (1, 2, 3):
            raise ValueError(f"ngram_max must be 1, 2 or 3, got {self.ngram_max}")
        if self.feature_dim & (self.feature_dim - 1):
            raise ValueError(f"feature_dim must be a power of two, got {self.feature_dim}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must fit in 64 unsigned bits, got {self.seed}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping) -> "Hyperparams":
        return cls(
            epochs=int(data["epochs"]),
            batch_size=int(data["batch_size"]),
            learning_rate=float(data["learning_rate"]),
            l2=float(data["l2"]),
            feature_dim=int(data["feature_dim"]),
            ngram_max=int(data["ngram_max"]),
            seed=int(data["seed"]),
        )


def softmax(scores: np.ndarray) -> np.ndarray:
    """Row-wise stable softmax."""
    shifted = scores - scores.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def build_feature_matrix(texts: Sequence[str], hp: Hyperparams) -> sp.csr_matrix:
    """Stack featurized texts into a CSR matrix of shape (n, feature_dim)."""
    data: list[float] = []
    indices: list[int] = []
    indptr = [0]
    for text in texts:
        vec = featurize(normalize(text), hp.feature_dim, hp.ngram_max)
        for idx in sorted(vec):
            indices.append(idx)
            data.append(vec[idx])
        indptr.append(len(indices))
    return sp.csr_matrix(
        (np.asarray(data, dtype=np.float64), np.asarray(indices, dtype=np.int64), np.asarray(indptr, dtype=np.int64)),
        shape=(len(texts), hp.feature_dim),
    )


def training_loss_and_grad(
    weights: np.ndarray,
    bias: np.ndarray,
    X,
    y_idx: np.ndarray,
    l2: float,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Full-batch cross-entropy loss with L2 penalty, plus analytic gradients.

    The SGD loop does not call this (it works on mini-batches with lazy L2);
    it exists so the analytic gradient can be verified against finite
    differences and so step updates can be cross-checked against the naive
    dense formula.
    """
    n = X.shape[0]
    scores = X @ weights.T + bias
    probs = softmax(scores)
    log_probs = np.log(np.clip(probs[np.arange(n), y_idx], 1e-300, None))
    loss = -float(log_probs.mean()) + 0.5 * l2 * float((weights * weights).sum())

    delta = probs.copy()
    delta[np.arange(n), y_idx] -= 1.0
    delta /= n
    if sp.issparse(X):
        grad_w = np.asarray((X.T @ delta).T) + l2 * weights
    else:
        grad_w = delta.T @ X + l2 * weights
    grad_b = delta.sum(axis=0)
    return loss, grad_w, grad_b


def _dataset_loss(X: sp.csr_matrix, y_idx: np.ndarray, weights: np.ndarray, bias: np.ndarray, l2: float) -> float:
    n = X.shape[0]
    scores = X @ weights.T + bias
    probs = softmax(scores)
    log_probs = np.log(np.clip(probs[np.arange(n), y_idx], 1e-300, None))
    return -float(log_probs.mean()) + 0.5 * l2 * float((weights * weights).sum())


def sgd_train(
    X: sp.csr_matrix,
    y_idx: np.ndarray,
    n_classes: int,
    hp: Hyperparams,
) -> tuple[np.ndarray, np.ndarray, list[float]]:
    """Seeded mini-batch SGD; returns (weights, bias, per-epoch loss history).

    The batch gradient is summed over examples rather than averaged, paired
    with the 1/sqrt(step) decay; averaging shrinks the effective step so far
    that training stalls at these feature dimensions.

    Weights are kept as scale * V so the L2 decay multiplies one scalar per
    step instead of the whole matrix; gradient updates divide by the scale,
    which is algebraically identical to the naive dense update.
    """
    n = X.shape[0]
    v = np.zeros((n_classes, hp.feature_dim), dtype=np.float64)
    bias = np.zeros(n_classes, dtype=np.float64)
    scale = 1.0
    rng = np.random.Generator(np.random.PCG64(hp.seed))
    eye = np.eye(n_classes, dtype=np.float64)

    step = 0
    history: list[float] = []
    for _ in range(hp.epochs):
        order = rng.permutation(n)
        for start in range(0, n, hp.batch_size):
            rows = order[start : start + hp.batch_size]
            xb = X[rows]
            cols = np.unique(xb.indices)
            xb_dense = np.asarray(xb[:, cols].todense())

            scores = scale * (xb_dense @ v[:, cols].T) + bias
            delta = softmax(scores) - eye[y_idx[rows]]

            step += 1
            lr = hp.learning_rate / math.sqrt(step)
            scale *= 1.0 - lr * hp.l2
            if scale < _SCALE_FLOOR:
                v *= scale
                scale = 1.0
            if cols.size:
                v[:, cols] -= (lr / scale) * (delta.T @ xb_dense)
            bias -= lr * delta.sum(axis=0)

        history.append(_dataset_loss(X, y_idx, scale * v, bias, hp.l2))

    return scale * v, bias, history


class IntentClassifier(BaseEstimator, ClassifierMixin):
    """Scikit-learn style front end over the hashed n-gram trainer.

    Parameters mirror :class:`Hyperparams`; X is a sequence of raw command
    texts, y a sequence of label names. ``classes`` may be passed to ``fit``
    to fix the class order (and include classes absent from y).
    """

    def __init__(
        self,
        epochs: int = 30,
        batch_size: int = 32,
        learning_rate: float = 0.1,
        l2: float = 1e-4,
        feature_dim: int = 2**18,
        ngram_max: int = 2,
        seed: int = 42,
    ):
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.l2 = l2
        self.feature_dim = feature_dim
        self.ngram_max = ngram_max
        self.seed = seed

    def _hyperparams(self) -> Hyperparams:
        return Hyperparams(
            epochs=self.epochs,
            batch_size=self.batch_size,
            learning_rate=self.learning_rate,
            l2=self.l2,
            feature_dim=self.feature_dim,
            ngram_max=self.ngram_max,
            seed=self.seed,
        )

    def fit(self, X: Sequence[str], y: Sequence[str], classes: Sequence[str] | None = None):
        hp = self._hyperparams()
        texts = list(X)
        labels = list(y)
        if len(texts) != len(labels):
            raise ValueError(f"X and y length mismatch: {len(texts)} vs {len(labels)}")
        if not texts:
            raise ValueError("cannot fit on an empty dataset")

        if classes is None:
            class_list = sorted(set(labels))
        else:
            class_list = list(classes)
            missing = set(labels) - set(class_list)
            if missing:
                raise ValueError(f"labels absent from classes: {sorted(missing)}")
        index = {name: i for i, name in enumerate(class_list)}

        matrix = build_feature_matrix(texts, hp)
        y_idx = np.asarray([index[label] for label in labels], dtype=np.int64)
        weights, bias, history = sgd_train(matrix, y_idx, len(class_list), hp)

        self.classes_ = np.asarray(class_list, dtype=object)
        self.weights_ = weights.astype(np.float32)
        self.bias_ = bias.astype(np.float32)
        self.loss_history_ = tuple(history)
        return self

    def _check_fitted(self):
        if not hasattr(self, "weights_"):
            raise NotFittedError("IntentClassifier must be fitted before prediction")

    def predict_proba(self, X: Sequence[str]) -> np.ndarray:
        self._check_fitted()
        hp = self._hyperparams()
        matrix = build_feature_matrix(list(X), hp)
        scores = matrix @ self.weights_.astype(np.float64).T + self.bias_.astype(np.float64)
        return softmax(scores)

    def predict(self, X: Sequence[str]) -> np.ndarray:
        probs = self.predict_proba(X)
        return self.classes_[probs.argmax(axis=1)]
