"""Intent classification: hashed n-gram features, a multinomial logistic
regression trainer, int8 post-training quantization, evaluation metrics and
a binary model file format."""

from __future__ import annotations

from .classifier import Hyperparams, IntentClassifier
from .features import featurize, fnv1a_64
from .io import load_model, save_model
from .metrics import EvalReport, evaluate
from .model import ClassifierModel, Precision, Prediction, predict, quantize, train

__all__ = [
    "ClassifierModel",
    "EvalReport",
    "Hyperparams",
    "IntentClassifier",
    "Precision",
    "Prediction",
    "evaluate",
    "featurize",
    "fnv1a_64",
    "load_model",
    "predict",
    "quantize",
    "save_model",
    "train",
]
