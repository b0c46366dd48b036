"""Trainer internals and the estimator front end."""

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from voicegate.nlu.classifier import (
    Hyperparams,
    IntentClassifier,
    build_feature_matrix,
    sgd_train,
    softmax,
    training_loss_and_grad,
)


def test_hyperparams_defaults():
    hp = Hyperparams()
    assert (hp.epochs, hp.batch_size, hp.learning_rate) == (30, 32, 0.1)
    assert (hp.l2, hp.feature_dim, hp.ngram_max, hp.seed) == (1e-4, 2**18, 2, 42)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"epochs": 0},
        {"batch_size": -1},
        {"learning_rate": 0.0},
        {"ngram_max": 4},
        {"feature_dim": 3000},
        {"seed": -1},
    ],
)
def test_hyperparams_validation(kwargs):
    with pytest.raises(ValueError):
        Hyperparams(**kwargs)


def test_hyperparams_round_trip():
    hp = Hyperparams(epochs=5, seed=9)
    assert Hyperparams.from_dict(hp.to_dict()) == hp


def test_softmax_rows_sum_to_one():
    rng = np.random.default_rng(0)
    probs = softmax(rng.normal(size=(20, 7)) * 30)
    np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-9)
    assert (probs >= 0).all()


def test_softmax_shift_invariant():
    scores = np.array([[1.0, 2.0, 3.0]])
    np.testing.assert_allclose(softmax(scores), softmax(scores + 1000.0))


def _random_instance(rng, n=12, n_classes=5, dim=64):
    X = (rng.random((n, dim)) < 0.1).astype(np.float64)
    y = rng.integers(0, n_classes, size=n)
    w = rng.normal(size=(n_classes, dim)) * 0.1
    b = rng.normal(size=n_classes) * 0.1
    return X, y, w, b


def test_gradient_matches_finite_differences():
    """Central finite differences over a few random coordinates per instance."""
    rng = np.random.default_rng(1234)
    eps = 1e-6
    for _ in range(5):
        X, y, w, b = _random_instance(rng)
        loss, grad_w, grad_b = training_loss_and_grad(w, b, X, y, l2=1e-3)
        for _ in range(10):
            i = rng.integers(0, w.shape[0])
            j = rng.integers(0, w.shape[1])
            w_plus, w_minus = w.copy(), w.copy()
            w_plus[i, j] += eps
            w_minus[i, j] -= eps
            num = (
                training_loss_and_grad(w_plus, b, X, y, 1e-3)[0]
                - training_loss_and_grad(w_minus, b, X, y, 1e-3)[0]
            ) / (2 * eps)
            denom = max(abs(num), abs(grad_w[i, j]), 1e-8)
            assert abs(num - grad_w[i, j]) / denom <= 1e-4


def test_loss_decreases_on_separable_data():
    hp = Hyperparams(epochs=5, batch_size=2, feature_dim=2**8, seed=0)
    X = build_feature_matrix(["aaa", "bbb", "ccc", "aaa two", "bbb two", "ccc two"], hp)
    y = np.array([0, 1, 2, 0, 1, 2])
    _, _, history = sgd_train(X, y, 3, hp)
    assert len(history) == hp.epochs
    assert history[-1] < history[0]


def test_sgd_deterministic():
    hp = Hyperparams(epochs=3, batch_size=2, feature_dim=2**8, seed=11)
    texts = ["open the door", "close the door", "turn on the light", "what time is it"]
    X = build_feature_matrix(texts, hp)
    y = np.array([0, 0, 1, 2])
    w1, b1, h1 = sgd_train(X, y, 3, hp)
    w2, b2, h2 = sgd_train(X, y, 3, hp)
    assert np.array_equal(w1, w2)
    assert np.array_equal(b1, b2)
    assert h1 == h2


# --- estimator protocol -------------------------------------------------------


TEXTS = [
    "turn on the light",
    "turn off the light",
    "open the door",
    "close the door",
    "what time is it",
    "tell me a joke",
]
LABELS = ["OnOff", "OnOff", "OpenClose", "OpenClose", "Custom", "Custom"]


def _small_clf(**overrides):
    params = dict(epochs=8, batch_size=2, feature_dim=2**8, seed=3)
    params.update(overrides)
    return IntentClassifier(**params)


def test_fit_predict_recovers_training_labels():
    clf = _small_clf().fit(TEXTS, LABELS)
    assert list(clf.predict(TEXTS)) == LABELS


def test_predict_proba_normalized():
    clf = _small_clf().fit(TEXTS, LABELS)
    probs = clf.predict_proba(["open the door", "turn on the light"])
    np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-6)


def test_classes_param_fixes_order_and_allows_absent():
    clf = _small_clf().fit(TEXTS, LABELS, classes=["OnOff", "OpenClose", "Custom", "Extra"])
    assert list(clf.classes_) == ["OnOff", "OpenClose", "Custom", "Extra"]


def test_fit_rejects_labels_outside_classes():
    with pytest.raises(ValueError):
        _small_clf().fit(TEXTS, LABELS, classes=["OnOff"])


def test_unfitted_predict_raises():
    with pytest.raises(NotFittedError):
        _small_clf().predict(["open the door"])


def test_get_params_round_trip_and_clone():
    clf = _small_clf(seed=99)
    assert clf.get_params()["seed"] == 99
    cloned = clone(clf)
    assert cloned.get_params() == clf.get_params()


def test_loss_history_exposed():
    clf = _small_clf().fit(TEXTS, LABELS)
    assert len(clf.loss_history_) == clf.epochs
    assert all(isinstance(x, float) for x in clf.loss_history_)
