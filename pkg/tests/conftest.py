"""Shared fixtures.

The reference corpora and the four models trained on them cost ~10 s to
build, so they are session-scoped and shared between the unit suites and
the acceptance gate. Everything derives from seed 42 and the shipped
generator specs, matching what `voicegate gen-corpus` produces.
"""

from __future__ import annotations

import threading

import pytest
from hypothesis import settings

from voicegate.nlu import Hyperparams, quantize, train
from voicegate.resources import default_generator_spec
from voicegate.taxonomy import (
    Corpus,
    Platform,
    TaxonomyAxis,
    TaxonomyInventory,
    Utterance,
    generate_synthetic_corpus,
    split_corpus,
)

settings.register_profile("suite", deadline=None)
settings.load_profile("suite")

PLATFORMS = (Platform.ALEXA, Platform.GOOGLE_HOME)


class ManualClock:
    """Millisecond clock the test advances by hand; thread-safe."""

    def __init__(self, start: int = 1_000_000):
        self._now = start
        self._lock = threading.Lock()

    def __call__(self) -> int:
        with self._lock:
            return self._now

    def advance(self, ms: int) -> None:
        with self._lock:
            self._now += ms


@pytest.fixture(scope="session")
def reference_corpora() -> dict[Platform, Corpus]:
    return {
        platform: generate_synthetic_corpus(default_generator_spec(platform), seed=42)
        for platform in PLATFORMS
    }


@pytest.fixture(scope="session")
def reference_splits(reference_corpora):
    return {
        platform: split_corpus(corpus, 0.85, 42)
        for platform, corpus in reference_corpora.items()
    }


@pytest.fixture(scope="session")
def reference_models(reference_splits):
    hp = Hyperparams()
    models = {}
    for platform in PLATFORMS:
        split = reference_splits[platform]
        for axis in platform.axes:
            models[axis] = train(split.train, (platform, axis), hp)
    return models


@pytest.fixture(scope="session")
def quantized_models(reference_models):
    return {axis: quantize(model) for axis, model in reference_models.items()}


# --- small fast corpus for unit tests ----------------------------------------


def _google_utterance(text: str, trait: str, device: str) -> Utterance:
    return Utterance(
        text=text,
        platform=Platform.GOOGLE_HOME,
        labels={TaxonomyAxis.GOOGLE_TRAIT: trait, TaxonomyAxis.GOOGLE_DEVICE: device},
    )


@pytest.fixture(scope="session")
def tiny_inventory() -> TaxonomyInventory:
    return TaxonomyInventory.from_dict(
        {
            "GoogleTrait": ["OnOff", "OpenClose"],
            "GoogleDevice": ["Light", "Door"],
            "AlexaInterface": [],
            "AlexaCapability": [],
        }
    )


@pytest.fixture(scope="session")
def tiny_corpus(tiny_inventory) -> Corpus:
    return Corpus(
        utterances=(
            _google_utterance("turn on the light", "OnOff", "Light"),
            _google_utterance("turn off the light", "OnOff", "Light"),
            _google_utterance("switch on the lamp", "OnOff", "Light"),
            _google_utterance("open the door", "OpenClose", "Door"),
            _google_utterance("close the door", "OpenClose", "Door"),
            _google_utterance("open the front door", "OpenClose", "Door"),
            _google_utterance("what time is it", "Custom", "Custom"),
            _google_utterance("tell me a joke", "Custom", "Custom"),
        ),
        inventory=tiny_inventory,
    )


@pytest.fixture(scope="session")
def tiny_hp() -> Hyperparams:
    return Hyperparams(epochs=3, batch_size=2, feature_dim=2**8, seed=7)


@pytest.fixture(scope="session")
def tiny_model(tiny_corpus, tiny_hp):
    return train(tiny_corpus, (Platform.GOOGLE_HOME, TaxonomyAxis.GOOGLE_TRAIT), tiny_hp)
