"""Access-control gateway for smart-home voice commands.

The pipeline: a transcribed command is normalized, classified into
per-platform intent taxonomies, checked against a user-defined sensitivity
policy, and either allowed or held for human challenge approval. A seeded
noise channel stands in for speech-recognition transcription error so the
whole system can be evaluated end to end without audio hardware.
"""

__version__ = "0.1.0"

from .taxonomy import (
    Corpus,
    IntentLabel,
    Platform,
    SplitCorpus,
    TaxonomyAxis,
    TaxonomyInventory,
    Utterance,
)

__all__ = [
    "Corpus",
    "IntentLabel",
    "Platform",
    "SplitCorpus",
    "TaxonomyAxis",
    "TaxonomyInventory",
    "Utterance",
    "__version__",
]
