"""Command-text normalization shared by the classifier and the corpus tools.

Normalization defines text identity for the whole system: the classifier,
the train/test deduplication rule, and the noise channel all agree on it.
"""

from __future__ import annotations

import re

# Checked longest-first so "ok google ..." is not left half-stripped.
WAKE_PREFIXES: tuple[tuple[str, ...], ...] = (
    ("hey", "google"),
    ("ok", "google"),
    ("alexa",),
)

_STRIP_RE = re.compile(r"[^a-z0-9']+")


def normalize(text: str) -> list[str]:
    """Lowercase, strip punctuation, split on whitespace, drop a leading wake word.

    Tokens contain only ``a-z``, ``0-9`` and apostrophes. Empty input yields
    an empty sequence.
    """
    tokens = _STRIP_RE.sub(" ", text.lower()).split()
    for prefix in WAKE_PREFIXES:
        if tuple(tokens[: len(prefix)]) == prefix:
            tokens = tokens[len(prefix):]
            break
    return tokens


def normalized_key(text: str) -> str:
    """Canonical string form of a command, used for deduplication."""
    return " ".join(normalize(text))
