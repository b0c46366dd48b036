"""Deterministic noisy channel standing in for ASR transcription error.

Each token position is independently corrupted with probability target_wer;
the corruption type (substitute, delete, insert) follows op_mix.
Substitutions draw from vocabulary words within character edit distance 2 of
the original when any exist, imitating acoustically confusable words without
a pronunciation lexicon. The RNG seed is the spec seed mixed with a hash of
the token sequence, so corrupt() is a pure function of (tokens, spec) while
different utterances under one seed stay decorrelated.

The WER scorer is a plain minimal-edit-distance alignment; ties in the
backtrace prefer substitution over a delete+insert pair, fixed so counts
are reproducible.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .errors import EmptyReferenceError, MissingFileError
from .nlu.features import fnv1a_64
from .text import normalize

DEFAULT_TARGET_WER = 0.15
DEFAULT_OP_MIX = (0.6, 0.2, 0.2)


@dataclass(frozen=True)
class NoiseSpec:
    target_wer: float = DEFAULT_TARGET_WER
    op_mix: tuple[float, float, float] = DEFAULT_OP_MIX  # (substitute, delete, insert)
    vocabulary: tuple[str, ...] = ()
    seed: int = 42

    def __post_init__(self):
        object.__setattr__(self, "op_mix", tuple(float(p) for p in self.op_mix))
        object.__setattr__(self, "vocabulary", tuple(self.vocabulary))
        if not 0.0 <= self.target_wer <= 1.0:
            raise ValueError(f"target_wer must be in [0, 1], got {self.target_wer}")
        if len(self.op_mix) != 3 or any(p < 0 for p in self.op_mix):
            raise ValueError(f"op_mix must be three non-negative probabilities, got {self.op_mix}")
        if abs(sum(self.op_mix) - 1.0) > 1e-9:
            raise ValueError(f"op_mix must sum to 1, got {sum(self.op_mix)}")
        sub, _, ins = self.op_mix
        if (sub > 0 or ins > 0) and not self.vocabulary:
            raise ValueError("vocabulary required when substitution or insertion probability > 0")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must fit in 64 unsigned bits, got {self.seed}")

    def to_dict(self) -> dict:
        return {
            "target_wer": self.target_wer,
            "op_mix": list(self.op_mix),
            "vocabulary": list(self.vocabulary),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "NoiseSpec":
        return cls(
            target_wer=float(data.get("target_wer", DEFAULT_TARGET_WER)),
            op_mix=tuple(data.get("op_mix", DEFAULT_OP_MIX)),
            vocabulary=tuple(data.get("vocabulary", ())),
            seed=int(data.get("seed", 42)),
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "NoiseSpec":
        path = Path(path)
        if not path.exists():
            raise MissingFileError(path)
        return cls.from_dict(json.loads(path.read_text(encoding="utf-8")))


@dataclass(frozen=True)
class WerScore:
    substitutions: int
    deletions: int
    insertions: int
    reference_length: int

    @property
    def wer(self) -> float:
        return (self.substitutions + self.deletions + self.insertions) / self.reference_length

    def to_dict(self) -> dict:
        return {
            "substitutions": self.substitutions,
            "deletions": self.deletions,
            "insertions": self.insertions,
            "reference_length": self.reference_length,
            "wer": self.wer,
        }


def char_edit_distance(a: str, b: str) -> int:
    """Levenshtein distance between two words."""
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(
                min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + (ca != cb))
            )
        previous = current
    return previous[-1]


def corrupt(tokens: Sequence[str], spec: NoiseSpec) -> tuple[str, ...]:
    """Apply the channel to one token sequence. Pure in (tokens, spec)."""
    tokens = tuple(tokens)
    if spec.target_wer == 0.0 or not tokens:
        return tokens

    rng = random.Random(spec.seed ^ fnv1a_64(" ".join(tokens).encode("utf-8")))
    p_sub, p_del, _ = spec.op_mix
    neighbors: dict[str, tuple[str, ...]] = {}
    out: list[str] = []
    for token in tokens:
        if rng.random() >= spec.target_wer:
            out.append(token)
            continue
        u = rng.random()
        if u < p_sub:
            out.append(_substitute(token, spec.vocabulary, neighbors, rng))
        elif u < p_sub + p_del:
            pass  # deletion
        else:
            out.append(token)
            out.append(rng.choice(spec.vocabulary))
    return tuple(out)


def _substitute(
    token: str,
    vocabulary: tuple[str, ...],
    cache: dict[str, tuple[str, ...]],
    rng: random.Random,
) -> str:
    pool = cache.get(token)
    if pool is None:
        pool = tuple(
            w for w in vocabulary if w != token and char_edit_distance(w, token) <= 2
        )
        if not pool:
            pool = tuple(w for w in vocabulary if w != token)
        cache[token] = pool
    if not pool:
        return token  # vocabulary holds only this token; nothing to substitute
    return rng.choice(pool)


def corrupt_text(text: str, spec: NoiseSpec) -> str:
    """Channel applied to raw text: normalize, corrupt, re-join with spaces."""
    return " ".join(corrupt(normalize(text), spec))


def vocabulary_from_texts(texts) -> tuple[str, ...]:
    """Sorted unique normalized tokens, for substitution/insertion pools."""
    vocab: set[str] = set()
    for text in texts:
        vocab.update(normalize(text))
    return tuple(sorted(vocab))


def measure_wer(reference: Sequence[str], hypothesis: Sequence[str]) -> WerScore:
    """Minimal-edit alignment counts via dynamic programming.

    Backtrace preference order on ties: diagonal (match/substitution), then
    deletion, then insertion.
    """
    ref = tuple(reference)
    hyp = tuple(hypothesis)
    if not ref:
        raise EmptyReferenceError("reference token sequence is empty")

    n, m = len(ref), len(hyp)
    dist = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        dist[i][0] = i
    for j in range(1, m + 1):
        dist[0][j] = j
    for i in range(1, n + 1):
        row = dist[i]
        prev = dist[i - 1]
        for j in range(1, m + 1):
            row[j] = min(
                prev[j - 1] + (ref[i - 1] != hyp[j - 1]),
                prev[j] + 1,
                row[j - 1] + 1,
            )

    subs = dels = ins = 0
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and dist[i][j] == dist[i - 1][j - 1] + (ref[i - 1] != hyp[j - 1]):
            if ref[i - 1] != hyp[j - 1]:
                subs += 1
            i -= 1
            j -= 1
        elif i > 0 and dist[i][j] == dist[i - 1][j] + 1:
            dels += 1
            i -= 1
        else:
            ins += 1
            j -= 1
    return WerScore(substitutions=subs, deletions=dels, insertions=ins, reference_length=n)
