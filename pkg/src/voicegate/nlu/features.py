"""Hashed n-gram bag-of-words features.

The feature space is a fixed-size array indexed by a 64-bit FNV-1a hash of
the n-gram string masked down to the table size. No vocabulary is stored;
collisions are accepted as part of the model. The same function must be used
at train and inference time or predictions are garbage, which is why this
module is the single home of the hash.
"""

from __future__ import annotations

from typing import Sequence

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def fnv1a_64(data: bytes) -> int:
    """FNV-1a over bytes, 64-bit wrapping arithmetic."""
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


def featurize(tokens: Sequence[str], feature_dim: int, ngram_max: int) -> dict[int, float]:
    """Map a token sequence to sparse {feature index: count} over n-grams.

    N-grams of length 1..ngram_max are joined with single spaces before
    hashing; the index is ``hash & (feature_dim - 1)``, so feature_dim must
    be a power of two. Deterministic across runs and platforms.
    """
    if feature_dim <= 0 or feature_dim & (feature_dim - 1):
        raise ValueError(f"feature_dim must be a positive power of two, got {feature_dim}")
    if ngram_max < 1:
        raise ValueError(f"ngram_max must be >= 1, got {ngram_max}")
    mask = feature_dim - 1
    counts: dict[int, float] = {}
    for n in range(1, ngram_max + 1):
        for i in range(len(tokens) - n + 1):
            gram = " ".join(tokens[i : i + n])
            idx = fnv1a_64(gram.encode("utf-8")) & mask
            counts[idx] = counts.get(idx, 0.0) + 1.0
    return counts
