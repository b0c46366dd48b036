"""Binary model files.

Layout, all little-endian:

    magic "VGMF" | format version u16 | platform, axis (strings) |
    hyperparams (epochs u32, batch u32, lr f64, l2 f64, D u64,
    ngram_max u16, seed u64) | class count u32 + class names |
    precision flag u8 | weights row-major (f32, or i8 then f32 row scales) |
    bias f32 | blake2b-64 checksum of every preceding byte

Strings are u16-length-prefixed UTF-8. The checksum is verified before the
body is parsed, so truncation or bit rot anywhere surfaces as
ChecksumMismatch rather than a confusing parse error; only the 4 magic
bytes are inspected first to give wrong-format files a clearer rejection.
Training history is a diagnostic, not part of the model, and is not stored.
"""

from __future__ import annotations

import hashlib
import struct
from pathlib import Path

import numpy as np

from ..errors import (
    BadMagicError,
    ChecksumMismatchError,
    MissingFileError,
    UnsupportedVersionError,
)
from ..taxonomy import Platform, TaxonomyAxis
from .classifier import Hyperparams
from .model import FORMAT_VERSION, ClassifierModel, Precision

_MAGIC = b"VGMF"
_CHECKSUM_BYTES = 8
_PRECISION_FLAGS = {Precision.FLOAT32: 0, Precision.INT8: 1}
_FLAG_PRECISIONS = {v: k for k, v in _PRECISION_FLAGS.items()}


def _checksum(data: bytes) -> bytes:
    return hashlib.blake2b(data, digest_size=_CHECKSUM_BYTES).digest()


def _pack_str(text: str) -> bytes:
    raw = text.encode("utf-8")
    if len(raw) > 0xFFFF:
        raise ValueError(f"string too long to serialize: {len(raw)} bytes")
    return struct.pack("<H", len(raw)) + raw


class _Reader:
    def __init__(self, blob: bytes):
        self.blob = blob
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.blob):
            raise ValueError("model body shorter than its header claims")
        out = self.blob[self.pos : self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def string(self) -> str:
        (n,) = self.unpack("<H")
        return self.take(n).decode("utf-8")


def serialize_model(model: ClassifierModel) -> bytes:
    parts = [_MAGIC, struct.pack("<H", FORMAT_VERSION)]
    parts.append(_pack_str(model.platform.value))
    parts.append(_pack_str(model.axis.value))
    hp = model.hyperparams
    parts.append(
        struct.pack(
            "<IIddQHQ",
            hp.epochs,
            hp.batch_size,
            hp.learning_rate,
            hp.l2,
            hp.feature_dim,
            hp.ngram_max,
            hp.seed,
        )
    )
    parts.append(struct.pack("<I", len(model.classes)))
    for name in model.classes:
        parts.append(_pack_str(name))
    parts.append(struct.pack("<B", _PRECISION_FLAGS[model.precision]))
    if model.precision is Precision.FLOAT32:
        parts.append(np.ascontiguousarray(model.weights, dtype="<f4").tobytes())
    else:
        parts.append(np.ascontiguousarray(model.weights, dtype=np.int8).tobytes())
        parts.append(np.ascontiguousarray(model.scales, dtype="<f4").tobytes())
    parts.append(np.ascontiguousarray(model.bias, dtype="<f4").tobytes())
    body = b"".join(parts)
    return body + _checksum(body)


def deserialize_model(blob: bytes) -> ClassifierModel:
    if len(blob) < len(_MAGIC) or blob[: len(_MAGIC)] != _MAGIC:
        raise BadMagicError("not a model file (bad magic bytes)")
    if len(blob) < len(_MAGIC) + 2 + _CHECKSUM_BYTES:
        raise ChecksumMismatchError("model file truncated")
    body, stored = blob[:-_CHECKSUM_BYTES], blob[-_CHECKSUM_BYTES:]
    if _checksum(body) != stored:
        raise ChecksumMismatchError("model file checksum does not match contents")

    reader = _Reader(body)
    reader.take(len(_MAGIC))
    (version,) = reader.unpack("<H")
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(version)

    platform = Platform(reader.string())
    axis = TaxonomyAxis(reader.string())
    epochs, batch_size, lr, l2, feature_dim, ngram_max, seed = reader.unpack("<IIddQHQ")
    hp = Hyperparams(
        epochs=epochs,
        batch_size=batch_size,
        learning_rate=lr,
        l2=l2,
        feature_dim=feature_dim,
        ngram_max=ngram_max,
        seed=seed,
    )
    (n_classes,) = reader.unpack("<I")
    classes = tuple(reader.string() for _ in range(n_classes))
    (flag,) = reader.unpack("<B")
    if flag not in _FLAG_PRECISIONS:
        raise ValueError(f"unknown precision flag {flag}")
    precision = _FLAG_PRECISIONS[flag]

    shape = (n_classes, hp.feature_dim)
    scales = None
    if precision is Precision.FLOAT32:
        weights = np.frombuffer(reader.take(4 * n_classes * hp.feature_dim), dtype="<f4")
        weights = weights.reshape(shape).astype(np.float32)
    else:
        weights = np.frombuffer(reader.take(n_classes * hp.feature_dim), dtype=np.int8)
        weights = weights.reshape(shape).copy()
        scales = np.frombuffer(reader.take(4 * n_classes), dtype="<f4").astype(np.float32)
    bias = np.frombuffer(reader.take(4 * n_classes), dtype="<f4").astype(np.float32)
    if reader.pos != len(body):
        raise ValueError(f"{len(body) - reader.pos} trailing bytes after model body")

    return ClassifierModel(
        platform=platform,
        axis=axis,
        classes=classes,
        weights=weights,
        bias=bias,
        precision=precision,
        hyperparams=hp,
        version=version,
        scales=scales,
    )


def save_model(model: ClassifierModel, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(serialize_model(model))


def load_model(path: str | Path) -> ClassifierModel:
    path = Path(path)
    if not path.exists():
        raise MissingFileError(path)
    return deserialize_model(path.read_bytes())
