"""Intent label taxonomies and the labeled voice-command corpus model.

Each platform exposes two classification axes (Alexa: interface and
capability; Google Home: trait and device type). The label inventory is
data, not code: it ships as an editable JSON file, and every axis always
contains the reserved catch-all label ``Custom``. Corpora are immutable
after construction and safe to share across threads.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterator, Mapping, Sequence

from .errors import (
    EmptyCorpusError,
    EmptyTemplateSetError,
    MalformedRecordError,
    MissingFileError,
    UnknownLabelError,
)
from .text import normalized_key

CUSTOM_LABEL = "Custom"


class Platform(str, Enum):
    ALEXA = "Alexa"
    GOOGLE_HOME = "GoogleHome"

    @property
    def axes(self) -> tuple["TaxonomyAxis", "TaxonomyAxis"]:
        return AXES_BY_PLATFORM[self]


class TaxonomyAxis(str, Enum):
    ALEXA_INTERFACE = "AlexaInterface"
    ALEXA_CAPABILITY = "AlexaCapability"
    GOOGLE_TRAIT = "GoogleTrait"
    GOOGLE_DEVICE = "GoogleDevice"

    @property
    def platform(self) -> Platform:
        if self in (TaxonomyAxis.ALEXA_INTERFACE, TaxonomyAxis.ALEXA_CAPABILITY):
            return Platform.ALEXA
        return Platform.GOOGLE_HOME


AXES_BY_PLATFORM: dict[Platform, tuple[TaxonomyAxis, TaxonomyAxis]] = {
    Platform.ALEXA: (TaxonomyAxis.ALEXA_INTERFACE, TaxonomyAxis.ALEXA_CAPABILITY),
    Platform.GOOGLE_HOME: (TaxonomyAxis.GOOGLE_TRAIT, TaxonomyAxis.GOOGLE_DEVICE),
}

_LABEL_NAME_RE = re.compile(r"^[A-Za-z0-9_']+$")


@dataclass(frozen=True)
class IntentLabel:
    """One point in a platform taxonomy axis."""

    axis: TaxonomyAxis
    name: str

    def __post_init__(self):
        if not _LABEL_NAME_RE.match(self.name):
            raise ValueError(f"label name must be a non-empty token, got {self.name!r}")


@dataclass(frozen=True)
class TaxonomyInventory:
    """Ordered label lists per axis; ``Custom`` is always present and last."""

    labels: Mapping[TaxonomyAxis, tuple[str, ...]]

    def __post_init__(self):
        fixed: dict[TaxonomyAxis, tuple[str, ...]] = {}
        for axis in TaxonomyAxis:
            names = tuple(self.labels.get(axis, ()))
            seen = set()
            for name in names:
                IntentLabel(axis, name)
                if name in seen:
                    raise ValueError(f"duplicate label {name!r} on axis {axis.value}")
                seen.add(name)
            if CUSTOM_LABEL not in seen:
                names = names + (CUSTOM_LABEL,)
            fixed[axis] = names
        object.__setattr__(self, "labels", fixed)

    def labels_for(self, axis: TaxonomyAxis) -> tuple[str, ...]:
        return self.labels[axis]

    def contains(self, axis: TaxonomyAxis, name: str) -> bool:
        return name in self.labels[axis]

    def size(self, axis: TaxonomyAxis, include_custom: bool = False) -> int:
        n = len(self.labels[axis])
        return n if include_custom else n - 1

    @classmethod
    def from_dict(cls, data: Mapping[str, Sequence[str]]) -> "TaxonomyInventory":
        labels = {}
        for key, names in data.items():
            axis = TaxonomyAxis(key)
            labels[axis] = tuple(names)
        return cls(labels)

    @classmethod
    def from_file(cls, path: str | Path) -> "TaxonomyInventory":
        path = Path(path)
        if not path.exists():
            raise MissingFileError(path)
        return cls.from_dict(json.loads(path.read_text(encoding="utf-8")))

    def to_dict(self) -> dict[str, list[str]]:
        return {axis.value: list(names) for axis, names in self.labels.items()}


@dataclass(frozen=True)
class Utterance:
    """A single command text with its per-axis gold labels."""

    text: str
    platform: Platform
    labels: Mapping[TaxonomyAxis, str] = field(default_factory=dict)

    def __post_init__(self):
        if not normalized_key(self.text):
            raise ValueError("utterance text is empty after normalization")
        for axis in self.labels:
            if axis.platform is not self.platform:
                raise ValueError(
                    f"axis {axis.value} is not valid for platform {self.platform.value}"
                )

    def label_for(self, axis: TaxonomyAxis, default: str = CUSTOM_LABEL) -> str:
        return self.labels.get(axis, default)


@dataclass(frozen=True)
class Corpus:
    """An immutable collection of labeled utterances plus their inventory."""

    utterances: tuple[Utterance, ...]
    inventory: TaxonomyInventory
    provenance: str = ""

    def __post_init__(self):
        object.__setattr__(self, "utterances", tuple(self.utterances))
        for utt in self.utterances:
            for axis, name in utt.labels.items():
                if not self.inventory.contains(axis, name):
                    raise UnknownLabelError(name, axis=axis)

    def __len__(self) -> int:
        return len(self.utterances)

    def __iter__(self) -> Iterator[Utterance]:
        return iter(self.utterances)

    def for_platform(self, platform: Platform) -> tuple[Utterance, ...]:
        return tuple(u for u in self.utterances if u.platform is platform)


@dataclass(frozen=True)
class SplitCorpus:
    """Train/test partition produced by :func:`split_corpus`."""

    train: Corpus
    test: Corpus
    ratio: float
    seed: int


# --- loading ----------------------------------------------------------------


def load_corpus(
    path: str | Path,
    inventory: TaxonomyInventory | None = None,
    provenance: str | None = None,
) -> Corpus:
    """Read a line-delimited corpus file (one JSON record per line).

    Each record carries ``text``, ``platform`` and a ``labels`` object mapping
    axis names to label names. Blank lines are skipped; anything else that
    fails to parse or validate is rejected with its line number.
    """
    path = Path(path)
    if not path.exists():
        raise MissingFileError(path)
    if inventory is None:
        from .resources import default_inventory

        inventory = default_inventory()

    utterances = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecordError(lineno, f"invalid JSON ({exc.msg})") from exc
            utterances.append(_parse_record(record, lineno, inventory))
    return Corpus(
        utterances=tuple(utterances),
        inventory=inventory,
        provenance=provenance if provenance is not None else str(path),
    )


def _parse_record(record, lineno: int, inventory: TaxonomyInventory) -> Utterance:
    if not isinstance(record, dict):
        raise MalformedRecordError(lineno, "record is not an object")
    try:
        text = record["text"]
        platform = Platform(record["platform"])
    except KeyError as exc:
        raise MalformedRecordError(lineno, f"missing field {exc.args[0]!r}") from exc
    except ValueError as exc:
        raise MalformedRecordError(lineno, str(exc)) from exc
    if not isinstance(text, str):
        raise MalformedRecordError(lineno, "text must be a string")

    labels: dict[TaxonomyAxis, str] = {}
    for key, name in (record.get("labels") or {}).items():
        try:
            axis = TaxonomyAxis(key)
        except ValueError as exc:
            raise MalformedRecordError(lineno, f"unknown axis {key!r}") from exc
        if not inventory.contains(axis, name):
            raise UnknownLabelError(name, axis=axis, line=lineno)
        labels[axis] = name
    try:
        return Utterance(text=text, platform=platform, labels=labels)
    except ValueError as exc:
        raise MalformedRecordError(lineno, str(exc)) from exc


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write a corpus in the same line-delimited format ``load_corpus`` reads."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for utt in corpus:
            record = {
                "text": utt.text,
                "platform": utt.platform.value,
                "labels": {axis.value: name for axis, name in utt.labels.items()},
            }
            fh.write(json.dumps(record, sort_keys=True) + "\n")


# --- synthetic generation ---------------------------------------------------


@dataclass(frozen=True)
class GeneratorEntry:
    """Template set producing utterances for one fixed label combination."""

    labels: Mapping[TaxonomyAxis, str]
    templates: tuple[str, ...]
    slots: Mapping[str, tuple[str, ...]]
    count: int


@dataclass(frozen=True)
class GeneratorSpec:
    platform: Platform
    entries: Mapping[str, GeneratorEntry]

    @classmethod
    def from_file(cls, path: str | Path) -> "GeneratorSpec":
        path = Path(path)
        if not path.exists():
            raise MissingFileError(path)
        data = json.loads(path.read_text(encoding="utf-8"))
        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data: Mapping) -> "GeneratorSpec":
        platform = Platform(data["platform"])
        entries = {}
        for key, raw in data["entries"].items():
            entries[key] = GeneratorEntry(
                labels={TaxonomyAxis(a): n for a, n in raw.get("labels", {}).items()},
                templates=tuple(raw.get("templates", ())),
                slots={s: tuple(v) for s, v in raw.get("slots", {}).items()},
                count=int(raw["count"]),
            )
        return cls(platform=platform, entries=entries)


_SLOT_RE = re.compile(r"\{(\w+)\}")


def generate_synthetic_corpus(
    spec: GeneratorSpec,
    seed: int,
    inventory: TaxonomyInventory | None = None,
) -> Corpus:
    """Expand a template spec into a labeled corpus, deterministically.

    Entries are processed in file order with a single seeded RNG, so equal
    ``(spec, seed)`` inputs produce byte-identical corpora. Duplicate texts
    are allowed; the split rule downstream is expected to cope with them.
    """
    if inventory is None:
        from .resources import default_inventory

        inventory = default_inventory()

    rng = random.Random(seed)
    utterances = []
    for key, entry in spec.entries.items():
        if not entry.templates:
            raise EmptyTemplateSetError(key)
        for axis, name in entry.labels.items():
            if axis.platform is not spec.platform:
                raise ValueError(f"entry {key!r}: axis {axis.value} not valid for {spec.platform.value}")
            if not inventory.contains(axis, name):
                raise UnknownLabelError(name, axis=axis)
        for _ in range(entry.count):
            template = rng.choice(entry.templates)
            text = _fill_template(key, template, entry.slots, rng)
            utterances.append(
                Utterance(text=text, platform=spec.platform, labels=dict(entry.labels))
            )
    return Corpus(
        utterances=tuple(utterances),
        inventory=inventory,
        provenance=f"synthetic(platform={spec.platform.value}, seed={seed})",
    )


def _fill_template(key: str, template: str, slots, rng: random.Random) -> str:
    def sub(match: re.Match) -> str:
        slot = match.group(1)
        options = slots.get(slot)
        if not options:
            raise EmptyTemplateSetError(f"{key}:{slot}")
        return rng.choice(options)

    return _SLOT_RE.sub(sub, template)


# --- splitting --------------------------------------------------------------


def split_corpus(corpus: Corpus, ratio: float, seed: int) -> SplitCorpus:
    """Partition a corpus into train/test by unique normalized text.

    Unique texts are shuffled with the given seed and the last
    ``round((1-ratio) * n_unique)`` become the test pool. The test set holds
    exactly one instance per selected text; all duplicates of a train text
    stay in train, and surplus duplicates of a test text are dropped so the
    two sides never share a normalized text.
    """
    if not 0 < ratio < 1:
        raise ValueError(f"ratio must be in (0, 1), got {ratio}")
    if len(corpus) == 0:
        raise EmptyCorpusError("cannot split an empty corpus")

    keys: list[str] = []
    seen: set[str] = set()
    for utt in corpus:
        key = normalized_key(utt.text)
        if key not in seen:
            seen.add(key)
            keys.append(key)

    rng = random.Random(seed)
    rng.shuffle(keys)
    n_test = round((1.0 - ratio) * len(keys))
    test_keys = set(keys[:n_test])

    train_utts: list[Utterance] = []
    test_utts: list[Utterance] = []
    taken: set[str] = set()
    for utt in corpus:
        key = normalized_key(utt.text)
        if key in test_keys:
            if key not in taken:
                taken.add(key)
                test_utts.append(utt)
            # surplus duplicates of a test text are dropped, not leaked to train
        else:
            train_utts.append(utt)

    return SplitCorpus(
        train=Corpus(tuple(train_utts), corpus.inventory, provenance=f"{corpus.provenance}#train"),
        test=Corpus(tuple(test_utts), corpus.inventory, provenance=f"{corpus.provenance}#test"),
        ratio=ratio,
        seed=seed,
    )


# --- stats ------------------------------------------------------------------


@dataclass(frozen=True)
class CorpusStats:
    total: int
    by_axis: Mapping[TaxonomyAxis, Mapping[str, int]]
    unlabeled: Mapping[TaxonomyAxis, int]

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "by_axis": {
                axis.value: dict(sorted(counts.items())) for axis, counts in self.by_axis.items()
            },
            "unlabeled": {axis.value: n for axis, n in self.unlabeled.items()},
        }


def corpus_stats(corpus: Corpus) -> CorpusStats:
    """Per-axis, per-label utterance counts.

    For every axis, each utterance either contributes to one label count or
    to that axis's ``unlabeled`` tally (utterances from the other platform
    count as unlabeled too), so counts always sum to the corpus size.
    """
    by_axis: dict[TaxonomyAxis, dict[str, int]] = {axis: {} for axis in TaxonomyAxis}
    unlabeled: dict[TaxonomyAxis, int] = {axis: 0 for axis in TaxonomyAxis}
    for utt in corpus:
        for axis in TaxonomyAxis:
            name = utt.labels.get(axis)
            if name is None:
                unlabeled[axis] += 1
            else:
                by_axis[axis][name] = by_axis[axis].get(name, 0) + 1
    return CorpusStats(total=len(corpus), by_axis=by_axis, unlabeled=unlabeled)
