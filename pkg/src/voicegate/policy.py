"""Sensitivity rules and the allow/challenge decision.

A policy document is per platform: a set of label→sensitivity rules across
that platform's two axes, a default sensitivity, an axis priority order and
a confidence floor. Decisions are conservative twice over: a low-confidence
primary prediction is treated as sensitive (fail closed), and if any
consulted axis ranks a sensitive label first the whole command is sensitive
(most-restrictive-wins). The v1 action mapping is fixed: NonSensitive→Allow,
Sensitive→Challenge; Block arises only from challenge denial or expiry.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Mapping, Sequence

from .errors import (
    DuplicateRuleError,
    MalformedDocumentError,
    MissingAxisPredictionError,
    MissingFileError,
    UnknownLabelError,
)
from .nlu.model import Prediction
from .taxonomy import (
    AXES_BY_PLATFORM,
    IntentLabel,
    Platform,
    TaxonomyAxis,
    TaxonomyInventory,
)

DEFAULT_MIN_CONFIDENCE = 0.5


class Sensitivity(str, Enum):
    NON_SENSITIVE = "NonSensitive"
    SENSITIVE = "Sensitive"


class Action(str, Enum):
    ALLOW = "Allow"
    CHALLENGE = "Challenge"
    BLOCK = "Block"


class Rationale(str, Enum):
    RULE_MATCH = "RuleMatch"
    DEFAULT_APPLIED = "DefaultApplied"
    LOW_CONFIDENCE = "LowConfidence"


_ACTION_FOR_SENSITIVITY = {
    Sensitivity.NON_SENSITIVE: Action.ALLOW,
    Sensitivity.SENSITIVE: Action.CHALLENGE,
}


@dataclass(frozen=True)
class Policy:
    platform: Platform
    rules: Mapping[IntentLabel, Sensitivity]
    default_sensitivity: Sensitivity = Sensitivity.NON_SENSITIVE
    min_confidence: float = DEFAULT_MIN_CONFIDENCE
    axis_priority: tuple[TaxonomyAxis, ...] = ()
    version: int = 1

    def __post_init__(self):
        object.__setattr__(self, "rules", dict(self.rules))
        if not self.axis_priority:
            object.__setattr__(self, "axis_priority", AXES_BY_PLATFORM[self.platform])
        if not 0.0 <= self.min_confidence <= 1.0:
            raise ValueError(f"min_confidence must be in [0, 1], got {self.min_confidence}")
        if sorted(a.value for a in self.axis_priority) != sorted(
            a.value for a in AXES_BY_PLATFORM[self.platform]
        ):
            raise ValueError(
                f"axis_priority must cover both {self.platform.value} axes exactly once"
            )
        for label in self.rules:
            if label.axis.platform is not self.platform:
                raise ValueError(
                    f"rule label {label.name} is on axis {label.axis.value}, "
                    f"not a {self.platform.value} axis"
                )

    def sensitivity_of(self, label: IntentLabel) -> Sensitivity:
        return self.rules.get(label, self.default_sensitivity)

    def to_dict(self) -> dict:
        rules: dict[str, dict[str, str]] = {axis.value: {} for axis in self.axis_priority}
        for label, sensitivity in self.rules.items():
            rules[label.axis.value][label.name] = sensitivity.value
        return {
            "version": self.version,
            "platform": self.platform.value,
            "default_sensitivity": self.default_sensitivity.value,
            "min_confidence": self.min_confidence,
            "axis_priority": [axis.value for axis in self.axis_priority],
            "rules": {axis: dict(sorted(named.items())) for axis, named in rules.items()},
        }


@dataclass(frozen=True)
class Decision:
    action: Action
    matched_label: IntentLabel
    matched_axis: TaxonomyAxis
    confidence: float
    rationale: Rationale

    def to_dict(self) -> dict:
        return {
            "action": self.action.value,
            "matched_label": self.matched_label.name,
            "matched_axis": self.matched_axis.value,
            "confidence": self.confidence,
            "rationale": self.rationale.value,
        }


def decide(policy: Policy, predictions: Mapping[TaxonomyAxis, Prediction]) -> Decision:
    """Fuse per-axis predictions into one action.

    The confidence floor applies to the primary (first-priority) axis: below
    it the command is sensitive outright. Otherwise every axis's top-1 label
    is mapped through the rules and the first sensitive hit, in priority
    order, decides; only if all axes come up non-sensitive is the command
    allowed, attributed to the primary axis.
    """
    for axis in policy.axis_priority:
        if axis not in predictions:
            raise MissingAxisPredictionError(axis)

    primary_axis = policy.axis_priority[0]
    primary = predictions[primary_axis]
    primary_label, primary_prob = primary.ranking[0]
    if primary_prob < policy.min_confidence:
        return Decision(
            action=Action.CHALLENGE,
            matched_label=primary_label,
            matched_axis=primary_axis,
            confidence=primary_prob,
            rationale=Rationale.LOW_CONFIDENCE,
        )

    for axis in policy.axis_priority:
        label, prob = predictions[axis].ranking[0]
        if policy.sensitivity_of(label) is Sensitivity.SENSITIVE:
            return Decision(
                action=Action.CHALLENGE,
                matched_label=label,
                matched_axis=axis,
                confidence=prob,
                rationale=Rationale.RULE_MATCH if label in policy.rules else Rationale.DEFAULT_APPLIED,
            )

    return Decision(
        action=Action.ALLOW,
        matched_label=primary_label,
        matched_axis=primary_axis,
        confidence=primary_prob,
        rationale=Rationale.RULE_MATCH
        if primary_label in policy.rules
        else Rationale.DEFAULT_APPLIED,
    )


# --- document parsing and validation ----------------------------------------


@dataclass(frozen=True)
class PolicyViolation:
    field: str
    message: str
    axis: str | None = None
    label: str | None = None

    def to_dict(self) -> dict:
        out = {"field": self.field, "message": self.message}
        if self.axis is not None:
            out["axis"] = self.axis
        if self.label is not None:
            out["label"] = self.label
        return out

    def __str__(self) -> str:
        where = f"{self.axis}/{self.label}: " if self.label else ""
        return f"{self.field}: {where}{self.message}"


def _reject_duplicate_keys(pairs):
    seen = set()
    for key, _ in pairs:
        if key in seen:
            raise DuplicateRuleError(key)
        seen.add(key)
    return dict(pairs)


def parse_policy(data: Mapping) -> Policy:
    """Build a Policy from a parsed document; structural errors only.

    Label existence against an inventory is a semantic question answered by
    :func:`validate_policy`, so a parseable-but-wrong document can still be
    inspected and its violations enumerated.
    """
    if not isinstance(data, Mapping):
        raise MalformedDocumentError("policy document must be an object")
    try:
        platform = Platform(data["platform"])
        default = Sensitivity(data.get("default_sensitivity", "NonSensitive"))
        min_confidence = float(data.get("min_confidence", DEFAULT_MIN_CONFIDENCE))
        version = int(data.get("version", 1))
        axis_priority = tuple(TaxonomyAxis(a) for a in data.get("axis_priority", ()))
        rules: dict[IntentLabel, Sensitivity] = {}
        for axis_name, named in (data.get("rules") or {}).items():
            axis = TaxonomyAxis(axis_name)
            for label_name, sensitivity in named.items():
                rules[IntentLabel(axis, label_name)] = Sensitivity(sensitivity)
    except KeyError as exc:
        raise MalformedDocumentError(f"missing field {exc.args[0]!r}") from exc
    except (TypeError, ValueError, AttributeError) as exc:
        raise MalformedDocumentError(str(exc)) from exc
    try:
        return Policy(
            platform=platform,
            rules=rules,
            default_sensitivity=default,
            min_confidence=min_confidence,
            axis_priority=axis_priority,
            version=version,
        )
    except ValueError as exc:
        raise MalformedDocumentError(str(exc)) from exc


def load_policy(
    path: str | Path,
    inventory: TaxonomyInventory | None = None,
    strict: bool = True,
) -> Policy:
    """Read a policy JSON file; with strict=True unknown labels raise."""
    path = Path(path)
    if not path.exists():
        raise MissingFileError(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"), object_pairs_hook=_reject_duplicate_keys)
    except DuplicateRuleError:
        raise
    except json.JSONDecodeError as exc:
        raise MalformedDocumentError(f"invalid JSON: {exc.msg}") from exc
    policy = parse_policy(data)
    if strict:
        if inventory is None:
            from .resources import default_inventory

            inventory = default_inventory()
        violations = validate_policy(policy, inventory)
        if violations:
            first = violations[0]
            if first.label is not None:
                raise UnknownLabelError(first.label, axis=TaxonomyAxis(first.axis))
            raise MalformedDocumentError(str(first))
    return policy


def validate_policy(policy: Policy, inventory: TaxonomyInventory) -> list[PolicyViolation]:
    """Enumerate every problem instead of stopping at the first."""
    violations: list[PolicyViolation] = []
    for label in policy.rules:
        if not inventory.contains(label.axis, label.name):
            violations.append(
                PolicyViolation(
                    field="rules",
                    axis=label.axis.value,
                    label=label.name,
                    message="label not in inventory",
                )
            )
    return violations


def default_policy(platform: Platform) -> Policy:
    """The shipped per-platform defaults (security-relevant labels sensitive)."""
    from .resources import default_inventory, default_policy_path

    return load_policy(default_policy_path(platform), default_inventory())
