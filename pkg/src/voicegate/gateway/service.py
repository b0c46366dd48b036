"""Command pipeline orchestration behind the REST surface.

Models and policies are immutable snapshots; replacing a policy swaps the
reference atomically so in-flight requests see the old or the new document,
never a blend. Actual device actuation is a pluggable sink; the default sink
only records, which keeps the whole system side-effect free.
"""

from __future__ import annotations

import logging
import threading
import time
import uuid
from dataclasses import dataclass, field
from typing import Callable, Mapping

from ..errors import ModelNotLoadedError, PolicyNotLoadedError
from ..noise import NoiseSpec, corrupt_text
from ..nlu.model import ClassifierModel, Prediction, predict
from ..policy import Action, Decision, Policy, decide
from ..taxonomy import AXES_BY_PLATFORM, Platform, TaxonomyAxis
from .audit import (
    KIND_COMMAND,
    KIND_OUTCOME,
    OUTCOME_BLOCKED,
    OUTCOME_EXECUTED,
    OUTCOME_PENDING,
    OUTCOME_TIMEOUT,
    AuditLog,
)
from .challenges import DEFAULT_TTL_MS, ChallengeRecord, ChallengeStatus, ChallengeStore, Verdict

log = logging.getLogger(__name__)

_STATUS_OUTCOME = {
    ChallengeStatus.APPROVED: OUTCOME_EXECUTED,
    ChallengeStatus.DENIED: OUTCOME_BLOCKED,
    ChallengeStatus.EXPIRED: OUTCOME_TIMEOUT,
}


@dataclass(frozen=True)
class CommandRequest:
    text: str
    platform: Platform
    apply_noise: bool = False
    noise_spec_override: NoiseSpec | None = None

    def __post_init__(self):
        if not self.text or not self.text.strip():
            raise ValueError("command text must be non-empty")


@dataclass(frozen=True)
class HandleResult:
    decision: Decision
    audit_id: str
    challenge_id: str | None
    effective_text: str
    predictions: Mapping[TaxonomyAxis, Prediction]
    latency_us: Mapping[str, int] = field(default_factory=dict)


def _log_sink(text: str, platform: str, source: str) -> None:
    log.info("executing %s command from %s: %r", platform, source, text)


class Gateway:
    """Noise → NLU → policy pipeline plus challenge and audit bookkeeping."""

    def __init__(
        self,
        models: Mapping[TaxonomyAxis, ClassifierModel],
        policies: Mapping[Platform, Policy],
        audit: AuditLog,
        noise_spec: NoiseSpec | None = None,
        challenge_ttl_ms: int = DEFAULT_TTL_MS,
        clock: Callable[[], int] | None = None,
        execution_sink: Callable[[str, str, str], None] | None = None,
    ):
        self._models = dict(models)
        self._policies = dict(policies)
        self._policy_lock = threading.Lock()
        self.audit = audit
        self.noise_spec = noise_spec
        self._sink = execution_sink if execution_sink is not None else _log_sink
        self.challenges = ChallengeStore(
            ttl_ms=challenge_ttl_ms, clock=clock, on_transition=self._challenge_resolved
        )

    # --- pipeline -------------------------------------------------------------

    def handle_command(self, request: CommandRequest) -> HandleResult:
        platform = request.platform
        axes = AXES_BY_PLATFORM[platform]
        for axis in axes:
            if axis not in self._models:
                raise ModelNotLoadedError(axis.value)
        policy = self._policies.get(platform)
        if policy is None:
            raise PolicyNotLoadedError(platform.value)

        t0 = time.perf_counter_ns()
        effective_text = request.text
        if request.apply_noise:
            spec = request.noise_spec_override or self.noise_spec
            if spec is None:
                raise ValueError("noise requested but no noise spec is configured")
            effective_text = corrupt_text(request.text, spec)
        t1 = time.perf_counter_ns()

        predictions = {axis: predict(self._models[axis], effective_text) for axis in axes}
        t2 = time.perf_counter_ns()

        decision = decide(policy, predictions)
        t3 = time.perf_counter_ns()

        audit_id = uuid.uuid4().hex
        challenge: ChallengeRecord | None = None
        if decision.action is Action.CHALLENGE:
            challenge = self.challenges.create(
                audit_id=audit_id,
                text=request.text,
                platform=platform.value,
                matched_label=decision.matched_label.name,
                matched_axis=decision.matched_axis.value,
                confidence=decision.confidence,
            )
            outcome = OUTCOME_PENDING
        else:
            self._sink(request.text, platform.value, "allow")
            outcome = OUTCOME_EXECUTED

        latency_us = {
            "noise": (t1 - t0) // 1000,
            "nlu": (t2 - t1) // 1000,
            "policy": (t3 - t2) // 1000,
            "total": (t3 - t0) // 1000,
        }
        self.audit.append(
            {
                "kind": KIND_COMMAND,
                "audit_id": audit_id,
                "platform": platform.value,
                "raw_text": request.text,
                "effective_text": effective_text,
                "predictions": {
                    axis.value: [[label.name, prob] for label, prob in pred.ranking[:3]]
                    for axis, pred in predictions.items()
                },
                "decision": decision.to_dict(),
                "challenge_id": challenge.id if challenge else None,
                "outcome": outcome,
                "latency_us": latency_us,
            }
        )
        return HandleResult(
            decision=decision,
            audit_id=audit_id,
            challenge_id=challenge.id if challenge else None,
            effective_text=effective_text,
            predictions=predictions,
            latency_us=latency_us,
        )

    # --- challenges -----------------------------------------------------------

    def _challenge_resolved(self, record: ChallengeRecord, status: ChallengeStatus) -> None:
        if status is ChallengeStatus.APPROVED:
            self._sink(record.text, record.platform, "challenge-approved")
        self.audit.append(
            {
                "kind": KIND_OUTCOME,
                "audit_id": record.audit_id,
                "challenge_id": record.id,
                "outcome": _STATUS_OUTCOME[status],
            }
        )

    def respond_challenge(self, challenge_id: str, verdict: Verdict) -> ChallengeStatus:
        return self.challenges.respond(challenge_id, verdict)

    def expire_challenges(self, now: int | None = None) -> int:
        return self.challenges.sweep_expired(now)

    # --- policy ---------------------------------------------------------------

    def policy_for(self, platform: Platform) -> Policy:
        policy = self._policies.get(platform)
        if policy is None:
            raise PolicyNotLoadedError(platform.value)
        return policy

    def replace_policy(self, policy: Policy) -> Policy:
        """Swap in a new document; the stored version increments by one.

        The caller must submit against the current version (optimistic lock);
        a stale version raises ValueError carrying the current one.
        """
        with self._policy_lock:
            current = self._policies.get(policy.platform)
            if current is not None and policy.version != current.version:
                raise PolicyVersionConflict(current.version)
            stored = Policy(
                platform=policy.platform,
                rules=policy.rules,
                default_sensitivity=policy.default_sensitivity,
                min_confidence=policy.min_confidence,
                axis_priority=policy.axis_priority,
                version=policy.version + 1,
            )
            self._policies[policy.platform] = stored
            return stored

    # --- introspection ----------------------------------------------------------

    def health(self) -> dict:
        return {
            "models_loaded": {axis.value: axis in self._models for axis in TaxonomyAxis},
            "policy_version": {
                platform.value: self._policies[platform].version
                for platform in self._policies
            },
        }


class PolicyVersionConflict(Exception):
    def __init__(self, current_version: int):
        super().__init__(f"policy version conflict; server has version {current_version}")
        self.current_version = current_version
