"""Pending-approval store: the human 2FA surrogate.

A challenge makes exactly one transition, Pending to one of Approved, Denied
or Expired, no matter how many respond/sweep calls race. All transitions
happen inside one lock; observer callbacks fire after the lock is released,
in transition order, so slow audit writes never serialize the whole store.
"""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

from ..errors import ChallengeNotPendingError, UnknownChallengeError

DEFAULT_TTL_MS = 60_000


class ChallengeStatus(str, Enum):
    PENDING = "Pending"
    APPROVED = "Approved"
    DENIED = "Denied"
    EXPIRED = "Expired"


class Verdict(str, Enum):
    APPROVE = "approve"
    DENY = "deny"


_VERDICT_STATUS = {
    Verdict.APPROVE: ChallengeStatus.APPROVED,
    Verdict.DENY: ChallengeStatus.DENIED,
}


@dataclass
class ChallengeRecord:
    id: str
    audit_id: str
    text: str
    platform: str
    matched_label: str
    matched_axis: str
    confidence: float
    created_at: int
    ttl_ms: int
    status: ChallengeStatus = ChallengeStatus.PENDING
    resolved_at: int | None = field(default=None)

    @property
    def expires_at(self) -> int:
        return self.created_at + self.ttl_ms

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "audit_id": self.audit_id,
            "text": self.text,
            "platform": self.platform,
            "matched_label": self.matched_label,
            "matched_axis": self.matched_axis,
            "confidence": self.confidence,
            "created_at": self.created_at,
            "ttl_ms": self.ttl_ms,
            "expires_at": self.expires_at,
            "status": self.status.value,
        }


# Called after a transition commits: (record, new_status).
TransitionObserver = Callable[[ChallengeRecord, ChallengeStatus], None]


class ChallengeStore:
    def __init__(
        self,
        ttl_ms: int = DEFAULT_TTL_MS,
        clock: Callable[[], int] | None = None,
        on_transition: TransitionObserver | None = None,
    ):
        if ttl_ms <= 0:
            raise ValueError(f"ttl_ms must be positive, got {ttl_ms}")
        self.ttl_ms = ttl_ms
        self._clock = clock if clock is not None else lambda: int(time.time() * 1000)
        self._on_transition = on_transition
        self._lock = threading.Lock()
        self._records: dict[str, ChallengeRecord] = {}

    def _notify(self, events: list[tuple[ChallengeRecord, ChallengeStatus]]) -> None:
        if self._on_transition is None:
            return
        for record, status in events:
            self._on_transition(record, status)

    def create(
        self,
        audit_id: str,
        text: str,
        platform: str,
        matched_label: str,
        matched_axis: str,
        confidence: float,
    ) -> ChallengeRecord:
        record = ChallengeRecord(
            id=uuid.uuid4().hex,
            audit_id=audit_id,
            text=text,
            platform=platform,
            matched_label=matched_label,
            matched_axis=matched_axis,
            confidence=confidence,
            created_at=int(self._clock()),
            ttl_ms=self.ttl_ms,
        )
        with self._lock:
            self._records[record.id] = record
        return record

    def get(self, challenge_id: str) -> ChallengeRecord:
        with self._lock:
            record = self._records.get(challenge_id)
        if record is None:
            raise UnknownChallengeError(challenge_id)
        return record

    def _expire_locked(self, record: ChallengeRecord, now: int) -> bool:
        if record.status is ChallengeStatus.PENDING and now > record.expires_at:
            record.status = ChallengeStatus.EXPIRED
            record.resolved_at = now
            return True
        return False

    def respond(self, challenge_id: str, verdict: Verdict) -> ChallengeStatus:
        """Apply a human verdict; expiry is checked before the verdict."""
        events: list[tuple[ChallengeRecord, ChallengeStatus]] = []
        try:
            with self._lock:
                record = self._records.get(challenge_id)
                if record is None:
                    raise UnknownChallengeError(challenge_id)
                now = int(self._clock())
                if self._expire_locked(record, now):
                    events.append((record, ChallengeStatus.EXPIRED))
                if record.status is not ChallengeStatus.PENDING:
                    raise ChallengeNotPendingError(challenge_id, record.status.value)
                record.status = _VERDICT_STATUS[Verdict(verdict)]
                record.resolved_at = now
                events.append((record, record.status))
                return record.status
        finally:
            self._notify(events)

    def sweep_expired(self, now: int | None = None) -> int:
        """Expire every Pending record past its deadline; idempotent."""
        events: list[tuple[ChallengeRecord, ChallengeStatus]] = []
        with self._lock:
            current = int(self._clock()) if now is None else int(now)
            for record in self._records.values():
                if self._expire_locked(record, current):
                    events.append((record, ChallengeStatus.EXPIRED))
        self._notify(events)
        return len(events)

    def pending(self) -> list[ChallengeRecord]:
        """Live pending challenges, newest first; sweeps expired ones first."""
        self.sweep_expired()
        with self._lock:
            live = [r for r in self._records.values() if r.status is ChallengeStatus.PENDING]
        return sorted(live, key=lambda r: (-r.created_at, r.id))

    def all_records(self) -> list[ChallengeRecord]:
        with self._lock:
            return list(self._records.values())
