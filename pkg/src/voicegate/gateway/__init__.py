"""The running access-control service: command pipeline, challenge queue,
append-only audit log and the REST application serving them."""

from __future__ import annotations

from .audit import AuditLog, AuditQueryResult
from .challenges import ChallengeRecord, ChallengeStatus, ChallengeStore, Verdict
from .service import CommandRequest, Gateway, HandleResult

__all__ = [
    "AuditLog",
    "AuditQueryResult",
    "ChallengeRecord",
    "ChallengeStatus",
    "ChallengeStore",
    "CommandRequest",
    "Gateway",
    "HandleResult",
    "Verdict",
]
