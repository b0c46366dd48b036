"""Append-only audit log: one JSON envelope per line, CRC32 per line.

Two record kinds share the file. A "command" record is written when a
request finishes the pipeline; an "outcome" record is written later when its
challenge resolves. Queries fold outcomes back into their command records so
readers see one row per command. Timestamps are clamped monotonic within the
writer so a file never goes backwards even if the wall clock does.

The writer is a single ordered critical section and lines are flushed before
the caller regains control, so every responded-to request survives a process
kill.
"""

from __future__ import annotations

import json
import threading
import time
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from ..errors import CorruptRecordError, MissingFileError

KIND_COMMAND = "command"
KIND_OUTCOME = "outcome"

OUTCOME_PENDING = "pending"
OUTCOME_EXECUTED = "executed"
OUTCOME_BLOCKED = "blocked"
OUTCOME_TIMEOUT = "blocked (timeout)"


def _envelope(record: Mapping) -> str:
    body = json.dumps(record, sort_keys=True, separators=(",", ":"))
    crc = zlib.crc32(body.encode("utf-8")) & 0xFFFFFFFF
    return json.dumps({"record": json.loads(body), "crc32": f"{crc:08x}"}, sort_keys=True, separators=(",", ":"))


def _open_envelope(line: str) -> Mapping:
    wrapper = json.loads(line)
    body = json.dumps(wrapper["record"], sort_keys=True, separators=(",", ":"))
    crc = zlib.crc32(body.encode("utf-8")) & 0xFFFFFFFF
    if f"{crc:08x}" != wrapper["crc32"]:
        raise ValueError("crc mismatch")
    return wrapper["record"]


@dataclass(frozen=True)
class AuditQueryResult:
    records: tuple[dict, ...]
    corrupt_lines: tuple[int, ...]


class AuditLog:
    """Serialized writer plus query support over one log file."""

    def __init__(self, path: str | Path, clock=None):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._clock = clock if clock is not None else lambda: int(time.time() * 1000)
        self._last_ts = 0
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = self.path.open("a", encoding="utf-8")

    def close(self) -> None:
        with self._lock:
            self._fh.close()

    def _stamp(self) -> int:
        now = int(self._clock())
        self._last_ts = max(self._last_ts, now)
        return self._last_ts

    def append(self, record: Mapping) -> dict:
        """Stamp, write and flush one record; returns the stored form."""
        with self._lock:
            stored = dict(record)
            stored["ts_ms"] = self._stamp()
            self._fh.write(_envelope(stored) + "\n")
            self._fh.flush()
            return stored

    # --- reading -------------------------------------------------------------

    def _read(self) -> tuple[list[dict], list[int]]:
        records: list[dict] = []
        corrupt: list[int] = []
        if not self.path.exists():
            raise MissingFileError(self.path)
        with self._lock:
            self._fh.flush()
        with self.path.open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    records.append(dict(_open_envelope(line)))
                except (ValueError, KeyError, TypeError):
                    corrupt.append(lineno)
        return records, corrupt

    def query(
        self,
        ts_from: int | None = None,
        ts_to: int | None = None,
        action: str | None = None,
        label: str | None = None,
        audit_id: str | None = None,
    ) -> AuditQueryResult:
        """Folded command records matching every given filter, in time order.

        Corrupt lines (failed CRC or unparseable) are skipped and reported in
        the result, per CorruptRecord semantics, rather than aborting the
        query.
        """
        raw, corrupt = self._read()
        outcomes: dict[str, str] = {}
        commands: list[dict] = []
        for record in raw:
            kind = record.get("kind")
            if kind == KIND_OUTCOME:
                outcomes[record["audit_id"]] = record["outcome"]
            elif kind == KIND_COMMAND:
                commands.append(record)

        out: list[dict] = []
        for record in commands:
            final = outcomes.get(record["audit_id"])
            if final is not None:
                record["outcome"] = final
            if ts_from is not None and record["ts_ms"] < ts_from:
                continue
            if ts_to is not None and record["ts_ms"] > ts_to:
                continue
            if action is not None and record["decision"]["action"] != action:
                continue
            if label is not None and record["decision"]["matched_label"] != label:
                continue
            if audit_id is not None and record["audit_id"] != audit_id:
                continue
            out.append(record)
        out.sort(key=lambda r: r["ts_ms"])
        return AuditQueryResult(records=tuple(out), corrupt_lines=tuple(corrupt))

    def corrupt_errors(self) -> Iterable[CorruptRecordError]:
        _, corrupt = self._read()
        return [CorruptRecordError(line) for line in corrupt]
