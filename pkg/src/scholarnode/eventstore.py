"""Append-only event log with a digest chain, ndjson segments and snapshots.

One event per line, `events-<first seq>.ndjson` segment files, each record
carrying a rolling digest so any single-byte corruption is caught at replay.
Snapshots are `snapshot-<seq>.json` files with an embedded schema version;
restoring a snapshot and replaying the tail must equal a full replay.
"""

from __future__ import annotations

import json
import os
from datetime import datetime
from pathlib import Path

from .canonical import canonical_json
from .errors import CorruptLog, SchemaViolation, SnapshotVersionMismatch, StorageFailure
from .events import DomainEvent, chain_digest, validate_event

SNAPSHOT_SCHEMA_VERSION = 1


class EventStore:
    """Single-writer append log. ``directory=None`` keeps everything in memory."""

    def __init__(self, directory: str | os.PathLike | None = None, segment_size: int = 10_000):
        self._events: list[DomainEvent] = []
        self._last_digest = ""
        self._dir = Path(directory) if directory is not None else None
        self._segment_size = segment_size
        self._handle = None
        if self._dir is not None:
            self._dir.mkdir(parents=True, exist_ok=True)
            self._load_existing()

    # -- write path -----------------------------------------------------------

    def append(self, kind: str, payload: dict, at: datetime) -> DomainEvent:
        validate_event(kind, payload)
        try:
            canonical_json(payload)
        except (TypeError, ValueError) as exc:
            raise SchemaViolation(f"payload not JSON-serializable: {exc}") from exc
        seq = len(self._events) + 1
        event = DomainEvent(seq=seq, at=at, kind=kind, payload=payload)
        digest = chain_digest(self._last_digest, event.body_dict())
        event = DomainEvent(seq=seq, at=at, kind=kind, payload=payload, digest=digest)
        if self._dir is not None:
            self._write_line(event)
        self._events.append(event)
        self._last_digest = digest
        return event

    def _write_line(self, event: DomainEvent) -> None:
        try:
            if self._handle is None or (event.seq - 1) % self._segment_size == 0:
                if self._handle is not None:
                    self._handle.close()
                path = self._dir / f"events-{event.seq}.ndjson"
                self._handle = open(path, "a", encoding="utf-8")
            self._handle.write(canonical_json(event.to_dict()) + "\n")
            self._handle.flush()
            os.fsync(self._handle.fileno())
        except OSError as exc:
            raise StorageFailure(f"event append failed: {exc}") from exc

    # -- read path ------------------------------------------------------------

    @property
    def last_seq(self) -> int:
        return len(self._events)

    def events(self, from_seq: int = 1) -> list[DomainEvent]:
        if from_seq < 1 or from_seq > len(self._events) + 1:
            raise CorruptLog(f"from_seq {from_seq} outside log bounds")
        return self._events[from_seq - 1 :]

    def replay(self, apply, initial, from_seq: int = 1):
        """Fold ``apply`` over the log from ``from_seq``; verifies the digest chain."""
        state = initial
        prev = "" if from_seq == 1 else self._events[from_seq - 2].digest
        for event in self.events(from_seq):
            expect = chain_digest(prev, event.body_dict())
            if event.digest != expect:
                raise CorruptLog(f"digest mismatch at seq {event.seq}")
            state = apply(state, event)
            prev = event.digest
        return state

    # -- snapshots --------------------------------------------------------------

    def snapshot(self, state_dict: dict, at_seq: int, path: Path | None = None) -> Path | None:
        if at_seq > self.last_seq:
            raise CorruptLog(f"snapshot seq {at_seq} beyond log end {self.last_seq}")
        doc = {
            "schema_version": SNAPSHOT_SCHEMA_VERSION,
            "at_seq": at_seq,
            "digest": self._events[at_seq - 1].digest if at_seq > 0 else "",
            "state": state_dict,
        }
        if path is None:
            if self._dir is None:
                return None
            path = self._dir / f"snapshot-{at_seq}.json"
        tmp = path.with_suffix(".tmp")
        tmp.write_text(canonical_json(doc), encoding="utf-8")
        tmp.replace(path)
        return path

    @staticmethod
    def restore(path: str | os.PathLike) -> tuple[dict, int]:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        version = doc.get("schema_version")
        if version != SNAPSHOT_SCHEMA_VERSION:
            raise SnapshotVersionMismatch(
                f"snapshot schema {version}, this build reads {SNAPSHOT_SCHEMA_VERSION}"
            )
        return doc["state"], doc["at_seq"]

    # -- startup ----------------------------------------------------------------

    def _load_existing(self) -> None:
        segments = sorted(
            self._dir.glob("events-*.ndjson"),
            key=lambda p: int(p.stem.split("-")[1]),
        )
        prev = ""
        for seg in segments:
            with open(seg, encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    try:
                        event = DomainEvent.from_dict(json.loads(line))
                    except (json.JSONDecodeError, KeyError) as exc:
                        raise CorruptLog(f"unreadable event record in {seg.name}: {exc}") from exc
                    if event.seq != len(self._events) + 1:
                        raise CorruptLog(f"sequence gap at {event.seq} in {seg.name}")
                    if chain_digest(prev, event.body_dict()) != event.digest:
                        raise CorruptLog(f"digest mismatch at seq {event.seq}")
                    self._events.append(event)
                    prev = event.digest
        self._last_digest = prev

    def close(self) -> None:
        if self._handle is not None:
            self._handle.close()
            self._handle = None
