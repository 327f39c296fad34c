"""Replicated publication storage: content-addressed blobs, per-origin
append-only logs, DOI-style identifiers, and pull-based anti-entropy.

Each node appends its own publications under a gapless per-origin sequence
and periodically pulls missing entries from its peers. Version vectors
summarize what a node holds contiguously; entries arriving out of order wait
in a pending buffer until the gap closes, so the visible region of every log
is always gapless. Publications are immutable; convergence needs nothing
more than repeated pairwise pulls.
"""

from __future__ import annotations

import base64
import hashlib
import json
import os
import threading
from dataclasses import dataclass
from pathlib import Path

from .canonical import canonical_json
from .errors import DigestMismatch, DuplicatePaper, MalformedEntry

DOI_PREFIX = "10.9999"
PROTOCOL_VERSION = "1"

VersionVector = dict[str, int]


def content_id(canonical_bytes_: bytes) -> str:
    """SHA-256 digest (hex) of the canonical manuscript bytes."""
    return hashlib.sha256(canonical_bytes_).hexdigest()


def make_doi(origin_node: str, seq: int) -> str:
    return f"{DOI_PREFIX}/{origin_node}.{seq}"


@dataclass(frozen=True)
class PublicationLogEntry:
    origin_node: str
    seq: int
    paper_id: str
    content_hash: str  # hex sha-256 of the manuscript bytes
    doi: str
    metadata: dict  # title, authors, keywords, rr, published_at

    def key(self) -> tuple[str, int]:
        return (self.origin_node, self.seq)

    def to_dict(self) -> dict:
        return {
            "origin_node": self.origin_node,
            "seq": self.seq,
            "paper_id": self.paper_id,
            "content_hash": self.content_hash,
            "doi": self.doi,
            "metadata": self.metadata,
        }

    def to_wire(self) -> dict:
        d = self.to_dict()
        d["content_ref"] = base64.b64encode(bytes.fromhex(self.content_hash)).decode("ascii")
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PublicationLogEntry":
        try:
            entry = cls(
                origin_node=d["origin_node"],
                seq=int(d["seq"]),
                paper_id=d["paper_id"],
                content_hash=d["content_hash"],
                doi=d["doi"],
                metadata=dict(d["metadata"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedEntry(f"bad publication entry: {exc}") from exc
        if entry.seq < 1:
            raise MalformedEntry(f"sequence {entry.seq} below 1")
        if len(entry.content_hash) != 64:
            raise MalformedEntry("content_hash must be a hex sha-256 digest")
        if entry.doi != make_doi(entry.origin_node, entry.seq):
            raise MalformedEntry(f"doi {entry.doi!r} does not match origin and seq")
        return entry

    @classmethod
    def from_wire(cls, d: dict) -> "PublicationLogEntry":
        entry = cls.from_dict(d)
        ref = d.get("content_ref")
        if ref is not None:
            try:
                decoded = base64.b64decode(ref, validate=True).hex()
            except Exception as exc:
                raise MalformedEntry(f"bad content_ref: {exc}") from exc
            if decoded != entry.content_hash:
                raise MalformedEntry("content_ref does not match content_hash")
        return entry


class BlobStore:
    """Content-addressed blob storage; in memory or under a directory."""

    def __init__(self, directory: str | os.PathLike | None = None):
        self._dir = Path(directory) if directory is not None else None
        self._mem: dict[str, bytes] = {}
        if self._dir is not None:
            self._dir.mkdir(parents=True, exist_ok=True)

    def put(self, data: bytes) -> str:
        digest = content_id(data)
        if self._dir is None:
            self._mem[digest] = data
        else:
            path = self._dir / digest
            if not path.exists():
                tmp = path.with_suffix(".tmp")
                tmp.write_bytes(data)
                tmp.replace(path)
        return digest

    def get(self, digest: str) -> bytes | None:
        if self._dir is None:
            return self._mem.get(digest)
        path = self._dir / digest
        return path.read_bytes() if path.exists() else None

    def has(self, digest: str) -> bool:
        return self.get(digest) is not None


class FederationLog:
    """A node's view of the federation-wide publication set.

    The visible region is gapless per origin; entries beyond a gap sit in the
    pending buffer until their predecessors arrive. All mutation goes through
    ``publish_local`` and ``apply_entries``, both idempotent.
    """

    def __init__(self, node_id: str, blobs: BlobStore, directory: str | os.PathLike | None = None):
        self.node_id = node_id
        self.blobs = blobs
        self._lock = threading.RLock()  # publication and sync share one writer
        self._visible: dict[tuple[str, int], PublicationLogEntry] = {}
        self._pending: dict[tuple[str, int], PublicationLogEntry] = {}
        self._published_paper_ids: set[str] = set()
        self._dir = Path(directory) if directory is not None else None
        if self._dir is not None:
            self._dir.mkdir(parents=True, exist_ok=True)
            self._load()

    # -- local appends ----------------------------------------------------------

    def next_local_seq(self) -> int:
        return self.version_vector().get(self.node_id, 0) + 1

    def publish_local(self, entry: PublicationLogEntry, data: bytes) -> PublicationLogEntry:
        with self._lock:
            if entry.paper_id in self._published_paper_ids:
                raise DuplicatePaper(f"{entry.paper_id} already published on this node")
            if content_id(data) != entry.content_hash:
                raise DigestMismatch("blob does not match entry content_hash")
            self.blobs.put(data)
            self._insert(entry)
            return entry

    def ensure_local(self, entry: PublicationLogEntry, data: bytes | None = None) -> None:
        """Idempotent re-insertion used when rebuilding from a replayed state."""
        with self._lock:
            if entry.key() in self._visible:
                return
            if data is not None:
                self.blobs.put(data)
            self._insert(entry)

    # -- replication ------------------------------------------------------------

    def version_vector(self) -> VersionVector:
        """Highest contiguous sequence held per origin."""
        highest: VersionVector = {}
        by_origin: dict[str, set[int]] = {}
        for origin, seq in self._visible:
            by_origin.setdefault(origin, set()).add(seq)
        for origin, seqs in by_origin.items():
            n = 0
            while n + 1 in seqs:
                n += 1
            if n:
                highest[origin] = n
        return highest

    def diff_since(self, remote_vv: VersionVector) -> list[PublicationLogEntry]:
        """Visible entries the remote lacks, ordered by (origin, seq)."""
        out = [
            e for e in self._visible.values()
            if e.seq > int(remote_vv.get(e.origin_node, 0))
        ]
        out.sort(key=lambda e: (e.origin_node, e.seq))
        return out

    def apply_entries(self, entries, fetch_blob) -> list[PublicationLogEntry]:
        """Insert remote entries after digest verification; returns those applied.

        ``fetch_blob(digest)`` must return the raw bytes or None. Application
        is idempotent; entries that would leave a gap wait in the pending
        buffer and become visible once contiguous.
        """
        with self._lock:
            applied: list[PublicationLogEntry] = []
            for raw in entries:
                entry = raw if isinstance(raw, PublicationLogEntry) else PublicationLogEntry.from_wire(raw)
                if entry.key() in self._visible or entry.key() in self._pending:
                    continue
                if not self.blobs.has(entry.content_hash):
                    data = fetch_blob(entry.content_hash)
                    if data is None:
                        raise DigestMismatch(f"blob {entry.content_hash} unavailable")
                    if content_id(data) != entry.content_hash:
                        raise DigestMismatch(f"blob bytes do not match {entry.content_hash}")
                    self.blobs.put(data)
                self._pending[entry.key()] = entry
                applied.append(entry)
            self._drain_pending()
            return applied

    def _drain_pending(self) -> None:
        moved = True
        while moved:
            moved = False
            vv = self.version_vector()
            for key in sorted(self._pending):
                origin, seq = key
                if seq == vv.get(origin, 0) + 1:
                    self._insert(self._pending.pop(key))
                    moved = True
                    break

    def _insert(self, entry: PublicationLogEntry) -> None:
        if entry.key() in self._visible:
            return
        self._visible[entry.key()] = entry
        self._published_paper_ids.add(entry.paper_id)
        self._persist(entry)

    # -- views --------------------------------------------------------------------

    def visible_entries(self) -> list[PublicationLogEntry]:
        return sorted(self._visible.values(), key=lambda e: (e.origin_node, e.seq))

    def entry_for_paper(self, paper_id: str) -> PublicationLogEntry | None:
        for e in self._visible.values():
            if e.paper_id == paper_id:
                return e
        return None

    def canonical(self) -> str:
        return canonical_json([e.to_dict() for e in self.visible_entries()])

    # -- persistence ----------------------------------------------------------------

    def _persist(self, entry: PublicationLogEntry) -> None:
        if self._dir is None:
            return
        with open(self._dir / "publications.ndjson", "a", encoding="utf-8") as fh:
            fh.write(canonical_json(entry.to_dict()) + "\n")

    def _load(self) -> None:
        path = self._dir / "publications.ndjson"
        if not path.exists():
            return
        entries = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    entries.append(PublicationLogEntry.from_dict(json.loads(line)))
        persist_dir, self._dir = self._dir, None  # avoid rewriting during load
        try:
            for e in entries:
                self._pending[e.key()] = e
            self._drain_pending()
        finally:
            self._dir = persist_dir


def sync_pull(local: FederationLog, remote: FederationLog) -> int:
    """One in-process anti-entropy pull: fetch what ``remote`` has beyond
    ``local``'s version vector. Returns the number of entries applied."""
    missing = remote.diff_since(local.version_vector())
    applied = local.apply_entries(missing, fetch_blob=remote.blobs.get)
    return len(applied)


class HttpSyncClient:
    """Pull-based sync against a peer's HTTP surface."""

    def __init__(self, base_url: str, client=None):
        import httpx

        self.base_url = base_url.rstrip("/")
        self._client = client or httpx.Client(timeout=10.0)

    def pull_into(self, local: FederationLog) -> int:
        vv = local.version_vector()
        resp = self._client.get(
            f"{self.base_url}/sync/entries", params={"after": canonical_json(vv)}
        )
        resp.raise_for_status()
        entries = resp.json()

        def fetch_blob(digest: str) -> bytes | None:
            r = self._client.get(f"{self.base_url}/blobs/{digest}")
            if r.status_code != 200:
                return None
            return r.content

        return len(local.apply_entries(entries, fetch_blob))
