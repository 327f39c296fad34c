"""Domain event definitions and per-kind payload schemas."""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime

from .canonical import canonical_bytes, iso, parse_ts, sha256_hex
from .errors import SchemaViolation

# Required payload fields per event kind. Values are the minimal shape the
# projection relies on; handlers may record more.
EVENT_SCHEMAS: dict[str, tuple[str, ...]] = {
    "UserRegistered": ("user_id", "identity", "institution", "display_name", "keywords", "annual_quota"),
    "ManuscriptSubmitted": ("paper_id", "title", "authors", "submitting_author", "keywords",
                            "iar", "content_hash", "editorial_deadline"),
    "InitialRatingCast": ("paper_id", "rater_id", "value"),
    "EditorialClosed": ("paper_id", "ir", "low_confidence", "rule"),
    "RefereesInvited": ("paper_id", "referee_ids", "seed", "min_required", "round"),
    "InvitationAccepted": ("paper_id", "referee_id", "declared_deadline"),
    "InvitationDeclined": ("paper_id", "referee_id"),
    "ReportFiled": ("paper_id", "referee_id", "verdict", "rating", "on_time", "round"),
    "DecisionFinalized": ("paper_id", "outcome", "round", "on_time", "excluded_late"),
    "RevisionSubmitted": ("paper_id", "content_hash", "round", "deadlines"),
    "CommunityReviewFiled": ("paper_id", "rater_id", "value", "comment", "cr"),
    "PointsEarned": ("user_id", "points", "reason"),
    "PointsSpent": ("user_id", "action", "points"),
    "FlagRaised": ("flag_id", "kind", "subject"),
    "FlagCleared": ("flag_id",),
    "EntryPublished": ("paper_id", "origin_node", "seq", "doi", "content_hash", "metadata"),
}


@dataclass(frozen=True)
class DomainEvent:
    seq: int
    at: datetime
    kind: str
    payload: dict
    digest: str = ""

    def body_dict(self) -> dict:
        return {"seq": self.seq, "at": iso(self.at), "kind": self.kind, "payload": self.payload}

    def to_dict(self) -> dict:
        d = self.body_dict()
        d["digest"] = self.digest
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DomainEvent":
        return cls(seq=d["seq"], at=parse_ts(d["at"]), kind=d["kind"],
                   payload=d["payload"], digest=d.get("digest", ""))


def validate_event(kind: str, payload: dict) -> None:
    schema = EVENT_SCHEMAS.get(kind)
    if schema is None:
        raise SchemaViolation(f"unknown event kind {kind!r}")
    if not isinstance(payload, dict):
        raise SchemaViolation("event payload must be an object")
    missing = [f for f in schema if f not in payload]
    if missing:
        raise SchemaViolation(f"{kind} payload missing fields: {missing}")


def chain_digest(previous_digest: str, event_body: dict) -> str:
    """Rolling digest: hash of the previous digest and the canonical event bytes."""
    return sha256_hex(previous_digest.encode("ascii") + canonical_bytes(event_body))
