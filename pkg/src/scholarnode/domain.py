"""Core domain types: rating scale, rating events, accounts, verified identity.

The rating scale runs 0..5. Atomic editorial and referee votes use 1..5;
a 0 ("fails minimum rigour") is only admissible as a post-publication
community vote.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum

from .canonical import iso, parse_ts
from .errors import (
    EmptyProfile,
    InvalidIdentity,
    OutOfScale,
    ZeroNotAllowedForKind,
)
from .taxonomy import KeywordPath, format_path, parse_path

MAX_PROFILE_KEYWORDS = 16


class RatingKind(str, Enum):
    INITIAL_COMMUNITY = "InitialCommunity"
    REFEREE = "Referee"
    COMMUNITY = "Community"


def validate_rating(value, kind: RatingKind) -> int:
    """Check an atomic vote against the scale for its kind; return it as int.

    InitialCommunity and Referee votes (and author self-ratings, which share
    the InitialCommunity scale) accept integers 1..5. Community votes accept
    0..5: zero exists only as a post-publication judgement.
    """
    if isinstance(value, bool) or not isinstance(value, int):
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        else:
            raise OutOfScale(f"rating must be an integer, got {value!r}")
    if value < 0 or value > 5:
        raise OutOfScale(f"rating {value} outside 0..5")
    if value == 0 and kind is not RatingKind.COMMUNITY:
        raise ZeroNotAllowedForKind("0 is only admissible as a community vote")
    return value


@dataclass
class RatingEvent:
    """One rating act: who, which paper, what kind, what value."""

    rater_id: str
    paper_id: str
    kind: RatingKind
    value: int
    at: datetime
    comment: str = ""
    public_name: bool = True

    def to_dict(self) -> dict:
        return {
            "rater_id": self.rater_id,
            "paper_id": self.paper_id,
            "kind": self.kind.value,
            "value": self.value,
            "at": iso(self.at),
            "comment": self.comment,
            "public_name": self.public_name,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RatingEvent":
        return cls(
            rater_id=d["rater_id"],
            paper_id=d["paper_id"],
            kind=RatingKind(d["kind"]),
            value=d["value"],
            at=parse_ts(d["at"]),
            comment=d.get("comment", ""),
            public_name=d.get("public_name", True),
        )


@dataclass
class ExpertiseProfile:
    user_id: str
    keywords: tuple[KeywordPath, ...]

    def __post_init__(self):
        if not self.keywords:
            raise EmptyProfile("expertise profile needs at least one keyword")
        if len(self.keywords) > MAX_PROFILE_KEYWORDS:
            raise EmptyProfile(f"at most {MAX_PROFILE_KEYWORDS} keywords per profile")
        if len(set(self.keywords)) != len(self.keywords):
            raise EmptyProfile("duplicate keyword paths in profile")

    def to_dict(self) -> dict:
        return {"user_id": self.user_id, "keywords": sorted(format_path(k) for k in self.keywords)}

    @classmethod
    def from_dict(cls, d: dict) -> "ExpertiseProfile":
        return cls(user_id=d["user_id"], keywords=tuple(parse_path(k) for k in d["keywords"]))


@dataclass
class UserAccount:
    user_id: str
    identity: str
    institution: str
    display_name: str
    profile: ExpertiseProfile
    registered_at: datetime
    verified: bool = True
    annual_quota: int = 5
    published_papers: dict[str, float] = field(default_factory=dict)  # paper_id -> best rating
    uploads_by_year: dict[int, int] = field(default_factory=dict)
    extensions_by_year: dict[int, int] = field(default_factory=dict)
    penalties_by_year: dict[int, int] = field(default_factory=dict)
    cooldown_until: datetime | None = None
    iar_cap: int | None = None
    reward_points: int = 0
    late_exclusions: list[datetime] = field(default_factory=list)

    def effective_quota(self, year: int) -> int:
        return (
            self.annual_quota
            + self.extensions_by_year.get(year, 0)
            - self.penalties_by_year.get(year, 0)
        )

    def uploads_used(self, year: int) -> int:
        return self.uploads_by_year.get(year, 0)

    def qualified_paper_count(self, threshold: float) -> int:
        return sum(1 for r in self.published_papers.values() if r >= threshold)

    def to_dict(self) -> dict:
        return {
            "user_id": self.user_id,
            "identity": self.identity,
            "institution": self.institution,
            "display_name": self.display_name,
            "profile": self.profile.to_dict(),
            "registered_at": iso(self.registered_at),
            "verified": self.verified,
            "annual_quota": self.annual_quota,
            "published_papers": {k: v for k, v in sorted(self.published_papers.items())},
            "uploads_by_year": {str(k): v for k, v in sorted(self.uploads_by_year.items())},
            "extensions_by_year": {str(k): v for k, v in sorted(self.extensions_by_year.items())},
            "penalties_by_year": {str(k): v for k, v in sorted(self.penalties_by_year.items())},
            "cooldown_until": iso(self.cooldown_until) if self.cooldown_until else None,
            "iar_cap": self.iar_cap,
            "reward_points": self.reward_points,
            "late_exclusions": [iso(t) for t in self.late_exclusions],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "UserAccount":
        return cls(
            user_id=d["user_id"],
            identity=d["identity"],
            institution=d["institution"],
            display_name=d["display_name"],
            profile=ExpertiseProfile.from_dict(d["profile"]),
            registered_at=parse_ts(d["registered_at"]),
            verified=d["verified"],
            annual_quota=d["annual_quota"],
            published_papers=dict(d["published_papers"]),
            uploads_by_year={int(k): v for k, v in d["uploads_by_year"].items()},
            extensions_by_year={int(k): v for k, v in d["extensions_by_year"].items()},
            penalties_by_year={int(k): v for k, v in d["penalties_by_year"].items()},
            cooldown_until=parse_ts(d["cooldown_until"]) if d["cooldown_until"] else None,
            iar_cap=d["iar_cap"],
            reward_points=d["reward_points"],
            late_exclusions=[parse_ts(t) for t in d["late_exclusions"]],
        )


# --- verified identity -------------------------------------------------------

_ORCID_RE = re.compile(r"^(\d{4})-(\d{4})-(\d{4})-(\d{3}[\dX])$")
_EMAIL_RE = re.compile(r"^[^@\s]+@([^@\s]+\.[^@\s]+)$")


def orcid_checksum_char(base_digits: str) -> str:
    """ISO 7064 mod 11-2 check character over the 15 base digits."""
    total = 0
    for ch in base_digits:
        total = (total + int(ch)) * 2
    result = (12 - total % 11) % 11
    return "X" if result == 10 else str(result)


def is_valid_orcid(identity: str) -> bool:
    m = _ORCID_RE.match(identity.strip())
    if not m:
        return False
    digits = "".join(m.groups())
    return orcid_checksum_char(digits[:15]) == digits[15]


def email_domain(identity: str) -> str | None:
    m = _EMAIL_RE.match(identity.strip())
    return m.group(1).lower() if m else None


def verify_identity(identity: str, allowed_domains: tuple[str, ...]) -> str:
    """Validate an identity claim; return the affiliated institution label.

    Accepts an institutional email whose domain is allow-listed, or an ORCID
    iD passing the mod 11-2 checksum. The confirmation round-trip is stubbed:
    a claim that validates here counts as verified.
    """
    identity = identity.strip()
    if is_valid_orcid(identity):
        return "orcid:" + identity
    domain = email_domain(identity)
    if domain is not None:
        if domain in allowed_domains:
            return domain
        raise InvalidIdentity(f"email domain {domain!r} is not allow-listed")
    if _ORCID_RE.match(identity):
        raise InvalidIdentity("ORCID checksum failed")
    raise InvalidIdentity("identity must be an institutional email or ORCID iD")
