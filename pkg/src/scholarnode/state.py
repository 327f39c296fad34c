"""The node's projected state and the event fold that builds it.

Every piece of live state is produced by folding ``apply_event`` over the
event log; command handlers never touch state directly. Decisions (computed
aggregates, selected referees, deadlines, point deltas) are recorded in event
payloads, so the fold is a deterministic function of the log alone and a
replay reproduces the live state byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum

from .canonical import canonical_bytes, iso, parse_ts
from .domain import ExpertiseProfile, RatingEvent, RatingKind, UserAccount
from .eligibility import (
    ACCEPTED,
    DECLINED,
    EXCLUDED_LATE,
    INVITED,
    REPORTED,
    EligibilityRule,
    Invitation,
    RefereeAssignment,
    RefereeReport,
)
from .events import DomainEvent
from .federation import PublicationLogEntry
from .ratings import AggregateRating, InitialRatings
from .taxonomy import parse_path

STATE_SCHEMA_VERSION = 1


class LifecycleState(str, Enum):
    SUBMITTED = "Submitted"
    EDITORIAL_PERIOD = "EditorialPeriod"
    AWAITING_ASSIGNMENT = "AwaitingAssignment"
    UNDER_REVIEW = "UnderReview"
    REVISION = "Revision"
    PUBLISHED = "Published"
    REJECTED = "Rejected"


PERMITTED_EDGES: dict[str, tuple[str, ...]] = {
    "Submitted": ("EditorialPeriod",),
    "EditorialPeriod": ("AwaitingAssignment",),
    "AwaitingAssignment": ("UnderReview",),
    "UnderReview": ("Revision", "Published", "Rejected"),
    "Revision": ("UnderReview",),
    "Published": (),
    "Rejected": (),
}


@dataclass
class Transition:
    frm: str
    to: str
    at: datetime
    note: str = ""

    def to_dict(self) -> dict:
        return {"frm": self.frm, "to": self.to, "at": iso(self.at), "note": self.note}

    @classmethod
    def from_dict(cls, d: dict) -> "Transition":
        return cls(frm=d["frm"], to=d["to"], at=parse_ts(d["at"]), note=d.get("note", ""))


@dataclass
class ManuscriptRecord:
    paper_id: str
    title: str
    authors: list[str]
    submitting_author: str
    keywords: tuple
    content_hash: str
    state: LifecycleState
    submitted_at: datetime
    editorial_deadline: datetime
    anonymous_review: bool = False
    excluded_referees: list[str] = field(default_factory=list)
    suggested_referees: list[str] = field(default_factory=list)
    initial: InitialRatings = field(default_factory=InitialRatings)
    initial_votes: list[RatingEvent] = field(default_factory=list)
    pending_rule: EligibilityRule | None = None
    assignment: RefereeAssignment | None = None
    revision_round: int = 0
    rr: AggregateRating | None = None
    community_reviews: list[RatingEvent] = field(default_factory=list)
    cr: AggregateRating | None = None
    red_flagged: bool = False
    decision_history: list[Transition] = field(default_factory=list)
    published_at: datetime | None = None
    doi: str | None = None

    def transition(self, to: LifecycleState, at: datetime, note: str = "") -> None:
        frm = self.state.value
        if to.value not in PERMITTED_EDGES[frm]:
            raise ValueError(f"illegal transition {frm} -> {to.value} for {self.paper_id}")
        self.state = to
        self.decision_history.append(Transition(frm=frm, to=to.value, at=at, note=note))

    def is_author(self, user_id: str) -> bool:
        return user_id in self.authors

    def to_dict(self) -> dict:
        return {
            "paper_id": self.paper_id,
            "title": self.title,
            "authors": list(self.authors),
            "submitting_author": self.submitting_author,
            "keywords": sorted("/".join(k) for k in self.keywords),
            "content_hash": self.content_hash,
            "state": self.state.value,
            "submitted_at": iso(self.submitted_at),
            "editorial_deadline": iso(self.editorial_deadline),
            "anonymous_review": self.anonymous_review,
            "excluded_referees": list(self.excluded_referees),
            "suggested_referees": list(self.suggested_referees),
            "initial": self.initial.to_dict(),
            "initial_votes": [e.to_dict() for e in self.initial_votes],
            "pending_rule": self.pending_rule.to_dict() if self.pending_rule else None,
            "assignment": self.assignment.to_dict() if self.assignment else None,
            "revision_round": self.revision_round,
            "rr": self.rr.to_dict() if self.rr else None,
            "community_reviews": [e.to_dict() for e in self.community_reviews],
            "cr": self.cr.to_dict() if self.cr else None,
            "red_flagged": self.red_flagged,
            "decision_history": [t.to_dict() for t in self.decision_history],
            "published_at": iso(self.published_at) if self.published_at else None,
            "doi": self.doi,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ManuscriptRecord":
        return cls(
            paper_id=d["paper_id"],
            title=d["title"],
            authors=list(d["authors"]),
            submitting_author=d["submitting_author"],
            keywords=tuple(parse_path(k) for k in d["keywords"]),
            content_hash=d["content_hash"],
            state=LifecycleState(d["state"]),
            submitted_at=parse_ts(d["submitted_at"]),
            editorial_deadline=parse_ts(d["editorial_deadline"]),
            anonymous_review=d["anonymous_review"],
            excluded_referees=list(d["excluded_referees"]),
            suggested_referees=list(d["suggested_referees"]),
            initial=InitialRatings.from_dict(d["initial"]),
            initial_votes=[RatingEvent.from_dict(e) for e in d["initial_votes"]],
            pending_rule=EligibilityRule(**d["pending_rule"]) if d["pending_rule"] else None,
            assignment=RefereeAssignment.from_dict(d["assignment"]) if d["assignment"] else None,
            revision_round=d["revision_round"],
            rr=AggregateRating.from_dict(d["rr"]) if d["rr"] else None,
            community_reviews=[RatingEvent.from_dict(e) for e in d["community_reviews"]],
            cr=AggregateRating.from_dict(d["cr"]) if d["cr"] else None,
            red_flagged=d["red_flagged"],
            decision_history=[Transition.from_dict(t) for t in d["decision_history"]],
            published_at=parse_ts(d["published_at"]) if d["published_at"] else None,
            doi=d["doi"],
        )


@dataclass
class LedgerEntry:
    at: datetime
    kind: str  # EarnOnTimeReview | SpendVisibilityBoost | SpendQuotaExtension | SpendCooldownReduction
    points_delta: int
    reason: str = ""
    paper_id: str | None = None

    def to_dict(self) -> dict:
        return {
            "at": iso(self.at),
            "kind": self.kind,
            "points_delta": self.points_delta,
            "reason": self.reason,
            "paper_id": self.paper_id,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LedgerEntry":
        return cls(at=parse_ts(d["at"]), kind=d["kind"], points_delta=d["points_delta"],
                   reason=d.get("reason", ""), paper_id=d.get("paper_id"))


@dataclass
class RewardLedger:
    user_id: str
    entries: list[LedgerEntry] = field(default_factory=list)

    @property
    def balance(self) -> int:
        return sum(e.points_delta for e in self.entries)

    def to_dict(self) -> dict:
        return {"user_id": self.user_id, "entries": [e.to_dict() for e in self.entries]}

    @classmethod
    def from_dict(cls, d: dict) -> "RewardLedger":
        return cls(user_id=d["user_id"], entries=[LedgerEntry.from_dict(e) for e in d["entries"]])


@dataclass
class FlagRecord:
    flag_id: str
    kind: str  # author_discrepancy | rater_bias | red_flag
    subject: str
    raised_at: datetime
    related: str = ""
    mean: float = 0.0
    sample_count: int = 0
    active: bool = True
    cleared_at: datetime | None = None
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "flag_id": self.flag_id,
            "kind": self.kind,
            "subject": self.subject,
            "raised_at": iso(self.raised_at),
            "related": self.related,
            "mean": self.mean,
            "sample_count": self.sample_count,
            "active": self.active,
            "cleared_at": iso(self.cleared_at) if self.cleared_at else None,
            "details": self.details,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FlagRecord":
        return cls(
            flag_id=d["flag_id"],
            kind=d["kind"],
            subject=d["subject"],
            raised_at=parse_ts(d["raised_at"]),
            related=d.get("related", ""),
            mean=d.get("mean", 0.0),
            sample_count=d.get("sample_count", 0),
            active=d["active"],
            cleared_at=parse_ts(d["cleared_at"]) if d.get("cleared_at") else None,
            details=d.get("details", {}),
        )


@dataclass
class VisibilityBoost:
    paper_id: str
    user_id: str
    amount: float
    starts_at: datetime
    expires_at: datetime

    def active_at(self, now: datetime) -> bool:
        return self.starts_at <= now < self.expires_at

    def to_dict(self) -> dict:
        return {
            "paper_id": self.paper_id,
            "user_id": self.user_id,
            "amount": self.amount,
            "starts_at": iso(self.starts_at),
            "expires_at": iso(self.expires_at),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "VisibilityBoost":
        return cls(paper_id=d["paper_id"], user_id=d["user_id"], amount=d["amount"],
                   starts_at=parse_ts(d["starts_at"]), expires_at=parse_ts(d["expires_at"]))


@dataclass
class PortalState:
    users: dict[str, UserAccount] = field(default_factory=dict)
    manuscripts: dict[str, ManuscriptRecord] = field(default_factory=dict)
    ledgers: dict[str, RewardLedger] = field(default_factory=dict)
    flags: list[FlagRecord] = field(default_factory=list)
    boosts: list[VisibilityBoost] = field(default_factory=list)
    publications: list[PublicationLogEntry] = field(default_factory=list)
    # per submitting author: history of (paper_id, iar-icr delta, icr value)
    author_deltas: dict[str, list[dict]] = field(default_factory=dict)
    applied_seq: int = 0

    # -- queries ---------------------------------------------------------------

    def active_flags(self, kind: str | None = None, subject: str | None = None,
                     related: str | None = None) -> list[FlagRecord]:
        out = []
        for f in self.flags:
            if not f.active:
                continue
            if kind is not None and f.kind != kind:
                continue
            if subject is not None and f.subject != subject:
                continue
            if related is not None and f.related != related:
                continue
            out.append(f)
        return out

    def flag_by_id(self, flag_id: str) -> FlagRecord | None:
        for f in self.flags:
            if f.flag_id == flag_id:
                return f
        return None

    def boost_for(self, paper_id: str, now: datetime) -> float:
        return sum(b.amount for b in self.boosts if b.paper_id == paper_id and b.active_at(now))

    def ledger_for(self, user_id: str) -> RewardLedger:
        return self.ledgers.get(user_id) or RewardLedger(user_id=user_id)

    # -- serialization -----------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "schema_version": STATE_SCHEMA_VERSION,
            "users": {k: v.to_dict() for k, v in sorted(self.users.items())},
            "manuscripts": {k: v.to_dict() for k, v in sorted(self.manuscripts.items())},
            "ledgers": {k: v.to_dict() for k, v in sorted(self.ledgers.items())},
            "flags": [f.to_dict() for f in self.flags],
            "boosts": [b.to_dict() for b in self.boosts],
            "publications": [p.to_dict() for p in self.publications],
            "author_deltas": {k: v for k, v in sorted(self.author_deltas.items())},
            "applied_seq": self.applied_seq,
        }

    def canonical(self) -> bytes:
        return canonical_bytes(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "PortalState":
        state = cls(
            users={k: UserAccount.from_dict(v) for k, v in d["users"].items()},
            manuscripts={k: ManuscriptRecord.from_dict(v) for k, v in d["manuscripts"].items()},
            ledgers={k: RewardLedger.from_dict(v) for k, v in d["ledgers"].items()},
            flags=[FlagRecord.from_dict(f) for f in d["flags"]],
            boosts=[VisibilityBoost.from_dict(b) for b in d["boosts"]],
            publications=[PublicationLogEntry.from_dict(p) for p in d["publications"]],
            author_deltas={k: [dict(x) for x in v] for k, v in d["author_deltas"].items()},
            applied_seq=d["applied_seq"],
        )
        return state


# --- the event fold -----------------------------------------------------------


def apply_event(state: PortalState, event: DomainEvent) -> PortalState:
    """Apply one event to the state. Mutates and returns ``state``."""
    handler = _APPLIERS.get(event.kind)
    if handler is None:
        raise ValueError(f"no applier for event kind {event.kind!r}")
    handler(state, event.payload, event.at)
    state.applied_seq = event.seq
    return state


def _apply_user_registered(state: PortalState, p: dict, at: datetime) -> None:
    profile = ExpertiseProfile(
        user_id=p["user_id"],
        keywords=tuple(parse_path(k) for k in p["keywords"]),
    )
    account = UserAccount(
        user_id=p["user_id"],
        identity=p["identity"],
        institution=p["institution"],
        display_name=p["display_name"],
        profile=profile,
        registered_at=at,
        annual_quota=p["annual_quota"],
        published_papers=dict(p.get("prior_papers", {})),
    )
    state.users[account.user_id] = account
    state.ledgers[account.user_id] = RewardLedger(user_id=account.user_id)


def _apply_manuscript_submitted(state: PortalState, p: dict, at: datetime) -> None:
    record = ManuscriptRecord(
        paper_id=p["paper_id"],
        title=p["title"],
        authors=list(p["authors"]),
        submitting_author=p["submitting_author"],
        keywords=tuple(parse_path(k) for k in p["keywords"]),
        content_hash=p["content_hash"],
        state=LifecycleState.SUBMITTED,
        submitted_at=at,
        editorial_deadline=parse_ts(p["editorial_deadline"]),
        anonymous_review=p.get("anonymous_review", False),
        excluded_referees=list(p.get("excluded_referees", [])),
        suggested_referees=list(p.get("suggested_referees", [])),
        initial=InitialRatings(iar=p["iar"]),
    )
    record.transition(LifecycleState.EDITORIAL_PERIOD, at, note="submission accepted")
    state.manuscripts[record.paper_id] = record
    author = state.users[p["submitting_author"]]
    year = at.year
    author.uploads_by_year[year] = author.uploads_by_year.get(year, 0) + 1


def _apply_initial_rating_cast(state: PortalState, p: dict, at: datetime) -> None:
    record = state.manuscripts[p["paper_id"]]
    record.initial_votes.append(
        RatingEvent(
            rater_id=p["rater_id"],
            paper_id=p["paper_id"],
            kind=RatingKind.INITIAL_COMMUNITY,
            value=p["value"],
            at=at,
        )
    )


def _apply_editorial_closed(state: PortalState, p: dict, at: datetime) -> None:
    record = state.manuscripts[p["paper_id"]]
    record.transition(LifecycleState.AWAITING_ASSIGNMENT, at, note="editorial period closed")
    record.pending_rule = EligibilityRule(**p["rule"])
    if p.get("delta") is not None:
        state.author_deltas.setdefault(record.submitting_author, []).append(
            {"paper_id": record.paper_id, "delta": p["delta"], "icr": p["icr"]["value"], "at": iso(at)}
        )
    # the initial ratings are consumed by rule selection and deleted here
    record.initial.low_confidence = p["low_confidence"]
    record.initial.purge()


def _apply_referees_invited(state: PortalState, p: dict, at: datetime) -> None:
    record = state.manuscripts[p["paper_id"]]
    if record.assignment is None:
        record.assignment = RefereeAssignment(
            paper_id=p["paper_id"],
            min_required=p["min_required"],
            seed=p["seed"],
            round=p["round"],
            rule=record.pending_rule,
            relaxations=list(p.get("relaxations", [])),
        )
    if record.state is LifecycleState.AWAITING_ASSIGNMENT:
        record.transition(LifecycleState.UNDER_REVIEW, at, note="referees invited")
    assignment = record.assignment
    for rid in p.get("excluded_late", []):
        assignment.invitation_for(rid).status = EXCLUDED_LATE
        state.users[rid].late_exclusions.append(at)
    for rid in p.get("lapsed", []):
        assignment.invitation_for(rid).status = DECLINED
    for rid in p["referee_ids"]:
        assignment.invitations.append(
            Invitation(referee_id=rid, status=INVITED, invited_at=at, round=p["round"])
        )
    assignment.relaxations.extend(
        r for r in p.get("relaxations", []) if r not in assignment.relaxations
    )


def _apply_invitation_accepted(state: PortalState, p: dict, at: datetime) -> None:
    record = state.manuscripts[p["paper_id"]]
    inv = record.assignment.invitation_for(p["referee_id"])
    inv.status = ACCEPTED
    inv.declared_deadline = parse_ts(p["declared_deadline"])


def _apply_invitation_declined(state: PortalState, p: dict, at: datetime) -> None:
    record = state.manuscripts[p["paper_id"]]
    inv = record.assignment.invitation_for(p["referee_id"])
    inv.status = DECLINED


def _apply_report_filed(state: PortalState, p: dict, at: datetime) -> None:
    record = state.manuscripts[p["paper_id"]]
    assignment = record.assignment
    assignment.reports.append(
        RefereeReport(
            referee_id=p["referee_id"],
            verdict=p["verdict"],
            rating=p["rating"],
            filed_at=at,
            on_time=p["on_time"],
            round=p["round"],
            structural_flaw=p.get("structural_flaw", False),
            text=p.get("text", ""),
        )
    )
    inv = assignment.invitation_for(p["referee_id"])
    if inv.status == ACCEPTED:
        inv.status = REPORTED


def _apply_decision_finalized(state: PortalState, p: dict, at: datetime) -> None:
    record = state.manuscripts[p["paper_id"]]
    assignment = record.assignment
    for rid in p["excluded_late"]:
        inv = assignment.invitation_for(rid)
        inv.status = EXCLUDED_LATE
        state.users[rid].late_exclusions.append(at)
    for rid in p.get("lapsed", []):
        assignment.invitation_for(rid).status = DECLINED
    outcome = p["outcome"]
    if outcome == "Published":
        record.rr = AggregateRating.from_dict(p["rr"])
        record.transition(LifecycleState.PUBLISHED, at, note=p.get("note", ""))
        record.published_at = at
        for author_id in record.authors:
            account = state.users.get(author_id)
            if account is not None:
                account.published_papers[record.paper_id] = record.rr.value
    elif outcome == "Rejected":
        record.transition(LifecycleState.REJECTED, at, note=p.get("note", ""))
        if p.get("cooldown_until"):
            until = parse_ts(p["cooldown_until"])
            for author_id in p.get("cooldown_authors", []):
                account = state.users.get(author_id)
                if account is not None:
                    account.cooldown_until = until
    elif outcome == "Revision":
        record.transition(LifecycleState.REVISION, at, note=p.get("note", ""))
    else:
        raise ValueError(f"unknown decision outcome {outcome!r}")


def _apply_revision_submitted(state: PortalState, p: dict, at: datetime) -> None:
    record = state.manuscripts[p["paper_id"]]
    record.content_hash = p["content_hash"]
    record.revision_round = p["round"]
    record.transition(LifecycleState.UNDER_REVIEW, at, note=f"revision round {p['round']}")
    assignment = record.assignment
    assignment.round = p["round"]
    deadlines = {d["referee_id"]: d["declared_deadline"] for d in p["deadlines"]}
    for inv in assignment.invitations:
        if inv.referee_id in deadlines:
            inv.status = ACCEPTED
            inv.round = p["round"]
            inv.declared_deadline = parse_ts(deadlines[inv.referee_id])


def _apply_community_review_filed(state: PortalState, p: dict, at: datetime) -> None:
    record = state.manuscripts[p["paper_id"]]
    record.community_reviews.append(
        RatingEvent(
            rater_id=p["rater_id"],
            paper_id=p["paper_id"],
            kind=RatingKind.COMMUNITY,
            value=p["value"],
            at=at,
            comment=p["comment"],
            public_name=p.get("public_name", True),
        )
    )
    record.cr = AggregateRating.from_dict(p["cr"])
    # community votes update the authors' best-rating bibliometrics
    for author_id in record.authors:
        account = state.users.get(author_id)
        if account is not None and record.rr is not None:
            account.published_papers[record.paper_id] = max(record.rr.value, record.cr.value)


def _apply_points_earned(state: PortalState, p: dict, at: datetime) -> None:
    ledger = state.ledgers.setdefault(p["user_id"], RewardLedger(user_id=p["user_id"]))
    ledger.entries.append(
        LedgerEntry(at=at, kind="EarnOnTimeReview", points_delta=p["points"],
                    reason=p["reason"], paper_id=p.get("paper_id"))
    )
    state.users[p["user_id"]].reward_points = ledger.balance


def _apply_points_spent(state: PortalState, p: dict, at: datetime) -> None:
    ledger = state.ledgers.setdefault(p["user_id"], RewardLedger(user_id=p["user_id"]))
    ledger.entries.append(
        LedgerEntry(at=at, kind="Spend" + p["action"], points_delta=-p["points"],
                    reason=p.get("reason", ""), paper_id=p.get("paper_id"))
    )
    account = state.users[p["user_id"]]
    account.reward_points = ledger.balance
    action = p["action"]
    if action == "VisibilityBoost":
        state.boosts.append(
            VisibilityBoost(
                paper_id=p["paper_id"],
                user_id=p["user_id"],
                amount=p["boost_amount"],
                starts_at=at,
                expires_at=parse_ts(p["expires_at"]),
            )
        )
    elif action == "QuotaExtension":
        year = p["year"]
        account.extensions_by_year[year] = account.extensions_by_year.get(year, 0) + 1
    elif action == "CooldownReduction":
        account.cooldown_until = parse_ts(p["new_cooldown_until"])
    else:
        raise ValueError(f"unknown spend action {action!r}")


def _apply_flag_raised(state: PortalState, p: dict, at: datetime) -> None:
    flag = FlagRecord(
        flag_id=p["flag_id"],
        kind=p["kind"],
        subject=p["subject"],
        raised_at=at,
        related=p.get("related", ""),
        mean=p.get("mean", 0.0),
        sample_count=p.get("sample_count", 0),
        details=p.get("details", {}),
    )
    state.flags.append(flag)
    if flag.kind == "author_discrepancy":
        account = state.users[flag.subject]
        account.iar_cap = p["iar_cap"]
        year = p["penalty_year"]
        account.penalties_by_year[year] = account.penalties_by_year.get(year, 0) + 1
    elif flag.kind == "red_flag":
        state.manuscripts[flag.subject].red_flagged = True


def _apply_flag_cleared(state: PortalState, p: dict, at: datetime) -> None:
    flag = state.flag_by_id(p["flag_id"])
    flag.active = False
    flag.cleared_at = at
    if flag.kind == "author_discrepancy":
        account = state.users[flag.subject]
        account.iar_cap = None
        year = flag.details.get("penalty_year")
        if year is not None and account.penalties_by_year.get(year, 0) > 0:
            account.penalties_by_year[year] -= 1
            if account.penalties_by_year[year] == 0:
                del account.penalties_by_year[year]
    elif flag.kind == "red_flag":
        state.manuscripts[flag.subject].red_flagged = False


def _apply_entry_published(state: PortalState, p: dict, at: datetime) -> None:
    entry = PublicationLogEntry.from_dict(
        {
            "origin_node": p["origin_node"],
            "seq": p["seq"],
            "paper_id": p["paper_id"],
            "content_hash": p["content_hash"],
            "doi": p["doi"],
            "metadata": p["metadata"],
        }
    )
    state.publications.append(entry)
    record = state.manuscripts.get(p["paper_id"])
    if record is not None:
        record.doi = p["doi"]


_APPLIERS = {
    "UserRegistered": _apply_user_registered,
    "ManuscriptSubmitted": _apply_manuscript_submitted,
    "InitialRatingCast": _apply_initial_rating_cast,
    "EditorialClosed": _apply_editorial_closed,
    "RefereesInvited": _apply_referees_invited,
    "InvitationAccepted": _apply_invitation_accepted,
    "InvitationDeclined": _apply_invitation_declined,
    "ReportFiled": _apply_report_filed,
    "DecisionFinalized": _apply_decision_finalized,
    "RevisionSubmitted": _apply_revision_submitted,
    "CommunityReviewFiled": _apply_community_review_filed,
    "PointsEarned": _apply_points_earned,
    "PointsSpent": _apply_points_spent,
    "FlagRaised": _apply_flag_raised,
    "FlagCleared": _apply_flag_cleared,
    "EntryPublished": _apply_entry_published,
}
