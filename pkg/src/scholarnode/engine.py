"""The manuscript lifecycle engine.

Command handlers validate against current state, record decisions as events,
and fold them in through ``state.apply_event``. Timers (editorial deadlines,
referee windows, invitation responses) all fire through ``tick``, which is
idempotent for a fixed clock. Nothing here reads the wall clock: every
command takes ``now`` explicitly, so the same engine drives production and
the simulated communities.
"""

from __future__ import annotations

import functools
import logging
import threading
from datetime import datetime, timedelta, timezone

from . import incentives
from .canonical import iso, utc
from .config import NodeConfig
from .domain import RatingEvent, RatingKind, UserAccount, validate_rating, verify_identity
from .eligibility import (
    DECLINED,
    EXCLUDED_LATE,
    INVITED,
    derive_seed,
    eligibility_rule_for,
    load_rules,
    relaxed_candidate_pool,
    resolve_reports,
    select_referees,
)
from .errors import (
    AlreadyReported,
    AlreadyResponded,
    AuthorSelfVote,
    CooldownActive,
    DuplicateAccount,
    DuplicateVote,
    Forbidden,
    IarCapViolated,
    InsufficientPoints,
    InvalidDeadline,
    InvalidState,
    NoActiveCooldown,
    NotAssigned,
    NotEligible,
    QuotaExceeded,
    UnknownPaper,
    UnknownUser,
    UnverifiedIdentity,
    VoidComment,
    WindowClosed,
)
from .eventstore import EventStore
from .federation import BlobStore, FederationLog, PublicationLogEntry, content_id, make_doi
from .ratings import (
    TrimSpec,
    collapse_whitespace,
    compute_icr,
    compute_ir,
    compute_rr,
    detect_red_flag,
    update_cr,
)
from .state import LifecycleState, ManuscriptRecord, PortalState, apply_event
from .taxonomy import TopicTree, format_path, overlap_score, parse_path

log = logging.getLogger(__name__)

VERDICTS = ("Accept", "MinorRevision", "Reject")
COMMENT_MIN_CHARS = 200


def editorial_overlap_threshold(iar: int) -> float:
    """Expertise overlap required to cast an editorial vote.

    Decreasing in the claimed impact: the bolder the claim, the wider the
    audience allowed to weigh in.
    """
    return 0.6 - 0.1 * (iar - 1)


def _resolve_now(now: datetime | None) -> datetime:
    return utc(now) if now is not None else datetime.now(timezone.utc)


def serialized(method):
    """Commands mutate the single projected state; one writer at a time."""

    @functools.wraps(method)
    def wrapper(self, *args, **kwargs):
        with self._lock:
            return method(self, *args, **kwargs)

    return wrapper


class Node:
    """One portal node: engine, event log, blob store and federation log."""

    def __init__(
        self,
        config: NodeConfig | None = None,
        store: EventStore | None = None,
        topics: TopicTree | None = None,
    ):
        self.config = config or NodeConfig()
        self._lock = threading.RLock()
        data = self.config.data_dir
        self.topics = topics or TopicTree.load(self.config.topics_file)
        self.rules = load_rules(self.config.rules_file)
        self.store = store or EventStore(
            f"{data}/events" if data else None, segment_size=self.config.snapshot_every
        )
        self.blobs = BlobStore(f"{data}/blobs" if data else None)
        self.federation = FederationLog(
            self.config.node_id, self.blobs, f"{data}/federation" if data else None
        )
        self.trim = TrimSpec(self.config.trim_fraction)
        self.state = self.store.replay(apply_event, PortalState())
        for entry in self.state.publications:
            self.federation.ensure_local(entry, self.blobs.get(entry.content_hash))

    # ------------------------------------------------------------------ plumbing

    def _commit(self, kind: str, payload: dict, now: datetime):
        event = self.store.append(kind, payload, utc(now))
        self.state = apply_event(self.state, event)
        return event

    def _paper(self, paper_id: str) -> ManuscriptRecord:
        record = self.state.manuscripts.get(paper_id)
        if record is None:
            raise UnknownPaper(f"no manuscript {paper_id!r}")
        return record

    def _account(self, user_id: str) -> UserAccount:
        account = self.state.users.get(user_id)
        if account is None:
            raise UnknownUser(f"no user {user_id!r}")
        return account

    # ------------------------------------------------------------------ accounts

    @serialized
    def register_user(
        self,
        identity: str,
        keywords: list[str],
        display_name: str = "",
        institution: str | None = None,
        prior_papers: dict[str, float] | None = None,
        now: datetime | None = None,
    ) -> UserAccount:
        now = _resolve_now(now)
        resolved = verify_identity(identity, self.config.allowed_email_domains)
        if any(u.identity == identity for u in self.state.users.values()):
            raise DuplicateAccount(f"identity {identity!r} already registered")
        paths = [format_path(self.topics.require(parse_path(k))) for k in keywords]
        user_id = f"u{len(self.state.users) + 1}"
        payload = {
            "user_id": user_id,
            "identity": identity,
            "institution": institution or resolved,
            "display_name": display_name or identity,
            "keywords": sorted(set(paths)),
            "annual_quota": self.config.quota_per_year,
        }
        if prior_papers:
            payload["prior_papers"] = dict(prior_papers)
        self._commit("UserRegistered", payload, now)
        return self.state.users[user_id]

    # ------------------------------------------------------------------ submission

    @serialized
    def submit_manuscript(
        self,
        author_id: str,
        title: str,
        content: bytes,
        keywords: list[str],
        iar: int,
        co_authors: list[str] | None = None,
        anonymous_review: bool = False,
        excluded_referees: list[str] | None = None,
        suggested_referees: list[str] | None = None,
        now: datetime | None = None,
    ) -> ManuscriptRecord:
        now = _resolve_now(now)
        author = self._account(author_id)
        if not author.verified:
            raise UnverifiedIdentity(f"{author_id} is not verified")
        authors = [author_id] + [a for a in (co_authors or []) if a != author_id]
        for aid in authors:
            account = self._account(aid)
            if account.cooldown_until is not None and account.cooldown_until > now:
                raise CooldownActive(
                    f"{aid} may not submit before {iso(account.cooldown_until)}"
                )
        year = now.year
        if author.uploads_used(year) >= author.effective_quota(year):
            raise QuotaExceeded(
                f"{author_id} used {author.uploads_used(year)} of {author.effective_quota(year)} uploads in {year}"
            )
        iar = validate_rating(iar, RatingKind.INITIAL_COMMUNITY)
        if author.iar_cap is not None and iar > author.iar_cap:
            raise IarCapViolated(f"self-rating {iar} above active cap {author.iar_cap}")
        paths = [format_path(self.topics.require(parse_path(k))) for k in keywords]
        digest = self.blobs.put(content)
        paper_id = f"{self.config.node_id}-p{len(self.state.manuscripts) + 1}"
        payload = {
            "paper_id": paper_id,
            "title": title,
            "authors": authors,
            "submitting_author": author_id,
            "keywords": sorted(set(paths)),
            "iar": iar,
            "content_hash": digest,
            "editorial_deadline": iso(now + timedelta(days=self.config.editorial_days)),
            "anonymous_review": anonymous_review,
            "excluded_referees": sorted(set(excluded_referees or [])),
            "suggested_referees": sorted(set(suggested_referees or [])),
        }
        self._commit("ManuscriptSubmitted", payload, now)
        return self.state.manuscripts[paper_id]

    # ------------------------------------------------------------------ editorial

    @serialized
    def cast_initial_rating(self, user_id: str, paper_id: str, value: int, now: datetime) -> RatingEvent:
        now = _resolve_now(now)
        record = self._paper(paper_id)
        rater = self._account(user_id)
        if record.state is not LifecycleState.EDITORIAL_PERIOD or now >= record.editorial_deadline:
            raise WindowClosed(f"editorial period for {paper_id} is closed")
        if record.is_author(user_id):
            raise AuthorSelfVote("authors may not rate their own manuscript")
        value = validate_rating(value, RatingKind.INITIAL_COMMUNITY)
        threshold = editorial_overlap_threshold(record.initial.iar)
        score = overlap_score(rater.profile.keywords, record.keywords)
        if score < threshold:
            raise NotEligible(
                f"overlap {score:.2f} below required {threshold:.2f} for this manuscript"
            )
        if any(e.rater_id == user_id for e in record.initial_votes):
            raise DuplicateVote(f"{user_id} already rated {paper_id}")
        self._commit(
            "InitialRatingCast",
            {"paper_id": paper_id, "rater_id": user_id, "value": value},
            now,
        )
        return record.initial_votes[-1]

    @serialized
    def close_editorial_period(self, paper_id: str, now: datetime) -> None:
        now = _resolve_now(now)
        record = self._paper(paper_id)
        if record.state is not LifecycleState.EDITORIAL_PERIOD:
            raise InvalidState(f"{paper_id} is not in its editorial period")
        if now < record.editorial_deadline:
            raise InvalidState(f"editorial period for {paper_id} still open")
        votes = [e.value for e in record.initial_votes]
        iar = record.initial.iar
        if len(votes) >= self.config.min_icr_votes:
            icr = compute_icr(votes, self.trim, self.config.min_icr_votes)
            ir = compute_ir(iar, icr)
            payload_icr = icr.to_dict()
            delta = iar - icr.value
            low_confidence = False
        else:
            # too few editorial votes: fall back to the self-rating alone
            ir = float(iar)
            payload_icr = None
            delta = None
            low_confidence = True
        rule = eligibility_rule_for(ir, self.rules)
        self._commit(
            "EditorialClosed",
            {
                "paper_id": paper_id,
                "icr": payload_icr,
                "ir": ir,
                "low_confidence": low_confidence,
                "rule": rule.to_dict(),
                "delta": delta,
            },
            now,
        )
        if delta is not None:
            self._evaluate_discrepancy(record.submitting_author, now)
        self._attempt_assignment(record, now)

    def _evaluate_discrepancy(self, author_id: str, now: datetime) -> None:
        history = self.state.author_deltas.get(author_id, [])
        active = self.state.active_flags(kind="author_discrepancy", subject=author_id)
        if active:
            flag = active[0]
            after = [h for h in history if h["at"] > iso(flag.raised_at)]
            if incentives.discrepancy_expired(after, self.config.discrepancy_delta):
                self._commit("FlagCleared", {"flag_id": flag.flag_id}, now)
            return
        record = incentives.author_discrepancy(
            author_id, history, self.config.discrepancy_window, self.config.discrepancy_delta
        )
        if record.flagged:
            cap = incentives.discouragement_cap(record)
            penalty_year = now.year + 1
            self._commit(
                "FlagRaised",
                {
                    "flag_id": f"flag{len(self.state.flags) + 1}",
                    "kind": "author_discrepancy",
                    "subject": author_id,
                    "mean": record.mean_delta,
                    "sample_count": len(record.deltas),
                    "iar_cap": cap,
                    "penalty_year": penalty_year,
                    "details": {"penalty_year": penalty_year, "window_icr_mean": record.window_icr_mean},
                },
                now,
            )

    # ------------------------------------------------------------------ assignment

    def _author_institutions(self, record: ManuscriptRecord) -> set[str]:
        return {
            self.state.users[a].institution
            for a in record.authors
            if a in self.state.users
        }

    def _candidate_users(self, record: ManuscriptRecord) -> dict[str, UserAccount]:
        excluded = set(record.excluded_referees)
        return {
            uid: u for uid, u in self.state.users.items()
            if uid not in excluded and uid not in {i for i in record.authors}
        }

    def _attempt_assignment(self, record: ManuscriptRecord, now: datetime) -> bool:
        """Invite the first referee panel. True when invitations went out."""
        if record.state is not LifecycleState.AWAITING_ASSIGNMENT:
            raise InvalidState(f"{record.paper_id} is not awaiting assignment")
        rule = record.pending_rule
        needed = self.config.min_referees + 1
        pool, relaxations = relaxed_candidate_pool(
            record.keywords,
            set(record.authors),
            self._author_institutions(record),
            self._candidate_users(record),
            rule,
            self.config.referee_overlap_floor,
            needed,
        )
        if len(pool) < self.config.quorum_floor:
            log.info("assignment for %s deferred: pool of %d too small", record.paper_id, len(pool))
            return False
        seed = derive_seed(self.config.seed, record.paper_id, 0, "initial")
        if len(pool) >= needed:
            chosen = select_referees(
                pool, set(), set(record.suggested_referees), self.config.min_referees,
                seed, self.config.suggestion_weight,
            )
        else:
            chosen = [c.user_id for c in pool]
            relaxations = relaxations + [f"short_panel={len(chosen)}"]
        self._commit(
            "RefereesInvited",
            {
                "paper_id": record.paper_id,
                "referee_ids": chosen,
                "seed": seed,
                "min_required": self.config.min_referees,
                "round": 0,
                "relaxations": relaxations,
                "reason": "initial",
                "excluded_late": [],
                "lapsed": [],
            },
            now,
        )
        return True

    def _top_up_invitations(self, record: ManuscriptRecord, now: datetime,
                            reason: str, excluded_late: list[str], lapsed: list[str]) -> list[str]:
        """Replace declined/excluded referees to restore the +1 redundancy."""
        assignment = record.assignment
        dropping = set(excluded_late) | set(lapsed)
        active = [i for i in assignment.active_invitations() if i.referee_id not in dropping]
        missing = assignment.min_required + 1 - len(active)
        chosen: list[str] = []
        if missing > 0:
            users = self._candidate_users(record)
            for uid in assignment.ever_invited():
                users.pop(uid, None)
            pool, _ = relaxed_candidate_pool(
                record.keywords,
                set(record.authors),
                self._author_institutions(record),
                users,
                assignment.rule,
                self.config.referee_overlap_floor,
                missing,
            )
            seed = derive_seed(
                self.config.seed, record.paper_id, assignment.round, "topup",
                len(assignment.invitations),
            )
            if len(pool) > missing:
                chosen = select_referees(
                    pool, set(), set(record.suggested_referees), missing - 1, seed,
                    self.config.suggestion_weight,
                )
            else:
                chosen = [c.user_id for c in pool]
        if chosen or excluded_late or lapsed:
            self._commit(
                "RefereesInvited",
                {
                    "paper_id": record.paper_id,
                    "referee_ids": chosen,
                    "seed": record.assignment.seed,
                    "min_required": record.assignment.min_required,
                    "round": record.assignment.round,
                    "relaxations": [],
                    "reason": reason,
                    "excluded_late": excluded_late,
                    "lapsed": lapsed,
                },
                now,
            )
        return chosen

    @serialized
    def accept_invitation(self, referee_id: str, paper_id: str, deadline_days: int, now: datetime) -> None:
        now = _resolve_now(now)
        record = self._paper(paper_id)
        inv = self._invitation(record, referee_id)
        if inv.status != INVITED:
            raise AlreadyResponded(f"invitation for {referee_id} is {inv.status}")
        if record.state is not LifecycleState.UNDER_REVIEW:
            raise InvalidState(f"{paper_id} is not under review")
        if not (self.config.min_deadline_days <= deadline_days <= self.config.max_deadline_days):
            raise InvalidDeadline(
                f"deadline must be {self.config.min_deadline_days}-{self.config.max_deadline_days} days"
            )
        self._commit(
            "InvitationAccepted",
            {
                "paper_id": paper_id,
                "referee_id": referee_id,
                "declared_deadline": iso(now + timedelta(days=deadline_days)),
            },
            now,
        )

    @serialized
    def decline_invitation(self, referee_id: str, paper_id: str, now: datetime) -> None:
        now = _resolve_now(now)
        record = self._paper(paper_id)
        inv = self._invitation(record, referee_id)
        if inv.status != INVITED:
            raise AlreadyResponded(f"invitation for {referee_id} is {inv.status}")
        self._commit("InvitationDeclined", {"paper_id": paper_id, "referee_id": referee_id}, now)
        if record.state is LifecycleState.UNDER_REVIEW:
            self._top_up_invitations(record, now, reason="decline", excluded_late=[], lapsed=[])

    def _invitation(self, record: ManuscriptRecord, referee_id: str):
        if record.assignment is None:
            raise NotAssigned(f"{record.paper_id} has no referee assignment")
        inv = record.assignment.invitation_for(referee_id)
        if inv is None:
            raise NotAssigned(f"{referee_id} is not invited to {record.paper_id}")
        return inv

    # ------------------------------------------------------------------ reports

    @serialized
    def record_referee_report(
        self,
        referee_id: str,
        paper_id: str,
        verdict: str,
        rating: int,
        text: str = "",
        structural_flaw: bool = False,
        now: datetime | None = None,
    ) -> None:
        now = _resolve_now(now)
        record = self._paper(paper_id)
        assignment = record.assignment
        inv = self._invitation(record, referee_id)
        if verdict not in VERDICTS:
            raise InvalidState(f"verdict must be one of {VERDICTS}")
        rating = validate_rating(rating, RatingKind.REFEREE)
        already = [
            r for r in assignment.round_reports(assignment.round) if r.referee_id == referee_id
        ]
        if already:
            raise AlreadyReported(f"{referee_id} already reported on {paper_id}")
        if inv.status == DECLINED or inv.status == INVITED:
            raise NotAssigned(f"{referee_id} has not accepted this review")
        if inv.status == EXCLUDED_LATE:
            on_time = False
        elif record.state is not LifecycleState.UNDER_REVIEW:
            raise InvalidState(f"{paper_id} is not under review")
        else:
            on_time = now <= inv.declared_deadline
        self._commit(
            "ReportFiled",
            {
                "paper_id": paper_id,
                "referee_id": referee_id,
                "verdict": verdict,
                "rating": rating,
                "on_time": on_time,
                "round": assignment.round,
                "structural_flaw": structural_flaw,
                "text": text,
            },
            now,
        )
        if record.state is LifecycleState.UNDER_REVIEW:
            self._maybe_resolve(record, now)

    def _maybe_resolve(self, record: ManuscriptRecord, now: datetime) -> str | None:
        resolution = resolve_reports(record.assignment, now, self.config.quorum_floor)
        if resolution["ready"]:
            return self._finalize_decision(record, resolution, now)
        if resolution["reason"] == "quorum_failure":
            invited = self._top_up_invitations(
                record, now, reason="quorum_failure",
                excluded_late=resolution["excluded_late"], lapsed=resolution["lapsed"],
            )
            log.info("quorum failure on %s: re-invited %d referees", record.paper_id, len(invited))
            return "quorum_failure"
        return None

    def _finalize_decision(self, record: ManuscriptRecord, resolution: dict, now: datetime) -> str:
        assignment = record.assignment
        on_time = [
            r for r in assignment.on_time_reports(assignment.round)
            if r.referee_id in set(resolution["on_time"])
        ]
        n = len(on_time)
        accepts = sum(1 for r in on_time if r.verdict == "Accept")
        rejects = sum(1 for r in on_time if r.verdict == "Reject")
        forced = False
        if rejects * 2 > n:
            outcome = "Rejected"
        elif accepts * 2 > n:
            outcome = "Published"
        elif record.revision_round >= self.config.max_revision_rounds:
            forced = True
            outcome = "Published" if accepts > rejects else "Rejected"
        else:
            outcome = "Revision"
        payload = {
            "paper_id": record.paper_id,
            "outcome": outcome,
            "round": assignment.round,
            "on_time": resolution["on_time"],
            "excluded_late": resolution["excluded_late"],
            "lapsed": resolution.get("lapsed", []),
            "verdicts": {"Accept": accepts, "Reject": rejects, "MinorRevision": n - accepts - rejects},
            "note": ("forced decision after final revision round" if forced else resolution["reason"]),
        }
        if outcome == "Published":
            rr = compute_rr([r.rating for r in on_time])
            payload["rr"] = rr.to_dict()
        if outcome == "Rejected":
            structural = any(r.structural_flaw for r in on_time if r.verdict == "Reject")
            if rejects * 2 > n and structural:
                payload["cooldown_until"] = iso(now + timedelta(days=self.config.cooldown_days))
                payload["cooldown_authors"] = list(record.authors)
        self._commit("DecisionFinalized", payload, now)
        self._award_round_points(record, on_time, now)
        if outcome == "Published":
            self._publish_entry(record, now)
        return outcome

    def _award_round_points(self, record: ManuscriptRecord, on_time_reports, now: datetime) -> None:
        for report in on_time_reports:
            rid = report.referee_id
            account = self.state.users[rid]
            bias_flagged = bool(self.state.active_flags(kind="rater_bias", subject=rid))
            late_count = incentives.trailing_year_count(account.late_exclusions, now)
            points, reason = incentives.points_award(
                True, bias_flagged, late_count, self.config.points_per_review
            )
            self._commit(
                "PointsEarned",
                {"user_id": rid, "points": points, "reason": reason, "paper_id": record.paper_id},
                now,
            )

    def _publish_entry(self, record: ManuscriptRecord, now: datetime) -> PublicationLogEntry:
        seq = sum(1 for e in self.state.publications if e.origin_node == self.config.node_id) + 1
        metadata = {
            "title": record.title,
            "authors": [
                self.state.users[a].display_name if a in self.state.users else a
                for a in record.authors
            ],
            "keywords": sorted(format_path(k) for k in record.keywords),
            "rr": record.rr.value,
            "published_at": iso(now),
        }
        payload = {
            "paper_id": record.paper_id,
            "origin_node": self.config.node_id,
            "seq": seq,
            "doi": make_doi(self.config.node_id, seq),
            "content_hash": record.content_hash,
            "metadata": metadata,
        }
        self._commit("EntryPublished", payload, now)
        entry = self.state.publications[-1]
        data = self.blobs.get(record.content_hash)
        self.federation.ensure_local(entry, data)
        return entry

    # ------------------------------------------------------------------ revision

    @serialized
    def submit_revision(self, author_id: str, paper_id: str, content: bytes, now: datetime) -> None:
        now = _resolve_now(now)
        record = self._paper(paper_id)
        if record.state is not LifecycleState.REVISION:
            raise InvalidState(f"{paper_id} is not awaiting a revision")
        if not record.is_author(author_id):
            raise Forbidden("only authors may submit a revision")
        assignment = record.assignment
        continuing = [r.referee_id for r in assignment.on_time_reports(assignment.round)]
        new_round = record.revision_round + 1
        deadline = iso(now + timedelta(days=self.config.min_deadline_days))
        digest = self.blobs.put(content)
        self._commit(
            "RevisionSubmitted",
            {
                "paper_id": paper_id,
                "content_hash": digest,
                "round": new_round,
                "deadlines": [
                    {"referee_id": rid, "declared_deadline": deadline} for rid in sorted(continuing)
                ],
            },
            now,
        )

    # ------------------------------------------------------------------ community

    @serialized
    def submit_community_review(
        self,
        user_id: str,
        paper_id: str,
        value: int,
        comment: str,
        public_name: bool = True,
        now: datetime | None = None,
    ) -> None:
        now = _resolve_now(now)
        record = self._paper(paper_id)
        rater = self._account(user_id)
        if record.state is not LifecycleState.PUBLISHED:
            raise InvalidState(f"{paper_id} is not published")
        if not rater.verified:
            raise UnverifiedIdentity(f"{user_id} is not verified")
        if record.is_author(user_id):
            raise AuthorSelfVote("authors may not review their own paper")
        value = validate_rating(value, RatingKind.COMMUNITY)
        if len(collapse_whitespace(comment)) < COMMENT_MIN_CHARS:
            raise VoidComment(
                f"comment must be at least {COMMENT_MIN_CHARS} characters after whitespace collapse"
            )
        event = RatingEvent(
            rater_id=user_id, paper_id=paper_id, kind=RatingKind.COMMUNITY,
            value=value, at=now, comment=comment, public_name=public_name,
        )
        cr = update_cr(record.community_reviews, event, self.trim)
        self._commit(
            "CommunityReviewFiled",
            {
                "paper_id": paper_id,
                "rater_id": user_id,
                "value": value,
                "comment": comment,
                "public_name": public_name,
                "cr": cr.to_dict(),
            },
            now,
        )
        self._evaluate_red_flag(record, now)
        for author_id in record.authors:
            self._evaluate_rater_bias(user_id, author_id, now)

    def _evaluate_red_flag(self, record: ManuscriptRecord, now: datetime) -> None:
        values = [e.value for e in sorted(record.community_reviews, key=lambda e: (e.at, e.rater_id))]
        flagged = detect_red_flag(
            values, self.config.red_flag_window, self.config.red_flag_floor, self.trim
        )
        active = self.state.active_flags(kind="red_flag", subject=record.paper_id)
        if flagged and not active:
            self._commit(
                "FlagRaised",
                {
                    "flag_id": f"flag{len(self.state.flags) + 1}",
                    "kind": "red_flag",
                    "subject": record.paper_id,
                    "mean": sum(values[-self.config.red_flag_window:]) / self.config.red_flag_window,
                    "sample_count": len(values),
                },
                now,
            )
        elif not flagged and active:
            self._commit("FlagCleared", {"flag_id": active[0].flag_id}, now)

    def _evaluate_rater_bias(self, rater_id: str, author_id: str, now: datetime) -> None:
        shared = []
        for pid in sorted(self.state.manuscripts):
            m = self.state.manuscripts[pid]
            if author_id in m.authors and m.community_reviews:
                if any(e.rater_id == rater_id for e in m.community_reviews):
                    shared.append((pid, m.community_reviews))
        shared.sort(key=lambda item: max(e.at for e in item[1] if e.rater_id == rater_id))
        record = incentives.rater_bias(
            rater_id, author_id, shared, self.trim,
            self.config.bias_window, self.config.bias_delta,
        )
        active = self.state.active_flags(kind="rater_bias", subject=rater_id, related=author_id)
        if record.flagged and not active:
            self._commit(
                "FlagRaised",
                {
                    "flag_id": f"flag{len(self.state.flags) + 1}",
                    "kind": "rater_bias",
                    "subject": rater_id,
                    "related": author_id,
                    "mean": record.mean_deviation,
                    "sample_count": len(record.deviations),
                },
                now,
            )
        elif not record.flagged and active:
            self._commit("FlagCleared", {"flag_id": active[0].flag_id}, now)

    # ------------------------------------------------------------------ rewards

    @serialized
    def spend_points(self, user_id: str, action: str, paper_id: str | None = None,
                     now: datetime | None = None) -> dict:
        now = _resolve_now(now)
        account = self._account(user_id)
        ledger = self.state.ledger_for(user_id)
        prices = {
            "VisibilityBoost": self.config.price_visibility_boost,
            "QuotaExtension": self.config.price_quota_extension,
            "CooldownReduction": self.config.price_cooldown_reduction,
        }
        if action not in prices:
            raise InvalidState(f"unknown reward action {action!r}")
        price = prices[action]
        if ledger.balance < price:
            raise InsufficientPoints(f"balance {ledger.balance} below price {price}")
        payload = {"user_id": user_id, "action": action, "points": price}
        if action == "VisibilityBoost":
            record = self._paper(paper_id or "")
            if record.state is not LifecycleState.PUBLISHED:
                raise InvalidState(f"{record.paper_id} is not published")
            if not record.is_author(user_id):
                raise Forbidden("visibility boosts apply to your own papers")
            payload["paper_id"] = record.paper_id
            payload["boost_amount"] = self.config.boost_amount
            payload["expires_at"] = iso(now + timedelta(days=self.config.boost_days))
        elif action == "QuotaExtension":
            payload["year"] = now.year
        elif action == "CooldownReduction":
            if account.cooldown_until is None or account.cooldown_until <= now:
                raise NoActiveCooldown(f"{user_id} has no active cooldown")
            payload["new_cooldown_until"] = iso(
                account.cooldown_until - timedelta(days=self.config.cooldown_reduction_days)
            )
        self._commit("PointsSpent", payload, now)
        return {"balance": self.state.ledger_for(user_id).balance, "action": action}

    # ------------------------------------------------------------------ timers

    @serialized
    def tick(self, now: datetime) -> list[str]:
        """Fire every timer that is due. Idempotent for a fixed ``now``."""
        now = _resolve_now(now)
        fired: list[str] = []

        due_editorial = sorted(
            (m.editorial_deadline, pid)
            for pid, m in self.state.manuscripts.items()
            if m.state is LifecycleState.EDITORIAL_PERIOD and now >= m.editorial_deadline
        )
        for _, pid in due_editorial:
            self.close_editorial_period(pid, now)
            fired.append(f"editorial_closed:{pid}")

        for pid in sorted(self.state.manuscripts):
            record = self.state.manuscripts[pid]
            if record.state is LifecycleState.AWAITING_ASSIGNMENT:
                if self._attempt_assignment(record, now):
                    fired.append(f"referees_invited:{pid}")

        for pid in sorted(self.state.manuscripts):
            record = self.state.manuscripts[pid]
            if record.state is not LifecycleState.UNDER_REVIEW or record.assignment is None:
                continue
            stale = [
                i.referee_id for i in record.assignment.invitations
                if i.status == INVITED
                and now >= i.invited_at + timedelta(days=self.config.invite_response_days)
            ]
            for rid in stale:
                self._commit("InvitationDeclined", {"paper_id": pid, "referee_id": rid, "auto": True}, now)
                fired.append(f"invitation_lapsed:{pid}:{rid}")
            if stale:
                self._top_up_invitations(record, now, reason="lapse", excluded_late=[], lapsed=[])
            result = self._maybe_resolve(record, now)
            if result is not None:
                fired.append(f"resolved:{pid}:{result}")
        return fired

    # ------------------------------------------------------------------ snapshots

    def snapshot(self):
        return self.store.snapshot(self.state.to_dict(), self.store.last_seq)

    def replayed_state(self) -> PortalState:
        return self.store.replay(apply_event, PortalState())
