"""Referee eligibility rules, candidate pools, seeded selection, report triage.

Requirements scale with the manuscript's initial rating: the stronger the
claimed impact, the heavier the bibliometric record a referee needs. Rules
ship as a small configuration file so deployments can tune the thresholds.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field
from datetime import datetime
from importlib import resources

from .canonical import iso, parse_ts
from .errors import ConfigInvalid, EmptyPool, OutOfRange, PoolTooSmall
from .domain import UserAccount
from .taxonomy import overlap_score


@dataclass(frozen=True)
class EligibilityRule:
    """One band of referee requirements: (band_low, band_high] on the initial
    rating, minimum total published papers, and a minimum count of papers at
    or above the qualifying rating."""

    band_low: float
    band_high: float
    min_total_papers: int
    min_qualified_papers: int
    qualifying_rating: float

    def admits(self, user: UserAccount) -> bool:
        if len(user.published_papers) < self.min_total_papers:
            return False
        return user.qualified_paper_count(self.qualifying_rating) >= self.min_qualified_papers

    def to_dict(self) -> dict:
        return {
            "band_low": self.band_low,
            "band_high": self.band_high,
            "min_total_papers": self.min_total_papers,
            "min_qualified_papers": self.min_qualified_papers,
            "qualifying_rating": self.qualifying_rating,
        }


def load_rules(path: str | None = None) -> tuple[EligibilityRule, ...]:
    if path is None:
        text = resources.files("scholarnode.data").joinpath("eligibility_rules.txt").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    rules: list[EligibilityRule] = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 5:
            raise ConfigInvalid(f"bad eligibility rule line: {line!r}")
        rules.append(
            EligibilityRule(
                band_low=float(parts[0]),
                band_high=float(parts[1]),
                min_total_papers=int(parts[2]),
                min_qualified_papers=int(parts[3]),
                qualifying_rating=float(parts[4]),
            )
        )
    if not rules:
        raise ConfigInvalid("eligibility rules file is empty")
    rules.sort(key=lambda r: r.band_low)
    for a, b in zip(rules, rules[1:]):
        if a.band_high != b.band_low:
            raise ConfigInvalid("eligibility rule bands must partition the rating range")
    return tuple(rules)


def eligibility_rule_for(ir: float, rules: tuple[EligibilityRule, ...]) -> EligibilityRule:
    """Pick the rule whose band contains the initial rating.

    Band edges belong to the lower band (a 2.0 falls into the first band, a
    2.01 into the second); the scale floor 1.0 is merged into the first band.
    """
    if ir < rules[0].band_low or ir > rules[-1].band_high:
        raise OutOfRange(f"initial rating {ir} outside [{rules[0].band_low}, {rules[-1].band_high}]")
    for rule in rules:
        if ir <= rule.band_high:
            return rule
    raise OutOfRange(f"no band for initial rating {ir}")  # unreachable


@dataclass
class PoolCandidate:
    user_id: str
    overlap: float
    suggested: bool = False


def candidate_pool(
    manuscript_keywords,
    manuscript_authors: set[str],
    author_institutions: set[str],
    users: dict[str, UserAccount],
    rule: EligibilityRule,
    overlap_floor: float,
) -> list[PoolCandidate]:
    """All users eligible to referee the manuscript under ``rule``.

    Conflicts are hard exclusions: co-authors and anyone registered at one of
    the authors' institutions never enter the pool. Raises EmptyPool when
    nobody qualifies; callers then walk the relaxation ladder.
    """
    pool: list[PoolCandidate] = []
    for uid in sorted(users):
        user = users[uid]
        if uid in manuscript_authors:
            continue
        if user.institution in author_institutions:
            continue
        if not rule.admits(user):
            continue
        score = overlap_score(user.profile.keywords, manuscript_keywords)
        if score >= overlap_floor:
            pool.append(PoolCandidate(user_id=uid, overlap=score))
    if not pool:
        raise EmptyPool("no eligible referees at this threshold")
    return pool


def relaxed_candidate_pool(
    manuscript_keywords,
    manuscript_authors: set[str],
    author_institutions: set[str],
    users: dict[str, UserAccount],
    rule: EligibilityRule,
    overlap_floor: float,
    needed: int,
) -> tuple[list[PoolCandidate], list[str]]:
    """Build a pool of at least ``needed`` candidates, relaxing thresholds.

    The overlap floor drops in 0.05 steps to a hard floor of 0.1; only then
    is the minimum-paper requirement decremented. Every relaxation step is
    returned so the caller can record it in the audit trail.
    """
    steps: list[str] = []
    floor = overlap_floor
    current = rule
    while True:
        try:
            pool = candidate_pool(
                manuscript_keywords, manuscript_authors, author_institutions,
                users, current, floor,
            )
        except EmptyPool:
            pool = []
        if len(pool) >= needed:
            return pool, steps
        if floor - 0.05 >= 0.1 - 1e-9:
            floor = round(floor - 0.05, 2)
            steps.append(f"overlap_floor={floor}")
            continue
        if current.min_total_papers > 0:
            current = EligibilityRule(
                band_low=current.band_low,
                band_high=current.band_high,
                min_total_papers=current.min_total_papers - 1,
                min_qualified_papers=min(current.min_qualified_papers, current.min_total_papers - 1),
                qualifying_rating=current.qualifying_rating,
            )
            steps.append(f"min_total_papers={current.min_total_papers}")
            continue
        return pool, steps


def select_referees(
    pool: list[PoolCandidate],
    author_exclusions: set[str],
    author_suggestions: set[str],
    min_required: int,
    seed: int,
    suggestion_weight: float = 2.0,
) -> list[str]:
    """Sample min_required + 1 invitees without replacement.

    Suggested candidates get their sampling weight multiplied, not a
    guaranteed slot, so suggestion lists cannot be used to hand-pick a
    panel. Deterministic for a fixed (pool order, seed).
    """
    eligible = [c for c in pool if c.user_id not in author_exclusions]
    count = min_required + 1
    if len(eligible) < count:
        raise PoolTooSmall(f"need {count} candidates, have {len(eligible)}")
    rng = random.Random(seed)
    remaining = list(eligible)
    chosen: list[str] = []
    while len(chosen) < count:
        weights = [
            suggestion_weight if (c.suggested or c.user_id in author_suggestions) else 1.0
            for c in remaining
        ]
        total = sum(weights)
        pick = rng.random() * total
        acc = 0.0
        idx = len(remaining) - 1
        for i, w in enumerate(weights):
            acc += w
            if pick < acc:
                idx = i
                break
        chosen.append(remaining.pop(idx).user_id)
    return chosen


def derive_seed(*parts) -> int:
    """Stable selection seed from node seed material and manuscript context."""
    blob = "|".join(str(p) for p in parts).encode("utf-8")
    return int.from_bytes(hashlib.sha256(blob).digest()[:8], "big")


INVITED = "Invited"
ACCEPTED = "Accepted"
DECLINED = "Declined"
REPORTED = "Reported"
EXCLUDED_LATE = "ExcludedLate"

ACTIVE_STATUSES = (INVITED, ACCEPTED, REPORTED)


@dataclass
class Invitation:
    referee_id: str
    status: str
    invited_at: datetime
    round: int
    declared_deadline: datetime | None = None

    def to_dict(self) -> dict:
        return {
            "referee_id": self.referee_id,
            "status": self.status,
            "invited_at": iso(self.invited_at),
            "round": self.round,
            "declared_deadline": iso(self.declared_deadline) if self.declared_deadline else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Invitation":
        return cls(
            referee_id=d["referee_id"],
            status=d["status"],
            invited_at=parse_ts(d["invited_at"]),
            round=d["round"],
            declared_deadline=parse_ts(d["declared_deadline"]) if d["declared_deadline"] else None,
        )


@dataclass
class RefereeReport:
    referee_id: str
    verdict: str  # Accept | MinorRevision | Reject
    rating: int
    filed_at: datetime
    on_time: bool
    round: int
    structural_flaw: bool = False
    text: str = ""

    def to_dict(self) -> dict:
        return {
            "referee_id": self.referee_id,
            "verdict": self.verdict,
            "rating": self.rating,
            "filed_at": iso(self.filed_at),
            "on_time": self.on_time,
            "round": self.round,
            "structural_flaw": self.structural_flaw,
            "text": self.text,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RefereeReport":
        return cls(
            referee_id=d["referee_id"],
            verdict=d["verdict"],
            rating=d["rating"],
            filed_at=parse_ts(d["filed_at"]),
            on_time=d["on_time"],
            round=d["round"],
            structural_flaw=d["structural_flaw"],
            text=d["text"],
        )


@dataclass
class RefereeAssignment:
    paper_id: str
    min_required: int
    seed: int
    round: int = 0
    rule: EligibilityRule | None = None
    invitations: list[Invitation] = field(default_factory=list)
    reports: list[RefereeReport] = field(default_factory=list)
    relaxations: list[str] = field(default_factory=list)

    def invitation_for(self, referee_id: str) -> Invitation | None:
        for inv in self.invitations:
            if inv.referee_id == referee_id:
                return inv
        return None

    def active_invitations(self) -> list[Invitation]:
        return [i for i in self.invitations if i.status in ACTIVE_STATUSES]

    def round_reports(self, round_no: int) -> list[RefereeReport]:
        return [r for r in self.reports if r.round == round_no]

    def on_time_reports(self, round_no: int) -> list[RefereeReport]:
        return [r for r in self.reports if r.round == round_no and r.on_time]

    def ever_invited(self) -> set[str]:
        return {i.referee_id for i in self.invitations}

    def to_dict(self) -> dict:
        return {
            "paper_id": self.paper_id,
            "min_required": self.min_required,
            "seed": self.seed,
            "round": self.round,
            "rule": self.rule.to_dict() if self.rule else None,
            "invitations": [i.to_dict() for i in self.invitations],
            "reports": [r.to_dict() for r in self.reports],
            "relaxations": list(self.relaxations),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RefereeAssignment":
        return cls(
            paper_id=d["paper_id"],
            min_required=d["min_required"],
            seed=d["seed"],
            round=d["round"],
            rule=EligibilityRule(**d["rule"]) if d["rule"] else None,
            invitations=[Invitation.from_dict(i) for i in d["invitations"]],
            reports=[RefereeReport.from_dict(r) for r in d["reports"]],
            relaxations=list(d["relaxations"]),
        )


def resolve_reports(assignment: RefereeAssignment, now: datetime, quorum_floor: int = 3) -> dict:
    """Classify the current round: can it finalize, and who gets excluded.

    Ready fires by quorum the moment min_required on-time reports exist, or
    by deadline once every accepted invitee's window has closed and at least
    ``quorum_floor`` on-time reports came in. Referees who accepted but have
    no on-time report are excluded late; invitees who never responded merely
    lapse. A report filed after its declared deadline never counts.
    """
    rnd = assignment.round
    on_time = assignment.on_time_reports(rnd)
    on_time_ids = {r.referee_id for r in on_time}
    stragglers = [i for i in assignment.active_invitations() if i.referee_id not in on_time_ids]
    excluded = sorted(i.referee_id for i in stragglers if i.status in (ACCEPTED, REPORTED))
    lapsed = sorted(i.referee_id for i in stragglers if i.status == INVITED)
    result = {
        "on_time": [r.referee_id for r in on_time],
        "excluded_late": excluded,
        "lapsed": lapsed,
    }
    if len(on_time) >= assignment.min_required:
        return {**result, "ready": True, "reason": "quorum"}
    windows_closed = all(
        i.status == REPORTED
        or (i.status == ACCEPTED and i.declared_deadline is not None and i.declared_deadline < now)
        for i in stragglers
    )
    if windows_closed:
        if len(on_time) >= quorum_floor:
            return {**result, "ready": True, "reason": "deadline"}
        return {**result, "ready": False, "reason": "quorum_failure"}
    return {**result, "ready": False, "reason": "pending", "excluded_late": [], "lapsed": []}
