"""Seeded discrete-event simulation of the publishing workflow.

Proposed mode drives the real engine through synthetic communities on a
virtual clock (one-hour steps, timers firing through the production tick),
so no rule exists twice. Baseline mode models today's journal ladder: each
attempt costs a week of editorial screening plus a month of review by three
referees, with acceptance odds rising as the ladder descends, up to three
attempts. ``compare`` reports how many referee reports and days of waiting
the single-submission workflow saves.
"""

from __future__ import annotations

import heapq
import random
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone

from .config import NodeConfig
from .engine import Node, editorial_overlap_threshold
from .errors import NodeError, ConfigInvalid
from .taxonomy import format_path, overlap_score, parse_path

SIM_EPOCH = datetime(2026, 1, 1, tzinfo=timezone.utc)

QUALITY_WEIGHTS = (0.10, 0.25, 0.30, 0.25, 0.10)  # quality tiers 1..5
QUALITY_ACCEPT_PROB = {1: 0.50, 2: 0.60, 3: 0.75, 4: 0.85, 5: 0.92}

# referee verdict odds (accept, minor revision, reject) by the paper's latent
# soundness; panels mostly agree because the same paper drives every verdict
FATE_VERDICT_ODDS = {
    "sound": (0.92, 0.05, 0.03),
    "borderline": (0.50, 0.30, 0.20),
    "weak": (0.05, 0.15, 0.80),
}
# once authors have addressed the panel's comments, acceptance is likely
FATE_REVISED_ACCEPT = {"sound": 0.97, "borderline": 0.90, "weak": 0.50}

_FILLER = (
    "The methods are laid out clearly enough to follow and the claims are "
    "checked against the data that the authors actually provide, which makes "
    "the conclusions straightforward to assess on their own terms. "
)


def review_comment(seed_text: str) -> str:
    text = f"Re {seed_text}: " + _FILLER * 2
    return text.strip()


@dataclass
class SimConfig:
    users: int = 300
    manuscripts: int = 200
    days: int = 365
    seed: int = 42
    mode: str = "proposed"  # proposed | baseline
    # agent behaviour
    decline_probability: float = 0.10
    never_report_probability: float = 0.08
    late_file_probability: float = 0.25     # excluded referee still files
    report_window_fraction: tuple[float, float] = (0.35, 1.02)
    accept_probabilities: tuple[float, float, float] = (0.2, 0.4, 0.9)  # baseline ladder
    honesty_noise: float = 0.7
    minor_revision_share: float = 0.3       # of non-accept verdicts
    community_reviews_per_paper: int = 3
    submission_window_fraction: float = 0.6

    def validate(self) -> None:
        if self.users <= 0 or self.manuscripts <= 0 or self.days <= 0:
            raise ConfigInvalid("users, manuscripts and days must be positive")
        if self.mode not in ("proposed", "baseline"):
            raise ConfigInvalid(f"unknown mode {self.mode!r}")
        for p in (self.decline_probability, self.never_report_probability,
                  self.late_file_probability, *self.accept_probabilities):
            if not (0.0 <= p <= 1.0):
                raise ConfigInvalid(f"probability {p} outside [0, 1]")


@dataclass
class SimMetrics:
    total_referee_reports: int = 0
    mean_referees_per_accepted_paper: float = 0.0
    mean_days_to_publication: float = 0.0
    distinct_referees: int = 0
    quorum_failures: int = 0
    published_papers: int = 0
    min_referees_per_accepted_paper: int = 0

    def to_dict(self) -> dict:
        return {
            "total_referee_reports": self.total_referee_reports,
            "mean_referees_per_accepted_paper": self.mean_referees_per_accepted_paper,
            "mean_days_to_publication": self.mean_days_to_publication,
            "distinct_referees": self.distinct_referees,
            "quorum_failures": self.quorum_failures,
            "published_papers": self.published_papers,
            "min_referees_per_accepted_paper": self.min_referees_per_accepted_paper,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SimMetrics":
        return cls(**{k: d[k] for k in cls().to_dict()})


def proposed_metrics_from_events(events) -> SimMetrics:
    """Read the run's outcome straight off the engine's event log."""
    submitted_at: dict[str, datetime] = {}
    published_at: dict[str, datetime] = {}
    engaged: dict[str, set[str]] = defaultdict(set)
    reports = 0
    reporters: set[str] = set()
    quorum_failures = 0
    for ev in events:
        p = ev.payload
        if ev.kind == "ManuscriptSubmitted":
            submitted_at[p["paper_id"]] = ev.at
        elif ev.kind == "InvitationAccepted":
            engaged[p["paper_id"]].add(p["referee_id"])
        elif ev.kind == "ReportFiled":
            reports += 1
            reporters.add(p["referee_id"])
        elif ev.kind == "RefereesInvited" and p.get("reason") == "quorum_failure":
            quorum_failures += 1
        elif ev.kind == "DecisionFinalized" and p["outcome"] == "Published":
            published_at[p["paper_id"]] = ev.at
    metrics = SimMetrics(
        total_referee_reports=reports,
        distinct_referees=len(reporters),
        quorum_failures=quorum_failures,
        published_papers=len(published_at),
    )
    if published_at:
        per_paper = [len(engaged[pid]) for pid in published_at]
        latencies = [
            (published_at[pid] - submitted_at[pid]).total_seconds() / 86400.0
            for pid in published_at
        ]
        metrics.mean_referees_per_accepted_paper = sum(per_paper) / len(per_paper)
        metrics.min_referees_per_accepted_paper = min(per_paper)
        metrics.mean_days_to_publication = sum(latencies) / len(latencies)
    return metrics


class ProposedSimulation:
    """Agent community around a real Node, on a virtual one-hour clock."""

    def __init__(self, config: SimConfig):
        config.validate()
        if config.mode != "proposed":
            raise ConfigInvalid("ProposedSimulation needs mode='proposed'")
        self.config = config
        self.rng = random.Random(config.seed)
        self.node = Node(NodeConfig(
            node_id="sim",
            allowed_email_domains=("sim.example",),
            seed=config.seed,
        ))
        self._agenda: list[tuple[datetime, int, object]] = []
        self._counter = 0
        self._event_cursor = 0
        self.reports_attempted = 0
        self.skipped_actions = 0
        self.commands_executed = 0
        self._leaves = sorted(
            format_path(p) for p in self.node.topics.nodes
            if not self.node.topics.sections_under(p)
        )
        self._users: list[str] = []
        self._quality: dict[str, int] = {}
        self._fate: dict[str, str] = {}

    # -- agenda ------------------------------------------------------------------

    def _schedule(self, at: datetime, action) -> None:
        self._counter += 1
        heapq.heappush(self._agenda, (at, self._counter, action))

    def _noisy_vote(self, quality: int) -> int:
        return max(1, min(5, round(quality + self.rng.gauss(0, self.config.honesty_noise))))

    # -- population ---------------------------------------------------------------

    def _register_population(self) -> None:
        for i in range(self.config.users):
            home = self.rng.choice(self._leaves)
            keywords = [home]
            if self.rng.random() < 0.5:
                keywords.append(self.rng.choice(self._leaves))
            papers = self.rng.randint(3, 18)
            prior = {
                f"prior-{i}-{j}": float(self.rng.randint(1, 5)) for j in range(papers)
            }
            account = self.node.register_user(
                identity=f"user{i}@sim.example",
                keywords=sorted(set(keywords)),
                display_name=f"User {i}",
                institution=f"inst{i % 20}",
                prior_papers=prior,
                now=SIM_EPOCH,
            )
            self._users.append(account.user_id)

    def _plan_submissions(self) -> None:
        window_hours = int(self.config.days * 24 * self.config.submission_window_fraction)
        for m in range(self.config.manuscripts):
            at = SIM_EPOCH + timedelta(hours=self.rng.randint(1, max(1, window_hours)))
            quality = self.rng.choices((1, 2, 3, 4, 5), weights=QUALITY_WEIGHTS)[0]
            keywords = [self.rng.choice(self._leaves)]
            self._schedule(at, ("submit", m, quality, keywords))

    # -- actions ---------------------------------------------------------------------

    def _run_action(self, action, now: datetime) -> None:
        kind = action[0]
        try:
            if kind == "submit":
                self._do_submit(action, now)
            elif kind == "vote":
                _, user_id, paper_id, value = action
                self.node.cast_initial_rating(user_id, paper_id, value, now)
            elif kind == "respond":
                self._do_respond(action, now)
            elif kind == "report":
                _, user_id, paper_id, verdict, rating, flaw = action
                record = self.node.state.manuscripts.get(paper_id)
                inv = record.assignment.invitation_for(user_id) if record and record.assignment else None
                if inv is not None and inv.status == "ExcludedLate":
                    # most referees abandon a report once the panel excluded them
                    if self.rng.random() >= self.config.late_file_probability:
                        return
                self.reports_attempted += 1
                self.node.record_referee_report(user_id, paper_id, verdict, rating,
                                                text="report", structural_flaw=flaw, now=now)
            elif kind == "revise":
                _, author_id, paper_id = action
                self.node.submit_revision(author_id, paper_id, b"revised " + paper_id.encode(), now)
            elif kind == "community":
                _, user_id, paper_id, value = action
                self.node.submit_community_review(
                    user_id, paper_id, value, review_comment(paper_id), True, now,
                )
        except NodeError:
            if kind == "report":
                self.reports_attempted -= 1
            self.skipped_actions += 1

    def _do_submit(self, action, now: datetime) -> None:
        _, m, quality, keywords = action
        year = now.year
        candidates = [
            uid for uid in self._users
            if self.node.state.users[uid].uploads_used(year)
            < self.node.state.users[uid].effective_quota(year)
            and (self.node.state.users[uid].cooldown_until or SIM_EPOCH) <= now
        ]
        if not candidates:
            self.skipped_actions += 1
            return
        author_id = self.rng.choice(candidates)
        account = self.node.state.users[author_id]
        optimism = self.rng.choice((0, 0, 0, 1, 1, 2))
        iar = max(1, min(5, quality + optimism))
        if account.iar_cap is not None:
            iar = min(iar, account.iar_cap)
        record = self.node.submit_manuscript(
            author_id=author_id,
            title=f"Manuscript {m}",
            content=f"manuscript {m} body".encode(),
            keywords=keywords,
            iar=iar,
            now=now,
        )
        self._quality[record.paper_id] = quality
        accept_p = QUALITY_ACCEPT_PROB[quality]
        u = self.rng.random()
        if u < accept_p:
            self._fate[record.paper_id] = "sound"
        elif u < accept_p + (1 - accept_p) * 0.25:
            self._fate[record.paper_id] = "borderline"
        else:
            self._fate[record.paper_id] = "weak"
        self._schedule_editorial_votes(record.paper_id, iar, keywords, author_id, quality, now)

    def _schedule_editorial_votes(self, paper_id: str, iar: int, keywords: list[str],
                                  author_id: str, quality: int, now: datetime) -> None:
        threshold = editorial_overlap_threshold(iar)
        paths = [parse_path(k) for k in keywords]
        eligible = [
            uid for uid in self._users
            if uid != author_id
            and overlap_score(self.node.state.users[uid].profile.keywords, paths) >= threshold
        ]
        self.rng.shuffle(eligible)
        for uid in eligible[: self.rng.randint(3, 8)]:
            delay = timedelta(hours=self.rng.randint(2, int(self.node.config.editorial_days * 24) - 2))
            self._schedule(now + delay, ("vote", uid, paper_id, self._noisy_vote(quality)))

    def _do_respond(self, action, now: datetime) -> None:
        _, user_id, paper_id = action
        if self.rng.random() < self.config.decline_probability:
            self.node.decline_invitation(user_id, paper_id, now)
            return
        days = self.rng.randint(self.node.config.min_deadline_days, self.node.config.max_deadline_days)
        self.node.accept_invitation(user_id, paper_id, days, now)
        quality = self._quality.get(paper_id, 3)
        if self.rng.random() < self.config.never_report_probability:
            return
        lo, hi = self.config.report_window_fraction
        fraction = self.rng.uniform(lo, hi)
        file_at = now + timedelta(days=days * fraction)
        p_accept, p_minor, _ = FATE_VERDICT_ODDS[self._fate.get(paper_id, "borderline")]
        u = self.rng.random()
        if u < p_accept:
            verdict = "Accept"
        elif u < p_accept + p_minor:
            verdict = "MinorRevision"
        else:
            verdict = "Reject"
        flaw = verdict == "Reject" and self.rng.random() < 0.5
        self._schedule(file_at, ("report", user_id, paper_id, verdict, self._noisy_vote(quality), flaw))

    # -- event reactions -----------------------------------------------------------------

    def _react_to_events(self, now: datetime) -> None:
        events = self.node.store.events(self._event_cursor + 1)
        self._event_cursor = self.node.store.last_seq
        for ev in events:
            p = ev.payload
            if ev.kind == "RefereesInvited":
                for rid in p["referee_ids"]:
                    delay = timedelta(hours=self.rng.randint(4, 72))
                    self._schedule(now + delay, ("respond", rid, p["paper_id"]))
            elif ev.kind == "DecisionFinalized":
                if p["outcome"] == "Revision":
                    author = self.node.state.manuscripts[p["paper_id"]].submitting_author
                    delay = timedelta(days=self.rng.randint(2, 10))
                    self._schedule(now + delay, ("revise", author, p["paper_id"]))
                elif p["outcome"] == "Published":
                    self._schedule_community_reviews(p["paper_id"], now)
            elif ev.kind == "RevisionSubmitted":
                # referees who dropped to a late report in the earlier round
                # are re-engaged by the engine; file again next round
                quality = self._quality.get(p["paper_id"], 3)
                accept_p = FATE_REVISED_ACCEPT[self._fate.get(p["paper_id"], "borderline")]
                for d in p["deadlines"]:
                    if self.rng.random() < self.config.never_report_probability / 2:
                        continue
                    lo, hi = self.config.report_window_fraction
                    frac = self.rng.uniform(lo, min(1.0, hi))
                    file_at = now + timedelta(days=self.node.config.min_deadline_days * frac)
                    verdict = "Accept" if self.rng.random() < accept_p else "Reject"
                    self._schedule(file_at, ("report", d["referee_id"], p["paper_id"],
                                             verdict, self._noisy_vote(quality), False))

    def _schedule_community_reviews(self, paper_id: str, now: datetime) -> None:
        record = self.node.state.manuscripts[paper_id]
        quality = self._quality.get(paper_id, 3)
        pool = [u for u in self._users if u not in record.authors]
        self.rng.shuffle(pool)
        for uid in pool[: self.config.community_reviews_per_paper]:
            delay = timedelta(days=self.rng.randint(1, 45))
            self._schedule(now + delay, ("community", uid, paper_id, self._noisy_vote(quality)))

    # -- main loop --------------------------------------------------------------------------

    def run(self) -> SimMetrics:
        self._register_population()
        self._plan_submissions()
        self._event_cursor = self.node.store.last_seq
        now = SIM_EPOCH
        end = SIM_EPOCH + timedelta(days=self.config.days)
        step = timedelta(hours=1)
        while now <= end:
            while self._agenda and self._agenda[0][0] <= now:
                _, _, action = heapq.heappop(self._agenda)
                self._run_action(action, now)
                self.commands_executed += 1
            self.node.tick(now)
            self.commands_executed += 1
            self._react_to_events(now)
            now += step
        return proposed_metrics_from_events(self.node.store.events())


def run_proposed(config: SimConfig) -> SimMetrics:
    sim = ProposedSimulation(config)
    return sim.run()


def run_baseline(config: SimConfig) -> SimMetrics:
    """The resubmission ladder: up to three journals, three referees each."""
    config.validate()
    if config.mode != "baseline":
        raise ConfigInvalid("run_baseline needs mode='baseline'")
    rng = random.Random(config.seed)
    ladder = config.accept_probabilities
    reports = 0
    reporters: set[int] = set()
    per_paper_referees: list[int] = []
    latencies: list[float] = []
    published = 0
    window_days = config.days * config.submission_window_fraction
    for _ in range(config.manuscripts):
        submit_day = rng.uniform(0, window_days)
        elapsed = 0.0
        referees_used = 0
        accepted = False
        for attempt, accept_p in enumerate(ladder):
            elapsed += 7  # editorial screen
            elapsed += 30 + rng.uniform(-3, 10)  # one review round
            for _ in range(3):
                reporters.add(rng.randrange(config.users))
                reports += 1
                referees_used += 1
            if rng.random() < accept_p:
                accepted = True
                break
        if accepted and submit_day + elapsed <= config.days:
            published += 1
            per_paper_referees.append(referees_used)
            latencies.append(elapsed)
    metrics = SimMetrics(
        total_referee_reports=reports,
        distinct_referees=len(reporters),
        quorum_failures=0,
        published_papers=published,
    )
    if per_paper_referees:
        metrics.mean_referees_per_accepted_paper = sum(per_paper_referees) / len(per_paper_referees)
        # every ladder attempt runs a fixed panel of three, so the smallest
        # panel that decided an accepted paper is always three
        metrics.min_referees_per_accepted_paper = 3
        metrics.mean_days_to_publication = sum(latencies) / len(latencies)
    return metrics


def compare(proposed: SimMetrics, baseline: SimMetrics) -> dict:
    """Referee-load and latency deltas between the two modes."""
    report_reduction = 0.0
    if baseline.total_referee_reports:
        report_reduction = 1.0 - proposed.total_referee_reports / baseline.total_referee_reports
    min_ratio = 0.0
    if baseline.min_referees_per_accepted_paper:
        min_ratio = (
            proposed.min_referees_per_accepted_paper / baseline.min_referees_per_accepted_paper
        )
    return {
        "report_reduction": report_reduction,
        "latency_reduction_days": baseline.mean_days_to_publication - proposed.mean_days_to_publication,
        "proposed_total_reports": proposed.total_referee_reports,
        "baseline_total_reports": baseline.total_referee_reports,
        "proposed_min_referees": proposed.min_referees_per_accepted_paper,
        "baseline_min_referees": baseline.min_referees_per_accepted_paper,
        "min_referee_ratio": min_ratio,
        "proposed_mean_days": proposed.mean_days_to_publication,
        "baseline_mean_days": baseline.mean_days_to_publication,
    }


# --- the deterministic three-resubmission scenario ---------------------------------


def three_resubmission_scenario() -> tuple[SimMetrics, SimMetrics]:
    """One paper, fully scripted: in today's ladder it is accepted on the
    third attempt (nine reports, 111 days); in the single-submission workflow
    five referees engage, four report on time, one files late."""
    node = Node(NodeConfig(node_id="sim", allowed_email_domains=("sim.example",), seed=7))
    t0 = SIM_EPOCH
    author = node.register_user(
        "author@sim.example", ["physics/cmp/layered"], institution="inst-a", now=t0
    )
    voters = [
        node.register_user(f"voter{i}@sim.example", ["physics/cmp/layered"],
                           institution=f"inst-v{i}", now=t0)
        for i in range(3)
    ]
    referees = [
        node.register_user(
            f"referee{i}@sim.example", ["physics/cmp/layered"], institution=f"inst-r{i}",
            prior_papers={f"prev-{i}-{j}": (4.0 if j < 2 else 3.0) for j in range(9)},
            now=t0,
        )
        for i in range(6)
    ]
    record = node.submit_manuscript(
        author.user_id, "Single submission study", b"manuscript body",
        ["physics/cmp/layered"], iar=4, now=t0,
    )
    for v in voters:
        node.cast_initial_rating(v.user_id, record.paper_id, 4, now=t0 + timedelta(days=2))
    node.tick(t0 + timedelta(days=7))
    assignment = node.state.manuscripts[record.paper_id].assignment
    invited = [i.referee_id for i in assignment.invitations]
    accept_at = t0 + timedelta(days=8)
    for rid in invited:
        node.accept_invitation(rid, record.paper_id, 14, now=accept_at)
    ratings = {invited[0]: 2, invited[1]: 3, invited[2]: 4, invited[3]: 5}
    for offset, rid in enumerate(invited[:4]):
        node.record_referee_report(
            rid, record.paper_id, "Accept", ratings[rid], now=accept_at + timedelta(days=2 + offset),
        )
    # the fifth referee files a day after the quorum excluded them
    node.record_referee_report(
        invited[4], record.paper_id, "Accept", 4, now=accept_at + timedelta(days=6),
    )
    proposed = proposed_metrics_from_events(node.store.events())

    # scripted ladder: rejected twice, accepted on the third attempt
    baseline = SimMetrics(
        total_referee_reports=9,
        mean_referees_per_accepted_paper=9.0,
        min_referees_per_accepted_paper=3,
        mean_days_to_publication=3 * (7 + 30),
        distinct_referees=9,
        quorum_failures=0,
        published_papers=1,
    )
    return proposed, baseline
