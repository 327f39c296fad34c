"""Integrity analytics and the referee reward economy.

Two discouragement signals are computed from the event history: authors who
consistently rate their own work far above what the community's editorial
votes say, and raters whose community votes consistently deviate from
everyone else's on one author's papers. Both are pure functions of history;
the engine records the resulting flags as events so replay agrees.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime

from .domain import RatingEvent
from .ratings import TrimSpec, round_half_up, trimmed_mean


@dataclass
class DiscrepancyRecord:
    """An author's recent self-rating overshoot relative to editorial votes."""

    author_id: str
    deltas: list[tuple[str, float]] = field(default_factory=list)  # (paper_id, iar - icr)
    mean_delta: float = 0.0
    window_icr_mean: float = 0.0
    flagged: bool = False


def author_discrepancy(
    author_id: str,
    history: list[dict],
    window: int = 5,
    threshold: float = 1.0,
) -> DiscrepancyRecord:
    """Evaluate the last ``window`` manuscripts' (self-rating - ICR) deltas.

    Flags when at least three samples exist and their mean is at or above
    the threshold. ``history`` entries are {"paper_id", "delta", "icr"} in
    editorial-close order.
    """
    recent = history[-window:]
    record = DiscrepancyRecord(
        author_id=author_id,
        deltas=[(h["paper_id"], h["delta"]) for h in recent],
    )
    if not recent:
        return record
    record.mean_delta = sum(h["delta"] for h in recent) / len(recent)
    record.window_icr_mean = sum(h["icr"] for h in recent) / len(recent)
    record.flagged = len(recent) >= 3 and record.mean_delta >= threshold
    return record


def discouragement_cap(record: DiscrepancyRecord) -> int:
    """Self-rating cap for a flagged author: the community's own view,
    rounded half-up."""
    return max(1, min(5, round_half_up(record.window_icr_mean)))


def discrepancy_expired(history_after_flag: list[dict], threshold: float = 1.0) -> bool:
    """Discouragement lifts once the author's next three manuscripts show a
    mean delta under half the flag threshold."""
    if len(history_after_flag) < 3:
        return False
    recent = history_after_flag[:3]
    mean = sum(h["delta"] for h in recent) / len(recent)
    return mean < threshold / 2


@dataclass
class RaterBiasRecord:
    """A rater's systematic deviation from the rest of the community on one
    author's papers."""

    rater_id: str
    author_id: str
    deviations: list[tuple[str, float]] = field(default_factory=list)
    mean_deviation: float = 0.0
    flagged: bool = False


def rater_bias(
    rater_id: str,
    author_id: str,
    papers_with_votes: list[tuple[str, list[RatingEvent]]],
    spec: TrimSpec = TrimSpec(),
    window: int = 5,
    threshold: float = 1.5,
) -> RaterBiasRecord:
    """Leave-one-out deviation of a rater's community votes on one author's papers.

    For each paper the deviation is the rater's vote minus the trimmed mean
    of everyone else's votes; papers where nobody else voted are skipped.
    Flags on >= 3 deviations with |mean| at or above the threshold, over the
    most recent ``window`` shared papers.
    """
    record = RaterBiasRecord(rater_id=rater_id, author_id=author_id)
    devs: list[tuple[str, float]] = []
    for paper_id, votes in papers_with_votes:
        mine = [v for v in votes if v.rater_id == rater_id]
        others = [v.value for v in votes if v.rater_id != rater_id]
        if not mine or not others:
            continue
        devs.append((paper_id, mine[0].value - trimmed_mean(others, spec)))
    record.deviations = devs[-window:]
    if record.deviations:
        record.mean_deviation = sum(d for _, d in record.deviations) / len(record.deviations)
        record.flagged = (
            len(record.deviations) >= 3 and abs(record.mean_deviation) >= threshold
        )
    return record


def referee_divergence(
    referee_votes: list[tuple[str, int]],
    community_values: dict[str, float],
) -> tuple[float, int]:
    """Mean (referee vote - community rating) over papers that have both.

    Report-only quality signal; no penalty is attached to it.
    """
    diffs = [
        vote - community_values[paper_id]
        for paper_id, vote in referee_votes
        if paper_id in community_values
    ]
    if not diffs:
        return 0.0, 0
    return sum(diffs) / len(diffs), len(diffs)


def points_award(
    on_time: bool,
    has_active_bias_flag: bool,
    late_exclusions_trailing_year: int,
    points_per_review: int = 10,
) -> tuple[int, str]:
    """Points earned for one refereeing job, with the withholding rules."""
    if not on_time:
        return 0, "late"
    if has_active_bias_flag:
        return 0, "withheld:bias_flag"
    if late_exclusions_trailing_year >= 2:
        return 0, "withheld:repeated_delays"
    return points_per_review, "on_time_review"


def trailing_year_count(timestamps: list[datetime], now: datetime) -> int:
    cutoff_days = 365
    return sum(1 for t in timestamps if 0 <= (now - t).days < cutoff_days)
