"""Rating aggregation: trimmed means, initial/referee/community aggregates,
red-flag trend detection, visibility scoring and portal placement.

All functions here are pure; admission control (duplicate raters, vote
windows) happens in the workflow engine before values reach this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import (
    ConfigInvalid,
    DuplicateRater,
    EmptyInput,
    InsufficientVotes,
    TooFewReports,
    VoidComment,
)
from .domain import RatingEvent


@dataclass(frozen=True)
class TrimSpec:
    """Symmetric tail-trim fraction applied before averaging (default 20%)."""

    fraction: float = 0.20

    def __post_init__(self):
        if not (0.0 <= self.fraction <= 0.4):
            raise ConfigInvalid(f"trim fraction {self.fraction} outside [0, 0.4]")

    def drop_count(self, n: int) -> int:
        return math.floor(self.fraction * n)


@dataclass
class AggregateRating:
    value: float
    sample_count: int
    trimmed_count: int = 0

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "sample_count": self.sample_count,
            "trimmed_count": self.trimmed_count,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AggregateRating":
        return cls(value=d["value"], sample_count=d["sample_count"], trimmed_count=d["trimmed_count"])


@dataclass
class InitialRatings:
    """Pre-review ratings; purged once referees are selected."""

    iar: int | None = None
    icr: AggregateRating | None = None
    ir: float | None = None
    low_confidence: bool = False
    purged: bool = False

    def purge(self) -> None:
        self.iar = None
        self.icr = None
        self.ir = None
        self.purged = True

    def to_dict(self) -> dict:
        return {
            "iar": self.iar,
            "icr": self.icr.to_dict() if self.icr else None,
            "ir": self.ir,
            "low_confidence": self.low_confidence,
            "purged": self.purged,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "InitialRatings":
        return cls(
            iar=d["iar"],
            icr=AggregateRating.from_dict(d["icr"]) if d["icr"] else None,
            ir=d["ir"],
            low_confidence=d["low_confidence"],
            purged=d["purged"],
        )


def trimmed_mean(values, spec: TrimSpec = TrimSpec()) -> float:
    """Mean after dropping the k = floor(fraction*n) smallest and largest.

    Ties are broken by position in the sorted order, so the result is a pure
    function of the value multiset.
    """
    data = sorted(values)
    n = len(data)
    if n == 0:
        raise EmptyInput("trimmed_mean of empty input")
    k = spec.drop_count(n)
    kept = data[k : n - k]
    return sum(kept) / len(kept)


def aggregate(values, spec: TrimSpec = TrimSpec()) -> AggregateRating:
    n = len(values)
    return AggregateRating(
        value=trimmed_mean(values, spec),
        sample_count=n,
        trimmed_count=2 * spec.drop_count(n),
    )


def compute_icr(values, spec: TrimSpec = TrimSpec(), minimum: int = 3) -> AggregateRating:
    """Initial community rating from editorial-period votes."""
    if len(values) < minimum:
        raise InsufficientVotes(f"need {minimum} editorial votes, have {len(values)}")
    return aggregate(values, spec)


def compute_ir(iar: int, icr: AggregateRating) -> float:
    """Initial rating: plain average of the author self-rating and the ICR."""
    return (iar + icr.value) / 2


def compute_rr(ratings) -> AggregateRating:
    """Referee rating from on-time report votes.

    With four or more reports, exactly one minimum and one maximum are
    dropped (with four reports that is the mean of the two middle ratings);
    with three, the plain mean is used.
    """
    data = sorted(ratings)
    n = len(data)
    if n < 3:
        raise TooFewReports(f"need 3 on-time reports, have {n}")
    if n >= 4:
        kept = data[1 : n - 1]
        return AggregateRating(value=sum(kept) / len(kept), sample_count=n, trimmed_count=2)
    return AggregateRating(value=sum(data) / n, sample_count=n, trimmed_count=0)


def update_cr(existing: list[RatingEvent], new_event: RatingEvent, spec: TrimSpec = TrimSpec()) -> AggregateRating:
    """Recompute the community rating after admitting one more vote.

    The aggregate is a pure function of the vote multiset, so arrival order
    never matters. Raises on duplicate raters and void comments; zero votes
    are legal here and only here.
    """
    if any(e.rater_id == new_event.rater_id for e in existing):
        raise DuplicateRater(f"{new_event.rater_id} already rated {new_event.paper_id}")
    if not collapse_whitespace(new_event.comment):
        raise VoidComment("community votes require a non-void comment")
    values = [e.value for e in existing] + [new_event.value]
    return aggregate(values, spec)


def collapse_whitespace(text: str) -> str:
    return " ".join(text.split())


def detect_red_flag(values_in_time_order, window: int = 10, floor: float = 1.5,
                    spec: TrimSpec = TrimSpec()) -> bool:
    """True when the recent community votes trend below the floor.

    Fires iff at least ``window`` votes exist, the trimmed mean of the most
    recent ``window`` votes sits below ``floor``, and the all-time aggregate
    is still at or above it (the established rating no longer reflects what
    recent readers find).
    """
    if window < 3:
        raise ConfigInvalid("red-flag window must be >= 3")
    votes = list(values_in_time_order)
    if len(votes) < window:
        return False
    recent = trimmed_mean(votes[-window:], spec)
    all_time = trimmed_mean(votes, spec)
    return recent < floor <= all_time


def visibility_score(rr: float, cr: float | None, age_days: float, boost: float = 0.0) -> float:
    """Feed-ordering score: referee and community ratings in equal parts,
    plus any paid boost, minus a slow age decay."""
    community = cr if cr is not None else rr
    return 0.5 * rr + 0.5 * community + boost - 0.01 * age_days


def round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


def portal_level(rating: float) -> int:
    """Map a rating to the portal level (5 = root feed, 1 = deepest branch)."""
    return max(1, min(5, round_half_up(rating)))
