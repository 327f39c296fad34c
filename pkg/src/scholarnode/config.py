"""Node configuration, loadable from environment variables."""

from __future__ import annotations

import os
from dataclasses import dataclass, field


@dataclass(frozen=True)
class NodeConfig:
    node_id: str = "local"
    peers: tuple[str, ...] = ()          # peer base URLs for pull sync
    data_dir: str | None = None          # None = in-memory only
    secret: str = "dev-secret"           # session token signing key

    # submission gating
    quota_per_year: int = 5
    editorial_days: float = 7  # fractional days allowed (live integration runs)
    cooldown_days: int = 90

    # rating aggregation
    trim_fraction: float = 0.20
    min_icr_votes: int = 3
    red_flag_window: int = 10
    red_flag_floor: float = 1.5

    # referee assignment
    min_referees: int = 4                # invitations sent = min_referees + 1
    referee_overlap_floor: float = 0.5
    suggestion_weight: float = 2.0
    min_deadline_days: int = 14
    max_deadline_days: int = 28
    invite_response_days: int = 7
    max_revision_rounds: int = 2
    quorum_floor: int = 3                # on-time reports needed at deadline

    # integrity analytics
    discrepancy_delta: float = 1.0       # mean IAR-ICR gap that flags an author
    discrepancy_window: int = 5
    bias_delta: float = 1.5              # mean leave-one-out deviation that flags a rater
    bias_window: int = 5

    # rewards
    points_per_review: int = 10
    price_visibility_boost: int = 50
    price_quota_extension: int = 100
    price_cooldown_reduction: int = 100
    boost_amount: float = 0.5
    boost_days: int = 30
    cooldown_reduction_days: int = 30

    # identity
    allowed_email_domains: tuple[str, ...] = ()
    operator_key: str = "operator-dev-key"
    session_hours: int = 24

    # misc
    seed: int = 0                        # referee-selection seed material
    sync_interval_seconds: float = 60.0
    snapshot_every: int = 10_000
    feed_page_size: int = 20
    topics_file: str | None = None       # None = packaged default tree
    rules_file: str | None = None        # None = packaged default eligibility rules


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    return int(raw) if raw else default


def _env_float(name: str, default: float) -> float:
    raw = os.environ.get(name)
    return float(raw) if raw else default


def load_config(env: dict[str, str] | None = None) -> NodeConfig:
    """Build a NodeConfig from environment variables (NODE_ID, PEERS, ...)."""
    e = env if env is not None else dict(os.environ)

    def get(name: str, default):
        return e.get(name, default)

    peers = tuple(p.strip() for p in get("PEERS", "").split(",") if p.strip())
    domains = tuple(d.strip().lower() for d in get("ALLOWED_EMAIL_DOMAINS", "").split(",") if d.strip())
    return NodeConfig(
        node_id=get("NODE_ID", "local"),
        peers=peers,
        data_dir=get("DATA_DIR", None) or None,
        secret=get("NODE_SECRET", "dev-secret"),
        quota_per_year=int(get("QUOTA_PER_YEAR", 5)),
        editorial_days=float(get("EDITORIAL_DAYS", 7)),
        cooldown_days=int(get("COOLDOWN_DAYS", 90)),
        trim_fraction=float(get("TRIM_FRACTION", 0.20)),
        min_referees=int(get("MIN_REFEREES", 4)),
        allowed_email_domains=domains,
        operator_key=get("OPERATOR_KEY", "operator-dev-key"),
        topics_file=get("TOPICS_FILE", None) or None,
        rules_file=get("RULES_FILE", None) or None,
        seed=int(get("NODE_SEED", 0)),
    )
