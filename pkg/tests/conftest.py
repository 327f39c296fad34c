from __future__ import annotations

from datetime import datetime, timedelta, timezone

import pytest

from scholarnode.config import NodeConfig
from scholarnode.engine import Node

T0 = datetime(2026, 1, 5, tzinfo=timezone.utc)


def day(n: float) -> datetime:
    return T0 + timedelta(days=n)


@pytest.fixture
def node() -> Node:
    return Node(NodeConfig(node_id="tum", allowed_email_domains=("uni.example", "lab.example")))


def register_users(node: Node, *, referees: int = 8, voters: int = 4,
                   keywords: str = "physics/cmp/layered") -> dict:
    """Standard population: one author, bibliometrically strong referees,
    eligible editorial voters. Everyone at distinct institutions."""
    author = node.register_user(
        "author@uni.example", [keywords], display_name="Author", institution="inst-a", now=T0
    )
    referee_ids = []
    for i in range(referees):
        u = node.register_user(
            f"referee{i}@uni.example", [keywords], institution=f"inst-r{i}",
            prior_papers={f"prev-{i}-{j}": (5.0 if j % 2 == 0 else 3.0) for j in range(12)},
            now=T0,
        )
        referee_ids.append(u.user_id)
    voter_ids = []
    for i in range(voters):
        u = node.register_user(
            f"voter{i}@uni.example", [keywords], institution=f"inst-v{i}", now=T0
        )
        voter_ids.append(u.user_id)
    return {"author": author.user_id, "referees": referee_ids, "voters": voter_ids}


def submit_and_review(node: Node, people: dict, *, iar: int = 4, votes=(3, 4, 5),
                      ratings=(2, 3, 4, 5), verdicts=None, flaws=None,
                      title: str = "Layered magnetism") -> str:
    """Drive one manuscript to a decision: editorial votes, close, referee
    reports from the first len(ratings) invitees. Returns the paper id."""
    record = node.submit_manuscript(
        people["author"], title, f"body of {title}".encode(),
        ["physics/cmp/layered"], iar=iar, now=T0,
    )
    for uid, value in zip(people["voters"], votes):
        node.cast_initial_rating(uid, record.paper_id, value, now=day(1))
    node.tick(day(7))
    assignment = node.state.manuscripts[record.paper_id].assignment
    assert assignment is not None, "no referees invited"
    invited = [i.referee_id for i in assignment.invitations]
    for rid in invited:
        node.accept_invitation(rid, record.paper_id, 14, now=day(8))
    verdicts = verdicts or ["Accept"] * len(ratings)
    flaws = flaws or [False] * len(ratings)
    for offset, (rid, rating, verdict, flaw) in enumerate(
        zip(invited, ratings, verdicts, flaws)
    ):
        node.record_referee_report(
            rid, record.paper_id, verdict, rating,
            structural_flaw=flaw, now=day(10 + offset),
        )
    return record.paper_id
