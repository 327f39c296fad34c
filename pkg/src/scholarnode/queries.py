"""Read-side views over the projected state.

These functions decide what each audience may see; the HTTP layer serializes
their output verbatim. Initial ratings never leave this module once a
manuscript has moved past its editorial period.
"""

from __future__ import annotations

from datetime import datetime

from .canonical import canonical_json, iso
from .domain import UserAccount
from .errors import UnknownPaper
from .federation import FederationLog
from .incentives import referee_divergence
from .state import LifecycleState, ManuscriptRecord, PortalState


def paper_view(state: PortalState, federation: FederationLog, paper_id: str,
               viewer: str | None, now: datetime, conceal_editorial_authors: bool = True) -> dict:
    """Public (or author's) view of one paper, local or replicated."""
    record = state.manuscripts.get(paper_id)
    if record is None:
        entry = federation.entry_for_paper(paper_id)
        if entry is None:
            raise UnknownPaper(f"no paper {paper_id!r}")
        return {
            "paper_id": paper_id,
            "state": "Published",
            "origin_node": entry.origin_node,
            "doi": entry.doi,
            "title": entry.metadata["title"],
            "authors": entry.metadata["authors"],
            "keywords": entry.metadata["keywords"],
            "rr": entry.metadata["rr"],
            "cr": None,
            "published_at": entry.metadata["published_at"],
            "reviews": [],
            "red_flagged": False,
            "remote": True,
        }
    return _local_paper_view(state, record, viewer, now, conceal_editorial_authors)


def _local_paper_view(state: PortalState, record: ManuscriptRecord, viewer: str | None,
                      now: datetime, conceal_editorial_authors: bool) -> dict:
    is_author = viewer is not None and record.is_author(viewer)
    view: dict = {
        "paper_id": record.paper_id,
        "state": record.state.value,
        "title": record.title,
        "keywords": sorted("/".join(k) for k in record.keywords),
        "submitted_at": iso(record.submitted_at),
        "remote": False,
    }
    if record.state is LifecycleState.EDITORIAL_PERIOD:
        # the one phase where the self-assessed rating is public
        view["iar"] = record.initial.iar
        view["editorial_deadline"] = iso(record.editorial_deadline)
        view["authors"] = list(record.authors) if (is_author or not conceal_editorial_authors) else None
        return view
    if record.state in (LifecycleState.AWAITING_ASSIGNMENT, LifecycleState.UNDER_REVIEW,
                        LifecycleState.REVISION):
        if not is_author:
            raise UnknownPaper(f"no paper {record.paper_id!r}")
        view["authors"] = list(record.authors)
        view["revision_round"] = record.revision_round
        return view
    if record.state is LifecycleState.REJECTED:
        if not is_author:
            raise UnknownPaper(f"no paper {record.paper_id!r}")
        view["authors"] = list(record.authors)
        view["decision"] = "Rejected"
        return view
    # published: names and affiliations appear in full
    view["authors"] = [
        state.users[a].display_name if a in state.users else a for a in record.authors
    ]
    view["doi"] = record.doi
    view["published_at"] = iso(record.published_at)
    view["rr"] = record.rr.value if record.rr else None
    view["cr"] = record.cr.value if record.cr else None
    view["cr_count"] = len(record.community_reviews)
    view["red_flagged"] = record.red_flagged
    view["boost"] = state.boost_for(record.paper_id, now)
    view["reviews"] = [
        {
            "rater": (state.users[e.rater_id].display_name
                      if e.public_name and e.rater_id in state.users else None),
            "value": e.value,
            "comment": e.comment,
            "at": iso(e.at),
        }
        for e in record.community_reviews
    ]
    return view


def ratings_history(state: PortalState, paper_id: str) -> dict:
    record = state.manuscripts.get(paper_id)
    if record is None or record.state is not LifecycleState.PUBLISHED:
        raise UnknownPaper(f"no published paper {paper_id!r}")
    series = []
    votes: list[int] = []
    for e in sorted(record.community_reviews, key=lambda e: (e.at, e.rater_id)):
        votes.append(e.value)
        series.append({"at": iso(e.at), "value": e.value})
    return {
        "paper_id": paper_id,
        "rr": record.rr.value if record.rr else None,
        "cr": record.cr.value if record.cr else None,
        "votes": series,
        "red_flagged": record.red_flagged,
    }


def account_view(state: PortalState, account: UserAccount, now: datetime) -> dict:
    year = now.year
    ledger = state.ledger_for(account.user_id)
    return {
        "user_id": account.user_id,
        "display_name": account.display_name,
        "institution": account.institution,
        "keywords": account.profile.to_dict()["keywords"],
        "verified": account.verified,
        "quota": {
            "year": year,
            "limit": account.effective_quota(year),
            "used": account.uploads_used(year),
        },
        "cooldown_until": iso(account.cooldown_until) if account.cooldown_until else None,
        "iar_cap": account.iar_cap,
        "reward_points": ledger.balance,
        "published_papers": len(account.published_papers),
    }


def invitations_for(state: PortalState, referee_id: str) -> list[dict]:
    out = []
    for pid in sorted(state.manuscripts):
        record = state.manuscripts[pid]
        if record.assignment is None:
            continue
        inv = record.assignment.invitation_for(referee_id)
        if inv is None:
            continue
        out.append(
            {
                "paper_id": pid,
                "title": record.title,
                "authors": None if record.anonymous_review else list(record.authors),
                "keywords": sorted("/".join(k) for k in record.keywords),
                "status": inv.status,
                "round": record.assignment.round,
                "invited_at": iso(inv.invited_at),
                "declared_deadline": iso(inv.declared_deadline) if inv.declared_deadline else None,
                "paper_state": record.state.value,
            }
        )
    return out


def ledger_view(state: PortalState, user_id: str) -> dict:
    ledger = state.ledger_for(user_id)
    return {
        "user_id": user_id,
        "balance": ledger.balance,
        "entries": [e.to_dict() for e in ledger.entries],
    }


def integrity_flags_ndjson(state: PortalState, now: datetime) -> str:
    """Operator export: newline-delimited flag records, including the
    report-only referee divergence analysis."""
    lines = []
    for f in state.flags:
        lines.append(canonical_json(
            {
                "record": "flag",
                "kind": f.kind,
                "subject": f.subject,
                "related": f.related or None,
                "mean": f.mean,
                "sample_count": f.sample_count,
                "raised_at": iso(f.raised_at),
                "active": f.active,
                "cleared_at": iso(f.cleared_at) if f.cleared_at else None,
            }
        ))
    community = {
        pid: m.cr.value
        for pid, m in state.manuscripts.items()
        if m.cr is not None and m.state is LifecycleState.PUBLISHED
    }
    referees: dict[str, list[tuple[str, int]]] = {}
    for pid, m in state.manuscripts.items():
        if m.assignment is None:
            continue
        for report in m.assignment.reports:
            if report.on_time:
                referees.setdefault(report.referee_id, []).append((pid, report.rating))
    for rid in sorted(referees):
        mean, count = referee_divergence(referees[rid], community)
        if count == 0:
            continue
        lines.append(canonical_json(
            {
                "record": "referee_divergence",
                "kind": "referee_divergence",
                "subject": rid,
                "mean": mean,
                "sample_count": count,
                "as_of": iso(now),
            }
        ))
    return "\n".join(lines) + ("\n" if lines else "")
