"""Portal section feeds over the replicated publication set.

A paper's rating decides the shallowest feed it reaches: level 5 papers sit
on the root portal, level 4 on discipline feeds, and so on down to the
deepest branches. A paper stays visible in sections deeper than its home
level whenever its keywords match, so specialized feeds still carry the big
results of their field. Ordering is by visibility score with deterministic
tie-breaks, and cursors pin the evaluation clock so pages stay stable while
new papers land.
"""

from __future__ import annotations

import base64
import binascii
import json
from datetime import datetime

from .canonical import iso, parse_ts
from .errors import UnknownSection
from .federation import PublicationLogEntry
from .ratings import portal_level, visibility_score
from .state import LifecycleState, PortalState
from .taxonomy import KeywordPath, TopicTree, parse_path


def home_depth(level: int) -> int:
    """Shallowest section depth (segment count) a portal level reaches;
    level 5 = 0 (the root feed)."""
    return 5 - level


def admitted_at(entry_keywords: list[str], level: int, section: KeywordPath) -> bool:
    depth = len(section)
    if depth < home_depth(level):
        return False
    if depth == 0:
        return True
    prefix = "/".join(section)
    return any(k == prefix or k.startswith(prefix + "/") for k in entry_keywords)


def encode_cursor(as_of: datetime, score: float, published_at: str, paper_id: str) -> str:
    raw = json.dumps([iso(as_of), score, published_at, paper_id]).encode("utf-8")
    return base64.urlsafe_b64encode(raw).decode("ascii")


def decode_cursor(cursor: str) -> tuple[datetime, float, str, str]:
    try:
        as_of, score, published_at, paper_id = json.loads(base64.urlsafe_b64decode(cursor.encode("ascii")))
        return parse_ts(as_of), float(score), published_at, paper_id
    except (ValueError, binascii.Error) as exc:
        raise UnknownSection(f"bad cursor: {exc}") from exc


def section_feed(
    topics: TopicTree,
    state: PortalState,
    entries: list[PublicationLogEntry],
    path: str,
    now: datetime,
    cursor: str | None = None,
    page_size: int = 20,
) -> dict:
    """One page of a section feed, most visible first.

    ``entries`` is the federation-wide publication set; community ratings and
    boosts only exist for papers this node published itself.
    """
    section: KeywordPath = parse_path(path) if path else ()
    if section and not topics.contains(section):
        raise UnknownSection(f"no section {path!r}")

    as_of = now
    if cursor:
        as_of, c_score, c_published, c_paper = decode_cursor(cursor)

    scored = []
    for entry in entries:
        meta = entry.metadata
        record = state.manuscripts.get(entry.paper_id)
        cr = None
        if record is not None and record.state is LifecycleState.PUBLISHED and record.cr is not None:
            cr = record.cr.value
        rating = cr if cr is not None else meta["rr"]
        level = portal_level(rating)
        if not admitted_at(meta["keywords"], level, section):
            continue
        age_days = (as_of - parse_ts(meta["published_at"])).total_seconds() / 86400.0
        boost = state.boost_for(entry.paper_id, as_of)
        score = visibility_score(meta["rr"], cr, age_days, boost)
        scored.append((score, meta["published_at"], entry.paper_id, entry, cr, level))

    # descending score, later publication first, then paper id for totality
    scored.sort(key=lambda t: (-t[0], _desc_str(t[1]), t[2]))

    if cursor:
        key = (-c_score, _desc_str(c_published), c_paper)
        scored = [t for t in scored if (-t[0], _desc_str(t[1]), t[2]) > key]

    page = scored[:page_size]
    papers = []
    for score, published_at, paper_id, entry, cr, level in page:
        record = state.manuscripts.get(paper_id)
        papers.append(
            {
                "paper_id": paper_id,
                "doi": entry.doi,
                "origin_node": entry.origin_node,
                "title": entry.metadata["title"],
                "authors": entry.metadata["authors"],
                "keywords": entry.metadata["keywords"],
                "rr": entry.metadata["rr"],
                "cr": cr,
                "cr_count": len(record.community_reviews) if record is not None else 0,
                "portal_level": level,
                "score": score,
                "published_at": published_at,
                "red_flagged": bool(record.red_flagged) if record is not None else False,
            }
        )
    next_cursor = None
    if len(scored) > page_size:
        last = page[-1]
        next_cursor = encode_cursor(as_of, last[0], last[1], last[2])
    return {"section": path, "papers": papers, "next_cursor": next_cursor, "as_of": iso(as_of)}


def _desc_str(s: str) -> tuple:
    """Sort helper: a key that orders strings descending inside an ascending sort."""
    return tuple(-ord(c) for c in s)


def new_submissions(state: PortalState, section: str, now: datetime,
                    conceal_authors: bool = True) -> list[dict]:
    """The new-submissions listing: manuscripts in their editorial window."""
    out = []
    for pid in sorted(state.manuscripts):
        m = state.manuscripts[pid]
        if m.state is not LifecycleState.EDITORIAL_PERIOD:
            continue
        keywords = ["/".join(k) for k in m.keywords]
        if section:
            if not any(k == section or k.startswith(section + "/") for k in keywords):
                continue
        out.append(
            {
                "paper_id": pid,
                "title": m.title,
                "keywords": sorted(keywords),
                "iar": m.initial.iar,
                "authors": None if conceal_authors else list(m.authors),
                "submitted_at": iso(m.submitted_at),
                "editorial_deadline": iso(m.editorial_deadline),
                "votes_cast": len(m.initial_votes),
            }
        )
    out.sort(key=lambda d: (d["editorial_deadline"], d["paper_id"]))
    return out
