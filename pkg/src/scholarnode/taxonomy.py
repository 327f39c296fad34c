"""Hierarchical keyword taxonomy: paths, ancestor expansion, expertise overlap.

A keyword path is an ordered tuple of lowercase segments from discipline root
to leaf, e.g. ``("physics", "cmp", "layered")``. Portals are path prefixes, so
expertise overlap is measured on ancestor-expanded path sets: a vote of
confidence in a branch is also one in the discipline that contains it.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources

from .errors import EmptyKeywords, EmptyProfile, UnknownKeyword

MAX_DEPTH = 6
_SEGMENT_RE = re.compile(r"^[a-z0-9][a-z0-9_-]*$")

KeywordPath = tuple[str, ...]


def parse_path(text: str) -> KeywordPath:
    """Parse a slash-joined path string into a validated KeywordPath."""
    segments = tuple(s for s in text.strip().split("/") if s != "")
    validate_path(segments)
    return segments


def format_path(path: KeywordPath) -> str:
    return "/".join(path)


def validate_path(path: KeywordPath) -> None:
    if not path:
        raise UnknownKeyword("keyword path must have at least one segment")
    if len(path) > MAX_DEPTH:
        raise UnknownKeyword(f"keyword path deeper than {MAX_DEPTH}: {'/'.join(path)}")
    for seg in path:
        if not _SEGMENT_RE.match(seg):
            raise UnknownKeyword(f"invalid path segment: {seg!r}")


def expand_ancestors(path: KeywordPath) -> set[KeywordPath]:
    """All prefixes of ``path``, including the path itself."""
    validate_path(path)
    return {path[:i] for i in range(1, len(path) + 1)}


def expand_all(paths) -> set[KeywordPath]:
    out: set[KeywordPath] = set()
    for p in paths:
        out |= expand_ancestors(tuple(p))
    return out


def overlap_score(profile_keywords, manuscript_keywords) -> float:
    """Jaccard index of the ancestor-expanded keyword sets, in [0, 1]."""
    if not profile_keywords:
        raise EmptyProfile("profile has no keywords")
    if not manuscript_keywords:
        raise EmptyKeywords("manuscript has no keywords")
    a = expand_all(profile_keywords)
    b = expand_all(manuscript_keywords)
    return len(a & b) / len(a | b)


@dataclass(frozen=True)
class TopicTree:
    """The node's configured topic taxonomy.

    Loaded from a UTF-8 text file, one path per line, segments joined by "/",
    lines sorted, duplicates rejected. Every prefix of a listed path is a
    valid portal section.
    """

    nodes: frozenset[KeywordPath]

    @classmethod
    def from_lines(cls, lines) -> "TopicTree":
        cleaned = [ln.strip() for ln in lines if ln.strip() and not ln.startswith("#")]
        if cleaned != sorted(cleaned):
            raise UnknownKeyword("topic tree file must be sorted")
        if len(set(cleaned)) != len(cleaned):
            dupes = sorted({ln for ln in cleaned if cleaned.count(ln) > 1})
            raise UnknownKeyword(f"duplicate topic lines: {dupes}")
        nodes: set[KeywordPath] = set()
        for line in cleaned:
            nodes |= expand_ancestors(parse_path(line))
        return cls(nodes=frozenset(nodes))

    @classmethod
    def load(cls, path: str | None = None) -> "TopicTree":
        if path is None:
            text = resources.files("scholarnode.data").joinpath("topics.txt").read_text("utf-8")
        else:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        return cls.from_lines(text.splitlines())

    def contains(self, path: KeywordPath) -> bool:
        return tuple(path) in self.nodes

    def require(self, path: KeywordPath) -> KeywordPath:
        p = tuple(path)
        if p not in self.nodes:
            raise UnknownKeyword(f"keyword not in topic tree: {format_path(p)}")
        return p

    def sections_under(self, prefix: KeywordPath) -> list[KeywordPath]:
        """Immediate child sections of a portal prefix ('' prefix = disciplines)."""
        depth = len(prefix)
        kids = {n for n in self.nodes if len(n) == depth + 1 and n[:depth] == tuple(prefix)}
        return sorted(kids)
