from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from scholarnode.errors import EmptyKeywords, EmptyProfile, UnknownKeyword
from scholarnode.taxonomy import (
    TopicTree,
    expand_ancestors,
    overlap_score,
    parse_path,
)


def test_expand_depth_one_is_identity():
    assert expand_ancestors(("physics",)) == {("physics",)}


def test_expand_enumerates_prefixes():
    assert expand_ancestors(("physics", "cmp", "layered")) == {
        ("physics",),
        ("physics", "cmp"),
        ("physics", "cmp", "layered"),
    }


def test_expand_contains_path_and_root():
    p = ("a", "b", "c", "d")
    out = expand_ancestors(p)
    assert p in out
    assert ("a",) in out
    assert len(out) == len(p)


def test_path_validation():
    with pytest.raises(UnknownKeyword):
        expand_ancestors(())
    with pytest.raises(UnknownKeyword):
        expand_ancestors(tuple("abcdefg"))  # depth 7
    with pytest.raises(UnknownKeyword):
        parse_path("Physics/CMP")  # uppercase


def test_overlap_identical_sets_is_one():
    kws = [("physics", "cmp", "layered"), ("biology",)]
    assert overlap_score(kws, kws) == 1.0


def test_overlap_sibling_branches():
    a = [("physics", "cmp", "layered")]
    b = [("physics", "cmp", "superconductivity")]
    # ancestor sets share {physics, physics/cmp} out of four nodes
    assert overlap_score(a, b) == 0.5


def test_overlap_disjoint_disciplines_is_zero():
    assert overlap_score([("biology",)], [("physics",)]) == 0.0


def test_overlap_rejects_empty_sides():
    with pytest.raises(EmptyProfile):
        overlap_score([], [("physics",)])
    with pytest.raises(EmptyKeywords):
        overlap_score([("physics",)], [])


segments = st.sampled_from(["physics", "cmp", "layered", "bio", "ml", "x"])
paths = st.lists(segments, min_size=1, max_size=4).map(tuple)
keyword_sets = st.lists(paths, min_size=1, max_size=5)


@given(keyword_sets, keyword_sets)
def test_overlap_bounded_and_symmetric(a, b):
    score = overlap_score(a, b)
    assert 0.0 <= score <= 1.0
    assert score == overlap_score(b, a)


@given(keyword_sets)
def test_overlap_one_iff_equal_expansions(a):
    assert overlap_score(a, a) == 1.0


def test_topic_tree_rejects_unsorted():
    with pytest.raises(UnknownKeyword):
        TopicTree.from_lines(["physics/cmp", "biology"])


def test_topic_tree_rejects_duplicates():
    with pytest.raises(UnknownKeyword):
        TopicTree.from_lines(["biology", "biology"])


def test_topic_tree_membership_includes_prefixes():
    tree = TopicTree.from_lines(["physics/cmp/layered"])
    assert tree.contains(("physics",))
    assert tree.contains(("physics", "cmp"))
    assert tree.contains(("physics", "cmp", "layered"))
    assert not tree.contains(("physics", "amo"))


def test_packaged_tree_loads():
    tree = TopicTree.load()
    assert tree.contains(("physics", "cmp", "layered"))
    assert tree.sections_under(()) != []
