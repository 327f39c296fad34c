from __future__ import annotations

from datetime import timedelta

import pytest

from scholarnode.config import NodeConfig
from scholarnode.engine import Node, editorial_overlap_threshold
from scholarnode.errors import (
    AlreadyReported,
    AuthorSelfVote,
    CooldownActive,
    DuplicateVote,
    IarCapViolated,
    InsufficientPoints,
    InvalidDeadline,
    NoActiveCooldown,
    NotAssigned,
    NotEligible,
    QuotaExceeded,
    UnknownPaper,
    VoidComment,
    WindowClosed,
)
from scholarnode.state import PERMITTED_EDGES, LifecycleState

from conftest import T0, day, register_users, submit_and_review

LONG_COMMENT = (
    "This result replicates in our group with the published protocol and the "
    "error analysis is appropriately conservative, though section four would "
    "benefit from a tighter derivation of the bound and a cleaner figure."
)


class TestSubmissionGating:
    def test_quota_sixth_upload_fails(self, node):
        people = register_users(node)
        for i in range(5):
            node.submit_manuscript(people["author"], f"m{i}", b"x", ["physics/cmp"], 3, now=day(i))
        with pytest.raises(QuotaExceeded):
            node.submit_manuscript(people["author"], "m5", b"x", ["physics/cmp"], 3, now=day(5))

    def test_quota_resets_next_calendar_year(self, node):
        people = register_users(node)
        for i in range(5):
            node.submit_manuscript(people["author"], f"m{i}", b"x", ["physics/cmp"], 3, now=day(i))
        next_year = day(365)
        assert next_year.year == T0.year + 1
        node.submit_manuscript(people["author"], "m-ny", b"x", ["physics/cmp"], 3, now=next_year)

    def test_coauthor_cooldown_blocks(self, node):
        people = register_users(node)
        blocked = people["voters"][0]
        node.state.users[blocked].cooldown_until = day(30)  # direct setup
        with pytest.raises(CooldownActive):
            node.submit_manuscript(
                people["author"], "m", b"x", ["physics/cmp"], 3,
                co_authors=[blocked], now=day(1),
            )

    def test_iar_cap_enforced(self, node):
        people = register_users(node)
        node.state.users[people["author"]].iar_cap = 3
        with pytest.raises(IarCapViolated):
            node.submit_manuscript(people["author"], "m", b"x", ["physics/cmp"], 4, now=day(0))
        node.submit_manuscript(people["author"], "m", b"x", ["physics/cmp"], 3, now=day(0))

    def test_submission_opens_editorial_period(self, node):
        people = register_users(node)
        record = node.submit_manuscript(
            people["author"], "m", b"x", ["physics/cmp/layered"], 4, now=T0
        )
        assert record.state is LifecycleState.EDITORIAL_PERIOD
        assert record.editorial_deadline == T0 + timedelta(days=7)


class TestEditorialPhase:
    def test_threshold_endpoints(self):
        assert editorial_overlap_threshold(5) == pytest.approx(0.2)
        assert editorial_overlap_threshold(1) == pytest.approx(0.6)

    def test_author_self_vote_rejected(self, node):
        people = register_users(node)
        pid = node.submit_manuscript(people["author"], "m", b"x", ["physics/cmp"], 3, now=T0).paper_id
        with pytest.raises(AuthorSelfVote):
            node.cast_initial_rating(people["author"], pid, 4, now=day(1))

    def test_duplicate_vote_rejected(self, node):
        people = register_users(node)
        pid = node.submit_manuscript(people["author"], "m", b"x", ["physics/cmp/layered"], 3, now=T0).paper_id
        node.cast_initial_rating(people["voters"][0], pid, 4, now=day(1))
        with pytest.raises(DuplicateVote):
            node.cast_initial_rating(people["voters"][0], pid, 5, now=day(2))

    def test_window_closes_at_deadline(self, node):
        people = register_users(node)
        pid = node.submit_manuscript(people["author"], "m", b"x", ["physics/cmp/layered"], 3, now=T0).paper_id
        with pytest.raises(WindowClosed):
            node.cast_initial_rating(people["voters"][0], pid, 4, now=day(7))

    def test_low_overlap_voter_rejected(self, node):
        people = register_users(node)
        outsider = node.register_user(
            "far@uni.example", ["biology/genetics/genomics"], institution="inst-o", now=T0
        )
        # IAR 1 demands overlap 0.6; a different discipline scores 0.0
        pid = node.submit_manuscript(people["author"], "m", b"x", ["physics/cmp/layered"], 1, now=T0).paper_id
        with pytest.raises(NotEligible):
            node.cast_initial_rating(outsider.user_id, pid, 3, now=day(1))

    def test_high_iar_widens_audience(self, node):
        people = register_users(node)
        neighbour = node.register_user(
            "near@uni.example", ["physics/amo/quantum-optics"], institution="inst-n", now=T0
        )
        # overlap(physics/amo/* vs physics/cmp/layered) = 1/5 = 0.2
        pid5 = node.submit_manuscript(people["author"], "m5", b"x", ["physics/cmp/layered"], 5, now=T0).paper_id
        node.cast_initial_rating(neighbour.user_id, pid5, 4, now=day(1))
        pid3 = node.submit_manuscript(people["author"], "m3", b"x", ["physics/cmp/layered"], 3, now=T0).paper_id
        with pytest.raises(NotEligible):
            node.cast_initial_rating(neighbour.user_id, pid3, 4, now=day(1))


class TestEditorialClose:
    def test_icr_ir_and_rule_composition(self, node):
        people = register_users(node)
        pid = node.submit_manuscript(people["author"], "m", b"x", ["physics/cmp/layered"], 4, now=T0).paper_id
        for uid, v in zip(people["voters"], (2, 3, 4)):
            node.cast_initial_rating(uid, pid, v, now=day(1))
        node.tick(day(7))
        closed = [e for e in node.store.events() if e.kind == "EditorialClosed"][0]
        assert closed.payload["icr"]["value"] == 3.0
        assert closed.payload["ir"] == 3.5  # (4 + 3.0) / 2
        assert closed.payload["rule"]["min_total_papers"] == 8  # band (3,4]

    def test_no_votes_falls_back_to_iar(self, node):
        people = register_users(node)
        pid = node.submit_manuscript(people["author"], "m", b"x", ["physics/cmp/layered"], 4, now=T0).paper_id
        node.tick(day(7))
        closed = [e for e in node.store.events() if e.kind == "EditorialClosed"][0]
        assert closed.payload["low_confidence"] is True
        assert closed.payload["ir"] == 4.0

    def test_initial_ratings_purged_after_close(self, node):
        people = register_users(node)
        pid = node.submit_manuscript(people["author"], "m", b"x", ["physics/cmp/layered"], 4, now=T0).paper_id
        for uid, v in zip(people["voters"], (2, 3, 4)):
            node.cast_initial_rating(uid, pid, v, now=day(1))
        node.tick(day(7))
        record = node.state.manuscripts[pid]
        assert record.initial.purged
        assert record.initial.iar is None
        assert record.initial.icr is None
        assert record.initial.ir is None


class TestRefereeFlow:
    def test_deadline_boundary_is_on_time(self, node):
        people = register_users(node)
        pid = node.submit_manuscript(people["author"], "m", b"x", ["physics/cmp/layered"], 4, now=T0).paper_id
        for uid, v in zip(people["voters"], (3, 4, 5)):
            node.cast_initial_rating(uid, pid, v, now=day(1))
        node.tick(day(7))
        assignment = node.state.manuscripts[pid].assignment
        rid = assignment.invitations[0].referee_id
        node.accept_invitation(rid, pid, 14, now=day(8))
        node.record_referee_report(rid, pid, "Accept", 4, now=day(22))  # exactly at deadline
        report = assignment.reports[0]
        assert report.on_time

    def test_deadline_bounds_validated(self, node):
        people = register_users(node)
        pid = submit_paper_to_review(node, people)
        assignment = node.state.manuscripts[pid].assignment
        rid = assignment.invitations[0].referee_id
        with pytest.raises(InvalidDeadline):
            node.accept_invitation(rid, pid, 13, now=day(8))
        with pytest.raises(InvalidDeadline):
            node.accept_invitation(rid, pid, 29, now=day(8))

    def test_uninvited_referee_rejected(self, node):
        people = register_users(node)
        pid = submit_paper_to_review(node, people)
        invited = {i.referee_id for i in node.state.manuscripts[pid].assignment.invitations}
        outsider = next(r for r in people["referees"] if r not in invited)
        with pytest.raises(NotAssigned):
            node.record_referee_report(outsider, pid, "Accept", 4, now=day(9))

    def test_duplicate_report_rejected(self, node):
        people = register_users(node)
        pid = submit_paper_to_review(node, people)
        rid = node.state.manuscripts[pid].assignment.invitations[0].referee_id
        node.accept_invitation(rid, pid, 14, now=day(8))
        node.record_referee_report(rid, pid, "Accept", 4, now=day(9))
        with pytest.raises(AlreadyReported):
            node.record_referee_report(rid, pid, "Accept", 5, now=day(10))

    def test_late_report_after_quorum_is_excluded_and_ignored(self, node):
        people = register_users(node)
        pid = submit_and_review(node, people, ratings=(2, 3, 4, 5))
        record = node.state.manuscripts[pid]
        assert record.state is LifecycleState.PUBLISHED
        assert record.rr.value == 3.5
        late = record.assignment.invitations[4]
        assert late.status == "ExcludedLate"
        node.record_referee_report(late.referee_id, pid, "Accept", 5, now=day(15))
        assert record.rr.value == 3.5  # unchanged: late report ignored for RR
        assert not record.assignment.reports[-1].on_time

    def test_decline_triggers_replacement(self, node):
        people = register_users(node)
        pid = submit_paper_to_review(node, people)
        assignment = node.state.manuscripts[pid].assignment
        first = assignment.invitations[0].referee_id
        node.decline_invitation(first, pid, now=day(8))
        active = [i for i in assignment.invitations if i.status != "Declined"]
        assert len(active) == 5  # redundancy restored from the pool


def submit_paper_to_review(node: Node, people: dict) -> str:
    pid = node.submit_manuscript(
        people["author"], "m", b"x", ["physics/cmp/layered"], 4, now=T0
    ).paper_id
    for uid, v in zip(people["voters"], (3, 4, 5)):
        node.cast_initial_rating(uid, pid, v, now=day(1))
    node.tick(day(7))
    return pid


class TestDecisions:
    def test_majority_accept_publishes_with_rr(self, node):
        people = register_users(node)
        pid = submit_and_review(node, people, ratings=(2, 3, 4, 5))
        record = node.state.manuscripts[pid]
        assert record.state is LifecycleState.PUBLISHED
        assert record.rr.value == 3.5
        assert record.doi == "10.9999/tum.1"
        assert node.federation.entry_for_paper(pid) is not None

    def test_majority_reject_with_flaw_sets_cooldowns(self, node):
        people = register_users(node)
        pid = submit_and_review(
            node, people,
            verdicts=("Reject", "Reject", "Reject", "Accept"),
            flaws=(True, False, False, False),
        )
        record = node.state.manuscripts[pid]
        assert record.state is LifecycleState.REJECTED
        author = node.state.users[people["author"]]
        decision_at = record.decision_history[-1].at
        assert author.cooldown_until == decision_at + timedelta(days=90)

    def test_cooldown_boundary_day_89_vs_90(self, node):
        people = register_users(node)
        pid = submit_and_review(
            node, people,
            verdicts=("Reject", "Reject", "Reject", "Accept"),
            flaws=(True, False, False, False),
        )
        decision_at = node.state.manuscripts[pid].decision_history[-1].at
        with pytest.raises(CooldownActive):
            node.submit_manuscript(people["author"], "again", b"x", ["physics/cmp"], 3,
                                   now=decision_at + timedelta(days=89))
        node.submit_manuscript(people["author"], "again", b"x", ["physics/cmp"], 3,
                               now=decision_at + timedelta(days=90))

    def test_reject_without_flaw_no_cooldown(self, node):
        people = register_users(node)
        pid = submit_and_review(
            node, people,
            verdicts=("Reject", "Reject", "Reject", "Accept"),
            flaws=(False, False, False, False),
        )
        assert node.state.manuscripts[pid].state is LifecycleState.REJECTED
        assert node.state.users[people["author"]].cooldown_until is None

    def test_split_panel_goes_to_revision_then_publishes(self, node):
        people = register_users(node)
        pid = submit_and_review(
            node, people,
            verdicts=("Accept", "Accept", "MinorRevision", "Reject"),
        )
        record = node.state.manuscripts[pid]
        assert record.state is LifecycleState.REVISION
        node.submit_revision(people["author"], pid, b"v2", now=day(20))
        assert record.state is LifecycleState.UNDER_REVIEW
        assert record.revision_round == 1
        continuing = [i for i in record.assignment.invitations if i.status == "Accepted"]
        assert len(continuing) == 4  # fresh windows for the on-time panel
        for inv in continuing:
            node.record_referee_report(inv.referee_id, pid, "Accept", 4, now=day(22))
        assert record.state is LifecycleState.PUBLISHED

    def test_forced_decision_after_two_revisions(self, node):
        people = register_users(node)
        pid = submit_and_review(
            node, people,
            verdicts=("Accept", "Accept", "MinorRevision", "Reject"),
        )
        record = node.state.manuscripts[pid]
        split = ("Accept", "Accept", "MinorRevision", "Reject")
        for round_no in (1, 2):
            node.submit_revision(people["author"], pid, b"vN", now=day(18 + round_no * 10))
            continuing = [i for i in record.assignment.invitations if i.status == "Accepted"]
            for inv, verdict in zip(continuing, split):
                node.record_referee_report(inv.referee_id, pid, verdict, 3,
                                           now=day(20 + round_no * 10))
        # two revision rounds exhausted; same split now forces a decision
        assert record.state is LifecycleState.PUBLISHED  # accepts 2 > rejects 1
        final = [e for e in node.store.events() if e.kind == "DecisionFinalized"][-1]
        assert "forced" in final.payload["note"]

    def test_rejected_paper_refuses_community_review(self, node):
        people = register_users(node)
        pid = submit_and_review(
            node, people, verdicts=("Reject", "Reject", "Reject", "Reject"),
        )
        outsider = people["voters"][0]
        from scholarnode.errors import InvalidState
        with pytest.raises(InvalidState):
            node.submit_community_review(outsider, pid, 3, LONG_COMMENT, now=day(30))


class TestCommunityReview:
    def _published(self, node):
        people = register_users(node)
        pid = submit_and_review(node, people, ratings=(4, 4, 4, 4))
        return people, pid

    def test_short_comment_rejected(self, node):
        people, pid = self._published(node)
        with pytest.raises(VoidComment):
            node.submit_community_review(people["voters"][0], pid, 4, "fine", now=day(20))

    def test_zero_vote_with_comment_accepted(self, node):
        people, pid = self._published(node)
        node.submit_community_review(people["voters"][0], pid, 0, LONG_COMMENT, now=day(20))
        assert node.state.manuscripts[pid].cr.value == 0.0

    def test_author_self_review_rejected(self, node):
        people, pid = self._published(node)
        with pytest.raises(AuthorSelfVote):
            node.submit_community_review(people["author"], pid, 5, LONG_COMMENT, now=day(20))

    def test_duplicate_review_rejected(self, node):
        from scholarnode.errors import DuplicateRater
        people, pid = self._published(node)
        node.submit_community_review(people["voters"][0], pid, 4, LONG_COMMENT, now=day(20))
        with pytest.raises(DuplicateRater):
            node.submit_community_review(people["voters"][0], pid, 5, LONG_COMMENT, now=day(21))

    def test_cr_is_full_recomputation(self, node):
        people, pid = self._published(node)
        votes = (5, 5, 5, 0)
        raters = people["voters"][:3] + [people["referees"][-1]]
        for uid, v in zip(raters, votes):
            node.submit_community_review(uid, pid, v, LONG_COMMENT, now=day(20))
        record = node.state.manuscripts[pid]
        assert record.cr.value == pytest.approx(sum(votes) / len(votes))
        assert record.cr.sample_count == 4


class TestTick:
    def test_idempotent_for_fixed_clock(self, node):
        people = register_users(node)
        node.submit_manuscript(people["author"], "m", b"x", ["physics/cmp/layered"], 4, now=T0)
        first = node.tick(day(7))
        assert first != []
        assert node.tick(day(7)) == []

    def test_stale_invitations_lapse_and_top_up(self, node):
        people = register_users(node)
        pid = submit_paper_to_review(node, people)
        assignment = node.state.manuscripts[pid].assignment
        before = {i.referee_id for i in assignment.invitations}
        fired = node.tick(day(7 + 8))  # response window is 7 days
        assert any(f.startswith("invitation_lapsed") for f in fired)
        after = {i.referee_id for i in assignment.invitations}
        assert after > before  # replacements invited

    def test_quorum_failure_reselects(self, node):
        people = register_users(node, referees=12)
        pid = submit_paper_to_review(node, people)
        assignment = node.state.manuscripts[pid].assignment
        invited = [i.referee_id for i in assignment.invitations]
        for rid in invited:
            node.accept_invitation(rid, pid, 14, now=day(8))
        for rid in invited[:2]:
            node.record_referee_report(rid, pid, "Accept", 4, now=day(9))
        fired = node.tick(day(8 + 15))  # all declared deadlines passed, 2 on-time
        assert any("quorum_failure" in f for f in fired)
        newly_invited = [i for i in assignment.invitations if i.referee_id not in invited]
        assert newly_invited  # fresh panel members pulled from the pool
        excluded = [i for i in assignment.invitations if i.status == "ExcludedLate"]
        assert len(excluded) == 3


class TestConcurrency:
    def test_quota_holds_under_concurrent_submissions(self, node):
        import threading

        people = register_users(node)
        author = people["author"]
        quota = node.state.users[author].annual_quota
        outcomes = []

        def submit(i):
            try:
                node.submit_manuscript(author, f"c{i}", b"x", ["physics/cmp"], 3, now=day(1))
                outcomes.append("ok")
            except QuotaExceeded:
                outcomes.append("refused")

        threads = [threading.Thread(target=submit, args=(i,)) for i in range(quota + 6)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert outcomes.count("ok") == quota
        assert node.state.users[author].uploads_used(day(1).year) == quota
        assert node.replayed_state().canonical() == node.state.canonical()


class TestEventSourcing:
    def test_decision_history_follows_state_graph(self, node):
        people = register_users(node)
        pid = submit_and_review(node, people, ratings=(4, 4, 4, 4))
        node.submit_community_review(people["voters"][0], pid, 4, LONG_COMMENT, now=day(30))
        for record in node.state.manuscripts.values():
            for hop in record.decision_history:
                assert hop.to in PERMITTED_EDGES[hop.frm]

    def test_replay_matches_live_state(self):
        node = Node(NodeConfig(node_id="tum", allowed_email_domains=("uni.example",),
                               price_quota_extension=10))
        people = register_users(node)
        pid = submit_and_review(node, people, ratings=(4, 4, 4, 4))
        node.submit_community_review(people["voters"][0], pid, 2, LONG_COMMENT, now=day(30))
        node.spend_points(node.state.manuscripts[pid].assignment.invitations[0].referee_id,
                          "QuotaExtension", now=day(31))
        assert node.replayed_state().canonical() == node.state.canonical()

    def test_reboot_from_disk_restores_everything(self, tmp_path):
        config = NodeConfig(node_id="tum", allowed_email_domains=("uni.example",),
                            data_dir=str(tmp_path))
        node = Node(config)
        people = register_users(node)
        pid = submit_and_review(node, people, ratings=(4, 4, 4, 4))
        node.submit_community_review(people["voters"][0], pid, 3, LONG_COMMENT, now=day(30))
        live = node.state.canonical()
        fed = node.federation.canonical()
        node.store.close()

        rebooted = Node(NodeConfig(node_id="tum", allowed_email_domains=("uni.example",),
                                   data_dir=str(tmp_path)))
        assert rebooted.state.canonical() == live
        assert rebooted.federation.canonical() == fed
        assert rebooted.blobs.get(rebooted.state.manuscripts[pid].content_hash) is not None
        # the rebooted node keeps working
        rebooted.submit_community_review(people["voters"][1], pid, 4, LONG_COMMENT, now=day(31))
        assert rebooted.state.manuscripts[pid].cr.sample_count == 2
