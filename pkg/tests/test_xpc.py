import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xpcsim.packets import ControlPacket, HostMessage, Primitive, Reply, RoundSchedule
from xpcsim.protocols import ThreePhaseCommit, TwoPhaseCommit
from xpcsim.xpc import (
    HostState,
    ParticipantState,
    State,
    XpcConfig,
    host_on_round_finished,
    host_on_slot_post,
    initial_control,
    participant_on_ctrl_slot_post,
    participant_on_slot_pre,
)

P2 = TwoPhaseCommit()
CFG = XpcConfig(cohort=(1, 2, 3, 4), timeout_retx=3)


def host_with_replies(nodes, reply=Reply.VOTE_YES, proto=P2):
    h = HostState(proto.initial_host_state())
    for n in nodes:
        host_on_slot_post(h, reply, n, proto)
    return h


def ctrl(msg, cohort=(1, 2, 3, 4)):
    return ControlPacket(RoundSchedule(len(cohort), tuple(cohort), 12), msg)


# ---------------------------------------------------------------- host


def test_full_replies_fire_transition():
    h = host_with_replies([1, 2, 3, 4])
    h.retr_cnt = 2
    pkt = host_on_round_finished(h, CFG, P2)
    assert h.state is State.AWAIT_HAVE_COMMITTED
    assert pkt.schedule.n_slots == 4
    assert pkt.message is HostMessage.DO_COMMIT
    assert h.retr_cnt == 0 and h.reply_num == 0 and not h.replied


def test_partial_replies_schedule_the_missing():
    h = host_with_replies([1, 3])
    pkt = host_on_round_finished(h, CFG, P2)
    assert h.state is State.AWAIT_VOTES
    assert pkt.schedule.slot_assignment == (2, 4)
    assert pkt.schedule.n_slots == 2
    assert h.retr_cnt == 1


def test_retry_limit_aborts():
    h = host_with_replies([1, 2, 3, 4])
    h.retr_cnt = CFG.timeout_retx
    pkt = host_on_round_finished(h, CFG, P2)
    # the timeout check comes first, even with every reply in
    assert h.state is State.ABORT and h.timed_out
    assert pkt.message is HostMessage.DO_ABORT
    assert pkt.schedule.is_empty


def test_done_issues_empty_round():
    h = HostState(State.AWAIT_HAVE_COMMITTED)
    for n in CFG.cohort:
        host_on_slot_post(h, Reply.HAVE_COMMITTED, n, P2)
    pkt = host_on_round_finished(h, CFG, P2)
    assert h.state is State.DONE
    assert pkt.schedule.n_slots == 0 and pkt.message is HostMessage.DO_COMMIT


def test_duplicate_replies_are_ignored():
    h = host_with_replies([2])
    host_on_slot_post(h, Reply.VOTE_NO, 2, P2)
    assert h.reply_num == 1 and h.replies[2] is Reply.VOTE_YES


def test_reply_after_transition_counts_again():
    h = host_with_replies([1, 2, 3, 4])
    host_on_round_finished(h, CFG, P2)
    host_on_slot_post(h, Reply.HAVE_COMMITTED, 2, P2)
    assert h.reply_num == 1 and h.replies == {2: Reply.HAVE_COMMITTED}


def test_initial_control_schedules_everyone():
    h = HostState(P2.initial_host_state())
    pkt = initial_control(h, CFG, P2)
    assert pkt.message is HostMessage.VOTE_REQUEST
    assert pkt.schedule.slot_assignment == CFG.cohort


@settings(max_examples=200)
@given(st.lists(st.tuples(st.integers(1, 4), st.sampled_from(list(Reply))), max_size=20))
def test_reply_num_is_bounded_by_cohort(posts):
    h = HostState(State.AWAIT_VOTES)
    for node, reply in posts:
        host_on_slot_post(h, reply, node, P2)
        assert h.reply_num == len(h.replied) <= CFG.cohort_nodes


def test_config_validation():
    with pytest.raises(ValueError):
        XpcConfig(cohort=())
    with pytest.raises(ValueError):
        XpcConfig(cohort=(1,), timeout_retx=0)
    assert XpcConfig(cohort=(3, 1, 2)).cohort == (1, 2, 3)


# ---------------------------------------------------------------- participant


def test_phase_advance_resets_counter():
    p = ParticipantState(1)
    participant_on_ctrl_slot_post(p, ctrl(HostMessage.VOTE_REQUEST), CFG, P2)
    participant_on_ctrl_slot_post(p, ctrl(HostMessage.VOTE_REQUEST), CFG, P2)
    assert p.state is State.VOTED and p.retr_cnt == 1
    participant_on_ctrl_slot_post(p, ctrl(HostMessage.DO_COMMIT), CFG, P2)
    assert p.state is State.COMMITTED and p.retr_cnt == 0
    assert p.mess is Reply.HAVE_COMMITTED


def test_repeated_phase_increments_counter():
    p = ParticipantState(1, state=State.VOTED, mess=Reply.VOTE_YES)
    participant_on_ctrl_slot_post(p, ctrl(HostMessage.VOTE_REQUEST), CFG, P2)
    assert p.state is State.VOTED and p.retr_cnt == 1


def test_participant_timeout_aborts():
    p = ParticipantState(1, state=State.VOTED, mess=Reply.VOTE_YES, retr_cnt=CFG.timeout_retx)
    participant_on_ctrl_slot_post(p, ctrl(HostMessage.VOTE_REQUEST), CFG, P2)
    assert p.state is State.ABORT and p.timed_out
    assert p.mess is Reply.DO_ABORT


def test_precommitted_timeout_commits_in_3pc():
    p3 = ThreePhaseCommit()
    p = ParticipantState(1, state=State.PRECOMMITTED, mess=Reply.ACK_PRECOMMIT,
                         retr_cnt=CFG.timeout_retx)
    participant_on_ctrl_slot_post(p, ctrl(HostMessage.PRE_COMMIT), CFG, p3)
    assert p.state is State.COMMITTED and p.timed_out


def test_slot_pre_glossy_owner_and_relay():
    p = ParticipantState(2, state=State.VOTED, mess=Reply.VOTE_YES)
    assert participant_on_slot_pre(p, 2, Primitive.GLOSSY) is Reply.VOTE_YES
    assert participant_on_slot_pre(p, 3, Primitive.GLOSSY) is None
    assert participant_on_slot_pre(p, None, Primitive.CHAOS) is Reply.VOTE_YES


def test_timeout_equivalence_of_twin_runs():
    """A participant that never hears back times out exactly after the limit."""
    for limit in (1, 2, 5):
        cfg = XpcConfig(cohort=(1,), timeout_retx=limit)
        p = ParticipantState(1)
        participant_on_ctrl_slot_post(p, ctrl(HostMessage.VOTE_REQUEST, (1,)), cfg, P2)
        seen = []
        for _ in range(limit + 1):
            participant_on_ctrl_slot_post(p, ctrl(HostMessage.VOTE_REQUEST, (1,)), cfg, P2)
            seen.append(p.state)
        assert seen[:-1] == [State.VOTED] * limit
        assert seen[-1] is State.ABORT and p.timed_out
