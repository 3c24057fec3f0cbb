"""XPC global-host and participant callbacks.

These are the four callbacks a commit protocol is plugged into. The protocol
object supplies ``host_transition``, ``prepare_message``, ``process_message``
and ``participant_transition`` plus a few queries (``is_terminal``,
``phase_of``, ``on_timeout``); see :mod:`xpcsim.protocols`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .packets import ControlPacket, HostMessage, Primitive, Reply, RoundSchedule
from .radio import NodeId


class State(str, Enum):
    # participant side
    INIT = "init"
    VOTED = "voted"
    PRECOMMITTED = "precommitted"
    COMMITTED = "committed"
    # host side
    AWAIT_VOTES = "await_votes"
    AWAIT_ACKS = "await_acks"
    AWAIT_HAVE_COMMITTED = "await_have_committed"
    DONE = "done"
    # both
    ABORT = "abort"


ABORT_STATE = State.ABORT


@dataclass(frozen=True)
class XpcConfig:
    cohort: tuple
    timeout_retx: int = 9
    slot_duration_ms: int = 12
    period_ms: int = 1000

    def __post_init__(self):
        object.__setattr__(self, "cohort", tuple(sorted(self.cohort)))
        if not self.cohort:
            raise ValueError("cohort must contain at least one participant")
        if self.timeout_retx < 1:
            raise ValueError("timeout_retx must be at least 1")

    @property
    def cohort_nodes(self) -> int:
        return len(self.cohort)


@dataclass
class HostState:
    state: State
    mess: HostMessage = HostMessage.VOTE_REQUEST
    retr_cnt: int = 0
    reply_num: int = 0
    replied: set = field(default_factory=set)
    replies: dict = field(default_factory=dict)
    timed_out: bool = False
    rounds: int = 0

    def snapshot(self):
        return (self.state, self.mess, self.retr_cnt, self.reply_num,
                tuple(sorted(self.replies.items())), self.timed_out)


@dataclass
class ParticipantState:
    node: NodeId
    state: State = State.INIT
    mess: Optional[Reply] = None
    retr_cnt: int = 0
    prev_state: State = State.INIT
    vote: Reply = Reply.VOTE_YES
    timed_out: bool = False

    def snapshot(self):
        return (self.state, self.mess, self.retr_cnt, self.timed_out)


def host_on_round_finished(h: HostState, cfg: XpcConfig, protocol) -> ControlPacket:
    """End-of-round host callback; builds the control packet for the next round."""
    h.retr_cnt += 1
    n_slots = cfg.cohort_nodes - h.reply_num
    if h.retr_cnt > cfg.timeout_retx:
        h.state = ABORT_STATE
        h.timed_out = True
    elif h.reply_num == cfg.cohort_nodes:
        protocol.host_transition(h)
        h.replied.clear()
        h.replies.clear()
        h.reply_num = 0
        n_slots = cfg.cohort_nodes
        h.retr_cnt = 0
    h.mess = protocol.prepare_message(h.state)
    h.rounds += 1

    if protocol.is_terminal(h.state):
        assignment = ()
    else:
        assignment = tuple(n for n in cfg.cohort if n not in h.replied)
        assert len(assignment) == n_slots
    return ControlPacket(
        schedule=RoundSchedule(len(assignment), assignment, cfg.slot_duration_ms, cfg.period_ms),
        message=h.mess,
        phase_tag=protocol.phase_of(h.state),
        round_index=h.rounds,
    )


def initial_control(h: HostState, cfg: XpcConfig, protocol) -> ControlPacket:
    """Control packet for the first round of a transaction."""
    h.mess = protocol.prepare_message(h.state)
    return ControlPacket(
        schedule=RoundSchedule(cfg.cohort_nodes, cfg.cohort, cfg.slot_duration_ms, cfg.period_ms),
        message=h.mess,
        phase_tag=protocol.phase_of(h.state),
        round_index=0,
    )


def host_on_slot_post(h: HostState, mess: Reply, node: NodeId, protocol) -> HostState:
    if node not in h.replied:
        protocol.process_message(h, mess, node)
        h.replied.add(node)
        h.reply_num = len(h.replied)
    return h


def participant_on_ctrl_slot_post(
    p: ParticipantState, ctrl: ControlPacket, cfg: XpcConfig, protocol
) -> ParticipantState:
    p.retr_cnt += 1
    if p.retr_cnt > cfg.timeout_retx:
        timed = protocol.on_timeout(p.state)
        if timed != p.state:
            p.timed_out = True
            p.state = timed
    if p.state == ABORT_STATE:
        p.mess = Reply.DO_ABORT
    p.prev_state = p.state
    protocol.participant_transition(p, ctrl)
    if p.prev_state != p.state:
        p.retr_cnt = 0
    return p


def participant_on_slot_pre(
    p: ParticipantState, slot_owner: Optional[NodeId], primitive: Primitive
) -> Optional[Reply]:
    """The reply ``p`` sends in this slot, or ``None`` when it only relays."""
    if primitive is Primitive.CHAOS or slot_owner == p.node:
        return p.mess
    return None
