"""Two- and three-phase commit plugged into the XPC callbacks."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

from .packets import HostMessage, PhaseTag, Reply
from .xpc import ABORT_STATE, ParticipantState, State


class Decision(str, Enum):
    COMMITTED = "committed"
    ABORTED = "aborted"
    TIMEOUT_ABORTED = "timeout_aborted"
    TIMEOUT_COMMITTED = "timeout_committed"

    @property
    def is_timeout(self) -> bool:
        return self in (Decision.TIMEOUT_ABORTED, Decision.TIMEOUT_COMMITTED)

    @property
    def committed(self) -> bool:
        return self in (Decision.COMMITTED, Decision.TIMEOUT_COMMITTED)


HOST_MESSAGES = {
    State.AWAIT_VOTES: HostMessage.VOTE_REQUEST,
    State.AWAIT_ACKS: HostMessage.PRE_COMMIT,
    State.AWAIT_HAVE_COMMITTED: HostMessage.DO_COMMIT,
    State.DONE: HostMessage.DO_COMMIT,
    State.ABORT: HostMessage.DO_ABORT,
}


def twopc_host_transition(state: State, replies: Iterable[Reply]):
    replies = list(replies)
    if state is State.AWAIT_VOTES:
        nxt = State.AWAIT_HAVE_COMMITTED if all(r == Reply.VOTE_YES for r in replies) else State.ABORT
    elif state is State.AWAIT_HAVE_COMMITTED:
        nxt = State.DONE
    else:
        nxt = state
    return nxt, HOST_MESSAGES[nxt]


def threepc_host_transition(state: State, replies: Iterable[Reply]):
    replies = list(replies)
    if state is State.AWAIT_VOTES:
        nxt = State.AWAIT_ACKS if all(r == Reply.VOTE_YES for r in replies) else State.ABORT
    elif state is State.AWAIT_ACKS:
        nxt = (State.AWAIT_HAVE_COMMITTED
               if all(r == Reply.ACK_PRECOMMIT for r in replies) else State.ABORT)
    elif state is State.AWAIT_HAVE_COMMITTED:
        nxt = State.DONE
    else:
        nxt = state
    return nxt, HOST_MESSAGES[nxt]


def twopc_participant_transition(state: State, message: HostMessage, vote: Reply = Reply.VOTE_YES):
    if state is State.COMMITTED:
        return State.COMMITTED, Reply.HAVE_COMMITTED
    if state is State.ABORT:
        return State.ABORT, Reply.DO_ABORT
    if message is HostMessage.VOTE_REQUEST:
        return State.VOTED, vote
    if message is HostMessage.DO_COMMIT:
        return State.COMMITTED, Reply.HAVE_COMMITTED
    if message is HostMessage.DO_ABORT:
        return State.ABORT, Reply.DO_ABORT
    raise ValueError(f"2PC participant cannot handle {message!r}")


def threepc_participant_transition(state: State, message: HostMessage, vote: Reply = Reply.VOTE_YES):
    if state is State.PRECOMMITTED:
        if message is HostMessage.DO_COMMIT:
            return State.COMMITTED, Reply.HAVE_COMMITTED
        if message is HostMessage.DO_ABORT:
            return State.ABORT, Reply.DO_ABORT
        return State.PRECOMMITTED, Reply.ACK_PRECOMMIT
    if message is HostMessage.PRE_COMMIT and state in (State.INIT, State.VOTED):
        return State.PRECOMMITTED, Reply.ACK_PRECOMMIT
    return twopc_participant_transition(state, message, vote)


class TwoPhaseCommit:
    name = "2pc"
    phases = (PhaseTag.P1, PhaseTag.P2)
    _phase = {State.AWAIT_VOTES: PhaseTag.P1, State.AWAIT_HAVE_COMMITTED: PhaseTag.P2}
    _host_step = staticmethod(twopc_host_transition)
    _participant_step = staticmethod(twopc_participant_transition)

    def initial_host_state(self) -> State:
        return State.AWAIT_VOTES

    def is_terminal(self, state: State) -> bool:
        return state in (State.DONE, State.ABORT)

    def phase_of(self, state: State):
        return self._phase.get(state)

    def prepare_message(self, state: State) -> HostMessage:
        return HOST_MESSAGES[state]

    def process_message(self, h, mess: Reply, node) -> None:
        h.replies[node] = mess

    def host_transition(self, h) -> None:
        h.state, _ = self._host_step(h.state, h.replies.values())

    def participant_transition(self, p: ParticipantState, ctrl) -> None:
        p.state, p.mess = self._participant_step(p.state, ctrl.message, p.vote)

    def on_timeout(self, state: State) -> State:
        if state in (State.COMMITTED, State.ABORT):
            return state
        return ABORT_STATE

    def host_decision(self, h) -> Decision:
        if h.state is State.DONE:
            return Decision.COMMITTED
        return Decision.TIMEOUT_ABORTED if h.timed_out else Decision.ABORTED

    def participant_decision(self, p: ParticipantState) -> Decision:
        state, timed_out = p.state, p.timed_out
        if state not in (State.COMMITTED, State.ABORT):
            state, timed_out = self.on_timeout(state), True
        if state is State.COMMITTED:
            return Decision.TIMEOUT_COMMITTED if timed_out else Decision.COMMITTED
        return Decision.TIMEOUT_ABORTED if timed_out else Decision.ABORTED


class ThreePhaseCommit(TwoPhaseCommit):
    name = "3pc"
    phases = (PhaseTag.P1, PhaseTag.P2, PhaseTag.P3)
    _phase = {
        State.AWAIT_VOTES: PhaseTag.P1,
        State.AWAIT_ACKS: PhaseTag.P2,
        State.AWAIT_HAVE_COMMITTED: PhaseTag.P3,
    }
    _host_step = staticmethod(threepc_host_transition)
    _participant_step = staticmethod(threepc_participant_transition)

    def on_timeout(self, state: State) -> State:
        # past pre-commit a participant knows everyone voted yes
        if state is State.PRECOMMITTED:
            return State.COMMITTED
        return super().on_timeout(state)


PROTOCOLS = {"2pc": TwoPhaseCommit, "3pc": ThreePhaseCommit}


def make_protocol(name: str):
    try:
        return PROTOCOLS[name]()
    except KeyError:
        raise ValueError(f"unknown protocol {name!r}; expected one of {sorted(PROTOCOLS)}") from None


@dataclass
class TransactionOutcome:
    decisions: dict
    rounds_used: int
    attempts: dict = field(default_factory=dict)
    first_coverage: dict = field(default_factory=dict)
    latency_ms: float = 0.0
    round_log: list = field(default_factory=list)

    @property
    def label(self) -> str:
        ds = list(self.decisions.values())
        if any(d.is_timeout for d in ds):
            return "timeout"
        if all(d is Decision.COMMITTED for d in ds):
            return "commit"
        if all(d is Decision.ABORTED for d in ds):
            return "abort"
        return "mixed"

    @property
    def reliable(self) -> bool:
        return self.label in ("commit", "abort")
