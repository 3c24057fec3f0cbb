"""TDMA round kernel and the transaction driver.

Each round opens with the host's control flood. Nodes that decode it run
their control callback and may then reply, either one Glossy flood per
scheduled slot or a single Chaos aggregation slot. The driver asks the host
callback for the next control packet at the end of every round and stops
after the terminal empty round.

Radio access goes through a channel object, so the same driver runs over
the radio simulator (``RadioChannel``) or an explicit loss script
(``ScriptedChannel``, ``LossyChannel``).
"""
from __future__ import annotations

import copy
import random
from dataclasses import dataclass, replace
from enum import Enum
from typing import Mapping, Optional

from .hybrid import select_primitive, translate_packet
from .packets import ControlPacket, PhaseTag, Primitive, Reply, RoundSchedule
from .primitives import ChaosAggregate, ChaosParams, GlossyParams, chaos_round, glossy_flood
from .protocols import TransactionOutcome
from .radio import Network, NodeId
from .xpc import (
    HostState,
    ParticipantState,
    XpcConfig,
    host_on_round_finished,
    host_on_slot_post,
    initial_control,
    participant_on_ctrl_slot_post,
    participant_on_slot_pre,
)


class Mode(str, Enum):
    GLOSSY = "glossy"
    CHAOS = "chaos"
    HYBRID = "hybrid"


@dataclass
class RoundResult:
    control_received_by: frozenset
    replies: dict
    elapsed_ms: int


@dataclass
class RoundRecord:
    index: int
    phase: Optional[PhaseTag]
    attempt: int
    primitive: Primitive
    message: int
    slot_assignment: tuple
    control_received_by: frozenset
    replies: dict
    elapsed_ms: int


def make_retransmission_schedule(missing, base: RoundSchedule) -> RoundSchedule:
    if not missing:
        raise ValueError("a retransmission round needs at least one missing node")
    order = tuple(sorted(missing))
    return RoundSchedule(len(order), order, base.slot_duration_ms, base.period_ms)


class RadioChannel:
    """Channel backed by the radio simulator.

    Keeps per-node Chaos aggregates between rounds so a Chaos-only phase can
    resume its flood; they are dropped whenever a phase starts afresh.

    Between rounds the radio clock advances by the round period plus a
    uniform wake-up offset below ``wake_jitter_us``. Jammers run on their own
    clocks, so without the offset a periodic jammer would hit every
    retransmission round at the same phase.
    """

    def __init__(
        self,
        net: Network,
        rng: random.Random,
        cohort,
        glossy: GlossyParams = GlossyParams(),
        chaos: ChaosParams = ChaosParams(),
        wake_jitter_us: int = 20_000,
    ):
        self.net = net
        self.rng = rng
        self.host = net.topology.host
        self.cohort = tuple(sorted(cohort))
        self._index = {n: i for i, n in enumerate(self.cohort)}
        self.glossy = glossy
        self.chaos = chaos
        self.wake_jitter_us = wake_jitter_us
        self._aggs: dict = {}

    def idle_us(self, period_ms: int) -> int:
        jitter = self.rng.randrange(self.wake_jitter_us) if self.wake_jitter_us > 0 else 0
        return period_ms * 1000 + jitter

    @property
    def control_ms(self) -> int:
        return self.glossy.slot_us // 1000

    def control(self, ctrl: ControlPacket, t: int) -> frozenset:
        res = glossy_flood(self.host, ctrl.user_bytes, self.glossy, self.net, t, self.rng)
        return res.reached - {self.host}

    def glossy_reply(self, owner: NodeId, reply: Reply, awake, t: int) -> bool:
        awake = set(awake) | {self.host}
        res = glossy_flood(owner, bytes([reply]), self.glossy, self.net, t, self.rng, awake=awake)
        return self.host in res.reached

    def chaos_replies(self, ctrl: ControlPacket, contributions: Mapping, t: int) -> dict:
        if ctrl.attempt == 0:
            self._aggs = {}
        size = len(self.cohort)
        aggs = {}
        for node, reply in contributions.items():
            own = self._aggs.get(node) or ChaosAggregate.empty(size, ctrl.proposed_value)
            if not own.has(self._index[node]):
                own = own.with_vote(self._index[node], reply)
            aggs[node] = own
        initial = self._aggs.get(self.host) or ChaosAggregate.empty(size, ctrl.proposed_value)
        res = chaos_round(
            initial, ctrl.schedule.slot_duration_ms, self.net, t, self.rng,
            initiator=self.host, contributions=aggs, params=self.chaos,
        )
        self._aggs.update(res.node_payloads)
        replies, _ = translate_packet(res.final_payload, self.cohort)
        return replies


class ScriptedChannel:
    """Channel whose losses are fixed in advance, one entry per round.

    ``script`` yields ``(control_received, delivered)`` pairs: the
    participants that decode the control flood and the transmitters whose
    reply reaches the host.
    """

    control_ms = 12

    def __init__(self, script):
        self._script = iter(script)
        self._delivered = frozenset()

    def idle_us(self, period_ms):
        return 0

    def control(self, ctrl, t):
        received, self._delivered = next(self._script)
        return frozenset(received)

    def glossy_reply(self, owner, reply, awake, t):
        return owner in self._delivered

    def chaos_replies(self, ctrl, contributions, t):
        return {n: r for n, r in contributions.items() if n in self._delivered}


class LossyChannel(ScriptedChannel):
    """Independent control and reply losses drawn from ``rng``."""

    def __init__(self, cohort, p_control_loss: float, p_reply_loss: float, rng: random.Random):
        cohort = tuple(sorted(cohort))

        def script():
            while True:
                ctrl = {n for n in cohort if rng.random() >= p_control_loss}
                ok = {n for n in cohort if rng.random() >= p_reply_loss}
                yield ctrl, ok

        super().__init__(script())


def run_round(
    ctrl: ControlPacket,
    participants: Mapping,
    host: HostState,
    cfg: XpcConfig,
    protocol,
    channel,
    t: int,
) -> RoundResult:
    """Run one round starting at ``t`` (µs) and return what the host collected."""
    synced = channel.control(ctrl, t)
    for node in sorted(synced):
        participant_on_ctrl_slot_post(participants[node], ctrl, cfg, protocol)

    schedule = ctrl.schedule
    control_ms = channel.control_ms
    t_data = t + control_ms * 1000
    replies = {}
    if schedule.is_empty:
        elapsed = control_ms
    elif ctrl.primitive is Primitive.GLOSSY:
        for i, owner in enumerate(schedule.slot_assignment):
            if owner not in synced:
                continue
            reply = participant_on_slot_pre(participants[owner], owner, Primitive.GLOSSY)
            if reply is None:
                continue
            slot_t = t_data + i * schedule.slot_duration_ms * 1000
            if channel.glossy_reply(owner, reply, synced, slot_t):
                replies[owner] = reply
        elapsed = control_ms + schedule.n_slots * schedule.slot_duration_ms
    else:
        contributions = {
            n: participant_on_slot_pre(participants[n], None, Primitive.CHAOS)
            for n in sorted(synced)
        }
        replies = channel.chaos_replies(ctrl, contributions, t_data)
        elapsed = control_ms + schedule.slot_duration_ms

    for node in sorted(replies):
        host_on_slot_post(host, replies[node], node, protocol)
    return RoundResult(frozenset(synced), replies, elapsed)


class Transaction:
    """One XPC transaction, stepped a round at a time."""

    def __init__(
        self,
        protocol,
        cfg: XpcConfig,
        mode: Mode = Mode.GLOSSY,
        votes: Optional[Mapping] = None,
        chaos_slot_ms: int = 50,
        proposed_value: bytes = b"\x01",
        host_id: NodeId = 0,
    ):
        self.protocol = protocol
        self.host_id = host_id
        self.cfg = cfg
        self.mode = Mode(mode)
        self.chaos_slot_ms = chaos_slot_ms
        self.proposed_value = proposed_value
        votes = votes or {}
        self.host = HostState(protocol.initial_host_state())
        self.participants = {
            n: ParticipantState(n, vote=votes.get(n, Reply.VOTE_YES)) for n in cfg.cohort
        }
        self.t_us = 0
        self.latency_ms = 0
        self.finished = False
        self.log: list = []
        self.attempts: dict = {}
        self.coverage: dict = {}
        self.ctrl = self._dress(initial_control(self.host, cfg, protocol))

    def _dress(self, ctrl: ControlPacket) -> ControlPacket:
        """Attach the proposed value, attempt index and primitive for this mode."""
        attempt = self.host.retr_cnt
        ctrl = replace(ctrl, proposed_value=self.proposed_value, attempt=attempt)
        if ctrl.schedule.is_empty:
            return ctrl
        if self.mode is Mode.GLOSSY:
            primitive = Primitive.GLOSSY
        elif self.mode is Mode.CHAOS:
            primitive = Primitive.CHAOS
        else:
            plan = select_primitive(
                ctrl.phase_tag, attempt, self.cfg.timeout_retx, self.chaos_slot_ms
            )
            primitive = plan.primitive
        if primitive is Primitive.CHAOS:
            sched = replace(ctrl.schedule, slot_duration_ms=self.chaos_slot_ms)
            return replace(ctrl, primitive=primitive, schedule=sched)
        return replace(ctrl, primitive=primitive)

    def step(self, channel) -> RoundRecord:
        if self.finished:
            raise RuntimeError("transaction already finished")
        ctrl = self.ctrl
        result = run_round(
            ctrl, self.participants, self.host, self.cfg, self.protocol, channel, self.t_us
        )
        phase = ctrl.phase_tag
        if phase is not None:
            self.attempts[phase] = self.attempts.get(phase, 0) + 1
            if ctrl.attempt == 0:
                self.coverage[phase] = 100.0 * self.host.reply_num / self.cfg.cohort_nodes
        record = RoundRecord(
            index=ctrl.round_index,
            phase=phase,
            attempt=ctrl.attempt,
            primitive=ctrl.primitive,
            message=ctrl.message,
            slot_assignment=ctrl.schedule.slot_assignment,
            control_received_by=result.control_received_by,
            replies=result.replies,
            elapsed_ms=result.elapsed_ms,
        )
        self.log.append(record)
        self.latency_ms += result.elapsed_ms
        self.t_us += result.elapsed_ms * 1000
        if ctrl.schedule.is_empty:
            self.finished = True
        else:
            self.ctrl = self._dress(host_on_round_finished(self.host, self.cfg, self.protocol))
            self.t_us += channel.idle_us(ctrl.schedule.period_ms)
        return record

    def run(self, channel) -> TransactionOutcome:
        while not self.finished:
            self.step(channel)
        return self.outcome()

    def outcome(self) -> TransactionOutcome:
        decisions = {self.host_id: self.protocol.host_decision(self.host)}
        for n, p in self.participants.items():
            decisions[n] = self.protocol.participant_decision(p)
        return TransactionOutcome(
            decisions=decisions,
            rounds_used=len(self.log),
            attempts=dict(self.attempts),
            first_coverage=dict(self.coverage),
            latency_ms=float(self.latency_ms),
            round_log=self.log,
        )

    def fork(self) -> "Transaction":
        """Independent copy of the protocol state, for branching exploration.

        The round log is not carried over.
        """
        twin = copy.copy(self)
        twin.host = replace(self.host, replied=set(self.host.replied), replies=dict(self.host.replies))
        twin.participants = {n: replace(p) for n, p in self.participants.items()}
        twin.log = []
        twin.attempts = dict(self.attempts)
        twin.coverage = dict(self.coverage)
        return twin

    def snapshot(self):
        return (
            self.host.snapshot(),
            tuple(self.participants[n].snapshot() for n in self.cfg.cohort),
            self.ctrl.message,
            self.ctrl.schedule.slot_assignment,
            self.finished,
        )
