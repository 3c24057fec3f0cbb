"""Synchronous-transmission primitives on top of the radio model.

``glossy_flood`` relays one payload in synchronized waves, with every relay
transmitting ``n_tx`` times. ``chaos_round`` runs the all-to-all aggregation,
where nodes merge flag bit-fields and retransmit while they have something
their neighbours lack.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Mapping, Optional

from .radio import Network, NodeId, reception_outcome


@dataclass(frozen=True)
class GlossyParams:
    n_tx: int = 10
    slot_us: int = 12_000
    wave_us: int = 600
    # relay timing error; above 0.5 µs some identical copies miss the
    # constructive window and fall back to capture
    jitter_us: float = 1.5

    def __post_init__(self):
        if self.n_tx < 1:
            raise ValueError("n_tx must be at least 1")
        if self.slot_us <= 0 or self.wave_us <= 0:
            raise ValueError("slot and wave durations must be positive")


@dataclass(frozen=True)
class ChaosParams:
    micro_slot_us: int = 1_000
    gap_us: int = 8_000
    quiet_slots: int = 20
    p_tx: float = 0.5
    p_retry: float = 0.1
    jitter_us: float = 0.5

    def __post_init__(self):
        if self.micro_slot_us <= 0 or self.gap_us < 0:
            raise ValueError("micro-slot must be positive and gap non-negative")
        if self.quiet_slots < 1:
            raise ValueError("quiet_slots must be at least 1")
        if not 0.0 < self.p_tx <= 1.0:
            raise ValueError("p_tx must be in (0, 1]")
        if not 0.0 <= self.p_retry <= 1.0:
            raise ValueError("p_retry must be in [0, 1]")


@dataclass(frozen=True)
class ChaosAggregate:
    """Chaos payload: one flag bit and one reply byte per cohort member.

    Bit ``i`` of ``flags`` is set iff ``votes[i]`` holds cohort member ``i``'s
    reply; unset positions carry 0.
    """

    flags: int
    votes: tuple
    proposed_value: bytes = b""

    def __post_init__(self):
        for i, v in enumerate(self.votes):
            if not 0 <= v <= 0xFF:
                raise ValueError(f"vote byte out of range at {i}: {v}")
            if not self.flags >> i & 1 and v:
                raise ValueError(f"vote byte set for unflagged position {i}")
        if self.flags >> len(self.votes):
            raise ValueError("flags has bits beyond the cohort size")

    @classmethod
    def empty(cls, size: int, proposed_value: bytes = b"") -> "ChaosAggregate":
        return cls(0, (0,) * size, proposed_value)

    def with_vote(self, index: int, vote: int) -> "ChaosAggregate":
        votes = list(self.votes)
        votes[index] = vote
        return ChaosAggregate(self.flags | 1 << index, tuple(votes), self.proposed_value)

    @property
    def size(self) -> int:
        return len(self.votes)

    def has(self, index: int) -> bool:
        return bool(self.flags >> index & 1)

    @property
    def complete(self) -> bool:
        return self.flags == (1 << self.size) - 1


def merge_aggregate(a: ChaosAggregate, b: ChaosAggregate) -> ChaosAggregate:
    if a.size != b.size:
        raise ValueError(f"cohort size mismatch: {a.size} vs {b.size}")
    if a.proposed_value != b.proposed_value:
        raise ValueError("cannot merge aggregates for different proposed values")
    if a == b:
        return a
    votes = []
    for i in range(a.size):
        in_a, in_b = a.has(i), b.has(i)
        if in_a and in_b and a.votes[i] != b.votes[i]:
            raise ValueError(f"conflicting reply bytes for cohort position {i}")
        votes.append(a.votes[i] if in_a else b.votes[i])
    return ChaosAggregate(a.flags | b.flags, tuple(votes), a.proposed_value)


@dataclass
class FloodResult:
    reached: frozenset
    final_payload: object
    elapsed_us: int
    node_payloads: dict = field(default_factory=dict)


def glossy_flood(
    initiator: NodeId,
    payload,
    params: GlossyParams,
    net: Network,
    t: int,
    rng: random.Random,
    awake=None,
) -> FloodResult:
    """One Glossy flood of ``payload`` from ``initiator``.

    A node that first decodes the packet in wave ``w`` relays it in waves
    ``w+1, w+3, ...`` until it has transmitted ``n_tx`` times; the initiator
    transmits in waves ``0, 2, 4, ...``. Only ``awake`` nodes take part.
    """
    nbrs = net.topology.neighbors
    awake = set(net.topology.nodes) if awake is None else set(awake) | {initiator}
    first_tx = {initiator: 0}
    sent = {initiator: 0}
    max_waves = params.slot_us // params.wave_us
    last_wave = -1
    for w in range(max_waves):
        tx = [
            n for n, s in first_tx.items()
            if w >= s and (w - s) % 2 == 0 and sent[n] < params.n_tx
        ]
        if not tx:
            if all(sent[n] >= params.n_tx for n in first_tx):
                break
            continue
        last_wave = w
        offsets = {}
        for n in sorted(tx):
            sent[n] += 1
            offsets[n] = rng.uniform(0.0, params.jitter_us)
        listeners = sorted(({r for n in tx for r in nbrs[n]} - first_tx.keys()) & awake)
        now = t + w * params.wave_us
        decoded = []
        for r in listeners:
            concurrent = [(s, payload, offsets[s]) for s in nbrs[r] if s in offsets]
            if reception_outcome(r, concurrent, now, net, rng) is not None:
                decoded.append(r)
        for r in decoded:
            first_tx[r] = w + 1
            sent[r] = 0
    reached = frozenset(first_tx)
    return FloodResult(
        reached=reached,
        final_payload=payload,
        elapsed_us=(last_wave + 1) * params.wave_us,
        node_payloads={n: payload for n in reached},
    )


def chaos_round(
    initial: ChaosAggregate,
    slot_ms: int,
    net: Network,
    t: int,
    rng: random.Random,
    *,
    initiator: Optional[NodeId] = None,
    contributions: Optional[Mapping] = None,
    params: ChaosParams = ChaosParams(),
) -> FloodResult:
    """One bounded Chaos flood started by ``initiator`` (the host by default).

    ``contributions`` maps every other awake node to its current aggregate
    (its own bit, or what it held when the previous round stopped). After a
    dead gap the slot is cut into micro-slots; in each one a node with
    pending information transmits with probability ``p_tx``; a joined node
    whose aggregate is still incomplete retries with probability ``p_retry``.
    A node becomes pending when it learns something new or hears a packet
    missing something it holds. The flood stops when the slot ends or no node
    has learnt anything for ``quiet_slots`` micro-slots.
    """
    if initiator is None:
        initiator = net.topology.host
    nbrs = net.topology.neighbors
    agg = dict(contributions or {})
    agg[initiator] = merge_aggregate(agg[initiator], initial) if initiator in agg else initial
    awake = set(agg)

    slot_us = slot_ms * 1000
    n_micro = max(0, (slot_us - params.gap_us) // params.micro_slot_us)
    joined = {initiator}
    pending = {initiator}
    quiet = 0
    used = 0
    for m in range(n_micro):
        tx = []
        for n in sorted(joined):
            if m == 0 and n == initiator:
                tx.append(n)
            elif n in pending:
                if rng.random() < params.p_tx:
                    tx.append(n)
            elif not agg[n].complete and rng.random() < params.p_retry:
                tx.append(n)
        used = m + 1
        if not tx:
            if not pending and agg[initiator].complete:
                break
            quiet += 1
            if quiet >= params.quiet_slots:
                break
            continue
        frames = {n: (agg[n], rng.uniform(0.0, params.jitter_us)) for n in tx}
        for n in tx:
            if n != initiator or len(joined) > 1:
                pending.discard(n)
        now = t + params.gap_us + m * params.micro_slot_us
        listeners = sorted({r for n in tx for r in nbrs[n]} & awake - frames.keys())
        learnt = False
        for r in listeners:
            concurrent = [(s, frames[s][0], frames[s][1]) for s in nbrs[r] if s in frames]
            got = reception_outcome(r, concurrent, now, net, rng)
            if got is None:
                continue
            joined.add(r)
            merged = merge_aggregate(agg[r], got)
            if merged != agg[r]:
                agg[r] = merged
                learnt = True
                pending.add(r)
            elif merged != got:
                pending.add(r)
        if learnt:
            quiet = 0
        else:
            quiet += 1
            if quiet >= params.quiet_slots:
                break
    elapsed = min(slot_us, params.gap_us) + used * params.micro_slot_us
    return FloodResult(
        reached=frozenset(joined),
        final_payload=agg[initiator],
        elapsed_us=elapsed,
        node_payloads=agg,
    )
