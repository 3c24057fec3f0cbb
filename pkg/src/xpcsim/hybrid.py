"""Hybrid primitive policy: one Chaos round opens each phase, Glossy retries the rest."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .packets import PhaseTag, Primitive, Reply
from .primitives import ChaosAggregate


@dataclass(frozen=True)
class AttemptPlan:
    """Primitive for one attempt (round) of a phase.

    ``timeout`` marks the attempt at index ``timeout_retx``: the host's
    retransmission counter exceeds its limit at the end of that round, so
    whatever it collects cannot advance the phase.
    """

    phase_tag: PhaseTag
    attempt_index: int
    primitive: Primitive
    chaos_slot_ms: Optional[int] = None
    timeout: bool = False


def select_primitive(phase: PhaseTag, attempt: int, timeout_retx: int, chaos_slot_ms: int = 50) -> AttemptPlan:
    if attempt < 0:
        raise ValueError("attempt index must be non-negative")
    if attempt > timeout_retx:
        raise ValueError(f"attempt {attempt} is past the timeout at {timeout_retx}")
    if attempt == 0:
        return AttemptPlan(phase, 0, Primitive.CHAOS, chaos_slot_ms)
    return AttemptPlan(phase, attempt, Primitive.GLOSSY, timeout=attempt == timeout_retx)


def translate_packet(aggregate: ChaosAggregate, cohort: Sequence):
    """Decode a Chaos aggregate into per-node replies and the set still missing.

    ``cohort`` lists participant ids in flag-bit order.
    """
    if len(cohort) != aggregate.size:
        raise ValueError("cohort size does not match the aggregate")
    replies = {}
    missing = set()
    for i, node in enumerate(cohort):
        if aggregate.has(i):
            replies[node] = Reply(aggregate.votes[i])
        else:
            missing.add(node)
    return replies, missing
