"""Wire-level types shared by the XPC core and the round kernel."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Optional


class Reply(IntEnum):
    VOTE_YES = 0x01
    VOTE_NO = 0x02
    ACK_PRECOMMIT = 0x03
    HAVE_COMMITTED = 0x04
    DO_ABORT = 0x0F


class HostMessage(IntEnum):
    VOTE_REQUEST = 0x11
    PRE_COMMIT = 0x12
    DO_COMMIT = 0x13
    DO_ABORT = 0x1F


class Primitive(str, Enum):
    GLOSSY = "glossy"
    CHAOS = "chaos"


class PhaseTag(str, Enum):
    P1 = "P1"
    P2 = "P2"
    P3 = "P3"

    @property
    def index(self) -> int:
        return int(self.value[1]) - 1


@dataclass(frozen=True)
class RoundSchedule:
    n_slots: int
    slot_assignment: tuple
    slot_duration_ms: int
    period_ms: int = 1000

    def __post_init__(self):
        if self.n_slots < 0 or self.n_slots != len(self.slot_assignment):
            raise ValueError("n_slots must match the slot assignment length")
        if len(set(self.slot_assignment)) != len(self.slot_assignment):
            raise ValueError("slot assignment has duplicate nodes")
        if self.slot_duration_ms <= 0 or self.period_ms <= 0:
            raise ValueError("slot duration and period must be positive")

    @property
    def is_empty(self) -> bool:
        return self.n_slots == 0


@dataclass(frozen=True)
class ControlPacket:
    schedule: RoundSchedule
    message: HostMessage
    proposed_value: bytes = b""
    primitive: Primitive = Primitive.GLOSSY
    phase_tag: Optional[PhaseTag] = None
    round_index: int = 0
    attempt: int = 0

    @property
    def user_bytes(self) -> bytes:
        """Host message section followed by the proposed-value section."""
        return bytes([self.message]) + self.proposed_value
