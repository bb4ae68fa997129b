"""Local radio messages exchanged during recruitment, and the controller output record."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Union

from .robot import LedColor, VelocityCmd

ALL = -1


@dataclass(frozen=True)
class RecruitRequest:
    needed: int


@dataclass(frozen=True)
class Volunteer:
    id: int


@dataclass(frozen=True)
class Ack:
    id: int


@dataclass(frozen=True)
class RestOrder:
    pass


@dataclass(frozen=True)
class GoalFoundInfo:
    explore_time: int


Payload = Union[RecruitRequest, Volunteer, Ack, RestOrder, GoalFoundInfo]
PAYLOAD_KINDS = (RecruitRequest, Volunteer, Ack, RestOrder, GoalFoundInfo)


@dataclass(frozen=True)
class Message:
    kind: str  # "broadcast" or "unicast"
    sender: int
    receiver: int
    payload: Payload

    def __post_init__(self) -> None:
        if self.kind not in ("broadcast", "unicast"):
            raise ValueError(f"unknown message kind {self.kind!r}")
        if self.kind == "unicast" and self.receiver < 0:
            raise ValueError("unicast needs a concrete receiver")
        if not isinstance(self.payload, PAYLOAD_KINDS):
            raise TypeError(f"unsupported payload {self.payload!r}")

    def to_json(self) -> dict[str, Any]:
        data = {k: v for k, v in vars(self.payload).items()}
        return {"mode": self.kind, "sender": self.sender, "receiver": self.receiver,
                "payload": type(self.payload).__name__, **data}


def broadcast(sender: int, payload: Payload) -> Message:
    return Message("broadcast", sender, ALL, payload)


def unicast(sender: int, receiver: int, payload: Payload) -> Message:
    return Message("unicast", sender, receiver, payload)


@dataclass
class ControllerOutput:
    cmd: VelocityCmd
    led: LedColor
    outgoing: list[Message] = field(default_factory=list)
    memory: Any = None
