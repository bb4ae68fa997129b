"""Task-allocation state machine: goal discovery, path-length estimate, robot
count, the recruit protocol, and homing of excused robots to their home cell."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum

from .arena import SimParams
from .geometry import Point2, distance, homing_direction, normalize_angle
from .messages import (Ack, ControllerOutput, GoalFoundInfo, Message, RecruitRequest, RestOrder,
                       Volunteer, broadcast, unicast)
from .pathformation import _goal_cmd, explore_policy, make_way, recovery_repulsion
from .robot import STOP, LedColor, Percept, Pose, VelocityCmd


class TaState(IntEnum):
    EXPLORING = 0
    RETURN_TO_NEST = 1
    DECISION_MAKING = 2
    INITIATE_TASK = 3
    RESTING = 4


T = TaState
TA_EDGES: dict[str, frozenset] = {
    "a": frozenset({(T.RETURN_TO_NEST, T.EXPLORING)}),
    "b": frozenset({(T.EXPLORING, T.RETURN_TO_NEST)}),
    "c": frozenset({(T.EXPLORING, T.RETURN_TO_NEST), (T.RETURN_TO_NEST, T.DECISION_MAKING)}),
    "d": frozenset({(T.DECISION_MAKING, T.RESTING)}),
    "e": frozenset({(T.DECISION_MAKING, T.INITIATE_TASK)}),
    "f": frozenset({(T.EXPLORING, T.DECISION_MAKING), (T.RETURN_TO_NEST, T.DECISION_MAKING)}),
}


def ta_edge_ok(src: TaState, dst: TaState, label: str | None) -> bool:
    if src == dst:
        return True
    return label in TA_EDGES and (src, dst) in TA_EDGES[label]


# ---------------------------------------------------------------- estimates

def estimate_path_length(t: float, s: float) -> float:
    if t < 0 or not s > 0:
        raise ValueError("need t >= 0 and s > 0")
    return s * t


def required_robots(l: float, v: float) -> float:
    if l < 0 or not v > 0:
        raise ValueError("need l >= 0 and v > 0")
    return l / v


def allocated_robots(l: float, v: float, delta: int) -> int:
    if delta < 0:
        raise ValueError("delta must be >= 0")
    return int(math.ceil(required_robots(l, v))) + int(delta)


@dataclass(frozen=True)
class AllocationEstimate:
    explore_time: float
    speed: float
    path_length: float
    visual_range: float
    n0: float
    delta: int
    n: int

    @staticmethod
    def compute(t: float, s: float, v: float, delta: int) -> "AllocationEstimate":
        l = estimate_path_length(t, s)
        return AllocationEstimate(t, s, l, v, required_robots(l, v), delta, allocated_robots(l, v, delta))


# ---------------------------------------------------------------- protocol

@dataclass
class RecruitLedger:
    needed: int
    acked_ids: list[int] = field(default_factory=list)
    declined_ids: list[int] = field(default_factory=list)
    closed: bool = False
    quiet_ticks: int = 0


def recruit_founder(ledger: RecruitLedger, inbox: list[Message], me: int = 0,
                    explore_time: int = 0, patience: int | None = None) -> tuple[list[Message], RecruitLedger]:
    """One founder tick: acknowledge volunteers in ascending id order until
    enough are acked, then order everybody else to rest and close."""
    if ledger.closed:
        return [], ledger
    out: list[Message] = []
    seen = set(ledger.acked_ids) | set(ledger.declined_ids)
    vols = sorted({m.payload.id for m in inbox
                   if isinstance(m.payload, Volunteer) and m.receiver == me} - seen)
    for v in vols:
        if len(ledger.acked_ids) < ledger.needed:
            ledger.acked_ids.append(v)
            out.append(unicast(me, v, Ack(v)))
        else:
            ledger.declined_ids.append(v)
    ledger.quiet_ticks = 0 if vols else ledger.quiet_ticks + 1
    timed_out = patience is not None and ledger.quiet_ticks > patience
    if len(ledger.acked_ids) >= ledger.needed or timed_out:
        out.append(broadcast(me, RestOrder()))
        ledger.closed = True
    else:
        out.append(broadcast(me, GoalFoundInfo(explore_time)))
        out.append(broadcast(me, RecruitRequest(ledger.needed - len(ledger.acked_ids))))
    return out, ledger


@dataclass(slots=True)
class TaMemory:
    state: TaState = TaState.EXPLORING
    explore_ticks: int = 0
    min_explore_time: float = 500.0
    founder: bool = False
    goal_pos: Point2 | None = None
    explore_time: int = 0
    required: int = 0
    ledger: RecruitLedger | None = None
    volunteered: bool = False
    known_explore_time: int | None = None
    deployment_point: Point2 | None = None
    label: str | None = None


def initial_memory(params: SimParams, deployment_point: Point2 | None = None) -> TaMemory:
    return TaMemory(min_explore_time=float(params.min_explore_time), deployment_point=deployment_point)


def recruit_worker(memory: TaMemory, inbox: list[Message], me: int) -> tuple[list[Message], str | None]:
    """Worker reaction inside DecisionMaking. Returns messages and the edge
    label taken (``"e"`` for an Ack, ``"d"`` for a RestOrder, else None)."""
    for m in inbox:
        if isinstance(m.payload, Ack) and m.payload.id == me and m.receiver == me:
            return [], "e"
    if any(isinstance(m.payload, RestOrder) for m in inbox):
        return [], "d"
    if not memory.volunteered:
        senders = sorted(m.sender for m in inbox if isinstance(m.payload, RecruitRequest))
        if senders:
            memory.volunteered = True
            return [unicast(me, senders[0], Volunteer(me))], None
    return [], None


def homing_field(current: Pose, deployment: Point2, params: SimParams) -> VelocityCmd:
    """Turn towards the home cell and advance; idle once within half a body radius."""
    p = current.position
    d = distance(deployment, p)
    if d <= params.robot_radius / 2.0:
        return STOP
    desired = homing_direction(deployment, p)
    return VelocityCmd.clamped(min(params.robot_speed, d), normalize_angle(desired - current.heading), params)


def _go(memory: TaMemory, state: TaState, label: str) -> None:
    memory.state = state
    memory.label = label


RELAY_TRIGGER = (int(LedColor.YELLOW), int(LedColor.ORANGE), int(LedColor.WHITE))


def _relay(me: int, memory: TaMemory, percept: Percept, params: SimParams) -> list[Message]:
    """Resting robots near the nest repeat the outcome for latecomers; only
    the lowest-id resting robot in view does so."""
    s = percept.s
    if memory.known_explore_time is None:
        return []
    off = percept.ids_with(LedColor.OFF)
    if len(off) and int(off[0]) < me:
        return []
    row = s.rng[me]
    led = s.led
    near = False
    for c in RELAY_TRIGGER:
        mask = (led == c) & (row <= params.comm_range)
        mask[me] = False
        if mask.any():
            near = True
            break
    if not near:
        return []
    return [broadcast(me, GoalFoundInfo(memory.known_explore_time)), broadcast(me, RestOrder())]


def ta_step(memory: TaMemory, percept: Percept, inbox: list[Message], params: SimParams,
            rng=None, me: int = 0, delta: int | None = None) -> ControllerOutput:
    """One allocation tick; ``memory`` is updated in place."""
    memory.label = None
    st = memory.state
    dr = params.detect_range
    info = [m.payload for m in inbox if isinstance(m.payload, GoalFoundInfo)]
    if info:
        memory.known_explore_time = info[0].explore_time

    if st == TaState.EXPLORING:
        if info:
            _go(memory, TaState.DECISION_MAKING, "f")
            return _decision(memory, percept, [], params, me, delta)
        if percept.goal_visible and percept.goal_range <= dr:
            _go(memory, TaState.RETURN_TO_NEST, "c")
            memory.founder = True
            memory.explore_time = memory.explore_ticks
            memory.goal_pos = percept.s.goal
            return ControllerOutput(_goal_cmd(percept, percept.s.nest, params), LedColor.WHITE, [], memory)
        memory.explore_ticks += 1
        if memory.explore_ticks > memory.min_explore_time:
            _go(memory, TaState.RETURN_TO_NEST, "b")
            memory.min_explore_time *= 1.0 + params.explore_time_increment
            return ControllerOutput(_goal_cmd(percept, percept.s.nest, params), LedColor.YELLOW, [], memory)
        rep = recovery_repulsion(percept, params)
        return ControllerOutput(rep or explore_policy(None, percept, params, rng), LedColor.GREEN, [], memory)

    if st == TaState.RETURN_TO_NEST:
        if info:
            memory.founder = False
            _go(memory, TaState.DECISION_MAKING, "f")
            return _decision(memory, percept, [], params, me, delta)
        if percept.nest_range <= percept.s.nest_radius:
            if memory.founder:
                _go(memory, TaState.DECISION_MAKING, "c")
                est = AllocationEstimate.compute(memory.explore_time, params.robot_speed,
                                                 params.visual_range, params.delta if delta is None else delta)
                memory.required = est.n
                memory.ledger = RecruitLedger(needed=max(0, est.n - 1))
                return _decision(memory, percept, [], params, me, delta)
            _go(memory, TaState.EXPLORING, "a")
            memory.explore_ticks = 0
            return ControllerOutput(explore_policy(None, percept, params, rng), LedColor.GREEN, [], memory)
        rep = recovery_repulsion(percept, params)
        led = LedColor.WHITE if memory.founder else LedColor.YELLOW
        return ControllerOutput(rep or _goal_cmd(percept, percept.s.nest, params), led, [], memory)

    if st == TaState.DECISION_MAKING:
        return _decision(memory, percept, inbox, params, me, delta)

    if st == TaState.RESTING:
        cmd = make_way(percept, params)
        if cmd is None and memory.deployment_point is not None:
            cmd = homing_field(percept.self_pose, memory.deployment_point, params)
        return ControllerOutput(cmd, LedColor.OFF, _relay(me, memory, percept, params), memory)

    return ControllerOutput(STOP, LedColor.GREEN, [], memory)


def _decision(memory: TaMemory, percept: Percept, inbox: list[Message], params: SimParams,
              me: int, delta) -> ControllerOutput:
    if memory.founder and memory.ledger is not None:
        rivals = [m for m in inbox if isinstance(m.payload, RestOrder)
                  or (isinstance(m.payload, RecruitRequest) and m.sender < me)]
        if rivals and not memory.ledger.acked_ids:
            memory.founder = False
            memory.ledger = None
        else:
            out, _ = recruit_founder(memory.ledger, inbox, me, memory.explore_time,
                                     patience=params.recruit_patience)
            if memory.ledger.closed:
                _go(memory, TaState.INITIATE_TASK, "e")
                return ControllerOutput(STOP, LedColor.WHITE, out, memory)
            return ControllerOutput(STOP, LedColor.ORANGE, out, memory)
    out, label = recruit_worker(memory, inbox, me)
    if label == "e":
        _go(memory, TaState.INITIATE_TASK, "e")
        return ControllerOutput(STOP, LedColor.GREEN, out, memory)
    if label == "d":
        _go(memory, TaState.RESTING, "d")
        return ControllerOutput(STOP, LedColor.OFF, out, memory)
    cmd = STOP
    if percept.nest_range > percept.s.nest_radius:
        cmd = _goal_cmd(percept, percept.s.nest, params)
    return ControllerOutput(cmd, LedColor.ORANGE, out, memory)
