"""Per-robot path-formation state machine.

Robots explore away from the nest, freeze as static subgoals at a fixed spacing
from a beacon (the goal or an earlier subgoal), fall back to a recovery beacon
when they lose sight of it, and finally straighten the finished chain with two
alignment passes: nest to goal, then goal to nest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from typing import NamedTuple

from .arena import SimParams
from .geometry import Point2, nearest_point_on_segment, normalize_angle
from .messages import ControllerOutput
from .robot import STOP, LedColor, Percept, VelocityCmd

GOAL = -1
NEST = -2
BLOCKED_TURN_AFTER = 3


class PfState(IntEnum):
    RESTING = 0
    EXPLORING = 1
    RETURN_TO_NEST = 2
    SUBGOAL = 3
    DECISION_MAKING = 4
    RECOVERY = 5
    OPTIMIZATION1 = 6
    OPTIMIZATION2 = 7


S = PfState
PF_EDGES: dict[str, frozenset] = {
    "a": frozenset({(S.EXPLORING, S.RESTING), (S.RETURN_TO_NEST, S.RESTING),
                    (S.SUBGOAL, S.RESTING), (S.RECOVERY, S.RESTING)}),
    "b": frozenset({(S.EXPLORING, S.RETURN_TO_NEST)}),
    "c": frozenset({(S.EXPLORING, S.SUBGOAL)}),
    "d": frozenset({(S.RETURN_TO_NEST, S.RESTING)}),
    "e": frozenset({(S.EXPLORING, S.SUBGOAL)}),
    "f": frozenset({(S.SUBGOAL, S.RECOVERY), (S.OPTIMIZATION1, S.RECOVERY),
                    (S.OPTIMIZATION2, S.RECOVERY)}),
    "g": frozenset({(S.SUBGOAL, S.OPTIMIZATION1)}),
    "h": frozenset({(S.OPTIMIZATION1, S.OPTIMIZATION2)}),
    "i": frozenset({(S.RESTING, S.EXPLORING)}),
    "j": frozenset({(S.EXPLORING, S.DECISION_MAKING)}),
    "k": frozenset({(S.RETURN_TO_NEST, S.DECISION_MAKING)}),
}


def pf_edge_ok(src: PfState, dst: PfState, label: str | None) -> bool:
    if src == dst:
        return True
    return label in PF_EDGES and (src, dst) in PF_EDGES[label]


@dataclass(slots=True)
class PfMemory:
    state: PfState = PfState.EXPLORING
    explore_ticks: int = 0
    max_explore_ticks: float = 1000.0
    tracked_beacon: int | None = None
    track_range: float = 0.0
    track_bearing: float = 0.0
    forming: bool = False
    froze: bool = False
    rest_ticks_left: int = 0
    is_subnest: bool = False
    opt1_done: bool = False
    opt2_done: bool = False
    nest_side: int | None = None
    deployment_point: Point2 | None = None
    founder_goal: Point2 | None = None
    recruit: bool = False
    blocked_ticks: int = 0
    stall_ticks: int = 0
    label: str | None = None


class AlignmentGeometry(NamedTuple):
    theta1: float
    theta2: float
    x: float
    y: float


class NeighborLost(Exception):
    pass


def initial_memory(params: SimParams, deployment_point: Point2 | None = None) -> PfMemory:
    return PfMemory(max_explore_ticks=float(params.max_explore_ticks),
                    deployment_point=deployment_point)


# ---------------------------------------------------------------- helpers

def _heading_to(p: Point2, q) -> float:
    return math.atan2(q[1] - p[1], q[0] - p[0])


def _steer(percept: Percept, world_heading: float, params: SimParams,
           linear: float | None = None) -> VelocityCmd:
    ang = normalize_angle(world_heading - percept.heading)
    return VelocityCmd.clamped(params.robot_speed if linear is None else linear, ang, params)


def _avoid(percept: Percept, angular: float, params: SimParams) -> float:
    """Turn away from a close proximity reading ahead of the robot."""
    r = percept.prox_range
    if r <= params.proximity_range:
        b = percept.prox_bearing
        if abs(b) < math.pi / 2:
            return b - math.copysign(math.pi / 2, b)
    return angular


def recovery_repulsion(percept: Percept, params: SimParams) -> VelocityCmd | None:
    """Steer straight away from the nearest recovery robot when it is close."""
    hit = percept.nearest(LedColor.MAGENTA)
    if hit is None:
        return None
    j, rng = hit
    if rng >= params.repulsion_range + params.robot_speed:
        return None
    ang = normalize_angle(percept.bearing_to(j) + math.pi)
    return VelocityCmd.clamped(params.robot_speed, ang, params)


def make_way(percept: Percept, params: SimParams) -> VelocityCmd | None:
    """An idle robot steps straight away from a nearby active robot: an aligning
    robot within the repulsion range, or a moving one within proximity range."""
    hit = percept.nearest(LedColor.PURPLE)
    if hit is None or hit[1] >= params.repulsion_range:
        hit = percept.nearest(LedColor.WHITE, LedColor.GREEN, LedColor.YELLOW)
        if hit is None or hit[1] >= params.proximity_range:
            return None
    ang = normalize_angle(percept.bearing_to(hit[0]) + math.pi)
    return VelocityCmd.clamped(params.robot_speed, ang, params)


def explore_policy(memory: PfMemory | None, percept: Percept, params: SimParams, rng) -> VelocityCmd:
    """Correlated random walk with a weak drift away from the nest."""
    h = percept.heading
    p = percept.position
    nx, ny = percept.s.nest
    ax, ay = p[0] - nx, p[1] - ny
    norm = math.hypot(ax, ay)
    if norm > 0.0:
        ax, ay = ax / norm, ay / norm
    else:
        ax, ay = math.cos(h), math.sin(h)
    w = params.explore_drift
    vx = w * ax + (1.0 - w) * math.cos(h)
    vy = w * ay + (1.0 - w) * math.sin(h)
    jitter = rng.uniform(-params.explore_jitter, params.explore_jitter) if params.explore_jitter > 0 else 0.0
    desired = math.atan2(vy, vx) + jitter
    ang = normalize_angle(desired - h)
    ang = _avoid(percept, ang, params)
    return VelocityCmd.clamped(params.robot_speed, ang, params)


def _goal_cmd(percept: Percept, target, params: SimParams) -> VelocityCmd:
    ang = normalize_angle(_heading_to(percept.position, target) - percept.heading)
    ang = _avoid(percept, ang, params)
    return VelocityCmd.clamped(params.robot_speed, ang, params)


def _nest_dist(q, nest) -> float:
    return math.hypot(q[0] - nest[0], q[1] - nest[1])


def _is_frontier(percept: Percept, beacon_pos, params: SimParams, skip: int) -> bool:
    """True when no subgoal (forming or static) already sits nest-side of the beacon."""
    ids = percept.ids_with(LedColor.WHITE, LedColor.RED)
    if len(ids) == 0:
        return True
    nest = percept.s.nest
    db = _nest_dist(beacon_pos, nest)
    for j in ids:
        j = int(j)
        if j == skip:
            continue
        q = percept.position_of(j)
        if _nest_dist(q, nest) < db and math.hypot(q[0] - beacon_pos[0], q[1] - beacon_pos[1]) <= params.max_visible_range:
            return False
    return True


def _beacon_visible(memory: PfMemory, percept: Percept) -> bool:
    b = memory.tracked_beacon
    if b == GOAL:
        return percept.goal_visible
    if b is None or b < 0:
        return False
    return percept.visible(b)


def _beacon_reading(memory: PfMemory, percept: Percept) -> tuple[float, float]:
    b = memory.tracked_beacon
    if b == GOAL:
        return percept.goal_range, percept.goal_bearing
    return percept.range_to(b), percept.bearing_to(b)


def _go(memory: PfMemory, state: PfState, label: str) -> None:
    memory.state = state
    memory.label = label


def _to_resting(memory: PfMemory, params: SimParams, label: str) -> ControllerOutput:
    _go(memory, PfState.RESTING, label)
    memory.rest_ticks_left = max(1, params.rest_duration)
    memory.tracked_beacon = None
    memory.forming = False
    memory.nest_side = None
    return ControllerOutput(STOP, LedColor.OFF, [], memory)


def _to_recovery(memory: PfMemory) -> ControllerOutput:
    _go(memory, PfState.RECOVERY, "f")
    memory.tracked_beacon = None
    memory.forming = False
    return ControllerOutput(STOP, LedColor.MAGENTA, [], memory)


def _start_subgoal(memory: PfMemory, percept: Percept, beacon: int, label: str,
                   params: SimParams, rng) -> ControllerOutput:
    _go(memory, PfState.SUBGOAL, label)
    memory.tracked_beacon = beacon
    memory.forming = True
    memory.blocked_ticks = 0
    memory.founder_goal = None
    return _forming(memory, percept, params, rng)


# ---------------------------------------------------------------- sub-operations

def subgoal_join(memory: PfMemory, percept: Percept, params: SimParams,
                 rng=None) -> tuple[VelocityCmd, bool]:
    """Back away from the tracked beacon towards the nest until the spacing is reached."""
    rng_b, brg_b = _beacon_reading(memory, percept)
    memory.track_range, memory.track_bearing = rng_b, brg_b
    if rng_b >= params.subgoal_spacing:
        return STOP, True
    p = percept.position
    a = percept.heading + brg_b
    bx, by = p[0] + rng_b * math.cos(a), p[1] + rng_b * math.sin(a)
    nx, ny = percept.s.nest
    ux, uy = nx - bx, ny - by
    un = math.hypot(ux, uy)
    vx, vy = p[0] - bx, p[1] - by
    vn = math.hypot(vx, vy)
    dx = (2.0 * ux / un if un > 0 else 0.0) + (vx / vn if vn > 0 else 0.0)
    dy = (2.0 * uy / un if un > 0 else 0.0) + (vy / vn if vn > 0 else 0.0)
    if dx == 0.0 and dy == 0.0:
        dx, dy = math.cos(percept.heading), math.sin(percept.heading)
    ang = normalize_angle(math.atan2(dy, dx) - percept.heading)
    if rng is not None:
        memory.blocked_ticks = 0 if percept.moved else memory.blocked_ticks + 1
        if memory.blocked_ticks > BLOCKED_TURN_AFTER:
            ang = normalize_angle(ang + rng.uniform(-math.pi / 2, math.pi / 2))
    return VelocityCmd.clamped(params.robot_speed, ang, params), False


def _forming(memory: PfMemory, percept: Percept, params: SimParams, rng) -> ControllerOutput:
    if not _beacon_visible(memory, percept):
        return _to_recovery(memory)
    cmd, became = subgoal_join(memory, percept, params, rng)
    if became:
        memory.forming = False
        memory.froze = True
        return ControllerOutput(STOP, LedColor.RED, [], memory)
    rep = recovery_repulsion(percept, params)
    return ControllerOutput(rep or cmd, LedColor.WHITE, [], memory)


def alignment_geometry(percept: Percept, memory: PfMemory) -> AlignmentGeometry:
    """Bearings and ranges to the goal-side (tracked) and nest-side neighbours."""
    g = memory.tracked_beacon
    if g == GOAL:
        if not percept.goal_visible:
            raise NeighborLost("goal-side neighbour lost")
        th1, x = percept.goal_bearing, percept.goal_range
    elif g is not None and g >= 0 and percept.visible(g):
        th1, x = percept.bearing_to(g), percept.range_to(g)
    else:
        raise NeighborLost("goal-side neighbour lost")
    n = memory.nest_side
    if n == NEST:
        if not percept.nest_visible:
            raise NeighborLost("nest-side neighbour lost")
        th2, y = percept.nest_bearing, percept.nest_range
    elif n is not None and n >= 0 and percept.visible(n):
        th2, y = percept.bearing_to(n), percept.range_to(n)
    else:
        raise NeighborLost("nest-side neighbour lost")
    return AlignmentGeometry(th1, th2, x, y)


def alignment_error(geom: AlignmentGeometry) -> float:
    return abs(math.pi - abs(normalize_angle(geom.theta1 - geom.theta2)))


def optimization_step(geom: AlignmentGeometry, params: SimParams,
                      direction: PfState = PfState.OPTIMIZATION1,
                      heading: float = 0.0) -> tuple[VelocityCmd, bool]:
    """Move towards the closest point of the chord joining the two neighbours.

    Positions are expressed in the robot frame (robot at the origin, heading
    ``heading``), so only the relative geometry matters. The target is kept a
    body length away from either neighbour.
    """
    if alignment_error(geom) <= params.opt_error_tolerance:
        return STOP, True
    a1 = heading + geom.theta1
    a2 = heading + geom.theta2
    A = (geom.x * math.cos(a1), geom.x * math.sin(a1))
    B = (geom.y * math.cos(a2), geom.y * math.sin(a2))
    L = math.hypot(B[0] - A[0], B[1] - A[1])
    margin = 2.0 * params.robot_radius + 0.5
    if L <= 2.0 * margin:
        T = ((A[0] + B[0]) / 2.0, (A[1] + B[1]) / 2.0)
    else:
        F = nearest_point_on_segment((0.0, 0.0), A, B)
        t = math.hypot(F[0] - A[0], F[1] - A[1])
        t = min(max(t, margin), L - margin)
        T = (A[0] + (B[0] - A[0]) * t / L, A[1] + (B[1] - A[1]) * t / L)
    dist = math.hypot(T[0], T[1])
    if dist < 1e-12:
        return STOP, True
    ang = normalize_angle(math.atan2(T[1], T[0]) - heading)
    return VelocityCmd.clamped(min(params.robot_speed, dist), ang, params), False


def cascade_handoff(memory: PfMemory, percept: Percept, params: SimParams) -> PfState | None:
    """Decide whether a static subgoal starts the first alignment pass (g), or
    a finished first-pass robot starts the second one (h)."""
    nest = percept.s.nest
    if memory.state == PfState.SUBGOAL and not memory.forming:
        if not _beacon_visible(memory, percept):
            return None
        me = _nest_dist(percept.position, nest)
        for j in percept.ids_with(LedColor.PURPLE):
            if _nest_dist(percept.position_of(int(j)), nest) < me:
                return None
        best = None
        for j in percept.ids_with(LedColor.BLUE):
            j = int(j)
            if _nest_dist(percept.position_of(j), nest) < me:
                key = (percept.range_to(j), j)
                if best is None or key < best:
                    best = key
        if best is not None:
            memory.nest_side = best[1]
            return PfState.OPTIMIZATION1
        if not percept.nest_visible:
            return None
        for j in percept.ids_with(LedColor.RED):
            dq = _nest_dist(percept.position_of(int(j)), nest)
            if dq < me and dq <= params.max_visible_range:
                return None
        memory.nest_side = NEST
        return PfState.OPTIMIZATION1
    if memory.state == PfState.OPTIMIZATION1 and memory.opt1_done:
        g = memory.tracked_beacon
        if g == GOAL:
            return PfState.OPTIMIZATION2 if percept.goal_visible else None
        if g is not None and g >= 0 and percept.led_of(g) == LedColor.CYAN:
            return PfState.OPTIMIZATION2
    return None


# ---------------------------------------------------------------- dispatcher

def pf_step(memory: PfMemory, percept: Percept, inbox, params: SimParams, rng) -> ControllerOutput:
    """One control tick. ``memory`` is updated in place and returned in the output."""
    memory.label = None
    st = memory.state
    done_path = percept.path_complete

    if st == PfState.RESTING:
        if not done_path:
            memory.rest_ticks_left -= 1
            if memory.rest_ticks_left <= 0:
                _go(memory, PfState.EXPLORING, "i")
                memory.rest_ticks_left = 0
                memory.explore_ticks = 0
                return ControllerOutput(explore_policy(memory, percept, params, rng),
                                        LedColor.GREEN, [], memory)
        return ControllerOutput(make_way(percept, params) or STOP, LedColor.OFF, [], memory)

    if st == PfState.EXPLORING:
        if done_path:
            return _to_resting(memory, params, "a")
        dr = params.detect_range
        if memory.founder_goal is not None:
            if percept.goal_visible and percept.goal_range <= dr:
                return _start_subgoal(memory, percept, GOAL, "c", params, rng)
        else:
            if (percept.goal_visible and percept.goal_range <= dr
                    and _is_frontier(percept, percept.s.goal, params, -1)):
                return _start_subgoal(memory, percept, GOAL, "c", params, rng)
            hit = percept.nearest(LedColor.RED)
            if hit is not None and hit[1] <= dr and _is_frontier(percept, percept.position_of(hit[0]), params, hit[0]):
                return _start_subgoal(memory, percept, hit[0], "e", params, rng)
        memory.explore_ticks += 1
        if memory.founder_goal is None and memory.explore_ticks > memory.max_explore_ticks:
            _go(memory, PfState.RETURN_TO_NEST, "b")
            memory.max_explore_ticks *= 1.0 + params.explore_time_increment
            return ControllerOutput(_goal_cmd(percept, percept.s.nest, params),
                                    LedColor.YELLOW, [], memory)
        rep = recovery_repulsion(percept, params)
        if memory.founder_goal is not None:
            cmd = rep or _goal_cmd(percept, memory.founder_goal, params)
            return ControllerOutput(cmd, LedColor.WHITE, [], memory)
        cmd = explore_policy(memory, percept, params, rng)
        if memory.recruit and rep is None:
            lead = percept.nearest(LedColor.WHITE)
            if lead is not None and lead[1] > params.follow_standoff:
                ang = _avoid(percept, percept.bearing_to(lead[0]), params)
                cmd = VelocityCmd.clamped(params.robot_speed, ang, params)
        return ControllerOutput(rep or cmd, LedColor.GREEN, [], memory)

    if st == PfState.RETURN_TO_NEST:
        if done_path:
            return _to_resting(memory, params, "a")
        if percept.nest_range <= percept.s.nest_radius:
            return _to_resting(memory, params, "d")
        rep = recovery_repulsion(percept, params)
        return ControllerOutput(rep or _goal_cmd(percept, percept.s.nest, params),
                                LedColor.YELLOW, [], memory)

    if st == PfState.SUBGOAL:
        if memory.forming:
            if done_path:
                return _to_resting(memory, params, "a")
            return _forming(memory, percept, params, rng)
        if not _beacon_visible(memory, percept):
            return _to_recovery(memory)
        if done_path:
            nxt = cascade_handoff(memory, percept, params)
            if nxt == PfState.OPTIMIZATION1:
                _go(memory, nxt, "g")
                memory.stall_ticks = 0
                return _optimize(memory, percept, params)
        return ControllerOutput(STOP, LedColor.RED, [], memory)

    if st == PfState.RECOVERY:
        if done_path:
            return _to_resting(memory, params, "a")
        return ControllerOutput(STOP, LedColor.MAGENTA, [], memory)

    if st == PfState.OPTIMIZATION1:
        if memory.opt1_done:
            if not _beacon_visible(memory, percept):
                return _to_recovery(memory)
            if cascade_handoff(memory, percept, params) == PfState.OPTIMIZATION2:
                _go(memory, PfState.OPTIMIZATION2, "h")
                memory.stall_ticks = 0
                return _optimize(memory, percept, params)
            return ControllerOutput(STOP, LedColor.BLUE, [], memory)
        return _optimize(memory, percept, params)

    if st == PfState.OPTIMIZATION2:
        if memory.opt2_done:
            return ControllerOutput(STOP, LedColor.CYAN, [], memory)
        return _optimize(memory, percept, params)

    # DecisionMaking is only reachable through edges the controller never takes.
    return ControllerOutput(STOP, LedColor.ORANGE, [], memory)


def _optimize(memory: PfMemory, percept: Percept, params: SimParams) -> ControllerOutput:
    try:
        geom = alignment_geometry(percept, memory)
    except NeighborLost:
        return _to_recovery(memory)
    cmd, done = optimization_step(geom, params, memory.state, percept.heading)
    if not done:
        memory.stall_ticks = 0 if percept.moved else memory.stall_ticks + 1
        if memory.stall_ticks > params.opt_stall_ticks:
            done = True
    if done:
        if memory.state == PfState.OPTIMIZATION1:
            memory.opt1_done = True
            memory.is_subnest = True
            return ControllerOutput(STOP, LedColor.BLUE, [], memory)
        memory.opt2_done = True
        return ControllerOutput(STOP, LedColor.CYAN, [], memory)
    return ControllerOutput(cmd, LedColor.PURPLE, [], memory)
