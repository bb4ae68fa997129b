"""Deterministic lock-step simulation loop with event tracing.

Each tick: freeze a snapshot, perceive for every robot in one batched kernel
call, deliver last tick's messages, step controllers in ascending id order,
resolve motion in ascending id order, advance the clock, then check whether a
chain stage has just become extractable.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import kernels
from .allocation import TaMemory, TaState, ta_step
from .allocation import initial_memory as ta_initial_memory
from .arena import ArenaConfig, Scenario, SimParams, scenario_to_dict
from .chain import STAGE_COLOR, STAGES, ChainIncomplete, chain_from_arrays
from .messages import (ALL, Ack, ControllerOutput, GoalFoundInfo, Message, RecruitRequest,  # noqa: F401
                       RestOrder, Volunteer)
from .pathformation import PfMemory, pf_step
from .pathformation import initial_memory as pf_initial_memory
from .robot import LedColor, Percept, Snapshot, take_snapshot

RNG_BUFFER = 64


class RobotRng:
    """Per-robot uniform stream over PCG64 seeded with ``SeedSequence([seed, robot_id])``.

    Draws are buffered in blocks; the values are the same as calling
    ``Generator.random()`` one at a time.
    """

    __slots__ = ("_gen", "_buf", "_k")

    def __init__(self, seed: int, robot_id: int):
        self._gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(robot_id)])))
        self._buf = self._gen.random(RNG_BUFFER)
        self._k = 0

    def random(self) -> float:
        if self._k == RNG_BUFFER:
            self._buf = self._gen.random(RNG_BUFFER)
            self._k = 0
        v = self._buf[self._k]
        self._k += 1
        return float(v)

    def uniform(self, a: float, b: float) -> float:
        return a + (b - a) * self.random()


def seeded_rng(seed: int, robot_id: int) -> RobotRng:
    return RobotRng(seed, robot_id)


@dataclass
class World:
    tick: int
    arena: ArenaConfig
    params: SimParams
    pos: np.ndarray
    heading: np.ndarray
    led: np.ndarray
    moved: np.ndarray
    kinds: list[str]
    memories: list[Any]
    rngs: list[RobotRng]
    message_queue: list[Message] = field(default_factory=list)
    allocation: bool = False
    delta: int = 0
    obstacles: np.ndarray = field(default_factory=lambda: np.zeros((0, 4)))
    path_complete: bool = False
    stage_tick: dict = field(default_factory=dict)
    stage_chain: dict = field(default_factory=dict)
    initiated: list[int] = field(default_factory=list)
    required_n: int | None = None
    scenario_name: str = ""
    seed: int = 0
    _snap: Snapshot | None = None

    @property
    def n(self) -> int:
        return self.pos.shape[0]

    def snapshot(self) -> Snapshot:
        if self._snap is None or self._snap.tick != self.tick:
            self._snap = take_snapshot(self.tick, self.pos, self.heading, self.led, self.moved,
                                       self.arena, self.params, self.path_complete, self.obstacles)
        return self._snap

    def state_name(self, i: int) -> str:
        return f"{self.kinds[i]}:{self.memories[i].state.name}"


def make_world(scenario: Scenario, seed: int, robot_count: int | None = None,
               allocation: bool = False) -> World:
    arena = scenario.arena
    count = scenario.robot_count if robot_count is None else robot_count
    if count > len(arena.deployment_points):
        raise ValueError(f"{count} robots but only {len(arena.deployment_points)} deployment points")
    delta = scenario.params.delta_for(arena.environment_class)
    params = dataclasses.replace(scenario.params, delta=delta)
    pts = np.array(arena.deployment_points[:count], dtype=float).reshape(count, 2)
    rngs = [seeded_rng(seed, i) for i in range(count)]
    heading = np.array([r.uniform(-math.pi, math.pi) for r in rngs], dtype=float)
    kinds, mems = [], []
    for i in range(count):
        dp = arena.deployment_points[i]
        if allocation:
            kinds.append("ta")
            mems.append(ta_initial_memory(params, dp))
        else:
            kinds.append("pf")
            mems.append(pf_initial_memory(params, dp))
    led = np.full(count, int(LedColor.GREEN), dtype=np.int64)
    return World(tick=0, arena=arena, params=params, pos=pts, heading=heading.astype(float), led=led,
                 moved=np.ones(count, dtype=bool), kinds=kinds, memories=mems,
                 rngs=rngs, allocation=allocation,
                 delta=delta, obstacles=np.ascontiguousarray(arena.obstacle_array(), dtype=float),
                 scenario_name=scenario.name, seed=seed)


def deliver(queue: list[Message], rng: np.ndarray, comm_range: float, n: int) -> list[list[Message]]:
    """Route last tick's messages. Broadcasts reach every robot within range of
    the sender; a unicast reaches its receiver only if it is within range."""
    inbox: list[list[Message]] = [[] for _ in range(n)]
    for m in queue:
        if m.kind == "broadcast":
            for j in np.nonzero(rng[m.sender] <= comm_range)[0]:
                if j != m.sender:
                    inbox[j].append(m)
        elif 0 <= m.receiver < n and rng[m.sender, m.receiver] <= comm_range:
            inbox[m.receiver].append(m)
    return inbox


def _switch_to_pf(world: World, i: int, ta: TaMemory) -> PfMemory:
    mem = pf_initial_memory(world.params, ta.deployment_point)
    if ta.founder and ta.goal_pos is not None:
        mem.founder_goal = ta.goal_pos
        world.required_n = ta.required
    else:
        mem.recruit = True
    world.initiated.append(i)
    return mem


def step(world: World, events: list | None = None) -> tuple[World, list]:
    """Advance one tick in place; returns the world and the events produced."""
    if events is None:
        events = []
    t = world.tick
    p = world.params
    n = world.n
    snap = world.snapshot()
    inbox = deliver(world.message_queue, snap.rng, p.comm_range, n)
    outgoing: list[Message] = []
    lin = np.zeros(n)
    ang = np.zeros(n)
    new_led = world.led.copy()
    for i in range(n):
        percept = Percept(i, snap)
        mem = world.memories[i]
        kind = world.kinds[i]
        before = mem.state
        if kind == "pf":
            out: ControllerOutput = pf_step(mem, percept, inbox[i], p, world.rngs[i])
        else:
            out = ta_step(mem, percept, inbox[i], p, world.rngs[i], me=i, delta=world.delta)
        mem = out.memory
        if mem.state != before:
            events.append({"tick": t, "robot": i, "kind": "transition", "fsm": kind,
                           "from": before.name, "to": mem.state.name, "label": mem.label})
        if kind == "pf" and mem.froze:
            mem.froze = False
            events.append({"tick": t, "robot": i, "kind": "freeze", "beacon": mem.tracked_beacon,
                           "range": mem.track_range})
        if kind == "ta" and mem.state == TaState.INITIATE_TASK:
            world.memories[i] = _switch_to_pf(world, i, mem)
            world.kinds[i] = "pf"
            events.append({"tick": t, "robot": i, "kind": "switch", "founder": bool(mem.founder)})
        else:
            world.memories[i] = mem
        for m in out.outgoing:
            events.append({"tick": t, "robot": i, "kind": "msg", **m.to_json()})
        outgoing.extend(out.outgoing)
        lin[i] = out.cmd.linear
        ang[i] = out.cmd.angular
        new_led[i] = int(out.led)
    if n:
        new_pos, new_h, moved = kernels.move_resolve(world.pos, world.heading, lin, ang, world.obstacles,
                                                     world.arena.bounds.as_array(), float(p.robot_radius))
        world.pos, world.heading, world.moved = new_pos, new_h, moved
    world.led = new_led
    world.message_queue = outgoing
    world.tick = t + 1
    world._snap = None
    _check_stages(world, events)
    if p.pose_stride and world.tick % p.pose_stride == 0:
        events.append(frame_event(world))
    return world, events


def frame_event(world: World) -> dict:
    return {"tick": world.tick, "robot": -1, "kind": "frame",
            "x": world.pos[:, 0].tolist(), "y": world.pos[:, 1].tolist(),
            "heading": world.heading.tolist(), "led": world.led.tolist()}


def _check_stages(world: World, events: list) -> None:
    for stage in STAGES:
        if stage in world.stage_tick:
            continue
        color = int(STAGE_COLOR[stage])
        if not (world.led == color).any():
            return
        try:
            chain = chain_from_arrays(world.pos, world.led, color, world.arena.nest, world.arena.goal,
                                      world.obstacles, world.params.max_visible_range)
        except ChainIncomplete:
            return
        world.stage_tick[stage] = world.tick
        world.stage_chain[stage] = chain
        if stage == "subgoal":
            world.path_complete = True
        events.append({"tick": world.tick, "robot": -1, "kind": "stage", "stage": stage,
                       "length": chain.length, "members": list(chain.members),
                       "waypoints": [list(w) for w in chain.waypoints]})
        return


def default_stop(world: World) -> bool:
    if "opt2" in world.stage_tick:
        return True
    t0 = world.stage_tick.get("subgoal")
    return t0 is not None and world.tick - t0 >= world.params.settle_ticks


@dataclass
class Trace:
    header: dict
    events: list[dict]
    metrics: dict | None = None
    success: bool = False

    def lines(self) -> list[str]:
        out = [json.dumps({"kind": "header", **self.header}, separators=(",", ":"))]
        out += [json.dumps(e, separators=(",", ":")) for e in self.events]
        if self.metrics is not None:
            out.append(json.dumps({"kind": "metrics", **self.metrics}, separators=(",", ":")))
        return out

    def to_jsonl(self) -> str:
        return "\n".join(self.lines()) + "\n"

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_jsonl())

    def of_kind(self, kind: str) -> list[dict]:
        return [e for e in self.events if e["kind"] == kind]


def read_trace(path) -> Trace:
    header, events, metrics = None, [], None
    with open(path) as fh:
        for ln, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{ln}: unreadable trace record ({exc})") from None
            kind = rec.get("kind")
            if kind == "header":
                header = {k: v for k, v in rec.items() if k != "kind"}
            elif kind == "metrics":
                metrics = {k: v for k, v in rec.items() if k != "kind"}
            else:
                events.append(rec)
    if header is None:
        raise ValueError(f"{path}: trace has no header record")
    return Trace(header, events, metrics, bool(metrics and metrics.get("success")))


def run(world: World, stop: Callable[[World], bool] | None = None,
        scenario: Scenario | None = None) -> Trace:
    """Step until ``stop(world)`` holds or ``max_sim_steps`` is reached."""
    stop = stop or default_stop
    header = {"scenario": world.scenario_name, "seed": world.seed, "robots": world.n,
              "allocation": world.allocation, "delta": world.delta,
              "params": dataclasses.asdict(world.params)}
    if scenario is not None:
        header["document"] = scenario_to_dict(scenario)
    events: list[dict] = [frame_event(world)]
    limit = world.params.max_sim_steps
    while world.tick < limit and not stop(world):
        step(world, events)
    if not events or events[-1].get("kind") != "frame" or events[-1]["tick"] != world.tick:
        events.append(frame_event(world))
    events.sort(key=lambda e: (e["tick"], e["robot"]))
    return Trace(header, events, None, "subgoal" in world.stage_tick)
