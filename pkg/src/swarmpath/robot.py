"""Embodied robot model: pose, unicycle kinematics, LED colours and the sensor
channels (occluded LED camera, proximity, positioning)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from typing import NamedTuple

import numpy as np

from . import kernels
from .arena import ArenaConfig, SimParams
from .geometry import Point2, normalize_angle


class LedColor(IntEnum):
    OFF = 0
    GREEN = 1      # exploring
    YELLOW = 2     # returning to the nest
    RED = 3        # static subgoal
    WHITE = 4      # goal founder / subgoal still forming
    PURPLE = 5     # alignment in progress
    BLUE = 6       # first alignment done, acts as a sub-nest
    CYAN = 7       # second alignment done
    MAGENTA = 8    # recovery
    ORANGE = 9     # decision making


class Pose(NamedTuple):
    position: Point2
    heading: float


@dataclass(frozen=True)
class VelocityCmd:
    linear: float = 0.0
    angular: float = 0.0

    @staticmethod
    def clamped(linear: float, angular: float, params: SimParams) -> "VelocityCmd":
        lin = min(max(linear, 0.0), params.robot_speed)
        ang = min(max(angular, -params.max_turn), params.max_turn)
        return VelocityCmd(lin, ang)


STOP = VelocityCmd(0.0, 0.0)


class LedReading(NamedTuple):
    color: LedColor
    range: float
    bearing: float
    emitter_id: int


class ProximityReading(NamedTuple):
    bearing: float
    range: float


@dataclass
class Snapshot:
    """Frozen world state for one tick plus the batched perception arrays."""

    tick: int
    pos: np.ndarray
    heading: np.ndarray
    led: np.ndarray
    moved: np.ndarray
    rng: np.ndarray
    brg: np.ndarray
    vis: np.ndarray
    near_idx: np.ndarray
    near_rng: np.ndarray
    nest_info: np.ndarray
    goal_info: np.ndarray
    prox: np.ndarray
    nest: Point2
    goal: Point2
    path_complete: bool = False
    nest_radius: float = 0.0


def take_snapshot(tick: int, pos: np.ndarray, heading: np.ndarray, led: np.ndarray,
                  moved: np.ndarray, arena: ArenaConfig, params: SimParams,
                  path_complete: bool = False, obstacles: np.ndarray | None = None,
                  perceive_fn=None) -> Snapshot:
    if obstacles is None:
        obstacles = arena.obstacle_array()
    fn = perceive_fn or kernels.perceive_all
    n = pos.shape[0]
    if n == 0:
        e2 = np.zeros((0, 0))
        return Snapshot(tick, pos, heading, led, moved, e2, e2, e2.astype(bool),
                        np.zeros((0, kernels.N_COLORS), dtype=np.int64),
                        np.zeros((0, kernels.N_COLORS)), np.zeros((0, 3)), np.zeros((0, 3)),
                        np.zeros((0, 2)), arena.nest, arena.goal, path_complete, arena.nest_radius)
    out = fn(pos, heading, led.astype(np.int64), obstacles, arena.bounds.as_array(),
             np.asarray(arena.nest, dtype=float), np.asarray(arena.goal, dtype=float),
             float(params.max_visible_range), float(params.proximity_range),
             float(params.robot_radius))
    return Snapshot(tick, pos, heading, led, moved, *out, nest=arena.nest, goal=arena.goal,
                    path_complete=path_complete, nest_radius=arena.nest_radius)


class Percept:
    """Read-only view of one robot's sensor readings within a :class:`Snapshot`.

    Bearings are relative to the robot's heading. Only emitters that are within
    the visible range and in line of sight can be queried.
    """

    __slots__ = ("i", "s", "_leds")

    def __init__(self, i: int, snap: Snapshot):
        self.i = i
        self.s = snap
        self._leds = None

    # positioning
    @property
    def position(self) -> Point2:
        p = self.s.pos[self.i]
        return Point2(float(p[0]), float(p[1]))

    @property
    def heading(self) -> float:
        return float(self.s.heading[self.i])

    @property
    def self_pose(self) -> Pose:
        return Pose(self.position, self.heading)

    @property
    def tick(self) -> int:
        return self.s.tick

    @property
    def moved(self) -> bool:
        return bool(self.s.moved[self.i])

    @property
    def path_complete(self) -> bool:
        return self.s.path_complete

    # landmarks
    @property
    def nest_visible(self) -> bool:
        return self.s.nest_info[self.i, 2] > 0.0

    @property
    def nest_range(self) -> float:
        return float(self.s.nest_info[self.i, 0])

    @property
    def nest_bearing(self) -> float:
        return float(self.s.nest_info[self.i, 1])

    @property
    def goal_visible(self) -> bool:
        return self.s.goal_info[self.i, 2] > 0.0

    @property
    def goal_range(self) -> float:
        return float(self.s.goal_info[self.i, 0])

    @property
    def goal_bearing(self) -> float:
        return float(self.s.goal_info[self.i, 1])

    # proximity
    @property
    def proximity(self) -> list[ProximityReading]:
        r = self.s.prox[self.i, 0]
        if not math.isfinite(r):
            return []
        return [ProximityReading(float(self.s.prox[self.i, 1]), float(r))]

    @property
    def prox_range(self) -> float:
        return float(self.s.prox[self.i, 0])

    @property
    def prox_bearing(self) -> float:
        return float(self.s.prox[self.i, 1])

    # camera
    def visible(self, j: int) -> bool:
        return 0 <= j < self.s.vis.shape[0] and bool(self.s.vis[self.i, j])

    def range_to(self, j: int) -> float:
        return float(self.s.rng[self.i, j])

    def bearing_to(self, j: int) -> float:
        return float(self.s.brg[self.i, j])

    def led_of(self, j: int) -> LedColor | None:
        if not self.visible(j):
            return None
        return LedColor(int(self.s.led[j]))

    def position_of(self, j: int) -> Point2:
        """World position of a visible emitter, reconstructed from range and bearing."""
        r = self.range_to(j)
        a = self.heading + self.bearing_to(j)
        p = self.position
        return Point2(p[0] + r * math.cos(a), p[1] + r * math.sin(a))

    def nearest(self, *colors: LedColor) -> tuple[int, float] | None:
        """Nearest visible emitter showing any of ``colors`` (ties: lowest id)."""
        best = None
        idx = self.s.near_idx[self.i]
        rng = self.s.near_rng[self.i]
        for c in colors:
            j = int(idx[c])
            if j < 0:
                continue
            key = (float(rng[c]), j)
            if best is None or key < best:
                best = key
        return None if best is None else (best[1], best[0])

    def ids_with(self, *colors: LedColor) -> np.ndarray:
        row = self.s.vis[self.i]
        mask = row & np.isin(self.s.led, np.asarray(colors, dtype=self.s.led.dtype))
        return np.nonzero(mask)[0]

    @property
    def visible_leds(self) -> list[LedReading]:
        if self._leds is None:
            s, i = self.s, self.i
            self._leds = [LedReading(LedColor(int(s.led[j])), float(s.rng[i, j]),
                                     float(s.brg[i, j]), int(j))
                          for j in np.nonzero(s.vis[i])[0]]
        return self._leds


def perceive(robot_id: int, world) -> Percept:
    return Percept(robot_id, world.snapshot())


def integrate_motion(pose: Pose, cmd: VelocityCmd) -> Pose:
    h = normalize_angle(pose.heading + cmd.angular)
    x, y = pose.position
    return Pose(Point2(x + cmd.linear * math.cos(h), y + cmd.linear * math.sin(h)), h)


def disc_free(p, arena: ArenaConfig, others, radius: float) -> bool:
    others = np.zeros((0, 2)) if others is None or len(others) == 0 else np.asarray(others, dtype=float)
    return kernels._disc_free_np(float(p[0]), float(p[1]), -1, others, arena.obstacle_array(),
                                 arena.bounds.as_array(), radius)


def resolve_collision(old: Pose, proposed: Pose, arena: ArenaConfig, other_robots,
                      radius: float) -> Pose:
    """Stop on contact: keep the proposed heading, but the old position if the
    disc at the proposed position touches a wall, obstacle or another robot."""
    if disc_free(proposed.position, arena, other_robots, radius):
        return proposed
    return Pose(old.position, proposed.heading)
