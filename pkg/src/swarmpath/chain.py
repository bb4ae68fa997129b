"""Greedy extraction of the robot chain linking the nest to the goal."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .geometry import Point2
from .robot import LedColor

STAGES = ("subgoal", "opt1", "opt2")
STAGE_COLOR = {"subgoal": LedColor.RED, "opt1": LedColor.BLUE, "opt2": LedColor.CYAN}


class ChainIncomplete(Exception):
    pass


@dataclass(frozen=True)
class Chain:
    waypoints: tuple[Point2, ...]
    members: tuple[int, ...]

    @property
    def length(self) -> float:
        return chain_length(self)


def chain_length(chain: Chain) -> float:
    w = chain.waypoints
    return float(sum(math.hypot(b[0] - a[0], b[1] - a[1]) for a, b in zip(w, w[1:])))


def chain_from_arrays(pos: np.ndarray, led: np.ndarray, color: int, nest, goal,
                      obstacles: np.ndarray, max_visible: float) -> Chain:
    """Walk from the nest, each time jumping to the visible chain robot nearest
    the goal, until the goal itself is visible. Ties go to the lower id."""
    gx, gy = float(goal[0]), float(goal[1])
    goal_arr = np.array([[gx, gy]])
    cand = np.nonzero(led == color)[0]
    cpos = pos[cand] if len(cand) else np.zeros((0, 2))
    cgoal = np.hypot(cpos[:, 0] - gx, cpos[:, 1] - gy) if len(cand) else np.zeros(0)
    cur = (float(nest[0]), float(nest[1]))
    waypoints = [Point2(*cur)]
    members: list[int] = []
    used = np.zeros(len(cand), dtype=bool)
    while True:
        d_goal = math.hypot(gx - cur[0], gy - cur[1])
        if d_goal <= max_visible and kernels.los_from_point(cur[0], cur[1], goal_arr, obstacles)[0]:
            waypoints.append(Point2(gx, gy))
            return Chain(tuple(waypoints), tuple(members))
        if len(cand) == 0:
            raise ChainIncomplete("no chain robots")
        d = np.hypot(cpos[:, 0] - cur[0], cpos[:, 1] - cur[1])
        ok = (~used) & (d <= max_visible) & (cgoal < d_goal)
        if ok.any():
            idx = np.nonzero(ok)[0]
            los = kernels.los_from_point(cur[0], cur[1], np.ascontiguousarray(cpos[idx]), obstacles)
            idx = idx[los]
        else:
            idx = np.zeros(0, dtype=np.int64)
        if len(idx) == 0:
            raise ChainIncomplete(f"stuck after {len(members)} members")
        # nearest to goal, lowest id on ties (cand is ascending)
        k = idx[np.argmin(cgoal[idx])]
        used[k] = True
        members.append(int(cand[k]))
        cur = (float(cpos[k, 0]), float(cpos[k, 1]))
        waypoints.append(Point2(*cur))


def extract_chain(world, stage: str) -> Chain:
    return chain_from_arrays(world.pos, world.led, int(STAGE_COLOR[stage]), world.arena.nest,
                             world.arena.goal, world.obstacles, world.params.max_visible_range)


def validate_chain(chain: Chain, obstacles: np.ndarray, max_visible: float) -> bool:
    """Consecutive waypoints are within range and mutually visible."""
    w = chain.waypoints
    for a, b in zip(w, w[1:]):
        d = math.hypot(b[0] - a[0], b[1] - a[1])
        if not (0.0 < d <= max_visible):
            return False
        if not kernels.los_from_point(float(a[0]), float(a[1]), np.array([[b[0], b[1]]], dtype=float), obstacles)[0]:
            return False
    return True
