"""Scenario model: arena geometry, simulation parameters, scenario files and
the occupancy grid used by the A* baseline."""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

import numpy as np

from .geometry import Obstacle, Point2, point_rect_distance

ENV_CLASSES = ("open", "obstacle", "complex")
DEFAULT_DELTA = {"open": 2, "obstacle": 4, "complex": 6}
BUILTIN_NAMES = (
    "open_1", "open_2", "open_3",
    "obstacle_1", "obstacle_2", "obstacle_3",
    "complex_1", "complex_2",
)


class ScenarioError(ValueError):
    pass


class ScenarioParseError(ScenarioError):
    pass


class ScenarioValidationError(ScenarioError):
    def __init__(self, field_path: str, message: str):
        self.field_path = field_path
        super().__init__(f"{field_path}: {message}")


@dataclass(frozen=True)
class Bounds:
    xmin: float
    ymin: float
    xmax: float
    ymax: float

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin

    def contains(self, p, margin: float = 0.0) -> bool:
        return (self.xmin + margin <= p[0] <= self.xmax - margin
                and self.ymin + margin <= p[1] <= self.ymax - margin)

    def as_array(self) -> np.ndarray:
        return np.array([self.xmin, self.ymin, self.xmax, self.ymax], dtype=float)


@dataclass(frozen=True)
class ArenaConfig:
    bounds: Bounds
    obstacles: tuple[Obstacle, ...]
    nest: Point2
    nest_radius: float
    goal: Point2
    goal_radius: float
    deployment_points: tuple[Point2, ...]
    environment_class: str = "open"

    def obstacle_array(self) -> np.ndarray:
        if not self.obstacles:
            return np.zeros((0, 4))
        return np.array([ob.as_tuple for ob in self.obstacles], dtype=float)


@dataclass(frozen=True)
class SimParams:
    detect_range: float = 30.0
    subgoal_spacing: float = 70.0
    max_visible_range: float = 100.0
    repulsion_range: float = 20.0
    robot_speed: float = 1.0
    robot_radius: float = 3.5
    proximity_range: float = 10.0
    comm_range: float = 100.0
    delta: int | None = None
    visual_range: float = 30.0
    min_explore_time: int = 500
    explore_time_increment: float = 0.5
    max_explore_ticks: int = 1000
    rest_duration: int = 50
    max_sim_steps: int = 30000
    settle_ticks: int = 6000
    recruit_patience: int = 200
    opt_error_tolerance: float = 0.05
    opt_stall_ticks: int = 40
    explore_drift: float = 0.01
    explore_jitter: float = 1.5
    follow_standoff: float = 25.0
    max_turn: float = math.pi
    pose_stride: int = 50
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if not (0 < self.detect_range < self.subgoal_spacing < self.max_visible_range):
            raise ScenarioValidationError(
                "params.detect_range",
                "require 0 < detect_range < subgoal_spacing < max_visible_range")
        positive = ("repulsion_range", "robot_speed", "robot_radius", "proximity_range",
                    "comm_range", "visual_range", "max_turn")
        for name in positive:
            if not getattr(self, name) > 0:
                raise ScenarioValidationError(f"params.{name}", "must be > 0")
        if self.delta is not None and self.delta < 0:
            raise ScenarioValidationError("params.delta", "must be >= 0")
        for name in ("min_explore_time", "max_explore_ticks", "max_sim_steps", "pose_stride"):
            if getattr(self, name) < 1:
                raise ScenarioValidationError(f"params.{name}", "must be >= 1")
        if self.explore_time_increment < 0 or self.rest_duration < 0 or self.rng_seed < 0:
            raise ScenarioValidationError("params", "increments, durations and seeds must be >= 0")
        if not 0.0 <= self.explore_drift <= 1.0:
            raise ScenarioValidationError("params.explore_drift", "must lie in [0, 1]")

    def delta_for(self, environment_class: str) -> int:
        return self.delta if self.delta is not None else DEFAULT_DELTA[environment_class]


@dataclass(frozen=True)
class Scenario:
    name: str
    arena: ArenaConfig
    params: SimParams = field(default_factory=SimParams)
    robot_count: int = 100


@dataclass
class GridMap:
    cell_size: float
    width: int
    height: int
    blocked: np.ndarray  # shape (height, width), row = y index
    origin: Point2

    def cell_of(self, p) -> tuple[int, int]:
        col = int(math.floor((p[0] - self.origin[0]) / self.cell_size))
        row = int(math.floor((p[1] - self.origin[1]) / self.cell_size))
        return col, row

    def center_of(self, cell: tuple[int, int]) -> Point2:
        return Point2(self.origin[0] + (cell[0] + 0.5) * self.cell_size,
                      self.origin[1] + (cell[1] + 0.5) * self.cell_size)

    def in_grid(self, cell: tuple[int, int]) -> bool:
        return 0 <= cell[0] < self.width and 0 <= cell[1] < self.height

    def is_blocked(self, cell: tuple[int, int]) -> bool:
        return (not self.in_grid(cell)) or bool(self.blocked[cell[1], cell[0]])


# ------------------------------------------------------------------ validation

def validate_arena(arena: ArenaConfig) -> None:
    b = arena.bounds
    if not (b.xmin < b.xmax and b.ymin < b.ymax):
        raise ScenarioValidationError("arena.bounds", "min must be < max")
    if arena.environment_class not in ENV_CLASSES:
        raise ScenarioValidationError("arena.class", f"must be one of {ENV_CLASSES}")
    for name, r in (("nest", arena.nest_radius), ("goal", arena.goal_radius)):
        if not r > 0:
            raise ScenarioValidationError(f"arena.{name}.radius", "must be > 0")
    for name, p in (("nest", arena.nest), ("goal", arena.goal)):
        if not b.contains(p):
            raise ScenarioValidationError(f"arena.{name}.pos", f"{name} lies outside the arena bounds")
        for k, ob in enumerate(arena.obstacles):
            if ob.contains(p, strict=False):
                raise ScenarioValidationError(f"arena.{name}.pos", f"{name} lies inside obstacle {k}")
    for i, p in enumerate(arena.deployment_points):
        if not b.contains(p):
            raise ScenarioValidationError(f"arena.deployment_points[{i}]", "outside the arena bounds")
        for k, ob in enumerate(arena.obstacles):
            if ob.contains(p, strict=False):
                raise ScenarioValidationError(f"arena.deployment_points[{i}]", f"inside obstacle {k}")


# ------------------------------------------------------------------ documents

def _point(v: Any, path: str) -> Point2:
    if (not isinstance(v, (list, tuple)) or len(v) != 2
            or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in v)):
        raise ScenarioValidationError(path, "expected [x, y]")
    p = Point2(float(v[0]), float(v[1]))
    if not all(map(math.isfinite, p)):
        raise ScenarioValidationError(path, "coordinates must be finite")
    return p


def _require(d: dict, key: str, path: str) -> Any:
    if not isinstance(d, dict) or key not in d:
        raise ScenarioValidationError(f"{path}.{key}" if path else key, "missing")
    return d[key]


def scenario_from_dict(doc: dict, name: str = "") -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioValidationError("$", "document must be an object")
    a = _require(doc, "arena", "")
    bdoc = _require(a, "bounds", "arena")
    bounds = Bounds(*_point(_require(bdoc, "min", "arena.bounds"), "arena.bounds.min"),
                    *_point(_require(bdoc, "max", "arena.bounds"), "arena.bounds.max"))
    obstacles = []
    for k, od in enumerate(a.get("obstacles", [])):
        path = f"arena.obstacles[{k}]"
        lo = _point(_require(od, "min", path), f"{path}.min")
        hi = _point(_require(od, "max", path), f"{path}.max")
        try:
            obstacles.append(Obstacle(lo, hi))
        except ValueError as exc:
            raise ScenarioValidationError(path, str(exc)) from None
    nest = _require(a, "nest", "arena")
    goal = _require(a, "goal", "arena")
    dps = a.get("deployment_points", [])
    if not isinstance(dps, list):
        raise ScenarioValidationError("arena.deployment_points", "expected a list")
    arena = ArenaConfig(
        bounds=bounds,
        obstacles=tuple(obstacles),
        nest=_point(_require(nest, "pos", "arena.nest"), "arena.nest.pos"),
        nest_radius=float(_require(nest, "radius", "arena.nest")),
        goal=_point(_require(goal, "pos", "arena.goal"), "arena.goal.pos"),
        goal_radius=float(_require(goal, "radius", "arena.goal")),
        deployment_points=tuple(_point(p, f"arena.deployment_points[{i}]") for i, p in enumerate(dps)),
        environment_class=str(a.get("class", "open")),
    )
    validate_arena(arena)

    pdoc = doc.get("params", {}) or {}
    if not isinstance(pdoc, dict):
        raise ScenarioValidationError("params", "expected an object")
    known = {f.name: f for f in fields(SimParams)}
    kwargs = {}
    for key, value in pdoc.items():
        if key not in known:
            raise ScenarioValidationError(f"params.{key}", "unknown parameter")
        default = getattr(SimParams, key, None)
        if value is None:
            kwargs[key] = None
        elif isinstance(default, int) and not isinstance(default, bool) or key == "delta":
            if not isinstance(value, (int, float)) or isinstance(value, bool) or value != int(value):
                raise ScenarioValidationError(f"params.{key}", "expected an integer")
            kwargs[key] = int(value)
        else:
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ScenarioValidationError(f"params.{key}", "expected a number")
            kwargs[key] = float(value)
    params = SimParams(**kwargs)

    rdoc = doc.get("robots", {}) or {}
    count = rdoc.get("count", len(arena.deployment_points)) if isinstance(rdoc, dict) else None
    if not isinstance(count, int) or isinstance(count, bool) or count < 0:
        raise ScenarioValidationError("robots.count", "expected a non-negative integer")
    if count > len(arena.deployment_points):
        raise ScenarioValidationError("robots.count", "more robots than deployment points")
    return Scenario(name=str(doc.get("name", name)), arena=arena, params=params, robot_count=count)


def load_scenario(text: str, name: str = "") -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(f"malformed scenario document: {exc}") from None
    return scenario_from_dict(doc, name)


def load_scenario_file(path: str | os.PathLike) -> Scenario:
    path = Path(path)
    return load_scenario(path.read_text(), name=path.stem)


def scenario_to_dict(sc: Scenario) -> dict:
    a = sc.arena
    params = {k: v for k, v in asdict(sc.params).items() if v != getattr(SimParams, k, None)}
    return {
        "name": sc.name,
        "arena": {
            "bounds": {"min": [a.bounds.xmin, a.bounds.ymin], "max": [a.bounds.xmax, a.bounds.ymax]},
            "obstacles": [{"min": list(o.min_corner), "max": list(o.max_corner)} for o in a.obstacles],
            "nest": {"pos": list(a.nest), "radius": a.nest_radius},
            "goal": {"pos": list(a.goal), "radius": a.goal_radius},
            "deployment_points": [list(p) for p in a.deployment_points],
            "class": a.environment_class,
        },
        "params": params,
        "robots": {"count": sc.robot_count},
    }


def emit_scenario(sc: Scenario) -> str:
    return json.dumps(scenario_to_dict(sc), indent=1) + "\n"


# ------------------------------------------------------------------ builtins

def scenario_dir() -> Path:
    override = os.environ.get("SWARMPATH_SCENARIO_DIR")
    if override:
        return Path(override)
    return Path(__file__).resolve().parent / "scenarios"


def resolve_scenario(ref: str) -> Path:
    """Accept a path to a scenario file or the name of a bundled scenario."""
    p = Path(ref)
    if p.suffix == ".json" and p.exists():
        return p
    cand = scenario_dir() / (ref if ref.endswith(".json") else f"{ref}.json")
    if cand.exists():
        return cand
    raise FileNotFoundError(f"no scenario file or bundled scenario named {ref!r}")


def builtin_environments() -> list[Scenario]:
    d = scenario_dir()
    return [load_scenario_file(d / f"{name}.json") for name in BUILTIN_NAMES]


def deployment_grid(nest: Point2, count: int, spacing: float, bounds: Bounds,
                    obstacles: tuple[Obstacle, ...] = (), clearance: float = 0.0) -> list[Point2]:
    """Square grid of candidate homes centred on the nest, nearest first."""
    k = int(math.ceil(math.sqrt(count))) + 2
    pts = []
    while True:
        offs = (np.arange(k) - (k - 1) / 2.0) * spacing
        pts = []
        for oy in offs:
            for ox in offs:
                p = Point2(round(nest[0] + ox, 6), round(nest[1] + oy, 6))
                if not bounds.contains(p, clearance):
                    continue
                if any(point_rect_distance(p, ob) < clearance for ob in obstacles):
                    continue
                pts.append(p)
        if len(pts) >= count or k > 200:
            break
        k += 2
    pts.sort(key=lambda p: (round(math.hypot(p[0] - nest[0], p[1] - nest[1]), 9), p[1], p[0]))
    if len(pts) < count:
        raise ScenarioValidationError("arena.deployment_points", "not enough free space around the nest")
    return pts[:count]


# ------------------------------------------------------------------ raster

def rasterize(arena: ArenaConfig, cell_size: float, inflation: float) -> GridMap:
    if not cell_size > 0:
        raise ValueError("cell_size must be > 0")
    if inflation < 0:
        raise ValueError("inflation must be >= 0")
    b = arena.bounds
    width = int(math.ceil(b.width / cell_size - 1e-9))
    height = int(math.ceil(b.height / cell_size - 1e-9))
    cx0 = b.xmin + np.arange(width) * cell_size
    cy0 = b.ymin + np.arange(height) * cell_size
    cx1 = cx0 + cell_size
    cy1 = cy0 + cell_size
    blocked = np.zeros((height, width), dtype=bool)
    blocked |= (cx1 > b.xmax + 1e-9)[None, :]
    blocked |= (cy1 > b.ymax + 1e-9)[:, None]
    for ob in arena.obstacles:
        x0, y0, x1, y1 = ob.grown(inflation).as_tuple
        ox = (cx0 < x1) & (x0 < cx1)
        oy = (cy0 < y1) & (y0 < cy1)
        blocked |= oy[:, None] & ox[None, :]
    grid = GridMap(cell_size, width, height, blocked, Point2(b.xmin, b.ymin))
    for name, p in (("nest", arena.nest), ("goal", arena.goal)):
        if grid.is_blocked(grid.cell_of(p)):
            raise ScenarioValidationError(f"arena.{name}.pos", f"{name} cell is blocked in the grid")
    return grid
