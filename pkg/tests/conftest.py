import math

import numpy as np
import pytest

from swarmpath.arena import ArenaConfig, Bounds, SimParams, load_scenario_file, resolve_scenario
from swarmpath.geometry import Obstacle, Point2
from swarmpath.robot import LedColor, Percept, take_snapshot


def make_arena(size=(300.0, 300.0), nest=(50.0, 150.0), goal=(250.0, 150.0), obstacles=(),
               nest_radius=20.0, goal_radius=10.0, deployment=None, cls="open") -> ArenaConfig:
    obs = tuple(Obstacle(Point2(*a), Point2(*b)) for a, b in obstacles)
    dep = tuple(Point2(*p) for p in (deployment if deployment is not None else [nest]))
    return ArenaConfig(Bounds(0.0, 0.0, float(size[0]), float(size[1])), obs, Point2(*nest), nest_radius,
                       Point2(*goal), goal_radius, dep, cls)


def snapshot_of(arena, positions, headings=None, leds=None, params=None, moved=None,
                path_complete=False, tick=0):
    params = params or SimParams()
    pos = np.array(positions, dtype=float).reshape(-1, 2)
    n = pos.shape[0]
    heading = np.zeros(n) if headings is None else np.array(headings, dtype=float)
    led = np.full(n, int(LedColor.GREEN), dtype=np.int64) if leds is None else \
        np.array([int(c) for c in leds], dtype=np.int64)
    mv = np.ones(n, dtype=bool) if moved is None else np.array(moved, dtype=bool)
    return take_snapshot(tick, pos, heading, led, mv, arena, params, path_complete)


def percept_of(arena, positions, i=0, **kw) -> Percept:
    return Percept(i, snapshot_of(arena, positions, **kw))


class FixedRng:
    """Stand-in random stream returning a constant fraction."""

    def __init__(self, u=0.5):
        self.u = u

    def random(self):
        return self.u

    def uniform(self, a, b):
        return a + (b - a) * self.u


@pytest.fixture
def params():
    return SimParams()


@pytest.fixture
def open_arena():
    return make_arena()


@pytest.fixture(scope="session")
def open_1():
    return load_scenario_file(resolve_scenario("open_1"))


def angle_close(a, b, tol=1e-9):
    return abs(math.remainder(a - b, 2 * math.pi)) <= tol


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
