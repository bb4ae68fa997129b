import heapq
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swarmpath.arena import GridMap, SimParams
from swarmpath.astar import NoPathError, astar, astar_world_length, octile
from swarmpath.geometry import Point2

from .conftest import make_arena

SQRT2 = math.sqrt(2.0)


def _grid(blocked, cell=1.0):
    blocked = np.asarray(blocked, dtype=bool)
    return GridMap(cell, blocked.shape[1], blocked.shape[0], blocked, Point2(0.0, 0.0))


def _less(p, q):
    """Exact a1 + b1*r2 < a2 + b2*r2 on integer step counts, r2 = sqrt(2)."""
    da, db = p[0] - q[0], q[1] - p[1]  # want da < db * r2
    if db >= 0:
        return da < 0 or da * da < 2 * db * db
    return da < 0 and da * da > 2 * db * db


class _Key:
    __slots__ = ("p",)

    def __init__(self, p):
        self.p = p

    def __lt__(self, other):
        return _less(self.p, other.p)


def dijkstra_oracle(blocked, start, goal):
    """Plain Dijkstra on exact (straight, diagonal) counts. Returns None if unreachable."""
    h, w = blocked.shape

    def free(c, r):
        return 0 <= c < w and 0 <= r < h and not blocked[r, c]

    if not free(*start) or not free(*goal):
        return None
    dist = {start: (0, 0)}
    heap = [(_Key((0, 0)), 0, start)]
    counter = 1
    done = set()
    while heap:
        k, _, cell = heapq.heappop(heap)
        if cell in done:
            continue
        done.add(cell)
        if cell == goal:
            return k.p
        c, r = cell
        for dc in (-1, 0, 1):
            for dr in (-1, 0, 1):
                if not (dc or dr) or not free(c + dc, r + dr):
                    continue
                if dc and dr and not (free(c + dc, r) and free(c, r + dr)):
                    continue
                cand = (k.p[0], k.p[1] + 1) if dc and dr else (k.p[0] + 1, k.p[1])
                nb = (c + dc, r + dr)
                if nb not in dist or _less(cand, dist[nb]):
                    dist[nb] = cand
                    heapq.heappush(heap, (_Key(cand), counter, nb))
                    counter += 1
    return None


def assert_valid_path(grid, path, start, goal):
    cells = path.cells
    assert cells[0] == start and cells[-1] == goal
    s = d = 0
    for (c0, r0), (c1, r1) in zip(cells, cells[1:]):
        dc, dr = c1 - c0, r1 - r0
        assert max(abs(dc), abs(dr)) == 1
        assert not grid.is_blocked((c1, r1))
        if dc and dr:
            # no corner cutting
            assert not grid.is_blocked((c0 + dc, r0)) and not grid.is_blocked((c0, r0 + dr))
            d += 1
        else:
            s += 1
    assert (s, d) == (path.straight, path.diagonal)
    assert path.cost == (s + SQRT2 * d) * grid.cell_size


def test_empty_5x5_diagonal():
    g = _grid(np.zeros((5, 5)), cell=2.0)
    p = astar(g, (0, 0), (4, 4))
    assert p.cost == 4 * SQRT2 * 2.0
    assert p.cells == tuple((i, i) for i in range(5))


def test_start_equals_goal():
    g = _grid(np.zeros((5, 5)))
    p = astar(g, (2, 3), (2, 3))
    assert p.cost == 0.0 and p.cells == ((2, 3),)


def test_no_corner_cutting_example():
    b = np.zeros((2, 2), dtype=bool)
    b[0, 1] = True  # cell (1, 0)
    g = _grid(b)
    p = astar(g, (0, 0), (1, 1))
    assert p.cost == 2.0  # the diagonal would clip a blocked corner


def test_blocked_endpoint_raises():
    b = np.zeros((3, 3), dtype=bool)
    b[2, 2] = True
    with pytest.raises(NoPathError):
        astar(_grid(b), (0, 0), (2, 2))


def test_random_grids_match_dijkstra():
    rng = np.random.default_rng(2024)
    reachable = 0
    for _ in range(100):
        blocked = rng.random((20, 20)) < 0.3
        free = np.argwhere(~blocked)
        (r0, c0), (r1, c1) = free[rng.choice(len(free), 2, replace=False)]
        start, goal = (int(c0), int(r0)), (int(c1), int(r1))
        grid = _grid(blocked)
        want = dijkstra_oracle(blocked, start, goal)
        if want is None:
            with pytest.raises(NoPathError):
                astar(grid, start, goal)
            continue
        reachable += 1
        got = astar(grid, start, goal)
        assert (got.straight, got.diagonal) == want
        assert got.cost == want[0] + SQRT2 * want[1]
        assert_valid_path(grid, got, start, goal)
    assert reachable >= 50


@settings(max_examples=200)
@given(st.tuples(st.integers(-50, 50), st.integers(-50, 50)), st.tuples(st.integers(-50, 50), st.integers(-50, 50)))
def test_octile_is_empty_grid_cost(a, b):
    dx, dy = abs(a[0] - b[0]), abs(a[1] - b[1])
    assert octile(a, b) == pytest.approx(max(dx, dy) + (SQRT2 - 1) * min(dx, dy))


def test_open_arena_length_close_to_straight_line():
    arena = make_arena(nest=(50.0, 150.0), goal=(150.0, 150.0))
    params = SimParams()
    assert abs(astar_world_length(arena, params) - 100.0) <= params.robot_radius


def test_walled_nest_has_no_path():
    walls = [((30, 130), (70, 132)), ((30, 168), (70, 170)), ((30, 130), (32, 170)), ((68, 130), (70, 170))]
    arena = make_arena(nest=(50.0, 150.0), goal=(200.0, 150.0), obstacles=walls)
    with pytest.raises(NoPathError):
        astar_world_length(arena, SimParams())


def test_open_1_frozen_length(open_1):
    # frozen value: 42 straight steps of one 3.5-unit cell from the nest cell to the goal cell
    assert astar_world_length(open_1.arena, open_1.params) == pytest.approx(147.0, abs=1e-9)


def test_removing_obstacles_never_lengthens():
    rng = np.random.default_rng(5)
    for _ in range(20):
        blocked = rng.random((20, 20)) < 0.25
        blocked[0, 0] = blocked[19, 19] = False
        try:
            full = astar(_grid(blocked), (0, 0), (19, 19)).cost
        except NoPathError:
            continue
        fewer = blocked & (rng.random((20, 20)) < 0.6)
        assert astar(_grid(fewer), (0, 0), (19, 19)).cost <= full


def test_obstacle_forces_detour():
    arena = make_arena(nest=(50.0, 150.0), goal=(250.0, 150.0), obstacles=[((140, 60), (160, 240))])
    assert astar_world_length(arena, SimParams()) > 200.0
