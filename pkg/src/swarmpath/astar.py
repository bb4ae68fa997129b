"""Grid A* baseline: 8-connected, octile step costs, no corner cutting."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

from .arena import ArenaConfig, GridMap, SimParams, rasterize

SQRT2 = math.sqrt(2.0)
MOVES = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1))


class NoPathError(Exception):
    pass


@dataclass(frozen=True)
class GridPath:
    cells: tuple[tuple[int, int], ...]
    cost: float
    straight: int = 0
    diagonal: int = 0


def octile(a: tuple[int, int], b: tuple[int, int]) -> float:
    dx = abs(a[0] - b[0])
    dy = abs(a[1] - b[1])
    return max(dx, dy) - min(dx, dy) + SQRT2 * min(dx, dy)


def neighbors(grid: GridMap, cell: tuple[int, int]):
    """Free 8-neighbours; a diagonal step needs both orthogonal cells free."""
    c, r = cell
    for dc, dr in MOVES:
        nb = (c + dc, r + dr)
        if grid.is_blocked(nb):
            continue
        if dc and dr and (grid.is_blocked((c + dc, r)) or grid.is_blocked((c, r + dr))):
            continue
        yield nb, bool(dc and dr)


def astar(grid: GridMap, start: tuple[int, int], goal: tuple[int, int]) -> GridPath:
    """Minimum-cost path. Step counts are tracked as integers so equal-cost
    paths have bit-identical costs. Heap ties: lower f, higher g, then row-major."""
    if grid.is_blocked(start) or grid.is_blocked(goal):
        raise NoPathError("start or goal cell is blocked")
    best = {start: (0, 0)}
    parent: dict = {start: None}
    closed = set()
    heap = [(octile(start, goal), -0.0, start[1], start[0], 0, 0)]
    while heap:
        f, neg_g, row, col, ns, nd = heapq.heappop(heap)
        cell = (col, row)
        if cell in closed:
            continue
        if best[cell] != (ns, nd):
            continue
        closed.add(cell)
        if cell == goal:
            cells = []
            cur = cell
            while cur is not None:
                cells.append(cur)
                cur = parent[cur]
            cells.reverse()
            return GridPath(tuple(cells), (ns + SQRT2 * nd) * grid.cell_size, ns, nd)
        for nb, diag in neighbors(grid, cell):
            if nb in closed:
                continue
            cand = (ns, nd + 1) if diag else (ns + 1, nd)
            g = cand[0] + SQRT2 * cand[1]
            old = best.get(nb)
            if old is not None and old[0] + SQRT2 * old[1] <= g:
                continue
            best[nb] = cand
            parent[nb] = cell
            heapq.heappush(heap, (g + octile(nb, goal), -g, nb[1], nb[0], cand[0], cand[1]))
    raise NoPathError(f"no path from {start} to {goal}")


def astar_world_length(arena: ArenaConfig, params: SimParams, cell_size: float | None = None,
                       inflation: float | None = None) -> float:
    return astar_world_path(arena, params, cell_size, inflation)[1].cost


def astar_world_path(arena: ArenaConfig, params: SimParams, cell_size: float | None = None,
                     inflation: float | None = None) -> tuple[GridMap, GridPath]:
    cs = params.robot_radius if cell_size is None else cell_size
    infl = params.robot_radius if inflation is None else inflation
    grid = rasterize(arena, cs, infl)
    return grid, astar(grid, grid.cell_of(arena.nest), grid.cell_of(arena.goal))
