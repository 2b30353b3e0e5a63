"""8-connected A* over costmap cell centers with an octile heuristic."""

from __future__ import annotations

import heapq
import math

import numpy as np

from ..core.geometry import Pose2
from .costmap import Costmap


class PlanningError(RuntimeError):
    pass


class InvalidStartError(PlanningError):
    pass


class InvalidGoalError(PlanningError):
    pass


class UnreachableError(PlanningError):
    pass


_NEIGHBORS = (
    (1, 0, 1.0), (-1, 0, 1.0), (0, 1, 1.0), (0, -1, 1.0),
    (1, 1, math.sqrt(2.0)), (1, -1, math.sqrt(2.0)),
    (-1, 1, math.sqrt(2.0)), (-1, -1, math.sqrt(2.0)),
)


def _octile(a: tuple[int, int], b: tuple[int, int], resolution: float) -> float:
    dx, dy = abs(a[0] - b[0]), abs(a[1] - b[1])
    lo, hi = (dx, dy) if dx < dy else (dy, dx)
    return resolution * (math.sqrt(2.0) * lo + (hi - lo))


def plan_global(cm: Costmap, start: Pose2, goal: Pose2,
                cost_weight: float = 3.0) -> list[tuple[float, float]]:
    """Optimal cell-center polyline from start to goal.

    Edge cost is step length times (1 + cost_weight * target-cell cost); the
    octile heuristic ignores cell costs and is therefore admissible.  The
    returned polyline has collinear interior points removed.
    """
    grid = cm.base
    start_cells, start_in = grid.cells_of(np.array([start.x, start.y]))
    goal_cells, goal_in = grid.cells_of(np.array([goal.x, goal.y]))
    s = (int(start_cells[0]), int(start_cells[1]))
    g = (int(goal_cells[0]), int(goal_cells[1]))
    if not bool(start_in) or cm.lethal[s[1], s[0]]:
        raise InvalidStartError(f"start cell {s} is lethal or off the map")
    if not bool(goal_in) or cm.lethal[g[1], g[0]]:
        raise InvalidGoalError(f"goal cell {g} is lethal or off the map")

    if s == g:
        return [tuple(grid.cell_centers(np.array(s)))]

    res = grid.resolution
    lethal = cm.lethal
    cost = cm.cost
    width, height = grid.width, grid.height

    g_score: dict[tuple[int, int], float] = {s: 0.0}
    parent: dict[tuple[int, int], tuple[int, int]] = {}
    closed: set[tuple[int, int]] = set()
    counter = 0
    heap: list[tuple[float, int, tuple[int, int]]] = [(_octile(s, g, res), counter, s)]

    while heap:
        _, _, cur = heapq.heappop(heap)
        if cur in closed:
            continue
        if cur == g:
            break
        closed.add(cur)
        cx, cy = cur
        base_g = g_score[cur]
        for dx, dy, step in _NEIGHBORS:
            nx, ny = cx + dx, cy + dy
            if not (0 <= nx < width and 0 <= ny < height):
                continue
            if lethal[ny, nx]:
                continue
            if dx != 0 and dy != 0 and (lethal[cy, nx] or lethal[ny, cx]):
                continue  # no corner cutting
            cand = base_g + step * res * (1.0 + cost_weight * cost[ny, nx])
            nxt = (nx, ny)
            if cand < g_score.get(nxt, math.inf):
                g_score[nxt] = cand
                parent[nxt] = cur
                counter += 1
                heapq.heappush(heap, (cand + _octile(nxt, g, res), counter, nxt))
    else:
        raise UnreachableError("no path between start and goal")

    if g not in g_score:
        raise UnreachableError("no path between start and goal")

    cells = [g]
    while cells[-1] != s:
        cells.append(parent[cells[-1]])
    cells.reverse()

    simplified = [cells[0]]
    for i in range(1, len(cells) - 1):
        d0 = (cells[i][0] - simplified[-1][0], cells[i][1] - simplified[-1][1])
        d1 = (cells[i + 1][0] - cells[i][0], cells[i + 1][1] - cells[i][1])
        if d0[0] * d1[1] != d0[1] * d1[0]:
            simplified.append(cells[i])
    simplified.append(cells[-1])

    centers = grid.cell_centers(np.asarray(simplified, dtype=np.float64))
    return [(float(p[0]), float(p[1])) for p in centers]


def path_cost(cm: Costmap, cells: list[tuple[int, int]], cost_weight: float = 3.0) -> float:
    """Cost of a cell path under the A* edge-cost definition."""
    total = 0.0
    res = cm.base.resolution
    for a, b in zip(cells, cells[1:]):
        step = math.sqrt(2.0) if (a[0] != b[0] and a[1] != b[1]) else 1.0
        total += step * res * (1.0 + cost_weight * cm.cost[b[1], b[0]])
    return total
