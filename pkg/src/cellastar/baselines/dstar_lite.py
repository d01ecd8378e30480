"""D* Lite (optimized variant) on the 8-connected grid.

The search runs backwards from the goal, so when the agent moves and new
obstacles appear only the affected vertices are repaired; ``km`` keeps the
old queue keys valid as the heuristic origin shifts.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass

import numpy as np

from ..results import Outcome, PlanResult, RunMetrics, Trajectory
from ..world import OccupancyWorld, SensorConfig, reveal
from .grid import Cell, exact_cost, free_mask, is_free, move_cost, neighbors, octile, path_counts

INF = math.inf


@dataclass
class GridNode8:
    row: int
    col: int
    g: float = INF
    rhs: float = INF
    key: tuple[float, float] = (INF, INF)


class DStarLite:
    def __init__(self, free: np.ndarray, start: Cell, goal: Cell):
        self.free = free
        self.start = start
        self.goal = goal
        self.km = 0.0
        self.g: dict[Cell, float] = {}
        self.rhs: dict[Cell, float] = {goal: 0.0}
        self._open: list = []
        self._key: dict[Cell, tuple[float, float]] = {}
        self.expansions = 0
        self._push(goal)

    def node(self, c: Cell) -> GridNode8:
        key = self._key.get(c, (INF, INF))
        return GridNode8(row=c[1], col=c[0], g=self.g.get(c, INF), rhs=self.rhs.get(c, INF), key=key)

    def calc_key(self, s: Cell) -> tuple[float, float]:
        m = min(self.g.get(s, INF), self.rhs.get(s, INF))
        return (m + octile(self.start, s) + self.km, m)

    def _push(self, s: Cell):
        k = self.calc_key(s)
        self._key[s] = k
        heapq.heappush(self._open, (k, s))

    def _top(self):
        while self._open:
            k, s = self._open[0]
            if self._key.get(s) == k:
                return k, s
            heapq.heappop(self._open)
        return (INF, INF), None

    def update_vertex(self, u: Cell):
        if u != self.goal:
            best = INF
            for v, _, _ in neighbors(self.free, u):
                c = move_cost(u, v) + self.g.get(v, INF)
                if c < best:
                    best = c
            self.rhs[u] = best
        self._key.pop(u, None)
        if self.g.get(u, INF) != self.rhs.get(u, INF):
            self._push(u)

    def compute_shortest_path(self) -> int:
        n = 0
        while True:
            k_old, u = self._top()
            start_key = self.calc_key(self.start)
            if u is None or not (
                k_old < start_key or self.rhs.get(self.start, INF) != self.g.get(self.start, INF)
            ):
                break
            heapq.heappop(self._open)
            del self._key[u]
            n += 1
            k_new = self.calc_key(u)
            if k_old < k_new:
                self._key[u] = k_new
                heapq.heappush(self._open, (k_new, u))
            elif self.g.get(u, INF) > self.rhs.get(u, INF):
                self.g[u] = self.rhs[u]
                for v, _, _ in neighbors(self.free, u):
                    self.update_vertex(v)
            else:
                self.g[u] = INF
                self.update_vertex(u)
                for v, _, _ in neighbors(self.free, u):
                    self.update_vertex(v)
        self.expansions += n
        return n

    def cells_changed(self, cells):
        """Repair after the traversability of ``cells`` changed.

        A blocked cell loses all its edges, and diagonal edges that cut past
        it change too; every such edge has both ends within one step of the
        cell, so updating the 3x3 block around each change suffices.
        """
        touched = set()
        for cx, cy in cells:
            for dx in (-1, 0, 1):
                for dy in (-1, 0, 1):
                    touched.add((cx + dx, cy + dy))
        for u in sorted(touched):
            ny, nx = self.free.shape
            if 0 <= u[0] < nx and 0 <= u[1] < ny:
                if not is_free(self.free, u):
                    self.g.pop(u, None)
                self.update_vertex(u)

    def next_cell(self, s: Cell) -> Cell | None:
        best, arg = INF, None
        for v, _, _ in neighbors(self.free, s):
            c = move_cost(s, v) + self.g.get(v, INF)
            if c < best:
                best, arg = c, v
        return arg

    def extract_path(self) -> list[Cell] | None:
        if self.g.get(self.start, INF) == INF:
            return None
        path = [self.start]
        while path[-1] != self.goal:
            nxt = self.next_cell(path[-1])
            if nxt is None or len(path) > self.free.size:
                return None
            path.append(nxt)
        return path


def dstar_lite_plan(
    world: OccupancyWorld,
    start_cell: Cell,
    goal_cell: Cell,
    sensor: SensorConfig | None = None,
    max_steps: int = 100_000,
) -> PlanResult:
    """Drive an agent from ``start_cell`` to ``goal_cell`` with D* Lite.

    On a fully known map this is one search followed by a walk down the
    gradient of ``g``. With ``sensor`` set, obstacles revealed on the way
    trigger incremental repairs.
    """
    start, goal = tuple(start_cell), tuple(goal_cell)
    metrics = RunMetrics(planner="dstar_lite", outcome=Outcome.SUCCESS, discrete=True)
    to_point = lambda c: world.cell_center(*c)
    if start == goal:
        metrics.path_cost = 0.0
        return PlanResult(Trajectory([]), metrics)

    if sensor is not None:
        reveal(world, to_point(start), sensor)
    free = free_mask(world).copy()
    if not (is_free(free, start) and is_free(free, goal)):
        metrics.outcome = Outcome.UNREACHABLE
        metrics.note = "start or goal blocked"
        return PlanResult(Trajectory([]), metrics)

    t0 = time.perf_counter()
    planner = DStarLite(free, start, goal)
    metrics.nodes_evaluated_per_step.append(planner.compute_shortest_path())
    metrics.step_modes.append("search")
    elapsed = time.perf_counter() - t0
    cells = [start]
    last = start
    pos = start
    while pos != goal:
        if len(cells) > max_steps:
            metrics.outcome = Outcome.TIMEOUT
            break
        t0 = time.perf_counter()
        if planner.g.get(pos, INF) == INF:
            elapsed += time.perf_counter() - t0
            metrics.outcome = Outcome.UNREACHABLE
            metrics.note = f"no path from {pos}"
            break
        pos = planner.next_cell(pos)
        planner.start = pos
        elapsed += time.perf_counter() - t0
        cells.append(pos)
        if sensor is not None and pos != goal:
            reveal(world, to_point(pos), sensor)
            t0 = time.perf_counter()
            now = free_mask(world)
            changed = list(zip(*np.nonzero(now != planner.free)[::-1]))
            n = 0
            if changed:
                planner.km += octile(last, pos)
                last = pos
                planner.free = now.copy()
                planner.cells_changed([(int(x), int(y)) for x, y in changed])
                n = planner.compute_shortest_path()
            elapsed += time.perf_counter() - t0
            metrics.nodes_evaluated_per_step.append(n)
            metrics.step_modes.append("replan")
    metrics.wall_time = elapsed
    traj = Trajectory([to_point(c) for c in cells] if len(cells) > 1 else [])
    metrics.path_length = float(len(traj.points))
    if metrics.outcome is Outcome.SUCCESS:
        metrics.path_cost = exact_cost(*path_counts(cells)) * world.resolution
    return PlanResult(traj, metrics)
