"""Plain Dijkstra on the 8-connected grid; the optimality oracle for D* Lite."""

from __future__ import annotations

import heapq

from ..world import OccupancyWorld
from .grid import Cell, Unreachable, exact_cost, free_mask, is_free, neighbors


def dijkstra_oracle(world: OccupancyWorld, start_cell: Cell, goal_cell: Cell) -> float:
    """Exact shortest-path cost between two cells on the known map.

    Costs are tracked as (axial, diagonal) move counts so the result does not
    depend on summation order.
    """
    return dijkstra_path(world, start_cell, goal_cell)[0]


def dijkstra_path(world: OccupancyWorld, start_cell: Cell, goal_cell: Cell) -> tuple[float, list[Cell]]:
    free = free_mask(world)
    start, goal = tuple(start_cell), tuple(goal_cell)
    if not (is_free(free, start) and is_free(free, goal)):
        raise Unreachable(f"start {start} or goal {goal} is blocked")
    best = {start: (0, 0)}
    parent: dict[Cell, Cell] = {}
    heap = [(0.0, start)]
    done = set()
    while heap:
        _, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        if u == goal:
            break
        a, d = best[u]
        for v, da, dd in neighbors(free, u):
            if v in done:
                continue
            cand = (a + da, d + dd)
            if v not in best or exact_cost(*cand) < exact_cost(*best[v]):
                best[v] = cand
                parent[v] = u
                heapq.heappush(heap, (exact_cost(*cand), v))
    if goal not in done:
        raise Unreachable(f"no path from {start} to {goal}")
    path = [goal]
    while path[-1] != start:
        path.append(parent[path[-1]])
    return exact_cost(*best[goal]), path[::-1]
