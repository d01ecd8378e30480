"""8-connected grid graph over a 2-D world's inflated known map."""

from __future__ import annotations

import math

import numpy as np

from ..world import OccupancyWorld

SQRT2 = math.sqrt(2.0)

# axial moves first, then diagonals; fixed order keeps extraction deterministic
MOVES = ((1, 0), (0, 1), (-1, 0), (0, -1), (1, 1), (-1, 1), (-1, -1), (1, -1))

Cell = tuple[int, int]


class Unreachable(RuntimeError):
    """No path exists between the two cells on the known map."""


def free_mask(world: OccupancyWorld) -> np.ndarray:
    """Traversable cells indexed ``[iy, ix]``."""
    if world.dimensionality != 2:
        raise ValueError("grid planners need a 2-D world")
    return ~world.blocked_grid


def octile(a: Cell, b: Cell) -> float:
    dx, dy = abs(a[0] - b[0]), abs(a[1] - b[1])
    return max(dx, dy) + (SQRT2 - 1.0) * min(dx, dy)


def is_free(free: np.ndarray, c: Cell) -> bool:
    ny, nx = free.shape
    return 0 <= c[0] < nx and 0 <= c[1] < ny and bool(free[c[1], c[0]])


def neighbors(free: np.ndarray, c: Cell):
    """Yield ``(cell, axial, diagonal)`` for each legal move out of ``c``.

    Diagonal moves need both adjacent axial cells free (no corner cutting).
    """
    if not is_free(free, c):
        return
    x, y = c
    for dx, dy in MOVES:
        n = (x + dx, y + dy)
        if not is_free(free, n):
            continue
        if dx and dy:
            if not (is_free(free, (x + dx, y)) and is_free(free, (x, y + dy))):
                continue
            yield n, 0, 1
        else:
            yield n, 1, 0


def move_cost(a: Cell, b: Cell) -> float:
    return SQRT2 if a[0] != b[0] and a[1] != b[1] else 1.0


def exact_cost(axial: int, diagonal: int) -> float:
    """Path cost from move counts; equal counts always give the same float."""
    return axial + diagonal * SQRT2


def path_counts(path: list[Cell]) -> tuple[int, int]:
    axial = diagonal = 0
    for a, b in zip(path, path[1:]):
        if a[0] != b[0] and a[1] != b[1]:
            diagonal += 1
        else:
            axial += 1
    return axial, diagonal
