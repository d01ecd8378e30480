"""Distance and cost kernels shared by every planner.

Points are plain ``Point3`` named tuples; 2-D worlds use ``z = 0``.
"""

from __future__ import annotations

import math
from typing import NamedTuple


class Point3(NamedTuple):
    x: float
    y: float
    z: float = 0.0

    @classmethod
    def checked(cls, x: float, y: float, z: float = 0.0) -> "Point3":
        """Build a point, rejecting NaN/Inf coordinates."""
        p = cls(float(x), float(y), float(z))
        if not all(math.isfinite(c) for c in p):
            raise ValueError(f"non-finite coordinate in {p!r}")
        return p

    def __add__(self, other):  # type: ignore[override]
        return Point3(self.x + other[0], self.y + other[1], self.z + other[2])

    def __sub__(self, other):
        return Point3(self.x - other[0], self.y - other[1], self.z - other[2])

    def scaled(self, k: float) -> "Point3":
        return Point3(self.x * k, self.y * k, self.z * k)


class LineRef(NamedTuple):
    """Infinite line through ``start`` and ``goal``."""

    start: Point3
    goal: Point3


def euclid_dist(a, b) -> float:
    return math.sqrt((a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2 + (a[2] - b[2]) ** 2)


def heuristic_h(p, goal) -> float:
    """Straight-line distance to the goal."""
    return euclid_dist(p, goal)


def line_dist(p, line: LineRef) -> float:
    """Perpendicular distance from ``p`` to the infinite line ``line``.

    A degenerate line (start == goal) collapses to the distance to that point.
    """
    s, g = line
    dx, dy, dz = g[0] - s[0], g[1] - s[1], g[2] - s[2]
    vx, vy, vz = p[0] - s[0], p[1] - s[1], p[2] - s[2]
    dd = dx * dx + dy * dy + dz * dz
    if dd == 0.0:
        return math.sqrt(vx * vx + vy * vy + vz * vz)
    # |v x d| / |d|
    cx = vy * dz - vz * dy
    cy = vz * dx - vx * dz
    cz = vx * dy - vy * dx
    return math.sqrt((cx * cx + cy * cy + cz * cz) / dd)


def hybrid_heuristic(p, start, goal, w_g: float) -> float:
    """Hybrid A* priority: distance to goal plus ``w_g`` times distance to start."""
    if not 0.0 <= w_g <= 1.0:
        raise ValueError(f"w_g must lie in [0, 1], got {w_g}")
    return euclid_dist(p, goal) + w_g * euclid_dist(p, start)


def polyline_length(points) -> float:
    return sum(euclid_dist(a, b) for a, b in zip(points, points[1:]))


def wrap_angle(theta: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    t = math.fmod(theta + math.pi, 2.0 * math.pi)
    if t <= 0.0:
        t += 2.0 * math.pi
    return t - math.pi
