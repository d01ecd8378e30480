"""Post-run collision audit against the true obstacle set."""

from __future__ import annotations

import numpy as np

from ..world import OccupancyWorld, segment_samples


def truth_world(world: OccupancyWorld) -> OccupancyWorld:
    """Copy of ``world`` where every true obstacle is known."""
    truth = world.clone()
    if truth.dimensionality == 2:
        truth.known_grid = truth.true_grid.copy()
        truth._refresh_inflated()
    else:
        truth.known_mask[:] = True
        truth._refresh_tree()
    return truth


def audit_points(world: OccupancyWorld, points) -> list[tuple[float, float, float]]:
    """Samples of the executed polyline that hit an inflated true obstacle.

    Segments are re-sampled at a quarter of the world resolution,
    independent of how the planner checked them.
    """
    pts = [tuple(float(c) for c in p) for p in points]
    if not pts:
        return []
    truth = truth_world(world)
    spacing = world.resolution / 4.0
    if len(pts) == 1:
        dense = np.array(pts)
    else:
        dense = np.concatenate([segment_samples(a, b, spacing) for a, b in zip(pts, pts[1:])])
    hits = truth.occupied_many(dense)
    out = []
    for p in dense[hits]:
        q = tuple(float(c) for c in p)
        if not out or out[-1] != q:
            out.append(q)
    return out
