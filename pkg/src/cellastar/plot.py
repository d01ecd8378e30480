"""Deterministic SVG rendering of maps, trajectories and search cells.

Output depends only on the inputs: elements are emitted in a fixed order,
ids are stable and coordinates are printed with fixed precision, so reruns
are byte-identical and tests can parse the numbers back.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .world import OccupancyWorld

LAYERS = frozenset({"obstacles", "revealed", "trajectory", "markers", "cells"})
MARGIN = 10.0
PANEL_GAP = 20.0


@dataclass(frozen=True)
class PlotSpec:
    """``scale`` is pixels per metre; None fits the map to the canvas."""

    width: int = 800
    height: int = 600
    scale: float | None = None
    layers: frozenset = field(default=frozenset({"obstacles", "revealed", "trajectory", "markers"}))
    cell_steps: int = 0

    def __post_init__(self):
        object.__setattr__(self, "layers", frozenset(self.layers))
        if self.width <= 0 or self.height <= 0:
            raise ValueError("canvas size must be positive")
        if self.scale is not None and not self.scale > 0:
            raise ValueError("scale must be positive")
        if not self.layers:
            raise ValueError("layer set is empty")
        unknown = self.layers - LAYERS
        if unknown:
            raise ValueError(f"unknown layers {sorted(unknown)}")
        if self.cell_steps < 0:
            raise ValueError("cell_steps must be >= 0")


def _f(v: float) -> str:
    s = f"{v:.2f}"
    return "0.00" if s == "-0.00" else s


@dataclass(frozen=True)
class Panel:
    """Maps world axes ``(ax, ay)`` into a pixel box, y pointing up."""

    name: str
    ax: int
    ay: int
    lo: tuple[float, float]
    hi: tuple[float, float]
    left: float
    bottom: float
    scale: float

    def xy(self, p) -> tuple[float, float]:
        return (
            self.left + (p[self.ax] - self.lo[0]) * self.scale,
            self.bottom - (p[self.ay] - self.lo[1]) * self.scale,
        )


def _panels(world: OccupancyWorld, spec: PlotSpec, extent_pts) -> list[Panel]:
    lo, hi = world.bounds
    lo, hi = np.array(lo, dtype=float), np.array(hi, dtype=float)
    if len(extent_pts):
        # unbounded 3-D worlds take their extent from what is drawn
        pts = np.asarray(extent_pts, dtype=float)
        lo = np.where(np.isfinite(lo), lo, pts.min(axis=0) - 1.0)
        hi = np.where(np.isfinite(hi), hi, pts.max(axis=0) + 1.0)
    lo = np.where(np.isfinite(lo), lo, 0.0)
    hi = np.where(np.isfinite(hi), np.maximum(hi, lo + 1e-9), lo + 1.0)
    views = [("top", 0, 1)] if world.dimensionality == 2 else [("top", 0, 1), ("side", 0, 2)]
    n = len(views)
    box_w = (spec.width - 2 * MARGIN - PANEL_GAP * (n - 1)) / n
    box_h = spec.height - 2 * MARGIN
    panels = []
    for i, (name, ax, ay) in enumerate(views):
        span_x = hi[ax] - lo[ax]
        span_y = hi[ay] - lo[ay]
        scale = spec.scale if spec.scale is not None else min(box_w / span_x, box_h / span_y)
        left = MARGIN + i * (box_w + PANEL_GAP)
        panels.append(
            Panel(name, ax, ay, (float(lo[ax]), float(lo[ay])), (float(hi[ax]), float(hi[ay])),
                  left, MARGIN + span_y * scale, scale)
        )
    return panels


def _grid_runs(grid: np.ndarray):
    """Horizontal runs ``(iy, ix0, ix1)`` of set cells, row by row."""
    for iy in range(grid.shape[0]):
        row = grid[iy]
        ix = 0
        n = len(row)
        while ix < n:
            if row[ix]:
                start = ix
                while ix < n and row[ix]:
                    ix += 1
                yield iy, start, ix - 1
            else:
                ix += 1


def _obstacle_elems(world: OccupancyWorld, panel: Panel, which: str, css: str) -> list[str]:
    out = []
    r = world.resolution
    s = panel.scale
    if world.dimensionality == 2:
        grid = world.true_grid if which == "true" else world.known_grid
        for iy, ix0, ix1 in _grid_runs(grid):
            x, y = panel.xy(((ix0 - 0.5) * r, (iy + 0.5) * r, 0.0))
            w = (ix1 - ix0 + 1) * r * s
            out.append(f'<rect class="{css}" x="{_f(x)}" y="{_f(y)}" width="{_f(w)}" height="{_f(r * s)}"/>')
        return out
    pts = world.true_points if which == "true" else world.true_points[world.known_mask]
    if not len(pts):
        return out
    proj = np.round(pts[:, [panel.ax, panel.ay]] / r).astype(int)
    for i, j in sorted(set(map(tuple, proj.tolist()))):
        x, y = panel.xy({panel.ax: (i - 0.5) * r, panel.ay: (j + 0.5) * r})
        out.append(f'<rect class="{css}" x="{_f(x)}" y="{_f(y)}" width="{_f(r * s)}" height="{_f(r * s)}"/>')
    return out


def render_svg(
    world: OccupancyWorld,
    points=(),
    spec: PlotSpec = PlotSpec(),
    start=None,
    goal=None,
    cells=(),
) -> str:
    """SVG text for one world plus an optional trajectory.

    ``points`` are (x, y, z) triples; ``start``/``goal`` default to the
    trajectory ends. ``cells`` is a list of node lists drawn when the
    ``cells`` layer is on.
    """
    pts = [tuple(float(c) for c in p) for p in points]
    if start is None and pts:
        start = pts[0]
    if goal is None and pts:
        goal = pts[-1]
    extent = list(pts) + [p for p in (start, goal) if p is not None]
    if world.dimensionality == 3 and len(world.true_points):
        extent += world.true_points.tolist()
    panels = _panels(world, spec, extent)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{spec.width}" height="{spec.height}" '
        f'viewBox="0 0 {spec.width} {spec.height}">',
        "<style>.obstacle{fill:#b0b0b0}.revealed{fill:#404040}.cell{fill:#3070d0}"
        ".traj{fill:none;stroke:#d02020;stroke-width:1.5}</style>",
        f'<rect id="background" x="0" y="0" width="{spec.width}" height="{spec.height}" fill="#ffffff"/>',
    ]
    for panel in panels:
        out.append(f'<g id="panel-{panel.name}">')
        x0, y1 = panel.xy({panel.ax: panel.lo[0], panel.ay: panel.lo[1]})
        x1, y0 = panel.xy({panel.ax: panel.hi[0], panel.ay: panel.hi[1]})
        out.append(
            f'<rect id="{panel.name}-frame" x="{_f(x0)}" y="{_f(y0)}" width="{_f(x1 - x0)}" '
            f'height="{_f(y1 - y0)}" fill="none" stroke="#000000"/>'
        )
        if "obstacles" in spec.layers:
            out.append(f'<g id="{panel.name}-obstacles">')
            out += _obstacle_elems(world, panel, "true", "obstacle")
            out.append("</g>")
        if "revealed" in spec.layers and world.semi_known:
            out.append(f'<g id="{panel.name}-revealed">')
            out += _obstacle_elems(world, panel, "known", "revealed")
            out.append("</g>")
        if "cells" in spec.layers and cells:
            out.append(f'<g id="{panel.name}-cells">')
            for k, nodes in enumerate(cells):
                for q in nodes:
                    x, y = panel.xy(q)
                    out.append(f'<circle class="cell" data-step="{k}" cx="{_f(x)}" cy="{_f(y)}" r="1.5"/>')
            out.append("</g>")
        if "trajectory" in spec.layers and pts:
            coords = " ".join(f"{_f(x)},{_f(y)}" for x, y in (panel.xy(p) for p in pts))
            out.append(f'<polyline id="{panel.name}-trajectory" class="traj" points="{coords}"/>')
        if "markers" in spec.layers:
            if start is not None:
                x, y = panel.xy(start)
                out.append(f'<circle id="{panel.name}-start" cx="{_f(x)}" cy="{_f(y)}" r="5" fill="#20a020"/>')
            if goal is not None:
                x, y = panel.xy(goal)
                out.append(
                    f'<rect id="{panel.name}-goal" x="{_f(x - 5)}" y="{_f(y - 5)}" width="10" height="10" fill="#2040d0"/>'
                )
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
