"""Cell A*: receding-horizon search over a small lattice around the agent.

Each replanning step builds a search cell (a cube of ``cellsize`` nodes per
edge, ``gridsize`` apart) centred on the current position, scores nodes with

    J = w1 * H + sign * w2 * L

where ``H`` is the distance to the goal and ``L`` the distance to the line
through the global start and the goal, then walks the cell layer by layer
picking the cheapest reachable node in each.

Layers are slices of the lattice perpendicular to the dominant axis of the
goal direction. Slice 0 passes through the agent (lateral moves), slices
1..(cellsize-1)/2 lie ahead of it. Consecutive picks may differ by at most one
lattice step on every transverse axis.
"""

from __future__ import annotations

import itertools
import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .geometry import LineRef, Point3, euclid_dist, heuristic_h, line_dist
from .results import Outcome, PlanResult, PlanStuck, RunMetrics, Trajectory
from .world import (
    OccupancyWorld,
    SensorConfig,
    is_occupied,
    nearest_obstacle_on_path,
    reveal,
    segment_clear,
    segments_clear,
)

logger = logging.getLogger(__name__)

SIGN_RULES = ("membership", "corridor", "pass")


@dataclass(frozen=True)
class PlanParams:
    """Planner configuration.

    ``sign_rule`` picks how the L term's sign is set in avoidance mode:
    ``membership`` only looks at node occupancy, ``corridor`` also needs a
    clear straight segment from the agent, and ``pass`` (default) adds a
    step-level flip whenever the best attracted path cannot see past the
    obstacle ahead. ``w_g`` and ``k_explore`` only matter to the Ackermann
    variant.
    """

    w1: float
    w2: float
    gridsize: float
    bigstep: float
    avoidance_range: float
    goal_tolerance: float
    cellsize_min: int = 3
    cellsize_max: int = 5
    max_steps: int = 1000
    sign_rule: str = "pass"
    w_g: float = 0.0
    k_explore: int = 3

    def __post_init__(self):
        problems = []
        if not self.w1 > 0:
            problems.append("w1 must be > 0")
        if not self.w2 >= 0:
            problems.append("w2 must be >= 0")
        for name in ("cellsize_min", "cellsize_max"):
            v = getattr(self, name)
            if v < 3 or v % 2 == 0:
                problems.append(f"{name} must be odd and >= 3, got {v}")
        if self.cellsize_max < self.cellsize_min:
            problems.append("cellsize_max < cellsize_min")
        if not self.gridsize > 0:
            problems.append("gridsize must be > 0")
        if not self.bigstep >= self.gridsize:
            problems.append("bigstep must be >= gridsize")
        if not self.avoidance_range > 0:
            problems.append("avoidance_range must be > 0")
        if not self.goal_tolerance > 0:
            problems.append("goal_tolerance must be > 0")
        if self.max_steps <= 0:
            problems.append("max_steps must be > 0")
        if not 0.0 <= self.w_g <= 1.0:
            problems.append("w_g must lie in [0, 1]")
        if self.k_explore < 1:
            problems.append("k_explore must be >= 1")
        if self.sign_rule not in SIGN_RULES:
            problems.append(f"sign_rule must be one of {SIGN_RULES}")
        if problems:
            raise ValueError("; ".join(problems))

    @property
    def cell_sizes(self) -> list[int]:
        return list(range(self.cellsize_min, self.cellsize_max + 1, 2))


@dataclass(frozen=True)
class SearchCell:
    center: Point3
    cellsize: int
    gridsize: float
    dimensionality: int
    axis: int
    direction: int

    @property
    def half(self) -> int:
        return (self.cellsize - 1) // 2

    @property
    def transverse_axes(self) -> tuple[int, ...]:
        return tuple(a for a in range(self.dimensionality) if a != self.axis)

    def point(self, off) -> Point3:
        g = self.gridsize
        c = self.center
        return Point3(c[0] + g * off[0], c[1] + g * off[1], c[2] + g * off[2])

    @property
    def offsets(self) -> list[tuple[int, int, int]]:
        r = range(-self.half, self.half + 1)
        zs = r if self.dimensionality == 3 else (0,)
        return [(i, j, k) for i in r for j in r for k in zs]

    @property
    def nodes(self) -> list[Point3]:
        return [self.point(o) for o in self.offsets]

    def layer(self, s: int) -> list[tuple[int, int, int]]:
        """Offsets of the slice ``s`` steps ahead (0 = through the centre)."""
        h = self.half
        r = range(-h, h + 1)
        out = []
        for t in itertools.product(r, repeat=len(self.transverse_axes)):
            off = [0, 0, 0]
            off[self.axis] = self.direction * s
            for a, v in zip(self.transverse_axes, t):
                off[a] = v
            out.append(tuple(off))
        return out

    @property
    def layers(self) -> list[list[tuple[int, int, int]]]:
        return [self.layer(s) for s in range(self.half + 1)]


@dataclass
class CellPath:
    waypoints: list[Point3] = field(default_factory=list)
    costs: list[float] = field(default_factory=list)
    offsets: list[tuple[int, int, int]] = field(default_factory=list)
    mode: str = ""
    cellsize: int = 0
    sign: int = 1
    nodes_evaluated: int = 0

    def __bool__(self) -> bool:
        return bool(self.waypoints)

    def __len__(self) -> int:
        return len(self.waypoints)


def dominant_axis(vec, dimensionality: int = 3) -> tuple[int, int]:
    comps = [abs(vec[a]) for a in range(dimensionality)]
    axis = max(range(dimensionality), key=lambda a: (comps[a], -a))
    if comps[axis] == 0:
        raise ValueError("goal direction must be nonzero")
    return axis, (1 if vec[axis] > 0 else -1)


def gen_search_cell(
    center, cellsize: int, gridsize: float, goal_dir, dimensionality: int = 3
) -> SearchCell:
    if cellsize < 3 or cellsize % 2 == 0:
        raise ValueError(f"cellsize must be odd and >= 3, got {cellsize}")
    if not gridsize > 0:
        raise ValueError(f"gridsize must be positive, got {gridsize}")
    axis, direction = dominant_axis(goal_dir, dimensionality)
    return SearchCell(Point3(*center), cellsize, float(gridsize), dimensionality, axis, direction)


def safe_to_pass(world: OccupancyWorld, p_t, node) -> int:
    """+1 when ``node`` is free and reachable by a straight clear segment, else -1."""
    if is_occupied(world, node):
        return -1
    return 1 if segment_clear(world, p_t, node) else -1


def node_cost(node, start, goal, w1: float, w2: float, sign: int) -> float:
    return w1 * heuristic_h(node, goal) + sign * w2 * line_dist(node, LineRef(start, goal))


def _key(p) -> tuple[float, float, float]:
    return (round(p[0], 9), round(p[1], 9), round(p[2], 9))


class NodeEvaluator:
    """Per-step cache of node occupancy, H, L and corridor sign.

    Nested cells share nodes, so escalating the cell size re-uses earlier
    work; ``count`` is the number of distinct nodes evaluated this step.
    """

    def __init__(self, world: OccupancyWorld, p_t, start, goal):
        self.world = world
        self.p_t = Point3(*p_t)
        self.goal = goal
        self.line = LineRef(Point3(*start), Point3(*goal))
        self._info: dict[tuple, list] = {}
        self._corridor: dict[tuple, int] = {}

    @property
    def count(self) -> int:
        return len(self._info)

    def evaluate(self, pts) -> list[list]:
        """Return [occupied, H, L] per point, computing only unseen ones."""
        new = [p for p in pts if _key(p) not in self._info]
        if new:
            occ = self.world.occupied_many(new)
            for p, o in zip(new, occ):
                self._info[_key(p)] = [bool(o), heuristic_h(p, self.goal), line_dist(p, self.line)]
        return [self._info[_key(p)] for p in pts]

    def corridor_signs(self, pts) -> list[int]:
        todo = [p for p in pts if _key(p) not in self._corridor]
        if todo:
            clear = segments_clear(self.world, self.p_t, todo)
            for p, c in zip(todo, clear):
                occupied = self._info[_key(p)][0] if _key(p) in self._info else is_occupied(self.world, p)
                self._corridor[_key(p)] = 1 if (c and not occupied) else -1
        return [self._corridor[_key(p)] for p in pts]


def select_cell_path(
    cell: SearchCell,
    world: OccupancyWorld,
    start,
    goal,
    params: PlanParams,
    *,
    fast: bool = False,
    step_sign: int = 1,
    evaluator: NodeEvaluator | None = None,
) -> CellPath:
    """Pick the cheapest reachable node in each layer of ``cell``.

    In fast mode every sign is +1 and the lateral slice only offers the
    centre. Otherwise each node's sign comes from the corridor test (unless
    ``params.sign_rule`` is ``membership``) and ``step_sign=-1`` forces every
    sign negative. Returns an empty path when no layer yields a move.
    """
    ev = evaluator or NodeEvaluator(world, cell.center, start, goal)
    origin = (0, 0, 0)
    trans = cell.transverse_axes

    def pick(layer, pred_off, pred_pt, lateral=False):
        if lateral:
            cands = [o for o in layer if o != origin]
        else:
            cands = [o for o in layer if all(abs(o[a] - pred_off[a]) <= 1 for a in trans)]
        pts = [cell.point(o) for o in cands]
        info = ev.evaluate(pts)
        if fast or params.sign_rule == "membership":
            signs = [1] * len(pts)
        elif step_sign < 0:
            signs = [-1] * len(pts)
        else:
            free_pts = [p for p, inf in zip(pts, info) if not inf[0]]
            corr = dict(zip(map(_key, free_pts), ev.corridor_signs(free_pts)))
            signs = [corr.get(_key(p), -1) for p in pts]
        ranked = []
        for o, p, (occ, h, l), sg in zip(cands, pts, info, signs):
            if occ:
                continue
            cost = params.w1 * h + sg * params.w2 * l
            dev = sum(abs(o[a] - pred_off[a]) for a in trans)
            ranked.append((cost, dev, o, p))
        ranked.sort(key=lambda r: (r[0], r[1], r[2]))
        for cost, _, o, p in ranked:
            if segment_clear(world, pred_pt, p):
                return o, p, cost
        return None

    layers = cell.layers
    chosen: list[tuple[tuple, Point3, float]] = []
    pred_off, pred_pt = origin, cell.center
    first = pick(layers[1], pred_off, pred_pt)
    if first is None and not fast:
        first = pick(layers[0], pred_off, pred_pt, lateral=True)
        s_next = 1
    else:
        s_next = 2
    if first is not None:
        chosen.append(first)
        pred_off, pred_pt = first[0], first[1]
        for s in range(s_next, len(layers)):
            nxt = pick(layers[s], pred_off, pred_pt)
            if nxt is None:
                break
            chosen.append(nxt)
            pred_off, pred_pt = nxt[0], nxt[1]

    chosen = chosen[: cell.cellsize - 1]
    if not chosen:
        return CellPath(cellsize=cell.cellsize, nodes_evaluated=ev.count)
    return CellPath(
        waypoints=[p for _, p, _ in chosen],
        costs=[c for _, _, c in chosen],
        offsets=[o for o, _, _ in chosen],
        cellsize=cell.cellsize,
        sign=step_sign,
        nodes_evaluated=ev.count,
    )


def _goal_visible(world: OccupancyWorld, p, goal, horizon: float) -> bool:
    if euclid_dist(p, goal) == 0:
        return True
    return nearest_obstacle_on_path(world, [goal], p, max_dist=horizon) is None


def plan_step(
    world: OccupancyWorld,
    p_t,
    start,
    goal,
    prev_path: CellPath | None,
    params: PlanParams,
) -> CellPath:
    """One replanning step: fast mode when the way ahead is clear, else avoidance."""
    p_t = Point3(*p_t)
    d = world.dimensionality
    goal_dir = Point3(*goal) - p_t
    ev = NodeEvaluator(world, p_t, start, goal)

    probe = [Point3(*goal)]
    if prev_path:
        ahead = prev_path.waypoints
        if p_t in ahead:
            ahead = ahead[ahead.index(p_t) + 1 :]
        probe = [*ahead, *probe]
    blocked_at = nearest_obstacle_on_path(world, probe, p_t, max_dist=params.avoidance_range)

    if blocked_at is None:
        # shrink the fast cell next to the goal so it cannot overshoot
        step = params.bigstep if euclid_dist(p_t, goal) > params.bigstep else params.gridsize
        cell = gen_search_cell(p_t, 3, step, goal_dir, d)
        path = select_cell_path(cell, world, start, goal, params, fast=True, evaluator=ev)
        if path:
            path.mode = "fast"
            return path

    attempted = []
    fallback = None
    for cs in params.cell_sizes:
        attempted.append(cs)
        cell = gen_search_cell(p_t, cs, params.gridsize, goal_dir, d)
        path = select_cell_path(cell, world, start, goal, params, step_sign=1, evaluator=ev)
        if params.sign_rule != "pass":
            if path:
                break
            continue
        if path and _goal_visible(world, path.waypoints[-1], goal, params.avoidance_range):
            break
        if fallback is None:
            flipped = select_cell_path(cell, world, start, goal, params, step_sign=-1, evaluator=ev)
            fallback = flipped or path or None
        path = None
    else:
        path = fallback
    if not path:
        raise PlanStuck(p_t, attempted)
    path.mode = "avoid"
    path.nodes_evaluated = ev.count
    return path


def plan(
    world: OccupancyWorld,
    start,
    goal,
    params: PlanParams,
    sensor: SensorConfig | None = None,
) -> PlanResult:
    """Run the receding-horizon loop until the goal is within tolerance.

    Waypoints are executed exactly as planned. ``sensor`` drives reveal in
    semi-known worlds; pass None for a fully known map. Raises
    :class:`PlanStuck` (with the partial result attached) when no cell size
    yields a move.
    """
    start = Point3(*start)
    goal = Point3(*goal)
    p = start
    points = [start]
    metrics = RunMetrics(planner="cell_astar", outcome=Outcome.TIMEOUT)
    prev: CellPath | None = None
    elapsed = 0.0

    def finish(outcome: Outcome) -> PlanResult:
        metrics.outcome = outcome
        metrics.wall_time = elapsed
        traj = Trajectory(points if len(points) > 1 else [])
        metrics.path_length = traj.length
        return PlanResult(traj, metrics)

    while euclid_dist(p, goal) > params.goal_tolerance:
        if metrics.steps >= params.max_steps:
            return finish(Outcome.TIMEOUT)
        if sensor is not None:
            reveal(world, p, sensor)
        t0 = time.perf_counter()
        try:
            path = plan_step(world, p, start, goal, prev, params)
        except PlanStuck as exc:
            elapsed += time.perf_counter() - t0
            exc.result = finish(Outcome.FAILED)
            raise
        elapsed += time.perf_counter() - t0
        metrics.nodes_evaluated_per_step.append(path.nodes_evaluated)
        metrics.step_modes.append(path.mode)
        for w in path.waypoints:
            if w != p:
                points.append(w)
                p = w
            if euclid_dist(p, goal) <= params.goal_tolerance:
                break
        prev = path
    return finish(Outcome.SUCCESS)
