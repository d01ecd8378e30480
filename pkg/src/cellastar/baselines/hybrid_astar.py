"""Local Hybrid A* under a per-call expansion budget.

Every replanning call runs a best-first search from the current state with
priority ``f + w_g * g`` (distance to goal plus weighted distance to the
global start), stops after ``step_budget`` expansions, and commits to the
first motion toward the best node found. States are de-duplicated by a
position/heading bucket; the agent is declared Failed once it lands in the
same bucket more than ``loop_threshold`` times.
"""

from __future__ import annotations

import heapq
import itertools
import math
import time
from collections import Counter
from dataclasses import dataclass

import numpy as np

from ..ackermann import AckermannSampler, AckermannState, arc_end, arc_samples
from ..geometry import Point3, euclid_dist, hybrid_heuristic, wrap_angle
from ..results import Outcome, PlanResult, RunMetrics, Trajectory
from ..world import OccupancyWorld, segment_clear

LATTICE_2D = tuple((dx, dy, 0) for dx in (-1, 0, 1) for dy in (-1, 0, 1) if dx or dy)
LATTICE_3D = ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1))


@dataclass(frozen=True)
class HybridAStarParams:
    """``sampler=None`` switches to lattice moves of ``gridsize`` (8 in 2-D, 6 in 3-D)."""

    w_g: float
    step_budget: int
    goal_tolerance: float
    sampler: AckermannSampler | None = None
    gridsize: float = 1.0
    heading_bucket: float = math.radians(10)
    loop_threshold: int = 3
    max_steps: int = 2000
    allow_reverse: bool = True

    def __post_init__(self):
        if not 0.0 <= self.w_g <= 1.0:
            raise ValueError("w_g must lie in [0, 1]")
        if self.step_budget <= 0:
            raise ValueError("step_budget must be > 0")
        if not self.goal_tolerance > 0:
            raise ValueError("goal_tolerance must be > 0")
        if not self.gridsize > 0 or not self.heading_bucket > 0:
            raise ValueError("bucket sizes must be positive")
        if self.loop_threshold < 1 or self.max_steps < 1:
            raise ValueError("loop_threshold and max_steps must be >= 1")


@dataclass
class _Node:
    state: AckermannState | Point3
    parent: "_Node | None"
    motion: tuple | None
    depth: int


class _Search:
    def __init__(self, world: OccupancyWorld, start, goal: Point3, params: HybridAStarParams):
        self.world = world
        self.start = start
        self.goal = goal
        self.p = params
        self.lattice = LATTICE_3D if world.dimensionality == 3 else LATTICE_2D

    def pos(self, s) -> Point3:
        return s.point if isinstance(s, AckermannState) else s

    def bucket(self, s) -> tuple:
        q = self.pos(s)
        g = self.p.gridsize
        key = (math.floor(q[0] / g + 0.5), math.floor(q[1] / g + 0.5), math.floor(q[2] / g + 0.5))
        if isinstance(s, AckermannState):
            key += (math.floor(wrap_angle(s.theta) / self.p.heading_bucket + 0.5),)
        return key

    def priority(self, s) -> float:
        return hybrid_heuristic(self.pos(s), self.start, self.goal, self.p.w_g)

    def successors(self, s):
        p = self.p
        if p.sampler is None:
            for off in self.lattice:
                q = Point3(s[0] + off[0] * p.gridsize, s[1] + off[1] * p.gridsize, s[2] + off[2] * p.gridsize)
                if segment_clear(self.world, s, q):
                    yield q, off
            return
        dirs = (1, -1) if p.allow_reverse else (1,)
        sp = p.sampler
        for d in dirs:
            for delta in sp.steering_set:
                pts, _ = arc_samples(s, delta, d, sp.l, sp.wheelbase, self.world.sample_spacing)
                xyz = np.column_stack([pts, np.zeros(len(pts))])
                if self.world.occupied_many(xyz).any():
                    continue
                yield arc_end(s, delta, d, sp.l, sp.wheelbase), (delta, d)

    def run(self, root):
        """Budgeted best-first search; returns (best node, expansions, reached goal)."""
        tie = itertools.count()
        root_node = _Node(root, None, None, 0)
        heap = [(self.priority(root), next(tie), root_node)]
        closed = set()
        best, best_key = None, math.inf
        expansions = 0
        while heap and expansions < self.p.step_budget:
            _, _, node = heapq.heappop(heap)
            b = self.bucket(node.state)
            if b in closed:
                continue
            closed.add(b)
            expansions += 1
            if node.depth and euclid_dist(self.pos(node.state), self.goal) <= self.p.goal_tolerance:
                return node, expansions, True
            for s, motion in self.successors(node.state):
                if self.bucket(s) in closed:
                    continue
                child = _Node(s, node, motion, node.depth + 1)
                pr = self.priority(s)
                heapq.heappush(heap, (pr, next(tie), child))
                if pr < best_key:
                    best, best_key = child, pr
        return best, expansions, False


def _first_motion(node: _Node) -> _Node:
    while node.parent is not None and node.parent.parent is not None:
        node = node.parent
    return node


def hybrid_astar_plan(world: OccupancyWorld, start, goal, params: HybridAStarParams) -> PlanResult:
    """Receding-horizon local Hybrid A*.

    ``start`` is an :class:`AckermannState` when a sampler is configured,
    otherwise a point. If the budgeted search reaches the goal the whole
    path is executed, otherwise only its first motion.
    """
    goal = Point3(goal[0], goal[1], goal[2] if len(goal) > 2 else 0.0)
    car = params.sampler is not None
    if car and not isinstance(start, AckermannState):
        raise ValueError("an Ackermann sampler needs an AckermannState start")
    state = start if car else Point3(*start)
    search = _Search(world, search_start_point(state), goal, params)
    metrics = RunMetrics(planner="hybrid_astar", outcome=Outcome.FAILED)
    points = [search.pos(state)]
    headings = [state.theta] if car else None
    directions = [1] if car else None
    visits: Counter = Counter({search.bucket(state): 1})
    elapsed = 0.0

    def finish(outcome: Outcome, note: str = "") -> PlanResult:
        metrics.outcome = outcome
        metrics.note = note
        metrics.wall_time = elapsed
        traj = Trajectory(points, headings, directions) if len(points) > 1 else Trajectory([])
        metrics.path_length = traj.length
        return PlanResult(traj, metrics)

    def execute(node: _Node):
        nonlocal state
        parent = node.parent.state
        if car:
            delta, d = node.motion
            sp = params.sampler
            pts, ths = arc_samples(parent, delta, d, sp.l, sp.wheelbase, world.sample_spacing)
            for (x, y), th in zip(pts[1:], ths[1:]):
                points.append(Point3(float(x), float(y), 0.0))
                headings.append(wrap_angle(float(th)))
                directions.append(d)
        else:
            points.append(node.state)
        state = node.state

    while euclid_dist(search.pos(state), goal) > params.goal_tolerance:
        if metrics.steps >= params.max_steps:
            return finish(Outcome.FAILED, f"step limit reached at {tuple(round(c, 3) for c in search.pos(state))}")
        t0 = time.perf_counter()
        node, expansions, reached = search.run(state)
        elapsed += time.perf_counter() - t0
        metrics.nodes_evaluated_per_step.append(expansions)
        metrics.step_modes.append("search")
        if node is None:
            return finish(Outcome.FAILED, f"no motion possible at {tuple(round(c, 3) for c in search.pos(state))}")
        if reached:
            chain = []
            while node.parent is not None:
                chain.append(node)
                node = node.parent
            for n in reversed(chain):
                execute(n)
            break
        execute(_first_motion(node))
        b = search.bucket(state)
        visits[b] += 1
        if visits[b] > params.loop_threshold:
            return finish(Outcome.FAILED, f"trapped near {tuple(round(c, 3) for c in search.pos(state))}")
    return finish(Outcome.SUCCESS)


def search_start_point(state) -> Point3:
    return state.point if isinstance(state, AckermannState) else Point3(*state)
