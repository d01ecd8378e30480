"""Cell A* for car-like robots.

Nodes are no longer lattice points but the end states of constant-steering
arcs grown from the current state (kinematic bicycle model, rear axle as
reference). Each layer of the sampling cell holds one arc per steering angle
grown from the node picked in the previous layer.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .cell_astar import PlanParams
from .geometry import LineRef, Point3, euclid_dist, heuristic_h, line_dist, wrap_angle
from .results import Outcome, PlanResult, PlanStuck, RunMetrics, Trajectory
from .world import OccupancyWorld, SensorConfig, nearest_obstacle_on_path, reveal


@dataclass(frozen=True)
class AckermannState:
    x: float
    y: float
    theta: float = 0.0
    d: int = 1

    def __post_init__(self):
        if self.d not in (1, -1):
            raise ValueError(f"direction must be +1 or -1, got {self.d}")
        object.__setattr__(self, "theta", wrap_angle(self.theta))

    @property
    def point(self) -> Point3:
        return Point3(self.x, self.y, 0.0)


@dataclass(frozen=True)
class AckermannSampler:
    l: float
    steering_set: tuple[float, ...]
    wheelbase: float
    d: int = 1
    delta_max: float = math.radians(35)

    def __post_init__(self):
        object.__setattr__(self, "steering_set", tuple(float(s) for s in self.steering_set))
        if not self.l > 0:
            raise ValueError("sampling distance l must be positive")
        if not self.wheelbase > 0:
            raise ValueError("wheelbase must be positive")
        if self.d not in (1, -1):
            raise ValueError("direction must be +1 or -1")
        if not 0 < self.delta_max < math.pi / 2:
            raise ValueError("delta_max must lie in (0, pi/2)")
        if not self.steering_set:
            raise ValueError("steering_set is empty")
        for s in self.steering_set:
            if abs(s) > self.delta_max + 1e-12:
                raise ValueError(f"steering angle {s} exceeds delta_max {self.delta_max}")

    @property
    def max_curvature(self) -> float:
        return math.tan(self.delta_max) / self.wheelbase

    def with_direction(self, d: int) -> "AckermannSampler":
        return AckermannSampler(self.l, self.steering_set, self.wheelbase, d, self.delta_max)


def arc_end(state: AckermannState, delta: float, d: int, length: float, wheelbase: float) -> AckermannState:
    """Closed-form end of a constant-steering arc of the given length."""
    kappa = math.tan(delta) / wheelbase
    half = d * kappa * length / 2
    # chord form: stable as kappa -> 0, where (sin(a + b) - sin(a)) / kappa cancels badly
    chord = d * length * _sinc(half)
    th = state.theta
    return AckermannState(
        state.x + chord * math.cos(th + half), state.y + chord * math.sin(th + half), th + 2 * half, d
    )


def _sinc(u):
    """sin(u) / u with the removable singularity filled in."""
    return np.sinc(np.asarray(u) / math.pi) if isinstance(u, np.ndarray) else float(np.sinc(u / math.pi))

def arc_samples(
    state: AckermannState, delta: float, d: int, length: float, wheelbase: float, spacing: float
) -> tuple[np.ndarray, np.ndarray]:
    """Positions (n, 2) and headings (n,) along an arc, endpoints included."""
    n = max(1, math.ceil(length / spacing))
    s = np.linspace(0.0, length, n + 1)
    kappa = math.tan(delta) / wheelbase
    th0 = state.theta
    half = d * kappa * s / 2
    chord = d * s * _sinc(half)
    th = th0 + 2 * half
    xs = state.x + chord * np.cos(th0 + half)
    ys = state.y + chord * np.sin(th0 + half)
    return np.column_stack([xs, ys]), th


def ackermann_expand(state: AckermannState, sampler: AckermannSampler) -> list[AckermannState]:
    """One arc of length ``l`` per steering angle, grown in direction ``sampler.d``."""
    return [arc_end(state, delta, sampler.d, sampler.l, sampler.wheelbase) for delta in sampler.steering_set]


@dataclass
class _Arc:
    parent: AckermannState
    delta: float
    end: AckermannState
    cost: float


@dataclass
class _StepStats:
    nodes: set = field(default_factory=set)


class AckermannPlanner:
    """Receding-horizon loop state for :func:`plan_ackermann`."""

    def __init__(self, world, start, goal, params, sampler, sensor):
        self.world = world
        self.start = start
        self.goal = Point3(goal[0], goal[1], 0.0)
        self.params = params
        self.sampler = sampler
        self.sensor = sensor
        self.line = LineRef(start.point, self.goal)
        self.reverse_left = 0
        self.explore_left = 0
        # repeated dead ends lengthen the escape; progress past the best
        # distance seen at the last dead end resets it
        self.escalation = 0
        self.stuck_best = math.inf

    # -- one sampling cell ---------------------------------------------------

    def _arc_clear(self, parent: AckermannState, delta: float, d: int) -> bool:
        pts, _ = arc_samples(parent, delta, d, self.sampler.l, self.sampler.wheelbase, self.world.sample_spacing)
        xyz = np.column_stack([pts, np.zeros(len(pts))])
        return not self.world.occupied_many(xyz).any()

    def chain(self, state: AckermannState, layers: int, sign: int, d: int, stats: _StepStats) -> list[_Arc]:
        p = self.params
        local_start = state.point
        out: list[_Arc] = []
        cur = state
        for _ in range(layers):
            best = None
            for delta in self.sampler.steering_set:
                end = arc_end(cur, delta, d, self.sampler.l, self.sampler.wheelbase)
                stats.nodes.add((round(end.x, 9), round(end.y, 9), round(end.theta, 9), d))
                if not self._arc_clear(cur, delta, d):
                    continue
                q = end.point
                # backing up can only move away from the goal, so H is
                # dropped while reversing and L alone steers the retreat
                h_term = p.w1 * heuristic_h(q, self.goal) if d > 0 else 0.0
                cost = (
                    h_term
                    + sign * p.w2 * line_dist(q, self.line)
                    + p.w_g * euclid_dist(q, local_start)
                )
                key = (cost, abs(delta), delta)
                if best is None or key < best[0]:
                    best = (key, _Arc(cur, delta, end, cost))
            if best is None:
                break
            out.append(best[1])
            cur = best[1].end
        return out

    def _sees_goal(self, q: Point3) -> bool:
        if euclid_dist(q, self.goal) == 0:
            return True
        return nearest_obstacle_on_path(self.world, [self.goal], q, max_dist=self.params.avoidance_range) is None

    def step(self, state: AckermannState) -> tuple[list[_Arc], int, str]:
        p = self.params
        stats = _StepStats()
        here = state.point
        h = heuristic_h(here, self.goal)
        if self.escalation and h < self.stuck_best - self.sampler.l:
            self.escalation = 0
            self.stuck_best = math.inf
        blocked = not self._sees_goal(here)
        layers = p.cellsize_max - 1 if blocked else 1

        if self.reverse_left:
            self.reverse_left -= 1
            arcs = self.chain(state, p.cellsize_max - 1, 1, -1, stats)
            if arcs:
                return arcs, len(stats.nodes), "reverse"
            self.reverse_left = 0
        if self.explore_left:
            self.explore_left -= 1
            arcs = self.chain(state, p.cellsize_max - 1, -1, 1, stats)
            if arcs:
                return arcs, len(stats.nodes), "explore"
            self.explore_left = 0

        arcs = self.chain(state, layers, 1, 1, stats)
        if arcs and (not blocked or self._sees_goal(arcs[-1].end.point)):
            return arcs, len(stats.nodes), "fast" if not blocked else "avoid"
        if arcs:
            flipped = self.chain(state, layers, -1, 1, stats)
            return (flipped or arcs), len(stats.nodes), "avoid"
        # nothing ahead: back out, then explore away from the line
        back = self.chain(state, p.cellsize_max - 1, 1, -1, stats)
        if back:
            self.escalation += 1
            self.stuck_best = min(self.stuck_best, h)
            k = p.k_explore * self.escalation
            self.reverse_left = k - 1
            self.explore_left = k
            return back, len(stats.nodes), "reverse"
        raise PlanStuck(here, [p.cellsize_max])


def plan_ackermann(
    world: OccupancyWorld,
    start: AckermannState,
    goal,
    params: PlanParams,
    sampler: AckermannSampler,
    sensor: SensorConfig | None = None,
) -> PlanResult:
    """Drive a car-like agent to ``goal`` by repeated arc sampling.

    The node cost is ``w1*H + sign*w2*L + w_g*g`` where ``g`` is measured
    from the state the current sampling cell grew from. When nothing ahead is
    reachable the agent reverses for ``k_explore`` steps and then explores
    away from the start-goal line for another ``k_explore`` steps.
    """
    if world.dimensionality != 2:
        raise ValueError("plan_ackermann needs a 2-D world")
    # an attracted chain plus a repelled one must fit the per-step budget
    if 2 * len(sampler.steering_set) * (params.cellsize_max - 1) > params.cellsize_max**2:
        raise ValueError("steering set too large for the per-step node budget")
    planner = AckermannPlanner(world, start, goal, params, sampler, sensor)
    goal_pt = planner.goal
    state = AckermannState(start.x, start.y, start.theta, 1)
    points = [state.point]
    headings = [state.theta]
    directions = [1]
    metrics = RunMetrics(planner="cell_astar_ackermann", outcome=Outcome.TIMEOUT)
    elapsed = 0.0

    def finish(outcome: Outcome) -> PlanResult:
        metrics.outcome = outcome
        metrics.wall_time = elapsed
        if len(points) > 1:
            traj = Trajectory(points, headings, directions)
        else:
            traj = Trajectory([])
        metrics.path_length = traj.length
        return PlanResult(traj, metrics)

    spacing = world.sample_spacing
    while euclid_dist(state.point, goal_pt) > params.goal_tolerance:
        if metrics.steps >= params.max_steps:
            return finish(Outcome.TIMEOUT)
        if sensor is not None:
            reveal(world, state.point, sensor)
        t0 = time.perf_counter()
        try:
            arcs, n_nodes, mode = planner.step(state)
        except PlanStuck as exc:
            elapsed += time.perf_counter() - t0
            exc.result = finish(Outcome.FAILED)
            raise
        elapsed += time.perf_counter() - t0
        metrics.nodes_evaluated_per_step.append(n_nodes)
        metrics.step_modes.append(mode)
        arrived = False
        for arc in arcs[: params.cellsize_max - 1]:
            pts, ths = arc_samples(arc.parent, arc.delta, arc.end.d, sampler.l, sampler.wheelbase, spacing)
            for (x, y), th in zip(pts[1:], ths[1:]):
                points.append(Point3(float(x), float(y), 0.0))
                headings.append(wrap_angle(float(th)))
                directions.append(arc.end.d)
                if euclid_dist(points[-1], goal_pt) <= params.goal_tolerance:
                    arrived = True
                    break
            state = AckermannState(points[-1].x, points[-1].y, headings[-1], arc.end.d)
            if arrived:
                break
    return finish(Outcome.SUCCESS)
