"""Trajectories, run metrics and planner outcomes."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .geometry import Point3, polyline_length


class Outcome(str, enum.Enum):
    SUCCESS = "Success"
    FAILED = "Failed"
    TIMEOUT = "Timeout"
    UNREACHABLE = "Unreachable"


class PlanStuck(RuntimeError):
    """No cell size produced a move from the current position."""

    def __init__(self, position, attempted, result: "PlanResult | None" = None):
        super().__init__(f"planner stuck at {tuple(position)} after cell sizes {list(attempted)}")
        self.position = position
        self.attempted = list(attempted)
        self.result = result


@dataclass
class Trajectory:
    """Executed positions.

    ``points[0]`` is the starting position whenever anything was executed;
    a run that never moved has no points at all.
    """

    points: list[Point3] = field(default_factory=list)
    headings: list[float] | None = None
    directions: list[int] | None = None

    @property
    def waypoints(self) -> list[Point3]:
        return self.points[1:]

    @property
    def length(self) -> float:
        return polyline_length(self.points)

    def __len__(self) -> int:
        return len(self.points)


@dataclass
class RunMetrics:
    planner: str
    outcome: Outcome
    wall_time: float = 0.0
    path_length: float = 0.0
    nodes_evaluated_per_step: list[int] = field(default_factory=list)
    step_modes: list[str] = field(default_factory=list)
    discrete: bool = False
    path_cost: float | None = None
    note: str = ""

    @property
    def steps(self) -> int:
        return len(self.nodes_evaluated_per_step)

    @property
    def nodes_evaluated_total(self) -> int:
        return sum(self.nodes_evaluated_per_step)

    @property
    def avg_nodes_per_step(self) -> float:
        n = self.steps
        return self.nodes_evaluated_total / n if n else 0.0


@dataclass
class PlanResult:
    trajectory: Trajectory
    metrics: RunMetrics

    @property
    def outcome(self) -> Outcome:
        return self.metrics.outcome
