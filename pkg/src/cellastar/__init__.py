"""Local cell-based path planning for drones and car-like robots."""

from .ackermann import AckermannSampler, AckermannState, plan_ackermann
from .cell_astar import PlanParams, plan, plan_step
from .geometry import Point3
from .results import Outcome, PlanResult, PlanStuck, RunMetrics, Trajectory
from .world import OccupancyWorld, SensorConfig, load_map_2d, load_obstacles_3d

__version__ = "0.1.0"

__all__ = [
    "AckermannSampler",
    "AckermannState",
    "OccupancyWorld",
    "Outcome",
    "PlanParams",
    "PlanResult",
    "PlanStuck",
    "Point3",
    "RunMetrics",
    "SensorConfig",
    "Trajectory",
    "load_map_2d",
    "load_obstacles_3d",
    "plan",
    "plan_ackermann",
    "plan_step",
]
