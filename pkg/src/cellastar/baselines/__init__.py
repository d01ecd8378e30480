"""Comparison planners and the shortest-path oracle."""

from .dijkstra import dijkstra_oracle, dijkstra_path
from .dstar_lite import DStarLite, GridNode8, dstar_lite_plan
from .grid import Unreachable
from .hybrid_astar import HybridAStarParams, hybrid_astar_plan

__all__ = [
    "DStarLite",
    "GridNode8",
    "HybridAStarParams",
    "Unreachable",
    "dijkstra_oracle",
    "dijkstra_path",
    "dstar_lite_plan",
    "hybrid_astar_plan",
]
