import math

import numpy as np
import pytest
from scipy.sparse import lil_matrix
from scipy.sparse.csgraph import dijkstra as sp_dijkstra

from cellastar.ackermann import AckermannSampler, AckermannState
from cellastar.baselines import (
    DStarLite,
    GridNode8,
    HybridAStarParams,
    Unreachable,
    dijkstra_oracle,
    dstar_lite_plan,
    hybrid_astar_plan,
)
from cellastar.bench.audit import audit_points
from cellastar.bench.fixtures import blocks_grid, grid_text, table1_grid
from cellastar.results import Outcome
from cellastar.world import SensorConfig, is_occupied, load_map_2d, load_obstacles_3d, segment_clear

from conftest import grid_world, random_grid_world

SQ2 = math.sqrt(2)


def scipy_oracle(world, a, b):
    """Independent 8-connected shortest path with no corner cutting."""
    free = ~world.blocked_grid
    ny, nx = free.shape
    idx = lambda x, y: y * nx + x
    m = lil_matrix((nx * ny, nx * ny))
    for y in range(ny):
        for x in range(nx):
            if not free[y, x]:
                continue
            for dx in (-1, 0, 1):
                for dy in (-1, 0, 1):
                    X, Y = x + dx, y + dy
                    if (dx, dy) == (0, 0) or not (0 <= X < nx and 0 <= Y < ny) or not free[Y, X]:
                        continue
                    if dx and dy and not (free[y, X] and free[Y, x]):
                        continue
                    m[idx(x, y), idx(X, Y)] = SQ2 if dx and dy else 1.0
    d = sp_dijkstra(m.tocsr(), indices=idx(*a))
    return float(d[idx(*b)])


# -- dijkstra oracle ------------------------------------------------------------------


def test_oracle_examples():
    w = grid_world(["...", "...", "..."])
    assert dijkstra_oracle(w, (0, 0), (1, 0)) == 1.0
    assert dijkstra_oracle(w, (0, 0), (1, 1)) == SQ2
    assert dijkstra_oracle(w, (0, 0), (0, 0)) == 0.0


def test_oracle_no_corner_cutting():
    w = grid_world([".#", "#."])
    with pytest.raises(Unreachable):
        dijkstra_oracle(w, (0, 0), (1, 1))


@pytest.mark.parametrize("seed", range(5))
def test_oracle_matches_scipy(seed):
    w = random_grid_world(seed, n=16)
    want = scipy_oracle(w, (0, 0), (15, 15))
    if math.isinf(want):
        with pytest.raises(Unreachable):
            dijkstra_oracle(w, (0, 0), (15, 15))
    else:
        assert dijkstra_oracle(w, (0, 0), (15, 15)) == pytest.approx(want, abs=1e-9)


# -- D* Lite -------------------------------------------------------------------------


def test_gridnode_fields():
    n = GridNode8(row=1, col=2, g=math.inf, rhs=0.0, key=(1.0, 0.0))
    assert n.row == 1 and n.col == 2 and math.isinf(n.g)


def test_dstar_start_equals_goal():
    r = dstar_lite_plan(grid_world(["..."]), (1, 0), (1, 0))
    assert r.outcome is Outcome.SUCCESS
    assert r.trajectory.points == [] and r.metrics.path_cost == 0.0


def test_dstar_empty_10x10_diagonal():
    w = grid_world(["." * 10] * 10)
    r = dstar_lite_plan(w, (0, 0), (9, 9))
    assert r.metrics.path_cost == 9 * SQ2
    assert r.metrics.path_length == 10  # cells on the path
    assert r.metrics.discrete


def test_dstar_unreachable():
    w = grid_world(["..#..", "..#..", "..#.."])
    r = dstar_lite_plan(w, (0, 0), (4, 0))
    assert r.outcome is Outcome.UNREACHABLE
    assert r.metrics.path_cost is None
    r = dstar_lite_plan(w, (2, 0), (4, 0))
    assert r.outcome is Outcome.UNREACHABLE


@pytest.mark.parametrize("seed", range(20))
def test_dstar_equals_dijkstra_random_32(seed):
    w = random_grid_world(seed)
    r = dstar_lite_plan(w, (0, 0), (31, 31))
    try:
        want = dijkstra_oracle(w, (0, 0), (31, 31))
    except Unreachable:
        assert r.outcome is Outcome.UNREACHABLE
        return
    assert r.outcome is Outcome.SUCCESS
    assert r.metrics.path_cost == want


@pytest.mark.parametrize("goal", [(15, 25), (41, 25), (55, 65)])
def test_dstar_equals_dijkstra_blocks(goal):
    w = load_map_2d(grid_text(blocks_grid()))
    r = dstar_lite_plan(w, (2, 2), goal)
    assert r.metrics.path_cost == dijkstra_oracle(w, (2, 2), goal)
    assert audit_points(w, r.trajectory.points) == []


@pytest.mark.parametrize("seed", range(8))
def test_dstar_replan_matches_fresh_search(seed):
    rng = np.random.default_rng(100 + seed)
    g = rng.random((24, 24)) < 0.25
    g[0, 0] = g[23, 23] = False
    text = grid_text(g)
    semi = load_map_2d(text, semi_known=True)
    r = dstar_lite_plan(semi, (0, 0), (23, 23), sensor=SensorConfig(3.0))
    # after the run, compare the planner's repaired values with a from-scratch search
    # on the map it ended up knowing
    known = load_map_2d(grid_text(semi.known_grid))
    if r.outcome is Outcome.SUCCESS:
        cells = [known.cell_of(p) for p in r.trajectory.points]
        assert cells[-1] == (23, 23)
    planner = DStarLite(~semi.blocked_grid, (0, 0), (23, 23))
    planner.compute_shortest_path()
    fresh = DStarLite(~known.blocked_grid, (0, 0), (23, 23))
    fresh.compute_shortest_path()
    assert planner.g.get((0, 0), math.inf) == fresh.g.get((0, 0), math.inf)


def test_dstar_incremental_repair_equals_scratch():
    rng = np.random.default_rng(3)
    g = rng.random((20, 20)) < 0.2
    g[0, 0] = g[19, 19] = False
    w = load_map_2d(grid_text(g))
    free = ~w.blocked_grid
    planner = DStarLite(free.copy(), (0, 0), (19, 19))
    planner.compute_shortest_path()
    changed = []
    for _ in range(15):
        x, y = (int(v) for v in rng.integers(1, 19, 2))
        free[y, x] = not free[y, x]
        changed.append((x, y))
    planner.free = free.copy()
    planner.cells_changed(changed)
    planner.compute_shortest_path()
    scratch = DStarLite(free.copy(), (0, 0), (19, 19))
    scratch.compute_shortest_path()
    assert planner.g.get((0, 0), math.inf) == scratch.g.get((0, 0), math.inf)


def test_dstar_semi_known_reaches_goal_collision_free():
    w = random_grid_world(4)
    truth = w.clone()
    semi = load_map_2d(grid_text(w.true_grid), semi_known=True)
    r = dstar_lite_plan(semi, (0, 0), (31, 31), sensor=SensorConfig(4.0))
    assert r.outcome is Outcome.SUCCESS
    assert audit_points(truth, r.trajectory.points) == []
    assert r.metrics.path_cost >= dijkstra_oracle(truth, (0, 0), (31, 31))


# -- Hybrid A* -------------------------------------------------------------------------

CAR = AckermannSampler(l=1.0, steering_set=tuple(np.radians([-30, 0, 30])), wheelbase=2.0, delta_max=math.radians(30))


def test_hybrid_params_validation():
    with pytest.raises(ValueError):
        HybridAStarParams(w_g=1.5, step_budget=10, goal_tolerance=1)
    with pytest.raises(ValueError):
        HybridAStarParams(w_g=0.5, step_budget=0, goal_tolerance=1)
    with pytest.raises(ValueError):
        HybridAStarParams(w_g=0.5, step_budget=5, goal_tolerance=0)


def test_hybrid_empty_world_near_straight():
    w = load_map_2d(grid_text(np.zeros((30, 60), dtype=bool)), resolution=0.5)
    p = HybridAStarParams(w_g=0.2, step_budget=30, goal_tolerance=1.0, sampler=CAR)
    r = hybrid_astar_plan(w, AckermannState(2, 7, 0), (27, 7), p)
    assert r.outcome is Outcome.SUCCESS
    assert r.metrics.path_length <= 1.05 * 25
    assert all(n <= 30 for n in r.metrics.nodes_evaluated_per_step)


def test_hybrid_lattice_3d():
    w = load_obstacles_3d([(3, 0, 2)], inflation_radius=0.5, bounds=((-2, -5, 0), (10, 5, 5)))
    p = HybridAStarParams(w_g=0.0, step_budget=50, goal_tolerance=0.5, gridsize=0.5)
    r = hybrid_astar_plan(w, (0, 0, 2), (6, 0, 2), p)
    assert r.outcome is Outcome.SUCCESS
    assert audit_points(w, r.trajectory.points) == []


def lattice_reachable(world, a, b):
    """Reachability over unit lattice moves using the world's own segment test."""
    ny, nx = world.blocked_grid.shape
    idx = lambda x, y: y * nx + x
    m = lil_matrix((nx * ny, nx * ny))
    for y in range(ny):
        for x in range(nx):
            for dx in (-1, 0, 1):
                for dy in (-1, 0, 1):
                    X, Y = x + dx, y + dy
                    if (dx, dy) == (0, 0) or not (0 <= X < nx and 0 <= Y < ny):
                        continue
                    if segment_clear(world, (x, y, 0.0), (X, Y, 0.0)):
                        m[idx(x, y), idx(X, Y)] = 1.0
    d = sp_dijkstra(m.tocsr(), indices=idx(*a), unweighted=True)
    return math.isfinite(d[idx(*b)])


@pytest.mark.parametrize("seed", range(10))
def test_hybrid_complete_at_full_budget(seed):
    w = random_grid_world(seed, n=20, density=0.3)
    p = HybridAStarParams(w_g=0.0, step_budget=10**6, goal_tolerance=0.1, gridsize=1.0, max_steps=10**6)
    r = hybrid_astar_plan(w, (0, 0, 0), (19, 19, 0), p)
    try:
        dijkstra_oracle(w, (0, 0), (19, 19))
        oracle_found = True
    except Unreachable:
        oracle_found = False
    if oracle_found:
        assert r.outcome is Outcome.SUCCESS
    # diagonal moves may graze a blocked corner here, so the search graph is
    # a superset of the oracle's; its exact reachability decides the outcome
    if not is_occupied(w, (0, 0, 0)) and lattice_reachable(w, (0, 0), (19, 19)):
        assert r.outcome is Outcome.SUCCESS
        assert audit_points(w, r.trajectory.points) == []
    else:
        assert r.outcome is Outcome.FAILED


def test_hybrid_trap_fails_with_position():
    w = load_map_2d(grid_text(table1_grid()), resolution=0.5, inflation_radius=0.5)
    p = HybridAStarParams(w_g=0.2, step_budget=30, goal_tolerance=1.0, sampler=CAR, max_steps=400)
    r = hybrid_astar_plan(w, AckermannState(15, 5, math.pi / 2), (15, 50), p)
    assert r.outcome is Outcome.FAILED
    assert "trapped near" in r.metrics.note
    assert max(r.metrics.nodes_evaluated_per_step) <= 30
    assert audit_points(w, r.trajectory.points) == []
    # the agent stops inside the U, short of its closed end at y = 44
    end = r.trajectory.points[-1]
    assert 12.5 < end.x < 17.5 and 36 < end.y < 44


def test_hybrid_step_limit_is_failure():
    w = load_map_2d(grid_text(np.zeros((20, 60), dtype=bool)), resolution=0.5)
    p = HybridAStarParams(w_g=0.2, step_budget=5, goal_tolerance=0.5, sampler=CAR, max_steps=3)
    r = hybrid_astar_plan(w, AckermannState(1, 5, 0), (28, 5), p)
    assert r.outcome is Outcome.FAILED
    assert r.metrics.steps == 3


def test_hybrid_needs_state_with_sampler():
    w = load_map_2d(grid_text(np.zeros((5, 5), dtype=bool)))
    with pytest.raises(ValueError):
        hybrid_astar_plan(w, (0, 0, 0), (3, 3), HybridAStarParams(w_g=0, step_budget=5, goal_tolerance=1, sampler=CAR))
