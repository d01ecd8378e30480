"""The eight acceptance criteria, one test each.

Each ``criterion_N`` returns ``(ok, detail)``; the tests record the result so
the session summary prints one PASS/FAIL line per criterion. Run this file
directly to print the same lines without pytest.
"""

import math
import subprocess
import sys
import time
from pathlib import Path

import pytest

from cellastar.baselines import Unreachable, dijkstra_oracle, dstar_lite_plan
from cellastar.bench.fixtures import blocks_grid, grid_text, random_grid
from cellastar.bench.harness import run_scenario
from cellastar.bench.scenario import load_scenario, load_suite
from cellastar.results import Outcome
from cellastar.world import load_map_2d

sys.path.insert(0, str(Path(__file__).resolve().parent))
from conftest import ACCEPTANCE, SUITES, curvature_max  # noqa: E402

TESTS = Path(__file__).resolve().parent


def _timed(limit):
    def wrap(fn):
        def run():
            t0 = time.perf_counter()
            ok, detail = fn()
            dt = time.perf_counter() - t0
            if dt >= limit:
                ok = False
            return ok, f"{detail}; {dt:.1f}s (limit {limit}s)"

        run.__name__ = fn.__name__
        return run

    return wrap


@_timed(60)
def criterion_1():
    worst = []
    for suite in sorted(p for p in SUITES.iterdir() if p.is_dir()):
        for s in load_suite(suite):
            for planner in ("cell_astar", "cell_astar_ackermann"):
                if planner not in s.planners:
                    continue
                m = run_scenario(s, planner).metrics
                cs = s.planners[planner].get("cellsize_max", 5)
                dims = len(s.start)
                bound, fast_bound = cs**dims, 3**dims
                top = max(m.nodes_evaluated_per_step, default=0)
                fast = max((n for n, md in zip(m.nodes_evaluated_per_step, m.step_modes) if md == "fast"), default=0)
                if top > bound or fast > fast_bound:
                    return False, f"{s.name}/{planner}: max {top} > {bound} or fast {fast} > {fast_bound}"
                worst.append(top / bound)
    return True, f"{len(worst)} runs, worst per-step usage {max(worst):.2f} of the bound"


@_timed(60)
def criterion_2():
    cases = [(load_map_2d(grid_text(random_grid(seed))), (0, 0), (31, 31)) for seed in range(20)]
    blocks = load_map_2d(grid_text(blocks_grid()))
    cases += [(blocks, (2, 2), g) for g in ((15, 25), (41, 25), (55, 65))]
    checked = 0
    for w, a, b in cases:
        r = dstar_lite_plan(w, a, b)
        try:
            want = dijkstra_oracle(w, a, b)
        except Unreachable:
            if r.outcome is not Outcome.UNREACHABLE:
                return False, f"oracle unreachable, D* Lite {r.outcome.value}"
            continue
        if r.metrics.path_cost != want:
            return False, f"cost {r.metrics.path_cost} != oracle {want}"
        checked += 1
    return True, f"{checked} reachable maps equal the Dijkstra oracle exactly, {len(cases) - checked} unreachable agree"


@_timed(60)
def criterion_3():
    t_cell = t_dstar = 0.0
    ratios = []
    for s in load_suite(SUITES / "table2"):
        c = run_scenario(s, "cell_astar")
        d = run_scenario(s, "dstar_lite")
        if c.outcome is not Outcome.SUCCESS or d.outcome is not Outcome.SUCCESS:
            return False, f"{s.name}: {c.outcome.value}/{d.outcome.value}"
        t_cell += c.metrics.wall_time
        t_dstar += d.metrics.wall_time
        ratios.append(len(c.trajectory.points) / len(d.trajectory.points))
    ok = t_cell < t_dstar and max(ratios) <= 1.5
    return ok, (
        f"time {t_cell:.3f}s vs {t_dstar:.3f}s, node ratios " + ", ".join(f"{r:.2f}" for r in ratios)
    )


@_timed(120)
def criterion_4():
    hybrid, cell = [], []
    for s in load_suite(SUITES / "table1"):
        h = run_scenario(s, "hybrid_astar")
        c = run_scenario(s, "cell_astar_ackermann")
        hybrid.append(h.outcome)
        cell.append(c.outcome is Outcome.SUCCESS and not c.audit_hits)
    ok = Outcome.FAILED in hybrid and all(cell)
    return ok, "hybrid " + "/".join(o.value for o in hybrid) + f"; cell A* audited successes {sum(cell)}/3"


@_timed(30)
def criterion_5():
    s = load_scenario(SUITES / "drone" / "wall.toml")
    assert s.start == (0.0, 0.0, 2.5) and s.goal == (7.0, 0.0, 2.5) and s.world.semi_known
    out = run_scenario(s)
    length = out.trajectory.length
    ok = out.outcome is Outcome.SUCCESS and not out.audit_hits and length <= 1.5 * 7.0
    return ok, f"{out.outcome.value}, {len(out.audit_hits)} audit hits, length {length:.2f} m (limit 10.5)"


@_timed(60)
def criterion_6():
    s = load_scenario(SUITES / "drone" / "long_distance.toml")
    assert s.start == (0.0, 0.0, 6.0) and s.goal == (45.0, -6.0, 8.0)
    out = run_scenario(s)
    straight = math.dist(s.start, s.goal)
    length = out.trajectory.length
    ok = out.outcome is Outcome.SUCCESS and not out.audit_hits and length <= 1.3 * straight
    return ok, f"{out.outcome.value}, {len(out.audit_hits)} audit hits, length {length:.2f} m = {length / straight:.3f}x"


PROPERTY_TESTS = [
    "test_geometry.py::test_line_dist_oracle_1000_cases",
    "test_cell_astar.py::test_select_cell_path_matches_brute_force_200_cases",
    "test_ackermann.py::test_arc_end_matches_numerical_integration",
    "test_ackermann.py::test_turning_example",
    "test_cell_astar.py::test_sign_flip_identity",
    "test_cell_astar.py::test_sign_flip_identity_to_rounding",
    "test_world.py::test_reveal_monotone_and_subset",
    "test_cell_astar.py::test_plan_deterministic",
    "test_ackermann.py::test_plan_ackermann_deterministic",
    "test_harness.py::test_export_deterministic",
]


@_timed(120)
def criterion_7():
    proc = subprocess.run(
        [sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", *PROPERTY_TESTS],
        cwd=TESTS,
        capture_output=True,
        text=True,
    )
    last = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr.strip()
    return proc.returncode == 0, f"{len(PROPERTY_TESTS)} property tests: {last}"


@_timed(60)
def criterion_8():
    s = load_scenario(SUITES / "trap" / "dead_corner.toml")
    out = run_scenario(s, "cell_astar_ackermann")
    t = s.planners["cell_astar_ackermann"]["sampler"]
    bound = math.tan(math.radians(t["delta_max_deg"])) / t["wheelbase"]
    k = curvature_max(out.trajectory.points, out.trajectory.directions)
    ok = out.outcome is Outcome.SUCCESS and not out.audit_hits and k <= bound * 1.05
    return ok, f"{out.outcome.value}, max curvature {k:.4f} vs bound {bound:.4f} (+5%)"


CRITERIA = {n: globals()[f"criterion_{n}"] for n in range(1, 9)}


@pytest.mark.parametrize("n", sorted(CRITERIA))
def test_criterion(n):
    ok, detail = CRITERIA[n]()
    ACCEPTANCE[n] = (ok, detail)
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for n, fn in CRITERIA.items():
        ok, detail = fn()
        failed += not ok
        print(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    sys.exit(1 if failed else 0)
