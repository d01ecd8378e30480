import json

import pytest

from cellastar.bench import harness
from cellastar.bench.harness import COLUMNS, compare, export_run, run_scenario, trajectory_csv
from cellastar.bench.scenario import ScenarioError, load_scenario, load_suite
from cellastar.geometry import Point3
from cellastar.results import Outcome, PlanResult, RunMetrics, Trajectory

from conftest import SUITES

EMPTY2D = SUITES / "smoke" / "empty2d.toml"


def test_smoke_runs():
    for s in load_suite(SUITES / "smoke"):
        out = run_scenario(s)
        assert out.outcome is Outcome.SUCCESS, s.name
        assert out.audit_hits == []
        assert out.trajectory.points[0] == Point3(*s.start, *(() if len(s.start) == 3 else (0.0,)))


def test_metrics_consistent():
    out = run_scenario(load_scenario(EMPTY2D))
    m = out.metrics
    assert m.path_length == pytest.approx(out.trajectory.length)
    assert m.steps == len(m.step_modes)
    assert m.nodes_evaluated_total == sum(m.nodes_evaluated_per_step)
    d = run_scenario(load_scenario(EMPTY2D), "dstar_lite")
    assert d.metrics.discrete and d.metrics.path_length == len(d.trajectory.points)
    assert d.metrics.steps == len(d.metrics.step_modes) == 1


def test_audit_downgrades_success(monkeypatch):
    s = load_scenario(EMPTY2D)
    # pretend the executed path went through an obstacle
    monkeypatch.setattr(harness, "audit_points", lambda w, pts: [(5.0, 5.0, 0.0)])
    out = run_scenario(s)
    assert out.outcome is Outcome.FAILED
    assert out.metrics.note.startswith("collision audit")


def test_compare_rows_and_error_rows(monkeypatch):
    scenarios = load_suite(SUITES / "table2")[:2]
    t = compare(scenarios, ["cell_astar", "dstar_lite"])
    assert [(r["scenario"], r["planner"]) for r in t.rows] == [
        (s.name, p) for s in scenarios for p in ("cell_astar", "dstar_lite")
    ]
    assert all(r["outcome"] == "Success" for r in t.rows)
    assert t.to_csv().splitlines()[0] == ",".join(COLUMNS)
    assert len(t.to_csv().splitlines()) == 5

    def boom(*a):
        raise RuntimeError("kaput")

    monkeypatch.setattr(harness, "_run_planner", boom)
    t = compare(scenarios[:1], ["cell_astar"])
    assert t.rows[0]["outcome"] == "Failed"
    assert "kaput" in t.rows[0]["note"]


def test_compare_validates_before_running():
    s = load_scenario(EMPTY2D)
    with pytest.raises(ScenarioError, match=r"^planners\.hybrid_astar"):
        compare([s], ["hybrid_astar"])


def test_table_text_has_note_line():
    t = compare([load_scenario(EMPTY2D)], ["cell_astar"])
    text = t.to_text()
    assert text.splitlines()[0].split()[:2] == ["scenario", "planner"]
    assert "avg_nodes_per_step" in text.splitlines()[-1]


def test_trajectory_csv_shapes():
    assert trajectory_csv(Trajectory()) == "t,x,y,z\n"
    t = Trajectory([Point3(0, 0, 0), Point3(1, 0, 0), Point3(2, 0.5, 0)])
    lines = trajectory_csv(t).splitlines()
    assert len(lines) == 4
    assert lines[3] == "2,2,0.5,0"


def test_export_run(tmp_path):
    m = RunMetrics("cell_astar", Outcome.SUCCESS, wall_time=0.5, path_length=1.0, nodes_evaluated_per_step=[3, 5])
    t = Trajectory([Point3(0, 0, 0), Point3(1, 0, 0)])
    files = export_run(m, t, tmp_path / "sub" / "run", audit_hits=0)
    assert [f.name for f in files] == ["run.csv", "run.json", "run.timing.json"]
    meta = json.loads(files[1].read_text())
    assert "wall_time" not in json.dumps(meta)
    assert meta["avg_nodes_per_step"] == 4.0 and meta["outcome"] == "Success"
    assert json.loads(files[2].read_text()) == {"wall_time_s": 0.5}


def test_export_deterministic(tmp_path):
    s = load_scenario(SUITES / "drone" / "wall.toml")
    a, b = run_scenario(s), run_scenario(s)
    fa = export_run(a.metrics, a.trajectory, tmp_path / "a")
    fb = export_run(b.metrics, b.trajectory, tmp_path / "b")
    for x, y in zip(fa[:2], fb[:2]):
        assert x.read_bytes() == y.read_bytes()


def test_stuck_run_is_a_result(tmp_path):
    # a start inside a closed box: every cell size fails, the harness reports Failed
    (tmp_path / "box.map").write_text(".....\n.###.\n.#.#.\n.###.\n.....\n")
    (tmp_path / "s.toml").write_text(
        'schema = "cellastar.scenario/1"\nname = "box"\n[world]\nkind = "grid2d"\nfile = "box.map"\n'
        "resolution = 1.0\n[task]\nstart = [2.0, 2.0]\ngoal = [4.0, 4.0]\n"
        "[planners.cell_astar]\nw1 = 1.0\nw2 = 0.5\ngridsize = 1.0\nbigstep = 1.0\n"
        "avoidance_range = 3.0\ngoal_tolerance = 0.5\ncellsize_max = 5\n"
    )
    out = run_scenario(load_scenario(tmp_path / "s.toml"))
    assert out.outcome is not Outcome.SUCCESS
    assert "stuck" in out.metrics.note
