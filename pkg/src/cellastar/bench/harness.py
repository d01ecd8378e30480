"""Run scenarios, audit them and tabulate comparisons."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from ..ackermann import AckermannSampler, AckermannState, plan_ackermann
from ..baselines.dstar_lite import dstar_lite_plan
from ..baselines.hybrid_astar import HybridAStarParams, hybrid_astar_plan
from ..cell_astar import PlanParams, plan
from ..geometry import Point3
from ..results import Outcome, PlanResult, PlanStuck, RunMetrics, Trajectory
from .audit import audit_points
from .scenario import Scenario, ScenarioError, check_task


@dataclass
class RunOutput:
    scenario: str
    metrics: RunMetrics
    trajectory: Trajectory
    audit_hits: list = field(default_factory=list)
    world: object = None

    @property
    def outcome(self) -> Outcome:
        return self.metrics.outcome


def _sampler(t: dict) -> AckermannSampler:
    return AckermannSampler(
        l=t["l"],
        steering_set=tuple(math.radians(a) for a in t["steering_deg"]),
        wheelbase=t["wheelbase"],
        delta_max=math.radians(t["delta_max_deg"]),
    )


def _params(cls, table: dict, where: str, **extra):
    try:
        return cls(**table, **extra)
    except TypeError as exc:
        raise ScenarioError(f"{where}: {exc}") from exc
    except ValueError as exc:
        raise ScenarioError(f"{where}: {exc}") from exc


def _run_planner(scenario: Scenario, planner: str, world) -> PlanResult:
    t = dict(scenario.params_for(planner))
    where = f"planners.{planner}"
    sensor = scenario.world.sensor
    pad = (lambda p: p) if len(scenario.start) == 3 else (lambda p: (*p, 0.0))
    start, goal = pad(scenario.start), pad(scenario.goal)
    if planner == "cell_astar":
        return plan(world, start, goal, _params(PlanParams, t, where), sensor)
    if planner == "cell_astar_ackermann":
        sampler = _sampler(t.pop("sampler"))
        params = _params(PlanParams, t, where)
        state = AckermannState(start[0], start[1], scenario.heading)
        return plan_ackermann(world, state, goal, params, sampler, sensor)
    if planner == "hybrid_astar":
        if sensor is not None:
            raise ScenarioError(f"{where}: needs a known map (mode = 'known')")
        if "sampler" in t:
            t["sampler"] = _sampler(t["sampler"])
        if "heading_bucket_deg" in t:
            t["heading_bucket"] = math.radians(t.pop("heading_bucket_deg"))
        params = _params(HybridAStarParams, t, where)
        s = AckermannState(start[0], start[1], scenario.heading) if params.sampler else Point3(*start)
        return hybrid_astar_plan(world, s, goal, params)
    if planner == "dstar_lite":
        return dstar_lite_plan(world, world.cell_of(start), world.cell_of(goal), sensor, **t)
    raise ScenarioError(f"planner: unknown planner id {planner!r}")


def run_scenario(scenario: Scenario, planner: str | None = None) -> RunOutput:
    """Plan on a fresh world, then audit the executed path against the true obstacles.

    An audit hit turns any claimed Success into Failed.
    """
    planner = planner or scenario.planner
    world = scenario.load_world()
    check_task(scenario, world)
    truth_source = world.clone()
    try:
        result = _run_planner(scenario, planner, world)
    except PlanStuck as exc:
        result = exc.result
        result.metrics.note = str(exc)
    metrics = result.metrics
    hits = audit_points(truth_source, result.trajectory.points)
    if hits and metrics.outcome is Outcome.SUCCESS:
        metrics.outcome = Outcome.FAILED
        metrics.note = f"collision audit: {len(hits)} hit(s), first at {tuple(round(c, 3) for c in hits[0])}"
    return RunOutput(scenario.name, metrics, result.trajectory, hits, world)


# -- comparison tables ---------------------------------------------------------

COLUMNS = (
    "scenario", "planner", "goal", "outcome", "time_s", "path_length", "length_unit",
    "path_nodes", "steps", "avg_nodes_per_step", "total_nodes", "audit_hits", "note",
)


@dataclass
class ComparisonTable:
    rows: list[dict] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in self.rows:
            w.writerow(r)
        return buf.getvalue()

    def to_text(self) -> str:
        cols = [c for c in COLUMNS if c != "note"]
        cells = [cols] + [[str(r[c]) for c in cols] for r in self.rows]
        widths = [max(len(row[i]) for row in cells) for i in range(len(cols))]
        lines = ["  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip() for row in cells]
        lines.insert(1, "  ".join("-" * w for w in widths))
        lines.append("avg_nodes_per_step = evaluated nodes averaged over replanning steps")
        return "\n".join(lines) + "\n"


def _fmt_goal(goal) -> str:
    return "(" + ", ".join(f"{v:g}" for v in goal) + ")"


def table_row(scenario: Scenario, planner: str, out: RunOutput | None, error: str = "") -> dict:
    if out is None:
        return {
            "scenario": scenario.name, "planner": planner, "goal": _fmt_goal(scenario.goal),
            "outcome": Outcome.FAILED.value, "time_s": "", "path_length": "", "length_unit": "",
            "path_nodes": "", "steps": "", "avg_nodes_per_step": "", "total_nodes": "",
            "audit_hits": "", "note": error,
        }
    m = out.metrics
    return {
        "scenario": scenario.name,
        "planner": planner,
        "goal": _fmt_goal(scenario.goal),
        "outcome": m.outcome.value,
        "time_s": f"{m.wall_time:.4f}",
        "path_length": f"{m.path_length:.3f}",
        "length_unit": "nodes" if m.discrete else "m",
        "path_nodes": len(out.trajectory.points),
        "steps": m.steps,
        "avg_nodes_per_step": f"{m.avg_nodes_per_step:.2f}",
        "total_nodes": m.nodes_evaluated_total,
        "audit_hits": len(out.audit_hits),
        "note": m.note,
    }


def compare(scenarios: list[Scenario], planners: list[str]) -> ComparisonTable:
    """Run every (scenario, planner) pair; a crashing run becomes a Failed row."""
    for s in scenarios:
        for p in planners:
            s.params_for(p)
    table = ComparisonTable()
    for s in scenarios:
        for p in planners:
            try:
                out = run_scenario(s, p)
            except Exception as exc:  # a broken run is a row, never an abort
                table.rows.append(table_row(s, p, None, f"{type(exc).__name__}: {exc}"))
                continue
            table.rows.append(table_row(s, p, out))
    return table


# -- export -------------------------------------------------------------------


def trajectory_csv(trajectory: Trajectory) -> str:
    lines = ["t,x,y,z"]
    for i, p in enumerate(trajectory.points):
        lines.append(f"{i},{p[0]!r},{p[1]!r},{p[2]!r}")
    return "\n".join(lines) + "\n"


def metrics_dict(metrics: RunMetrics, audit_hits: int | None = None) -> dict:
    """Everything except wall time, which goes to the timing sidecar."""
    d = {
        "planner": metrics.planner,
        "outcome": metrics.outcome.value,
        "path_length": metrics.path_length,
        "length_unit": "nodes" if metrics.discrete else "m",
        "path_cost": metrics.path_cost,
        "steps": metrics.steps,
        "nodes_evaluated_total": metrics.nodes_evaluated_total,
        "avg_nodes_per_step": metrics.avg_nodes_per_step,
        "nodes_evaluated_per_step": list(metrics.nodes_evaluated_per_step),
        "step_modes": list(metrics.step_modes),
        "note": metrics.note,
    }
    if audit_hits is not None:
        d["audit_hits"] = audit_hits
    return d


def export_run(metrics: RunMetrics, trajectory: Trajectory, path, audit_hits: int | None = None) -> list[Path]:
    """Write ``<path>.csv``, ``<path>.json`` and ``<path>.timing.json``.

    The first two are byte-identical across reruns of the same scenario.
    """
    base = Path(path)
    files = [base.with_suffix(".csv"), base.with_suffix(".json"), base.with_suffix(".timing.json")]
    payloads = [
        trajectory_csv(trajectory),
        json.dumps(metrics_dict(metrics, audit_hits), indent=2) + "\n",
        json.dumps({"wall_time_s": metrics.wall_time}, indent=2) + "\n",
    ]
    for f, text in zip(files, payloads):
        try:
            f.parent.mkdir(parents=True, exist_ok=True)
            f.write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write {f}: {exc.strerror}") from exc
    return files
