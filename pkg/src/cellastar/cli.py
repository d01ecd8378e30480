"""Command-line entry point: ``cellastar plan|bench|plot``.

Exit codes: 0 success, 1 usage or I/O error, 2 the planner did not reach
the goal (Failed, Timeout or Unreachable).
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from pathlib import Path

from .bench.harness import ComparisonTable, compare, export_run, run_scenario
from .bench.scenario import PLANNERS, ScenarioError, load_scenario, load_suite
from .cell_astar import gen_search_cell
from .plot import LAYERS, PlotSpec, render_svg
from .results import Outcome
from .world import MapFormatError, load_map_2d, load_obstacles_3d, read_obstacles_csv

EXIT_OK, EXIT_ERROR, EXIT_NOT_REACHED = 0, 1, 2
DEFAULT_OUT = "cellastar_out"

# flag name -> planner parameter it overrides
OVERRIDES = {
    "w1": float,
    "w2": float,
    "w_g": float,
    "gridsize": float,
    "bigstep": float,
    "avoidance_range": float,
    "cellsize_max": int,
    "max_steps": int,
    "step_budget": int,
}


class UsageError(Exception):
    pass


def _out_dir(arg: str | None) -> Path:
    return Path(arg or os.environ.get("CELLASTAR_OUT") or DEFAULT_OUT)


def _err(msg: str) -> int:
    print(f"cellastar: error: {msg}", file=sys.stderr)
    return EXIT_ERROR


def cmd_plan(args) -> int:
    try:
        scenario = load_scenario(args.scenario)
        planner = args.planner or scenario.planner
        table = scenario.params_for(planner)
        for key in OVERRIDES:
            value = getattr(args, key)
            if value is None:
                continue
            if key not in _allowed(planner):
                raise ScenarioError(f"planners.{planner}.{key}: not a parameter of this planner")
            table[key] = value
        out = run_scenario(scenario, planner)
        files = export_run(out.metrics, out.trajectory, _out_dir(args.out) / scenario.name, len(out.audit_hits))
    except (ScenarioError, OSError) as exc:
        return _err(str(exc))
    m = out.metrics
    unit = "nodes" if m.discrete else "m"
    print(
        f"{scenario.name} {planner}: {m.outcome.value} length={m.path_length:.3f} {unit} "
        f"steps={m.steps} avg_nodes={m.avg_nodes_per_step:.2f} audit_hits={len(out.audit_hits)}"
        + (f" note={m.note}" if m.note else "")
    )
    for f in files:
        print(f"wrote {f}")
    return EXIT_OK if m.outcome is Outcome.SUCCESS else EXIT_NOT_REACHED


def _allowed(planner: str) -> set:
    from .bench.scenario import _PLANNER_KEYS

    return _PLANNER_KEYS[planner]


def cmd_bench(args) -> int:
    try:
        scenarios = load_suite(args.suite)
    except (ScenarioError, OSError) as exc:
        return _err(str(exc))
    wanted = args.planner or list(PLANNERS)
    table = ComparisonTable()
    for s in scenarios:
        planners = [p for p in s.planners if p in wanted]
        table.rows += compare([s], planners).rows
    if not table.rows:
        return _err(f"suite: no scenario in {args.suite} configures planners {wanted}")
    out = _out_dir(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / "comparison.csv").write_text(table.to_csv())
        (out / "comparison.txt").write_text(table.to_text())
    except OSError as exc:
        return _err(f"cannot write to {out}: {exc.strerror}")
    print(table.to_text(), end="")
    print(f"wrote {out / 'comparison.csv'}")
    return EXIT_OK


def read_trajectory_csv(text: str) -> list[tuple[float, float, float]]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [h.strip() for h in rows[0]] != ["t", "x", "y", "z"]:
        raise UsageError("trajectory: expected a 't,x,y,z' header")
    pts = []
    for i, row in enumerate(rows[1:], start=1):
        if not row:
            continue
        try:
            _, x, y, z = (float(v) for v in row)
        except ValueError:
            raise UsageError(f"trajectory: bad row {i}: {row!r}") from None
        pts.append((x, y, z))
    return pts


def _plot_world(args):
    if args.scenario:
        s = load_scenario(args.scenario)
        start = (*s.start, 0.0) if len(s.start) == 2 else s.start
        goal = (*s.goal, 0.0) if len(s.goal) == 2 else s.goal
        return s.load_world(), start, goal
    if not args.map:
        raise UsageError("plot: one of --map or --scenario is required")
    path = Path(args.map)
    text = path.read_text()
    if path.suffix == ".csv":
        world = load_obstacles_3d(read_obstacles_csv(text), resolution=args.resolution)
    else:
        world = load_map_2d(text, resolution=args.resolution)
    return world, None, None


def cmd_plot(args) -> int:
    try:
        pts = read_trajectory_csv(Path(args.trajectory).read_text())
        world, start, goal = _plot_world(args)
        if world.dimensionality == 2 and any(p[2] != 0.0 for p in pts):
            raise UsageError("plot: 3-D trajectory on a 2-D map")
        layers = set(args.layers.split(",")) if args.layers else {"obstacles", "revealed", "trajectory", "markers"}
        cells = []
        if args.cells:
            layers.add("cells")
            target = goal if goal is not None else (pts[-1] if pts else None)
            for p in pts[: args.cells]:
                if target is None or tuple(target) == tuple(p):
                    break
                direction = tuple(target[k] - p[k] for k in range(3))
                cell = gen_search_cell(p, args.cellsize, args.gridsize, direction, world.dimensionality)
                cells.append(cell.nodes)
        spec = PlotSpec(args.width, args.height, args.scale, frozenset(layers), args.cells)
        svg = render_svg(world, pts, spec, start, goal, cells)
        out = Path(args.output)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(svg)
    except (UsageError, ScenarioError, MapFormatError, ValueError) as exc:
        return _err(str(exc))
    except OSError as exc:
        return _err(f"{exc.filename or ''}: {exc.strerror}")
    print(f"wrote {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cellastar", description="Cell-based local path planning and benchmarks.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="run one scenario and export its trajectory and metrics")
    p.add_argument("scenario", help="scenario TOML file")
    p.add_argument("-o", "--out", help="output directory (default $CELLASTAR_OUT or ./cellastar_out)")
    p.add_argument("--planner", choices=PLANNERS, help="planner id (default: the scenario's)")
    for key, typ in OVERRIDES.items():
        p.add_argument(f"--{key.replace('_', '-')}", dest=key, type=typ, help=f"override {key}")
    p.set_defaults(func=cmd_plan)

    b = sub.add_parser("bench", help="run a scenario suite and write a comparison table")
    b.add_argument("suite", help="directory of scenario TOML files")
    b.add_argument("-o", "--out", help="output directory (default $CELLASTAR_OUT or ./cellastar_out)")
    b.add_argument("--planner", action="append", choices=PLANNERS, help="only run these planners (repeatable)")
    b.set_defaults(func=cmd_bench)

    g = sub.add_parser("plot", help="render a trajectory over its map as SVG")
    g.add_argument("trajectory", help="trajectory CSV written by 'plan'")
    g.add_argument("-o", "--output", required=True, help="SVG file to write")
    g.add_argument("--map", help="'.map' grid or '.csv' obstacle file")
    g.add_argument("--scenario", help="take map, start and goal from a scenario file")
    g.add_argument("--resolution", type=float, default=1.0, help="map resolution for --map (m)")
    g.add_argument("--width", type=int, default=800)
    g.add_argument("--height", type=int, default=600)
    g.add_argument("--scale", type=float, help="pixels per metre (default: fit)")
    g.add_argument("--layers", help=f"comma-separated subset of {sorted(LAYERS)}")
    g.add_argument("--cells", type=int, default=0, help="overlay search cells for the first N positions")
    g.add_argument("--cellsize", type=int, default=3)
    g.add_argument("--gridsize", type=float, default=1.0)
    g.set_defaults(func=cmd_plot)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; 2 is reserved for "goal not reached"
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
