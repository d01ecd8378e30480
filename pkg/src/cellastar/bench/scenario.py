"""Scenario files: declarative TOML with a versioned schema id.

A scenario names a world (map file or seeded generator), a start and goal,
and one parameter table per planner it can be run with. Unknown keys are
rejected so a typo never silently falls back to a default.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from ..world import MapFormatError, OccupancyWorld, SensorConfig, is_occupied
from ..world import load_map_2d, load_obstacles_3d, read_obstacles_csv
from . import fixtures

SCHEMA = "cellastar.scenario/1"
PLANNERS = ("cell_astar", "cell_astar_ackermann", "hybrid_astar", "dstar_lite")
GENERATORS = {
    "random_grid": lambda seed: fixtures.random_grid(seed),
    "blocks": lambda seed: fixtures.blocks_grid(seed=seed),
}

_TOP_KEYS = {"schema", "name", "description", "planner", "world", "task", "planners"}
_WORLD_KEYS = {
    "kind", "file", "generator", "seed", "resolution", "inflation_radius", "bounds", "mode", "sensor_range",
}
_TASK_KEYS = {"start", "goal", "heading_deg"}
_SAMPLER_KEYS = {"l", "steering_deg", "wheelbase", "delta_max_deg"}
_CELL_KEYS = {
    "w1", "w2", "gridsize", "bigstep", "avoidance_range", "goal_tolerance",
    "cellsize_min", "cellsize_max", "max_steps", "sign_rule",
}
_PLANNER_KEYS = {
    "cell_astar": _CELL_KEYS,
    "cell_astar_ackermann": _CELL_KEYS | {"w_g", "k_explore", "sampler"},
    "hybrid_astar": {
        "w_g", "step_budget", "goal_tolerance", "gridsize", "heading_bucket_deg",
        "loop_threshold", "max_steps", "allow_reverse", "sampler",
    },
    "dstar_lite": {"max_steps"},
}


class ScenarioError(ValueError):
    """Invalid scenario; the message starts with the offending field."""


@dataclass
class WorldSpec:
    kind: str
    resolution: float
    inflation_radius: float
    mode: str = "known"
    sensor_range: float | None = None
    file: Path | None = None
    generator: str | None = None
    seed: int | None = None
    bounds: tuple | None = None

    @property
    def semi_known(self) -> bool:
        return self.mode == "semi-known"

    @property
    def sensor(self) -> SensorConfig | None:
        return SensorConfig(self.sensor_range) if self.semi_known else None


@dataclass
class Scenario:
    name: str
    world: WorldSpec
    start: tuple[float, ...]
    goal: tuple[float, ...]
    planner: str
    planners: dict[str, dict[str, Any]]
    heading: float = 0.0
    description: str = ""
    source: Path | None = field(default=None, compare=False)

    def params_for(self, planner: str) -> dict[str, Any]:
        if planner not in self.planners:
            raise ScenarioError(f"planners.{planner}: not configured in scenario {self.name!r}")
        return self.planners[planner]

    def load_world(self) -> OccupancyWorld:
        return load_world(self.world)


def _check_keys(table: dict, allowed: set, where: str):
    for key in table:
        if key not in allowed:
            raise ScenarioError(f"{where + '.' if where else ''}{key}: unknown key")


def _need(table: dict, key: str, where: str):
    if key not in table:
        raise ScenarioError(f"{where}.{key}: missing")
    return table[key]


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ScenarioError(f"{where}: expected a finite number, got {value!r}")
    return float(value)


def _vector(value, n: int, where: str) -> tuple[float, ...]:
    if not isinstance(value, list) or len(value) != n:
        raise ScenarioError(f"{where}: expected a list of {n} numbers, got {value!r}")
    return tuple(_number(v, f"{where}[{i}]") for i, v in enumerate(value))


def _parse_world(t: dict, base: Path | None) -> WorldSpec:
    _check_keys(t, _WORLD_KEYS, "world")
    kind = _need(t, "kind", "world")
    if kind not in ("grid2d", "points3d"):
        raise ScenarioError(f"world.kind: expected 'grid2d' or 'points3d', got {kind!r}")
    spec = WorldSpec(
        kind=kind,
        resolution=_number(_need(t, "resolution", "world"), "world.resolution"),
        inflation_radius=_number(t.get("inflation_radius", 0.0), "world.inflation_radius"),
        mode=t.get("mode", "known"),
    )
    if spec.resolution <= 0:
        raise ScenarioError("world.resolution: must be positive")
    if spec.inflation_radius < 0:
        raise ScenarioError("world.inflation_radius: must be >= 0")
    if spec.mode not in ("known", "semi-known"):
        raise ScenarioError(f"world.mode: expected 'known' or 'semi-known', got {spec.mode!r}")
    if spec.semi_known:
        spec.sensor_range = _number(_need(t, "sensor_range", "world"), "world.sensor_range")
        if spec.sensor_range <= 0:
            raise ScenarioError("world.sensor_range: must be positive")
    elif "sensor_range" in t:
        raise ScenarioError("world.sensor_range: only valid with mode = 'semi-known'")

    if ("file" in t) == ("generator" in t):
        raise ScenarioError("world.file: exactly one of 'file' or 'generator' is required")
    if "file" in t:
        if "seed" in t:
            raise ScenarioError("world.seed: only valid with a generator")
        path = Path(t["file"])
        if base is not None and not path.is_absolute():
            path = base / path
        if not path.is_file():
            raise ScenarioError(f"world.file: map file not found: {path}")
        spec.file = path
    else:
        if kind != "grid2d":
            raise ScenarioError("world.generator: generators produce 2-D grids only")
        if t["generator"] not in GENERATORS:
            raise ScenarioError(f"world.generator: unknown generator {t['generator']!r}")
        spec.generator = t["generator"]
        seed = _need(t, "seed", "world")
        if isinstance(seed, bool) or not isinstance(seed, int):
            raise ScenarioError(f"world.seed: expected an integer, got {seed!r}")
        spec.seed = seed

    if kind == "points3d":
        b = _need(t, "bounds", "world")
        if not isinstance(b, list) or len(b) != 2:
            raise ScenarioError("world.bounds: expected [[xmin, ymin, zmin], [xmax, ymax, zmax]]")
        spec.bounds = (_vector(b[0], 3, "world.bounds[0]"), _vector(b[1], 3, "world.bounds[1]"))
    elif "bounds" in t:
        raise ScenarioError("world.bounds: 2-D bounds come from the grid size")
    return spec


def load_world(spec: WorldSpec) -> OccupancyWorld:
    try:
        if spec.kind == "grid2d":
            if spec.generator is not None:
                text = fixtures.grid_text(GENERATORS[spec.generator](spec.seed))
            else:
                text = spec.file.read_text()
            return load_map_2d(
                text,
                resolution=spec.resolution,
                inflation_radius=spec.inflation_radius,
                semi_known=spec.semi_known,
            )
        records = read_obstacles_csv(spec.file.read_text())
        return load_obstacles_3d(
            records,
            resolution=spec.resolution,
            inflation_radius=spec.inflation_radius,
            bounds=spec.bounds,
            semi_known=spec.semi_known,
        )
    except (MapFormatError, ValueError) as exc:
        where = spec.file if spec.file is not None else spec.generator
        raise ScenarioError(f"world.file: {where}: {exc}") from exc


def _parse_sampler(t, where: str) -> dict:
    if not isinstance(t, dict):
        raise ScenarioError(f"{where}: expected a table")
    _check_keys(t, _SAMPLER_KEYS, where)
    steer = _need(t, "steering_deg", where)
    if not isinstance(steer, list) or not steer:
        raise ScenarioError(f"{where}.steering_deg: expected a nonempty list")
    return {
        "l": _number(_need(t, "l", where), f"{where}.l"),
        "steering_deg": [_number(v, f"{where}.steering_deg[{i}]") for i, v in enumerate(steer)],
        "wheelbase": _number(_need(t, "wheelbase", where), f"{where}.wheelbase"),
        "delta_max_deg": _number(t.get("delta_max_deg", 35.0), f"{where}.delta_max_deg"),
    }


def _parse_planners(t, dims: int) -> dict[str, dict]:
    if not isinstance(t, dict) or not t:
        raise ScenarioError("planners: at least one planner table is required")
    out = {}
    for pid, params in t.items():
        where = f"planners.{pid}"
        if pid not in PLANNERS:
            raise ScenarioError(f"{where}: unknown planner id")
        if not isinstance(params, dict):
            raise ScenarioError(f"{where}: expected a table")
        _check_keys(params, _PLANNER_KEYS[pid], where)
        if pid in ("cell_astar_ackermann", "dstar_lite") and dims != 2:
            raise ScenarioError(f"{where}: needs a 2-D world")
        if pid == "cell_astar_ackermann" and "sampler" not in params:
            raise ScenarioError(f"{where}.sampler: missing")
        params = dict(params)
        if "sampler" in params:
            params["sampler"] = _parse_sampler(params["sampler"], f"{where}.sampler")
        out[pid] = params
    return out


def parse_scenario(text: str, *, base: Path | None = None, source: Path | None = None) -> Scenario:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError(f"schema: not valid TOML ({exc})") from exc
    _check_keys(doc, _TOP_KEYS, "")
    schema = doc.get("schema")
    if schema != SCHEMA:
        raise ScenarioError(f"schema: expected {SCHEMA!r}, got {schema!r}")
    name = _need(doc, "name", "scenario")
    if not isinstance(name, str) or not name:
        raise ScenarioError("name: expected a nonempty string")
    world = _parse_world(_need(doc, "world", "scenario"), base)
    dims = 2 if world.kind == "grid2d" else 3
    task = _need(doc, "task", "scenario")
    _check_keys(task, _TASK_KEYS, "task")
    start = _vector(_need(task, "start", "task"), dims, "task.start")
    goal = _vector(_need(task, "goal", "task"), dims, "task.goal")
    heading = math.radians(_number(task.get("heading_deg", 0.0), "task.heading_deg"))
    planners = _parse_planners(_need(doc, "planners", "scenario"), dims)
    planner = doc.get("planner", next(iter(planners)))
    if planner not in planners:
        raise ScenarioError(f"planner: {planner!r} has no planners.{planner} table")
    return Scenario(
        name=name,
        world=world,
        start=start,
        goal=goal,
        planner=planner,
        planners=planners,
        heading=heading,
        description=doc.get("description", ""),
        source=source,
    )


def load_scenario(path) -> Scenario:
    """Read and validate a scenario file, including start/goal freedom."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"scenario: cannot read {path}: {exc.strerror}") from exc
    scenario = parse_scenario(text, base=path.parent, source=path)
    check_task(scenario)
    return scenario


def check_task(scenario: Scenario, world: OccupancyWorld | None = None):
    """Start and goal must be free in the true (inflated) world."""
    from .audit import truth_world

    truth = truth_world(world if world is not None else scenario.load_world())
    for label, p in (("start", scenario.start), ("goal", scenario.goal)):
        q = (*p, 0.0) if len(p) == 2 else p
        if is_occupied(truth, q):
            raise ScenarioError(f"task.{label}: {tuple(p)} is not free")


def load_suite(directory) -> list[Scenario]:
    """Every ``*.toml`` scenario in a directory, sorted by file name."""
    directory = Path(directory)
    if not directory.is_dir():
        raise ScenarioError(f"suite: {directory} is not a directory")
    files = sorted(directory.glob("*.toml"))
    if not files:
        raise ScenarioError(f"suite: no scenario files in {directory}")
    return [load_scenario(f) for f in files]
