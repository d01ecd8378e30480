"""Occupancy worlds: dense 2-D grids and sparse 3-D obstacle point sets.

A world keeps the *true* obstacle set and the *known* subset revealed so far.
Collision queries only ever look at known obstacles; the post-run audit in
:mod:`cellastar.bench.audit` is the one place that looks at the true set.

2-D grids index cells as ``(ix, iy)``; the cell centre sits at
``(ix * resolution, iy * resolution)``. The first text row of a map file is
the *top* of the map (largest ``iy``), so files read like the plots.
"""

from __future__ import annotations

import copy
import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from .geometry import Point3, euclid_dist

FREE = "."
OCCUPIED = "#"
COMMENT = ";"


class MapFormatError(ValueError):
    """Malformed map or obstacle file."""


@dataclass(frozen=True)
class SensorConfig:
    range: float
    reveal_model: str = "sphere"

    def __post_init__(self):
        if not self.range > 0:
            raise ValueError(f"sensor range must be positive, got {self.range}")
        if self.reveal_model != "sphere":
            raise ValueError(f"unsupported reveal model {self.reveal_model!r}")


class OccupancyWorld:
    """Obstacle model shared by all planners.

    Use :func:`load_map_2d` / :func:`load_obstacles_3d` rather than calling the
    constructor directly.
    """

    def __init__(
        self,
        dimensionality: int,
        *,
        resolution: float,
        inflation_radius: float,
        bounds: tuple[Point3, Point3],
        semi_known: bool = False,
        grid: np.ndarray | None = None,
        points: np.ndarray | None = None,
    ):
        if dimensionality not in (2, 3):
            raise ValueError("dimensionality must be 2 or 3")
        if not resolution > 0:
            raise ValueError(f"resolution must be positive, got {resolution}")
        if not inflation_radius >= 0:
            raise ValueError(f"inflation_radius must be >= 0, got {inflation_radius}")
        self.dimensionality = dimensionality
        self.resolution = float(resolution)
        self.inflation_radius = float(inflation_radius)
        self.bounds = (Point3(*map(float, bounds[0])), Point3(*map(float, bounds[1])))
        self.semi_known = bool(semi_known)
        self.comments: list[tuple[int, str]] = []

        if dimensionality == 2:
            if grid is None:
                raise ValueError("2-D world needs a grid")
            self.true_grid = np.asarray(grid, dtype=bool)
            self.known_grid = (
                np.zeros_like(self.true_grid) if semi_known else self.true_grid.copy()
            )
            self._kernel = _disk_kernel(self.inflation_radius, self.resolution)
            self._refresh_inflated()
        else:
            pts = np.zeros((0, 3)) if points is None else np.asarray(points, dtype=float)
            self.true_points = pts.reshape(-1, 3)
            lo, hi = self.bounds
            if len(self.true_points) and (
                np.any(self.true_points < np.array(lo)) or np.any(self.true_points > np.array(hi))
            ):
                raise ValueError("obstacle point outside world bounds")
            self.known_mask = np.full(len(self.true_points), not semi_known)
            self._true_tree = cKDTree(self.true_points) if len(self.true_points) else None
            self._refresh_tree()

    # -- bookkeeping -------------------------------------------------------

    def clone(self) -> "OccupancyWorld":
        return copy.deepcopy(self)

    def _refresh_inflated(self):
        if self._kernel.shape == (1, 1):
            self._inflated = self.known_grid.copy()
        else:
            self._inflated = ndimage.binary_dilation(self.known_grid, structure=self._kernel)

    def _refresh_tree(self):
        known = self.true_points[self.known_mask]
        self._tree = cKDTree(known) if len(known) else None

    @property
    def shape(self) -> tuple[int, int]:
        """Grid shape as (nx, ny); 2-D only."""
        return self.true_grid.shape[1], self.true_grid.shape[0]

    @property
    def true_obstacles(self) -> set:
        if self.dimensionality == 2:
            return _cells(self.true_grid)
        return {tuple(p) for p in self.true_points}

    @property
    def known_obstacles(self) -> set:
        if self.dimensionality == 2:
            return _cells(self.known_grid)
        return {tuple(p) for p in self.true_points[self.known_mask]}

    @property
    def known_count(self) -> int:
        if self.dimensionality == 2:
            return int(self.known_grid.sum())
        return int(self.known_mask.sum())

    @property
    def true_count(self) -> int:
        if self.dimensionality == 2:
            return int(self.true_grid.sum())
        return len(self.true_points)

    @property
    def sample_spacing(self) -> float:
        # Planner checks and the collision audit share this spacing.
        return self.resolution / 4.0

    # -- grid helpers --------------------------------------------------------

    def cell_of(self, p) -> tuple[int, int]:
        r = self.resolution
        return math.floor(p[0] / r + 0.5), math.floor(p[1] / r + 0.5)

    def cell_center(self, ix: int, iy: int) -> Point3:
        return Point3(ix * self.resolution, iy * self.resolution, 0.0)

    def in_bounds(self, p) -> bool:
        lo, hi = self.bounds
        return all(lo[k] <= p[k] <= hi[k] for k in range(3))

    @property
    def blocked_grid(self) -> np.ndarray:
        """Known obstacles after inflation, indexed ``[iy, ix]``; 2-D only."""
        return self._inflated

    def cell_free(self, ix: int, iy: int) -> bool:
        """Known-map freedom of a grid cell, ignoring inflation."""
        nx, ny = self.shape
        if not (0 <= ix < nx and 0 <= iy < ny):
            return False
        return not self.known_grid[iy, ix]

    # -- queries -----------------------------------------------------------

    def occupied_many(self, pts) -> np.ndarray:
        """Vectorised :func:`is_occupied` over an (n, 3) array."""
        pts = np.asarray(pts, dtype=float).reshape(-1, 3)
        lo, hi = self.bounds
        out = np.any(pts < np.array(lo), axis=1) | np.any(pts > np.array(hi), axis=1)
        if self.dimensionality == 2:
            idx = np.floor(pts[:, :2] / self.resolution + 0.5).astype(int)
            ny, nx = self._inflated.shape
            inside = (idx[:, 0] >= 0) & (idx[:, 0] < nx) & (idx[:, 1] >= 0) & (idx[:, 1] < ny)
            out |= ~inside
            ok = inside & ~out
            out[ok] = self._inflated[idx[ok, 1], idx[ok, 0]]
            return out
        if self._tree is not None:
            todo = ~out
            if todo.any():
                d, _ = self._tree.query(pts[todo], k=1)
                out[todo] = d <= self.inflation_radius
        return out


def _cells(grid: np.ndarray) -> set:
    ys, xs = np.nonzero(grid)
    return {(int(x), int(y)) for x, y in zip(xs, ys)}


def _disk_kernel(radius: float, resolution: float) -> np.ndarray:
    k = int(math.floor(radius / resolution + 1e-9))
    ax = np.arange(-k, k + 1)
    xx, yy = np.meshgrid(ax, ax)
    return (xx**2 + yy**2) * resolution**2 <= radius**2 + 1e-12


# -- loading / saving ------------------------------------------------------


def load_map_2d(
    text_grid: str | Sequence[str],
    *,
    resolution: float = 1.0,
    inflation_radius: float = 0.0,
    semi_known: bool = False,
) -> OccupancyWorld:
    """Parse a '#'/'.' character grid; lines starting with ';' are comments."""
    lines = text_grid.splitlines() if isinstance(text_grid, str) else list(text_grid)
    rows: list[str] = []
    comments: list[tuple[int, str]] = []
    for line_no, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if line.startswith(COMMENT):
            comments.append((len(rows), line))
            continue
        if not line and not rows:
            raise MapFormatError(f"line {line_no}: empty row")
        if not line:
            # tolerate trailing blank lines only
            if any(l.strip() for l in lines[line_no:]):
                raise MapFormatError(f"line {line_no}: empty row")
            break
        if rows and len(line) != len(rows[0]):
            raise MapFormatError(
                f"row {len(rows)} (line {line_no}): length {len(line)} != {len(rows[0])}"
            )
        for col, ch in enumerate(line):
            if ch not in (FREE, OCCUPIED):
                raise MapFormatError(
                    f"row {len(rows)}, column {col} (line {line_no}): unknown character {ch!r}"
                )
        rows.append(line)
    if not rows:
        raise MapFormatError("empty map")

    # first text row is the top of the map
    grid = np.array([[ch == OCCUPIED for ch in row] for row in reversed(rows)], dtype=bool)
    ny, nx = grid.shape
    half = resolution / 2.0
    world = OccupancyWorld(
        2,
        resolution=resolution,
        inflation_radius=inflation_radius,
        bounds=(Point3(-half, -half, 0.0), Point3((nx - 1) * resolution + half, (ny - 1) * resolution + half, 0.0)),
        semi_known=semi_known,
        grid=grid,
    )
    world.comments = comments
    return world


def save_map_2d(world: OccupancyWorld) -> str:
    """Render the true grid back to map text (comments kept in place)."""
    if world.dimensionality != 2:
        raise ValueError("save_map_2d needs a 2-D world")
    rows = ["".join(OCCUPIED if c else FREE for c in row) for row in world.true_grid[::-1]]
    out: list[str] = []
    pending = list(world.comments)
    for i, row in enumerate(rows):
        while pending and pending[0][0] == i:
            out.append(pending.pop(0)[1])
        out.append(row)
    out.extend(c for _, c in pending)
    return "\n".join(out) + "\n"


def load_obstacles_3d(
    records: Iterable[Sequence[float]],
    *,
    resolution: float = 0.25,
    inflation_radius: float = 0.5,
    bounds: tuple[Sequence[float], Sequence[float]] | None = None,
    semi_known: bool = False,
) -> OccupancyWorld:
    pts = []
    for i, rec in enumerate(records):
        try:
            x, y, z = (float(v) for v in rec)
        except (TypeError, ValueError) as exc:
            raise MapFormatError(f"record {i}: expected three numbers, got {rec!r}") from exc
        if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(z)):
            raise MapFormatError(f"record {i}: non-finite coordinate {rec!r}")
        pts.append((x, y, z))
    if bounds is None:
        inf = math.inf
        bounds = (Point3(-inf, -inf, -inf), Point3(inf, inf, inf))
    return OccupancyWorld(
        3,
        resolution=resolution,
        inflation_radius=inflation_radius,
        bounds=(Point3(*bounds[0]), Point3(*bounds[1])),
        semi_known=semi_known,
        points=np.array(pts, dtype=float).reshape(-1, 3),
    )


def read_obstacles_csv(text: str) -> list[tuple[float, float, float]]:
    """Parse the ``x,y,z`` obstacle CSV into records."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise MapFormatError("empty obstacle file (missing header)") from None
    if [h.strip() for h in header] != ["x", "y", "z"]:
        raise MapFormatError(f"bad header {header!r}; expected x,y,z")
    records = []
    for i, row in enumerate(reader):
        if not row:
            continue
        if len(row) != 3:
            raise MapFormatError(f"record {i}: expected 3 fields, got {len(row)}")
        try:
            records.append(tuple(float(v) for v in row))
        except ValueError as exc:
            raise MapFormatError(f"record {i}: {exc}") from exc
    return records


def save_obstacles_3d(world: OccupancyWorld) -> str:
    if world.dimensionality != 3:
        raise ValueError("save_obstacles_3d needs a 3-D world")
    lines = ["x,y,z"]
    lines += [f"{x!r},{y!r},{z!r}" for x, y, z in world.true_points.tolist()]
    return "\n".join(lines) + "\n"


# -- operations ------------------------------------------------------------


def is_occupied(world: OccupancyWorld, p) -> bool:
    """Known-map occupancy with inflation; out of bounds counts as occupied."""
    if not world.in_bounds(p):
        return True
    if world.dimensionality == 2:
        ix, iy = world.cell_of(p)
        ny, nx = world._inflated.shape
        if not (0 <= ix < nx and 0 <= iy < ny):
            return True
        return bool(world._inflated[iy, ix])
    if world._tree is None:
        return False
    d, _ = world._tree.query((p[0], p[1], p[2]), k=1)
    return bool(d <= world.inflation_radius)


def segment_samples(a, b, spacing: float) -> np.ndarray:
    """Evenly spaced points on a->b, endpoints included, gap <= spacing."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    length = float(np.linalg.norm(b - a))
    n = max(1, math.ceil(length / spacing - 1e-12))
    t = np.arange(n + 1, dtype=float) / n
    return a + t[:, None] * (b - a)


def segment_clear(world: OccupancyWorld, a, b) -> bool:
    return not world.occupied_many(segment_samples(a, b, world.sample_spacing)).any()


def segments_clear(world: OccupancyWorld, a, targets) -> list[bool]:
    """Batch :func:`segment_clear` from one point to many targets."""
    if not len(targets):
        return []
    chunks = [segment_samples(a, b, world.sample_spacing) for b in targets]
    sizes = [len(c) for c in chunks]
    occ = world.occupied_many(np.concatenate(chunks))
    starts = np.cumsum([0] + sizes[:-1])
    return [not bool(x) for x in np.logical_or.reduceat(occ, starts)]


def reveal(world: OccupancyWorld, p, sensor: SensorConfig) -> int:
    """Move every true obstacle within sensor range of ``p`` into the known set."""
    if not world.semi_known:
        return 0
    r = sensor.range
    if world.dimensionality == 2:
        hidden = world.true_grid & ~world.known_grid
        if not hidden.any():
            return 0
        ys, xs = np.nonzero(hidden)
        d2 = (xs * world.resolution - p[0]) ** 2 + (ys * world.resolution - p[1]) ** 2
        hit = d2 <= r * r
        n = int(hit.sum())
        if n:
            world.known_grid[ys[hit], xs[hit]] = True
            world._refresh_inflated()
        return n
    if world._true_tree is None:
        return 0
    idx = np.asarray(world._true_tree.query_ball_point((p[0], p[1], p[2]), r), dtype=int)
    if not len(idx):
        return 0
    new = idx[~world.known_mask[idx]]
    if len(new):
        world.known_mask[new] = True
        world._refresh_tree()
    return len(new)


def nearest_obstacle_on_path(
    world: OccupancyWorld, path: Sequence, from_, max_dist: float | None = None
) -> float | None:
    """Arc length from ``from_`` to the first occupied sample along ``[from_] + path``.

    Returns None when the polyline is clear (or clear up to ``max_dist``).
    """
    if not len(path):
        raise ValueError("path must be nonempty")
    pts = [from_, *path]
    travelled = 0.0
    for a, b in zip(pts, pts[1:]):
        seg = euclid_dist(a, b)
        if max_dist is not None and travelled + seg > max_dist:
            if seg > 0:
                t = (max_dist - travelled) / seg
                b = tuple(a[k] + t * (b[k] - a[k]) for k in range(3))
                seg = max_dist - travelled
        samples = segment_samples(a, b, world.sample_spacing)
        occ = world.occupied_many(samples)
        if occ.any():
            i = int(np.argmax(occ))
            return travelled + seg * i / (len(samples) - 1)
        travelled += seg
        if max_dist is not None and travelled >= max_dist:
            return None
    return None
