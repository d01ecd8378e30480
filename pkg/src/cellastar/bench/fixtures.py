"""Deterministic generators for the shipped benchmark maps.

Each generator returns map text or obstacle records; the files under
``cellastar/data`` are their rendered output and ``tests`` check that the
two stay in sync.
"""

from __future__ import annotations

import math

import numpy as np

Rect = tuple[float, float, float, float]


def rect_grid(width: float, height: float, resolution: float, rects: list[Rect]) -> np.ndarray:
    """Boolean grid ``[iy, ix]`` with every cell whose centre lies in a rect set."""
    nx = int(round(width / resolution))
    ny = int(round(height / resolution))
    xs = np.arange(nx) * resolution
    ys = np.arange(ny) * resolution
    grid = np.zeros((ny, nx), dtype=bool)
    for x0, y0, x1, y1 in rects:
        cols = (xs >= x0 - 1e-9) & (xs <= x1 + 1e-9)
        rows = (ys >= y0 - 1e-9) & (ys <= y1 + 1e-9)
        grid[np.ix_(rows, cols)] = True
    return grid


def grid_text(grid: np.ndarray, comments: list[str] = ()) -> str:
    lines = [f"; {c}" for c in comments]
    lines += ["".join("#" if c else "." for c in row) for row in grid[::-1]]
    return "\n".join(lines) + "\n"


# -- 3-D ---------------------------------------------------------------------


def wall_points(spacing: float = 0.25) -> list[tuple[float, float, float]]:
    """A 4 m wide, 5 m tall plane at x = 3.5 between start (0,0,2.5) and goal (7,0,2.5)."""
    ys = np.arange(-2.0, 2.0 + 1e-9, spacing)
    zs = np.arange(0.0, 5.0 + 1e-9, spacing)
    return [(3.5, float(y), float(z)) for y in ys for z in zs]


def tree_points(
    seed: int = 1,
    clusters: int = 10,
    spacing: float = 0.5,
) -> list[tuple[float, float, float]]:
    """Tree trunks with ring-shaped crowns clustered near the start (0, 0, 6)."""
    rng = np.random.default_rng(seed)
    pts: list[tuple[float, float, float]] = []
    for _ in range(clusters):
        cx = float(rng.uniform(3.0, 16.0))
        cy = float(rng.uniform(-5.0, 3.0))
        height = float(rng.uniform(5.0, 11.0))
        crown = float(rng.uniform(1.0, 2.0))
        for z in np.arange(0.0, height + 1e-9, spacing):
            pts.append((round(cx, 3), round(cy, 3), round(float(z), 3)))
        n = max(8, int(2 * math.pi * crown / spacing))
        for k in range(n):
            a = 2 * math.pi * k / n
            for zc in np.arange(height - crown, height + 1e-9, spacing):
                pts.append((round(cx + crown * math.cos(a), 3), round(cy + crown * math.sin(a), 3), round(float(zc), 3)))
    return pts


# -- 2-D ---------------------------------------------------------------------


def blocks_grid(
    nx: int = 60,
    ny: int = 70,
    seed: int = 7,
    n: int = 40,
    keep: tuple[tuple[int, int], ...] = ((2, 2), (15, 25), (41, 25), (55, 65)),
) -> np.ndarray:
    """Random rectangular blocks two cells apart, leaving ``keep`` cells open."""
    rng = np.random.default_rng(seed)
    g = np.zeros((ny, nx), dtype=bool)
    placed = 0
    tries = 0
    while placed < n and tries < 5000:
        tries += 1
        w = int(rng.integers(2, 7))
        h = int(rng.integers(2, 7))
        x = int(rng.integers(1, nx - w - 1))
        y = int(rng.integers(1, ny - h - 1))
        if g[max(0, y - 2) : y + h + 2, max(0, x - 2) : x + w + 2].any():
            continue
        if any(x - 2 <= kx < x + w + 2 and y - 2 <= ky < y + h + 2 for kx, ky in keep):
            continue
        g[y : y + h, x : x + w] = True
        placed += 1
    return g


def random_grid(seed: int, n: int = 32, density: float = 0.25) -> np.ndarray:
    """Uniform random obstacles with the two opposite corners cleared."""
    rng = np.random.default_rng(seed)
    g = rng.random((n, n)) < density
    g[0, 0] = g[n - 1, n - 1] = False
    return g


DEAD_CORNER_RECTS: list[Rect] = [
    (14.0, 11.0, 14.5, 19.0),
    (10.0, 18.5, 14.5, 19.0),
    (10.0, 11.0, 14.5, 11.5),
]


def dead_corner_grid() -> np.ndarray:
    """40 m x 30 m at 0.5 m with a box open away from the goal around the start."""
    return rect_grid(40.0, 30.0, 0.5, DEAD_CORNER_RECTS)


TABLE1_RECTS: list[Rect] = [
    # U-shaped trap opening toward the start, closed side facing goal (15, 50)
    (12.0, 36.0, 12.5, 44.5),
    (17.5, 36.0, 18.0, 44.5),
    (12.0, 44.0, 18.0, 44.5),
    # scattered convex blocks
    (14.0, 18.0, 18.0, 21.0),
    (24.0, 30.0, 27.0, 34.0),
    (1.0, 24.0, 3.0, 27.0),
    (35.0, 12.0, 38.0, 15.0),
]


def table1_grid() -> np.ndarray:
    """60 m x 70 m at 0.5 m; start (15, 5) heading north."""
    return rect_grid(60.0, 70.0, 0.5, TABLE1_RECTS)


# -- rendered data files -------------------------------------------------------


def _points_csv(points) -> str:
    return "x,y,z\n" + "".join(f"{x!r},{y!r},{z!r}\n" for x, y, z in points)


def render_maps() -> dict[str, str]:
    """File name -> contents for everything under ``data/maps``."""
    return {
        "empty.map": grid_text(np.zeros((20, 20), dtype=bool), ["empty 20 x 20 grid, 1 m cells"]),
        "empty3d.csv": _points_csv([]),
        "wall.csv": _points_csv(wall_points()),
        "trees.csv": _points_csv(tree_points()),
        "blocks.map": grid_text(
            blocks_grid(), ["60 x 70 grid of random blocks, 1 m cells, seed 7; start cell (2, 2)"]
        ),
        "table1.map": grid_text(
            table1_grid(), ["60 m x 70 m at 0.5 m; U-shaped trap in front of goal (15, 50)"]
        ),
        "dead_corner.map": grid_text(
            dead_corner_grid(), ["40 m x 30 m at 0.5 m; start boxed in facing the closed end"]
        ),
    }


def write_maps(directory) -> list:
    from pathlib import Path

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    out = []
    for name, text in render_maps().items():
        path = directory / name
        path.write_text(text)
        out.append(path)
    return out


if __name__ == "__main__":
    import sys
    from pathlib import Path

    target = sys.argv[1] if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "data" / "maps"
    for p in write_maps(target):
        print(p)
