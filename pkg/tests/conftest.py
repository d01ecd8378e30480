from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

from cellastar.bench.fixtures import grid_text
from cellastar.world import load_map_2d

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")

DATA = Path(__file__).resolve().parent.parent / "src" / "cellastar" / "data"
SUITES = DATA / "suites"
MAPS = DATA / "maps"

# filled by test_acceptance, printed once at the end of the session
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")


def grid_world(rows, **kw):
    """World from a list of strings, first string is the top row."""
    return load_map_2d("\n".join(rows), **kw)


def random_grid_world(seed: int, n: int = 32, density: float = 0.25):
    rng = np.random.default_rng(seed)
    g = rng.random((n, n)) < density
    g[0, 0] = g[n - 1, n - 1] = False
    return load_map_2d(grid_text(g))


@pytest.fixture
def suites():
    return SUITES


def curvature_max(points, directions) -> float:
    """Largest three-point circumcircle curvature within constant-direction runs."""
    P = np.asarray([(p[0], p[1]) for p in points], dtype=float)
    k = 0.0
    for i in range(1, len(P) - 1):
        if not (directions[i - 1] == directions[i] == directions[i + 1]):
            continue
        a, b, c = P[i - 1], P[i], P[i + 1]
        ab, bc, ca = np.linalg.norm(b - a), np.linalg.norm(c - b), np.linalg.norm(a - c)
        if ab * bc * ca <= 1e-12:
            continue
        cross = abs((b - a)[0] * (c - a)[1] - (b - a)[1] * (c - a)[0])
        k = max(k, 2 * cross / (ab * bc * ca))
    return k


def straight(a, b) -> float:
    return math.dist(tuple(a), tuple(b))
