import re
import xml.etree.ElementTree as ET

import pytest

from cellastar.plot import MARGIN, PlotSpec, render_svg
from cellastar.world import load_obstacles_3d

from conftest import grid_world

NS = "{http://www.w3.org/2000/svg}"


def world10():
    return grid_world(["." * 10] * 9 + ["..##......"])


def by_id(svg, ident):
    root = ET.fromstring(svg)
    for el in root.iter():
        if el.get("id") == ident:
            return el
    return None


def test_deterministic_and_valid_xml():
    pts = [(0, 0, 0), (3, 4, 0), (9, 9, 0)]
    a = render_svg(world10(), pts)
    assert a == render_svg(world10(), pts)
    ET.fromstring(a)


def test_empty_trajectory_still_renders():
    svg = render_svg(world10(), [])
    assert by_id(svg, "top-trajectory") is None
    assert by_id(svg, "panel-top") is not None


def test_marker_coordinates():
    # 10 x 10 cells of 1 m, bounds [-0.5, 9.5]; fixed scale 20 px/m
    spec = PlotSpec(width=400, height=400, scale=20.0)
    svg = render_svg(world10(), [(0, 0, 0), (9, 9, 0)], spec)
    start = by_id(svg, "top-start")
    lo = -0.5
    span = 10.0
    assert float(start.get("cx")) == pytest.approx(MARGIN + (0 - lo) * 20)
    assert float(start.get("cy")) == pytest.approx(MARGIN + span * 20 - (0 - lo) * 20)
    goal = by_id(svg, "top-goal")
    assert float(goal.get("x")) + 5 == pytest.approx(MARGIN + (9 - lo) * 20)
    assert float(goal.get("y")) + 5 == pytest.approx(MARGIN + span * 20 - (9 - lo) * 20)


def test_obstacles_are_row_runs():
    svg = render_svg(world10(), [], PlotSpec(layers={"obstacles"}))
    rects = re.findall(r'<rect class="obstacle"', svg)
    assert len(rects) == 1


def test_3d_has_two_panels():
    w = load_obstacles_3d([(3.5, 0, 2)], bounds=((-1, -3, 0), (8, 3, 5)))
    svg = render_svg(w, [(0, 0, 2.5), (7, 0, 2.5)])
    assert by_id(svg, "panel-top") is not None and by_id(svg, "panel-side") is not None
    assert by_id(svg, "side-trajectory") is not None


def test_layers_filter():
    svg = render_svg(world10(), [(0, 0, 0), (5, 5, 0)], PlotSpec(layers={"trajectory"}))
    assert by_id(svg, "top-start") is None
    assert by_id(svg, "top-obstacles") is None
    assert by_id(svg, "top-trajectory") is not None


@pytest.mark.parametrize(
    "kw", [dict(width=0), dict(scale=-1.0), dict(layers=set()), dict(layers={"heatmap"}), dict(cell_steps=-1)]
)
def test_spec_validation(kw):
    with pytest.raises(ValueError):
        PlotSpec(**kw)
