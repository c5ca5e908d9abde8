import itertools

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from graphrecon.geometry import BuildingGraph
from graphrecon.synth import SynthParams, synth

settings.register_profile("repo", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")


def square(x0=100.0, y0=100.0, side=40.0) -> BuildingGraph:
    pts = [(x0, y0), (x0 + side, y0), (x0 + side, y0 + side), (x0, y0 + side)]
    return BuildingGraph.from_points(pts, [(0, 1), (1, 2), (2, 3), (0, 3)])


def l_shape() -> BuildingGraph:
    """Two abutting rectangles, [64,128]x[64,96] on top of [64,96]x[96,160].

    Corners 1 and 4 are T-junctions on the shared internal edge (1, 4).
    """
    pts = [(64, 64), (64, 96), (64, 160), (96, 160), (96, 96), (128, 96), (128, 64)]
    edges = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (0, 6), (1, 4)]
    return BuildingGraph.from_points(pts, edges)


@pytest.fixture
def sq():
    return square()


@pytest.fixture
def ell():
    return l_shape()


@st.composite
def small_graphs(draw, max_corners=8, grid=True):
    """Random graphs with up to ``max_corners`` corners in a 64 px box."""
    n = draw(st.integers(0, max_corners))
    if grid:
        coord = st.integers(0, 8).map(lambda v: 96.0 + 8.0 * v)
    else:
        coord = st.floats(96.0, 160.0, allow_nan=False, width=32)
    pts = draw(st.lists(st.tuples(coord, coord), min_size=n, max_size=n,
                        unique_by=lambda p: (round(p[0]), round(p[1]))))
    pairs = list(itertools.combinations(range(len(pts)), 2))
    edges = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=min(len(pairs), 10))) if pairs else []
    return BuildingGraph.from_points(pts, edges)


def synth_gt(seed: int, rectangles: int = 2) -> BuildingGraph:
    return synth(SynthParams(rectangles=rectangles, seed=seed)).gt


# acceptance verdicts, filled in by test_acceptance.py and echoed once at the end of the run
VERDICTS: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance")
    for n in sorted(VERDICTS):
        terminalreporter.write_line(VERDICTS[n])
