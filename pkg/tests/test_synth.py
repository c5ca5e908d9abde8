import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from graphrecon.actions import enumerate_actions
from graphrecon.geometry import enclosed_mask, extract_regions, junctions, rasterize
from graphrecon.synth import (CORRUPTION_TYPES, CorruptionSpec, Exhausted, InfeasibleParams, SynthParams, corrupt,
                              replay_inverses, synth)

from conftest import square


def test_one_rectangle():
    case = synth(SynthParams(rectangles=1, seed=3))
    g = case.gt
    assert (len(g.corners), len(g.edges), len(extract_regions(g))) == (4, 4, 1)


def _find_l(seed_range=range(500)):
    for s in seed_range:
        case = synth(SynthParams(rectangles=2, seed=s))
        if len(case.gt.corners) == 7:
            return case
    raise AssertionError("no L-shaped layout in range")


def test_two_rectangles_l_shape():
    case = _find_l()
    degrees = sorted(len(j.directions) for j in junctions(case.gt))
    assert degrees == [2] * 5 + [3] * 2
    assert len(extract_regions(case.gt)) == 2


def test_zero_degradation_is_exact():
    case = synth(SynthParams(rectangles=3, seed=9, blur=0, flip=0.0))
    assert np.array_equal(case.corner_conf, rasterize(case.gt, "corners").astype(float))
    assert np.array_equal(case.edge_conf, rasterize(case.gt, "edges").astype(float))
    assert np.array_equal(case.region_ref, enclosed_mask(case.gt))


@given(st.integers(0, 10_000), st.integers(1, 4), st.integers(0, 3), st.floats(0, 0.2))
@settings(max_examples=30)
def test_synth_reproducible_and_valid(seed, rects, blur, flip):
    p = SynthParams(rectangles=rects, seed=seed, blur=blur, flip=flip)
    a, b = synth(p), synth(p)
    assert a.gt == b.gt and a.gt.corners == b.gt.corners
    for x, y in ((a.corner_conf, b.corner_conf), (a.edge_conf, b.edge_conf), (a.region_ref, b.region_ref)):
        assert x.tobytes() == y.tobytes()
    assert a.corner_conf.min() >= 0 and a.corner_conf.max() <= 1
    assert len(extract_regions(a.gt)) == rects
    # every rectangle corner sits on the grid, away from the margin
    for c in a.gt.corners:
        assert c.x % 16 == 0 and c.y % 16 == 0
        assert 16 <= c.x <= 240 and 16 <= c.y <= 240


def test_params_validation():
    for bad in (dict(rectangles=0), dict(rectangles=5), dict(grid=4), dict(flip=1.5), dict(blur=-1)):
        with pytest.raises(ValueError):
            SynthParams(**bad)
    with pytest.raises(InfeasibleParams):
        synth(SynthParams(rectangles=4, canvas=(64, 64), min_cells=2, max_cells=2))


def test_k_zero_is_identity():
    gt = synth(SynthParams(seed=1)).gt
    g, edits = corrupt(gt, CorruptionSpec(k=0))
    assert g == gt and edits == []


def test_drop_edge_on_square():
    gt = square()
    g, (edit,) = corrupt(gt, CorruptionSpec(k=1, types=("drop-edge",), seed=4))
    assert (len(g.corners), len(g.edges)) == (4, 3)
    assert edit.inverse.kind == "add_edge"
    (missing,) = gt.edges - g.edges
    assert edit.inverse.params == missing


def test_exhausted():
    gt = square()
    with pytest.raises(Exhausted):
        corrupt(gt, CorruptionSpec(k=5, types=("drop-edge",)))


@given(st.integers(0, 10_000), st.integers(1, 4), st.integers(0, 4),
       st.sets(st.sampled_from(CORRUPTION_TYPES), min_size=1))
@settings(max_examples=60)
def test_replay_restores_gt(seed, rects, k, types):
    gt = synth(SynthParams(rectangles=rects, seed=seed)).gt
    try:
        g, edits = corrupt(gt, CorruptionSpec(k=k, types=tuple(sorted(types)), seed=seed))
    except Exhausted:
        # a spurious corner always has room near the building; the other two kinds can run out
        assert "add-spurious-corner" not in types
        return
    assert len(edits) == k
    assert replay_inverses(g, edits) == gt
    # the last inverse is a single enumerated action away
    if edits:
        assert edits[-1].inverse in enumerate_actions(g)


def test_jitter_moves_corners_within_bound():
    gt = synth(SynthParams(rectangles=2, seed=5)).gt
    g, _ = corrupt(gt, CorruptionSpec(k=0, jitter=2.0, seed=5))
    moved = {c.id: (c.x, c.y) for c in g.corners}
    for c in gt.corners:
        x, y = moved[c.id]
        assert abs(x - c.x) <= 2.0 and abs(y - c.y) <= 2.0
