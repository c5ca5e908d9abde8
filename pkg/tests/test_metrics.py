import pytest
from hypothesis import given, strategies as st

from graphrecon.geometry import BuildingGraph, Corner
from graphrecon.metrics import EmptyCorpus, LevelStats, aggregate, evaluate, evaluate_corpus, match_regions

from conftest import small_graphs, synth_gt


def uneven_l() -> BuildingGraph:
    """A 64x96 block with a 32x32 annex, sharing the internal edge (1, 4).

    The big block covers 6144 / 7168 of the outline, so the merged
    prediction still matches it at IoU >= 0.7.
    """
    pts = [(64, 64), (128, 64), (128, 160), (64, 160), (128, 96), (160, 96), (160, 64)]
    edges = [(0, 1), (1, 4), (4, 2), (2, 3), (0, 3), (4, 5), (5, 6), (1, 6)]
    return BuildingGraph.from_points(pts, edges)


def test_perfect_prediction(ell):
    rep = evaluate(ell, ell)
    for level in ("corner", "edge", "region"):
        assert rep.f1(level) == rep.precision(level) == rep.recall(level) == 1.0


def test_empty_prediction(ell):
    rep = evaluate(BuildingGraph.from_points([]), ell)
    for level in ("corner", "edge", "region"):
        assert (rep.precision(level), rep.recall(level), rep.f1(level)) == (0.0, 0.0, 0.0)


def test_l_missing_internal_edge():
    gt = uneven_l()
    assert (len(gt.corners), len(gt.edges)) == (7, 8)
    pred = BuildingGraph(gt.corners, gt.edges - {(1, 4)}, gt.canvas)
    rep = evaluate(pred, gt)
    assert rep.f1("corner") == 1.0
    # 7 of 7 predicted edges correct, 7 of 8 GT edges found
    assert rep.levels["edge"] == LevelStats(7, 7, 8)
    assert rep.f1("edge") == pytest.approx(2 * (1 * 7 / 8) / (1 + 7 / 8)) == pytest.approx(14 / 15)
    # one merged region matches the big block only
    assert rep.levels["region"] == LevelStats(1, 1, 2)
    assert rep.f1("region") == pytest.approx(2 / 3)
    (pair,) = match_regions(pred, gt)
    assert pair[2] == pytest.approx(0.857, abs=0.01)


def test_l_equal_halves_region_below_threshold(ell):
    # equal halves: the merged face overlaps each at IoU 0.5, below 0.7
    pred = BuildingGraph(ell.corners, ell.edges - {(1, 4)}, ell.canvas)
    assert evaluate(pred, ell).levels["region"].true_positives == 0


@given(small_graphs(grid=False))
def test_self_evaluation(g):
    rep = evaluate(g, g)
    if g.corners:
        assert rep.f1("corner") == 1.0
    if g.edges:
        assert rep.f1("edge") == 1.0
    if rep.levels["region"].actual:
        assert rep.f1("region") == 1.0


@given(small_graphs(grid=False), st.integers(0, 2000))
def test_swap_exchanges_precision_and_recall(pred, seed):
    gt = synth_gt(seed, 1 + seed % 4)
    a, b = evaluate(pred, gt), evaluate(gt, pred)
    for level in ("corner", "edge", "region"):
        assert a.precision(level) == b.recall(level)
        assert a.recall(level) == b.precision(level)
        assert a.f1(level) == pytest.approx(b.f1(level))


@given(small_graphs(grid=False), st.randoms())
def test_corner_f1_ignores_ids(g, rnd):
    gt = synth_gt(3)
    ids = list(range(len(g.corners)))
    rnd.shuffle(ids)
    remap = {c.id: 50 + ids[i] for i, c in enumerate(g.corners)}
    h = BuildingGraph(tuple(Corner(remap[c.id], c.x, c.y) for c in g.corners),
                      frozenset((remap[a], remap[b]) for a, b in g.edges), g.canvas)
    assert evaluate(h, gt).f1("corner") == evaluate(g, gt).f1("corner")


def test_corpus_aggregation(ell):
    empty = BuildingGraph.from_points([])
    one = evaluate_corpus([(ell, ell)])
    assert one.to_dict() == evaluate(ell, ell).to_dict()
    assert evaluate_corpus([(ell, ell), (ell, ell)]).f1("edge") == 1.0
    mixed = evaluate_corpus([(ell, ell), (empty, ell)])
    # brute-force micro counts: tp 8 of predicted 8, actual 16
    p, r = 8 / 8, 8 / 16
    assert mixed.f1("edge") == pytest.approx(2 * p * r / (p + r))
    assert 0.0 < mixed.f1("edge") < 1.0
    macro = evaluate_corpus([(ell, ell), (empty, ell)], average="macro")
    assert macro.f1("edge") == pytest.approx(0.5)
    with pytest.raises(EmptyCorpus):
        evaluate_corpus([])
    with pytest.raises(ValueError):
        aggregate([one], average="median")


def test_text_report_is_flat(ell):
    text = evaluate(ell, ell).to_text()
    lines = text.strip().splitlines()
    assert "edge.f1=1.000000" in lines
    assert all("=" in line and "." in line.split("=")[0] for line in lines)
