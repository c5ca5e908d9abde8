import numpy as np
import pytest
from hypothesis import given, strategies as st

from graphrecon.fileio import (Case, DataError, decode_raster, dumps_graph, encode_raster, list_cases, loads_graph,
                               read_case, read_graph, read_raster, write_case, write_raster)
from graphrecon.geometry import BuildingGraph

from conftest import small_graphs, synth_gt


@given(small_graphs(grid=False))
def test_graph_json_round_trip(g):
    h = loads_graph(dumps_graph(g))
    assert h == g
    # full precision: coordinates and ids survive bit for bit
    assert h.corners == g.corners and h.edges == g.edges and h.canvas == g.canvas


def test_graph_json_is_stable():
    g = synth_gt(4, 3)
    assert dumps_graph(loads_graph(dumps_graph(g))) == dumps_graph(g)


@pytest.mark.parametrize("text", [
    "not json",
    "{}",
    '{"corners": [{"id": 0, "x": 1}], "edges": []}',
    '{"corners": [{"id": 0, "x": 1, "y": 1}], "edges": [[0, 5]]}',
    '{"corners": [{"id": 0, "x": 1, "y": 1}, {"id": 0, "x": 2, "y": 2}], "edges": []}',
    '{"corners": [{"id": 0, "x": 1, "y": 1}], "edges": [[0, 0]]}',
])
def test_malformed_graph(text):
    with pytest.raises(DataError):
        loads_graph(text)


def test_missing_file(tmp_path):
    with pytest.raises(DataError):
        read_graph(tmp_path / "nope.json")
    with pytest.raises(DataError):
        read_raster(tmp_path / "nope.pgm")


arrays = st.integers(0, 2 ** 31).map(np.random.default_rng)


@given(arrays)
def test_binary_and_targets_round_trip(gen):
    b = gen.integers(0, 2, size=(7, 9)).astype(np.uint8)
    assert np.array_equal(decode_raster(encode_raster(b, "binary")), b)
    t = gen.integers(-1, 2, size=(5, 3)).astype(np.int8)
    out = decode_raster(encode_raster(t, "targets"))
    assert out.dtype == np.int8 and np.array_equal(out, t)


@given(arrays)
def test_confidence_and_scores_quantization(gen):
    c = gen.uniform(0, 1, size=(6, 4))
    assert np.max(np.abs(decode_raster(encode_raster(c, "confidence")) - c)) <= 0.5 / 255 + 1e-12
    s = gen.uniform(-1, 1, size=(6, 4))
    assert np.max(np.abs(decode_raster(encode_raster(s, "scores")) - s)) <= 1.0 / 65535 + 1e-12
    # quantized values are fixed points
    q = decode_raster(encode_raster(c, "confidence"))
    assert np.array_equal(decode_raster(encode_raster(q, "confidence")), q)


def test_pgm_header_comments_and_shape():
    body = bytes([0, 1, 1, 0, 1, 0])
    buf = b"P5\n# made by hand\n3 # width\n2\n# maxval next\n1\n" + body
    r = decode_raster(buf)
    assert r.shape == (2, 3)
    assert r.tolist() == [[0, 1, 1], [0, 1, 0]]


@pytest.mark.parametrize("buf", [
    b"P2\n1 1\n1\n0",
    b"P5\n2 2\n1\n\x00",
    b"P5\n2",
    b"P5\nx 2\n1\n\x00\x00",
    b"P5\n1 1\n7\n\x00",
])
def test_malformed_pgm(buf):
    with pytest.raises(DataError):
        decode_raster(buf)


def test_kind_must_match_maxval(tmp_path):
    write_raster(tmp_path / "a.pgm", np.ones((2, 2)), "binary")
    with pytest.raises(DataError):
        read_raster(tmp_path / "a.pgm", "confidence")


def test_case_round_trip(tmp_path):
    gt = synth_gt(8, 2)
    init = BuildingGraph(gt.corners, frozenset(list(gt.edges)[1:]), gt.canvas)
    gen = np.random.default_rng(0)
    case = Case("case-0007", gt, init, np.round(gen.uniform(size=gt.canvas[::-1]) * 255) / 255,
                np.zeros(gt.canvas[::-1]), np.ones(gt.canvas[::-1], dtype=np.uint8), {"seed": 8})
    write_case(tmp_path, case)
    back = read_case(tmp_path / "case-0007")
    assert back.gt == gt and back.initial == init and back.meta == {"seed": 8}
    assert np.allclose(back.corner_conf, case.corner_conf, atol=1e-12)
    assert np.array_equal(back.region_ref, case.region_ref)
    (tmp_path / "stray").mkdir()
    assert list_cases(tmp_path) == [tmp_path / "case-0007"]
    with pytest.raises(DataError):
        list_cases(tmp_path / "stray")
