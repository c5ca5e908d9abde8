"""Graph JSON, PGM rasters, and the on-disk corpus layout.

A corpus is a directory of cases::

    <corpus>/<case-id>/gt.json initial.json corner.pgm edge.pgm region.pgm meta.json
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .actions import Action
from .geometry import BuildingGraph, Corner
from .labeling import LabelSet


class DataError(ValueError):
    """A file is missing, malformed, or inconsistent."""


# -------------------------------------------------------------------- graphs

def graph_to_dict(g: BuildingGraph) -> dict:
    return {
        "canvas": list(g.canvas),
        "corners": [{"id": c.id, "x": c.x, "y": c.y} for c in g.corners],
        "edges": [list(e) for e in g.sorted_edges()],
    }


def graph_from_dict(d: dict) -> BuildingGraph:
    try:
        corners = tuple(Corner(int(c["id"]), float(c["x"]), float(c["y"])) for c in d["corners"])
        edges = frozenset((int(a), int(b)) for a, b in d["edges"])
        canvas = tuple(int(v) for v in d.get("canvas", (256, 256)))
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"malformed graph: {exc}") from exc
    try:
        return BuildingGraph(corners, edges, canvas)
    except ValueError as exc:
        raise DataError(str(exc)) from exc


def dumps_graph(g: BuildingGraph) -> str:
    return json.dumps(graph_to_dict(g), indent=1) + "\n"


def loads_graph(text: str) -> BuildingGraph:
    try:
        return graph_from_dict(json.loads(text))
    except json.JSONDecodeError as exc:
        raise DataError(f"invalid JSON: {exc}") from exc


def read_graph(path) -> BuildingGraph:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror}") from exc
    try:
        return loads_graph(text)
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from exc


def labels_to_dict(labels: LabelSet) -> dict:
    return {
        "junctions": {str(k): v for k, v in sorted(labels.junctions.items())},
        "edges": [[a, b, ok] for (a, b), ok in sorted(labels.edges.items())],
    }


def labels_from_dict(d: dict) -> LabelSet:
    return LabelSet({int(k): bool(v) for k, v in d["junctions"].items()},
                    {(int(a), int(b)): bool(ok) for a, b, ok in d["edges"]})


def action_to_dict(a: Action) -> dict:
    return {"kind": a.kind, "params": list(a.params)}


def action_from_dict(d: dict) -> Action:
    return Action(d["kind"], tuple(int(v) for v in d["params"]))


# ------------------------------------------------------------------- rasters

RASTER_KINDS = {"binary": 1, "confidence": 255, "targets": 2, "scores": 65535}


def encode_raster(raster: np.ndarray, kind: str) -> bytes:
    """P5 PGM.  binary: maxval 1; confidence: v * 255; targets: v + 1 with
    maxval 2; scores in [-1, 1]: (v + 1) / 2 * 65535, 16-bit big-endian."""
    if kind not in RASTER_KINDS:
        raise ValueError(f"unknown raster kind {kind!r}")
    r = np.asarray(raster)
    height, width = r.shape
    maxval = RASTER_KINDS[kind]
    if kind == "binary":
        data = (r != 0).astype(np.uint8)
    elif kind == "confidence":
        data = np.round(np.clip(r, 0.0, 1.0) * 255.0).astype(np.uint8)
    elif kind == "targets":
        data = (np.clip(np.round(r), -1, 1) + 1).astype(np.uint8)
    else:
        data = np.round((np.clip(r, -1.0, 1.0) + 1.0) / 2.0 * 65535.0).astype(">u2")
    return f"P5\n{width} {height}\n{maxval}\n".encode("ascii") + data.tobytes()


def _header_tokens(buf: bytes):
    """Yield (token, end offset) for the PGM header, skipping comments."""
    i = 0
    n = len(buf)
    while True:
        while i < n and buf[i:i + 1].isspace():
            i += 1
        if i < n and buf[i:i + 1] == b"#":
            while i < n and buf[i:i + 1] not in (b"\n", b"\r"):
                i += 1
            continue
        start = i
        while i < n and not buf[i:i + 1].isspace():
            i += 1
        if start == i:
            raise DataError("truncated PGM header")
        yield buf[start:i], i


def decode_raster(buf: bytes, kind: str | None = None) -> np.ndarray:
    """Inverse of :func:`encode_raster`; ``kind`` defaults from maxval."""
    tokens = _header_tokens(buf)
    try:
        magic, _ = next(tokens)
        if magic != b"P5":
            raise DataError(f"unsupported PGM magic {magic!r}")
        width = int(next(tokens)[0])
        height = int(next(tokens)[0])
        tok, end = next(tokens)
        maxval = int(tok)
    except (StopIteration, ValueError) as exc:
        raise DataError(f"bad PGM header: {exc}") from exc
    if kind is None:
        kind = {v: k for k, v in RASTER_KINDS.items()}.get(maxval)
        if kind is None:
            raise DataError(f"unknown maxval {maxval}")
    if RASTER_KINDS[kind] != maxval:
        raise DataError(f"{kind} raster must have maxval {RASTER_KINDS[kind]}, got {maxval}")
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype(np.uint8)
    body = buf[end + 1:end + 1 + width * height * dtype.itemsize]
    if len(body) != width * height * dtype.itemsize:
        raise DataError("truncated PGM body")
    data = np.frombuffer(body, dtype=dtype).reshape(height, width)
    if kind == "binary":
        return data.astype(np.uint8)
    if kind == "confidence":
        return data.astype(float) / 255.0
    if kind == "targets":
        return data.astype(np.int8) - 1
    return data.astype(float) / 65535.0 * 2.0 - 1.0


def write_raster(path, raster: np.ndarray, kind: str) -> None:
    atomic_write(path, encode_raster(raster, kind))


def read_raster(path, kind: str | None = None) -> np.ndarray:
    try:
        buf = Path(path).read_bytes()
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror}") from exc
    try:
        return decode_raster(buf, kind)
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from exc


# -------------------------------------------------------------------- files

def atomic_write(path, data: bytes | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(data, str):
        data = data.encode("utf-8")
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, obj) -> None:
    atomic_write(path, json.dumps(obj, indent=1, sort_keys=True) + "\n")


def read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON: {exc}") from exc


@dataclass
class Case:
    case_id: str
    gt: BuildingGraph
    initial: BuildingGraph
    corner_conf: np.ndarray
    edge_conf: np.ndarray
    region_ref: np.ndarray
    meta: dict


def write_case(root, case: Case) -> Path:
    d = Path(root) / case.case_id
    atomic_write(d / "gt.json", dumps_graph(case.gt))
    atomic_write(d / "initial.json", dumps_graph(case.initial))
    write_raster(d / "corner.pgm", case.corner_conf, "confidence")
    write_raster(d / "edge.pgm", case.edge_conf, "confidence")
    write_raster(d / "region.pgm", case.region_ref, "binary")
    write_json(d / "meta.json", case.meta)
    return d


def read_case(path) -> Case:
    d = Path(path)
    return Case(
        case_id=d.name,
        gt=read_graph(d / "gt.json"),
        initial=read_graph(d / "initial.json"),
        corner_conf=read_raster(d / "corner.pgm", "confidence"),
        edge_conf=read_raster(d / "edge.pgm", "confidence"),
        region_ref=read_raster(d / "region.pgm", "binary"),
        meta=read_json(d / "meta.json"),
    )


def list_cases(root) -> list[Path]:
    root = Path(root)
    if not root.is_dir():
        raise DataError(f"{root}: not a corpus directory")
    cases = sorted(p for p in root.iterdir() if p.is_dir() and (p / "gt.json").exists())
    if not cases:
        raise DataError(f"{root}: no cases found")
    return cases
