"""Correct/incorrect labels for junctions and edges against ground truth,
the per-pixel training targets they induce, and the Huber training loss."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import BuildingGraph, DimensionMismatch, corner_stamp, direction, junctions, paint, _edge_stamp_of

MATCH_TOLERANCE = 7.0
ANGLE_TOLERANCE = 10.0


@dataclass(frozen=True)
class MatchResult:
    pairs: dict[int, int]  # pred corner id -> gt corner id
    distances: dict[int, float]  # pred corner id -> matched distance

    def __len__(self):
        return len(self.pairs)


@dataclass(frozen=True)
class LabelSet:
    junctions: dict[int, bool]  # corner id -> correct
    edges: dict[tuple[int, int], bool]

    def all_correct(self) -> bool:
        return all(self.junctions.values()) and all(self.edges.values())


def _angle_gap(a: float, b: float) -> float:
    d = abs(a - b) % 360.0
    return min(d, 360.0 - d)


def directions_agree(pred: tuple[float, ...], gt: tuple[float, ...], tol: float = ANGLE_TOLERANCE) -> bool:
    """Equal counts, and a greedy nearest-first circular pairing keeps every
    pair within ``tol`` degrees."""
    if len(pred) != len(gt):
        return False
    pairs = sorted((_angle_gap(p, g), i, j) for i, p in enumerate(pred) for j, g in enumerate(gt))
    used_p, used_g = set(), set()
    for gap, i, j in pairs:
        if gap > tol:
            break
        if i in used_p or j in used_g:
            continue
        used_p.add(i)
        used_g.add(j)
    return len(used_p) == len(pred)


class GroundTruth:
    """Precomputed view of a ground-truth graph for repeated labeling."""

    def __init__(self, gt: BuildingGraph, match_tol: float = MATCH_TOLERANCE, angle_tol: float = ANGLE_TOLERANCE):
        self.graph = gt
        self.match_tol = match_tol
        self.angle_tol = angle_tol
        self.directions = {j.corner_id: j.directions for j in junctions(gt)}
        self._cell = match_tol if match_tol > 0 else 1.0
        self._grid: dict[tuple[int, int], list[tuple[int, float, float]]] = {}
        self._near_cache: dict = {}
        self._junction_cache: dict = {}
        for c in gt.corners:
            self._grid.setdefault(self._cell_of(c.x, c.y), []).append((c.id, c.x, c.y))

    def _cell_of(self, x: float, y: float) -> tuple[int, int]:
        return math.floor(x / self._cell), math.floor(y / self._cell)

    def _near(self, x: float, y: float) -> list[tuple[float, int]]:
        hit = self._near_cache.get((x, y))
        if hit is None:
            gx, gy = self._cell_of(x, y)
            hit = []
            for i in (gx - 1, gx, gx + 1):
                for j in (gy - 1, gy, gy + 1):
                    for gid, cx, cy in self._grid.get((i, j), ()):
                        d = math.hypot(x - cx, y - cy)
                        if d <= self.match_tol:
                            hit.append((d, gid))
            self._near_cache[(x, y)] = hit
        return hit

    def match(self, pred: BuildingGraph) -> MatchResult:
        cands = [(d, c.id, gid) for c in pred.corners for d, gid in self._near(c.x, c.y)]
        cands.sort()
        pairs, dists, taken = {}, {}, set()
        for d, pid, gid in cands:
            if pid in pairs or gid in taken:
                continue
            pairs[pid] = gid
            dists[pid] = d
            taken.add(gid)
        return MatchResult(pairs, dists)

    def _junction_ok(self, gid: int, p: tuple[float, float], nbrs: tuple) -> bool:
        memo_key = (gid, p, nbrs)
        ok = self._junction_cache.get(memo_key)
        if ok is None:
            dirs = tuple(sorted(direction(p, q) for q in nbrs))
            ok = self._junction_cache[memo_key] = directions_agree(dirs, self.directions[gid], self.angle_tol)
        return ok

    def label(self, pred: BuildingGraph, match: MatchResult | None = None) -> LabelSet:
        m = (match or self.match(pred)).pairs
        gt_adj = self.graph.adjacency
        pos = pred.positions
        adj = pred.adjacency
        jl = {}
        for c in pred.corners:
            g = m.get(c.id)
            nb = adj[c.id]
            if g is None or len(nb) != len(gt_adj[g]):
                jl[c.id] = False
            else:
                jl[c.id] = self._junction_ok(g, pos[c.id], tuple(sorted(pos[n] for n in nb)))
        gt_edges = self.graph.edges
        el = {}
        for a, b in pred.edges:
            ga, gb = m.get(a), m.get(b)
            el[(a, b)] = ga is not None and gb is not None and ((ga, gb) if ga < gb else (gb, ga)) in gt_edges
        return LabelSet(jl, el)


def match_corners(pred: BuildingGraph, gt: BuildingGraph, tol: float = MATCH_TOLERANCE) -> MatchResult:
    """Greedy one-to-one matching, globally closest pair first, within ``tol`` px.

    Ties are broken by (distance, pred id, gt id).
    """
    return GroundTruth(gt, match_tol=tol).match(pred)


def label_graph(pred: BuildingGraph, gt: BuildingGraph, match_tol: float = MATCH_TOLERANCE,
                angle_tol: float = ANGLE_TOLERANCE) -> LabelSet:
    """A junction is correct when its corner matches a GT corner of the same
    degree whose edge directions pair up within ``angle_tol`` degrees; an edge
    is correct when both endpoints match GT corners joined by a GT edge."""
    return GroundTruth(gt, match_tol, angle_tol).label(pred)


def pixel_targets(graph: BuildingGraph, labels: LabelSet, kind: str) -> np.ndarray:
    """+1 on correct primitives, -1 on incorrect ones (winning overlaps), 0 elsewhere."""
    width, height = graph.canvas
    pos_mask = np.zeros((height, width), dtype=bool)
    neg_mask = np.zeros((height, width), dtype=bool)
    if kind == "corners":
        items = [(corner_stamp(c.x, c.y), labels.junctions[c.id]) for c in graph.corners]
    elif kind == "edges":
        items = [(_edge_stamp_of(graph, e), labels.edges[e]) for e in graph.edges]
    else:
        raise ValueError(f"unknown raster kind {kind!r}")
    for stamp, ok in items:
        paint(pos_mask if ok else neg_mask, stamp, True)
    out = np.zeros((height, width), dtype=np.int8)
    out[pos_mask] = 1
    out[neg_mask] = -1
    return out


def _huber_terms(pred: np.ndarray, target: np.ndarray, delta: float):
    if pred.shape != target.shape:
        raise DimensionMismatch(f"{pred.shape} vs {target.shape}")
    r = np.asarray(pred, dtype=float) - np.asarray(target, dtype=float)
    w = np.where(target == 0, 0.5, 1.0)
    return r, w


def huber_loss(pred: np.ndarray, target: np.ndarray, delta: float = 1.0) -> float:
    """Weighted mean pixel Huber loss; background pixels carry half weight."""
    r, w = _huber_terms(pred, target, delta)
    a = np.abs(r)
    per_pixel = np.where(a <= delta, 0.5 * r * r, delta * (a - 0.5 * delta))
    return float(np.sum(w * per_pixel) / np.sum(w))


def huber_grad(pred: np.ndarray, target: np.ndarray, delta: float = 1.0) -> np.ndarray:
    """d huber_loss / d pred."""
    r, w = _huber_terms(pred, target, delta)
    return w * np.clip(r, -delta, delta) / np.sum(w)
