"""Graph scores: weighted sums of junction, edge and region scores.

    total = w_j * sum(junction scores) + w_e * sum(edge scores) + w_r * region

Junction and edge scores live in [-1, 1], the region score in [0, 1].
Scorers differ only in where the per-primitive scores come from.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from .geometry import BuildingGraph, DimensionMismatch, RegionReference, _edge_stamp_of, enclosed_mask
from .labeling import GroundTruth, LabelSet


@dataclass(frozen=True)
class Weights:
    w_j: float = 1.0
    w_e: float = 2.0
    w_r: float = 50.0

    def __post_init__(self):
        for name in ("w_j", "w_e", "w_r"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {v}")

    def scaled(self, factor: float) -> "Weights":
        return Weights(self.w_j * factor, self.w_e * factor, self.w_r * factor)

    def as_tuple(self) -> tuple[float, float, float]:
        return self.w_j, self.w_e, self.w_r


PER_EDGE_WEIGHTS = Weights(1.0, 2.0, 50.0)  # also Conv-MPN initializations
SCRATCH_WEIGHTS = Weights(1.0, 1.0, 50.0)
PROFILES = {"default": PER_EDGE_WEIGHTS, "per-edge": PER_EDGE_WEIGHTS, "conv-mpn": PER_EDGE_WEIGHTS,
            "nauata": SCRATCH_WEIGHTS, "scratch": SCRATCH_WEIGHTS}


@dataclass(frozen=True)
class ScoreBreakdown:
    junctions: dict[int, float]
    edges: dict[tuple[int, int], float]
    region: float
    total: float

    def junction_sum(self) -> float:
        return math.fsum(self.junctions[k] for k in sorted(self.junctions))

    def edge_sum(self) -> float:
        return math.fsum(self.edges[k] for k in sorted(self.edges))

    def to_dict(self) -> dict:
        return {
            "junctions": {str(k): v for k, v in sorted(self.junctions.items())},
            "edges": {f"{a}-{b}": v for (a, b), v in sorted(self.edges.items())},
            "region": self.region,
            "total": self.total,
        }


def combine(junction_sum: float, edge_sum: float, region: float, weights: Weights) -> float:
    return weights.w_j * junction_sum + weights.w_e * edge_sum + weights.w_r * region


def total(breakdown: ScoreBreakdown, weights: Weights) -> float:
    return combine(breakdown.junction_sum(), breakdown.edge_sum(), breakdown.region, weights)


def make_breakdown(junctions: dict, edges: dict, region: float, weights: Weights) -> ScoreBreakdown:
    partial = ScoreBreakdown(junctions, edges, region, 0.0)
    return ScoreBreakdown(junctions, edges, region, total(partial, weights))


def _relabel(b: ScoreBreakdown, ids: dict[int, int]) -> ScoreBreakdown:
    """The same breakdown for a key-equal graph whose corners carry other ids."""
    edges = {}
    for (u, v), val in b.edges.items():
        a, c = ids[u], ids[v]
        edges[(a, c) if a < c else (c, a)] = val
    return ScoreBreakdown({ids[k]: v for k, v in b.junctions.items()}, edges, b.region, b.total)


class Scorer(Protocol):
    weights: Weights

    def score(self, graph: BuildingGraph) -> ScoreBreakdown: ...


class _Memo:
    """Per-instance memo keyed by canonical key; values cannot differ from a
    fresh evaluation, so it never affects results."""

    def __init__(self):
        self._memo: dict = {}
        self.evaluations = 0

    def score(self, graph: BuildingGraph) -> ScoreBreakdown:
        k = graph.key
        hit = self._memo.get(k)
        if hit is None:
            self.evaluations += 1
            hit = self._memo[k] = (graph.canonical_ids, self._score(graph))
        ids, breakdown = hit
        if ids != graph.canonical_ids:
            breakdown = _relabel(breakdown, dict(zip(ids, graph.canonical_ids)))
        return breakdown

    def _score(self, graph: BuildingGraph) -> ScoreBreakdown:
        raise NotImplementedError


class OracleScorer(_Memo):
    """Ground-truth labels used directly as scores: +1 correct, -1 incorrect,
    plus the IoU of the enclosed areas of graph and ground truth."""

    def __init__(self, gt: BuildingGraph, weights: Weights = PER_EDGE_WEIGHTS):
        super().__init__()
        self.weights = weights
        self.truth = GroundTruth(gt)
        self.region_ref = RegionReference(enclosed_mask(gt))

    def labels(self, graph: BuildingGraph) -> LabelSet:
        return self.truth.label(graph)

    def _score(self, graph):
        labels = self.truth.label(graph)
        j = {k: 1.0 if ok else -1.0 for k, ok in labels.junctions.items()}
        e = {k: 1.0 if ok else -1.0 for k, ok in labels.edges.items()}
        return make_breakdown(j, e, self.region_ref.iou(graph), self.weights)


def oracle_score(graph: BuildingGraph, gt: BuildingGraph, weights: Weights = PER_EDGE_WEIGHTS) -> ScoreBreakdown:
    return OracleScorer(gt, weights).score(graph)


def _check_raster(r: np.ndarray, graph: BuildingGraph, name: str) -> None:
    if r.shape != (graph.canvas[1], graph.canvas[0]):
        raise DimensionMismatch(f"{name} is {r.shape[1]}x{r.shape[0]}, canvas is {graph.canvas[0]}x{graph.canvas[1]}")


class PoolingScorer(_Memo):
    """Pools per-pixel scores over each primitive.

    A junction takes the value at the pixel containing its corner; an edge
    averages over its rasterized band.  Pooled values pass through
    ``scale * v + offset`` before entering the total.
    """

    scale = 1.0
    offset = 0.0

    def __init__(self, corner_map: np.ndarray, edge_map: np.ndarray, region_ref: np.ndarray,
                 weights: Weights = PER_EDGE_WEIGHTS):
        super().__init__()
        if corner_map.shape != edge_map.shape or corner_map.shape != region_ref.shape:
            raise DimensionMismatch(f"{corner_map.shape}, {edge_map.shape}, {region_ref.shape}")
        self.corner_map = np.asarray(corner_map, dtype=float)
        self.edge_map = np.asarray(edge_map, dtype=float)
        self.region_ref = RegionReference(region_ref)
        self.weights = weights
        self._edge_pool: dict = {}  # segment endpoints -> pooled mean

    def _pool_edge(self, graph: BuildingGraph, e: tuple[int, int]) -> float:
        pos = graph.positions
        seg = (pos[e[0]], pos[e[1]])
        hit = self._edge_pool.get(seg)
        if hit is None:
            hit = self._edge_pool[seg] = self._pool_segment(graph, e)
        return hit

    def _pool_segment(self, graph: BuildingGraph, e: tuple[int, int]) -> float:
        height, width = self.edge_map.shape
        r0, c0, mask = _edge_stamp_of(graph, e)
        rr0, cc0 = max(r0, 0), max(c0, 0)
        rr1, cc1 = min(r0 + mask.shape[0], height), min(c0 + mask.shape[1], width)
        sub = mask[rr0 - r0:rr1 - r0, cc0 - c0:cc1 - c0]
        vals = self.edge_map[rr0:rr1, cc0:cc1][sub]
        return float(vals.mean()) if vals.size else 0.0

    def _score(self, graph):
        _check_raster(self.corner_map, graph, "corner map")
        a, b = self.scale, self.offset
        j = {c.id: a * float(self.corner_map[math.floor(c.y), math.floor(c.x)]) + b for c in graph.corners}
        e = {k: a * self._pool_edge(graph, k) + b for k in graph.edges}
        return make_breakdown(j, e, self.region_ref.iou(graph), self.weights)


class ConfidenceScorer(PoolingScorer):
    """Pools corner/edge confidence images in [0, 1], mapped by 2c - 1."""

    scale = 2.0
    offset = -1.0


class RasterScorer(PoolingScorer):
    """Pools precomputed pixel-wise classification scores already in [-1, 1]."""


def confidence_score(graph: BuildingGraph, corner_conf: np.ndarray, edge_conf: np.ndarray, region_ref: np.ndarray,
                     weights: Weights = PER_EDGE_WEIGHTS) -> ScoreBreakdown:
    return ConfidenceScorer(corner_conf, edge_conf, region_ref, weights).score(graph)

