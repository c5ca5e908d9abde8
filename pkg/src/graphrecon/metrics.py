"""Corner, edge and region precision/recall/f1 against ground truth."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .geometry import BuildingGraph, CrossingEdges, extract_regions, polygon_crop, region_points
from .labeling import GroundTruth

LEVELS = ("corner", "edge", "region")
REGION_IOU = 0.7


class EmptyCorpus(ValueError):
    pass


@dataclass
class LevelStats:
    true_positives: int = 0
    predicted: int = 0
    actual: int = 0

    @property
    def precision(self) -> float:
        return self.true_positives / self.predicted if self.predicted else 0.0

    @property
    def recall(self) -> float:
        return self.true_positives / self.actual if self.actual else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r > 0 else 0.0

    def __add__(self, other: "LevelStats") -> "LevelStats":
        return LevelStats(self.true_positives + other.true_positives, self.predicted + other.predicted,
                          self.actual + other.actual)


@dataclass
class MetricReport:
    levels: dict[str, LevelStats] = field(default_factory=lambda: {k: LevelStats() for k in LEVELS})
    # set for macro averages, where rates are not recomputable from counts
    rates: dict[str, tuple[float, float, float]] | None = None

    def precision(self, level: str) -> float:
        return self.rates[level][0] if self.rates else self.levels[level].precision

    def recall(self, level: str) -> float:
        return self.rates[level][1] if self.rates else self.levels[level].recall

    def f1(self, level: str) -> float:
        return self.rates[level][2] if self.rates else self.levels[level].f1

    def to_dict(self) -> dict:
        out = {}
        for k in LEVELS:
            s = self.levels[k]
            out[k] = {"precision": self.precision(k), "recall": self.recall(k), "f1": self.f1(k),
                      "true_positives": s.true_positives, "predicted": s.predicted, "actual": s.actual}
        return out

    def to_text(self) -> str:
        lines = []
        for k, v in self.to_dict().items():
            for name, val in v.items():
                lines.append(f"{k}.{name}={val:.6f}" if isinstance(val, float) else f"{k}.{name}={val}")
        return "\n".join(lines) + "\n"


def region_masks(graph: BuildingGraph) -> list[tuple[tuple[int, int, int, int], np.ndarray]]:
    """(window, filled crop) per bounded face."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CrossingEdges)
        regions = extract_regions(graph)
    width, height = graph.canvas
    return [polygon_crop(region_points(graph, r), height, width) for r in regions]


def _crop_iou(a, b) -> float:
    (wa, ma), (wb, mb) = a, b
    r0, r1 = max(wa[0], wb[0]), min(wa[1], wb[1])
    c0, c1 = max(wa[2], wb[2]), min(wa[3], wb[3])
    inter = 0
    if r0 < r1 and c0 < c1:
        inter = int(np.count_nonzero(ma[r0 - wa[0]:r1 - wa[0], c0 - wa[2]:c1 - wa[2]]
                                     & mb[r0 - wb[0]:r1 - wb[0], c0 - wb[2]:c1 - wb[2]]))
    union = int(np.count_nonzero(ma)) + int(np.count_nonzero(mb)) - inter
    return inter / union if union else 0.0


def match_regions(pred: BuildingGraph, gt: BuildingGraph, iou_tol: float = REGION_IOU) -> list[tuple[int, int, float]]:
    """Injective pairs (pred index, gt index, IoU) taken by descending IoU, IoU >= tol."""
    pm, gm = region_masks(pred), region_masks(gt)
    cands = []
    for i, a in enumerate(pm):
        for j, b in enumerate(gm):
            iou = _crop_iou(a, b)
            if iou >= iou_tol:
                cands.append((-iou, i, j))
    cands.sort()
    used_p, used_g, out = set(), set(), []
    for neg, i, j in cands:
        if i in used_p or j in used_g:
            continue
        used_p.add(i)
        used_g.add(j)
        out.append((i, j, -neg))
    return out


def evaluate(pred: BuildingGraph, gt: BuildingGraph, corner_tol: float = 7.0,
             region_iou_tol: float = REGION_IOU) -> MetricReport:
    truth = GroundTruth(gt, match_tol=corner_tol)
    m = truth.match(pred).pairs
    edge_tp = 0
    for a, b in pred.edges:
        ga, gb = m.get(a), m.get(b)
        if ga is not None and gb is not None and ((ga, gb) if ga < gb else (gb, ga)) in gt.edges:
            edge_tp += 1
    n_pred_regions = len(region_masks(pred))
    n_gt_regions = len(region_masks(gt))
    region_tp = len(match_regions(pred, gt, region_iou_tol))
    return MetricReport({
        "corner": LevelStats(len(m), len(pred.corners), len(gt.corners)),
        "edge": LevelStats(edge_tp, len(pred.edges), len(gt.edges)),
        "region": LevelStats(region_tp, n_pred_regions, n_gt_regions),
    })


def evaluate_corpus(pairs: Sequence[tuple[BuildingGraph, BuildingGraph]], average: str = "micro",
                    **kwargs) -> MetricReport:
    """Micro average sums counts over the corpus; macro averages per-pair rates."""
    if not pairs:
        raise EmptyCorpus("no (pred, gt) pairs")
    reports = [evaluate(p, g, **kwargs) for p, g in pairs]
    return aggregate(reports, average)


def aggregate(reports: Sequence[MetricReport], average: str = "micro") -> MetricReport:
    if not reports:
        raise EmptyCorpus("no reports")
    summed = {k: sum((r.levels[k] for r in reports), LevelStats()) for k in LEVELS}
    if average == "micro":
        return MetricReport(summed)
    if average != "macro":
        raise ValueError(f"unknown average {average!r}")
    rates = {k: tuple(float(np.mean([getattr(r, name)(k) for r in reports]))
                      for name in ("precision", "recall", "f1")) for k in LEVELS}
    return MetricReport(summed, rates)
