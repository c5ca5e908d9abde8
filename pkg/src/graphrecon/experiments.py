"""Desk-scale experiments on seeded synthetic corpora.

Each function returns plain per-case rows so that tests, scripts and the CLI
can aggregate them however they like.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from . import rng as rngmod
from .geometry import BuildingGraph
from .metrics import evaluate
from .scoring import SCRATCH_WEIGHTS, ConfidenceScorer, OracleScorer, Weights
from .search import SearchConfig, SearchResult, explore_training, run_search
from .synth import CorruptionSpec, SynthCase, SynthParams, corrupt, synth


@dataclass
class CorpusCase:
    case_id: str
    seed: int
    synth: SynthCase
    params: SynthParams


def rectangle_count(seed: int) -> int:
    return 1 + int(rngmod.stream(seed, "rectangle-count").integers(4))


def make_corpus(n: int, seed: int = 0, blur: int = 2, flip: float = 0.05) -> list[CorpusCase]:
    """``n`` buildings with 1-4 rectangles each; case i uses seed ``seed + i``."""
    cases = []
    for i in range(n):
        s = seed + i
        params = SynthParams(rectangles=rectangle_count(s), seed=s, blur=blur, flip=flip)
        cases.append(CorpusCase(f"case-{i:04d}", s, synth(params), params))
    return cases


def make_scorer(kind: str, case: SynthCase, weights: Weights):
    if kind == "oracle":
        return OracleScorer(case.gt, weights)
    if kind == "confidence":
        return ConfidenceScorer(case.corner_conf, case.edge_conf, case.region_ref, weights)
    raise ValueError(f"unknown scorer {kind!r}")


def trace_is_monotone(result: SearchResult) -> bool:
    totals = [r.best_total for r in result.trace]
    return all(b >= a for a, b in zip(totals, totals[1:]))


@dataclass
class RecoveryRow:
    case_id: str
    k: int
    recovered: bool
    edge_f1_before: float
    edge_f1_after: float
    monotone: bool
    evaluations: int
    seconds: float
    result: Optional[BuildingGraph] = None


def corrupted(case: CorpusCase, k: int) -> BuildingGraph:
    initial, _ = corrupt(case.synth.gt, CorruptionSpec(k=k, seed=case.seed * 10 + k))
    return initial


def recovery(cases: Iterable[CorpusCase], ks=(1, 2, 3), scorer: str = "oracle",
             config: Optional[SearchConfig] = None, weights: Weights = SCRATCH_WEIGHTS,
             keep_graphs: bool = False) -> list[RecoveryRow]:
    """Corrupt each case with k edits, search, and compare with ground truth."""
    config = config or SearchConfig(width=5, depth=12, weights=weights)
    rows = []
    for case in cases:
        gt = case.synth.gt
        for k in ks:
            initial = corrupted(case, k)
            t0 = time.perf_counter()
            result = run_search(initial, make_scorer(scorer, case.synth, weights), config)
            dt = time.perf_counter() - t0
            rows.append(RecoveryRow(
                case.case_id, k, result.graph == gt,
                evaluate(initial, gt).f1("edge"), evaluate(result.graph, gt).f1("edge"),
                trace_is_monotone(result), result.evaluations, dt,
                result.graph if keep_graphs else None))
    return rows


def augmentation_gap(cases: Iterable[CorpusCase], k: int = 2, weights: Weights = SCRATCH_WEIGHTS,
                     seed: int = 0) -> list[tuple[str, float, float]]:
    """(case id, mean oracle total of kept samples in scored mode, same for random mode)."""
    out = []
    for case in cases:
        gt = case.synth.gt
        initial = corrupted(case, k)
        means = []
        for mode in ("scored", "random"):
            scorer = OracleScorer(gt, weights)
            samples = explore_training(initial, gt, scorer, mode=mode, seed=seed + case.seed)
            means.append(float(np.mean([scorer.score(g).total for g, _ in samples])) if samples else float("nan"))
        out.append((case.case_id, means[0], means[1]))
    return out


def bootstrap_mean_ci(diffs, n_boot: int = 10000, level: float = 0.95, seed: int = 0) -> tuple[float, float]:
    """Percentile bootstrap interval for the mean of ``diffs``."""
    diffs = np.asarray(diffs, dtype=float)
    gen = rngmod.stream(seed, "bootstrap")
    idx = gen.integers(0, len(diffs), size=(n_boot, len(diffs)))
    means = diffs[idx].mean(axis=1)
    alpha = (1.0 - level) / 2.0
    return float(np.quantile(means, alpha)), float(np.quantile(means, 1.0 - alpha))
