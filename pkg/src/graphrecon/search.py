"""Exploration: expand graphs by every heuristic action, score, subsample.

Test time keeps a small population (beam, SMC or greedy) and returns the
best graph ever scored.  Training time samples one action per type and
keeps two offspring per iteration as labeled training samples.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Iterator

import numpy as np

from . import rng as rngmod
from .actions import apply, expand, sample_per_type
from .geometry import BuildingGraph
from .labeling import LabelSet, label_graph
from .scoring import PER_EDGE_WEIGHTS, ScoreBreakdown, Scorer, Weights

STRATEGIES = ("beam", "smc", "greedy")


@dataclass
class SearchConfig:
    strategy: str = "beam"
    width: int = 5
    depth: int = 12
    addition_only_prefix: int = 0
    temperature: float = 1.0
    seed: int = 0
    weights: Weights = field(default_factory=lambda: PER_EDGE_WEIGHTS)

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.width < 1:
            raise ValueError("width must be >= 1")
        if self.depth < 0:
            raise ValueError("depth must be >= 0")
        if not (math.isfinite(self.temperature) and self.temperature > 0):
            raise ValueError("temperature must be finite and > 0")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["weights"] = list(self.weights.as_tuple())
        return d


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    population: tuple[str, ...]  # graph digests
    best_total: float

    def to_json(self) -> str:
        return json.dumps({"iteration": self.iteration, "population": list(self.population),
                           "best_total": self.best_total})


@dataclass
class SearchResult:
    graph: BuildingGraph
    breakdown: ScoreBreakdown
    trace: list[TraceRecord]
    evaluations: int

    @property
    def total(self) -> float:
        return self.breakdown.total

    def trace_lines(self) -> list[str]:
        return [r.to_json() for r in self.trace]


def _rank_key(item: tuple[BuildingGraph, ScoreBreakdown]):
    g, s = item
    return -s.total, g.key


class _Tracker:
    """Scores offspring and keeps the global best (ties: smaller canonical key)."""

    def __init__(self, scorer: Scorer, initial: BuildingGraph):
        self.scorer = scorer
        self.evaluations = 0
        self.best = None
        self.consider([initial])

    def consider(self, graphs: list[BuildingGraph]) -> list[tuple[BuildingGraph, ScoreBreakdown]]:
        scored = []
        for g in graphs:
            s = self.scorer.score(g)
            self.evaluations += 1
            scored.append((g, s))
            if self.best is None or _rank_key((g, s)) < _rank_key(self.best):
                self.best = (g, s)
        return scored

    def result(self, trace: list[TraceRecord]) -> SearchResult:
        return SearchResult(self.best[0], self.best[1], trace, self.evaluations)


def offspring(population: list[BuildingGraph], addition_only: bool) -> list[BuildingGraph]:
    """Deduplicated children of every population member, in canonical-key order."""
    seen: dict[tuple, BuildingGraph] = {}
    for g in population:
        for _, child in expand(g, addition_only):
            seen.setdefault(child.key, child)
    return [seen[k] for k in sorted(seen)]


def _run(initial: BuildingGraph, scorer: Scorer, config: SearchConfig, select) -> SearchResult:
    tracker = _Tracker(scorer, initial)
    population = [initial]
    trace = [TraceRecord(0, (initial.digest,), tracker.best[1].total)]
    for it in range(config.depth):
        children = offspring(population, addition_only=it < config.addition_only_prefix)
        if not children:
            break
        scored = tracker.consider(children)
        population = select(scored, it)
        trace.append(TraceRecord(it + 1, tuple(g.digest for g in population), tracker.best[1].total))
    return tracker.result(trace)


def beam_search(initial: BuildingGraph, scorer: Scorer, config: SearchConfig) -> SearchResult:
    """Keep the top ``width`` offspring per iteration; return the best graph seen."""
    width = config.width

    def select(scored, _it):
        return [g for g, _ in sorted(scored, key=_rank_key)[:width]]

    return _run(initial, scorer, config, select)


def greedy_search(initial: BuildingGraph, scorer: Scorer, config: SearchConfig) -> SearchResult:
    cfg = SearchConfig(**{**config.__dict__, "width": 1, "strategy": "greedy"})
    return beam_search(initial, scorer, cfg)


def smc_search(initial: BuildingGraph, scorer: Scorer, config: SearchConfig) -> SearchResult:
    """Resample ``width`` offspring with probability proportional to
    exp(total / temperature), then drop duplicates."""
    temp = config.temperature

    def select(scored, it):
        gen = rngmod.stream(config.seed, "smc", it)
        totals = np.array([s.total for _, s in scored], dtype=float)
        logits = (totals - totals.max()) / temp
        probs = np.exp(logits)
        probs /= probs.sum()
        picks = gen.choice(len(scored), size=config.width, replace=True, p=probs)
        return [scored[i][0] for i in sorted(set(int(i) for i in picks))]

    return _run(initial, scorer, config, select)


def run_search(initial: BuildingGraph, scorer: Scorer, config: SearchConfig) -> SearchResult:
    return {"beam": beam_search, "smc": smc_search, "greedy": greedy_search}[config.strategy](initial, scorer, config)


# ------------------------------------------------------------ training time

TRAIN_ITERATIONS = 5
TRAIN_KEEP = 2
EPSILON = 0.2


def iter_explore_training(initial: BuildingGraph, gt: BuildingGraph, scorer: Scorer, mode: str = "scored",
                          seed: int = 0, iterations: int = TRAIN_ITERATIONS,
                          epsilon: float = EPSILON) -> Iterator[tuple[BuildingGraph, LabelSet]]:
    """Yield labeled training samples as they are produced (two per iteration)."""
    if mode not in ("scored", "random"):
        raise ValueError(f"unknown mode {mode!r}")
    population = [initial]
    for it in range(iterations):
        seen: dict[tuple, BuildingGraph] = {}
        for idx, g in enumerate(population):
            for action in sample_per_type(g, rngmod.stream(seed, "explore-actions", it * 16 + idx)):
                child = apply(g, action)
                seen.setdefault(child.key, child)
        children = [seen[k] for k in sorted(seen)]
        if not children:
            return
        gen = rngmod.stream(seed, "explore-keep", it)
        if mode == "scored":
            ranked = sorted(((c, scorer.score(c)) for c in children), key=_rank_key)
            kept = [g for g, _ in ranked[:TRAIN_KEEP]]
            if len(kept) == TRAIN_KEEP and gen.random() < epsilon:
                kept[1] = children[int(gen.integers(len(children)))]
        else:
            picks = gen.choice(len(children), size=min(TRAIN_KEEP, len(children)), replace=False)
            kept = [children[int(i)] for i in picks]
        for g in kept:
            yield g, label_graph(g, gt)
        population = kept


def explore_training(initial: BuildingGraph, gt: BuildingGraph, scorer: Scorer, mode: str = "scored",
                     seed: int = 0, **kwargs) -> list[tuple[BuildingGraph, LabelSet]]:
    return list(iter_explore_training(initial, gt, scorer, mode, seed, **kwargs))
