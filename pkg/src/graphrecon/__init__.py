"""Explore-and-classify refinement of planar building graphs."""

from .actions import Action, InvalidAction, apply, enumerate_actions, expand, sample_per_type
from .geometry import (BuildingGraph, Corner, CrossingEdges, DimensionMismatch, GraphError, Junction, Region,
                       enclosed_mask, extract_regions, junctions, mask_iou, rasterize)
from .labeling import LabelSet, MatchResult, huber_loss, label_graph, match_corners, pixel_targets
from .scoring import (PER_EDGE_WEIGHTS, SCRATCH_WEIGHTS, ConfidenceScorer, OracleScorer, RasterScorer,
                      ScoreBreakdown, Weights, confidence_score, oracle_score, total)
from .search import (SearchConfig, SearchResult, beam_search, explore_training, greedy_search, run_search,
                     smc_search)

__all__ = [name for name in dir() if not name.startswith("_")]
