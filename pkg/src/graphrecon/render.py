"""SVG rendering of building graphs with optional correctness coloring."""

from __future__ import annotations

from typing import Optional, Union

from .geometry import BuildingGraph
from .labeling import LabelSet
from .scoring import ScoreBreakdown

CORRECT = "#2ca02c"
INCORRECT = "#d62728"
NEUTRAL = "#1f3b73"


def _verdicts(overlay):
    if overlay is None:
        return {}, {}
    if isinstance(overlay, LabelSet):
        return dict(overlay.junctions), dict(overlay.edges)
    return ({k: v >= 0 for k, v in overlay.junctions.items()}, {k: v >= 0 for k, v in overlay.edges.items()})


def _color(ok: Optional[bool]) -> str:
    if ok is None:
        return NEUTRAL
    return CORRECT if ok else INCORRECT


def render_svg(graph: BuildingGraph, overlay: Union[LabelSet, ScoreBreakdown, None] = None) -> str:
    """Edges as <line>, corners as <circle>; colored green/red by label or score sign."""
    width, height = graph.canvas
    junc_ok, edge_ok = _verdicts(overlay)
    pos = graph.positions
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
    ]
    for a, b in graph.sorted_edges():
        (x1, y1), (x2, y2) = pos[a], pos[b]
        out.append(f'<line x1="{x1:.4f}" y1="{y1:.4f}" x2="{x2:.4f}" y2="{y2:.4f}" '
                   f'stroke="{_color(edge_ok.get((a, b)))}" stroke-width="2"/>')
    for c in graph.corners:
        out.append(f'<circle cx="{c.x:.4f}" cy="{c.y:.4f}" r="3" fill="{_color(junc_ok.get(c.id))}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
