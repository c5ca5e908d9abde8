"""The six heuristic graph edits used for exploration.

Three add primitives (edge between corners, orthogonal edge onto another
edge, parallelogram completion) and three remove them (edge, corner with
its edges, degree-2 corner replaced by an edge between its neighbours).
Actions never move existing corners.  A corner an action would create within
``SNAP_RADIUS`` of an existing corner is replaced by that corner.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .geometry import BuildingGraph, Corner

ACTION_TYPES = ("add_edge", "add_orthogonal", "add_parallelogram", "remove_edge", "remove_corner", "dissolve")
ADDITION_TYPES = ACTION_TYPES[:3]
SNAP_RADIUS = 3.0
_COLINEAR_EPS = 1e-9


class InvalidAction(ValueError):
    pass


class Action(NamedTuple):
    """One edit.  ``params`` are corner ids of the source graph:

    add_edge (a, b) | add_orthogonal (corner, p, q) onto edge (p, q)
    add_parallelogram (a, b, c) on edges (a, b), (a, c)
    remove_edge (a, b) | remove_corner (c,) | dissolve (c,)
    """

    kind: str
    params: tuple[int, ...]

    def sort_key(self):
        return ACTION_TYPES.index(self.kind), self.params

    def __str__(self):
        return f"{self.kind}{self.params}"


def _pair(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


def add_edge(a: int, b: int) -> Action:
    return Action("add_edge", _pair(a, b))


def add_orthogonal(corner: int, edge: tuple[int, int]) -> Action:
    return Action("add_orthogonal", (corner, *_pair(*edge)))


def add_parallelogram(corner: int, b: int, c: int) -> Action:
    return Action("add_parallelogram", (corner, *_pair(b, c)))


def remove_edge(a: int, b: int) -> Action:
    return Action("remove_edge", _pair(a, b))


def remove_corner(c: int) -> Action:
    return Action("remove_corner", (c,))


def dissolve(c: int) -> Action:
    return Action("dissolve", (c,))


# ------------------------------------------------------------------- apply

class _Draft:
    """Mutable working copy used while applying one action."""

    def __init__(self, graph: BuildingGraph):
        self.graph = graph
        self.pos = dict(graph.positions)
        self.adj = {k: set(v) for k, v in graph.adjacency.items()}
        self.edges = set(graph.edges)
        self.new_corner = None

    def overlaps(self, a: int, b: int) -> bool:
        # would edge a-b run along an edge already incident to a or b?
        for s, t in ((a, b), (b, a)):
            sx, sy = self.pos[s]
            tx, ty = self.pos[t][0] - sx, self.pos[t][1] - sy
            for n in self.adj[s]:
                nx, ny = self.pos[n][0] - sx, self.pos[n][1] - sy
                cross = tx * ny - ty * nx
                if abs(cross) <= _COLINEAR_EPS * math.hypot(tx, ty) * math.hypot(nx, ny) and tx * nx + ty * ny > 0:
                    return True
        return False

    def connect(self, a: int, b: int) -> None:
        if a == b:
            raise InvalidAction(f"self-loop at {a}")
        e = _pair(a, b)
        if e in self.edges:
            raise InvalidAction(f"edge {e} already present")
        if self.overlaps(a, b):
            raise InvalidAction(f"edge {e} overlaps an existing edge")
        self.edges.add(e)
        self.adj[a].add(b)
        self.adj[b].add(a)

    def disconnect(self, a: int, b: int) -> None:
        self.edges.discard(_pair(a, b))
        self.adj[a].discard(b)
        self.adj[b].discard(a)

    def drop_corner(self, c: int) -> None:
        for n in list(self.adj[c]):
            self.disconnect(c, n)
        del self.adj[c]
        del self.pos[c]

    def corner_at(self, x: float, y: float) -> int:
        """Existing corner within the snap radius of (x, y), else a new one."""
        best, best_d = None, SNAP_RADIUS
        for cid, (cx, cy) in self.pos.items():
            d = math.hypot(cx - x, cy - y)
            if d <= best_d and (best is None or d < best_d or cid < best):
                best, best_d = cid, d
        if best is not None:
            return best
        width, height = self.graph.canvas
        if not (0.0 <= x < width and 0.0 <= y < height):
            raise InvalidAction(f"new corner ({x:.3f}, {y:.3f}) outside canvas")
        cid = self.graph.next_id()
        self.pos[cid] = (x, y)
        self.adj[cid] = set()
        self.new_corner = cid
        return cid

    def build(self) -> BuildingGraph:
        g = self.graph
        if len(self.pos) == len(g.corners) and self.new_corner is None:
            corners = g.corners
        else:
            corners = tuple(Corner(cid, *self.pos[cid]) for cid in sorted(self.pos))
        out = BuildingGraph._trusted(corners, frozenset(self.edges), g.canvas)
        if corners is g.corners:
            out.__dict__["positions"] = g.positions
        return out


def _require_corner(graph: BuildingGraph, *ids: int) -> None:
    for c in ids:
        if c not in graph.adjacency:
            raise InvalidAction(f"no corner {c}")


def _require_edge(graph: BuildingGraph, a: int, b: int) -> None:
    if _pair(a, b) not in graph.edges:
        raise InvalidAction(f"no edge {_pair(a, b)}")


def _apply_add_edge(graph, a, b):
    _require_corner(graph, a, b)
    d = _Draft(graph)
    d.connect(a, b)
    return d.build()


def _apply_add_orthogonal(graph, c, p, q):
    _require_corner(graph, c)
    _require_edge(graph, p, q)
    if c in (p, q):
        raise InvalidAction("corner lies on the target edge")
    pos = graph.positions
    (cx, cy), (px, py), (qx, qy) = pos[c], pos[p], pos[q]
    dx, dy = qx - px, qy - py
    t = ((cx - px) * dx + (cy - py) * dy) / (dx * dx + dy * dy)
    fx, fy = px + t * dx, py + t * dy
    if math.hypot(cx - fx, cy - fy) <= SNAP_RADIUS:
        raise InvalidAction("corner already on the edge line")
    d = _Draft(graph)
    foot = d.corner_at(fx, fy)
    if foot == c:
        raise InvalidAction("corner already on the edge line")
    if foot == d.new_corner:
        if 0.0 < t < 1.0:
            d.disconnect(p, q)
            d.connect(p, foot)
            d.connect(foot, q)
        else:
            d.connect(p if t <= 0.0 else q, foot)
        d.connect(c, foot)
    else:
        d.connect(c, foot)
        if not 0.0 < t < 1.0 and foot not in (p, q):
            # extend the edge to meet an existing corner
            end = p if t <= 0.0 else q
            if _pair(end, foot) not in d.edges:
                d.connect(end, foot)
    return d.build()


def _apply_add_parallelogram(graph, a, b, c):
    _require_edge(graph, a, b)
    _require_edge(graph, a, c)
    if b == c:
        raise InvalidAction("parallelogram needs two distinct edges")
    d = _Draft(graph)
    (ax, ay), (bx, by), (cx, cy) = d.pos[a], d.pos[b], d.pos[c]
    far = d.corner_at(bx + cx - ax, by + cy - ay)
    d.connect(b, far)
    d.connect(c, far)
    return d.build()


def _apply_remove_edge(graph, a, b):
    _require_edge(graph, a, b)
    return BuildingGraph._trusted(graph.corners, graph.edges - {_pair(a, b)}, graph.canvas)


def _apply_remove_corner(graph, c):
    _require_corner(graph, c)
    d = _Draft(graph)
    d.drop_corner(c)
    return d.build()


def _apply_dissolve(graph, c):
    _require_corner(graph, c)
    nbrs = graph.adjacency[c]
    if len(nbrs) != 2:
        raise InvalidAction(f"corner {c} has degree {len(nbrs)}, not 2")
    d = _Draft(graph)
    d.drop_corner(c)
    if _pair(*nbrs) not in d.edges:
        d.connect(*nbrs)
    return d.build()


_APPLY = {
    "add_edge": _apply_add_edge,
    "add_orthogonal": _apply_add_orthogonal,
    "add_parallelogram": _apply_add_parallelogram,
    "remove_edge": _apply_remove_edge,
    "remove_corner": _apply_remove_corner,
    "dissolve": _apply_dissolve,
}


def apply(graph: BuildingGraph, action: Action) -> BuildingGraph:
    """Return the edited graph; ``graph`` itself is never modified.

    Raises InvalidAction when the parameters are stale or the result would
    break a graph invariant.
    """
    try:
        fn = _APPLY[action.kind]
    except KeyError:
        raise InvalidAction(f"unknown action kind {action.kind!r}") from None
    return fn(graph, *action.params)


# --------------------------------------------------------------- enumerate

def candidate_actions(graph: BuildingGraph, addition_only: bool = False) -> list[Action]:
    """Every parameterization of every type, valid or not, in canonical order."""
    ids = [c.id for c in graph.corners]
    edges = graph.sorted_edges()
    adj = graph.adjacency
    out = [Action("add_edge", (a, b)) for i, a in enumerate(ids) for b in ids[i + 1:]
           if (a, b) not in graph.edges]
    out += [Action("add_orthogonal", (c, p, q)) for c in ids for p, q in edges if c != p and c != q]
    out += [Action("add_parallelogram", (a, b, c)) for a in ids
            for i, b in enumerate(adj[a]) for c in adj[a][i + 1:]]
    if not addition_only:
        out += [Action("remove_edge", e) for e in edges]
        out += [Action("remove_corner", (c,)) for c in ids]
        out += [Action("dissolve", (c,)) for c in ids if len(adj[c]) == 2]
    return out


def expand(graph: BuildingGraph, addition_only: bool = False) -> list[tuple[Action, BuildingGraph]]:
    """(action, result) for every action that applies cleanly."""
    out = []
    for action in candidate_actions(graph, addition_only):
        try:
            out.append((action, apply(graph, action)))
        except InvalidAction:
            pass
    return out


def enumerate_actions(graph: BuildingGraph, addition_only: bool = False) -> list[Action]:
    return [a for a, _ in expand(graph, addition_only)]


def sample_per_type(graph: BuildingGraph, rng: np.random.Generator) -> list[Action]:
    """One uniformly chosen applicable action of each type that has any."""
    by_type: dict[str, list[Action]] = {}
    for a in enumerate_actions(graph):
        by_type.setdefault(a.kind, []).append(a)
    picked = []
    for kind in ACTION_TYPES:
        options = by_type.get(kind)
        if options:
            picked.append(options[int(rng.integers(len(options)))])
    return picked
