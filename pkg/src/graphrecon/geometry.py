"""Planar building graphs and the geometry derived from them.

Rasters are plain numpy arrays indexed ``[row, col]`` (``[y, x]``).  A pixel
``(col, row)`` is sampled at its center ``(col + 0.5, row + 0.5)``; corners
cover the centers within 1.5 px of the corner, edges the centers within
1.0 px of the segment.  No anti-aliasing, so rasters are bit-reproducible.
"""

from __future__ import annotations

import hashlib
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterable, NamedTuple, Optional, Sequence

import cv2
import numpy as np

DEFAULT_CANVAS = (256, 256)
KEY_SCALE = 16  # canonical coordinates are rounded to 1/16 px
CORNER_RADIUS = 1.5
EDGE_RADIUS = 1.0

Window = tuple[int, int, int, int]  # row0, row1, col0, col1 (half-open)


class GraphError(ValueError):
    """A graph violates its structural invariants."""


class DimensionMismatch(ValueError):
    pass


class CrossingEdges(UserWarning):
    """Two non-adjacent edges intersect; traced faces may overlap."""

    def __init__(self, pairs):
        self.pairs = list(pairs)
        super().__init__(f"{len(self.pairs)} crossing edge pair(s): {self.pairs[:4]}")


class Corner(NamedTuple):
    id: int
    x: float
    y: float


def _quantize(v: float) -> int:
    return math.floor(v * KEY_SCALE + 0.5)


_QPOINTS: dict[tuple[float, float], tuple[int, int]] = {}


def quantize_point(x: float, y: float) -> tuple[int, int]:
    q = _QPOINTS.get((x, y))
    if q is None:
        if len(_QPOINTS) > 1 << 18:
            _QPOINTS.clear()
        q = _QPOINTS[(x, y)] = (_quantize(x), _quantize(y))
    return q


@dataclass(frozen=True, eq=False)
class BuildingGraph:
    """Corners with continuous positions plus undirected straight edges.

    Equality and hashing go through :attr:`key`, so two graphs that differ
    only in corner ids compare equal.
    """

    corners: tuple[Corner, ...] = ()
    edges: frozenset = frozenset()
    canvas: tuple[int, int] = DEFAULT_CANVAS

    def __post_init__(self):
        width, height = (int(v) for v in self.canvas)
        if width <= 0 or height <= 0:
            raise GraphError(f"bad canvas {self.canvas}")
        corners = tuple(sorted((Corner(int(c[0]), float(c[1]), float(c[2])) for c in self.corners),
                               key=lambda c: c.id))
        ids = set()
        for c in corners:
            if c.id in ids:
                raise GraphError(f"duplicate corner id {c.id}")
            ids.add(c.id)
            if not (0.0 <= c.x < width and 0.0 <= c.y < height):
                raise GraphError(f"corner {c.id} at ({c.x}, {c.y}) outside canvas {width}x{height}")
        edges = set()
        for e in self.edges:
            a, b = (int(v) for v in e)
            if a == b:
                raise GraphError(f"self-loop at corner {a}")
            if a not in ids or b not in ids:
                raise GraphError(f"edge ({a}, {b}) references a missing corner")
            pair = (a, b) if a < b else (b, a)
            if pair in edges:
                raise GraphError(f"duplicate edge {pair}")
            edges.add(pair)
        object.__setattr__(self, "canvas", (width, height))
        object.__setattr__(self, "corners", corners)
        object.__setattr__(self, "edges", frozenset(edges))

    @classmethod
    def _trusted(cls, corners: tuple[Corner, ...], edges: frozenset, canvas: tuple[int, int]) -> "BuildingGraph":
        # caller guarantees sorted corners, normalized edges and all invariants
        g = object.__new__(cls)
        object.__setattr__(g, "corners", corners)
        object.__setattr__(g, "edges", edges)
        object.__setattr__(g, "canvas", canvas)
        return g

    @cached_property
    def positions(self) -> dict[int, tuple[float, float]]:
        return {c.id: (c.x, c.y) for c in self.corners}

    @cached_property
    def adjacency(self) -> dict[int, tuple[int, ...]]:
        nbrs: dict[int, list[int]] = {c.id: [] for c in self.corners}
        for a, b in self.edges:
            nbrs[a].append(b)
            nbrs[b].append(a)
        return {k: tuple(sorted(v)) for k, v in nbrs.items()}

    def degree(self, corner_id: int) -> int:
        return len(self.adjacency[corner_id])

    @cached_property
    def _ordered(self) -> list[tuple[tuple[int, int], int]]:
        return sorted((quantize_point(c.x, c.y), c.id) for c in self.corners)

    @cached_property
    def canonical_ids(self) -> tuple[int, ...]:
        """Corner ids in key order; aligns ids between key-equal graphs."""
        return tuple(cid for _, cid in self._ordered)

    @cached_property
    def key(self) -> tuple:
        """Canonical identity: rounded sorted coordinates plus induced edge indices."""
        order = self._ordered
        index = {cid: i for i, (_, cid) in enumerate(order)}
        points = tuple(q for q, _ in order)
        edges = []
        for a, b in self.edges:
            i, j = index[a], index[b]
            edges.append((i, j) if i < j else (j, i))
        edges.sort()
        return (self.canvas, points, tuple(edges))

    @cached_property
    def digest(self) -> str:
        return hashlib.sha1(repr(self.key).encode()).hexdigest()[:16]

    def __eq__(self, other):
        if not isinstance(other, BuildingGraph):
            return NotImplemented
        return self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"BuildingGraph({len(self.corners)} corners, {len(self.edges)} edges, canvas={self.canvas})"

    def next_id(self) -> int:
        return self.corners[-1].id + 1 if self.corners else 0

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    @classmethod
    def from_points(cls, points: Sequence[tuple[float, float]], edges: Iterable[tuple[int, int]] = (),
                    canvas: tuple[int, int] = DEFAULT_CANVAS) -> "BuildingGraph":
        """Build a graph whose corner ids are the point indices."""
        return cls(tuple(Corner(i, x, y) for i, (x, y) in enumerate(points)), frozenset(edges), canvas)


# ---------------------------------------------------------------- junctions

@dataclass(frozen=True)
class Junction:
    corner_id: int
    position: tuple[float, float]
    directions: tuple[float, ...]  # degrees in [0, 360), ascending


def direction(p: tuple[float, float], q: tuple[float, float]) -> float:
    """Angle in degrees of the ray p -> q, in [0, 360)."""
    ang = math.degrees(math.atan2(q[1] - p[1], q[0] - p[0])) % 360.0
    return 0.0 if ang >= 360.0 else ang


def junctions(graph: BuildingGraph) -> list[Junction]:
    pos = graph.positions
    out = []
    for c in graph.corners:
        p = pos[c.id]
        dirs = tuple(sorted(direction(p, pos[n]) for n in graph.adjacency[c.id]))
        out.append(Junction(c.id, p, dirs))
    return out


# ------------------------------------------------------------------ regions

@dataclass(frozen=True)
class Region:
    loop: tuple[int, ...]  # corner ids, counter-clockwise, starting at the smallest id
    area: float


def signed_area(points: Sequence[tuple[float, float]]) -> float:
    s = 0.0
    n = len(points)
    for i in range(n):
        x1, y1 = points[i]
        x2, y2 = points[(i + 1) % n]
        s += x1 * y2 - x2 * y1
    return 0.5 * s


def _orient(p, q, r) -> float:
    return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])


def _on_segment(p, q, r) -> bool:
    # r colinear with p-q; inside its bounding box?
    return min(p[0], q[0]) <= r[0] <= max(p[0], q[0]) and min(p[1], q[1]) <= r[1] <= max(p[1], q[1])


def segments_intersect(p1, p2, q1, q2) -> bool:
    d1 = _orient(q1, q2, p1)
    d2 = _orient(q1, q2, p2)
    d3 = _orient(p1, p2, q1)
    d4 = _orient(p1, p2, q2)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and ((d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)):
        return True
    return ((d1 == 0 and _on_segment(q1, q2, p1)) or (d2 == 0 and _on_segment(q1, q2, p2))
            or (d3 == 0 and _on_segment(p1, p2, q1)) or (d4 == 0 and _on_segment(p1, p2, q2)))


def crossing_edges(graph: BuildingGraph) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """Pairs of edges without a shared endpoint whose segments intersect."""
    pos = graph.positions
    edges = graph.sorted_edges()
    out = []
    for i, (a, b) in enumerate(edges):
        for c, d in edges[i + 1:]:
            if a in (c, d) or b in (c, d):
                continue
            if segments_intersect(pos[a], pos[b], pos[c], pos[d]):
                out.append(((a, b), (c, d)))
    return out


def _two_core(graph: BuildingGraph) -> dict[int, set[int]]:
    adj = {k: set(v) for k, v in graph.adjacency.items()}
    stack = [k for k, v in adj.items() if len(v) <= 1]
    while stack:
        v = stack.pop()
        if v not in adj:
            continue
        for w in adj.pop(v):
            adj[w].discard(v)
            if len(adj[w]) == 1:
                stack.append(w)
    return adj


def extract_regions(graph: BuildingGraph) -> list[Region]:
    """Bounded faces of the embedded graph.

    Dangling trees are pruned first, then every half-edge is walked by
    turning to the next edge clockwise from the reversed incoming edge.
    Bounded faces come out counter-clockwise (positive shoelace area); each
    component's outer boundary comes out negative and is dropped.  Crossing
    edges are reported with a :class:`CrossingEdges` warning.
    """
    crossings = crossing_edges(graph)
    if crossings:
        warnings.warn(CrossingEdges(crossings), stacklevel=2)
    pos = graph.positions
    adj = _two_core(graph)
    rotation = {v: sorted(nbrs, key=lambda w: (direction(pos[v], pos[w]), w)) for v, nbrs in adj.items()}
    slot = {(v, w): i for v, ring in rotation.items() for i, w in enumerate(ring)}
    seen = set()
    regions = []
    for start in sorted(slot):
        if start in seen:
            continue
        loop = []
        u, v = start
        while (u, v) not in seen:
            seen.add((u, v))
            loop.append(u)
            ring = rotation[v]
            w = ring[(slot[(v, u)] - 1) % len(ring)]
            u, v = v, w
        area = signed_area([pos[c] for c in loop])
        if len(loop) >= 3 and area > 0:
            k = loop.index(min(loop))
            regions.append(Region(tuple(loop[k:] + loop[:k]), area))
    regions.sort(key=lambda r: (min(r.loop), len(r.loop), r.loop))
    return regions


# ------------------------------------------------------------ rasterization

@lru_cache(maxsize=1 << 16)
def corner_stamp(x: float, y: float) -> tuple[int, int, np.ndarray]:
    """(row0, col0, mask) of the pixels whose centers lie within 1.5 px of (x, y)."""
    c0, c1 = math.floor(x - 2.0), math.floor(x + 2.0) + 1
    r0, r1 = math.floor(y - 2.0), math.floor(y + 2.0) + 1
    cx = np.arange(c0, c1) + 0.5 - x
    cy = np.arange(r0, r1) + 0.5 - y
    mask = cy[:, None] ** 2 + cx[None, :] ** 2 <= CORNER_RADIUS ** 2
    mask.flags.writeable = False
    return r0, c0, mask


@lru_cache(maxsize=1 << 16)
def edge_stamp(x1: float, y1: float, x2: float, y2: float) -> tuple[int, int, np.ndarray]:
    """(row0, col0, mask) of the pixels whose centers lie within 1.0 px of the segment."""
    c0, c1 = math.floor(min(x1, x2) - 1.5), math.floor(max(x1, x2) + 1.5) + 1
    r0, r1 = math.floor(min(y1, y2) - 1.5), math.floor(max(y1, y2) + 1.5) + 1
    px = (np.arange(c0, c1) + 0.5)[None, :]
    py = (np.arange(r0, r1) + 0.5)[:, None]
    dx, dy = x2 - x1, y2 - y1
    length2 = dx * dx + dy * dy
    if length2 == 0.0:
        t = np.zeros((1, 1))
    else:
        t = np.clip(((px - x1) * dx + (py - y1) * dy) / length2, 0.0, 1.0)
    ex = px - (x1 + t * dx)
    ey = py - (y1 + t * dy)
    mask = ex * ex + ey * ey <= EDGE_RADIUS ** 2
    mask.flags.writeable = False
    return r0, c0, mask


def _edge_stamp_of(graph: BuildingGraph, e: tuple[int, int]):
    (x1, y1), (x2, y2) = graph.positions[e[0]], graph.positions[e[1]]
    if (x2, y2) < (x1, y1):
        x1, y1, x2, y2 = x2, y2, x1, y1
    return edge_stamp(x1, y1, x2, y2)


def paint(target: np.ndarray, stamp: tuple[int, int, np.ndarray], value=1, origin: tuple[int, int] = (0, 0)) -> None:
    """Write ``value`` into ``target`` wherever the stamp is set, clipped to bounds.

    ``origin`` is the canvas position of ``target[0, 0]`` when painting into a crop.
    """
    r0, c0, mask = stamp
    r0 -= origin[0]
    c0 -= origin[1]
    h, w = mask.shape
    H, W = target.shape
    rr0, cc0 = max(r0, 0), max(c0, 0)
    rr1, cc1 = min(r0 + h, H), min(c0 + w, W)
    if rr0 >= rr1 or cc0 >= cc1:
        return
    sub = mask[rr0 - r0:rr1 - r0, cc0 - c0:cc1 - c0]
    target[rr0:rr1, cc0:cc1][sub] = value


def stamp_pixels(stamp: tuple[int, int, np.ndarray], shape: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
    """Canvas (rows, cols) covered by a stamp, clipped to ``shape``."""
    r0, c0, mask = stamp
    rows, cols = np.nonzero(mask)
    rows = rows + r0
    cols = cols + c0
    keep = (rows >= 0) & (rows < shape[0]) & (cols >= 0) & (cols < shape[1])
    return rows[keep], cols[keep]


def corner_pixels(graph: BuildingGraph, corner_id: int):
    x, y = graph.positions[corner_id]
    return stamp_pixels(corner_stamp(x, y), (graph.canvas[1], graph.canvas[0]))


def edge_pixels(graph: BuildingGraph, e: tuple[int, int]):
    return stamp_pixels(_edge_stamp_of(graph, e), (graph.canvas[1], graph.canvas[0]))


def rasterize(graph: BuildingGraph, kind: str) -> np.ndarray:
    """Binary uint8 raster of the corners or the edges of ``graph``."""
    width, height = graph.canvas
    out = np.zeros((height, width), dtype=np.uint8)
    if kind == "corners":
        for c in graph.corners:
            paint(out, corner_stamp(c.x, c.y))
    elif kind == "edges":
        for e in graph.edges:
            paint(out, _edge_stamp_of(graph, e))
    else:
        raise ValueError(f"unknown raster kind {kind!r}")
    return out


def _clip_window(win: Window, height: int, width: int) -> Window:
    return max(win[0], 0), min(win[1], height), max(win[2], 0), min(win[3], width)


@lru_cache(maxsize=1 << 16)
def _edge_cells(x1: float, y1: float, x2: float, y2: float, height: int, width: int):
    """Canvas-clipped (rows, cols, window) of one edge band."""
    stamp = edge_stamp(x1, y1, x2, y2)
    rows, cols = stamp_pixels(stamp, (height, width))
    rows.flags.writeable = False
    cols.flags.writeable = False
    r0, c0, mask = stamp
    return rows, cols, (r0, r0 + mask.shape[0], c0, c0 + mask.shape[1])


def _band_cells(graph: BuildingGraph):
    width, height = graph.canvas
    pos = graph.positions
    out = []
    for a, b in graph.edges:
        (x1, y1), (x2, y2) = pos[a], pos[b]
        if (x2, y2) < (x1, y1):
            x1, y1, x2, y2 = x2, y2, x1, y1
        out.append(_edge_cells(x1, y1, x2, y2, height, width))
    return out


def _cells_window(cells, height: int, width: int) -> Optional[Window]:
    if not cells:
        return None
    r0 = min(w[0] for _, _, w in cells)
    r1 = max(w[1] for _, _, w in cells)
    c0 = min(w[2] for _, _, w in cells)
    c1 = max(w[3] for _, _, w in cells)
    return _clip_window((r0 - 1, r1 + 1, c0 - 1, c1 + 1), height, width)


def band_window(graph: BuildingGraph) -> Optional[Window]:
    """Bounding window (with a 1 px margin) of the edge band, or None."""
    return _cells_window(_band_cells(graph), graph.canvas[1], graph.canvas[0])


def mask_window(mask: np.ndarray) -> Optional[Window]:
    rows = np.flatnonzero(mask.any(axis=1))
    if rows.size == 0:
        return None
    cols = np.flatnonzero(mask.any(axis=0))
    return _clip_window((rows[0] - 1, rows[-1] + 2, cols[0] - 1, cols[-1] + 2), *mask.shape)


def union_window(a: Optional[Window], b: Optional[Window]) -> Optional[Window]:
    if a is None:
        return b
    if b is None:
        return a
    return min(a[0], b[0]), max(a[1], b[1]), min(a[2], b[2]), max(a[3], b[3])


def _enclosed_from_cells(cells, win: Window) -> np.ndarray:
    band = np.zeros((win[1] - win[0], win[3] - win[2]), dtype=bool)
    if cells:
        rows = np.concatenate([r for r, _, _ in cells])
        cols = np.concatenate([c for _, c, _ in cells])
        band[rows - win[0], cols - win[2]] = True
    return fill_enclosed(band)


def enclosed_crop(graph: BuildingGraph, win: Window) -> np.ndarray:
    """Enclosed-area mask restricted to ``win`` (bool).

    Exact as long as ``win`` contains the band window: everything outside is
    background reachable from the canvas border.
    """
    return _enclosed_from_cells(_band_cells(graph), win)


def fill_enclosed(band: np.ndarray) -> np.ndarray:
    """``band`` plus all background not 4-connected to the array border."""
    h, w = band.shape
    canvas = np.zeros((h + 2, w + 2), dtype=np.uint8)
    canvas[1:-1, 1:-1] = band
    flood_mask = np.zeros((h + 4, w + 4), dtype=np.uint8)
    # the zero ring around the crop links every border background pixel to the seed
    cv2.floodFill(canvas, flood_mask, (0, 0), 2, flags=4)
    return canvas[1:-1, 1:-1] != 2


def enclosed_mask(graph: BuildingGraph) -> np.ndarray:
    """Edge band plus every pixel the border flood fill cannot reach (uint8)."""
    width, height = graph.canvas
    out = np.zeros((height, width), dtype=np.uint8)
    win = band_window(graph)
    if win is not None:
        out[win[0]:win[1], win[2]:win[3]] = enclosed_crop(graph, win)
    return out


def _iou_counts(inter: int, union: int, a_empty: bool, b_empty: bool) -> float:
    if a_empty and b_empty:
        return 1.0
    if a_empty or b_empty:
        return 0.0
    return inter / union


def mask_iou(a: np.ndarray, b: np.ndarray) -> float:
    """|a and b| / |a or b|; 1 when both are empty, 0 when only one is."""
    if a.shape != b.shape:
        raise DimensionMismatch(f"{a.shape} vs {b.shape}")
    a = a.astype(bool, copy=False)
    b = b.astype(bool, copy=False)
    inter = int(np.count_nonzero(a & b))
    union = int(np.count_nonzero(a | b))
    return _iou_counts(inter, union, not a.any(), not b.any())


@dataclass
class RegionReference:
    """A fixed reference mask with its bounding window precomputed, for fast
    repeated region IoU against many candidate graphs."""

    mask: np.ndarray
    window: Optional[Window] = field(init=False)

    def __post_init__(self):
        self.mask = self.mask.astype(bool)
        self.window = mask_window(self.mask)

    def iou(self, graph: BuildingGraph) -> float:
        height, width = self.mask.shape
        if graph.canvas != (width, height):
            raise DimensionMismatch(f"canvas {graph.canvas} vs reference {width}x{height}")
        cells = _band_cells(graph)
        win = union_window(_cells_window(cells, height, width), self.window)
        if win is None:
            return 1.0
        pred = _enclosed_from_cells(cells, win)
        ref = self.mask[win[0]:win[1], win[2]:win[3]]
        inter = int(np.count_nonzero(pred & ref))
        union = int(np.count_nonzero(pred | ref))
        return _iou_counts(inter, union, not pred.any(), self.window is None)


# ------------------------------------------------------------ polygon fill

def polygon_crop(points: Sequence[tuple[float, float]], height: int, width: int) -> tuple[Window, np.ndarray]:
    """Pixels whose centers are inside the polygon (even-odd rule), as a
    cropped mask plus its window on a ``height`` x ``width`` canvas."""
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    win = _clip_window((math.floor(min(ys)), math.floor(max(ys)) + 1, math.floor(min(xs)), math.floor(max(xs)) + 1),
                       height, width)
    px = (np.arange(win[2], win[3]) + 0.5)[None, :]
    py = (np.arange(win[0], win[1]) + 0.5)[:, None]
    inside = np.zeros((win[1] - win[0], win[3] - win[2]), dtype=bool)
    n = len(points)
    for i in range(n):
        x1, y1 = points[i]
        x2, y2 = points[(i + 1) % n]
        if y1 == y2:
            continue
        straddle = (y1 > py) != (y2 > py)
        xcross = x1 + (py - y1) * (x2 - x1) / (y2 - y1)
        inside ^= straddle & (px < xcross)
    return win, inside


def fill_polygon(points: Sequence[tuple[float, float]], height: int, width: int) -> np.ndarray:
    out = np.zeros((height, width), dtype=np.uint8)
    if len(points) >= 3:
        win, inside = polygon_crop(points, height, width)
        out[win[0]:win[1], win[2]:win[3]] = inside
    return out


def region_points(graph: BuildingGraph, region: Region) -> list[tuple[float, float]]:
    return [graph.positions[c] for c in region.loop]
