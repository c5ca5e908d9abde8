"""Synthetic rectilinear buildings and seeded corruptions of them."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import ndimage

from . import rng as rngmod
from .actions import Action, InvalidAction, add_edge, apply, remove_corner, remove_edge
from .geometry import DEFAULT_CANVAS, BuildingGraph, Corner, enclosed_mask, rasterize

CORRUPTION_TYPES = ("drop-edge", "add-spurious-edge", "add-spurious-corner")


class InfeasibleParams(ValueError):
    pass


class Exhausted(RuntimeError):
    pass


@dataclass
class SynthParams:
    rectangles: int = 2
    grid: int = 16  # px between admissible coordinates
    margin: int = 16
    seed: int = 0
    blur: int = 0  # box-blur radius, px
    flip: float = 0.0  # per-pixel flip probability
    canvas: tuple[int, int] = DEFAULT_CANVAS
    min_cells: int = 2  # rectangle side, in grid steps
    max_cells: int = 6

    def __post_init__(self):
        if not 1 <= self.rectangles <= 4:
            raise InfeasibleParams(f"rectangle count {self.rectangles} outside [1, 4]")
        if self.grid < 8:
            raise InfeasibleParams("grid step must be >= 8 px")
        if not 0.0 <= self.flip <= 1.0 or self.blur < 0:
            raise InfeasibleParams("bad degradation parameters")
        if not 1 <= self.min_cells <= self.max_cells:
            raise InfeasibleParams("bad rectangle size range")
        self.canvas = tuple(self.canvas)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["canvas"] = list(self.canvas)
        return d


@dataclass
class SynthCase:
    gt: BuildingGraph
    corner_conf: np.ndarray
    edge_conf: np.ndarray
    region_ref: np.ndarray
    rects: list[tuple[int, int, int, int]] = field(default_factory=list)  # x0, y0, x1, y1


def _interiors_overlap(a, b) -> bool:
    return a[0] < b[2] and b[0] < a[2] and a[1] < b[3] and b[1] < a[3]


def _place_rectangles(p: SynthParams, gen: np.random.Generator) -> list[tuple[int, int, int, int]]:
    width, height = p.canvas
    lo_x, hi_x = p.margin, width - p.margin - 1
    lo_y, hi_y = p.margin, height - p.margin - 1
    g = p.grid

    def size():
        return g * int(gen.integers(p.min_cells, p.max_cells + 1)), g * int(gen.integers(p.min_cells, p.max_cells + 1))

    def fits(r):
        return lo_x <= r[0] and r[2] <= hi_x and lo_y <= r[1] and r[3] <= hi_y

    for _ in range(50):
        w, h = size()
        nx, ny = (hi_x - lo_x - w) // g, (hi_y - lo_y - h) // g
        if nx < 0 or ny < 0:
            continue
        # start near the middle so neighbours have room
        x0 = lo_x + g * int(gen.integers(nx // 4, nx - nx // 4 + 1))
        y0 = lo_y + g * int(gen.integers(ny // 4, ny - ny // 4 + 1))
        rects = [(x0, y0, x0 + w, y0 + h)]
        tries = 0
        while len(rects) < p.rectangles and tries < 200:
            tries += 1
            px0, py0, px1, py1 = rects[int(gen.integers(len(rects)))]
            w, h = size()
            side = int(gen.integers(4))
            if side in (0, 1):  # left / right: share part of a vertical side
                x0 = px0 - w if side == 0 else px1
                shift = int(gen.integers(-(h // g) + 1, (py1 - py0) // g))
                y0 = py0 + g * shift
            else:  # top / bottom
                y0 = py0 - h if side == 2 else py1
                shift = int(gen.integers(-(w // g) + 1, (px1 - px0) // g))
                x0 = px0 + g * shift
            r = (x0, y0, x0 + w, y0 + h)
            if fits(r) and not any(_interiors_overlap(r, o) for o in rects):
                rects.append(r)
        if len(rects) == p.rectangles:
            return rects
    raise InfeasibleParams(f"could not place {p.rectangles} rectangles on {p.canvas} with margin {p.margin}")


def arrangement(rects: list[tuple[int, int, int, int]], canvas: tuple[int, int] = DEFAULT_CANVAS) -> BuildingGraph:
    """Planar graph of the union of rectangle boundaries, shared sides included.

    Vertices are all rectangle corners; every side is split at the vertices
    lying on it, and coincident pieces merge.
    """
    verts = sorted({(x, y) for x0, y0, x1, y1 in rects for x in (x0, x1) for y in (y0, y1)})
    index = {v: i for i, v in enumerate(verts)}
    edges = set()
    for x0, y0, x1, y1 in rects:
        for a, b in (((x0, y0), (x1, y0)), ((x1, y0), (x1, y1)), ((x0, y1), (x1, y1)), ((x0, y0), (x0, y1))):
            if a[1] == b[1]:
                on = sorted(v for v in verts if v[1] == a[1] and a[0] <= v[0] <= b[0])
            else:
                on = sorted(v for v in verts if v[0] == a[0] and a[1] <= v[1] <= b[1])
            for u, v in zip(on, on[1:]):
                i, j = index[u], index[v]
                edges.add((min(i, j), max(i, j)))
    return BuildingGraph(tuple(Corner(i, float(x), float(y)) for i, (x, y) in enumerate(verts)), frozenset(edges),
                         canvas)


def degrade(raster: np.ndarray, blur: int, flip: float, gen: np.random.Generator) -> np.ndarray:
    """Box blur of the given radius, then flip v -> 1 - v per pixel; 8-bit quantized."""
    out = raster.astype(float)
    if blur > 0:
        out = ndimage.uniform_filter(out, size=2 * blur + 1, mode="constant", cval=0.0)
    if flip > 0:
        flips = gen.random(out.shape) < flip
        out = np.where(flips, 1.0 - out, out)
    return np.round(np.clip(out, 0.0, 1.0) * 255.0) / 255.0


def synth(params: SynthParams) -> SynthCase:
    rects = _place_rectangles(params, rngmod.stream(params.seed, "synth-layout"))
    gt = arrangement(rects, params.canvas)
    noise = rngmod.stream(params.seed, "synth-degrade")
    corner = degrade(rasterize(gt, "corners"), params.blur, params.flip, noise)
    edge = degrade(rasterize(gt, "edges"), params.blur, params.flip, noise)
    return SynthCase(gt, corner, edge, enclosed_mask(gt), rects)


# --------------------------------------------------------------- corruption

@dataclass
class CorruptionSpec:
    k: int = 1
    types: tuple[str, ...] = CORRUPTION_TYPES
    seed: int = 0
    jitter: float = 0.0

    def __post_init__(self):
        self.types = tuple(self.types)
        if self.k < 0:
            raise ValueError("k must be >= 0")
        bad = set(self.types) - set(CORRUPTION_TYPES)
        if bad or not self.types:
            raise ValueError(f"unknown corruption types {sorted(bad)}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["types"] = list(self.types)
        return d


@dataclass(frozen=True)
class Edit:
    kind: str  # corruption type
    inverse: Action  # the heuristic action that undoes it

    def to_dict(self) -> dict:
        return {"kind": self.kind, "inverse": {"kind": self.inverse.kind, "params": list(self.inverse.params)}}


def _spurious_corner(g: BuildingGraph, gt: BuildingGraph, gen: np.random.Generator, step: float):
    xs = [c.x for c in gt.corners] or [g.canvas[0] / 2]
    ys = [c.y for c in gt.corners] or [g.canvas[1] / 2]
    width, height = g.canvas
    half = step / 2
    lo_x, hi_x = max(min(xs) - 2 * step, 0.0), min(max(xs) + 2 * step, width - 1.0)
    lo_y, hi_y = max(min(ys) - 2 * step, 0.0), min(max(ys) + 2 * step, height - 1.0)
    for _ in range(50):
        x = lo_x + half * int(gen.integers(0, math.floor((hi_x - lo_x) / half) + 1))
        y = lo_y + half * int(gen.integers(0, math.floor((hi_y - lo_y) / half) + 1))
        if any(math.hypot(c.x - x, c.y - y) <= 8.0 for c in g.corners):
            continue
        if not g.corners:
            return None
        ids = [c.id for c in g.corners]
        n_links = 1 + int(gen.integers(2)) if len(ids) > 1 else 1
        links = sorted(int(i) for i in gen.choice(ids, size=n_links, replace=False))
        new_id = g.next_id()
        try:
            out = BuildingGraph(g.corners + (Corner(new_id, x, y),), g.edges, g.canvas)
            for n in links:
                out = apply(out, add_edge(new_id, n))
        except InvalidAction:
            continue
        return out, remove_corner(new_id)
    return None


def corrupt(gt: BuildingGraph, spec: CorruptionSpec, grid: float = 16.0) -> tuple[BuildingGraph, list[Edit]]:
    """Apply ``spec.k`` random corruptions, each undone by one heuristic action.

    Replaying the recorded inverses in reverse order restores ``gt`` (when
    ``jitter`` is 0).
    """
    gen = rngmod.stream(spec.seed, "corrupt")
    g = gt
    edits: list[Edit] = []
    for _ in range(spec.k):
        options = {}
        droppable = [e for e in g.sorted_edges() if e in gt.edges]
        if "drop-edge" in spec.types and droppable:
            options["drop-edge"] = droppable
        if "add-spurious-edge" in spec.types:
            ids = [c.id for c in g.corners]
            pairs = []
            for i, a in enumerate(ids):
                for b in ids[i + 1:]:
                    if (a, b) in g.edges or (a, b) in gt.edges:
                        continue
                    try:
                        apply(g, add_edge(a, b))
                    except InvalidAction:
                        continue
                    pairs.append((a, b))
            if pairs:
                options["add-spurious-edge"] = pairs
        if "add-spurious-corner" in spec.types and g.corners:
            options["add-spurious-corner"] = [None]
        kinds = [t for t in CORRUPTION_TYPES if t in options]
        done = False
        while kinds and not done:
            kind = kinds[int(gen.integers(len(kinds)))]
            if kind == "drop-edge":
                a, b = options[kind][int(gen.integers(len(options[kind])))]
                nxt, inv = apply(g, remove_edge(a, b)), add_edge(a, b)
            elif kind == "add-spurious-edge":
                a, b = options[kind][int(gen.integers(len(options[kind])))]
                nxt, inv = apply(g, add_edge(a, b)), remove_edge(a, b)
            else:
                made = _spurious_corner(g, gt, gen, grid)
                if made is None:
                    kinds.remove(kind)
                    continue
                nxt, inv = made
            edits.append(Edit(kind, inv))
            g = nxt
            done = True
        if not done:
            raise Exhausted(f"no applicable corruption after {len(edits)} of {spec.k} edits")
    if spec.jitter > 0:
        jg = rngmod.stream(spec.seed, "corrupt-jitter")
        width, height = g.canvas
        moved = []
        for c in g.corners:
            dx, dy = jg.uniform(-spec.jitter, spec.jitter, size=2)
            moved.append(Corner(c.id, min(max(c.x + dx, 0.0), width - 1e-6), min(max(c.y + dy, 0.0), height - 1e-6)))
        g = BuildingGraph(tuple(moved), g.edges, g.canvas)
    return g, edits


def replay_inverses(initial: BuildingGraph, edits: list[Edit]) -> BuildingGraph:
    g = initial
    for e in reversed(edits):
        g = apply(g, e.inverse)
    return g
