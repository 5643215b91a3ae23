"""Deterministic instance generators: grids, spirals, crafted no-instances, planar DAGs."""

from __future__ import annotations

import math
import random
from fractions import Fraction
from typing import Sequence

from .instances import DspInstance
from .plane import PlaneMultigraph


def rotation_from_coords(
    n: int, ends: Sequence[tuple[int, int]], coords: Sequence[tuple[float, float]]
) -> list[list[int]]:
    """Clockwise dart order from straight-line coordinates."""
    rot: list[list[tuple[float, int]]] = [[] for _ in range(n)]
    for e, (u, v) in enumerate(ends):
        for d, a, b in ((2 * e, u, v), (2 * e + 1, v, u)):
            ang = math.atan2(coords[b][1] - coords[a][1], coords[b][0] - coords[a][0])
            rot[a].append((-ang, d))
    return [[d for _, d in sorted(r)] for r in rot]


def _weights(m: int, scheme: str, rng: random.Random) -> list[Fraction]:
    if scheme == "unit":
        return [Fraction(1)] * m
    if scheme.startswith("random"):
        hi = 5
        if "{" in scheme:
            lo_hi = scheme[scheme.index("{") + 1:scheme.index("}")]
            hi = int(lo_hi.split("..")[1])
        return [Fraction(rng.randint(1, hi)) for _ in range(m)]
    raise ValueError(f"unknown weight scheme {scheme!r}")


def grid_graph(rows: int, cols: int, weights: Sequence[Fraction] | None = None,
               diagonals: Sequence[tuple[int, int]] = ()) -> PlaneMultigraph:
    """Row-major grid; vertex ``r * cols + c`` sits at (c, -r).

    ``diagonals`` lists cells (r, c) that get the down-right diagonal.
    """
    ends = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                ends.append((v, v + 1))
            if r + 1 < rows:
                ends.append((v, v + cols))
    for r, c in diagonals:
        ends.append((r * cols + c, (r + 1) * cols + c + 1))
    coords = [(c, -r) for r in range(rows) for c in range(cols)]
    n = rows * cols
    w = list(weights) if weights is not None else [Fraction(1)] * len(ends)
    outer = 2 * ends.index((0, 1)) if cols > 1 else None
    return PlaneMultigraph(n, ends, w, rotation_from_coords(n, ends, coords), outer)


def gen_grid(rows: int, cols: int, weights: str = "unit", terminals: str = "corners",
             seed: int = 0, k: int = 1) -> DspInstance:
    if rows < 2 or cols < 2:
        raise ValueError("rows and cols must be at least 2")
    rng = random.Random(seed)
    base = grid_graph(rows, cols)
    g = grid_graph(rows, cols, _weights(base.m, weights, rng))
    n = rows * cols
    if terminals in ("corners", "single-pair"):
        pairs = [(0, n - 1), (cols - 1, n - cols)][: max(1, k if terminals == "corners" else 1)]
    elif terminals == "random":
        vs = rng.sample(range(n), 2 * k)
        pairs = [(vs[2 * i], vs[2 * i + 1]) for i in range(k)]
    else:
        raise ValueError(f"unknown terminal scheme {terminals!r}")
    meta = {"family": "grid", "rows": rows, "cols": cols, "weights": weights,
            "terminals": terminals, "seed": seed}
    return DspInstance(g, tuple(pairs), meta)


def spiral_layout(turns: int, k: int) -> tuple[int, int]:
    """(positions per layer m, outermost layer index h) of ``gen_spiral``."""
    m = max(3, k + 1)
    h = turns * m if turns > 0 else m
    return m, h


def spiral_vertex(m: int, j: int, x: int) -> int:
    return 1 + j * m + (x % m)


def gen_spiral(turns: int, k: int) -> DspInstance:
    """Concentric layers around a hub with twisted radial edges.

    Radial edges (weight 1) advance one position per layer, layer cycles cost 2
    per step, so each pair's unique geodesic winds ``turns`` times around the
    hub terminal. ``turns = 0`` gives straight radials (a polar grid).
    """
    if turns < 0 or k < 1:
        raise ValueError("turns >= 0 and k >= 1 required")
    m, h = spiral_layout(turns, k)
    tw = 1 if turns > 0 else 0
    n = 1 + (h + 1) * m
    ends: list[tuple[int, int]] = []
    weights: list[Fraction] = []
    eid: dict[tuple[str, int, int], int] = {}

    def add(key, u, v, w):
        eid[key] = len(ends)
        ends.append((u, v))
        weights.append(Fraction(w))

    for x in range(m):
        add(("hub", 0, x), 0, spiral_vertex(m, 0, x), 1)
    for j in range(h + 1):
        for x in range(m):
            add(("layer", j, x), spiral_vertex(m, j, x), spiral_vertex(m, j, x + 1), 2)
    for j in range(h):
        for x in range(m):
            add(("radial", j, x), spiral_vertex(m, j, x), spiral_vertex(m, j + 1, x + tw), 1)
    rot: list[list[int]] = [[] for _ in range(n)]
    rot[0] = [2 * eid[("hub", 0, x)] for x in [0] + list(range(m - 1, 0, -1))]
    for j in range(h + 1):
        for x in range(m):
            v = spiral_vertex(m, j, x)
            r = []
            if j < h:
                r.append(2 * eid[("radial", j, x)])
            r.append(2 * eid[("layer", j, (x - 1) % m)] + 1)
            if j == 0:
                r.append(2 * eid[("hub", 0, x)] + 1)
            else:
                r.append(2 * eid[("radial", j - 1, (x - tw) % m)] + 1)
            r.append(2 * eid[("layer", j, x)])
            rot[v] = r
    outer = 2 * eid[("layer", h, 0)] + 1
    g = PlaneMultigraph(n, ends, weights, rot, outer)
    pairs = [(0, spiral_vertex(m, h, h * tw))]
    for i in range(1, k):
        pairs.append((spiral_vertex(m, 0, i), spiral_vertex(m, h, i + h * tw)))
    meta = {"family": "spiral", "turns": turns, "k": k, "m": m, "h": h}
    return DspInstance(g, tuple(pairs), meta)


def spiral_ray(inst: DspInstance) -> list[int]:
    """Edges crossed by the ray between positions m-1 and 0, outermost first."""
    m, h = inst.meta["m"], inst.meta["h"]
    g = inst.graph
    out = []
    for j in range(h, -1, -1):
        u, v = spiral_vertex(m, j, m - 1), spiral_vertex(m, j, 0)
        out.append(g.dart(u, v) >> 1)
        if j > 0:
            a, b = spiral_vertex(m, j - 1, m - 1), spiral_vertex(m, j, 0)
            if g.has_edge(a, b):
                out.append(g.dart(a, b) >> 1)
    return out


def gen_hourglass() -> DspInstance:
    """Two pairs whose only routes share one cut vertex: a no-instance."""
    coords = [(0, 1), (0, -1), (1, 0), (2, 1), (2, -1)]
    ends = [(0, 1), (0, 2), (1, 2), (2, 3), (2, 4), (3, 4)]
    g = PlaneMultigraph(5, ends, [1] * 6, rotation_from_coords(5, ends, coords))
    return DspInstance(g, ((0, 3), (1, 4)), {"family": "hourglass"})


def gen_crossing_grid(rows: int = 3, cols: int = 3) -> DspInstance:
    """Opposite-corner pairs in a unit grid; monotone routes must meet."""
    g = grid_graph(rows, cols)
    n = rows * cols
    return DspInstance(g, ((0, n - 1), (cols - 1, n - cols)), {"family": "crossing"})


def gen_staggered(rows: int, cols: int, k: int) -> DspInstance:
    """Pair i runs from the left end of row i to the right end of row i + 1.

    Neighbouring pairs share a row of their dags, yet routing each pair along
    its upper row and then down the last column keeps them disjoint.
    """
    if k >= rows:
        raise ValueError("need more rows than pairs")
    g = grid_graph(rows, cols)
    pairs = tuple((i * cols, (i + 1) * cols + cols - 1) for i in range(k))
    return DspInstance(g, pairs, {"family": "staggered", "rows": rows, "cols": cols})


def gen_cycle(length: int, pairs: Sequence[tuple[int, int]]) -> DspInstance:
    coords = [(math.cos(-2 * math.pi * i / length), math.sin(-2 * math.pi * i / length)) for i in range(length)]
    ends = [(i, (i + 1) % length) for i in range(length)]
    g = PlaneMultigraph(length, ends, [1] * length, rotation_from_coords(length, ends, coords))
    return DspInstance(g, tuple(pairs), {"family": "cycle"})


def gen_path(weights: Sequence[int], pairs: Sequence[tuple[int, int]]) -> DspInstance:
    n = len(weights) + 1
    ends = [(i, i + 1) for i in range(n - 1)]
    coords = [(i, 0) for i in range(n)]
    g = PlaneMultigraph(n, ends, list(weights), rotation_from_coords(n, ends, coords))
    return DspInstance(g, tuple(pairs), {"family": "path"})


def random_planar_dag(n_rows: int, n_cols: int, seed: int, keep: float = 0.8,
                      k: int = 2) -> tuple[PlaneMultigraph, list[tuple[int, int]]]:
    """Random orientation of a triangulated grid subgraph plus random pairs.

    Edges are oriented from lower to higher rank in a random permutation, so
    the result is acyclic. Pairs are chosen among reachable (s, t) when possible.
    """
    rng = random.Random(seed)
    cells = [(r, c) for r in range(n_rows - 1) for c in range(n_cols - 1)]
    full = grid_graph(n_rows, n_cols, diagonals=cells)
    n = full.n
    rank = list(range(n))
    rng.shuffle(rank)
    coords = [(c, -r) for r in range(n_rows) for c in range(n_cols)]
    ends = []
    for e in range(full.m):
        if rng.random() > keep:
            continue
        u, v = full.eu[e], full.ev[e]
        ends.append((u, v) if rank[u] < rank[v] else (v, u))
    g = PlaneMultigraph(n, ends, [1] * len(ends), rotation_from_coords(n, ends, coords))
    reach = []
    for s in range(n):
        seen = {s}
        stack = [s]
        while stack:
            u = stack.pop()
            for d in g.rot[u]:
                if d & 1 == 0 and g.head(d) not in seen:
                    seen.add(g.head(d))
                    stack.append(g.head(d))
        reach.append(seen)
    cand = [(s, t) for s in range(n) for t in reach[s] if s != t]
    pairs: list[tuple[int, int]] = []
    used: set[int] = set()
    rng.shuffle(cand)
    for s, t in cand:
        if len(pairs) == k:
            break
        if s in used or t in used:
            continue
        pairs.append((s, t))
        used |= {s, t}
    while len(pairs) < k:
        free = [v for v in range(n) if v not in used]
        s, t = free[0], free[1]
        pairs.append((s, t))
        used |= {s, t}
    return g, pairs


def corpus_specs() -> list[tuple[str, DspInstance]]:
    """The shipped differential corpus: 60 instances, at most 14 vertices, k <= 3."""
    out: list[tuple[str, DspInstance]] = []
    out.append(("grid3-corners", gen_grid(3, 3)))
    out.append(("grid2-single", gen_grid(2, 2, terminals="single-pair")))
    out.append(("grid3-crossing", gen_crossing_grid()))
    out.append(("grid3x4-crossing", gen_crossing_grid(3, 4)))
    out.append(("hourglass", gen_hourglass()))
    out.append(("cycle4-opposite", gen_cycle(4, [(0, 1), (2, 3)])))
    out.append(("cycle6-interleaved", gen_cycle(6, [(0, 3), (1, 4)])))
    out.append(("cycle6-nested", gen_cycle(6, [(0, 2), (3, 5)])))
    out.append(("path-collinear", gen_path([1, 2, 1, 1, 3], [(0, 2), (3, 5)])))
    out.append(("spiral-1-1", gen_spiral(1, 1)))
    out.append(("spiral-1-2", gen_spiral(1, 2)))
    out.append(("staggered-3x3-k2", gen_staggered(3, 3, 2)))
    out.append(("staggered-3x4-k2", gen_staggered(3, 4, 2)))
    out.append(("staggered-4x3-k3", gen_staggered(4, 3, 3)))
    shapes = [(2, 3), (3, 3), (2, 4), (3, 4), (2, 5), (2, 6), (4, 3), (2, 7)]
    seed = 0
    for k in (1, 2, 3):
        for rows, cols in shapes:
            for weights in ("unit", "random{1..3}"):
                if len(out) >= 60:
                    break
                if rows * cols < 2 * k + 2:
                    continue
                seed += 1
                inst = gen_grid(rows, cols, weights=weights, terminals="random", seed=seed, k=k)
                tag = "u" if weights == "unit" else "r"
                out.append((f"grid{rows}x{cols}-k{k}-{tag}-s{seed}", inst))
    return out[:60]
