"""Handles, pulls, loads and winding numbers of solution paths against a fixed path."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import NotEmptyHandle
from .instances import Solution
from .plane import PlaneMultigraph


@dataclass(frozen=True)
class Handle:
    host: tuple[int, ...]
    path: tuple[int, ...]  # oriented so that path[0] comes first on host
    span: tuple[int, int]  # positions of the endpoints on host
    kind: str  # "winding" or "regular"
    empty: bool  # meaningful for regular handles only

    @property
    def regular(self) -> bool:
        return self.kind == "regular"


def path_edges(g: PlaneMultigraph, path: Sequence[int]) -> list[int]:
    return [g.dart(u, v) >> 1 for u, v in zip(path, path[1:])]


def face_sides(g: PlaneMultigraph, cycle_edges: Iterable[int]) -> list[int]:
    """Component id per face once the duals of ``cycle_edges`` are removed."""
    cut = set(cycle_edges)
    comp = [-1] * len(g.faces)
    c = 0
    for f0 in range(len(g.faces)):
        if comp[f0] >= 0:
            continue
        comp[f0] = c
        q = deque([f0])
        while q:
            f = q.popleft()
            for d in g.faces[f]:
                if d >> 1 in cut:
                    continue
                h = g.face_of[d ^ 1]
                if comp[h] < 0:
                    comp[h] = c
                    q.append(h)
        c += 1
    return comp


def vertex_side(g: PlaneMultigraph, comp: Sequence[int], v: int) -> int:
    return comp[g.face_of[g.rot[v][0]]]


def handle_cycle(g: PlaneMultigraph, Q: Sequence[int], H: Sequence[int], span: tuple[int, int]) -> list[int]:
    r1, r2 = span
    return path_edges(g, Q[r1:r2 + 1]) + path_edges(g, H)


def classify_handles(g: PlaneMultigraph, P: Sequence[int], Q: Sequence[int],
                     terminals: Iterable[int]) -> list[Handle]:
    """All handles of Q formed by subpaths of P between consecutive visits to Q."""
    pos = {v: i for i, v in enumerate(Q)}
    qedges = set(path_edges(g, Q))
    hits = [i for i, v in enumerate(P) if v in pos]
    terms = set(terminals)
    out = []
    for a, b in zip(hits, hits[1:]):
        sub = list(P[a:b + 1])
        if b == a + 1 and path_edges(g, sub)[0] in qedges:
            continue
        r1, r2 = pos[sub[0]], pos[sub[-1]]
        if min(r1, r2) == 0 or max(r1, r2) == len(Q) - 1:
            continue
        if r1 > r2:
            sub.reverse()
            r1, r2 = r2, r1
        cyc = handle_cycle(g, Q, sub, (r1, r2))
        on_cycle = set(Q[r1:r2 + 1]) | set(sub)
        comp = face_sides(g, cyc)
        s0, s1 = vertex_side(g, comp, Q[0]), vertex_side(g, comp, Q[-1])
        if s0 != s1:
            out.append(Handle(tuple(Q), tuple(sub), (r1, r2), "winding", False))
            continue
        inside = [t for t in terms if t not in on_cycle and vertex_side(g, comp, t) != s0]
        out.append(Handle(tuple(Q), tuple(sub), (r1, r2), "regular", not inside))
    return out


def pull(Q: Sequence[int], H: Handle) -> tuple[int, ...]:
    if not (H.regular and H.empty):
        raise NotEmptyHandle("only empty regular handles can be pulled")
    r1, r2 = H.span
    return tuple(Q[:r1]) + H.path + tuple(Q[r2 + 1:])


def boundary_edges(g: PlaneMultigraph, Q: Sequence[int]) -> set[int]:
    """∂(Q): edges off Q with an endpoint on Q."""
    own = set(path_edges(g, Q))
    vs = set(Q)
    return {e for e in range(g.m) if e not in own and (g.eu[e] in vs or g.ev[e] in vs)}


def primal_load(g: PlaneMultigraph, sol: Solution, Q: Sequence[int]) -> int:
    bd = boundary_edges(g, Q)
    return sum(len(bd & set(path_edges(g, p))) for p in sol.paths)


def dual_load(g: PlaneMultigraph, sol: Solution, walk: Sequence[int]) -> int:
    used = {e for p in sol.paths for e in path_edges(g, p)}
    return sum(1 for b in walk if b >> 1 in used)


@dataclass(frozen=True)
class LoadReport:
    path: tuple[int, ...]
    dual: bool
    load: int
    upper_comb_load: int
    pulls: int = 0
    handles: dict[str, int] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"path": list(self.path), "dual": self.dual, "load": self.load,
                "upper_comb_load": self.upper_comb_load, "pulls": self.pulls, "handles": dict(self.handles)}


def _handle_counts(hs: Iterable[Handle]) -> dict[str, int]:
    out = {"winding": 0, "regular-empty": 0, "regular-nonempty": 0}
    for h in hs:
        key = "winding" if not h.regular else "regular-empty" if h.empty else "regular-nonempty"
        out[key] += 1
    return out


def load(g: PlaneMultigraph, sol: Solution, Q: Sequence[int], terminals: Iterable[int],
         dual: bool = False, max_pulls: int = 1000) -> LoadReport:
    """Exact load plus an upper bound on comb-load from greedy pulls of empty regular handles.

    For a dual walk ``Q`` (primal darts crossed) no pulls are attempted and the
    bound equals the load.
    """
    if dual:
        val = dual_load(g, sol, Q)
        return LoadReport(tuple(Q), True, val, val)
    terms = list(terminals)
    first = [h for p in sol.paths for h in classify_handles(g, p, Q, terms)]
    cur = tuple(Q)
    best = primal_load(g, sol, cur)
    pulls = 0
    while pulls < max_pulls:
        step = None
        for p in sol.paths:
            for h in classify_handles(g, p, cur, terms):
                if h.regular and h.empty:
                    nxt = pull(cur, h)
                    val = primal_load(g, sol, nxt)
                    if val < best and (step is None or val < step[0]):
                        step = (val, nxt)
        if step is None:
            break
        best, cur = step
        pulls += 1
    return LoadReport(tuple(Q), False, primal_load(g, sol, Q), best, pulls, _handle_counts(first))


@dataclass(frozen=True)
class RootedRing:
    """Outer face c1, inner face c2, and a reference dual walk from c1 to c2."""

    c1: int
    c2: int
    walk: tuple[int, ...]

    def check(self, g: PlaneMultigraph) -> None:
        f = self.c1
        for b in self.walk:
            if g.face_of[b] != f:
                raise ValueError("reference walk is not a dual walk from c1")
            f = g.face_of[b ^ 1]
        if f != self.c2:
            raise ValueError("reference walk does not end at c2")


def dual_walk_through(g: PlaneMultigraph, start_face: int, edges: Sequence[int]) -> tuple[int, ...]:
    """Orient a sequence of primal edges into a dual walk starting at ``start_face``."""
    f = start_face
    out = []
    for e in edges:
        b = 2 * e if g.face_of[2 * e] == f else 2 * e + 1
        if g.face_of[b] != f:
            raise ValueError(f"edge {e} is not on face {f}")
        out.append(b)
        f = g.face_of[b ^ 1]
    return tuple(out)


def winding_number(g: PlaneMultigraph, P: Sequence[int], ring: RootedRing) -> int:
    """Signed crossings of P with the reference walk: +1 left to right, -1 right to left.

    A step of the walk along dart b runs from the face left of b to the face
    right of b, so P traversing b itself crosses from the walk's right to its left.
    """
    w = {b >> 1: b for b in ring.walk}
    total = 0
    for u, v in zip(P, P[1:]):
        d = g.dart(u, v)
        if d >> 1 in w:
            total += -1 if d == w[d >> 1] else 1
    return total


def closed_winding(g: PlaneMultigraph, cycle: Sequence[int], ring: RootedRing) -> int:
    return winding_number(g, list(cycle) + [cycle[0]], ring)
