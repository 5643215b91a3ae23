"""Embedded planar multigraphs given by rotation systems.

Edge ``e`` owns the two darts ``2e`` (``eu[e] -> ev[e]``) and ``2e + 1`` (the
reverse). Every vertex lists its darts in clockwise order. Following
``next(d) = clockwise successor of rev(d)`` at ``head(d)`` walks the face that
lies to the left of ``d``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import CyclesCross, Disconnected, EmbeddingError, SideNotConnected


def rev(d: int) -> int:
    return d ^ 1


def edge_of(d: int) -> int:
    return d >> 1


class PlaneMultigraph:
    """Immutable plane multigraph with precomputed faces."""

    __slots__ = (
        "n", "m", "eu", "ev", "weight", "rot", "pos", "face_of", "faces",
        "outer", "_dart_index",
    )

    def __init__(
        self,
        n: int,
        ends: Sequence[tuple[int, int]],
        weights: Sequence[Fraction | int],
        rotation: Sequence[Sequence[int]],
        outer_dart: int | None = None,
    ) -> None:
        self.n = n
        self.m = len(ends)
        self.eu = tuple(u for u, _ in ends)
        self.ev = tuple(v for _, v in ends)
        self.weight = tuple(Fraction(w) for w in weights)
        if len(self.weight) != self.m:
            raise EmbeddingError("one weight per edge required")
        if any(w <= 0 for w in self.weight):
            raise EmbeddingError("weights must be strictly positive")
        if len(rotation) != n:
            raise EmbeddingError("one rotation per vertex required")
        self.rot = tuple(tuple(r) for r in rotation)
        pos = [-1] * (2 * self.m)
        for v, r in enumerate(self.rot):
            for i, d in enumerate(r):
                if not 0 <= d < 2 * self.m or pos[d] != -1:
                    raise EmbeddingError(f"dart {d} listed twice or out of range")
                if self.tail(d) != v:
                    raise EmbeddingError(f"dart {d} does not leave vertex {v}")
                pos[d] = i
        if -1 in pos:
            raise EmbeddingError(f"dart {pos.index(-1)} missing from rotations")
        self.pos = tuple(pos)
        self._dart_index: dict[tuple[int, int], int] | None = None
        self._trace_faces()
        self._euler_check()
        if outer_dart is not None:
            self.outer = self.face_of[outer_dart]
        elif self.faces:
            self.outer = max(range(len(self.faces)), key=lambda f: (len(self.faces[f]), -f))
        else:
            self.outer = -1

    # darts
    def tail(self, d: int) -> int:
        e = d >> 1
        return self.eu[e] if d & 1 == 0 else self.ev[e]

    def head(self, d: int) -> int:
        e = d >> 1
        return self.ev[e] if d & 1 == 0 else self.eu[e]

    def dart_weight(self, d: int) -> Fraction:
        return self.weight[d >> 1]

    def next_in_face(self, d: int) -> int:
        r = rev(d)
        rr = self.rot[self.head(d)]
        return rr[(self.pos[r] + 1) % len(rr)]

    def left_face(self, d: int) -> int:
        return self.face_of[d]

    def right_face(self, d: int) -> int:
        return self.face_of[d ^ 1]

    def degree(self, v: int) -> int:
        return len(self.rot[v])

    def neighbors(self, v: int) -> list[int]:
        return [self.head(d) for d in self.rot[v]]

    def darts(self) -> range:
        return range(2 * self.m)

    def dart(self, u: int, v: int) -> int:
        """Some dart from ``u`` to ``v`` (lowest id). KeyError when absent."""
        if self._dart_index is None:
            idx: dict[tuple[int, int], int] = {}
            for d in range(2 * self.m - 1, -1, -1):
                idx[(self.tail(d), self.head(d))] = d
            self._dart_index = idx
        return self._dart_index[(u, v)]

    def has_edge(self, u: int, v: int) -> bool:
        try:
            self.dart(u, v)
        except KeyError:
            return False
        return True

    # faces
    def _trace_faces(self) -> None:
        face_of = [-1] * (2 * self.m)
        faces: list[tuple[int, ...]] = []
        for d0 in range(2 * self.m):
            if face_of[d0] != -1:
                continue
            walk = []
            d = d0
            while face_of[d] == -1:
                face_of[d] = len(faces)
                walk.append(d)
                d = self.next_in_face(d)
            if d != d0:
                raise EmbeddingError("face traversal is not a permutation")
            faces.append(tuple(walk))
        self.face_of = tuple(face_of)
        self.faces = tuple(faces)

    def components(self) -> list[list[int]]:
        seen = [False] * self.n
        comps = []
        for s in range(self.n):
            if seen[s]:
                continue
            seen[s] = True
            comp = [s]
            q = deque([s])
            while q:
                u = q.popleft()
                for d in self.rot[u]:
                    w = self.head(d)
                    if not seen[w]:
                        seen[w] = True
                        comp.append(w)
                        q.append(w)
            comps.append(sorted(comp))
        return comps

    def is_connected(self) -> bool:
        return self.n <= 1 or len(self.components()) == 1

    def _euler_check(self) -> None:
        for comp in self.components():
            cs = set(comp)
            edges = {d >> 1 for v in comp for d in self.rot[v]}
            nf = len({self.face_of[d] for v in comp for d in self.rot[v]}) or 1
            if len(comp) - len(edges) + nf != 2:
                raise EmbeddingError(
                    f"Euler check failed on component of {min(cs)}: "
                    f"V={len(comp)} E={len(edges)} F={nf}"
                )

    def face_vertices(self, f: int) -> list[int]:
        return [self.tail(d) for d in self.faces[f]]

    def induced_connected(self, vs: Iterable[int]) -> bool:
        vs = set(vs)
        if not vs:
            return False
        start = next(iter(vs))
        seen = {start}
        q = [start]
        while q:
            u = q.pop()
            for d in self.rot[u]:
                w = self.head(d)
                if w in vs and w not in seen:
                    seen.add(w)
                    q.append(w)
        return len(seen) == len(vs)

    def edges_between(self, a: set[int] | frozenset[int], b: set[int] | frozenset[int]) -> list[int]:
        """Darts leaving ``a`` into ``b``."""
        return [d for u in sorted(a) for d in self.rot[u] if self.head(d) in b]

    def path_length(self, path: Sequence[int]) -> Fraction:
        return sum((self.dart_weight(self.dart(u, v)) for u, v in zip(path, path[1:])), Fraction(0))


def build(
    n: int,
    ends: Sequence[tuple[int, int]],
    rotations: Sequence[Sequence[int]],
    weights: Sequence[Fraction | int],
    outer_face_hint: int | None = None,
) -> PlaneMultigraph:
    """Build from per-vertex rotations given as edge ids (clockwise).

    A loop appears twice in its vertex's list: first occurrence is dart ``2e``,
    second is ``2e + 1``.
    """
    rotation = []
    for v, r in enumerate(rotations):
        out = []
        used: set[int] = set()
        for e in r:
            if not 0 <= e < len(ends):
                raise EmbeddingError(f"edge id {e} out of range at vertex {v}")
            u, w = ends[e]
            if u == w:
                d = 2 * e if 2 * e not in used else 2 * e + 1
            elif u == v:
                d = 2 * e
            elif w == v:
                d = 2 * e + 1
            else:
                raise EmbeddingError(f"edge {e} is not incident to vertex {v}")
            used.add(d)
            out.append(d)
        rotation.append(out)
    return PlaneMultigraph(n, ends, weights, rotation, outer_face_hint)


def faces(g: PlaneMultigraph) -> list[tuple[int, tuple[int, ...], bool]]:
    """(face id, boundary dart walk, outer flag) for every face."""
    return [(f, walk, f == g.outer) for f, walk in enumerate(g.faces)]


@dataclass(frozen=True)
class DualGraph:
    """Dual of a connected plane graph; dual dart ``d`` runs left_face(d) -> right_face(d)."""

    host: PlaneMultigraph

    @property
    def vertices(self) -> range:
        return range(len(self.host.faces))

    def arc(self, d: int) -> tuple[int, int]:
        return self.host.face_of[d], self.host.face_of[d ^ 1]

    def edges(self) -> list[tuple[int, int]]:
        return [self.arc(2 * e) for e in range(self.host.m)]

    def out_darts(self, f: int) -> tuple[int, ...]:
        return self.host.faces[f]

    def rotation(self, f: int) -> tuple[int, ...]:
        """Clockwise order of dual darts leaving face ``f``."""
        return tuple(reversed(self.host.faces[f]))

    def is_loop(self, e: int) -> bool:
        a, b = self.arc(2 * e)
        return a == b


def dual(g: PlaneMultigraph) -> DualGraph:
    if not g.is_connected():
        raise Disconnected("dual requires a connected plane graph")
    return DualGraph(g)


@dataclass(frozen=True)
class DualCycle:
    """Dual cycle separating ``inside`` from ``outside``.

    ``darts`` are the cut darts oriented inside -> outside, in cycle order: the
    right face of each dart is the left face of the next one.
    """

    darts: tuple[int, ...]
    inside: frozenset[int]
    outside: frozenset[int]

    def faces(self, g: PlaneMultigraph) -> list[int]:
        return [g.face_of[d] for d in self.darts]

    @property
    def edges(self) -> frozenset[int]:
        return frozenset(d >> 1 for d in self.darts)


def separating_dual_cycle(g: PlaneMultigraph, a: Iterable[int]) -> DualCycle:
    a = frozenset(a)
    b = frozenset(range(g.n)) - a
    if not a or not b or not g.induced_connected(a) or not g.induced_connected(b):
        raise SideNotConnected("both sides must induce non-empty connected subgraphs")
    cut = g.edges_between(a, b)
    by_left: dict[int, int] = {}
    for d in cut:
        f = g.face_of[d]
        if f in by_left:
            raise SideNotConnected("cut does not form a simple dual cycle")
        by_left[f] = d
    start = min(cut)
    order = [start]
    d = start
    while True:
        nxt = by_left.get(g.face_of[d ^ 1])
        if nxt is None:
            raise SideNotConnected("cut does not close up into a dual cycle")
        if nxt == start:
            break
        order.append(nxt)
        d = nxt
        if len(order) > len(cut):
            raise SideNotConnected("dual walk does not close")
    if len(order) != len(cut):
        raise SideNotConnected("cut splits into several dual cycles")
    return DualCycle(tuple(order), a, b)


@dataclass(frozen=True)
class Footprint:
    vertices: frozenset[int]
    edges: frozenset[int]
    faces: frozenset[int]

    def disjoint(self, other: "Footprint") -> bool:
        return (
            not (self.vertices & other.vertices)
            and not (self.edges & other.edges)
            and not (self.faces & other.faces)
        )

    def is_empty(self) -> bool:
        return not (self.vertices or self.edges or self.faces)


def region_footprint(g: PlaneMultigraph, c1: DualCycle, c2: DualCycle) -> Footprint:
    """Open ring between two nested separating dual cycles.

    Vertices strictly between the cycles, edges with an endpoint there or
    crossed by exactly one cycle, and faces off both cycles whose boundary
    lies between them.
    """
    a1, a2 = c1.inside, c2.inside
    if a2 < a1 or a2 == a1:
        a1, a2, c1, c2 = a2, a1, c2, c1
    if not a1 <= a2:
        raise CyclesCross("cycles are not nested")
    mid = a2 - a1
    e1, e2 = c1.edges, c2.edges
    edges = {e for e in range(g.m) if g.eu[e] in mid or g.ev[e] in mid}
    edges |= e1 ^ e2
    on_cycle = {g.face_of[d] for c in (c1, c2) for d in c.darts} | {
        g.face_of[d ^ 1] for c in (c1, c2) for d in c.darts
    }
    fs = set()
    for f, walk in enumerate(g.faces):
        if f in on_cycle:
            continue
        if all(g.tail(d) in mid for d in walk):
            fs.add(f)
    return Footprint(frozenset(mid), frozenset(edges), frozenset(fs))


def subgraph_edges_connected(g: PlaneMultigraph, edges: Iterable[int], vertices: Iterable[int]) -> bool:
    """True if ``vertices`` lie in one component of the edge subgraph."""
    adj: dict[int, list[int]] = {}
    for e in edges:
        adj.setdefault(g.eu[e], []).append(g.ev[e])
        adj.setdefault(g.ev[e], []).append(g.eu[e])
    vs = list(vertices)
    if not vs:
        return True
    seen = {vs[0]}
    stack = [vs[0]]
    while stack:
        u = stack.pop()
        for w in adj.get(u, ()):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return all(v in seen for v in vs)
