"""Exact shortest-path machinery: distances, (s,t)-dags and geodesic checks."""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import InvariantViolation, NotShortestReplacement
from .plane import PlaneMultigraph


class DistanceOracle:
    """All-pairs exact distances; ``None`` marks unreachable pairs."""

    def __init__(self, g: PlaneMultigraph) -> None:
        self.g = g
        self._rows = [_dijkstra(g, s) for s in range(g.n)]

    def d(self, u: int, v: int) -> Fraction | None:
        return self._rows[u][v]

    def row(self, u: int) -> list[Fraction | None]:
        return self._rows[u]


def _dijkstra(g: PlaneMultigraph, s: int) -> list[Fraction | None]:
    dist: list[Fraction | None] = [None] * g.n
    dist[s] = Fraction(0)
    heap = [(Fraction(0), s)]
    done = [False] * g.n
    while heap:
        du, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for dt in g.rot[u]:
            v = g.head(dt)
            nd = du + g.weight[dt >> 1]
            if dist[v] is None or nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def distances(g: PlaneMultigraph) -> DistanceOracle:
    return DistanceOracle(g)


@dataclass(frozen=True)
class OrientedDag:
    s: int
    t: int
    arcs: frozenset[int]

    def __contains__(self, dart: int) -> bool:
        return dart in self.arcs

    def reversed(self) -> "OrientedDag":
        return OrientedDag(self.t, self.s, frozenset(d ^ 1 for d in self.arcs))

    def edges(self) -> frozenset[int]:
        return frozenset(d >> 1 for d in self.arcs)


def st_dag(g: PlaneMultigraph, oracle: DistanceOracle, s: int, t: int) -> OrientedDag:
    ds, dt = oracle.row(s), oracle.row(t)
    total = ds[t]
    if total is None:
        return OrientedDag(s, t, frozenset())
    arcs = set()
    for d in range(2 * g.m):
        u, v = g.tail(d), g.head(d)
        if ds[u] is not None and dt[v] is not None and ds[u] + g.weight[d >> 1] + dt[v] == total:
            arcs.add(d)
    for d in arcs:
        if not ds[g.tail(d)] < ds[g.head(d)]:
            raise InvariantViolation("dag arc does not increase distance from s")
    return OrientedDag(s, t, frozenset(arcs))


def path_darts(g: PlaneMultigraph, path: Sequence[int]) -> list[int]:
    """Darts of a vertex sequence, choosing the lightest parallel dart."""
    out = []
    for u, v in zip(path, path[1:]):
        best = None
        for d in g.rot[u]:
            if g.head(d) == v and (best is None or g.weight[d >> 1] < g.weight[best >> 1]):
                best = d
        if best is None:
            raise ValueError(f"no edge {u}-{v}")
        out.append(best)
    return out


def path_length(g: PlaneMultigraph, path: Sequence[int]) -> Fraction:
    return sum((g.weight[d >> 1] for d in path_darts(g, path)), Fraction(0))


def is_geodesic(g: PlaneMultigraph, oracle: DistanceOracle, path: Sequence[int]) -> bool:
    if len(set(path)) != len(path):
        return False
    if len(path) <= 1:
        return True
    try:
        return path_length(g, path) == oracle.d(path[0], path[-1])
    except ValueError:
        return False


def check_monotone_crossings(p: Sequence[int], q: Sequence[int]) -> bool:
    """Common vertices appear in the same or exactly reversed order on P and Q."""
    pi = {v: i for i, v in enumerate(p)}
    common = [v for v in q if v in pi]
    order = [pi[v] for v in common]
    return order == sorted(order) or order == sorted(order, reverse=True)


def splice(
    g: PlaneMultigraph, oracle: DistanceOracle, p: Sequence[int], u: int, v: int, q_uv: Sequence[int]
) -> list[int]:
    i, j = p.index(u), p.index(v)
    if i > j:
        raise ValueError("u must precede v on P")
    if q_uv[0] != u or q_uv[-1] != v or not is_geodesic(g, oracle, q_uv):
        raise NotShortestReplacement("replacement is not a shortest (u,v)-path")
    out = list(p[:i]) + list(q_uv) + list(p[j + 1:])
    if len(set(out)) != len(out) or not is_geodesic(g, oracle, out):
        raise InvariantViolation("splice produced a non-geodesic or non-simple path")
    return out


def shortest_path(g: PlaneMultigraph, sources: Sequence[int], target: int,
                  allowed: set[int] | None = None) -> list[int] | None:
    """Deterministic shortest path from the nearest source to ``target``."""
    dist: dict[int, Fraction] = {}
    pred: dict[int, int | None] = {}
    heap = []
    for s in sorted(set(sources)):
        dist[s] = Fraction(0)
        pred[s] = None
        heap.append((Fraction(0), s))
    heapq.heapify(heap)
    done = set()
    while heap:
        du, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        if u == target:
            break
        for d in g.rot[u]:
            v = g.head(d)
            if allowed is not None and v not in allowed:
                continue
            nd = du + g.weight[d >> 1]
            if v not in dist or nd < dist[v]:
                dist[v] = nd
                pred[v] = u
                heapq.heappush(heap, (nd, v))
    if target not in done:
        return None
    path = [target]
    while pred[path[-1]] is not None:
        path.append(pred[path[-1]])
    return path[::-1]
