"""Problem instances, the nice reduction, the planar-DAG reduction and the exact oracle."""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from . import kernels
from .errors import FormatError, LimitExceeded
from .geodesics import distances, is_geodesic, st_dag
from .plane import PlaneMultigraph

Pair = tuple[int, int]


@dataclass(frozen=True)
class DspInstance:
    graph: PlaneMultigraph
    terminals: tuple[Pair, ...]
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if not self.terminals:
            raise FormatError("at least one terminal pair required")
        for s, t in self.terminals:
            if not (0 <= s < self.graph.n and 0 <= t < self.graph.n):
                raise FormatError(f"terminal pair {(s, t)} out of range")
            if s == t:
                raise FormatError(f"terminal pair {(s, t)} repeats a vertex")

    @property
    def k(self) -> int:
        return len(self.terminals)

    def terminal_set(self) -> set[int]:
        return {v for p in self.terminals for v in p}


@dataclass(frozen=True)
class DapInstance:
    """Annotated instance: pair ``i`` may only use the darts in ``annotations[i]``."""

    graph: PlaneMultigraph
    terminals: tuple[Pair, ...]
    annotations: tuple[frozenset[int], ...]

    @property
    def k(self) -> int:
        return len(self.terminals)

    def terminal_set(self) -> set[int]:
        return {v for p in self.terminals for v in p}


@dataclass(frozen=True)
class NiceInstance(DspInstance):
    """A nice instance plus provenance back to the instance it came from.

    ``origin[v]`` is the source vertex of ``v`` (``None`` for pendant terminals)
    and ``pair_ids[i]`` is the index of pair ``i`` in the source instance.
    """

    origin: tuple[int | None, ...] = ()
    pair_ids: tuple[int, ...] = ()
    flags: tuple[bool, bool, bool, bool] = (False, False, False, False)


@dataclass(frozen=True)
class NoReport:
    reason: str


@dataclass(frozen=True)
class Solution:
    paths: tuple[tuple[int, ...], ...]

    @staticmethod
    def of(paths: Iterable[Sequence[int]]) -> "Solution":
        return Solution(tuple(tuple(p) for p in paths))


def subgraph(
    g: PlaneMultigraph, keep_vertices: Sequence[int], keep_edges: Iterable[int]
) -> tuple[PlaneMultigraph, dict[int, int], list[int]]:
    """Induced embedding on the kept edges; vertices keep their relative order.

    Returns the graph, the old->new vertex map and the new->old edge list.
    """
    vs = sorted(set(keep_vertices))
    vmap = {v: i for i, v in enumerate(vs)}
    es = sorted(set(keep_edges))
    emap = {e: i for i, e in enumerate(es)}
    ends = [(vmap[g.eu[e]], vmap[g.ev[e]]) for e in es]
    rotation = []
    for v in vs:
        r = []
        for d in g.rot[v]:
            e = d >> 1
            if e in emap:
                r.append(2 * emap[e] + (d & 1))
        rotation.append(r)
    outer = None
    for d in g.faces[g.outer] if g.outer >= 0 else ():
        if (d >> 1) in emap:
            outer = 2 * emap[d >> 1] + (d & 1)
            break
    h = PlaneMultigraph(len(vs), ends, [g.weight[e] for e in es], rotation, outer)
    return h, vmap, es


def with_pendants(g: PlaneMultigraph, anchors: Sequence[int]) -> PlaneMultigraph:
    """Attach one weight-1 pendant vertex to each anchor, appended after its rotation."""
    n0 = g.n
    ends = [(g.eu[e], g.ev[e]) for e in range(g.m)]
    weights = list(g.weight)
    rotation = [list(r) for r in g.rot]
    for i, a in enumerate(anchors):
        e = len(ends)
        ends.append((a, n0 + i))
        weights.append(Fraction(1))
        rotation[a].append(2 * e)
        rotation.append([2 * e + 1])
    outer = g.faces[g.outer][0] if g.outer >= 0 and g.faces else None
    return PlaneMultigraph(n0 + len(anchors), ends, weights, rotation, outer)


def make_nice(inst: DspInstance) -> list[NiceInstance] | NoReport:
    g = inst.graph
    seen: set[int] = set()
    for s, t in inst.terminals:
        for v in (s, t):
            if v in seen:
                return NoReport(f"terminal {v} appears twice")
            seen.add(v)
    comp_of = {}
    for c, comp in enumerate(g.components()):
        for v in comp:
            comp_of[v] = c
    for s, t in inst.terminals:
        if comp_of[s] != comp_of[t]:
            return NoReport(f"pair {(s, t)} lies in different components")
    anchors = [v for p in inst.terminals for v in p]
    h = with_pendants(g, anchors)
    pend = {a: g.n + i for i, a in enumerate(anchors)}
    oracle = distances(h)
    used: set[int] = set()
    for s, t in inst.terminals:
        used |= st_dag(h, oracle, pend[s], pend[t]).edges()
    verts = {h.eu[e] for e in used} | {h.ev[e] for e in used}
    sub, vmap, _ = subgraph(h, sorted(verts), used)
    out = []
    for comp in sub.components():
        cs = set(comp)
        pair_ids = tuple(i for i, (s, t) in enumerate(inst.terminals) if vmap[pend[s]] in cs)
        if not pair_ids:
            continue
        inv = {nv: ov for ov, nv in vmap.items()}
        keep_e = [e for e in range(sub.m) if sub.eu[e] in cs]
        piece, pmap, _ = subgraph(sub, comp, keep_e)
        origin = [None] * piece.n
        for v in comp:
            ov = inv[v]
            origin[pmap[v]] = ov if ov < g.n else None
        terms = tuple(
            (pmap[vmap[pend[inst.terminals[i][0]]]], pmap[vmap[pend[inst.terminals[i][1]]]])
            for i in pair_ids
        )
        out.append(
            NiceInstance(
                piece, terms, dict(inst.meta), tuple(origin), pair_ids, (True, True, True, True)
            )
        )
    return out


def check_nice(inst: DspInstance) -> tuple[bool, bool, bool, bool]:
    """Flags for: connected, no repeated terminal, terminals of degree 1, every edge on a dag."""
    g = inst.graph
    vs = [v for p in inst.terminals for v in p]
    oracle = distances(g)
    used: set[int] = set()
    for s, t in inst.terminals:
        used |= st_dag(g, oracle, s, t).edges()
    return (
        g.is_connected(),
        len(set(vs)) == len(vs),
        all(g.degree(v) == 1 for v in vs),
        used == set(range(g.m)),
    )


def nice_solution_to_source(nice: NiceInstance, sol: Solution) -> dict[int, tuple[int, ...]]:
    """Map a nice-instance solution to the source graph, keyed by source pair index."""
    out = {}
    for i, path in zip(nice.pair_ids, sol.paths):
        inner = [nice.origin[v] for v in path[1:-1]]
        if any(v is None for v in inner):
            raise FormatError("pendant vertex inside a solution path")
        out[i] = tuple(inner)
    return out


def source_solution_to_nice(nice: NiceInstance, paths: dict[int, Sequence[int]]) -> Solution:
    back = {o: v for v, o in enumerate(nice.origin) if o is not None}
    res = []
    for i, (s, t) in zip(nice.pair_ids, nice.terminals):
        res.append((s,) + tuple(back[v] for v in paths[i]) + (t,))
    return Solution(tuple(res))


def annotate(inst: DspInstance) -> DapInstance:
    oracle = distances(inst.graph)
    anns = tuple(st_dag(inst.graph, oracle, s, t).arcs for s, t in inst.terminals)
    return DapInstance(inst.graph, inst.terminals, anns)


def lex_topological_order(n: int, arcs: Iterable[tuple[int, int]]) -> list[int]:
    succ: list[list[int]] = [[] for _ in range(n)]
    indeg = [0] * n
    for u, v in arcs:
        succ[u].append(v)
        indeg[v] += 1
    heap = [v for v in range(n) if indeg[v] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        u = heapq.heappop(heap)
        order.append(u)
        for v in succ[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                heapq.heappush(heap, v)
    if len(order) != n:
        raise FormatError("input digraph has a directed cycle")
    return order


def _reachable(n: int, arcs: Iterable[tuple[int, int]], s: int) -> set[int]:
    succ: list[list[int]] = [[] for _ in range(n)]
    for u, v in arcs:
        succ[u].append(v)
    seen = {s}
    stack = [s]
    while stack:
        u = stack.pop()
        for v in succ[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


def reduce_dag_to_dsp(
    dag: PlaneMultigraph, pairs: Sequence[Pair]
) -> tuple[DspInstance, list[int]] | NoReport:
    """Planar DAG (edge ``e`` oriented ``eu -> ev``) to a unit-weight DSP instance.

    Arc ``(v_i, v_j)`` in the lexicographically least topological order becomes a
    path of ``j - i`` unit edges. Returns the instance and the map from DSP
    vertices to DAG vertices (-1 for subdivision vertices).
    """
    arcs = [(dag.eu[e], dag.ev[e]) for e in range(dag.m)]
    for s, t in pairs:
        if t not in _reachable(dag.n, arcs, s):
            return NoReport(f"{t} is not reachable from {s}")
    order = lex_topological_order(dag.n, arcs)
    rank = {v: i for i, v in enumerate(order)}
    ends: list[tuple[int, int]] = []
    rotation: list[list[int]] = [[] for _ in range(dag.n)]
    first_dart: dict[int, int] = {}
    last_dart: dict[int, int] = {}
    back = list(range(dag.n))
    for e, (u, v) in enumerate(arcs):
        steps = rank[v] - rank[u]
        chain = [u]
        for _ in range(steps - 1):
            chain.append(len(back))
            back.append(-1)
            rotation.append([])
        chain.append(v)
        for a, b in zip(chain, chain[1:]):
            ends.append((a, b))
        base = len(ends) - steps
        first_dart[e] = 2 * base
        last_dart[e] = 2 * (base + steps - 1) + 1
        for j in range(1, steps):
            w = chain[j]
            rotation[w] = [2 * (base + j - 1) + 1, 2 * (base + j)]
    for x in range(dag.n):
        r = []
        for d in dag.rot[x]:
            e = d >> 1
            r.append(first_dart[e] if d & 1 == 0 else last_dart[e])
        rotation[x] = r
    g = PlaneMultigraph(len(back), ends, [1] * len(ends), rotation)
    return DspInstance(g, tuple((s, t) for s, t in pairs)), back


@dataclass(frozen=True)
class OracleLimits:
    max_vertices: int = 400
    node_cap: int = 2_000_000
    max_solutions: int = 1


def _succ_lists(g: PlaneMultigraph, darts: frozenset[int]) -> list[list[int]]:
    succ: list[list[int]] = [[] for _ in range(g.n)]
    for d in darts:
        succ[g.tail(d)].append(g.head(d))
    for row in succ:
        row.sort()
    return succ


def all_solutions(inst: DspInstance | DapInstance, limits: OracleLimits = OracleLimits()) -> list[Solution]:
    """Solutions in canonical order, at most ``limits.max_solutions`` of them."""
    g = inst.graph
    if g.n > limits.max_vertices:
        raise LimitExceeded(f"{g.n} vertices exceed the cap {limits.max_vertices}")
    dap = inst if isinstance(inst, DapInstance) else annotate(inst)
    vs = [v for p in dap.terminals for v in p]
    if len(set(vs)) != len(vs):
        return []
    succ = [_succ_lists(g, a) for a in dap.annotations]
    try:
        sols, _ = kernels.disjoint_paths(
            g.n, succ, [s for s, _ in dap.terminals], [t for _, t in dap.terminals],
            limits.max_solutions, limits.node_cap,
        )
    except kernels.KernelLimit as exc:
        raise LimitExceeded(f"search exceeded {limits.node_cap} nodes") from exc
    return [Solution.of(s) for s in sols]


def brute_force_solve(inst: DspInstance | DapInstance, limits: OracleLimits = OracleLimits()) -> Solution | None:
    sols = all_solutions(inst, OracleLimits(limits.max_vertices, limits.node_cap, 1))
    return sols[0] if sols else None


def dag_disjoint_paths(dag: PlaneMultigraph, pairs: Sequence[Pair], limits: OracleLimits = OracleLimits()) -> Solution | None:
    """Directed vertex-disjoint paths in a DAG whose edges point ``eu -> ev``."""
    darts = frozenset(2 * e for e in range(dag.m))
    anns = tuple(darts for _ in pairs)
    vs = [v for p in pairs for v in p]
    if len(set(vs)) != len(vs):
        return None
    return brute_force_solve(DapInstance(dag, tuple(pairs), anns), limits)


def check(inst: DspInstance | DapInstance, sol: Solution) -> dict[str, bool]:
    """Per-invariant verdicts for a candidate solution."""
    g = inst.graph
    rep = {
        "pair_count": len(sol.paths) == inst.k,
        "endpoints": True,
        "edges_exist": True,
        "simple": True,
        "disjoint": True,
    }
    if not rep["pair_count"]:
        return rep
    seen: set[int] = set()
    for (s, t), p in zip(inst.terminals, sol.paths):
        if not p or p[0] != s or p[-1] != t:
            rep["endpoints"] = False
        if len(set(p)) != len(p):
            rep["simple"] = False
        if seen & set(p):
            rep["disjoint"] = False
        seen |= set(p)
        if any(not g.has_edge(u, v) for u, v in zip(p, p[1:])):
            rep["edges_exist"] = False
    if isinstance(inst, DapInstance):
        ok = True
        for a, p in zip(inst.annotations, sol.paths):
            for u, v in zip(p, p[1:]):
                if not any(g.head(d) == v and d in a for d in g.rot[u]):
                    ok = False
        rep["in_annotations"] = ok
    else:
        oracle = distances(g)
        rep["geodesic"] = rep["edges_exist"] and all(is_geodesic(g, oracle, p) for p in sol.paths)
    return rep


def is_valid(inst: DspInstance | DapInstance, sol: Solution) -> bool:
    return all(check(inst, sol).values())
