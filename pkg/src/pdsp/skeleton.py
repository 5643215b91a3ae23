"""Geodesic Steiner trees, their refinement against a ring decomposition, and the dual skeleton."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import InvariantViolation
from .geodesics import distances, is_geodesic, shortest_path
from .instances import DapInstance, NiceInstance, NoReport, Solution, annotate
from .plane import PlaneMultigraph
from .rings import DagRing, DagStructure, RingContext, RingDecomposition, dag_structure

# spinal paths after refinement stay below this many per pair (measured, not proved)
REFINED_SPINAL_FACTOR = 16


def _tree_adjacency(g: PlaneMultigraph, edges: Iterable[int]) -> dict[int, list[int]]:
    """Vertex -> darts of tree edges leaving it, in rotation order."""
    es = set(edges)
    adj: dict[int, list[int]] = {}
    for e in sorted(es):
        adj.setdefault(g.eu[e], [])
        adj.setdefault(g.ev[e], [])
    for v in adj:
        adj[v] = [d for d in g.rot[v] if (d >> 1) in es]
    return adj


def spinal_decomposition(g: PlaneMultigraph, edges: Iterable[int],
                         principal: Iterable[int]) -> list[tuple[int, ...]]:
    """Maximal tree paths with non-principal interiors, as dart sequences.

    Each path is reported once, oriented from its smaller (start vertex, dart).
    """
    adj = _tree_adjacency(g, edges)
    principal = set(principal)
    out = []
    seen: set[int] = set()
    for p in sorted(v for v in adj if v in principal):
        for d in adj[p]:
            if (d >> 1) in seen:
                continue
            walk = [d]
            v = g.head(d)
            while v not in principal:
                nxt = [x for x in adj[v] if x != (walk[-1] ^ 1)]
                if len(nxt) != 1:
                    raise InvariantViolation(f"non-principal vertex {v} has tree degree {len(nxt) + 1}")
                walk.append(nxt[0])
                v = g.head(nxt[0])
            seen |= {x >> 1 for x in walk}
            out.append(tuple(walk))
    return out


def dart_vertices(g: PlaneMultigraph, darts: Sequence[int]) -> list[int]:
    return [g.tail(darts[0])] + [g.head(d) for d in darts]


@dataclass(frozen=True)
class SteinerTree:
    graph: PlaneMultigraph
    edges: frozenset[int]
    terminals: tuple[int, ...]
    principal: frozenset[int]
    spinal: tuple[tuple[int, ...], ...]

    def degree(self, v: int) -> int:
        return sum(1 for d in self.graph.rot[v] if (d >> 1) in self.edges)

    def vertices(self) -> set[int]:
        g = self.graph
        return {g.eu[e] for e in self.edges} | {g.ev[e] for e in self.edges}

    def spinal_vertex_paths(self) -> list[list[int]]:
        return [dart_vertices(self.graph, p) for p in self.spinal]


def make_tree(g: PlaneMultigraph, edges: Iterable[int], terminals: Sequence[int]) -> SteinerTree:
    edges = frozenset(edges)
    deg: dict[int, int] = {}
    for e in edges:
        for v in (g.eu[e], g.ev[e]):
            deg[v] = deg.get(v, 0) + 1
    principal = frozenset(terminals) | {v for v, c in deg.items() if c >= 3}
    spinal = spinal_decomposition(g, edges, principal) if edges else []
    return SteinerTree(g, edges, tuple(terminals), principal, tuple(spinal))


def _path_edges(g: PlaneMultigraph, path: Sequence[int]) -> list[int]:
    out = []
    for u, v in zip(path, path[1:]):
        best = min((d for d in g.rot[u] if g.head(d) == v), key=lambda d: (g.weight[d >> 1], d))
        out.append(best >> 1)
    return out


def geodesic_steiner_tree(inst: NiceInstance) -> SteinerTree:
    g = inst.graph
    order = [v for p in inst.terminals for v in p]
    first = shortest_path(g, [order[0]], order[1])
    if first is None:
        raise InvariantViolation("first terminal pair is disconnected")
    edges = set(_path_edges(g, first))
    verts = set(first)
    for v in order[2:]:
        if v in verts:
            continue
        p = shortest_path(g, sorted(verts), v)
        if p is None:
            raise InvariantViolation(f"terminal {v} unreachable from the tree")
        edges |= set(_path_edges(g, p))
        verts |= set(p)
    tree = make_tree(g, edges, order)
    oracle = distances(g)
    for path in tree.spinal_vertex_paths():
        if not is_geodesic(g, oracle, path):
            raise InvariantViolation(f"spinal path {path} is not a geodesic")
    return tree


def ring_linkage(g: PlaneMultigraph, structure: DagStructure, demand: int) -> list[list[int]] | None:
    """``demand`` vertex-disjoint directed T_X -> T_Y paths in the ring dag, by unit-capacity flow."""
    src, snk = ("s", -1), ("t", -1)
    cap: dict[tuple, int] = {}
    succ: dict[tuple, list[tuple]] = {}

    def add(a, b):
        if (a, b) not in cap:
            succ.setdefault(a, []).append(b)
            succ.setdefault(b, []).append(a)
            cap.setdefault((b, a), 0)
        cap[(a, b)] = cap.get((a, b), 0) + 1

    arcs = [(g.tail(d), g.head(d)) for d in sorted(structure.arcs)]
    verts = sorted(set(structure.tx) | set(structure.ty) | {x for a in arcs for x in a})
    for v in verts:
        add(("i", v), ("o", v))
    for v in sorted(structure.tx):
        add(src, ("i", v))
    for v in sorted(structure.ty):
        add(("o", v), snk)
    for u, v in arcs:
        add(("o", u), ("i", v))
    for _ in range(demand):
        prev = {src: None}
        q = deque([src])
        while q and snk not in prev:
            a = q.popleft()
            for b in succ.get(a, ()):
                if b not in prev and cap[(a, b)] > 0:
                    prev[b] = a
                    q.append(b)
        if snk not in prev:
            return None
        b = snk
        while prev[b] is not None:
            a = prev[b]
            cap[(a, b)] -= 1
            cap[(b, a)] += 1
            b = a
    nxt = {u: v for u, v in arcs if cap[(("i", v), ("o", u))] > 0 and cap[(("o", u), ("i", v))] == 0}
    paths = []
    for v in sorted(structure.tx):
        if cap[(src, ("i", v))] == 0:
            path = [v]
            while cap[(("o", path[-1]), snk)] if path[-1] in structure.ty else 1:
                path.append(nxt[path[-1]])
            paths.append(path)
    return paths


@dataclass(frozen=True)
class TransformedInstance:
    """An annotated instance derived from a previous graph by local surgery.

    ``origin[v]`` is the previous-graph vertex of ``v`` or None for new vertices,
    ``kind[v]`` is one of "v" (kept), "e" (ring-boundary subdivision), "m"
    (edge midpoint), "f" (face vertex). ``split[(u, w)]`` gives the vertex
    inserted between previous-graph neighbours u and w on usable edges.
    """

    dap: DapInstance
    origin: tuple[int | None, ...]
    kind: tuple[str, ...]
    split: dict[tuple[int, int], int] = field(compare=False)
    linkages: tuple[tuple[int, ...], ...] = ()

    def to_previous(self, sol: Solution) -> Solution:
        return Solution.of([self.origin[v] for v in p if self.origin[v] is not None] for p in sol.paths)

    def from_previous(self, sol: Solution) -> Solution:
        back = {o: v for v, o in enumerate(self.origin) if o is not None}
        out = []
        for p in sol.paths:
            q = [back[p[0]]]
            for u, w in zip(p, p[1:]):
                if (u, w) in self.split:
                    q.append(self.split[(u, w)])
                q.append(back[w])
            out.append(q)
        return Solution.of(out)


def _subdivided_darts(d: int, first: int, second: int) -> tuple[int, int]:
    """Darts of the two halves for dart ``d`` of edge e split into (eu, x)=first, (x, ev)=second."""
    if d & 1 == 0:
        return 2 * first, 2 * second
    return 2 * second + 1, 2 * first + 1


@dataclass(frozen=True)
class RefineResult:
    transformed: TransformedInstance
    tree: SteinerTree
    excised: bool
    structures: tuple[DagStructure, ...]


def refine(inst: NiceInstance, tree: SteinerTree, decomp: RingDecomposition,
           ctx: RingContext | None = None) -> RefineResult | NoReport:
    g = inst.graph
    ctx = ctx or RingContext(inst, [v for p in inst.terminals for v in p])
    dap0 = annotate(inst)
    boundary: dict[int, tuple[int, int, int]] = {}  # edge -> (cycle id, index, dart)
    cycles: list[tuple[int, ...]] = []
    for ring in decomp.rings:
        for cyc in (ring.cycle1, ring.cycle2):
            cid = len(cycles)
            cycles.append(cyc.darts)
            for j, d in enumerate(cyc.darts):
                if d >> 1 in boundary:
                    raise InvariantViolation("ring boundaries share an edge")
                boundary[d >> 1] = (cid, j, d)
    n2 = g.n
    ends = [(g.eu[e], g.ev[e]) for e in range(g.m)]
    vnew: dict[int, int] = {}
    second: dict[int, int] = {}
    for e in sorted(boundary):
        x = n2
        n2 += 1
        vnew[e] = x
        second[e] = len(ends)
        ends[e] = (g.eu[e], x)
        ends.append((x, g.ev[e]))
    cycle_edges: list[list[int]] = []
    for darts in cycles:
        ids = []
        if len(darts) >= 2:
            for j, d in enumerate(darts):
                nd = darts[(j + 1) % len(darts)]
                ids.append(len(ends))
                ends.append((vnew[d >> 1], vnew[nd >> 1]))
        cycle_edges.append(ids)
    rot: list[list[int]] = [[] for _ in range(n2)]
    for v in range(g.n):
        r = []
        for d in g.rot[v]:
            e = d >> 1
            r.append(2 * second[e] + 1 if (e in boundary and d & 1) else d)
        rot[v] = r
    for e, (cid, j, d) in boundary.items():
        x = vnew[e]
        to_eu, to_ev = 2 * e + 1, 2 * second[e]
        to_u, to_w = (to_eu, to_ev) if d & 1 == 0 else (to_ev, to_eu)
        ids = cycle_edges[cid]
        if ids:
            prev_e = ids[(j - 1) % len(ids)]
            next_e = ids[j]
            rot[x] = [to_u, 2 * prev_e + 1, to_w, 2 * next_e]
        else:
            rot[x] = [to_u, to_w]
    outer = None
    if g.outer >= 0:
        d = g.faces[g.outer][0]
        e = d >> 1
        outer = (2 * second[e] + 1 if d & 1 else d) if e in boundary else d
    g2 = PlaneMultigraph(n2, ends, [1] * len(ends), rot, outer)
    anns = []
    for a in dap0.annotations:
        s = set()
        for d in a:
            e = d >> 1
            if e in boundary:
                s.update(_subdivided_darts(d, e, second[e]))
            else:
                s.add(d)
        anns.append(frozenset(s))
    split = {}
    for e in boundary:
        u, w = g.eu[e], g.ev[e]
        split[(u, w)] = split[(w, u)] = vnew[e]
    origin = tuple(list(range(g.n)) + [None] * (n2 - g.n))
    kind = tuple(["v"] * g.n + ["e"] * (n2 - g.n))

    # tree surgery
    def lift(e: int) -> list[int]:
        return [e, second[e]] if e in boundary else [e]

    structures = []
    linkages = []
    for ring in decomp.rings:
        st = dag_structure(ctx, ring)
        if st.violations:
            raise InvariantViolation("; ".join(st.violations))
        structures.append(st)
        paths = ring_linkage(g, st, len(ring.part.split))
        if paths is None:
            return NoReport("ring cannot host one disjoint path per split pair")
        linkages.append(tuple(paths[0]))
    terminals = [v for p in inst.terminals for v in p]
    base = {x for e in tree.edges for x in lift(e)}
    mids = set().union(*(r.umid for r in decomp.rings)) if decomp.rings else set()
    kept = {x for x in base if ends[x][0] not in mids and ends[x][1] not in mids}
    connectors = _prune_connectors(g2, kept, set(terminals), cycles, vnew)
    kept -= connectors
    extra = set()
    for ring, path in zip(decomp.rings, linkages):
        for u, w in zip(path, path[1:]):
            extra.add(g.dart(u, w) >> 1)
        d1 = min(d for d in ring.cycle1.darts if g.head(d) == path[0])
        d2 = min(d for d in ring.cycle2.darts if g.tail(d) == path[-1])
        extra.add(second[d1 >> 1] if d1 & 1 == 0 else d1 >> 1)
        extra.add(d2 >> 1 if d2 & 1 == 0 else second[d2 >> 1])
    cyc_all = [x for ids in cycle_edges for x in ids]
    chosen = _kruskal(g2, sorted(kept | extra), cyc_all)
    chosen = _prune_leaves(g2, chosen, set(terminals))
    excised = True
    t2 = make_tree(g2, chosen, terminals)
    if not _spans(g2, chosen, terminals):
        excised = False
        t2 = make_tree(g2, base, terminals)
    trans = TransformedInstance(
        DapInstance(g2, inst.terminals, tuple(anns)), origin, kind, split, tuple(linkages)
    )
    bound = REFINED_SPINAL_FACTOR * inst.k
    if len(t2.spinal) > bound:
        raise InvariantViolation(f"{len(t2.spinal)} spinal paths exceed {bound}")
    return RefineResult(trans, t2, excised, tuple(structures))


def _components(g: PlaneMultigraph, edges: Iterable[int]) -> list[tuple[set[int], set[int]]]:
    adj: dict[int, list[tuple[int, int]]] = {}
    for e in edges:
        adj.setdefault(g.eu[e], []).append((g.ev[e], e))
        adj.setdefault(g.ev[e], []).append((g.eu[e], e))
    seen: set[int] = set()
    out = []
    for s in sorted(adj):
        if s in seen:
            continue
        vs, es = {s}, set()
        stack = [s]
        seen.add(s)
        while stack:
            u = stack.pop()
            for w, e in adj[u]:
                es.add(e)
                if w not in seen:
                    seen.add(w)
                    vs.add(w)
                    stack.append(w)
        out.append((vs, es))
    return out


def _prune_connectors(g: PlaneMultigraph, edges: set[int], terminals: set[int],
                      cycles: list[tuple[int, ...]], vnew: dict[int, int]) -> set[int]:
    """Edges of terminal-free tree pieces that duplicate another piece's cycle contacts."""
    cycle_of = {}
    for cid, darts in enumerate(cycles):
        for d in darts:
            cycle_of[vnew[d >> 1]] = cid
    drop: set[int] = set()
    seen: set[frozenset[int]] = set()
    for vs, es in _components(g, edges):
        if vs & terminals:
            continue
        touched = frozenset(cycle_of[v] for v in vs if v in cycle_of)
        if len(touched) < 2 or touched in seen:
            drop |= es
        else:
            seen.add(touched)
    return drop


def _kruskal(g: PlaneMultigraph, first: Sequence[int], then: Sequence[int]) -> set[int]:
    parent = list(range(g.n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    out = set()
    for e in list(first) + list(then):
        a, b = find(g.eu[e]), find(g.ev[e])
        if a != b:
            parent[a] = b
            out.add(e)
    return out


def _prune_leaves(g: PlaneMultigraph, edges: set[int], keep: set[int]) -> set[int]:
    edges = set(edges)
    deg: dict[int, int] = {}
    for e in edges:
        for v in (g.eu[e], g.ev[e]):
            deg[v] = deg.get(v, 0) + 1
    changed = True
    while changed:
        changed = False
        for e in sorted(edges):
            for v in (g.eu[e], g.ev[e]):
                if deg[v] == 1 and v not in keep:
                    edges.discard(e)
                    deg[g.eu[e]] -= 1
                    deg[g.ev[e]] -= 1
                    changed = True
                    break
    return edges


def _spans(g: PlaneMultigraph, edges: set[int], terminals: Sequence[int]) -> bool:
    comps = _components(g, edges)
    return any(set(terminals) <= vs for vs, _ in comps)


# dual skeleton


@dataclass(frozen=True)
class Skeleton:
    """Tree ``K`` in the dual of the final graph.

    ``edges`` are primal edge ids whose duals form K. Spinal paths are stored
    as sequences of primal darts; dart ``b`` steps from face_of[b] to face_of[b ^ 1].
    """

    graph: PlaneMultigraph
    edges: frozenset[int]
    terminal_faces: dict[int, int]
    principal: frozenset[int]
    spinal: tuple[tuple[int, ...], ...]

    @property
    def oriented(self) -> list[tuple[int, ...]]:
        """Q_0, Q_0^-1, Q_1, Q_1^-1, ..."""
        out = []
        for q in self.spinal:
            out.append(q)
            out.append(reverse_walk(q))
        return out

    def faces(self) -> set[int]:
        g = self.graph
        return {g.face_of[2 * e] for e in self.edges} | {g.face_of[2 * e + 1] for e in self.edges} | set(
            self.terminal_faces.values()
        )


def reverse_walk(w: Sequence[int]) -> tuple[int, ...]:
    return tuple(d ^ 1 for d in reversed(w))


@dataclass(frozen=True)
class DualizeResult:
    transformed: TransformedInstance
    skeleton: Skeleton
    follow_paths: tuple[tuple[int, ...], ...]
    lifted_tree: tuple[tuple[int, ...], ...]


def dualize(trans: TransformedInstance) -> tuple[TransformedInstance, dict[int, tuple[int, ...]]]:
    """Subdivide every non-pendant edge, add face vertices, keep terminal pendants.

    Returns the new instance and the map from previous-graph darts to their
    lifted dart sequences.
    """
    dap = trans.dap
    g = dap.graph
    terms = {v for p in dap.terminals for v in p}
    pend = {e for e in range(g.m) if g.eu[e] in terms or g.ev[e] in terms}
    core_ends = []
    core_id: dict[int, int] = {}
    for e in range(g.m):
        if e not in pend:
            core_id[e] = len(core_ends)
            core_ends.append((g.eu[e], g.ev[e]))
    core_rot = [[2 * core_id[d >> 1] + (d & 1) for d in g.rot[v] if (d >> 1) not in pend] for v in range(g.n)]
    core = PlaneMultigraph(g.n, core_ends, [1] * len(core_ends), core_rot)
    ends: list[tuple[int, int]] = []
    n = g.n
    kind = list(trans.kind[: g.n]) if len(trans.kind) >= g.n else ["v"] * g.n
    mid = []
    halves = []
    for c, (x, y) in enumerate(core_ends):
        m = n
        n += 1
        kind.append("m")
        mid.append(m)
        h1 = len(ends)
        ends.append((x, m))
        ends.append((m, y))
        halves.append((h1, h1 + 1))
    pend_id = {}
    for e in sorted(pend):
        pend_id[e] = len(ends)
        ends.append((g.eu[e], g.ev[e]))
    fv = []
    spoke_tail: dict[int, int] = {}  # core dart a -> spoke edge (v_f, tail(a))
    spoke_mid: dict[int, int] = {}  # core dart a -> spoke edge (v_f, mid(a))
    for f, walk in enumerate(core.faces):
        x = n
        n += 1
        kind.append("f")
        fv.append(x)
        for a in walk:
            spoke_tail[a] = len(ends)
            ends.append((x, core.tail(a)))
            spoke_mid[a] = len(ends)
            ends.append((x, mid[a >> 1]))
    rot: list[list[int]] = [[] for _ in range(n)]

    def half_from(d: int) -> int:
        h1, h2 = halves[d >> 1]
        return 2 * h1 if d & 1 == 0 else 2 * h2 + 1

    for v in range(g.n):
        r = []
        full = g.rot[v]
        cr = core.rot[v]
        if not cr:
            rot[v] = [2 * pend_id[d >> 1] + (d & 1) for d in full]
            continue
        # pendant placement: after the core dart preceding it in the old rotation
        after: dict[int, list[int]] = {}
        last_core = None
        lead: list[int] = []
        for d in full:
            if (d >> 1) in pend:
                if last_core is None:
                    lead.append(d)
                else:
                    after.setdefault(last_core, []).append(d)
            else:
                last_core = 2 * core_id[d >> 1] + (d & 1)
        if lead:
            after.setdefault(cr[-1], []).extend(lead)
        for j, d in enumerate(cr):
            nd = cr[(j + 1) % len(cr)]
            r.append(half_from(d))
            for p in after.get(d, ()):
                r.append(2 * pend_id[p >> 1] + (p & 1))
            r.append(2 * spoke_tail[nd] + 1)
        rot[v] = r
    for c, (x, y) in enumerate(core_ends):
        m = mid[c]
        h1, h2 = halves[c]
        d = 2 * c
        rot[m] = [2 * h1 + 1, 2 * spoke_mid[d] + 1, 2 * h2, 2 * spoke_mid[d ^ 1] + 1]
    for f, walk in enumerate(core.faces):
        seq = []
        for a in walk:
            seq.append(2 * spoke_tail[a])
            seq.append(2 * spoke_mid[a])
        rot[fv[f]] = list(reversed(seq))
    g2 = PlaneMultigraph(n, ends, [1] * len(ends), rot)
    lift: dict[int, tuple[int, ...]] = {}
    for e in range(g.m):
        for d in (2 * e, 2 * e + 1):
            if e in pend:
                lift[d] = (2 * pend_id[e] + (d & 1),)
            else:
                lift[d] = _subdivided_darts(d, *halves[core_id[e]])
    anns = tuple(frozenset(x for d in a for x in lift[d]) for a in dap.annotations)
    split = {}
    for e in range(g.m):
        if e not in pend:
            u, w = g.eu[e], g.ev[e]
            split[(u, w)] = split[(w, u)] = mid[core_id[e]]
    origin = tuple(list(range(g.n)) + [None] * (n - g.n))
    out = TransformedInstance(DapInstance(g2, dap.terminals, anns), origin, tuple(kind), split)
    return out, lift


def follow(g: PlaneMultigraph, darts: Sequence[int]) -> tuple[int, ...]:
    """Dual walk hugging the oriented primal path on its right-hand side.

    Starts at right_face(first dart) and ends at right_face(last dart); each
    step is a primal dart ``b`` stepping from face_of[b] to face_of[b ^ 1].
    """
    face = g.face_of[darts[0] ^ 1]
    out = []
    for a_in, a_out in zip(darts, darts[1:]):
        z = g.head(a_in)
        r = g.rot[z]
        i = g.pos[a_in ^ 1]
        while True:
            i = (i - 1) % len(r)
            delta = r[i]
            if delta == a_out:
                break
            step = delta ^ 1
            if g.face_of[step] != face:
                raise InvariantViolation("follow walk left the current face")
            out.append(step)
            face = g.face_of[delta]
    if face != g.face_of[darts[-1] ^ 1]:
        raise InvariantViolation("follow walk ends off the last dart's right face")
    return tuple(out)


def walk_faces(g: PlaneMultigraph, walk: Sequence[int], start: int | None = None) -> list[int]:
    if not walk:
        return [start] if start is not None else []
    return [g.face_of[walk[0]]] + [g.face_of[b ^ 1] for b in walk]


def dualize_skeleton(trans: TransformedInstance, tree: SteinerTree) -> DualizeResult:
    t2, lift = dualize(trans)
    g = t2.dap.graph
    terms = [v for p in t2.dap.terminals for v in p]
    tface = {}
    for v in terms:
        (d,) = g.rot[v]
        tface[v] = g.face_of[d]
    k0: set[int] = set()
    follows = []
    lifted = []
    for q in tree.spinal:
        qd = tuple(x for d in q for x in lift[d])
        lifted.append(qd)
        fw = follow(g, qd)
        follows.append(fw)
        k0 |= {b >> 1 for b in fw}
    for v in sorted(tree.vertices()):
        if tree.degree(v) >= 3:
            k0 |= {d >> 1 for d in g.rot[v]}
    kedges = _dual_tree(g, k0, set(tface.values()), tface[terms[0]])
    sk = make_skeleton(g, kedges, tface)
    if len(sk.spinal) > 4 * len(t2.dap.terminals) - 3:
        raise InvariantViolation(f"skeleton has {len(sk.spinal)} spinal paths")
    return DualizeResult(t2, sk, tuple(follows), tuple(lifted))


def _dual_tree(g: PlaneMultigraph, edges: set[int], keep: set[int], root: int) -> set[int]:
    adj: dict[int, list[tuple[int, int]]] = {}
    for e in sorted(edges):
        a, b = g.face_of[2 * e], g.face_of[2 * e + 1]
        if a == b:
            continue
        adj.setdefault(a, []).append((b, e))
        adj.setdefault(b, []).append((a, e))
    seen = {root}
    tree: set[int] = set()
    q = deque([root])
    while q:
        f = q.popleft()
        for h, e in adj.get(f, ()):
            if h not in seen:
                seen.add(h)
                tree.add(e)
                q.append(h)
    if not keep <= seen:
        raise InvariantViolation("skeleton does not reach every terminal face")
    # prune leaves that are not terminal faces
    deg: dict[int, int] = {}
    for e in tree:
        for f in (g.face_of[2 * e], g.face_of[2 * e + 1]):
            deg[f] = deg.get(f, 0) + 1
    changed = True
    while changed:
        changed = False
        for e in sorted(tree):
            a, b = g.face_of[2 * e], g.face_of[2 * e + 1]
            leaf = a if deg[a] == 1 and a not in keep else b if deg[b] == 1 and b not in keep else None
            if leaf is not None:
                tree.discard(e)
                deg[a] -= 1
                deg[b] -= 1
                changed = True
    return tree


def make_skeleton(g: PlaneMultigraph, edges: set[int], tface: dict[int, int]) -> Skeleton:
    deg: dict[int, int] = {}
    adj: dict[int, list[int]] = {}
    for e in sorted(edges):
        for d in (2 * e, 2 * e + 1):
            f = g.face_of[d]
            deg[f] = deg.get(f, 0) + 1
            adj.setdefault(f, []).append(d)
    principal = frozenset(tface.values()) | {f for f, c in deg.items() if c >= 3}
    spinal = []
    seen: set[int] = set()
    for p in sorted(principal):
        for d in sorted(adj.get(p, ())):
            if (d >> 1) in seen:
                continue
            walk = [d]
            f = g.face_of[d ^ 1]
            while f not in principal:
                nxt = [x for x in adj[f] if x != (walk[-1] ^ 1)]
                walk.append(nxt[0])
                f = g.face_of[nxt[0] ^ 1]
            seen |= {x >> 1 for x in walk}
            spinal.append(tuple(walk))
    return Skeleton(g, frozenset(edges), dict(tface), principal, tuple(spinal))


@dataclass(frozen=True)
class TourItem:
    kind: str  # "T" terminal symbol, "Q" spinal traversal
    value: int  # signed pair symbol for "T", oriented spinal index for "Q"


def euler_tour(sk: Skeleton, terminals: Sequence[tuple[int, int]]) -> list[TourItem]:
    """Clockwise tour around K starting next to s_1.

    Oriented spinal index ``2j`` is ``spinal[j]`` and ``2j + 1`` its reversal.
    """
    g = sk.graph
    sym = {}
    for i, (s, t) in enumerate(terminals, start=1):
        sym[s] = i
        sym[t] = -i
    s1 = terminals[0][0]
    (start,) = g.rot[s1]
    by_first: dict[int, int] = {}
    for j, q in enumerate(sk.spinal):
        by_first[q[0]] = 2 * j
        by_first[reverse_walk(q)[0]] = 2 * j + 1
    oriented = sk.oriented
    f = g.face_of[start]
    walk = g.faces[f][::-1]
    i = walk.index(start)
    out: list[TourItem] = []
    pending = 0
    while True:
        b = walk[i]
        if g.tail(b) in sym:
            out.append(TourItem("T", sym[g.tail(b)]))
        if (b >> 1) in sk.edges and pending == 0:
            q = by_first.get(b)
            if q is None:
                raise InvariantViolation("tour entered a spinal path away from a principal face")
            out.append(TourItem("Q", q))
            pending = len(oriented[q])
        if (b >> 1) in sk.edges:
            pending -= 1
            f = g.face_of[b ^ 1]
            walk = g.faces[f][::-1]
            i = walk.index(b ^ 1)
        i = (i + 1) % len(walk)
        if walk[i] == start and f == g.face_of[start]:
            break
    return out
