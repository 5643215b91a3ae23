"""Splitting partitions, dag-cuts, dag-rings and the exhaustive ring decomposition."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Iterator, Sequence

from .errors import InvariantViolation, NoExtension, NoneExists, NotSplitting, SideNotConnected
from .geodesics import DistanceOracle, distances, st_dag
from .instances import DspInstance
from .plane import DualCycle, Footprint, region_footprint, separating_dual_cycle

VSet = frozenset[int]


@dataclass(frozen=True)
class SplittingPartition:
    X: VSet
    Y: VSet
    split: tuple[tuple[int, int], ...]
    sameside: tuple[tuple[int, int], ...]

    def reversed(self) -> "SplittingPartition":
        return SplittingPartition(
            self.Y, self.X, tuple((b, a) for a, b in self.split), self.sameside
        )


def split_sets(terminals: Sequence[tuple[int, int]], that: Iterable[int],
               X: Iterable[int], Y: Iterable[int]) -> SplittingPartition:
    X, Y, that = frozenset(X), frozenset(Y), frozenset(that)
    if X & Y or (X | Y) != that:
        raise NotSplitting("(X, Y) must partition the terminal superset")
    split = []
    for s, t in terminals:
        if s in X and t in Y:
            split.append((s, t))
        elif t in X and s in Y:
            split.append((t, s))
    if not split:
        raise NotSplitting("no terminal pair is separated")
    same = [(a, b) for side in (X, Y) for a in sorted(side) for b in sorted(side) if a != b]
    return SplittingPartition(X, Y, tuple(split), tuple(same))


class RingContext:
    """Distances and memoized dags for one nice instance and terminal superset."""

    def __init__(self, inst: DspInstance, that: Sequence[int]) -> None:
        self.inst = inst
        self.g = inst.graph
        self.that = tuple(that)
        terms = inst.terminal_set()
        if not terms <= set(self.that):
            raise ValueError("terminal superset must contain every terminal")
        self.oracle: DistanceOracle = distances(self.g)
        self._dags: dict[tuple[int, int], frozenset[int]] = {}

    def dag(self, a: int, b: int) -> frozenset[int]:
        key = (a, b)
        if key not in self._dags:
            if (b, a) in self._dags:
                self._dags[key] = frozenset(d ^ 1 for d in self._dags[(b, a)])
            else:
                self._dags[key] = st_dag(self.g, self.oracle, a, b).arcs
        return self._dags[key]

    def partition(self, X: Iterable[int]) -> SplittingPartition:
        X = frozenset(X)
        return split_sets(self.inst.terminals, self.that, X, frozenset(self.that) - X)

    def partition_from_mask(self, mask: int) -> SplittingPartition:
        return self.partition(v for i, v in enumerate(self.that) if mask >> i & 1)

    def mask_of(self, X: Iterable[int]) -> int:
        X = set(X)
        return sum(1 << i for i, v in enumerate(self.that) if v in X)

    def aligned_darts(self, part: SplittingPartition) -> frozenset[int]:
        """Darts lying in every split pair's dag."""
        out = None
        for t, u in part.split:
            d = self.dag(t, u)
            out = d if out is None else out & d
        return out or frozenset()

    def sameside_edges(self, part: SplittingPartition) -> frozenset[int]:
        out: set[int] = set()
        seen = set()
        for a, b in part.sameside:
            if (b, a) in seen:
                continue
            seen.add((a, b))
            out |= {d >> 1 for d in self.dag(a, b)}
        return frozenset(out)


@dataclass(frozen=True)
class DagCut:
    vx: VSet
    vy: VSet
    wx: VSet
    wy: VSet
    cut_darts: tuple[int, ...]

    @property
    def cut_edges(self) -> frozenset[int]:
        return frozenset(d >> 1 for d in self.cut_darts)

    def below(self, other: "DagCut") -> bool:
        """``self ⊑ other``: the X side of self is contained in the X side of other."""
        return self.vx <= other.vx


@dataclass(frozen=True)
class CutReport:
    ok: bool
    violations: tuple[str, ...]
    connected: bool


def make_cut(ctx: RingContext, vx: Iterable[int], wx: Iterable[int], wy: Iterable[int]) -> DagCut:
    vx = frozenset(vx)
    vy = frozenset(range(ctx.g.n)) - vx
    return DagCut(vx, vy, frozenset(wx), frozenset(wy), tuple(ctx.g.edges_between(vx, vy)))


def validate_dag_cut(ctx: RingContext, vx: Iterable[int], part: SplittingPartition,
                     wx: Iterable[int], wy: Iterable[int]) -> CutReport:
    g = ctx.g
    vx = frozenset(vx)
    vy = frozenset(range(g.n)) - vx
    wx, wy = frozenset(wx), frozenset(wy)
    bad = []
    if not (wx <= vx and wy <= vy):
        bad.append("cond1: anchor sets not on their sides")
    darts = g.edges_between(vx, vy)
    aligned = ctx.aligned_darts(part)
    for d in darts:
        if d not in aligned:
            bad.append(f"cond2: arc {g.tail(d)}->{g.head(d)} misses a split dag")
            break
    same = ctx.sameside_edges(part)
    for d in darts:
        if d >> 1 in same:
            bad.append(f"cond3: edge {g.tail(d)}-{g.head(d)} lies in a same-side dag")
            break
    connected = bool(vx) and bool(vy) and g.induced_connected(vx) and g.induced_connected(vy)
    return CutReport(not bad, tuple(bad), connected)


def _closure(ctx: RingContext, seeds: Iterable[int], blocked: dict[int, int]) -> set[int]:
    """Reachability where each dart in ``blocked`` (keyed by edge) is the only usable one."""
    g = ctx.g
    seen = set(seeds)
    stack = list(seen)
    while stack:
        u = stack.pop()
        for d in g.rot[u]:
            e = d >> 1
            if e in blocked and blocked[e] != d:
                continue
            v = g.head(d)
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


def maximally_pushed_cuts(ctx: RingContext, part: SplittingPartition,
                          wx: Iterable[int], wy: Iterable[int]) -> tuple[DagCut, DagCut]:
    wx, wy = frozenset(wx), frozenset(wy)
    if not (part.X <= wx and part.Y <= wy) or wx & wy:
        raise ValueError("anchors must contain X and Y and be disjoint")
    aligned = ctx.aligned_darts(part)
    same = ctx.sameside_edges(part)
    ftilde = {d >> 1: d for d in aligned if (d >> 1) not in same}
    cx = _closure(ctx, wx, {e: d ^ 1 for e, d in ftilde.items()})
    cy = _closure(ctx, wy, dict(ftilde))
    if cx & cy:
        raise NoneExists("pushed closures overlap")
    allv = frozenset(range(ctx.g.n))
    g1 = make_cut(ctx, cx, wx, wy)
    g2 = make_cut(ctx, allv - cy, wx, wy)
    for c in (g1, g2):
        rep = validate_dag_cut(ctx, c.vx, part, wx, wy)
        if not rep.ok:
            raise NoneExists("pushed cut fails validation: " + "; ".join(rep.violations))
    return g1, g2


def cond4_holds(ctx: RingContext, ux: VSet, umid: VSet, uy: VSet, part: SplittingPartition) -> bool:
    g, o = ctx.g, ctx.oracle
    e1 = g.edges_between(ux, umid)
    e2 = g.edges_between(umid, uy)
    for t, t2 in part.split:
        dt, dt2 = o.row(t), o.row(t2)
        total = dt[t2]
        for a in e1:
            u1, v1 = g.tail(a), g.head(a)
            if dt[u1] is None:
                return False
            head = dt[u1] + g.weight[a >> 1]
            row = o.row(v1)
            for b in e2:
                u2, v2 = g.tail(b), g.head(b)
                if row[u2] is None or dt2[v2] is None:
                    return False
                if head + row[u2] + g.weight[b >> 1] + dt2[v2] != total:
                    return False
    return True


@dataclass(frozen=True)
class DagRing:
    part: SplittingPartition
    ux: VSet
    umid: VSet
    uy: VSet
    gamma1: DagCut
    gamma2: DagCut
    cycle1: DualCycle
    cycle2: DualCycle
    footprint: Footprint

    @property
    def wx(self) -> VSet:
        return self.gamma1.wx

    @property
    def wy(self) -> VSet:
        return self.gamma1.wy


def ring_from_cuts(ctx: RingContext, part: SplittingPartition, g1: DagCut, g2: DagCut) -> DagRing:
    ux = g1.vx
    uy = g2.vy
    umid = frozenset(range(ctx.g.n)) - ux - uy
    if not umid:
        raise NoneExists("pushed cuts coincide")
    if ctx.g.edges_between(ux, uy):
        raise NoneExists("U_X and U_Y are adjacent")
    if not cond4_holds(ctx, ux, umid, uy, part):
        raise NoneExists("joint shortest path identity fails")
    try:
        c1 = separating_dual_cycle(ctx.g, ux)
        c2 = separating_dual_cycle(ctx.g, ux | umid)
    except SideNotConnected as exc:
        raise InvariantViolation(f"dag-cut side not connected: {exc}") from exc
    fp = region_footprint(ctx.g, c1, c2)
    return DagRing(part, ux, umid, uy, g1, g2, c1, c2, fp)


def maximal_ring(ctx: RingContext, part: SplittingPartition,
                 wx: Iterable[int], wy: Iterable[int]) -> DagRing:
    g1, g2 = maximally_pushed_cuts(ctx, part, wx, wy)
    return ring_from_cuts(ctx, part, g1, g2)


def is_ring(ctx: RingContext, part: SplittingPartition, ux: VSet, umid: VSet, uy: VSet,
            wx: VSet, wy: VSet) -> bool:
    """Direct check of all four ring conditions for an explicit tripartition."""
    if not umid or ctx.g.edges_between(ux, uy):
        return False
    if not validate_dag_cut(ctx, ux, part, wx, wy).ok:
        return False
    if not validate_dag_cut(ctx, ux | umid, part, wx, wy).ok:
        return False
    return cond4_holds(ctx, ux, umid, uy, part)


@dataclass(frozen=True)
class DagStructure:
    arcs: frozenset[int]
    tx: VSet
    ty: VSet
    violations: tuple[str, ...] = ()


def dag_structure(ctx: RingContext, ring: DagRing) -> DagStructure:
    g = ctx.g
    aligned = ctx.aligned_darts(ring.part)
    same = ctx.sameside_edges(ring.part)
    arcs = set()
    bad = []
    for e in range(g.m):
        if g.eu[e] in ring.umid and g.ev[e] in ring.umid:
            if e in same:
                bad.append(f"edge {g.eu[e]}-{g.ev[e]} lies in a same-side dag")
            if 2 * e in aligned:
                arcs.add(2 * e)
            elif 2 * e + 1 in aligned:
                arcs.add(2 * e + 1)
            else:
                bad.append(f"edge {g.eu[e]}-{g.ev[e]} has no aligned orientation")
    tx = frozenset(g.head(d) for d in g.edges_between(ring.ux, ring.umid))
    ty = frozenset(g.tail(d) for d in g.edges_between(ring.umid, ring.uy))
    if _has_cycle(g, arcs):
        bad.append("oriented ring graph has a directed cycle")
    return DagStructure(frozenset(arcs), tx, ty, tuple(bad))


def _has_cycle(g, arcs: Iterable[int]) -> bool:
    succ: dict[int, list[int]] = {}
    indeg: dict[int, int] = {}
    nodes = set()
    for d in arcs:
        u, v = g.tail(d), g.head(d)
        succ.setdefault(u, []).append(v)
        indeg[v] = indeg.get(v, 0) + 1
        nodes |= {u, v}
    queue = [v for v in nodes if indeg.get(v, 0) == 0]
    seen = 0
    while queue:
        u = queue.pop()
        seen += 1
        for v in succ.get(u, ()):
            indeg[v] -= 1
            if indeg[v] == 0:
                queue.append(v)
    return seen != len(nodes)


@dataclass
class RingDecomposition:
    rings: list[DagRing] = field(default_factory=list)
    exhaustive: bool = False

    def family(self) -> set[tuple[VSet, VSet]]:
        return {(r.part.X, r.part.Y) for r in self.rings}

    def __len__(self) -> int:
        return len(self.rings)


def extension_anchors(ctx: RingContext, decomp: RingDecomposition,
                      part: SplittingPartition) -> tuple[VSet, VSet]:
    X, Y = part.X, part.Y
    fam = decomp.family()
    if (X, Y) in fam or (Y, X) in fam:
        raise NoExtension("partition already used")
    wx, wy = set(X), set(Y)
    for r in decomp.rings:
        xi, yi = r.part.X, r.part.Y
        if X & xi and X & yi and Y & xi and Y & yi:
            raise NoExtension("partition crosses an existing one")
        for side, w in ((X, wx), (Y, wy)):
            if xi <= side:
                w |= r.ux
            elif yi <= side:
                w |= r.uy
    if wx & wy:
        raise NoExtension("anchor blocks overlap")
    return frozenset(wx), frozenset(wy)


def partition_masks(r: int, all_masks: bool = False) -> list[int]:
    """Masks in popcount-then-lexicographic order; by default X holds element 0."""
    out = []
    for size in range(1, r):
        for combo in combinations(range(r), size):
            if not all_masks and 0 not in combo:
                continue
            out.append(sum(1 << i for i in combo))
    return out


@dataclass(frozen=True)
class Probe:
    mask: int
    outcome: str
    ring: DagRing | None = None


def try_extension(ctx: RingContext, decomp: RingDecomposition, mask: int) -> Probe:
    try:
        part = ctx.partition_from_mask(mask)
    except NotSplitting:
        return Probe(mask, "not-splitting")
    try:
        wx, wy = extension_anchors(ctx, decomp, part)
    except NoExtension as exc:
        return Probe(mask, f"no-extension: {exc}")
    try:
        ring = maximal_ring(ctx, part, wx, wy)
    except NoneExists as exc:
        return Probe(mask, f"none: {exc}")
    for other in decomp.rings:
        if not ring.footprint.disjoint(other.footprint):
            return Probe(mask, "footprint-overlap")
    return Probe(mask, "ring", ring)


def decompose(ctx: RingContext) -> RingDecomposition:
    r = len(ctx.that)
    decomp = RingDecomposition()
    masks = partition_masks(r)
    while True:
        best: Probe | None = None
        for mask in masks:
            p = try_extension(ctx, decomp, mask)
            if p.ring is None:
                continue
            if best is None or len(p.ring.umid) > len(best.ring.umid):
                best = p
        if best is None:
            break
        decomp.rings.append(best.ring)
        if len(decomp.rings) > 2 * r - 2:
            raise InvariantViolation(f"decomposition exceeds 2r-2 = {2 * r - 2} rings")
    decomp.exhaustive = True
    return decomp


def probe_all(ctx: RingContext, decomp: RingDecomposition) -> list[Probe]:
    """Re-probe all 2^r partitions; extensions found here contradict exhaustiveness."""
    return [
        p for p in (try_extension(ctx, decomp, m) for m in partition_masks(len(ctx.that), True))
        if p.ring is not None
    ]


def crossing_count(path: Sequence[int], cut: DagCut, ctx: RingContext) -> int:
    g = ctx.g
    es = cut.cut_edges
    count = 0
    for u, v in zip(path, path[1:]):
        if any(g.head(d) == v and (d >> 1) in es for d in g.rot[u]):
            count += 1
    return count


def enumerate_valid_cuts(ctx: RingContext, part: SplittingPartition,
                         wx: VSet, wy: VSet) -> Iterator[DagCut]:
    """Brute force over every vertex bipartition with the anchors on their sides."""
    free = [v for v in range(ctx.g.n) if v not in wx and v not in wy]
    for bits in range(1 << len(free)):
        vx = set(wx) | {free[i] for i in range(len(free)) if bits >> i & 1}
        if validate_dag_cut(ctx, vx, part, wx, wy).ok:
            yield make_cut(ctx, vx, wx, wy)
