"""Free-group words, labellings and shifts, candidate enumeration and Homology Feasibility."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import InvariantViolation, NoCompatible, PdspError
from .instances import DapInstance, Solution
from .kernels import bracket_matchings, reduce_word
from .plane import PlaneMultigraph
from .skeleton import Skeleton, TourItem, euler_tour

Word = tuple[int, ...]
EPS: Word = ()


class MalformedShift(PdspError):
    """Shifted labelling does not decompose into terminal paths."""


class BudgetExceeded(PdspError):
    """Search budget ran out before completeness was established."""


def reduce(word: Iterable[int]) -> Word:
    return reduce_word(list(word))


def inverse(word: Sequence[int]) -> Word:
    return tuple(-x for x in reversed(word))


def concat(*words: Sequence[int]) -> Word:
    return reduce(x for w in words for x in w)


def word_str(word: Sequence[int]) -> str:
    if not word:
        return "ε"
    return " ".join(str(x) if x > 0 else f"{-x}⁻¹" for x in word)


# labellings: list indexed by dart, shifts: list indexed by face


def labelling_from_arcs(g: PlaneMultigraph, values: Mapping[int, Word]) -> list[Word]:
    lam = [EPS] * (2 * g.m)
    for d, w in values.items():
        lam[d] = reduce(w)
        lam[d ^ 1] = inverse(lam[d])
    return lam


def lambda_of_solution(g: PlaneMultigraph, sol: Solution) -> list[Word]:
    """λ_P: arc a gets i if P_i traverses a and i⁻¹ if it traverses a⁻¹."""
    lam = [EPS] * (2 * g.m)
    for i, path in enumerate(sol.paths, start=1):
        for u, v in zip(path, path[1:]):
            d = g.dart(u, v)
            lam[d] = (i,)
            lam[d ^ 1] = (-i,)
    return lam


def char_word(lam: Sequence[Word], walk: Iterable[int]) -> Word:
    """Product of λ over the primal darts crossed by an oriented dual walk."""
    return reduce(x for b in walk for x in lam[b])


def is_valid_labelling(lam: Sequence[Word]) -> bool:
    return all(lam[d ^ 1] == inverse(lam[d]) for d in range(len(lam)))


def in_arcs_ccw(g: PlaneMultigraph, v: int) -> list[int]:
    """In-arcs at v in counterclockwise order, the order in which shifts telescope."""
    return [d ^ 1 for d in reversed(g.rot[v])]


def vertex_product(g: PlaneMultigraph, lam: Sequence[Word], v: int) -> Word:
    return reduce(x for a in in_arcs_ccw(g, v) for x in lam[a])


def is_clean(g: PlaneMultigraph, lam: Sequence[Word], v: int) -> bool:
    return not vertex_product(g, lam, v)


def apply_shift(g: PlaneMultigraph, lam: Sequence[Word], psi: Sequence[Word]) -> list[Word]:
    """ψ[λ](a) = ψ(left a) · λ(a) · ψ(right a)⁻¹."""
    out = [EPS] * len(lam)
    for d in range(len(lam)):
        out[d] = concat(psi[g.face_of[d]], lam[d], inverse(psi[g.face_of[d ^ 1]]))
    return out


def shift_inverse(psi: Sequence[Word]) -> list[Word]:
    return [inverse(w) for w in psi]


# domain mapping


@dataclass(frozen=True)
class DomainMapping:
    """Δ(a) ⊆ {ε, i, i⁻¹}; Δ(v) = ε plus every single symbol."""

    arcs: tuple[frozenset[Word], ...]
    k: int

    def vertex_ok(self, word: Word) -> bool:
        return len(word) <= 1 and all(1 <= abs(x) <= self.k for x in word)


def domain_from_annotations(dap: DapInstance) -> DomainMapping:
    g = dap.graph
    arcs = []
    for d in range(2 * g.m):
        s = {EPS}
        for i, ann in enumerate(dap.annotations, start=1):
            if d in ann:
                s.add((i,))
            if d ^ 1 in ann:
                s.add((-i,))
        arcs.append(frozenset(s))
    return DomainMapping(tuple(arcs), dap.k)


def conformance(g: PlaneMultigraph, lam: Sequence[Word], dom: DomainMapping) -> list[str]:
    bad = []
    for d in range(2 * g.m):
        if lam[d] not in dom.arcs[d]:
            bad.append(f"arc {d} label {word_str(lam[d])} outside its domain")
    for v in range(g.n):
        ins = in_arcs_ccw(g, v)
        n = len(ins)
        for i in range(n):
            acc: list[int] = []
            for j in range(n):
                acc = list(reduce_word(acc + list(lam[ins[(i + j) % n]])))
                if not dom.vertex_ok(tuple(acc)):
                    bad.append(f"vertex {v} has in-arc product {word_str(acc)}")
                    break
            else:
                continue
            break
    return bad


# candidate enumeration


@dataclass(frozen=True)
class HomologyCandidate:
    """Regular mapping from oriented spinal paths to words, plus how it arose."""

    mapping: tuple[Word, ...]  # index 2j: spinal path j, 2j + 1: its reversal
    counts: tuple[int, ...]
    matching: tuple[tuple[int, int], ...] = field(compare=False, default=())

    def key(self) -> tuple[Word, ...]:
        return self.mapping[0::2]


def brute_jumping_matchings(sizes: Sequence[int]) -> list[tuple[tuple[int, int], ...]]:
    """Perfect non-crossing matchings with no pair inside one block, by exhaustive search."""
    block = [b for b, s in enumerate(sizes) for _ in range(s)]
    p = len(block)
    out = []

    def rec(free: list[int], pairs: list[tuple[int, int]]):
        if not free:
            out.append(tuple(sorted(pairs)))
            return
        a = free[0]
        for j in range(1, len(free)):
            b = free[j]
            if block[a] == block[b]:
                continue
            pairs.append((a, b))
            rec(free[1:j] + free[j + 1:], pairs)
            pairs.pop()

    if p % 2 == 0:
        rec(list(range(p)), [])
    return sorted(m for m in out if _non_crossing(m))


def _non_crossing(pairs: Sequence[tuple[int, int]]) -> bool:
    for (a, b), (c, d) in combinations(pairs, 2):
        if a < c < b < d or c < a < d < b:
            return False
    return True


def matching_layer(sizes: Sequence[int]) -> list[tuple[tuple[int, int], ...]]:
    return sorted(bracket_matchings(list(sizes)))


def count_vectors(n: int, L: int, prev: int = -1) -> list[tuple[int, ...]]:
    """Vectors in [0, L]^n with max above ``prev``, by total then lexicographically."""
    vecs = [v for v in product(range(L + 1), repeat=n) if max(v, default=0) > prev]
    vecs.sort(key=lambda v: (sum(v), v))
    return vecs


def _trace(sizes: Sequence[int], tour: Sequence[TourItem], n_pairs: Sequence[tuple[int, int]],
           k: int) -> dict[int, int] | None:
    """Signed symbol per position, or None if M ∪ N is not k terminal paths."""
    starts = []
    acc = 0
    for s in sizes:
        starts.append(acc)
        acc += s
    p = acc
    nmate = [0] * p
    for a, b in n_pairs:
        nmate[a], nmate[b] = b, a
    mmate: dict[int, int] = {}
    where: dict[int, tuple[int, int]] = {}  # oriented index -> (start, size)
    term_pos: dict[int, int] = {}
    for item, st, s in zip(tour, starts, sizes):
        if item.kind == "T":
            term_pos[item.value] = st
        else:
            where[item.value] = (st, s)
    for q, (st, s) in where.items():
        ost, os_ = where[q ^ 1]
        for j in range(s):
            mmate[st + j] = ost + s - 1 - j
    sym: dict[int, int] = {}
    for i in range(1, k + 1):
        pos = term_pos[i]
        sym[pos] = i
        while True:
            nxt = nmate[pos]
            if nxt in sym:
                return None
            if nxt == term_pos[-i]:
                sym[nxt] = -i
                break
            if nxt not in mmate:
                return None
            # a crossing is read i on the side the path leaves through, i⁻¹ where it enters
            sym[nxt] = -i
            pos = mmate[nxt]
            if pos in sym:
                return None
            sym[pos] = i
    if len(sym) != p:
        return None
    return sym


def enumerate_candidates(sk: Skeleton, terminals: Sequence[tuple[int, int]], L: int, prev_L: int = -1,
                         cap: int | None = None, stats: dict | None = None) -> Iterator[HomologyCandidate]:
    """Candidates with per-path crossing counts at most ``L`` and above ``prev_L``.

    Duplicated mappings are suppressed within one call.
    """
    k = len(terminals)
    tour = euler_tour(sk, terminals)
    nq = len(sk.spinal)
    seen: set[tuple[Word, ...]] = set()
    matchings = 0
    for counts in count_vectors(nq, L, prev_L):
        sizes = [1 if it.kind == "T" else counts[it.value >> 1] for it in tour]
        for m in bracket_matchings(sizes):
            matchings += 1
            if cap is not None and matchings > cap:
                raise BudgetExceeded(f"more than {cap} matchings at L={L}")
            sym = _trace(sizes, tour, m, k)
            if sym is None:
                continue
            blocks = block_words(tour, sizes, sym)
            key = tuple(reduce(blocks[q]) for q in range(2 * nq))
            if key in seen:
                continue
            seen.add(key)
            if stats is not None:
                stats["candidates"] = stats.get("candidates", 0) + 1
            yield HomologyCandidate(key, counts, m)
    if stats is not None:
        stats["matchings"] = stats.get("matchings", 0) + matchings


def true_mapping(sk: Skeleton, lam: Sequence[Word]) -> tuple[Word, ...]:
    return tuple(char_word(lam, q) for q in sk.oriented)


# compact labelling


@dataclass(frozen=True)
class CompactFrame:
    """The tree L̂ data shared by every candidate of one skeleton."""

    arc_of: tuple[int, ...]  # oriented spinal index -> the dart a(Q⃗)
    tree_edges: frozenset[int]  # edges of L (pendants included)
    pendants: dict[int, int]  # terminal -> dart into the terminal
    order: tuple[tuple[int, int], ...]  # (vertex, unknown dart out of it) in leaf order
    root: int


def compact_frame(dap: DapInstance, sk: Skeleton) -> CompactFrame:
    g = dap.graph
    arc_of = []
    for q in sk.spinal:
        a = q[(len(q) - 1) // 2]
        arc_of += [a, a ^ 1]
    terms = [v for p in dap.terminals for v in p]
    eq = {d >> 1 for d in arc_of}
    W = set(terms) | {g.eu[e] for e in eq} | {g.ev[e] for e in eq}
    usable = [e for e in range(g.m) if e not in sk.edges]
    adj: dict[int, list[tuple[int, int]]] = {}
    for e in usable:
        adj.setdefault(g.eu[e], []).append((g.ev[e], e))
        adj.setdefault(g.ev[e], []).append((g.eu[e], e))
    root0 = min(W)
    seen = {root0}
    tree = set()
    q = deque([root0])
    while q:
        u = q.popleft()
        for w, e in sorted(adj.get(u, ())):
            if w not in seen:
                seen.add(w)
                tree.add(e)
                q.append(w)
    if not W <= seen:
        raise InvariantViolation("terminals and skeleton anchors are not connected off K")
    deg: dict[int, int] = {}
    for e in tree:
        for v in (g.eu[e], g.ev[e]):
            deg[v] = deg.get(v, 0) + 1
    changed = True
    while changed:
        changed = False
        for e in sorted(tree):
            for v in (g.eu[e], g.ev[e]):
                if deg[v] == 1 and v not in W:
                    tree.discard(e)
                    deg[g.eu[e]] -= 1
                    deg[g.ev[e]] -= 1
                    changed = True
                    break
    pend = {}
    for v in terms:
        (d,) = g.rot[v]
        pend[v] = d ^ 1
    inner = {e for e in tree if g.eu[e] not in pend and g.ev[e] not in pend}
    # leaf order over L' = L minus terminals
    ideg: dict[int, int] = {}
    for e in inner:
        for v in (g.eu[e], g.ev[e]):
            ideg[v] = ideg.get(v, 0) + 1
    left = set(inner)
    order = []
    while left:
        leaf = min(v for v, c in ideg.items() if c == 1)
        e = next(x for x in sorted(left) if leaf in (g.eu[x], g.ev[x]))
        d = 2 * e if g.eu[e] == leaf else 2 * e + 1
        order.append((leaf, d))
        left.discard(e)
        ideg[g.eu[e]] -= 1
        ideg[g.ev[e]] -= 1
    if order:
        root = g.head(order[-1][1])
    else:
        cands = sorted(W - set(terms))
        root = cands[0] if cands else g.head(g.rot[terms[0]][0])
    return CompactFrame(tuple(arc_of), frozenset(tree), pend, tuple(order), root)


def reconstruct_compact(dap: DapInstance, sk: Skeleton, mapping: Sequence[Word],
                        frame: CompactFrame | None = None) -> list[Word] | None:
    """The unique compact labelling that realizes ``mapping`` on the arcs a(Q⃗), or None."""
    g = dap.graph
    frame = frame or compact_frame(dap, sk)
    lam = [EPS] * (2 * g.m)
    fixed = [False] * (2 * g.m)

    def put(d, w):
        w = reduce(w)
        if fixed[d] and lam[d] != w:
            return False
        lam[d], lam[d ^ 1] = w, inverse(w)
        fixed[d] = fixed[d ^ 1] = True
        return True

    for i, (s, t) in enumerate(dap.terminals, start=1):
        put(frame.pendants[s], (-i,))
        put(frame.pendants[t], (i,))
    for q, d in enumerate(frame.arc_of):
        if not put(d, mapping[q]):
            return None
    for v, d in frame.order:
        # product over ccw in-arcs, rotated to start right after the unknown arc d ^ 1
        ins = in_arcs_ccw(g, v)
        j = ins.index(d ^ 1)
        rest = reduce(x for a in ins[j + 1:] + ins[:j] for x in lam[a])
        put(d ^ 1, inverse(rest))
    if not is_clean(g, lam, frame.root):
        return None
    return lam


# Homology Feasibility


@dataclass(frozen=True)
class HfInstance:
    dap: DapInstance
    skeleton: Skeleton
    xi: tuple[Word, ...]
    domain: DomainMapping
    fixed_faces: frozenset[int]
    mapping: tuple[Word, ...]


def build_hf_instance(dap: DapInstance, sk: Skeleton, mapping: Sequence[Word],
                      frame: CompactFrame | None = None) -> HfInstance:
    xi = reconstruct_compact(dap, sk, mapping, frame)
    if xi is None:
        raise NoCompatible("no compact labelling realizes the candidate")
    g = dap.graph
    terms = {v for p in dap.terminals for v in p}
    for v in range(g.n):
        if v not in terms and not is_clean(g, xi, v):
            raise InvariantViolation(f"reconstructed labelling is not clean at {v}")
    return HfInstance(dap, sk, tuple(xi), domain_from_annotations(dap),
                      frozenset(sk.terminal_faces.values()), tuple(mapping))


def verify_shift(hf: HfInstance, psi: Sequence[Word]) -> list[str]:
    g = hf.dap.graph
    bad = [f"fixed face {f} shifted" for f in sorted(hf.fixed_faces) if psi[f]]
    return bad + conformance(g, apply_shift(g, hf.xi, psi), hf.domain)


def push_shift(hf: HfInstance, lam: Sequence[Word], frame: CompactFrame | None = None) -> list[Word]:
    """Shift ψ with ψ[λ] compact, rooted at the principal face of each face of L̂."""
    dap, sk = hf.dap, hf.skeleton
    g = dap.graph
    frame = frame or compact_frame(dap, sk)
    hat = set(frame.tree_edges) | {d >> 1 for d in frame.arc_of}
    kfirst: dict[int, list[int]] = {}
    other: dict[int, list[int]] = {}
    for d in range(2 * g.m):
        if d >> 1 in hat:
            continue
        f = g.face_of[d]
        (kfirst if d >> 1 in sk.edges else other).setdefault(f, []).append(d)
    nf = len(g.faces)
    psi: list[Word | None] = [None] * nf
    for root in sorted(sk.principal) + list(range(nf)):
        if psi[root] is not None:
            continue
        psi[root] = EPS
        # K darts first so that each spinal half lies on the tree
        reached = [root]
        for pool in (kfirst, other):
            q = deque(reached)
            while q:
                f = q.popleft()
                for d in pool.get(f, ()) if pool is kfirst else kfirst.get(f, []) + pool.get(f, []):
                    h = g.face_of[d ^ 1]
                    if psi[h] is None:
                        psi[h] = concat(psi[f], lam[d])
                        q.append(h)
                        reached.append(h)
    return [w if w is not None else EPS for w in psi]


def extract_solution(hf: HfInstance, psi: Sequence[Word]) -> Solution:
    g = hf.dap.graph
    lab = apply_shift(g, hf.xi, psi)
    paths = []
    for i, (s, t) in enumerate(hf.dap.terminals, start=1):
        used = set()
        walk = [s]
        v = s
        while v != t:
            out = [d for d in g.rot[v] if lab[d] == (i,) and d not in used]
            if not out:
                raise MalformedShift(f"label-{i} walk stuck at {v}")
            d = min(out)
            used.add(d)
            v = g.head(d)
            walk.append(v)
        # shortcut repeated vertices
        path: list[int] = []
        pos: dict[int, int] = {}
        for v in walk:
            if v in pos:
                for x in path[pos[v] + 1:]:
                    del pos[x]
                del path[pos[v] + 1:]
            else:
                pos[v] = len(path)
                path.append(v)
        paths.append(path)
    return Solution.of(paths)


# backends


@dataclass
class SolutionIndex:
    """Solutions of the final instance keyed by their characteristic mapping."""

    by_key: dict[tuple[Word, ...], Solution]
    complete: bool

    def __len__(self) -> int:
        return len(self.by_key)


def build_index(dap: DapInstance, sk: Skeleton, solutions: Iterable[Solution], complete: bool) -> SolutionIndex:
    g = dap.graph
    out: dict[tuple[Word, ...], Solution] = {}
    for sol in solutions:
        lam = lambda_of_solution(g, sol)
        key = tuple(char_word(lam, q) for q in sk.spinal)
        out.setdefault(key, sol)
    return SolutionIndex(out, complete)


def solve_hf_path_search(hf: HfInstance, index: SolutionIndex,
                         frame: CompactFrame | None = None) -> list[Word] | None:
    key = tuple(hf.mapping[0::2])
    sol = index.by_key.get(key)
    if sol is None:
        return None
    g = hf.dap.graph
    lam = lambda_of_solution(g, sol)
    psi = push_shift(hf, lam, frame)
    return shift_inverse(psi)


def solve_hf_shift_search(hf: HfInstance, bound: int, node_cap: int = 200_000) -> list[Word] | None:
    """Backtracking over face words, spreading along dual edges from the fixed faces.

    Complete for shifts whose words have length at most ``bound``.
    """
    g = hf.dap.graph
    nf = len(g.faces)
    psi: list[Word | None] = [None] * nf
    order: list[tuple[int, int]] = []  # (face, dart from an earlier face)
    roots = sorted(hf.fixed_faces) or [0]
    seen = set(roots)
    q = deque(roots)
    while q:
        f = q.popleft()
        for d in sorted(g.faces[f]):
            h = g.face_of[d ^ 1]
            if h not in seen:
                seen.add(h)
                order.append((h, d))
                q.append(h)
    for f in roots:
        psi[f] = EPS
    nodes = 0

    def edge_ok(d) -> bool:
        a, b = psi[g.face_of[d]], psi[g.face_of[d ^ 1]]
        if a is None or b is None:
            return True
        return concat(a, hf.xi[d], inverse(b)) in hf.domain.arcs[d]

    for f in roots:
        for d in g.faces[f]:
            if not edge_ok(d):
                return None

    def rec(j: int) -> bool:
        nonlocal nodes
        nodes += 1
        if nodes > node_cap:
            raise BudgetExceeded(f"shift search exceeded {node_cap} nodes")
        if j == len(order):
            full = [w if w is not None else EPS for w in psi]
            return not verify_shift(hf, full)
        h, d = order[j]
        base = psi[g.face_of[d]]
        for delta in sorted(hf.domain.arcs[d]):
            # ψ(f) ξ(d) ψ(h)⁻¹ = δ  =>  ψ(h) = δ⁻¹ ψ(f) ξ(d)
            cand = concat(inverse(delta), base, hf.xi[d])
            if len(cand) > bound:
                continue
            psi[h] = cand
            if all(edge_ok(x) for x in g.faces[h]) and rec(j + 1):
                return True
            psi[h] = None
        return False

    if rec(0):
        return [w if w is not None else EPS for w in psi]
    return None


def solve_hf(hf: HfInstance, backend: str = "path-search", index: SolutionIndex | None = None,
             bound: int = 4, frame: CompactFrame | None = None, node_cap: int = 200_000) -> list[Word] | None:
    if backend == "path-search":
        if index is None:
            raise ValueError("path-search needs a solution index")
        psi = solve_hf_path_search(hf, index, frame)
    elif backend == "shift-search":
        psi = solve_hf_shift_search(hf, bound, node_cap)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    if psi is None:
        return None
    bad = verify_shift(hf, psi)
    if bad:
        raise InvariantViolation("shift fails verification: " + "; ".join(bad[:3]))
    return psi


def solution_matching(sk: Skeleton, terminals: Sequence[tuple[int, int]], sol: Solution
                      ) -> tuple[tuple[int, ...], list[int], list[tuple[int, int]]]:
    """Crossing counts, tour block sizes and the matching N realized by a solution of the final graph.

    A path traversing the spinal dart ``b`` enters through the copy of the
    edge on the tail side (the reversed block) and leaves through the head side.
    """
    g = sk.graph
    tour = euler_tour(sk, terminals)
    where = {}
    for j, q in enumerate(sk.spinal):
        for idx, b in enumerate(q):
            where[b >> 1] = (j, idx, b)
    hits: dict[int, list[int]] = {j: [] for j in range(len(sk.spinal))}
    events = []
    for path in sol.paths:
        ev = []
        for u, v in zip(path, path[1:]):
            d = g.dart(u, v)
            if d >> 1 in where:
                j, idx, b = where[d >> 1]
                ev.append((j, idx, d == b))
                hits[j].append(idx)
        events.append(ev)
    counts = tuple(len(hits[j]) for j in range(len(sk.spinal)))
    rank = {j: {idx: r for r, idx in enumerate(sorted(h))} for j, h in hits.items()}
    sizes = [1 if it.kind == "T" else counts[it.value >> 1] for it in tour]
    start: dict[int, int] = {}
    tpos: dict[int, int] = {}
    acc = 0
    for it, s in zip(tour, sizes):
        (tpos if it.kind == "T" else start)[it.value] = acc
        acc += s
    pairs = []
    for i, ev in enumerate(events, start=1):
        cur = tpos[i]
        for j, idx, fwd in ev:
            r = rank[j][idx]
            head_side = start[2 * j] + r
            tail_side = start[2 * j + 1] + counts[j] - 1 - r
            enter, leave = (tail_side, head_side) if fwd else (head_side, tail_side)
            pairs.append((min(cur, enter), max(cur, enter)))
            cur = leave
        pairs.append((min(cur, tpos[-i]), max(cur, tpos[-i])))
    return counts, sizes, sorted(pairs)


def block_words(tour: Sequence[TourItem], sizes: Sequence[int], sym: Mapping[int, int]) -> dict[int, tuple[int, ...]]:
    """Unreduced symbol sequence of each oriented spinal block."""
    out = {}
    pos = 0
    for it, s in zip(tour, sizes):
        if it.kind == "Q":
            out[it.value] = tuple(sym[pos + j] for j in range(s))
        pos += s
    return out
