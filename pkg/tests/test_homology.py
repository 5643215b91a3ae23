import random
from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from conftest import final_components
from pdsp import generators
from pdsp import homology as H
from pdsp.errors import NoCompatible
from pdsp.instances import check
from pdsp.plane import separating_dual_cycle
from pdsp.skeleton import euler_tour, reverse_walk

SOLVABLE = ["grid3-corners", "staggered-3x3-k2", "staggered-4x3-k3", "spiral-1-2", "cycle4-opposite",
            "grid3x3-k2-u-s19", "grid2x5-k2-r-s26", "grid3x4-k3-r-s38"]

words = st.lists(st.sampled_from([1, -1, 2, -2, 3, -3]), max_size=20)


def test_reduce_examples():
    assert H.reduce([1, -1]) == H.EPS
    assert H.reduce([1, 2, -2, -1]) == H.EPS
    assert H.reduce([2, 1, -1, 1]) == (2, 1)
    assert H.word_str((2, -1)) == "2 1⁻¹" and H.word_str(()) == "ε"


@settings(max_examples=300)
@given(words, words)
def test_word_algebra(a, b):
    ra = H.reduce(a)
    assert H.reduce(ra) == ra
    assert all(x != -y for x, y in zip(ra, ra[1:]))
    assert H.reduce(a + b) == H.concat(ra, H.reduce(b))
    assert H.inverse(H.inverse(ra)) == ra
    assert H.concat(ra, H.inverse(ra)) == H.EPS
    assert H.inverse(H.concat(a, b)) == H.concat(H.inverse(b), H.inverse(a))


def test_char_word_definition():
    g = generators.grid_graph(3, 3)
    lam = H.labelling_from_arcs(g, {0: (1,), 2: (1,)})
    assert H.is_valid_labelling(lam)
    assert H.char_word(lam, []) == H.EPS
    assert H.char_word(lam, [4, 6]) == H.EPS
    assert H.char_word(lam, [0, 2]) == (1, 1)
    assert H.char_word(lam, [1, 2]) == H.EPS


def _vertex_sets(g, avoid, rng, count):
    out = []
    free = [v for v in range(g.n) if v not in avoid]
    for _ in range(count):
        seed = rng.choice(free)
        a = {seed}
        for _ in range(rng.randint(0, 6)):
            nb = [g.head(d) for v in a for d in g.rot[v] if g.head(d) not in a and g.head(d) not in avoid]
            if not nb:
                break
            a.add(rng.choice(nb))
        out.append(a)
    return out


@pytest.mark.parametrize("name", SOLVABLE)
def test_green_and_cleanliness(name):
    rng = random.Random(0)
    for nice, _, dual, sols in final_components(name):
        dap = dual.transformed.dap
        g = dap.graph
        terms = dap.terminal_set()
        cycles = []
        for a in _vertex_sets(g, terms, rng, 40):
            try:
                cycles.append(separating_dual_cycle(g, a))
            except Exception:
                continue
        assert cycles
        for sol in sols:
            lam = H.lambda_of_solution(g, sol)
            assert H.is_valid_labelling(lam)
            for c in cycles:
                assert H.char_word(lam, c.darts) == H.EPS
                assert H.char_word(lam, reverse_walk(c.darts)) == H.EPS
            for v in range(g.n):
                assert H.is_clean(g, lam, v) == (v not in terms)
            for i, (s, t) in enumerate(dap.terminals, start=1):
                assert H.vertex_product(g, lam, s) == (-i,)
                assert H.vertex_product(g, lam, t) == (i,)


@pytest.mark.parametrize("name", SOLVABLE[:4])
def test_cleanliness_survives_shifts(name):
    rng = random.Random(1)
    for nice, _, dual, sols in final_components(name):
        g = dual.transformed.dap.graph
        lam = H.lambda_of_solution(g, sols[0])
        clean = [v for v in range(g.n) if H.is_clean(g, lam, v)]
        for _ in range(100):
            psi = [H.reduce(rng.choice((1, -1, 2, -2)) for _ in range(rng.randint(0, 3))) for _ in g.faces]
            shifted = H.apply_shift(g, lam, psi)
            assert H.is_valid_labelling(shifted)
            assert all(H.is_clean(g, shifted, v) for v in clean)
            assert H.apply_shift(g, shifted, H.shift_inverse(psi)) == lam


def test_identity_and_constant_shift():
    comp = final_components("staggered-3x3-k2")[0]
    g = comp[2].transformed.dap.graph
    lam = H.lambda_of_solution(g, comp[3][0])
    assert H.apply_shift(g, lam, [H.EPS] * len(g.faces)) == lam
    c = (2, -1)
    shifted = H.apply_shift(g, lam, [c] * len(g.faces))
    assert all(shifted[d] == H.concat(c, lam[d], H.inverse(c)) for d in range(2 * g.m))


def test_isolated_vertex_clean():
    g = generators.gen_path([1], [(0, 1)]).graph
    assert H.is_clean(g, [H.EPS, H.EPS], 0)


def _divisions(p, max_blocks):
    for cuts in range(min(p, max_blocks)):
        for pos in combinations(range(1, p), cuts):
            bounds = (0,) + pos + (p,)
            yield [b - a for a, b in zip(bounds, bounds[1:])]


def test_matching_layer_against_brute_force():
    checked = 0
    for p in range(1, 11):
        for sizes in _divisions(p, 5):
            assert H.matching_layer(sizes) == H.brute_jumping_matchings(sizes)
            checked += 1
    assert checked > 300


def test_catalan_and_blocked():
    assert len(H.matching_layer([1, 1, 1, 1])) == 2
    assert len(H.matching_layer([1] * 6)) == 5
    assert H.matching_layer([4]) == []
    assert len(H.matching_layer([2, 2, 2])) == len(H.brute_jumping_matchings([2, 2, 2]))


def test_count_vectors_order():
    vs = H.count_vectors(2, 2)
    assert vs[0] == (0, 0) and len(vs) == 9
    assert [sum(v) for v in vs] == sorted(sum(v) for v in vs)
    assert all(max(v) > 1 for v in H.count_vectors(2, 3, prev=1))


@pytest.mark.parametrize("name", SOLVABLE)
def test_solution_matching_and_trace(name):
    for nice, _, dual, sols in final_components(name):
        sk = dual.skeleton
        tour = euler_tour(sk, nice.terminals)
        for sol in sols[:50]:
            counts, sizes, pairs = H.solution_matching(sk, nice.terminals, sol)
            assert H._non_crossing(pairs)
            assert sorted(x for p in pairs for x in p) == list(range(sum(sizes)))
            sym = H._trace(sizes, tour, pairs, nice.k)
            assert sym is not None
            blocks = H.block_words(tour, sizes, sym)
            lam = H.lambda_of_solution(sk.graph, sol)
            truth = H.true_mapping(sk, lam)
            assert tuple(H.reduce(blocks[q]) for q in range(2 * len(sk.spinal))) == truth
            assert all(truth[2 * j + 1] == H.inverse(truth[2 * j]) for j in range(len(sk.spinal)))


def test_back_and_forth_crossings_cancel():
    # a path that crosses a spinal path and comes straight back realizes an
    # intra-block pair; its two symbols cancel, so the jumping layer still
    # produces the same reduced mapping with two fewer crossings
    nice, _, dual, sols = final_components("grid3-corners")[0]
    sk = dual.skeleton
    tour = euler_tour(sk, nice.terminals)
    seen = 0
    for sol in sols:
        counts, sizes, pairs = H.solution_matching(sk, nice.terminals, sol)
        block = [i for i, s in enumerate(sizes) for _ in range(s)]
        if all(block[a] != block[b] for a, b in pairs):
            continue
        seen += 1
        blocks = H.block_words(tour, sizes, H._trace(sizes, tour, pairs, nice.k))
        raw = [blocks[q] for q in range(2 * len(sk.spinal))]
        assert any(len(H.reduce(w)) < len(w) for w in raw)
    assert seen


@pytest.mark.parametrize("name", SOLVABLE)
def test_true_mapping_in_stream(name):
    for nice, _, dual, sols in final_components(name):
        sk = dual.skeleton
        lam = H.lambda_of_solution(sk.graph, sols[0])
        truth = H.true_mapping(sk, lam)
        stream = H.enumerate_candidates(sk, nice.terminals, 4, cap=2_000_000)
        assert any(c.mapping == truth for c in stream)


@pytest.mark.parametrize("name", SOLVABLE)
def test_push_shift_and_backends(name):
    for nice, _, dual, sols in final_components(name):
        dap, sk = dual.transformed.dap, dual.skeleton
        frame = H.compact_frame(dap, sk)
        index = H.build_index(dap, sk, sols, True)
        sol = sols[0]
        lam = H.lambda_of_solution(dap.graph, sol)
        truth = H.true_mapping(sk, lam)
        hf = H.build_hf_instance(dap, sk, truth, frame)
        psi = H.push_shift(hf, lam, frame)
        # ψ[λ_P] is the compact labelling, so ψ⁻¹[ξ] = λ_P conforms
        assert H.apply_shift(dap.graph, lam, psi) == list(hf.xi)
        assert H.apply_shift(dap.graph, list(hf.xi), H.shift_inverse(psi)) == lam
        assert not H.verify_shift(hf, H.shift_inverse(psi))
        got = H.solve_hf(hf, "path-search", index=index, frame=frame)
        assert got is not None
        out = H.extract_solution(hf, got)
        assert all(check(dap, out).values())


def test_identity_solvable():
    nice, _, dual, sols = final_components("staggered-3x3-k2")[0]
    dap, sk = dual.transformed.dap, dual.skeleton
    lam = H.lambda_of_solution(dap.graph, sols[0])
    dom = H.domain_from_annotations(dap)
    assert not H.conformance(dap.graph, lam, dom)
    hf = H.HfInstance(dap, sk, tuple(lam), dom, frozenset(sk.terminal_faces.values()), H.true_mapping(sk, lam))
    assert H.solve_hf_shift_search(hf, 0) == [H.EPS] * len(dap.graph.faces)


def test_shift_search_backend_finds_verified_shift():
    nice, _, dual, sols = final_components("grid3-corners")[0]
    dap, sk = dual.transformed.dap, dual.skeleton
    lam = H.lambda_of_solution(dap.graph, sols[-1])
    hf = H.build_hf_instance(dap, sk, H.true_mapping(sk, lam))
    psi = H.solve_hf(hf, "shift-search", bound=2, node_cap=200_000)
    assert psi is not None and not H.verify_shift(hf, psi)


def test_impossible_mapping_has_no_solution():
    nice, _, dual, sols = final_components("staggered-3x3-k2")[0]
    dap, sk = dual.transformed.dap, dual.skeleton
    frame = H.compact_frame(dap, sk)
    index = H.build_index(dap, sk, sols, True)
    tried = 0
    for cand in H.enumerate_candidates(sk, nice.terminals, 2):
        if cand.key() in index.by_key:
            continue
        try:
            hf = H.build_hf_instance(dap, sk, cand.mapping, frame)
        except NoCompatible:
            continue
        assert H.solve_hf(hf, "path-search", index=index, frame=frame) is None
        tried += 1
        if tried >= 5:
            break
    assert tried


def test_odd_parity_mapping_is_incompatible():
    nice, _, dual, _ = final_components("grid3-corners")[0]
    dap, sk = dual.transformed.dap, dual.skeleton
    # a symbol of a pair that does not exist, and a mapping that disagrees with its reversal
    for bad in (((2,), (-2,)), ((1,), (1,))):
        assert H.reconstruct_compact(dap, sk, bad) is None
        with pytest.raises(NoCompatible):
            H.build_hf_instance(dap, sk, bad)
    # all-ε is realizable here: the oracle solutions never cross K
    assert H.reconstruct_compact(dap, sk, (H.EPS, H.EPS)) is not None


def test_domains_are_small():
    nice, _, dual, _ = final_components("staggered-4x3-k3")[0]
    dom = H.domain_from_annotations(dual.transformed.dap)
    assert all(len(a) <= 2 * dom.k + 1 for a in dom.arcs)
    assert all(H.EPS in a for a in dom.arcs)


def test_extract_shortcuts_balanced_cycle():
    nice, _, dual, sols = final_components("grid3-corners")[0]
    dap = dual.transformed.dap
    g = dap.graph
    sol = sols[0]
    path = sol.paths[0]
    on_path = set(path)
    lam = H.lambda_of_solution(g, sol)
    found = None
    for v in path[1:-1]:
        for d in g.rot[v]:
            walk = g.faces[g.face_of[d]]
            if len(walk) == 3 and all(g.tail(x) == v or g.tail(x) not in on_path for x in walk):
                found = walk
        if found:
            break
    assert found, "no triangle hanging off the path"
    walk = found
    for orient in (walk, tuple(x ^ 1 for x in reversed(walk))):
        extra = list(lam)
        for x in orient:
            extra[x], extra[x ^ 1] = (1,), (-1,)
        hf = H.HfInstance(dap, dual.skeleton, tuple(extra), H.domain_from_annotations(dap), frozenset(), ())
        out = H.extract_solution(hf, [H.EPS] * len(g.faces))
        assert out.paths[0] == path
