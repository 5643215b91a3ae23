import json

import pytest
from hypothesis import given, settings, strategies as st

from conftest import straight
from oracles import dag_solvable, naive_solutions
from pdsp import generators, io
from pdsp.errors import FormatError, LimitExceeded
from pdsp.geodesics import distances, st_dag
from pdsp.instances import (DapInstance, DspInstance, NoReport, OracleLimits, Solution, all_solutions, annotate,
                            brute_force_solve, check, check_nice, dag_disjoint_paths, is_valid, make_nice,
                            nice_solution_to_source, reduce_dag_to_dsp, source_solution_to_nice)
from pdsp.pipeline import shipped_corpus


def test_make_nice_grid3_corner_pair():
    inst = generators.gen_grid(3, 3)
    nices = make_nice(inst)
    assert len(nices) == 1
    nice = nices[0]
    assert check_nice(nice) == (True, True, True, True)
    assert nice.graph.n == 9 + 2
    # all 12 grid edges lie on some corner geodesic, plus two pendants
    assert nice.graph.m == 14


def test_make_nice_prunes_off_dag_edges():
    inst = generators.gen_grid(3, 3, terminals="single-pair")
    inst = DspInstance(inst.graph, ((0, 4),))
    nice = make_nice(inst)[0]
    kept = {(nice.origin[nice.graph.eu[e]], nice.origin[nice.graph.ev[e]]) for e in range(nice.graph.m)}
    assert kept - {(a, b) for a, b in kept if a is None or b is None} == {(0, 1), (1, 4), (0, 3), (3, 4)}


def test_make_nice_different_components():
    g = straight([(0, 1), (2, 3)], [(0, 0), (1, 0), (0, 2), (1, 2)])
    assert isinstance(make_nice(DspInstance(g, ((0, 2),))), NoReport)


def test_make_nice_shared_terminal():
    g = generators.grid_graph(2, 3)
    assert isinstance(make_nice(DspInstance(g, ((0, 2), (2, 5)))), NoReport)


def test_make_nice_splits_components():
    inst = generators.gen_path([1, 1, 1, 1, 1], [(0, 1), (3, 5)])
    nices = make_nice(inst)
    assert sorted(n.pair_ids for n in nices) == [(0,), (1,)]


def test_nice_solution_roundtrip():
    inst = generators.gen_grid(3, 3)
    nice = make_nice(inst)[0]
    sol = brute_force_solve(inst)
    paths = dict(enumerate(sol.paths))
    assert nice_solution_to_source(nice, source_solution_to_nice(nice, paths)) == paths


def test_annotate_path():
    g = straight([(0, 1), (1, 2)], [(0, 0), (1, 0), (2, 0)])
    dap = annotate(DspInstance(g, ((0, 2),)))
    assert dap.annotations[0] == {0, 2}


def test_annotate_diamond():
    g = straight([(0, 1), (1, 2), (2, 3), (3, 0)], [(0, 0), (1, 0), (1, -1), (0, -1)])
    assert len(annotate(DspInstance(g, ((0, 2),))).annotations[0]) == 4


def test_annotate_crossing_pairs_differ():
    dap = annotate(generators.gen_crossing_grid())
    a, b = dap.annotations
    shared = {d >> 1 for d in a} & {d >> 1 for d in b}
    assert shared
    assert all(d not in b for d in a if d >> 1 in shared and d ^ 1 in b)


def test_reduce_single_arc():
    dag = straight([(0, 1)], [(0, 0), (1, 0)])
    inst, back = reduce_dag_to_dsp(dag, [(0, 1)])
    assert inst.graph.m == 1 and back == [0, 1]


def test_reduce_subdivides_skipping_arc():
    # arcs 0->1, 1->2, 0->2: the long arc skips 2 positions
    dag = straight([(0, 1), (1, 2), (0, 2)], [(0, 0), (1, 0), (2, 1)])
    inst, back = reduce_dag_to_dsp(dag, [(0, 2)])
    assert inst.graph.n == 4 and back.count(-1) == 1
    assert inst.graph.m == 4


def test_reduce_unreachable():
    dag = straight([(1, 0)], [(0, 0), (1, 0)])
    assert isinstance(reduce_dag_to_dsp(dag, [(0, 1)]), NoReport)


@pytest.mark.parametrize("seed", range(12))
def test_reduce_preserves_solvability(seed):
    dag, pairs = generators.random_planar_dag(3, 3, seed, k=2)
    red = reduce_dag_to_dsp(dag, pairs)
    expected = dag_solvable(dag, pairs)
    if isinstance(red, NoReport):
        assert not expected
        return
    inst, _ = red
    assert (brute_force_solve(inst) is not None) == expected
    assert (dag_disjoint_paths(dag, pairs) is not None) == expected


def test_gen_grid_deterministic():
    a = generators.gen_grid(3, 3, "random{1..5}", "corners", 7)
    b = generators.gen_grid(3, 3, "random{1..5}", "corners", 7)
    assert io.dumps_instance(a) == io.dumps_instance(b)
    assert generators.gen_grid(3, 3).terminals == ((0, 8),)


def test_gen_grid_2x2_single_pair():
    sol = brute_force_solve(generators.gen_grid(2, 2, terminals="single-pair"))
    assert len(sol.paths[0]) == 3


def test_gen_staggered_solvable():
    for rows, cols, k in [(3, 3, 2), (4, 3, 3)]:
        assert brute_force_solve(generators.gen_staggered(rows, cols, k)) is not None


def test_grid3_oracle_length_four():
    sol = brute_force_solve(generators.gen_grid(3, 3))
    assert len(sol.paths[0]) == 5
    assert is_valid(generators.gen_grid(3, 3), sol)


def test_same_vertex_demanded_twice():
    assert brute_force_solve(generators.gen_hourglass()) is None


def test_cycle4_two_single_edges():
    inst = generators.gen_cycle(4, [(0, 1), (2, 3)])
    assert brute_force_solve(inst).paths == ((0, 1), (2, 3))


def test_oracle_caps():
    with pytest.raises(LimitExceeded):
        brute_force_solve(generators.gen_grid(3, 3), OracleLimits(max_vertices=4))
    with pytest.raises(LimitExceeded):
        all_solutions(generators.gen_grid(4, 5, terminals="random", seed=3, k=3), OracleLimits(node_cap=3))


@pytest.mark.parametrize("name", [n for n, _ in generators.corpus_specs()][::3])
def test_all_solutions_against_naive_oracle(name):
    inst = dict(generators.corpus_specs())[name]
    got = {s.paths for s in all_solutions(inst, OracleLimits(max_solutions=10**6))}
    assert got == set(naive_solutions(inst))


def test_check_reports_each_invariant():
    inst = generators.gen_crossing_grid()
    bad = Solution.of([[0, 1, 2, 5, 8], [2, 5, 4, 3, 6]])
    rep = check(inst, bad)
    assert rep["endpoints"] and rep["edges_exist"] and not rep["disjoint"]
    rep = check(inst, Solution.of([[0, 1, 2, 5, 8]]))
    assert not rep["pair_count"]
    rep = check(generators.gen_grid(3, 3), Solution.of([[0, 1, 2, 5, 4, 7, 8]]))
    assert not rep["geodesic"]


def test_check_annotated():
    dap = annotate(generators.gen_grid(3, 3))
    assert check(dap, Solution.of([[0, 1, 2, 5, 8]]))["in_annotations"]
    assert not check(DapInstance(dap.graph, dap.terminals, (frozenset(),)),
                     Solution.of([[0, 1, 2, 5, 8]]))["in_annotations"]


def test_io_roundtrip(tmp_path):
    for name, inst in generators.corpus_specs()[:8]:
        back = io.loads_instance(io.dumps_instance(inst))
        assert back.terminals == inst.terminals
        assert back.graph.rot == inst.graph.rot and back.graph.weight == inst.graph.weight
    dap = annotate(generators.gen_grid(3, 3))
    assert io.loads_instance(io.dumps_instance(dap)).annotations == dap.annotations
    sol = Solution.of([[0, 1, 2]])
    io.write_solution(tmp_path / "a.sol.json", sol)
    assert io.read_solution(tmp_path / "a.sol.json") == sol


@pytest.mark.parametrize("text", ["{", "[]", '{"format": "pdsp"}', '{"format": "other", "version": 1}'])
def test_io_rejects_malformed(text):
    with pytest.raises((FormatError, json.JSONDecodeError)):
        io.loads_instance(text)


def test_shipped_corpus_matches_generators():
    shipped = dict(shipped_corpus())
    specs = generators.corpus_specs()
    assert len(shipped) == len(specs) >= 50
    for name, inst in specs:
        assert io.dumps_instance(shipped[name]) == io.dumps_instance(inst)
        assert shipped[name].graph.n <= 14 and shipped[name].k <= 3


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 2))
def test_brute_force_solutions_validate(seed, k):
    inst = generators.gen_grid(3, 3, weights="random{1..3}", terminals="random", seed=seed, k=k)
    sol = brute_force_solve(inst)
    if sol is not None:
        assert is_valid(inst, sol)
    else:
        assert not naive_solutions(inst)


def test_st_dag_matches_annotation():
    inst = generators.gen_grid(3, 4, terminals="random", seed=5, k=2)
    o = distances(inst.graph)
    assert annotate(inst).annotations == tuple(st_dag(inst.graph, o, s, t).arcs for s, t in inst.terminals)
