import json
import subprocess
import sys

import pytest

from pdsp import cli, generators, io
from pdsp.errors import InvariantViolation


def run(capsys, *argv):
    rc = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return rc, out, err


def doc(capsys, *argv):
    rc, out, _ = run(capsys, *argv)
    assert rc == 0
    return json.loads(out)


@pytest.fixture
def grid3_file(tmp_path):
    p = tmp_path / "g.pdsp.json"
    io.write_instance(p, generators.gen_grid(3, 3))
    return p


@pytest.fixture
def staggered_file(tmp_path):
    p = tmp_path / "s.pdsp.json"
    io.write_instance(p, dict(generators.corpus_specs())["staggered-3x3-k2"])
    return p


def test_solve_writes_solution(capsys, tmp_path, grid3_file):
    out = tmp_path / "g.sol.json"
    d = doc(capsys, "solve", grid3_file, "--out", out)
    assert d["verdict"] == "yes"
    d = doc(capsys, "check", grid3_file, out)
    assert d["valid"] and all(d["checks"].values())


def test_solve_options(capsys, staggered_file):
    d = doc(capsys, "solve", staggered_file, "--backend", "shift-search", "--budget-L", "4", "8",
            "--parallel", "2", "--seed", "3")
    assert d["verdict"] == "yes" and d["seed"] == 3


def test_oracle_and_limits(capsys, grid3_file):
    assert doc(capsys, "oracle", grid3_file)["verdict"] == "yes"
    rc, _, err = run(capsys, "oracle", grid3_file, "--max-vertices", "3")
    assert rc == 1 and "LimitExceeded" in err


def test_differential_dir(capsys, tmp_path):
    for name, inst in [("a", generators.gen_grid(3, 3)), ("b", generators.gen_hourglass())]:
        io.write_instance(tmp_path / f"{name}.pdsp.json", inst)
    d = doc(capsys, "differential", tmp_path, "--verbose")
    assert d["total"] == 2 and d["mismatches"] == []
    assert [r["solve"] for r in d["rows"]] == ["yes", "no"]
    assert "rows" not in doc(capsys, "differential", tmp_path)


def test_rings(capsys, staggered_file):
    d = doc(capsys, "rings", staggered_file)
    (comp,) = d["components"]
    assert comp["exhaustive"] and comp["rings"]
    assert {"mask", "split", "ux", "umid", "uy", "cut1", "cut2"} <= comp["rings"][0].keys()


def test_skeleton(capsys, staggered_file):
    d = doc(capsys, "skeleton", staggered_file, "--verbose")
    (comp,) = d["components"]
    k = comp["K"]
    assert len(k["spinal"]) == len(k["spinal_darts"]) <= 4 * 2 - 3
    assert k["crossed_vertices"] is not None


def test_enum_homology(capsys, staggered_file):
    d = doc(capsys, "enum-homology", staggered_file, "--budget-L", "2", "4", "--cap", "50")
    per = d["components"][0]["per_L"]
    assert set(per) == {"2", "4"}
    assert per["4"]["candidates"] >= 1


def test_analyze(capsys, tmp_path, staggered_file):
    sol = tmp_path / "s.sol.json"
    assert doc(capsys, "solve", staggered_file, "--out", sol)["verdict"] == "yes"
    d = doc(capsys, "analyze", staggered_file, sol)
    table = d["components"][0]["loads"]
    assert table and all(r["upper_comb_load"] <= r["load"] for r in table)


def test_analyze_rejects_invalid(capsys, tmp_path, grid3_file):
    bad = tmp_path / "bad.sol.json"
    bad.write_text(json.dumps({"format": "sol", "version": 1, "paths": [[0, 3, 4, 1, 2, 5, 8]]}))
    assert doc(capsys, "check", grid3_file, bad)["checks"]["geodesic"] is False
    rc, _, err = run(capsys, "analyze", grid3_file, bad)
    assert rc == 1 and "does not validate" in err
    bad.write_text(json.dumps({"paths": [[0, 1, 2, 5, 8]]}))
    rc, _, err = run(capsys, "analyze", grid3_file, bad)
    assert rc == 1 and "FormatError" in err


@pytest.mark.parametrize("argv", [
    ["grid", "--rows", "2", "--cols", "3"],
    ["spiral", "--turns", "2", "--k", "2"],
    ["hourglass"],
    ["crossing"],
    ["staggered", "--rows", "3", "--cols", "4", "--k", "2"],
    ["dag", "--rows", "3", "--cols", "3", "--seed", "1"],
])
def test_gen_families(capsys, tmp_path, argv):
    out = tmp_path / "x.pdsp.json"
    rc, _, _ = run(capsys, "gen", *argv, "--out", out)
    assert rc == 0
    assert io.read_instance(out).graph.n > 0


def test_gen_corpus(capsys, tmp_path):
    d = doc(capsys, "gen", "corpus", "--out", tmp_path)
    assert d["written"] == len(list(tmp_path.glob("*.pdsp.json"))) >= 50
    assert run(capsys, "gen", "corpus")[0] == 1


def test_bench_json(capsys):
    rows = doc(capsys, "bench", "--repeat", "1", "--json")
    assert {r["kernel"] for r in rows} == {"reduce_word", "disjoint_paths", "bracket_matchings"}


def test_usage_errors(capsys, tmp_path):
    assert run(capsys)[0] == 1
    assert run(capsys, "frobnicate")[0] == 1
    assert run(capsys, "solve", tmp_path / "missing.json")[0] == 1
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    assert run(capsys, "solve", broken)[0] == 1
    assert run(capsys, "solve", broken, "--backend", "magic")[0] == 1


def test_invariant_violation_exit_code(capsys, monkeypatch, grid3_file):
    def boom(*a, **k):
        raise InvariantViolation("spinal path is not a geodesic")

    monkeypatch.setattr(cli, "solve", boom)
    rc, _, err = run(capsys, "solve", grid3_file)
    assert rc == 2 and "invariant" in err


def test_module_entry_point(grid3_file):
    r = subprocess.run([sys.executable, "-m", "pdsp.cli", "solve", str(grid3_file)],
                       capture_output=True, text=True, check=False)
    assert r.returncode == 0
    assert json.loads(r.stdout)["verdict"] == "yes"
