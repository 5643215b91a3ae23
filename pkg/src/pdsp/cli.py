"""Command-line entry point: ``pdsp <subcommand> ...``.

Exit codes: 0 when a verdict or report was produced, 1 for usage or parse
errors, 2 when an internal invariant check fails.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Sequence

from . import bench, generators, io
from . import homology as H
from .analysis import load
from .errors import FormatError, InvariantViolation, LimitExceeded, PdspError
from .instances import (DspInstance, NoReport, OracleLimits, Solution, check, make_nice, reduce_dag_to_dsp,
                        source_solution_to_nice)
from .pipeline import PipelineConfig, differential, load_corpus, oracle, prepare, shipped_corpus, solve
from .skeleton import dart_vertices, geodesic_steiner_tree, walk_faces


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with 2, which we reserve
        raise UsageError(message)


def _emit(doc: Any, out: str | None = None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True, default=_default)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _default(x: Any) -> Any:
    if isinstance(x, (set, frozenset)):
        return sorted(x)
    if isinstance(x, tuple):
        return list(x)
    return str(x)


def _read_dsp(path: str) -> DspInstance:
    inst = io.read_instance(path)
    if not isinstance(inst, DspInstance):
        raise FormatError("expected a pdsp instance without annotations")
    return inst


def _caps(args) -> OracleLimits:
    return OracleLimits(args.max_vertices, args.node_cap, 1)


def _config(args) -> PipelineConfig:
    return PipelineConfig(backend=args.backend, budgets=tuple(args.budget_L), parallel=args.parallel,
                          seed=args.seed)


def _nices(inst: DspInstance):
    nices = make_nice(inst)
    if isinstance(nices, NoReport):
        return nices.reason, []
    return None, nices


def cmd_solve(args) -> int:
    rep = solve(_read_dsp(args.instance), _config(args))
    if args.out and rep.solution is not None:
        io.write_solution(args.out, Solution.of(rep.solution[i] for i in sorted(rep.solution)))
    _emit(rep.to_json())
    return 0


def cmd_oracle(args) -> int:
    _emit(oracle(_read_dsp(args.instance), _caps(args)).to_json())
    return 0


def cmd_differential(args) -> int:
    corpus = load_corpus(args.dir) if args.dir else shipped_corpus()
    cfg = PipelineConfig(backend=args.backend)
    summary = differential(corpus, cfg, args.dump)
    doc = summary.to_json()
    if not args.verbose:
        doc.pop("rows")
    _emit(doc)
    return 0


def cmd_rings(args) -> int:
    inst = _read_dsp(args.instance)
    reason, nices = _nices(inst)
    comps = []
    for nice in nices:
        ctx, decomp, *_ = prepare(nice)
        terms = [v for p in nice.terminals for v in p]
        rings = []
        for r in decomp.rings:
            mask = sum(1 << i for i, v in enumerate(terms) if v in r.part.X)
            rings.append({
                "mask": mask,
                "split": [list(p) for p in r.part.split],
                "ux": len(r.ux), "umid": len(r.umid), "uy": len(r.uy),
                "cut1": sorted(r.gamma1.cut_edges), "cut2": sorted(r.gamma2.cut_edges),
            })
        comps.append({"pair_ids": list(nice.pair_ids), "terminals": terms,
                      "exhaustive": decomp.exhaustive, "rings": rings})
    _emit({"no_report": reason, "components": comps})
    return 0


def cmd_skeleton(args) -> int:
    inst = _read_dsp(args.instance)
    reason, nices = _nices(inst)
    comps = []
    for nice in nices:
        _, _, tree, ref, dual = prepare(nice)
        doc: dict[str, Any] = {
            "pair_ids": list(nice.pair_ids),
            "T": {"principal": sorted(tree.principal), "spinal": tree.spinal_vertex_paths()},
        }
        if dual is None:
            doc["K"] = None
            doc["no_report"] = ref.reason
        else:
            sk = dual.skeleton
            g = sk.graph
            doc["K"] = {
                "principal": sorted(sk.principal),
                "terminal_faces": {str(v): f for v, f in sorted(sk.terminal_faces.items())},
                "spinal": [walk_faces(g, q) for q in sk.spinal],
                "spinal_darts": [list(q) for q in sk.spinal],
                "crossed_vertices": [dart_vertices(g, q) for q in sk.spinal] if args.verbose else None,
            }
        comps.append(doc)
    _emit({"no_report": reason, "components": comps})
    return 0


def cmd_enum(args) -> int:
    inst = _read_dsp(args.instance)
    reason, nices = _nices(inst)
    comps = []
    for nice in nices:
        _, _, _, _, dual = prepare(nice)
        if dual is None:
            comps.append({"pair_ids": list(nice.pair_ids), "skipped": True})
            continue
        sk = dual.skeleton
        per_L = {}
        prev = -1
        for L in args.budget_L:
            stats: dict[str, int] = {}
            shapes: dict[str, int] = {}
            exhausted = False
            try:
                for n, cand in enumerate(H.enumerate_candidates(sk, nice.terminals, L, prev, args.matching_cap,
                                                                stats)):
                    key = ",".join(map(str, cand.counts))
                    shapes[key] = shapes.get(key, 0) + 1
                    if n + 1 >= args.cap:
                        exhausted = True
                        break
            except H.BudgetExceeded:
                exhausted = True
            per_L[str(L)] = {"candidates": stats.get("candidates", 0), "matchings": stats.get("matchings", 0),
                             "by_counts": shapes, "capped": exhausted}
            prev = L
        comps.append({"pair_ids": list(nice.pair_ids), "spinal": len(sk.spinal), "per_L": per_L})
    _emit({"no_report": reason, "components": comps})
    return 0


def cmd_analyze(args) -> int:
    inst = _read_dsp(args.instance)
    sol = io.read_solution(args.solution)
    verdicts = check(inst, sol)
    if not all(verdicts.values()):
        raise FormatError(f"solution does not validate: {verdicts}")
    reason, nices = _nices(inst)
    paths = dict(enumerate(sol.paths))
    comps = []
    for nice in nices:
        nsol = source_solution_to_nice(nice, paths)
        tree = geodesic_steiner_tree(nice)
        terms = [v for p in nice.terminals for v in p]
        table = []
        for q in tree.spinal_vertex_paths():
            rep = load(nice.graph, nsol, q, terms)
            table.append(rep.to_json())
        comps.append({"pair_ids": list(nice.pair_ids), "k": nice.k, "loads": table})
    _emit({"no_report": reason, "components": comps})
    return 0


def _gen(args) -> DspInstance:
    fam = args.family
    if fam == "grid":
        return generators.gen_grid(args.rows, args.cols, args.weights, args.terminals, args.seed, args.k)
    if fam == "spiral":
        return generators.gen_spiral(args.turns, args.k)
    if fam == "hourglass":
        return generators.gen_hourglass()
    if fam == "crossing":
        return generators.gen_crossing_grid(args.rows, args.cols)
    if fam == "staggered":
        return generators.gen_staggered(args.rows, args.cols, args.k)
    if fam == "dag":
        g, pairs = generators.random_planar_dag(args.rows, args.cols, args.seed, k=args.k)
        red = reduce_dag_to_dsp(g, pairs)
        if isinstance(red, NoReport):
            raise UsageError(f"dag reduction failed: {red.reason}")
        return red[0]
    raise UsageError(f"unknown family {fam!r}")


def cmd_gen(args) -> int:
    if args.family == "corpus":
        if not args.out:
            raise UsageError("gen corpus needs --out DIR")
        d = Path(args.out)
        d.mkdir(parents=True, exist_ok=True)
        specs = generators.corpus_specs()
        for name, inst in specs:
            io.write_instance(d / f"{name}.pdsp.json", inst)
        _emit({"written": len(specs), "dir": str(d)})
        return 0
    inst = _gen(args)
    if args.out:
        io.write_instance(args.out, inst)
    else:
        print(io.dumps_instance(inst))
    return 0


def cmd_check(args) -> int:
    inst = io.read_instance(args.instance)
    sol = io.read_solution(args.solution)
    verdicts = check(inst, sol)
    _emit({"valid": all(verdicts.values()), "checks": verdicts})
    return 0


def cmd_bench(args) -> int:
    rows = bench.run(args.repeat, args.seed)
    if args.json:
        _emit(rows)
    else:
        print(bench.format_rows(rows))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pdsp", description="Planar disjoint shortest paths toolkit.")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    def budgets(sp):
        sp.add_argument("--budget-L", type=int, nargs="+", default=[4, 8, 16], metavar="L")

    def caps(sp):
        sp.add_argument("--max-vertices", type=int, default=400)
        sp.add_argument("--node-cap", type=int, default=2_000_000)

    def backend(sp):
        sp.add_argument("--backend", choices=("path-search", "shift-search"), default="path-search")

    sp = sub.add_parser("solve", help="run the full pipeline on one instance")
    sp.add_argument("instance")
    backend(sp)
    budgets(sp)
    sp.add_argument("--parallel", type=int, default=1)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", help="write the solution here when the verdict is yes")
    sp.set_defaults(fn=cmd_solve)

    sp = sub.add_parser("oracle", help="brute-force verdict")
    sp.add_argument("instance")
    caps(sp)
    sp.set_defaults(fn=cmd_oracle)

    sp = sub.add_parser("differential", help="solve against oracle over a corpus directory")
    sp.add_argument("dir", nargs="?", help="defaults to the shipped corpus")
    backend(sp)
    sp.add_argument("--dump", help="write mismatching instances here")
    sp.add_argument("--verbose", action="store_true", help="include per-instance rows")
    sp.set_defaults(fn=cmd_differential)

    sp = sub.add_parser("rings", help="ring decomposition report")
    sp.add_argument("instance")
    sp.set_defaults(fn=cmd_rings)

    sp = sub.add_parser("skeleton", help="Steiner tree T and dual skeleton K")
    sp.add_argument("instance")
    sp.add_argument("--verbose", action="store_true")
    sp.set_defaults(fn=cmd_skeleton)

    sp = sub.add_parser("enum-homology", help="candidate statistics per L")
    sp.add_argument("instance")
    budgets(sp)
    sp.add_argument("--cap", type=int, default=100_000, help="stop counting after this many candidates per L")
    sp.add_argument("--matching-cap", type=int, default=2_000_000)
    sp.set_defaults(fn=cmd_enum)

    sp = sub.add_parser("analyze", help="per-spinal-path load table for a solution")
    sp.add_argument("instance")
    sp.add_argument("solution")
    sp.set_defaults(fn=cmd_analyze)

    sp = sub.add_parser("gen", help="generate instances")
    sp.add_argument("family", choices=("grid", "spiral", "hourglass", "crossing", "staggered", "dag", "corpus"))
    sp.add_argument("--rows", type=int, default=3)
    sp.add_argument("--cols", type=int, default=3)
    sp.add_argument("--k", type=int, default=1)
    sp.add_argument("--turns", type=int, default=1)
    sp.add_argument("--weights", default="unit")
    sp.add_argument("--terminals", default="corners")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_gen)

    sp = sub.add_parser("check", help="validate a solution against an instance")
    sp.add_argument("instance")
    sp.add_argument("solution")
    sp.set_defaults(fn=cmd_check)

    sp = sub.add_parser("bench", help="time compiled kernels against the Python fallback")
    sp.add_argument("--repeat", type=int, default=5)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(fn=cmd_bench)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.fn(args)
    except UsageError as e:
        print(f"pdsp: usage error: {e}", file=sys.stderr)
        return 1
    except InvariantViolation as e:
        print(f"pdsp: invariant violation: {e}", file=sys.stderr)
        return 2
    except (FormatError, LimitExceeded, OSError, json.JSONDecodeError, ValueError) as e:
        print(f"pdsp: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    except PdspError as e:
        print(f"pdsp: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
