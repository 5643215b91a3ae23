"""End-to-end solve, the brute-force oracle, and differential runs over a corpus."""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterable

from . import homology as H
from . import io
from .analysis import dual_load
from .errors import NoCompatible
from .instances import (DapInstance, DspInstance, NiceInstance, NoReport, OracleLimits, Solution,
                        all_solutions, brute_force_solve, check, make_nice, nice_solution_to_source)
from .rings import RingContext, decompose
from .skeleton import DualizeResult, RefineResult, dualize_skeleton, geodesic_steiner_tree, refine


@dataclass(frozen=True)
class PipelineConfig:
    backend: str = "path-search"
    budgets: tuple[int, ...] = (4, 8, 16)
    parallel: int = 1
    oracle_caps: OracleLimits = OracleLimits(max_vertices=400, node_cap=2_000_000, max_solutions=5000)
    matching_cap: int = 2_000_000
    shift_bound: int = 4
    shift_nodes: int = 20_000
    candidate_cap: int = 5_000
    seed: int = 0

    def __post_init__(self) -> None:
        if any(b <= a for a, b in zip(self.budgets, self.budgets[1:])) or not self.budgets:
            raise ValueError("budgets must be a non-empty strictly increasing schedule")
        if self.parallel < 1:
            raise ValueError("parallelism must be at least 1")
        if self.backend not in ("path-search", "shift-search"):
            raise ValueError(f"unknown backend {self.backend!r}")


@dataclass
class ComponentReport:
    pair_ids: tuple[int, ...]
    k: int
    n: int
    rings: list[dict[str, Any]] = field(default_factory=list)
    tree_spinal: int = 0
    tree_geodesic: bool = True
    refined_spinal: int = 0
    excised: bool = True
    skeleton_spinal: int = 0
    final_n: int = 0
    index_size: int = 0
    index_complete: bool = True
    candidates: dict[int, int] = field(default_factory=dict)
    incompatible: int = 0
    accepted_L: int | None = None
    accepted_mapping: list[list[int]] | None = None
    true_mapping: list[list[int]] | None = None
    loads: list[int] = field(default_factory=list)
    verdict: str = ""


@dataclass
class RunReport:
    verdict: str  # "yes", "no" or "budget-exhausted"
    solution: dict[int, list[int]] | None = None
    timings: dict[str, float] = field(default_factory=dict)
    components: list[ComponentReport] = field(default_factory=list)
    checks: dict[str, bool] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    seed: int = 0

    def to_json(self) -> dict[str, Any]:
        doc = asdict(self)
        if self.solution is not None:
            doc["solution"] = {str(i): p for i, p in sorted(self.solution.items())}
        return doc


class _Clock:
    def __init__(self, timings: dict[str, float]) -> None:
        self.timings = timings

    def __call__(self, name: str):
        clock = self

        class _Span:
            def __enter__(self):
                self.t = time.perf_counter()

            def __exit__(self, *exc):
                clock.timings[name] = clock.timings.get(name, 0.0) + time.perf_counter() - self.t
                return False

        return _Span()


def prepare(nice: NiceInstance) -> tuple[RingContext, Any, Any, RefineResult | NoReport, DualizeResult | None]:
    """Rings, Steiner tree, refinement and the dual skeleton for one nice instance."""
    terms = [v for p in nice.terminals for v in p]
    ctx = RingContext(nice, terms)
    decomp = decompose(ctx)
    tree = geodesic_steiner_tree(nice)
    ref = refine(nice, tree, decomp, ctx)
    if isinstance(ref, NoReport):
        return ctx, decomp, tree, ref, None
    return ctx, decomp, tree, ref, dualize_skeleton(ref.transformed, ref.tree)


def lift_solution(ref: RefineResult, dual: DualizeResult, sol: Solution) -> Solution:
    return dual.transformed.from_previous(ref.transformed.from_previous(sol))


def lower_solution(ref: RefineResult, dual: DualizeResult, sol: Solution) -> Solution:
    return ref.transformed.to_previous(dual.transformed.to_previous(sol))


def _ring_summary(decomp) -> list[dict[str, Any]]:
    return [
        {"X": sorted(r.part.X), "Y": sorted(r.part.Y), "ux": len(r.ux), "umid": len(r.umid), "uy": len(r.uy)}
        for r in decomp.rings
    ]


def _try_candidate(dap: DapInstance, sk, cand: H.HomologyCandidate, index, frame, cfg: PipelineConfig):
    try:
        hf = H.build_hf_instance(dap, sk, cand.mapping, frame)
    except NoCompatible:
        return "incompatible", None
    try:
        psi = H.solve_hf(hf, cfg.backend, index=index, bound=cfg.shift_bound, frame=frame,
                         node_cap=cfg.shift_nodes)
    except H.BudgetExceeded:
        return "budget", None
    if psi is None:
        return "none", None
    sol = H.extract_solution(hf, psi)
    if not all(check(dap, sol).values()):
        return "invalid", None
    return "ok", sol


def _batches(it, size):
    batch = []
    for x in it:
        batch.append(x)
        if len(batch) == size:
            yield batch
            batch = []
    if batch:
        yield batch


def solve_nice(nice: NiceInstance, cfg: PipelineConfig, clock: _Clock) -> tuple[ComponentReport, Solution | None]:
    rep = ComponentReport(nice.pair_ids, nice.k, nice.graph.n)
    with clock("rings"):
        terms = [v for p in nice.terminals for v in p]
        ctx = RingContext(nice, terms)
        decomp = decompose(ctx)
        rep.rings = _ring_summary(decomp)
    with clock("skeleton"):
        tree = geodesic_steiner_tree(nice)
        rep.tree_spinal = len(tree.spinal)
        ref = refine(nice, tree, decomp, ctx)
        if isinstance(ref, NoReport):
            rep.verdict = "no"
            return rep, None
        rep.refined_spinal = len(ref.tree.spinal)
        rep.excised = ref.excised
        dual = dualize_skeleton(ref.transformed, ref.tree)
        sk = dual.skeleton
        dap = dual.transformed.dap
        rep.skeleton_spinal = len(sk.spinal)
        rep.final_n = dap.graph.n
    with clock("index"):
        index = None
        if cfg.backend == "path-search":
            sols = all_solutions(nice, cfg.oracle_caps)
            complete = len(sols) < cfg.oracle_caps.max_solutions
            lifted = [lift_solution(ref, dual, s) for s in sols]
            index = H.build_index(dap, sk, lifted, complete)
            rep.index_size = len(index)
            rep.index_complete = complete
            if not sols:
                rep.verdict = "no"
                return rep, None
    frame = H.compact_frame(dap, sk)
    prev = -1
    for L in cfg.budgets:
        stream = H.enumerate_candidates(sk, nice.terminals, L, prev, cfg.matching_cap)
        tried = 0
        found = None
        try:
            for batch in _batches(stream, 1 if cfg.parallel == 1 else 16 * cfg.parallel):
                with clock("homology"):
                    if cfg.parallel > 1:
                        with ThreadPoolExecutor(cfg.parallel) as ex:
                            results = list(ex.map(lambda c: _try_candidate(dap, sk, c, index, frame, cfg), batch))
                    else:
                        results = [_try_candidate(dap, sk, c, index, frame, cfg) for c in batch]
                for c, (r, sol) in zip(batch, results):
                    tried += 1
                    rep.incompatible += r == "incompatible"
                    if r == "ok":
                        found = (c, sol)
                        break
                if found:
                    break
                if tried >= cfg.candidate_cap:
                    raise H.BudgetExceeded(f"more than {cfg.candidate_cap} candidates at L={L}")
        except H.BudgetExceeded:
            rep.candidates[L] = tried
            rep.verdict = "budget-exhausted"
            return rep, None
        rep.candidates[L] = tried
        if found is not None:
            cand, sol = found
            lam = H.lambda_of_solution(dap.graph, sol)
            rep.accepted_L = L
            rep.accepted_mapping = [list(w) for w in cand.mapping]
            rep.true_mapping = [list(w) for w in H.true_mapping(sk, lam)]
            rep.loads = [dual_load(dap.graph, sol, q) for q in sk.spinal]
            rep.verdict = "yes"
            return rep, lower_solution(ref, dual, sol)
        prev = L
    rep.verdict = "budget-exhausted"
    return rep, None


def solve(inst: DspInstance, cfg: PipelineConfig = PipelineConfig()) -> RunReport:
    report = RunReport("budget-exhausted", seed=cfg.seed)
    clock = _Clock(report.timings)
    with clock("nice"):
        nices = make_nice(inst)
    if isinstance(nices, NoReport):
        report.verdict = "no"
        report.notes.append(nices.reason)
        return report
    paths: dict[int, tuple[int, ...]] = {}
    verdicts = []
    for nice in nices:
        rep, sol = solve_nice(nice, cfg, clock)
        report.components.append(rep)
        verdicts.append(rep.verdict)
        if rep.verdict == "no":
            break
        if sol is not None:
            paths.update(nice_solution_to_source(nice, sol))
    if "no" in verdicts:
        report.verdict = "no"
        return report
    if all(v == "yes" for v in verdicts) and len(paths) == inst.k:
        sol = Solution.of([list(paths[i]) for i in range(inst.k)])
        with clock("validate"):
            report.checks = check(inst, sol)
        if all(report.checks.values()):
            report.verdict = "yes"
            report.solution = {i: list(p) for i, p in enumerate(sol.paths)}
        else:
            report.verdict = "budget-exhausted"
            report.notes.append("assembled solution failed validation")
        return report
    report.verdict = "budget-exhausted"
    return report


def oracle(inst: DspInstance, caps: OracleLimits = OracleLimits()) -> RunReport:
    """Brute force on the source instance; raises LimitExceeded past the caps."""
    report = RunReport("no")
    clock = _Clock(report.timings)
    vs = [v for p in inst.terminals for v in p]
    if len(set(vs)) != len(vs):
        report.notes.append("a vertex is shared by two pairs")
        return report
    with clock("oracle"):
        sol = brute_force_solve(inst, caps)
    if sol is not None:
        report.checks = check(inst, sol)
        if not all(report.checks.values()):
            raise AssertionError("oracle produced an invalid solution")
        report.verdict = "yes"
        report.solution = {i: list(p) for i, p in enumerate(sol.paths)}
    return report


@dataclass
class DifferentialSummary:
    total: int
    mismatches: list[str]
    rows: list[dict[str, Any]]
    seconds: float

    def to_json(self) -> dict[str, Any]:
        return asdict(self)


def load_corpus(path: str | Path) -> list[tuple[str, DspInstance]]:
    out = []
    for f in sorted(Path(path).glob("*.pdsp.json")):
        out.append((f.name[: -len(".pdsp.json")], io.read_instance(f)))
    return out


def differential(corpus: Iterable[tuple[str, DspInstance]], cfg: PipelineConfig = PipelineConfig(),
                 dump_dir: str | Path | None = None) -> DifferentialSummary:
    t0 = time.perf_counter()
    rows = []
    bad = []
    for name, inst in corpus:
        a = solve(inst, cfg)
        b = oracle(inst, cfg.oracle_caps)
        row = {"name": name, "k": inst.k, "n": inst.graph.n, "solve": a.verdict, "oracle": b.verdict,
               "accepted_L": [c.accepted_L for c in a.components],
               "skeleton_spinal": [c.skeleton_spinal for c in a.components],
               "loads": [c.loads for c in a.components]}
        rows.append(row)
        if a.verdict != b.verdict:
            bad.append(name)
            if dump_dir is not None:
                Path(dump_dir).mkdir(parents=True, exist_ok=True)
                io.write_instance(Path(dump_dir) / f"{name}.pdsp.json", inst)
    return DifferentialSummary(len(rows), bad, rows, time.perf_counter() - t0)


def corpus_dir() -> Path:
    return Path(__file__).parent / "corpus"


def shipped_corpus() -> list[tuple[str, DspInstance]]:
    return load_corpus(corpus_dir())
