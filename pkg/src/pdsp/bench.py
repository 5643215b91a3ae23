"""Timing of the hot kernels, compiled against pure Python."""

from __future__ import annotations

import random
import time
from typing import Callable

from . import generators
from .instances import annotate
from .kernels import implementations


def _best_of(fn: Callable[[], object], repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def _workloads(seed: int) -> dict[str, Callable[[object], Callable[[], object]]]:
    rng = random.Random(seed)
    words = [[rng.choice((1, -1, 2, -2, 3, -3)) for _ in range(400)] for _ in range(200)]
    inst = annotate(generators.gen_grid(4, 4, terminals="random", seed=seed, k=2))
    g = inst.graph
    succ = [[sorted(g.head(d) for d in g.rot[v] if d in a) for v in range(g.n)] for a in inst.annotations]
    srcs = [s for s, _ in inst.terminals]
    tgts = [t for _, t in inst.terminals]
    sizes = [1, 3, 1, 3, 1, 3, 1, 3]

    return {
        "reduce_word": lambda m: (lambda: [m.reduce_word(w) for w in words]),
        "disjoint_paths": lambda m: (lambda: m.disjoint_paths(g.n, succ, srcs, tgts, 10_000, 10_000_000)),
        "bracket_matchings": lambda m: (lambda: m.bracket_matchings(sizes)),
    }


def run(repeat: int = 5, seed: int = 0) -> list[dict[str, object]]:
    rows = []
    impls = implementations()
    for name, make in _workloads(seed).items():
        row: dict[str, object] = {"kernel": name}
        for label, mod in impls.items():
            row[label] = _best_of(make(mod), repeat)
        if "cython" in row:
            row["speedup"] = row["python"] / max(row["cython"], 1e-12)  # type: ignore[operator]
        rows.append(row)
    return rows


def format_rows(rows: list[dict[str, object]]) -> str:
    lines = [f"{'kernel':<20}{'python (s)':>12}{'cython (s)':>12}{'speedup':>9}"]
    for r in rows:
        cy = r.get("cython")
        sp = r.get("speedup")
        lines.append(
            f"{r['kernel']:<20}{r['python']:>12.5f}"
            + (f"{cy:>12.5f}{sp:>8.1f}x" if cy is not None else f"{'n/a':>12}{'':>9}")
        )
    return "\n".join(lines)
