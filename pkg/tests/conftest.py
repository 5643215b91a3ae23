import math
import sys
from pathlib import Path

import pytest

from pdsp import generators
from pdsp.plane import PlaneMultigraph

sys.path.insert(0, str(Path(__file__).parent))


def geometric_faces(coords, ends):
    """Independent face count: walk half-edges by angle, no rotation system used."""
    out = {}
    for u, v in ends:
        out.setdefault(u, []).append(v)
        out.setdefault(v, []).append(u)
    for u in out:
        x, y = coords[u]
        out[u].sort(key=lambda w: math.atan2(coords[w][1] - y, coords[w][0] - x))
    seen = set()
    lengths = []
    for u in out:
        for v in out[u]:
            if (u, v) in seen:
                continue
            n = 0
            a, b = u, v
            while (a, b) not in seen:
                seen.add((a, b))
                n += 1
                nb = out[b]
                i = nb.index(a)
                a, b = b, nb[(i - 1) % len(nb)]
            lengths.append(n)
    return sorted(lengths)


def straight(ends, coords, weights=None, outer=None) -> PlaneMultigraph:
    n = len(coords)
    w = weights if weights is not None else [1] * len(ends)
    return PlaneMultigraph(n, ends, w, generators.rotation_from_coords(n, ends, coords), outer)


def grid_coords(rows, cols):
    return [(c, -r) for r in range(rows) for c in range(cols)]


@pytest.fixture
def grid3():
    return generators.gen_grid(3, 3)


_FINAL = {}


def final_components(name, max_solutions=200):
    """(nice, ref, dual, lifted oracle solutions) per nice component of a corpus instance."""
    from pdsp.instances import OracleLimits, all_solutions, make_nice
    from pdsp.pipeline import lift_solution, prepare

    key = (name, max_solutions)
    if key not in _FINAL:
        inst = dict(generators.corpus_specs())[name]
        nices = make_nice(inst)
        out = []
        for nice in nices if isinstance(nices, list) else []:
            _, _, _, ref, dual = prepare(nice)
            if dual is None:
                continue
            sols = all_solutions(nice, OracleLimits(max_solutions=max_solutions))
            out.append((nice, ref, dual, [lift_solution(ref, dual, s) for s in sols]))
        _FINAL[key] = out
    return _FINAL[key]


ACCEPTANCE: dict[int, tuple[bool, str, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, title, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}")
