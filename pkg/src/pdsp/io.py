"""JSON documents for instances (``*.pdsp.json``, ``*.pdap.json``) and solutions (``*.sol.json``).

Writers emit one top-level key per line with compact values, so reading a
document and writing it again reproduces the same bytes.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any

from .errors import EmbeddingError, FormatError
from .instances import DapInstance, DspInstance, Solution
from .plane import PlaneMultigraph, build

VERSION = 1


def _dump(doc: dict[str, Any]) -> str:
    lines = []
    for key, value in doc.items():
        if isinstance(value, list) and value and isinstance(value[0], (list, dict)):
            inner = ",\n".join("  " + json.dumps(x, separators=(",", ":")) for x in value)
            lines.append(f' {json.dumps(key)}: [\n{inner}\n ]')
        else:
            lines.append(f" {json.dumps(key)}: {json.dumps(value, separators=(',', ':'))}")
    return "{\n" + ",\n".join(lines) + "\n}\n"


def graph_doc(g: PlaneMultigraph) -> dict[str, Any]:
    rotations = [[d >> 1 for d in r] for r in g.rot]
    return {
        "vertices": list(range(g.n)),
        "edges": [
            {"id": e, "u": g.eu[e], "v": g.ev[e], "w": [g.weight[e].numerator, g.weight[e].denominator]}
            for e in range(g.m)
        ],
        "rotations": rotations,
        "outer_face_hint": g.faces[g.outer][0] if g.outer >= 0 and g.faces else None,
    }


def graph_from_doc(doc: dict[str, Any]) -> PlaneMultigraph:
    try:
        vertices = doc["vertices"]
        if vertices != list(range(len(vertices))):
            raise FormatError("vertex ids must be 0..n-1 in order")
        edges = doc["edges"]
        ends = []
        weights = []
        for i, e in enumerate(edges):
            if e["id"] != i:
                raise FormatError("edge ids must be 0..m-1 in order")
            num, den = e["w"]
            if not isinstance(num, int) or not isinstance(den, int) or den <= 0:
                raise FormatError(f"edge {i}: weight must be [num, den] integers")
            ends.append((int(e["u"]), int(e["v"])))
            weights.append(Fraction(num, den))
        return build(len(vertices), ends, doc["rotations"], weights, doc.get("outer_face_hint"))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed graph document: {exc}") from exc
    except EmbeddingError as exc:
        raise FormatError(str(exc)) from exc


def instance_doc(inst: DspInstance | DapInstance) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "format": "pdap" if isinstance(inst, DapInstance) else "pdsp",
        "version": VERSION,
    }
    doc.update(graph_doc(inst.graph))
    doc["terminals"] = [list(p) for p in inst.terminals]
    if isinstance(inst, DapInstance):
        doc["annotations"] = [sorted(a) for a in inst.annotations]
    elif inst.meta:
        doc["meta"] = inst.meta
    return doc


def dumps_instance(inst: DspInstance | DapInstance) -> str:
    return _dump(instance_doc(inst))


def loads_instance(text: str) -> DspInstance | DapInstance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"not JSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") not in ("pdsp", "pdap"):
        raise FormatError("expected a pdsp or pdap document")
    if doc.get("version") != VERSION:
        raise FormatError(f"unsupported version {doc.get('version')!r}")
    g = graph_from_doc(doc)
    try:
        terms = tuple((int(s), int(t)) for s, t in doc["terminals"])
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad terminals: {exc}") from exc
    if doc["format"] == "pdap":
        anns = doc.get("annotations")
        if not isinstance(anns, list) or len(anns) != len(terms):
            raise FormatError("annotations must list one dart set per pair")
        for a in anns:
            if any(not 0 <= d < 2 * g.m for d in a):
                raise FormatError("annotation dart out of range")
        return DapInstance(g, terms, tuple(frozenset(a) for a in anns))
    return DspInstance(g, terms, doc.get("meta", {}))


def dumps_solution(sol: Solution) -> str:
    return _dump({"format": "sol", "version": VERSION, "paths": [list(p) for p in sol.paths]})


def loads_solution(text: str) -> Solution:
    try:
        doc = json.loads(text)
        if doc.get("format") != "sol" or doc.get("version") != VERSION:
            raise FormatError("expected a sol document")
        return Solution.of([[int(v) for v in p] for p in doc["paths"]])
    except (json.JSONDecodeError, KeyError, TypeError, ValueError, AttributeError) as exc:
        raise FormatError(f"malformed solution: {exc}") from exc


def read_instance(path: str | Path) -> DspInstance | DapInstance:
    return loads_instance(Path(path).read_text())


def write_instance(path: str | Path, inst: DspInstance | DapInstance) -> None:
    Path(path).write_text(dumps_instance(inst))


def read_solution(path: str | Path) -> Solution:
    return loads_solution(Path(path).read_text())


def write_solution(path: str | Path, sol: Solution) -> None:
    Path(path).write_text(dumps_solution(sol))
