"""Pure-Python hot kernels. Mirrors ``_speedups.pyx`` exactly."""

from __future__ import annotations


class KernelLimit(Exception):
    """Raised when the node cap of a search kernel is exceeded."""


def reduce_word(seq):
    out = []
    for x in seq:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def disjoint_paths(n, succ, sources, targets, max_solutions, node_cap):
    """Vertex-disjoint paths, pair ``i`` following ``succ[i]`` from sources[i] to targets[i].

    Solutions come out in lexicographic order of (P_1, P_2, ...) when every
    adjacency list is sorted. Returns ``(solutions, nodes)``.
    """
    k = len(sources)
    used = bytearray(n)
    for v in sources:
        used[v] = 1
    for v in targets:
        used[v] = 1
    reach = []
    for i in range(k):
        pred = [[] for _ in range(n)]
        for u in range(n):
            for w in succ[i][u]:
                pred[w].append(u)
        r = bytearray(n)
        r[targets[i]] = 1
        stack = [targets[i]]
        while stack:
            u = stack.pop()
            for w in pred[u]:
                if not r[w]:
                    r[w] = 1
                    stack.append(w)
        reach.append(r)
    paths = [[s] for s in sources]
    solutions = []
    nodes = 0

    def feasible(j0):
        for j in range(j0, k):
            t = targets[j]
            seen = bytearray(n)
            stack = [sources[j]]
            seen[sources[j]] = 1
            ok = False
            while stack:
                u = stack.pop()
                for w in succ[j][u]:
                    if w == t:
                        ok = True
                        break
                    if not used[w] and not seen[w]:
                        seen[w] = 1
                        stack.append(w)
                if ok:
                    break
            if not ok:
                return False
        return True

    def extend(i, v):
        nonlocal nodes
        nodes += 1
        if nodes > node_cap:
            raise KernelLimit(nodes)
        if v == targets[i]:
            if i + 1 == k:
                solutions.append([list(p) for p in paths])
                return len(solutions) >= max_solutions
            if not feasible(i + 1):
                return False
            return extend(i + 1, sources[i + 1])
        t = targets[i]
        r = reach[i]
        for w in succ[i][v]:
            if w != t and (used[w] or not r[w]):
                continue
            if w != t:
                used[w] = 1
            paths[i].append(w)
            stop = extend(i, w)
            paths[i].pop()
            if w != t:
                used[w] = 0
            if stop:
                return True
        return False

    if k == 0:
        return [[]], 0
    if feasible(0):
        extend(0, sources[0])
    return solutions, nodes


def bracket_matchings(sizes):
    """Perfect non-crossing matchings jumping between consecutive blocks.

    In each block the first ``l`` positions close earlier brackets and the rest
    open new ones. Yields sorted tuples of position pairs.
    """
    out = []
    nb = len(sizes)
    starts = []
    acc = 0
    for s in sizes:
        starts.append(acc)
        acc += s
    stack = []
    pairs = []

    def rec(b):
        if b == nb:
            if not stack:
                out.append(tuple(sorted(pairs)))
            return
        s, st = sizes[b], starts[b]
        for l in range(s + 1):
            if l > len(stack):
                break
            popped = []
            for j in range(l):
                o = stack.pop()
                popped.append(o)
                pairs.append((o, st + j))
            for j in range(l, s):
                stack.append(st + j)
            rec(b + 1)
            for j in range(l, s):
                stack.pop()
            for o in reversed(popped):
                pairs.pop()
                stack.append(o)

    rec(0)
    return out
