# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled hot kernels. Behaviour matches ``_kernels_py`` exactly."""

from cpython.mem cimport PyMem_Malloc, PyMem_Free


class KernelLimit(Exception):
    """Raised when the node cap of a search kernel is exceeded."""


def reduce_word(seq):
    cdef list out = []
    cdef Py_ssize_t top = 0
    cdef long x
    for x in seq:
        if top and out[top - 1] == -x:
            out.pop()
            top -= 1
        else:
            out.append(x)
            top += 1
    return tuple(out)


cdef struct Search:
    int n
    int k
    int *off        # k * (n + 1) CSR offsets
    int *nbr        # concatenated adjacency
    int *src
    int *tgt
    unsigned char *used
    unsigned char *reach   # k * n
    unsigned char *seen
    int *stack
    int *path       # k * n vertices
    int *plen
    long nodes
    long cap
    long maxsol


cdef bint _feasible(Search *S, int j0):
    cdef int j, u, w, t, top, e
    cdef bint ok
    for j in range(j0, S.k):
        t = S.tgt[j]
        for u in range(S.n):
            S.seen[u] = 0
        top = 0
        S.stack[top] = S.src[j]
        top += 1
        S.seen[S.src[j]] = 1
        ok = False
        while top > 0 and not ok:
            top -= 1
            u = S.stack[top]
            for e in range(S.off[j * (S.n + 1) + u], S.off[j * (S.n + 1) + u + 1]):
                w = S.nbr[e]
                if w == t:
                    ok = True
                    break
                if not S.used[w] and not S.seen[w]:
                    S.seen[w] = 1
                    S.stack[top] = w
                    top += 1
        if not ok:
            return False
    return True


cdef int _extend(Search *S, int i, int v, list solutions) except -1:
    cdef int e, w, t, j, a
    S.nodes += 1
    if S.nodes > S.cap:
        raise KernelLimit(S.nodes)
    if v == S.tgt[i]:
        if i + 1 == S.k:
            sol = []
            for j in range(S.k):
                sol.append([S.path[j * S.n + a] for a in range(S.plen[j])])
            solutions.append(sol)
            return 1 if len(solutions) >= S.maxsol else 0
        if not _feasible(S, i + 1):
            return 0
        return _extend(S, i + 1, S.src[i + 1], solutions)
    t = S.tgt[i]
    for e in range(S.off[i * (S.n + 1) + v], S.off[i * (S.n + 1) + v + 1]):
        w = S.nbr[e]
        if w != t and (S.used[w] or not S.reach[i * S.n + w]):
            continue
        if w != t:
            S.used[w] = 1
        S.path[i * S.n + S.plen[i]] = w
        S.plen[i] += 1
        r = _extend(S, i, w, solutions)
        S.plen[i] -= 1
        if w != t:
            S.used[w] = 0
        if r:
            return 1
    return 0


def disjoint_paths(int n, succ, sources, targets, long max_solutions, long node_cap):
    cdef int k = len(sources)
    cdef int i, u, w, total, pos, top
    cdef Search S
    if k == 0:
        return [[]], 0
    total = 0
    for i in range(k):
        for u in range(n):
            total += len(succ[i][u])
    S.n = n
    S.k = k
    S.off = <int *> PyMem_Malloc(k * (n + 1) * sizeof(int))
    S.nbr = <int *> PyMem_Malloc((total + 1) * sizeof(int))
    S.src = <int *> PyMem_Malloc(k * sizeof(int))
    S.tgt = <int *> PyMem_Malloc(k * sizeof(int))
    S.used = <unsigned char *> PyMem_Malloc(n)
    S.reach = <unsigned char *> PyMem_Malloc(k * n)
    S.seen = <unsigned char *> PyMem_Malloc(n)
    S.stack = <int *> PyMem_Malloc((n + 1) * sizeof(int))
    S.path = <int *> PyMem_Malloc(k * n * sizeof(int))
    S.plen = <int *> PyMem_Malloc(k * sizeof(int))
    S.nodes = 0
    S.cap = node_cap
    S.maxsol = max_solutions
    solutions = []
    try:
        pos = 0
        for i in range(k):
            for u in range(n):
                S.off[i * (n + 1) + u] = pos
                for w in succ[i][u]:
                    S.nbr[pos] = w
                    pos += 1
            S.off[i * (n + 1) + n] = pos
        for u in range(n):
            S.used[u] = 0
        for i in range(k):
            S.src[i] = sources[i]
            S.tgt[i] = targets[i]
            S.used[S.src[i]] = 1
            S.used[S.tgt[i]] = 1
            S.path[i * n] = S.src[i]
            S.plen[i] = 1
        for i in range(k):
            pred = [[] for _ in range(n)]
            for u in range(n):
                for w in succ[i][u]:
                    pred[w].append(u)
            for u in range(n):
                S.reach[i * n + u] = 0
            S.reach[i * n + S.tgt[i]] = 1
            todo = [S.tgt[i]]
            while todo:
                u = todo.pop()
                for w in pred[u]:
                    if not S.reach[i * n + w]:
                        S.reach[i * n + w] = 1
                        todo.append(w)
        if _feasible(&S, 0):
            _extend(&S, 0, S.src[0], solutions)
        return solutions, S.nodes
    finally:
        PyMem_Free(S.off)
        PyMem_Free(S.nbr)
        PyMem_Free(S.src)
        PyMem_Free(S.tgt)
        PyMem_Free(S.used)
        PyMem_Free(S.reach)
        PyMem_Free(S.seen)
        PyMem_Free(S.stack)
        PyMem_Free(S.path)
        PyMem_Free(S.plen)


def bracket_matchings(sizes):
    """Perfect non-crossing matchings jumping between consecutive blocks."""
    cdef int nb = len(sizes)
    cdef int p = 0
    cdef int b
    cdef list starts = []
    for b in range(nb):
        starts.append(p)
        p += sizes[b]
    out = []
    _brackets(list(sizes), starts, 0, [], [], out)
    return out


cdef void _brackets(list sizes, list starts, int b, list stack, list pairs, list out):
    cdef int s, st, l, j
    if b == len(sizes):
        if not stack:
            out.append(tuple(sorted(pairs)))
        return
    s = sizes[b]
    st = starts[b]
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
        _brackets(sizes, starts, b + 1, stack, pairs, out)
        for j in range(l, s):
            stack.pop()
        for o in reversed(popped):
            pairs.pop()
            stack.append(o)
