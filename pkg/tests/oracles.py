"""Slow reference implementations used only by the tests."""

import itertools
from fractions import Fraction
from math import gcd


def hom_brute(f, g):
    fv = list(f.vertices)
    idx = {v: i for i, v in enumerate(fv)}
    count = 0
    for img in itertools.product(g.vertices, repeat=len(fv)):
        if all(g.has_edge(img[idx[u]], img[idx[v]]) for u, v in f.edges):
            count += 1
    return count


def adjacency(g):
    vs = list(g.vertices)
    return [[1 if g.has_edge(a, b) else 0 for b in vs] for a in vs]


def matmul(a, b):
    return [[sum(x * y for x, y in zip(row, col)) for col in zip(*b)] for row in a]


def matpow(a, e):
    n = len(a)
    out = [[int(i == j) for j in range(n)] for i in range(n)]
    for _ in range(e):
        out = matmul(out, a)
    return out


def colourings(f, c):
    """Proper colourings of f with c colours, by enumeration."""
    return hom_brute_complete(f, c)


def hom_brute_complete(f, c):
    fv = list(f.vertices)
    idx = {v: i for i, v in enumerate(fv)}
    return sum(1 for col in itertools.product(range(c), repeat=len(fv))
               if all(col[idx[u]] != col[idx[v]] for u, v in f.edges))


def det_fraction(m):
    n = len(m)
    a = [[Fraction(x) for x in row] for row in m]
    d = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c] != 0), None)
        if piv is None:
            return 0
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            d = -d
        d *= a[c][c]
        for r in range(c + 1, n):
            f = a[r][c] / a[c][c]
            for j in range(c, n):
                a[r][j] -= f * a[c][j]
    return int(d)


def determinantal_divisors(m):
    """d_i = gcd of all i x i minors; invariant factors are d_i / d_{i-1}."""
    rows, cols = len(m), len(m[0]) if m else 0
    out = []
    for i in range(1, min(rows, cols) + 1):
        g = 0
        for rs in itertools.combinations(range(rows), i):
            for cs in itertools.combinations(range(cols), i):
                g = gcd(g, det_fraction([[m[r][c] for c in cs] for r in rs]))
        out.append(g)
    return out


def invariant_factors(m):
    divs = determinantal_divisors(m)
    out, prev = [], 1
    for d in divs:
        if d == 0:
            out.append(0)
            prev = 0
            continue
        out.append(d // prev)
        prev = d
    return out


def rank_mod_p_by_minors(m, p):
    rows, cols = len(m), len(m[0])
    best = 0
    for i in range(1, min(rows, cols) + 1):
        for rs in itertools.combinations(range(rows), i):
            for cs in itertools.combinations(range(cols), i):
                if det_fraction([[m[r][c] for c in cs] for r in rs]) % p:
                    best = i
                    break
            if best == i:
                break
    return best


def treewidth_by_elimination(g):
    """Minimum over all elimination orders of the maximum neighbourhood size."""
    vs = list(g.vertices)
    if not vs:
        return -1
    best = len(vs) - 1
    for order in itertools.permutations(vs):
        adj = {v: set(g.neighbors(v)) for v in vs}
        width = 0
        for v in order:
            nb = adj.pop(v)
            width = max(width, len(nb))
            if width >= best:
                break
            for a in nb:
                adj[a].discard(v)
                adj[a] |= nb - {a}
        best = min(best, width)
    return best


def automorphism_count(g):
    vs = list(g.vertices)
    count = 0
    for perm in itertools.permutations(vs):
        m = dict(zip(vs, perm))
        if all(g.has_edge(m[u], m[v]) for u, v in g.edges):
            count += 1
    return count


def isomorphic_brute(g, h):
    if g.n != h.n or g.m != h.m:
        return False
    gv, hv = list(g.vertices), list(h.vertices)
    for perm in itertools.permutations(hv):
        m = dict(zip(gv, perm))
        if all(h.has_edge(m[u], m[v]) for u, v in g.edges):
            return True
    return False
