"""Individualization-refinement search on vertex- and arc-coloured structures.

One search routine serves canonical forms, isomorphism tests and
automorphism-group generators.  Colours and arc labels must be mutually
comparable values (ints, strings, tuples of those).
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

from .graph import Graph


class SearchCapExceeded(RuntimeError):
    """The search tree grew past the configured node budget."""


class Structure:
    """Vertices ``0..n-1`` with initial colours and labelled arcs.

    ``arcs`` maps an ordered pair ``(u, v)`` to a label; undirected graphs
    store both directions with the same label and set ``symmetric``.
    """

    def __init__(self, n: int, colors: Sequence[Hashable] | None = None,
                 arcs: dict[tuple[int, int], Hashable] | None = None,
                 symmetric: bool = False):
        self.n = n
        self.colors = tuple(colors) if colors is not None else (0,) * n
        if len(self.colors) != n:
            raise ValueError("one colour per vertex required")
        self.arcs = dict(arcs or {})
        self.symmetric = symmetric
        lab_ids = {lab: i for i, lab in enumerate(sorted(set(self.arcs.values())))}
        self._out: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        self._in: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for (u, v), lab in self.arcs.items():
            if u == v:
                # loops act like an extra vertex colour
                continue
            self._out[u].append((v, lab_ids[lab]))
            self._in[v].append((u, lab_ids[lab]))
        loops = {}
        for (u, v), lab in self.arcs.items():
            if u == v:
                loops.setdefault(u, []).append(lab)
        self._loop = tuple(tuple(sorted(loops.get(v, ()))) for v in range(n))

    @classmethod
    def from_graph(cls, g: Graph, colors: Sequence[Hashable] | None = None) -> "Structure":
        if not g.is_dense():
            g, _ = g.dense()
        arcs = {}
        for u, v in g.edges:
            arcs[(u, v)] = 0
            arcs[(v, u)] = 0
        return cls(g.n, colors, arcs, symmetric=True)

    def is_automorphism(self, perm: Sequence[int]) -> bool:
        return is_isomorphism(self, self, perm)


def is_isomorphism(a: Structure, b: Structure, perm: Sequence[int]) -> bool:
    """Check that ``perm`` (a list mapping vertices of ``a`` to ``b``) is an isomorphism."""
    if a.n != b.n or len(perm) != a.n or sorted(perm) != list(range(a.n)):
        return False
    if any(a.colors[v] != b.colors[perm[v]] for v in range(a.n)):
        return False
    if len(a.arcs) != len(b.arcs):
        return False
    for (u, v), lab in a.arcs.items():
        if b.arcs.get((perm[u], perm[v]), _MISSING) != lab:
            return False
    return True


_MISSING = object()


def _normalize(values: Sequence) -> list[int]:
    ids = {c: i for i, c in enumerate(sorted(set(values)))}
    return [ids[c] for c in values]


def refine(s: Structure, colors: Sequence[int]) -> list[int]:
    """Colour refinement to the coarsest stable colouring below ``colors``.

    Cell order is preserved and new cells are ordered by signature, so the
    result is isomorphism invariant.
    """
    colors = list(colors)
    k = len(set(colors))
    out, inn, sym = s._out, s._in, s.symmetric
    while True:
        if sym:
            sigs = [(colors[v], tuple(sorted((lab, colors[w]) for w, lab in out[v])))
                    for v in range(s.n)]
        else:
            sigs = [(colors[v], tuple(sorted((lab, colors[w]) for w, lab in out[v])),
                     tuple(sorted((lab, colors[w]) for w, lab in inn[v])))
                    for v in range(s.n)]
        uniq = sorted(set(sigs))
        if len(uniq) == k:
            return colors
        idx = {sig: i for i, sig in enumerate(uniq)}
        colors = [idx[sig] for sig in sigs]
        k = len(uniq)


def initial_coloring(s: Structure) -> list[int]:
    return refine(s, _normalize([(c, s._loop[v]) for v, c in enumerate(s.colors)]))


def individualize(colors: Sequence[int], v: int) -> list[int]:
    c = colors[v]
    return _normalize([(x, 0 if (i == v or x != c) else 1) for i, x in enumerate(colors)])


def _cells(colors: Sequence[int]) -> list[list[int]]:
    cells: list[list[int]] = [[] for _ in range(max(colors) + 1)] if colors else []
    for v, c in enumerate(colors):
        cells[c].append(v)
    return cells


def _node_invariant(s: Structure, colors: Sequence[int]) -> tuple:
    cells = _cells(colors)
    rows = []
    for cell in cells:
        v = cell[0]
        row = tuple(sorted((lab, colors[w]) for w, lab in s._out[v]))
        rows.append((len(cell), row))
    return tuple(rows)


def _leaf_certificate(s: Structure, pos: Sequence[int]) -> tuple:
    inv = [0] * s.n
    for v, p in enumerate(pos):
        inv[p] = v
    vcol = tuple((s.colors[inv[p]], s._loop[inv[p]]) for p in range(s.n))
    arcs = tuple(sorted((pos[u], pos[v], lab) for (u, v), lab in s.arcs.items()
                        if u != v and (not s.symmetric or pos[u] < pos[v])))
    return (vcol, arcs)


@dataclass
class SearchResult:
    certificate: tuple
    labeling: list[int]                  # vertex -> canonical position
    generators: list[tuple[int, ...]] = field(default_factory=list)
    nodes: int = 0


class _UnionFind:
    def __init__(self, n):
        self.p = list(range(n))

    def find(self, x):
        p = self.p
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.p[max(ra, rb)] = min(ra, rb)


def canonical_search(s: Structure, max_nodes: int = 2_000_000) -> SearchResult:
    """Canonical labelling plus a generating set of the automorphism group."""
    n = s.n
    if n == 0:
        return SearchResult(((), ()), [], [], 1)
    state = {
        "best": None,        # (invariant path, leaf cert)
        "best_pos": None,
        "first": None,
        "first_pos": None,
        "gens": [],
        "nodes": 0,
    }
    limit = sys.getrecursionlimit()
    if limit < 4 * n + 100:
        sys.setrecursionlimit(4 * n + 100)

    def record_aut(pos_a, pos_b):
        inv_a = [0] * n
        for v, p in enumerate(pos_a):
            inv_a[p] = v
        gamma = tuple(inv_a[pos_b[x]] for x in range(n))
        if any(gamma[i] != i for i in range(n)) and gamma not in state["gens"]:
            state["gens"].append(gamma)

    def visit(colors, prefix, invpath):
        state["nodes"] += 1
        if state["nodes"] > max_nodes:
            raise SearchCapExceeded(f"canonical search exceeded {max_nodes} nodes")
        best = state["best"]
        if best is not None:
            depth = len(invpath)
            bp = best[0][:depth]
            first_ip = state["first"][0][:depth]
            if invpath > bp and invpath != first_ip:
                return
        cells = _cells(colors)
        target = next((c for c in cells if len(c) > 1), None)
        if target is None:
            cert = (invpath, _leaf_certificate(s, colors))
            if state["first"] is None:
                state["first"] = cert
                state["first_pos"] = list(colors)
                state["best"] = cert
                state["best_pos"] = list(colors)
                return
            if cert == state["first"]:
                record_aut(state["first_pos"], colors)
            if cert == state["best"]:
                record_aut(state["best_pos"], colors)
            elif cert < state["best"]:
                state["best"] = cert
                state["best_pos"] = list(colors)
            return
        explored: list[int] = []
        for w in target:
            if explored:
                uf = _UnionFind(n)
                pset = prefix
                for g in state["gens"]:
                    if all(g[x] == x for x in pset):
                        for x in range(n):
                            uf.union(x, g[x])
                rw = uf.find(w)
                if any(uf.find(e) == rw for e in explored):
                    continue
            explored.append(w)
            child = refine(s, individualize(colors, w))
            visit(child, prefix + (w,), invpath + (_node_invariant(s, child),))

    root = initial_coloring(s)
    visit(root, (), (_node_invariant(s, root),))
    return SearchResult(state["best"], state["best_pos"], state["gens"], state["nodes"])


def canonical_form(s: Structure, max_nodes: int = 2_000_000) -> tuple[tuple, list[int]]:
    res = canonical_search(s, max_nodes)
    return res.certificate, res.labeling


def find_isomorphism(a: Structure, b: Structure, max_nodes: int = 2_000_000) -> list[int] | None:
    """Return a verified isomorphism ``a -> b`` as a list, or ``None``."""
    if a.n != b.n or len(a.arcs) != len(b.arcs):
        return None
    if sorted(map(repr, a.colors)) != sorted(map(repr, b.colors)):
        return None
    ca = initial_coloring(a)
    cb = initial_coloring(b)
    if _node_invariant(a, ca) != _node_invariant(b, cb):
        return None
    ra = canonical_search(a, max_nodes)
    rb = canonical_search(b, max_nodes)
    if ra.certificate != rb.certificate:
        return None
    inv_b = [0] * b.n
    for v, p in enumerate(rb.labeling):
        inv_b[p] = v
    perm = [inv_b[ra.labeling[x]] for x in range(a.n)]
    if not is_isomorphism(a, b, perm):
        raise AssertionError("canonical search produced an invalid isomorphism")
    return perm


def compose(p: Sequence[int], q: Sequence[int]) -> tuple[int, ...]:
    """``p`` after ``q``."""
    return tuple(p[q[i]] for i in range(len(q)))


def group_closure(gens: Iterable[Sequence[int]], n: int, cap: int = 1_000_000) -> list[tuple[int, ...]] | None:
    """All elements generated by ``gens``, sorted; ``None`` past ``cap`` elements."""
    gens = [tuple(g) for g in gens]
    ident = tuple(range(n))
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = compose(g, x)
                if y not in seen:
                    seen.add(y)
                    if len(seen) > cap:
                        return None
                    nxt.append(y)
        frontier = nxt
    return sorted(seen)


def orbits(gens: Iterable[Sequence[int]], n: int) -> list[list[int]]:
    uf = _UnionFind(n)
    for g in gens:
        for x in range(n):
            uf.union(x, g[x])
    groups: dict[int, list[int]] = {}
    for x in range(n):
        groups.setdefault(uf.find(x), []).append(x)
    return sorted(groups.values())


def perm_order(p: Sequence[int]) -> int:
    from math import lcm
    seen = [False] * len(p)
    order = 1
    for i in range(len(p)):
        if not seen[i]:
            length = 0
            j = i
            while not seen[j]:
                seen[j] = True
                j = p[j]
                length += 1
            order = lcm(order, length)
    return order


def perm_power(p: Sequence[int], e: int) -> tuple[int, ...]:
    n = len(p)
    result = tuple(range(n))
    base = tuple(p)
    while e:
        if e & 1:
            result = compose(base, result)
        base = compose(base, base)
        e >>= 1
    return result
