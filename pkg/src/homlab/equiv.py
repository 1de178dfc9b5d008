"""Isomorphism, automorphism groups, Weisfeiler-Leman refinement, Faben-Jerrum
reduction and tuple orbits."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Sequence

from .canon import (Structure, _UnionFind, canonical_search, compose, find_isomorphism,
                    group_closure, perm_order, perm_power)
from .cfi import CfiGraph, CfiStructure
from .graph import Graph


class BudgetExceeded(RuntimeError):
    pass


def _as_structure(x) -> tuple[Structure, list[int]]:
    """A structure on ``0..n-1`` and the original id of each index."""
    if isinstance(x, CfiStructure):
        return x.to_structure(), list(range(x.n))
    if isinstance(x, CfiGraph):
        x = x.graph
    if isinstance(x, Graph):
        ids = list(x.vertices)
        pos = {v: i for i, v in enumerate(ids)}
        dense = Graph(range(len(ids)), [(pos[a], pos[b]) for a, b in x.edges])
        return Structure.from_graph(dense), ids
    if isinstance(x, Structure):
        return x, list(range(x.n))
    raise TypeError(f"unsupported type {type(x).__name__}")


def is_isomorphic(g, h, max_nodes: int = 2_000_000) -> dict[int, int] | None:
    """A verified isomorphism ``g -> h`` as a vertex map, or ``None``.

    Structures with relations (CFI*) must be isomorphic as coloured
    structures, which includes preserving the preorder.
    """
    if type(g) is not type(h):
        raise TypeError("both arguments must be of the same kind")
    sg, ig = _as_structure(g)
    sh, ih = _as_structure(h)
    perm = find_isomorphism(sg, sh, max_nodes)
    if perm is None:
        return None
    return {ig[i]: ih[perm[i]] for i in range(sg.n)}


@dataclass
class Automorphisms:
    perms: list[tuple[int, ...]]      # full group when complete, else generators
    complete: bool
    generators: list[tuple[int, ...]]
    vertices: list[int]               # original id of each permutation position

    def as_maps(self) -> list[dict[int, int]]:
        return [{self.vertices[i]: self.vertices[p[i]] for i in range(len(p))} for p in self.perms]


def automorphisms(g, group_cap: int = 100_000, max_nodes: int = 2_000_000) -> Automorphisms:
    """Automorphism group; the full list when it has at most ``group_cap`` elements."""
    s, ids = _as_structure(g)
    res = canonical_search(s, max_nodes)
    gens = sorted(res.generators)
    for p in gens:
        if not s.is_automorphism(p):
            raise AssertionError("search produced a non-automorphism")
    group = group_closure(gens, s.n, group_cap)
    if group is None:
        return Automorphisms(gens, False, gens, ids)
    return Automorphisms(group, True, gens, ids)


# ---------------------------------------------------------------------------
# Weisfeiler-Leman


@dataclass
class WLResult:
    verdict: str                      # "distinguished" or "stable-equivalent"
    rounds: int
    colors_g: dict = field(repr=False)
    colors_h: dict = field(repr=False)

    @property
    def distinguished(self) -> bool:
        return self.verdict == "distinguished"


def _atomic_type(g: Graph, t: Sequence[int]) -> tuple:
    k = len(t)
    return tuple((t[i] == t[j], g.has_edge(t[i], t[j])) for i in range(k) for j in range(i + 1, k))


def _relabel_sorted(sigs: list) -> list[int]:
    ids = {s: i for i, s in enumerate(sorted(set(sigs)))}
    return [ids[s] for s in sigs]


def wl_colors(g: Graph, k: int, budget: int = 50_000_000,
              max_rounds: int | None = None) -> tuple[list[int], int]:
    """Stable colouring of ``V^k`` (tuples indexed in lexicographic order) and the round count.

    ``k = 1`` is colour refinement; ``k >= 2`` is the folklore variant.
    Colour ids come from sorted signatures, so they are isomorphism invariant.
    """
    if not g.is_dense():
        g, _ = g.dense()
    n = g.n
    if k < 1:
        raise ValueError("k must be positive")
    if n ** k * max(n, 1) * k > budget:
        raise BudgetExceeded(f"{n}^{k} tuples exceed the refinement budget")
    if k == 1:
        colors = [0] * n
        rounds = 0
        while max_rounds is None or rounds < max_rounds:
            sigs = [(colors[v], tuple(sorted(colors[w] for w in g.neighbors(v)))) for v in range(n)]
            new = _relabel_sorted(sigs)
            rounds += 1
            if len(set(new)) == len(set(colors)):
                return new, rounds
            colors = new
        return colors, rounds
    tuples = list(itertools.product(range(n), repeat=k))
    colors = _relabel_sorted([_atomic_type(g, t) for t in tuples])
    weights = [n ** (k - 1 - i) for i in range(k)]
    rounds = 0
    while max_rounds is None or rounds < max_rounds:
        sigs = []
        for idx, t in enumerate(tuples):
            bases = [idx - t[i] * weights[i] for i in range(k)]
            neigh = sorted(tuple(colors[b + w * wt] for b, wt in zip(bases, weights)) for w in range(n))
            sigs.append((colors[idx], tuple(neigh)))
        new = _relabel_sorted(sigs)
        rounds += 1
        if len(set(new)) == len(set(colors)):
            return new, rounds
        colors = new
    return colors, rounds


def wl_refine(g: Graph, h: Graph, k: int, budget: int = 50_000_000) -> WLResult:
    """k-WL on the disjoint union; distinguished iff the colour histograms of the two sides differ."""
    if g.n != h.n:
        return WLResult("distinguished", 0, {}, {})
    gd, _ = g.dense()
    hd, _ = h.dense()
    n = gd.n
    union = Graph(range(2 * n), list(gd.edges) + [(a + n, b + n) for a, b in hd.edges])
    colors, rounds = wl_colors(union, k, budget)
    N = 2 * n
    cg, ch = {}, {}
    for idx, t in enumerate(itertools.product(range(N), repeat=k)):
        if all(x < n for x in t):
            cg[t] = colors[idx]
        elif all(x >= n for x in t):
            ch[tuple(x - n for x in t)] = colors[idx]
    same = sorted(cg.values()) == sorted(ch.values())
    return WLResult("stable-equivalent" if same else "distinguished", rounds, cg, ch)


# ---------------------------------------------------------------------------
# Faben-Jerrum


class OrderPSearchFailed(RuntimeError):
    """No automorphism of order p found, but the group was not fully enumerated."""


def find_order_p_automorphism(g: Graph, p: int, seed: int = 0, tries: int = 5000,
                              group_cap: int = 100_000) -> tuple[int, ...] | None:
    """Least order-``p`` automorphism (positions over sorted ``V(g)``) or ``None`` if none exists."""
    auts = automorphisms(g, group_cap)
    ident = tuple(range(g.n))
    if auts.complete:
        cands = [s for s in auts.perms if s != ident and perm_power(s, p) == ident]
        return min(cands) if cands else None
    rng = random.Random(seed)
    gens = auts.generators
    for _ in range(tries):
        s = ident
        for _ in range(rng.randint(1, 2 * len(gens) + 1)):
            s = compose(rng.choice(gens), s)
        m = perm_order(s)
        if m % p == 0:
            return perm_power(s, m // p)
    raise OrderPSearchFailed(f"no order-{p} automorphism found in {tries} random products")


def faben_jerrum_steps(g: Graph, p: int, seed: int = 0) -> list[Graph]:
    """Graphs visited by the reduction, starting with ``g`` and ending with the reduced graph."""
    steps = [g]
    while True:
        sigma = find_order_p_automorphism(g, p, seed)
        if sigma is None:
            return steps
        ids = list(g.vertices)
        fixed = [ids[i] for i in range(len(ids)) if sigma[i] == i]
        g = g.induced_subgraph(fixed)
        steps.append(g)


def faben_jerrum_reduce(g: Graph, p: int, seed: int = 0) -> Graph:
    """Pass to fixed-point subgraphs of order-``p`` automorphisms until none remain."""
    return faben_jerrum_steps(g, p, seed)[-1]


# ---------------------------------------------------------------------------
# tuple orbits


def tuple_orbits(s, c: int, budget: int = 2_000_000) -> list[list[tuple[int, ...]]]:
    """Partition of ``V^c`` into orbits of the automorphism group."""
    st, ids = _as_structure(s)
    n = st.n
    if n ** c > budget:
        raise BudgetExceeded(f"{n}^{c} tuples exceed the budget")
    gens = canonical_search(st).generators
    tuples = list(itertools.product(range(n), repeat=c))
    index = {t: i for i, t in enumerate(tuples)}
    uf = _UnionFind(len(tuples))
    for gperm in gens:
        for i, t in enumerate(tuples):
            uf.union(i, index[tuple(gperm[x] for x in t)])
    groups: dict[int, list] = {}
    for i, t in enumerate(tuples):
        groups.setdefault(uf.find(i), []).append(tuple(ids[x] for x in t))
    return sorted(groups.values())
