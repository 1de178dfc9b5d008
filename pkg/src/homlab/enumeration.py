"""Small graphs up to isomorphism, generated by vertex augmentation."""

from __future__ import annotations

import itertools
from functools import lru_cache
from typing import Callable, Iterator

from .canon import Structure, canonical_search
from .graph import Graph, is_planar
from .treedec import has_treewidth_at_most

Predicate = Callable[[Graph], bool]


def canonical_key(g: Graph) -> tuple:
    if not g.is_dense():
        g, _ = g.dense()
    return canonical_search(Structure.from_graph(g)).certificate


def canonical_graph(g: Graph) -> Graph:
    """The canonical representative of the isomorphism class of ``g``."""
    if not g.is_dense():
        g, _ = g.dense()
    res = canonical_search(Structure.from_graph(g))
    return Graph(range(g.n), [(res.labeling[u], res.labeling[v]) for u, v in g.edges])


def family_predicate(family: str, k: int | None = None) -> tuple[str, Predicate]:
    """Return a cache key and a vertex-hereditary membership test."""
    if family == "all":
        return "all", lambda g: True
    if family == "planar":
        return "planar", is_planar
    if family in ("treewidth", "tw"):
        if k is None:
            raise ValueError("treewidth family needs k")
        return f"tw{k}", lambda g, k=k: has_treewidth_at_most(g, k)
    raise ValueError(f"unknown family {family!r}")


_PREDICATES: dict[str, Predicate] = {}


@lru_cache(maxsize=None)
def _level(n: int, key: str) -> tuple[tuple[tuple, Graph], ...]:
    pred = _PREDICATES[key]
    if n == 0:
        return ((canonical_key(Graph.empty(0)), Graph.empty(0)),)
    seen: dict[tuple, Graph] = {}
    new = n - 1
    for _, g in _level(n - 1, key):
        for r in range(n):
            for nbrs in itertools.combinations(range(new), r):
                h = Graph(range(n), list(g.edges) + [(x, new) for x in nbrs])
                if not pred(h):
                    continue
                c = canonical_search(Structure.from_graph(h))
                if c.certificate not in seen:
                    seen[c.certificate] = Graph(
                        range(n), [(c.labeling[u], c.labeling[v]) for u, v in h.edges])
    return tuple(sorted(((cert, g) for cert, g in seen.items()), key=lambda t: (t[1].m, t[0])))


def graphs_up_to_iso(n: int, family: str = "all", k: int | None = None) -> list[Graph]:
    """All graphs on ``n`` vertices in the family, one per isomorphism class."""
    key, pred = family_predicate(family, k)
    _PREDICATES.setdefault(key, pred)
    return [g for _, g in _level(n, key)]


def connected_graphs(max_n: int, family: str = "all", k: int | None = None,
                     min_n: int = 1) -> Iterator[Graph]:
    """Connected graphs ordered by vertex count, edge count, then canonical certificate."""
    for n in range(min_n, max_n + 1):
        for g in graphs_up_to_iso(n, family, k):
            if g.is_connected():
                yield g
