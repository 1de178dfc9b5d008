"""Tree decompositions: validation, exact treewidth, and TW^k normalization."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .graph import Graph, LabelledGraph


class InvalidDecomposition(ValueError):
    pass


class SizeCapExceeded(ValueError):
    pass


def cap_override(default: int) -> int:
    """Size caps may be raised globally through ``HOMLAB_CAP_OVERRIDE``."""
    raw = os.environ.get("HOMLAB_CAP_OVERRIDE")
    return max(default, int(raw)) if raw else default


@dataclass(frozen=True)
class TreeDecomposition:
    tree: Graph
    bags: Mapping[int, frozenset[int]]

    def __post_init__(self):
        object.__setattr__(self, "bags", {t: frozenset(b) for t, b in self.bags.items()})
        if set(self.bags) != set(self.tree.vertices):
            raise InvalidDecomposition("every tree node needs exactly one bag")

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags.values()), default=0) - 1

    def validate(self, f: Graph) -> None:
        """Raise :class:`InvalidDecomposition` unless this decomposes ``f``."""
        t = self.tree
        if t.n == 0:
            raise InvalidDecomposition("tree has no nodes")
        if t.m != t.n - 1 or not t.is_connected():
            raise InvalidDecomposition("decomposition graph is not a tree")
        covered = set().union(*self.bags.values())
        if covered != set(f.vertices):
            raise InvalidDecomposition("bags do not cover exactly the vertices")
        for u, v in f.edges:
            if not any(u in b and v in b for b in self.bags.values()):
                raise InvalidDecomposition(f"edge {u}-{v} is in no bag")
        for x in f.vertices:
            nodes = [s for s, b in self.bags.items() if x in b]
            if not t.induced_subgraph(nodes).is_connected():
                raise InvalidDecomposition(f"bags containing {x} are not connected")

    def is_valid(self, f: Graph) -> bool:
        try:
            self.validate(f)
        except InvalidDecomposition:
            return False
        return True

    def rooted(self, root: int | None = None) -> tuple[int, dict[int, int | None], list[int]]:
        """Root, parent map and a pre-order of the tree nodes."""
        root = self.tree.vertices[0] if root is None else root
        parent: dict[int, int | None] = {root: None}
        order = [root]
        i = 0
        while i < len(order):
            s = order[i]
            i += 1
            for c in sorted(self.tree.neighbors(s)):
                if c not in parent:
                    parent[c] = s
                    order.append(c)
        return root, parent, order


def make_decomposition(bags: list[Iterable[int]], tree_edges: Iterable[tuple[int, int]]) -> TreeDecomposition:
    return TreeDecomposition(Graph(range(len(bags)), tree_edges),
                             {i: frozenset(b) for i, b in enumerate(bags)})


def single_bag(f: Graph) -> TreeDecomposition:
    return make_decomposition([f.vertices], [])


# ---------------------------------------------------------------------------
# exact treewidth


def _eliminate(adj: dict[int, set[int]], v: int) -> dict[int, set[int]]:
    nb = adj[v]
    new = {x: set(s) for x, s in adj.items() if x != v}
    for a in nb:
        new[a].discard(v)
        new[a] |= nb - {a}
    return new


def _is_simplicial(adj, v) -> bool:
    nb = list(adj[v])
    return all(b in adj[a] for i, a in enumerate(nb) for b in nb[i + 1:])


def _min_fill_order(adj: dict[int, set[int]]) -> tuple[list[int], int]:
    order, width = [], -1
    adj = {x: set(s) for x, s in adj.items()}
    while adj:
        def fill(v):
            nb = list(adj[v])
            return sum(1 for i, a in enumerate(nb) for b in nb[i + 1:] if b not in adj[a])
        v = min(adj, key=lambda x: (fill(x), len(adj[x]), x))
        width = max(width, len(adj[v]))
        order.append(v)
        adj = _eliminate(adj, v)
    return order, width


def _degeneracy_bound(adj: dict[int, set[int]]) -> int:
    adj = {x: set(s) for x, s in adj.items()}
    best = 0
    while adj:
        v = min(adj, key=lambda x: (len(adj[x]), x))
        best = max(best, len(adj[v]))
        for w in adj[v]:
            adj[w].discard(v)
        del adj[v]
    return best


def treewidth_order(f: Graph, max_vertices: int = 20) -> tuple[list[int], int]:
    """Optimal elimination ordering by branch and bound; returns ``(order, width)``."""
    if f.n > cap_override(max_vertices):
        raise SizeCapExceeded(f"exact treewidth limited to {max_vertices} vertices")
    adj = {v: set(f.neighbors(v)) for v in f.vertices}
    if not adj:
        return [], -1
    best_order, ub = _min_fill_order(adj)
    lb = _degeneracy_bound(adj)
    if ub <= lb:
        return best_order, ub
    best = {"order": best_order, "width": ub}
    memo: dict[frozenset, int] = {}

    def search(adj, order, width):
        if width >= best["width"]:
            return
        if not adj:
            best["order"], best["width"] = list(order), width
            return
        key = frozenset(adj)
        if memo.get(key, 1 << 30) <= width:
            return
        memo[key] = width
        if max(width, _degeneracy_bound(adj)) >= best["width"]:
            return
        # simplicial vertices (and almost-simplicial ones of small degree) are safe
        for v in sorted(adj):
            if len(adj[v]) <= width and _is_simplicial(adj, v):
                search(_eliminate(adj, v), order + [v], width)
                return
        for v in sorted(adj, key=lambda x: (len(adj[x]), x)):
            search(_eliminate(adj, v), order + [v], max(width, len(adj[v])))

    search(adj, [], -1)
    return best["order"], best["width"]


def decomposition_from_order(f: Graph, order: list[int]) -> TreeDecomposition:
    """Tree decomposition induced by an elimination ordering, with redundant bags contracted."""
    if not f.vertices:
        return make_decomposition([()], [])
    pos = {v: i for i, v in enumerate(order)}
    adj = {v: set(f.neighbors(v)) for v in f.vertices}
    bag_of: dict[int, frozenset[int]] = {}
    parent: dict[int, int | None] = {}
    for v in order:
        higher = {w for w in adj[v] if pos[w] > pos[v]}
        bag_of[v] = frozenset(higher | {v})
        parent[v] = min(higher, key=pos.__getitem__) if higher else None
        for a in higher:
            adj[a] |= higher - {a}
    roots = [v for v in order if parent[v] is None]
    for a, b in zip(roots, roots[1:]):
        parent[a] = b
    # contract bags contained in their parent's bag
    alive = list(order)
    changed = True
    while changed:
        changed = False
        for v in list(alive):
            p = parent[v]
            if p is not None and bag_of[v] <= bag_of[p]:
                for c in alive:
                    if parent[c] == v:
                        parent[c] = p
                alive.remove(v)
                changed = True
    idx = {v: i for i, v in enumerate(alive)}
    bags = [bag_of[v] for v in alive]
    edges = [(idx[v], idx[parent[v]]) for v in alive if parent[v] is not None]
    td = make_decomposition(bags, edges)
    td.validate(f)
    return td


def exact_tree_decomposition(f: Graph, max_width: int, max_vertices: int = 20) -> TreeDecomposition | None:
    """Minimum-width decomposition if the treewidth is at most ``max_width``."""
    order, width = treewidth_order(f, max_vertices)
    if width > max_width:
        return None
    return decomposition_from_order(f, order)


def treewidth(f: Graph, max_vertices: int = 20) -> int:
    return treewidth_order(f, max_vertices)[1]


def treewidth_at_most_2(f: Graph) -> bool:
    """Series-parallel reduction test, no size cap."""
    adj = {v: set(f.neighbors(v)) for v in f.vertices}
    stack = list(adj)
    while stack:
        v = stack.pop()
        if v not in adj:
            continue
        nb = adj[v]
        if len(nb) <= 1:
            for w in nb:
                adj[w].discard(v)
                stack.append(w)
            del adj[v]
        elif len(nb) == 2:
            a, b = nb
            adj[a].discard(v)
            adj[b].discard(v)
            adj[a].add(b)
            adj[b].add(a)
            del adj[v]
            stack.extend((a, b))
    return not adj


def has_treewidth_at_most(f: Graph, k: int) -> bool:
    if k < 0:
        return f.n == 0
    if k == 0:
        return f.m == 0
    if k == 1:
        return f.m == f.n - len(f.components())
    if k == 2:
        return treewidth_at_most_2(f)
    return exact_tree_decomposition(f, k) is not None


# ---------------------------------------------------------------------------
# TW^k


@dataclass(frozen=True)
class TwkDecomposition:
    decomposition: TreeDecomposition
    root: int
    k: int

    @property
    def bags(self):
        return self.decomposition.bags

    @property
    def tree(self) -> Graph:
        return self.decomposition.tree


def validate_twk(f: LabelledGraph, dec: TwkDecomposition, strict: bool = True) -> None:
    """Check the TW^k conditions for ``f`` under ``dec``.

    ``strict`` enforces exactly: root bag equals the label set, and with two
    or more nodes every bag has ``k+1`` vertices and neighbouring bags share
    ``k``.  The relaxed form, used inside graph combinations where labels may
    coincide, only bounds bags by ``k+1`` and lets neighbouring bags differ
    by at most one vertex on each side.
    """
    k = dec.k
    if f.arity != k + 1:
        raise InvalidDecomposition(f"expected {k + 1} labels, got {f.arity}")
    dec.decomposition.validate(f.graph)
    bags = dec.bags
    if dec.root not in bags:
        raise InvalidDecomposition("root is not a tree node")
    if bags[dec.root] != frozenset(f.labels):
        raise InvalidDecomposition("root bag differs from the label set")
    if dec.tree.n >= 2:
        for t, b in bags.items():
            if strict and len(b) != k + 1:
                raise InvalidDecomposition(f"bag {t} has {len(b)} vertices, expected {k + 1}")
            if len(b) > k + 1:
                raise InvalidDecomposition(f"bag {t} is wider than {k + 1}")
        for s, t in dec.tree.edges:
            bs, bt = bags[s], bags[t]
            if strict and len(bs & bt) != k:
                raise InvalidDecomposition(f"bags {s},{t} share {len(bs & bt)} vertices, expected {k}")
            if len(bs - bt) > 1 or len(bt - bs) > 1:
                raise InvalidDecomposition(f"bags {s},{t} differ by more than one vertex")


def is_twk(f: LabelledGraph, dec: TwkDecomposition, strict: bool = True) -> bool:
    try:
        validate_twk(f, dec, strict)
    except InvalidDecomposition:
        return False
    return True


def normalize_to_twk(f: LabelledGraph, td: TreeDecomposition, k: int) -> TwkDecomposition:
    """Reshape ``td`` into a strict TW^k decomposition rooted at the label bag."""
    td.validate(f.graph)
    if td.width > k:
        raise InvalidDecomposition(f"width {td.width} exceeds {k}")
    if f.arity != k + 1:
        raise InvalidDecomposition(f"expected {k + 1} labels, got {f.arity}")
    label_set = frozenset(f.labels)
    if frozenset(f.graph.vertices) == label_set:
        dec = TwkDecomposition(make_decomposition([label_set], []), 0, k)
        validate_twk(f, dec)
        return dec
    if len(label_set) != k + 1:
        raise InvalidDecomposition("repeated labels only fit a single-bag decomposition")
    host = next((t for t, b in td.bags.items() if label_set <= b), None)
    if host is None:
        td = saturate(f.graph, td, k)
        host = next((t for t, b in td.bags.items() if label_set == b), None)
    if host is None:
        raise InvalidDecomposition("no bag extension contains all labels")
    already = _strict_twk_shape(td, k) and td.bags[host] == label_set
    if already:
        dec = TwkDecomposition(td, host, k)
        validate_twk(f, dec)
        return dec

    _, parent, order = td.rooted(host)
    bags = {t: set(td.bags[t]) for t in order}
    # pad top-down with vertices of the parent bag
    for t in order:
        p = parent[t]
        if p is None:
            continue
        for x in sorted(bags[p] - bags[t]):
            if len(bags[t]) >= k + 1:
                break
            bags[t].add(x)
    if len(bags[host]) != k + 1:
        raise InvalidDecomposition("host bag is not full")
    # merge nodes whose bag equals the parent's bag
    children: dict[int, list[int]] = {t: [] for t in order}
    for t in order:
        if parent[t] is not None:
            children[parent[t]].append(t)
    new_bags: list[frozenset[int]] = []
    new_edges: list[tuple[int, int]] = []

    def emit(t, attach_to):
        b = frozenset(bags[t])
        if attach_to is not None and new_bags[attach_to] == b:
            idx = attach_to
        else:
            idx = len(new_bags)
            if attach_to is None:
                new_bags.append(b)
            else:
                # step from the parent bag to b one vertex at a time
                prev = attach_to
                cur = set(new_bags[attach_to])
                outgoing = sorted(cur - b)
                incoming = sorted(b - cur)
                for x_out, x_in in zip(outgoing[:-1], incoming[:-1]):
                    cur = (cur - {x_out}) | {x_in}
                    new_bags.append(frozenset(cur))
                    new_edges.append((prev, len(new_bags) - 1))
                    prev = len(new_bags) - 1
                new_bags.append(b)
                idx = len(new_bags) - 1
                new_edges.append((prev, idx))
        for c in children[t]:
            emit(c, idx)

    emit(host, None)
    # the host bag is index 0 and may be a superset-free full bag; make it the label set
    root = 0
    if new_bags[0] != label_set:
        raise InvalidDecomposition("labels do not fill the host bag")
    dec = TwkDecomposition(make_decomposition(new_bags, new_edges), root, k)
    validate_twk(f, dec)
    return dec


def _strict_twk_shape(td: TreeDecomposition, k: int) -> bool:
    if td.tree.n == 1:
        return True
    if any(len(b) != k + 1 for b in td.bags.values()):
        return False
    return all(len(td.bags[s] & td.bags[t]) == k for s, t in td.tree.edges)


def labelled_decomposition(f: LabelledGraph, k: int) -> TwkDecomposition | None:
    """Find a strict TW^k decomposition for ``f`` or ``None``.

    Works by decomposing ``f`` with the label set made into a clique, which
    forces the labels into a common bag.
    """
    label_set = sorted(set(f.labels))
    if set(f.graph.vertices) == set(label_set) and len(label_set) <= k + 1:
        dec = TwkDecomposition(make_decomposition([frozenset(label_set)], []), 0, k)
        return dec if is_twk(f, dec) else None
    if len(label_set) != k + 1:
        return None
    aux = f.graph.add_edges([(a, b) for i, a in enumerate(label_set) for b in label_set[i + 1:]])
    td = exact_tree_decomposition(aux, k)
    if td is None:
        return None
    # the same bags decompose the original graph too
    td = TreeDecomposition(td.tree, td.bags)
    return normalize_to_twk(f, td, k)


def saturate(f: Graph, td: TreeDecomposition, k: int) -> TreeDecomposition:
    """Grow bags towards ``k+1`` vertices using neighbouring bags, contracting nested bags.

    When ``f`` has at least ``k+1`` vertices every bag of the result has exactly ``k+1``.
    """
    bags = {t: set(b) for t, b in td.bags.items()}
    adj = {t: set(td.tree.neighbors(t)) for t in td.tree.vertices}
    changed = True
    while changed:
        changed = False
        for s_ in sorted(bags):
            for t in sorted(adj[s_]):
                if bags[s_] <= bags[t]:
                    for x in adj[s_] - {t}:
                        adj[x].discard(s_)
                        adj[x].add(t)
                        adj[t].add(x)
                    adj[t].discard(s_)
                    del adj[s_], bags[s_]
                    changed = True
                    break
            if changed:
                break
        if changed:
            continue
        for s_ in sorted(bags):
            if len(bags[s_]) >= k + 1:
                continue
            for t in sorted(adj[s_]):
                extra = sorted(bags[t] - bags[s_])
                if extra:
                    bags[s_].add(extra[0])
                    changed = True
                    break
            if changed:
                break
    ids = {t: i for i, t in enumerate(sorted(bags))}
    edges = {(min(ids[a], ids[b]), max(ids[a], ids[b])) for a in adj for b in adj[a]}
    out = make_decomposition([bags[t] for t in sorted(bags)], edges)
    out.validate(f)
    return out


def choose_labels(f: Graph, k: int) -> tuple[LabelledGraph, TwkDecomposition] | None:
    """Pick labels making ``f`` a TW^k graph, if its treewidth allows."""
    if f.n == 0:
        return None
    if f.n <= k + 1:
        vs = list(f.vertices)
        labels = tuple(vs + [vs[-1]] * (k + 1 - len(vs)))
        lf = LabelledGraph(f, labels)
        dec = TwkDecomposition(make_decomposition([frozenset(vs)], []), 0, k)
        validate_twk(lf, dec)
        return lf, dec
    td = exact_tree_decomposition(f, k)
    if td is None:
        return None
    td = saturate(f, td, k)
    root_bag = td.bags[td.tree.vertices[0]]
    lf = LabelledGraph(f, tuple(sorted(root_bag)))
    return lf, normalize_to_twk(lf, td, k)
