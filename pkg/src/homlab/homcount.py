"""Homomorphism counting: backtracking, CFI equation systems, and tree-decomposition DP."""

from __future__ import annotations

from collections import Counter
from typing import Iterator, Mapping

from .graph import Graph, LabelledGraph
from .linalg import count_solutions
from .treedec import TreeDecomposition


class EnumerationCapExceeded(RuntimeError):
    pass


def _plan(f: Graph, pinned: Mapping[int, int] = ()) -> list[int]:
    """Variable order: pinned vertices first, then most-constrained, highest degree, lowest id."""
    order = sorted(pinned)
    placed = set(order)
    rest = set(f.vertices) - placed
    while rest:
        v = min(rest, key=lambda x: (-len(f.neighbors(x) & placed), -f.degree(x), x))
        order.append(v)
        placed.add(v)
        rest.discard(v)
    return order


def _prepare(f: Graph, g: Graph, pins: Mapping[int, int]):
    order = _plan(f, pins)
    pos = {v: i for i, v in enumerate(order)}
    back = [[pos[w] for w in f.neighbors(v) if pos[w] < i] for i, v in enumerate(order)]
    gn = {x: g.neighbors(x) for x in g.vertices}
    return order, back, gn


def _candidates(i, order, back, gn, img, all_g, pins):
    v = order[i]
    if v in pins:
        x = pins[v]
        if all(x in gn[img[j]] for j in back[i]):
            return (x,)
        return ()
    if not back[i]:
        return all_g
    nbs = back[i]
    cand = gn[img[nbs[0]]]
    for j in nbs[1:]:
        cand = cand & gn[img[j]]
        if not cand:
            break
    return cand


def iter_homs(f: Graph, g: Graph, pins: Mapping[int, int] | None = None) -> Iterator[dict[int, int]]:
    """Yield every homomorphism ``f -> g`` (respecting ``pins``) as a vertex map."""
    pins = dict(pins or {})
    if not f.vertices:
        yield {}
        return
    order, back, gn = _prepare(f, g, pins)
    all_g = g.vertices
    n = len(order)
    img = [0] * n
    stack = [iter(sorted(_candidates(0, order, back, gn, img, all_g, pins)))]
    while stack:
        i = len(stack) - 1
        nxt = next(stack[-1], None)
        if nxt is None:
            stack.pop()
            continue
        img[i] = nxt
        if i + 1 == n:
            yield {order[j]: img[j] for j in range(n)}
        else:
            stack.append(iter(sorted(_candidates(i + 1, order, back, gn, img, all_g, pins))))


def _count(f: Graph, g: Graph, pins: Mapping[int, int]) -> int:
    if not f.vertices:
        return 1
    order, back, gn = _prepare(f, g, pins)
    all_g = g.vertices
    n = len(order)
    img = [0] * n

    def rec(i: int) -> int:
        cand = _candidates(i, order, back, gn, img, all_g, pins)
        if i + 1 == n:
            return len(cand)
        total = 0
        for x in cand:
            img[i] = x
            total += rec(i + 1)
        return total

    return rec(0)


def hom_count_brute(f: Graph, g: Graph, modulus: int | None = None) -> int:
    """Number of homomorphisms ``f -> g`` by backtracking; components are counted separately."""
    total = 1
    for comp in f.components():
        total *= _count(f.induced_subgraph(comp), g, {})
        if total == 0:
            break
    return total % modulus if modulus else total


def _label_pins(f: LabelledGraph, targets) -> dict[int, int] | None:
    pins: dict[int, int] = {}
    for a, x in zip(f.labels, targets):
        if pins.setdefault(a, x) != x:
            return None
    return pins


def hom_count_labelled(f: LabelledGraph, g: LabelledGraph) -> int:
    """Homomorphisms sending the i-th label of ``f`` to the i-th label of ``g``."""
    if f.arity != g.arity:
        raise ValueError(f"label arity mismatch: {f.arity} vs {g.arity}")
    pins = _label_pins(f, g.labels)
    if pins is None:
        return 0
    total = 1
    for comp in f.graph.components():
        sub = f.graph.induced_subgraph(comp)
        total *= _count(sub, g.graph, {v: x for v, x in pins.items() if v in set(comp)})
        if total == 0:
            break
    return total


def hom_counts_by_labels(f: LabelledGraph, g: Graph) -> Counter:
    """``hom((f), (g, w))`` for every label tuple ``w`` with a nonzero count."""
    labelled = set(f.labels)
    out: Counter = Counter()
    free_factor = 1
    core_vertices = set()
    for comp in f.graph.components():
        if labelled & set(comp):
            core_vertices |= set(comp)
        else:
            free_factor *= _count(f.graph.induced_subgraph(comp), g, {})
    if free_factor == 0:
        return out
    core = f.graph.induced_subgraph(core_vertices)
    # count homs per image of the labelled vertices, extending the rest by counting
    lab_vs = sorted(labelled)
    rest = core.remove_vertices(lab_vs)
    for h in iter_homs(core.induced_subgraph(lab_vs), g):
        ext = _count(core, g, h) if rest.vertices else 1
        if ext:
            out[tuple(h[a] for a in f.labels)] += ext * free_factor
    return out


# ---------------------------------------------------------------------------
# CFI equation systems


def cfi_system(f: Graph, cfi, psi: Mapping[int, int]):
    """Matrix, right-hand side and column index of the system whose solutions are the
    homomorphisms ``f -> cfi`` lying over ``psi``.

    Column ``(a, e)`` is the value of the ``e``-coordinate of the image of ``a``.
    """
    base = cfi.base
    cols = [(a, e) for a in f.vertices for e in base.incident_edges(psi[a])]
    idx = {c: i for i, c in enumerate(cols)}
    rows, rhs = [], []
    for b in f.vertices:
        row = [0] * len(cols)
        for e in base.incident_edges(psi[b]):
            row[idx[(b, e)]] = 1
        rows.append(row)
        rhs.append(cfi.u_vector[psi[b]])
    for a, b in sorted(f.edges):
        e = (min(psi[a], psi[b]), max(psi[a], psi[b]))
        row = [0] * len(cols)
        row[idx[(a, e)]] += 1
        row[idx[(b, e)]] += 1
        rows.append(row)
        rhs.append(cfi.gamma.zero())
    return rows, rhs, cols


def hom_psi_counts(f: Graph, cfi, cap: int = 200_000) -> dict[tuple, int]:
    """Per-``psi`` solution counts, keyed by the image tuple of ``psi`` over sorted ``V(f)``."""
    out = {}
    for i, psi in enumerate(iter_homs(f, cfi.base)):
        if i >= cap:
            raise EnumerationCapExceeded(f"more than {cap} homomorphisms into the base")
        a, b, cols = cfi_system(f, cfi, psi)
        out[tuple(psi[v] for v in f.vertices)] = count_solutions(a, b, cfi.gamma, ncols=len(cols))[0]
    return out


def hom_psi_counts_brute(f: Graph, cfi) -> Counter:
    """Per-``psi`` counts by enumerating homomorphisms into the CFI graph itself."""
    out: Counter = Counter()
    for psi in iter_homs(f, cfi.base):
        out[tuple(psi[v] for v in f.vertices)] = 0
    origin = cfi.origin
    for h in iter_homs(f, cfi.graph):
        out[tuple(origin[h[v]] for v in f.vertices)] += 1
    return out


def hom_count_cfi(f: Graph, cfi, cap: int = 200_000) -> int:
    """``hom(f, cfi)`` as the sum over base homomorphisms of linear-system solution counts."""
    return sum(hom_psi_counts(f, cfi, cap).values())


# ---------------------------------------------------------------------------
# tree-decomposition DP


def hom_count_tw(f: Graph, td: TreeDecomposition, g: Graph, modulus: int | None = None) -> int:
    """Count homomorphisms by dynamic programming over ``td``; reduce mod ``modulus`` if given."""
    td.validate(f)
    root, parent, order = td.rooted()
    children: dict[int, list[int]] = {t: [] for t in order}
    for t in order:
        if parent[t] is not None:
            children[parent[t]].append(t)
    proj: dict[int, dict[tuple, int]] = {}
    result = 0
    for t in reversed(order):
        bag = sorted(td.bags[t])
        sub = f.induced_subgraph(bag)
        kids = [(c, [bag.index(v) for v in sorted(td.bags[c] & td.bags[t])]) for c in children[t]]
        shared_up = sorted(td.bags[t] & td.bags[parent[t]]) if parent[t] is not None else []
        up_pos = [bag.index(v) for v in shared_up]
        table: dict[tuple, int] = {}
        for h in iter_homs(sub, g):
            assign = tuple(h[v] for v in bag)
            val = 1
            for c, pos in kids:
                val *= proj[c].get(tuple(assign[i] for i in pos), 0)
                if not val:
                    break
            if not val:
                continue
            if modulus:
                val %= modulus
            key = tuple(assign[i] for i in up_pos)
            table[key] = table.get(key, 0) + val
        for c in children[t]:
            del proj[c]
        if modulus:
            table = {k: v % modulus for k, v in table.items() if v % modulus}
        if parent[t] is None:
            result = table.get((), 0)
        else:
            proj[t] = table
    return result % modulus if modulus else result


# ---------------------------------------------------------------------------
# distinguishing graphs


def find_distinguisher(g: Graph, h: Graph, family: str = "all", max_size: int = 5,
                       modulus: int | None = None, k: int | None = None) -> Graph | None:
    """First connected ``F`` in canonical order whose (modular) hom counts into ``g`` and ``h`` differ."""
    from .enumeration import connected_graphs

    for f in connected_graphs(max_size, family, k):
        if hom_count_brute(f, g, modulus) != hom_count_brute(f, h, modulus):
            return f
    return None
