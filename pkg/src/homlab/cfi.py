"""CFI graphs over finite abelian groups, the ordered CFI* structures, twist-moving
isomorphisms, and nice planar base graphs."""

from __future__ import annotations

import itertools
from math import comb
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .canon import Structure, is_isomorphism
from .graph import Graph, OrderedGraph, graph_to_dict
from .groups import FiniteAbelianGroup, GroupElement, group_vector
from .treedec import SizeCapExceeded, cap_override

Edge = tuple[int, int]


def edge_key(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True, eq=False)
class CfiGraph:
    """``CFI[gamma, base, U]`` with vertices numbered by (origin, lexicographic S).

    ``vertices[i] = (u, S)`` where ``S`` lists one group element per edge of
    ``base.incident_edges(u)``.
    """

    base: Graph
    gamma: FiniteAbelianGroup
    u_vector: Mapping[int, GroupElement]
    vertices: tuple[tuple[int, tuple[GroupElement, ...]], ...]
    graph: Graph
    origin: Mapping[int, int]
    index: Mapping[tuple, int] = field(repr=False)

    def s_value(self, vid: int, e: Edge) -> GroupElement:
        u, s = self.vertices[vid]
        return s[self.base.incident_edges(u).index(e)]

    @property
    def twist(self) -> GroupElement:
        return self.gamma.sum(self.u_vector.values())

    def fiber(self, u: int) -> list[int]:
        return [i for i, (o, _) in enumerate(self.vertices) if o == u]

    def to_dict(self) -> dict:
        d = graph_to_dict(self.graph)
        d["meta"] = {
            "gamma": list(self.gamma.cyclic_orders),
            "base": graph_to_dict(self.base),
            "U": {str(u): list(x) for u, x in self.u_vector.items()},
            "origin": {str(i): o for i, o in self.origin.items()},
            "S": [[list(x) for x in s] for _, s in self.vertices],
        }
        return d


def expected_vertex_count(gamma: FiniteAbelianGroup, base: Graph) -> int:
    return sum(gamma.order ** (base.degree(u) - 1) for u in base.vertices if base.degree(u) > 0) + \
        sum(1 for u in base.vertices if base.degree(u) == 0)


def _fiber_vectors(gamma: FiniteAbelianGroup, deg: int, target: GroupElement):
    elems = list(gamma.elements())
    if deg == 0:
        return [()] if target == gamma.zero() else []
    out = []
    for head in itertools.product(elems, repeat=deg - 1):
        last = gamma.sub(target, gamma.sum(head))
        out.append(head + (last,))
    return sorted(out)


def build_cfi(gamma: FiniteAbelianGroup, base: Graph, u_vec) -> CfiGraph:
    """Construct ``CFI[gamma, base, U]`` and check its structural invariants."""
    if base.n == 0 or not base.is_connected():
        raise ValueError("base graph must be nonempty and connected")
    try:
        u_vector = group_vector(gamma, base.vertices, u_vec)
    except ValueError as exc:
        raise ValueError(f"U is not indexed by the base vertices: {exc}") from None
    vertices = []
    for u in base.vertices:
        for s in _fiber_vectors(gamma, base.degree(u), u_vector[u]):
            vertices.append((u, s))
    index = {v: i for i, v in enumerate(vertices)}
    by_value: dict[tuple[int, Edge, GroupElement], list[int]] = {}
    for i, (u, s) in enumerate(vertices):
        for e, x in zip(base.incident_edges(u), s):
            by_value.setdefault((u, e, x), []).append(i)
    edges = []
    for u, v in sorted(base.edges):
        e = (u, v)
        for i in range(len(vertices)):
            ou, s = vertices[i]
            if ou != u:
                continue
            x = s[base.incident_edges(u).index(e)]
            for j in by_value.get((v, e, gamma.neg(x)), ()):
                edges.append((i, j))
    graph = Graph(range(len(vertices)), edges)
    origin = {i: u for i, (u, _) in enumerate(vertices)}
    cfi = CfiGraph(base, gamma, u_vector, tuple(vertices), graph, origin, index)
    _check_cfi(cfi)
    return cfi


def _check_cfi(cfi: CfiGraph) -> None:
    gamma, base = cfi.gamma, cfi.base
    if len(cfi.vertices) != expected_vertex_count(gamma, base):
        raise AssertionError("vertex count differs from the closed form")
    for u, s in cfi.vertices:
        if gamma.sum(s) != cfi.u_vector[u]:
            raise AssertionError("fiber vector violates the sum constraint")
    for a, b in cfi.graph.edges:
        if not base.has_edge(cfi.origin[a], cfi.origin[b]):
            raise AssertionError("origin map is not a homomorphism")


# ---------------------------------------------------------------------------
# CFI*


@dataclass(frozen=True, eq=False)
class CfiStructure:
    """CFI* over ``Z_{2^i}``: the CFI graph plus the preorder and relations N, C, I_j."""

    cfi: CfiGraph
    order: OrderedGraph
    n_rel: Mapping[tuple[int, int], frozenset[tuple[int, int]]]
    c_rel: Mapping[tuple[int, int], frozenset[tuple[int, int]]]
    i_rel: Mapping[int, frozenset[frozenset[int]]]

    @property
    def n(self) -> int:
        return self.cfi.graph.n

    def rank(self, vid: int) -> int:
        return self.order.rank()[self.cfi.origin[vid]]

    def precedes(self, a: int, b: int) -> bool:
        r = self.order.rank()
        return r[self.cfi.origin[a]] <= r[self.cfi.origin[b]]

    def to_structure(self) -> Structure:
        """Vertex colour is the origin rank; an arc is labelled by the relations containing it."""
        labels: dict[tuple[int, int], list] = {}
        for (u, v), pairs in self.n_rel.items():
            for a, b in pairs:
                labels.setdefault((a, b), []).append(("N", u, v))
        for (u, v), pairs in self.c_rel.items():
            for a, b in pairs:
                labels.setdefault((a, b), []).append(("C", u, v))
        for j, pairs in self.i_rel.items():
            for pr in pairs:
                a, b = tuple(pr)
                labels.setdefault((a, b), []).append(("I", j))
                labels.setdefault((b, a), []).append(("I", j))
        arcs = {k: tuple(sorted(v)) for k, v in labels.items()}
        rank = self.order.rank()
        colors = [rank[self.cfi.origin[x]] for x in range(self.n)]
        return Structure(self.n, colors, arcs, symmetric=False)

    def to_dict(self) -> dict:
        d = self.cfi.to_dict()
        d["meta"]["order"] = list(self.order.order)
        d["meta"]["N"] = {f"{u}-{v}": sorted(map(list, p)) for (u, v), p in self.n_rel.items()}
        d["meta"]["C"] = {f"{u}-{v}": sorted(map(list, p)) for (u, v), p in self.c_rel.items()}
        d["meta"]["I"] = {str(j): sorted(sorted(x) for x in p) for j, p in self.i_rel.items()}
        return d


def build_cfi_star(i: int, base: Graph | OrderedGraph, u_vec) -> CfiStructure:
    if i < 1:
        raise ValueError("i must be positive")
    order = base if isinstance(base, OrderedGraph) else OrderedGraph.by_id(base)
    gamma = FiniteAbelianGroup.cyclic(2 ** i)
    cfi = build_cfi(gamma, order.graph, u_vec)
    mod = 2 ** i
    n_rel, c_rel = {}, {}
    for u, v in order.graph.edges:
        for a, b in ((u, v), (v, u)):
            e = edge_key(a, b)
            fib = cfi.fiber(a)
            vals = {x: cfi.s_value(x, e)[0] for x in fib}
            n_rel[(a, b)] = frozenset((x, y) for x in fib for y in fib if vals[x] == vals[y])
            c_rel[(a, b)] = frozenset((x, y) for x in fib for y in fib
                                      if (vals[x] + 1) % mod == vals[y])
    i_rel: dict[int, set] = {j: set() for j in range(mod)}
    for u, v in order.graph.edges:
        e = (u, v)
        for x in cfi.fiber(u):
            for y in cfi.fiber(v):
                j = (cfi.s_value(x, e)[0] + cfi.s_value(y, e)[0]) % mod
                i_rel[j].add(frozenset((x, y)))
    s = CfiStructure(cfi, order, n_rel, c_rel, {j: frozenset(p) for j, p in i_rel.items()})
    if s.i_rel[0] != frozenset(frozenset(e) for e in cfi.graph.edges):
        raise AssertionError("I_0 differs from the edge relation")
    return s


# ---------------------------------------------------------------------------
# twist-moving isomorphisms


def _rebuild(src, u_vector):
    if isinstance(src, CfiStructure):
        i = src.cfi.gamma.cyclic_orders[0].bit_length() - 1
        return build_cfi_star(i, src.order, u_vector)
    return build_cfi(src.gamma, src.base, u_vector)


def _cfi_of(x) -> CfiGraph:
    return x.cfi if isinstance(x, CfiStructure) else x


def _verify_map(src, dst, perm: Sequence[int]) -> None:
    if isinstance(src, CfiStructure):
        ok = is_isomorphism(src.to_structure(), dst.to_structure(), perm)
    else:
        ok = is_isomorphism(Structure.from_graph(src.graph), Structure.from_graph(dst.graph), perm)
    if not ok:
        raise AssertionError("constructed map is not an isomorphism")


def _shift_map(cfi: CfiGraph, target: CfiGraph, moves: Mapping[tuple[int, Edge], GroupElement]) -> list[int]:
    """Vertex map adding ``moves[(u, e)]`` to coordinate ``e`` of every vertex over ``u``."""
    gamma = cfi.gamma
    perm = []
    for u, s in cfi.vertices:
        inc = cfi.base.incident_edges(u)
        s2 = tuple(gamma.add(x, moves.get((u, e), gamma.zero())) for x, e in zip(s, inc))
        perm.append(target.index[(u, s2)])
    return perm


def twist_isomorphism(src, edge: tuple[int, int], j=1):
    """Isomorphism onto the CFI object over ``U + j*u - j*v`` for the base edge ``(u, v)``.

    Returns ``(perm, target)``; ``perm[x]`` is the image of vertex ``x``.
    """
    cfi = _cfi_of(src)
    u, v = edge
    if not cfi.base.has_edge(u, v):
        raise ValueError(f"{u}-{v} is not a base edge")
    gamma = cfi.gamma
    j = gamma.element(j)
    uvec = dict(cfi.u_vector)
    uvec[u] = gamma.add(uvec[u], j)
    uvec[v] = gamma.sub(uvec[v], j)
    target = _rebuild(src, uvec)
    e = edge_key(u, v)
    perm = _shift_map(cfi, _cfi_of(target), {(u, e): j, (v, e): gamma.neg(j)})
    _verify_map(src, target, perm)
    return perm, target


def path_isomorphism(src, walk: Sequence[int], j=1):
    """Isomorphism onto the CFI object over ``U - j*u_1 + j*u_m`` along the walk ``u_1..u_m``.

    It is the identity on every vertex whose origin is off the walk; a closed
    walk yields an automorphism.
    """
    cfi = _cfi_of(src)
    gamma = cfi.gamma
    j = gamma.element(j)
    walk = list(walk)
    if not walk or any(x not in cfi.base.neighbors(y) for x, y in zip(walk, walk[1:])) \
            or walk[0] not in cfi.base.vertices:
        raise ValueError(f"{walk} is not a walk in the base graph")
    moves: dict[tuple[int, Edge], GroupElement] = {}
    for a, b in zip(walk, walk[1:]):
        e = edge_key(a, b)
        moves[(b, e)] = gamma.add(moves.get((b, e), gamma.zero()), j)
        moves[(a, e)] = gamma.sub(moves.get((a, e), gamma.zero()), j)
    uvec = dict(cfi.u_vector)
    uvec[walk[0]] = gamma.sub(uvec[walk[0]], j)
    uvec[walk[-1]] = gamma.add(uvec[walk[-1]], j)
    target = _rebuild(src, uvec) if uvec != dict(cfi.u_vector) else src
    perm = _shift_map(cfi, _cfi_of(target), moves)
    _verify_map(src, target, perm)
    return perm, target


# ---------------------------------------------------------------------------
# nice planar graphs


@dataclass(frozen=True)
class NiceWitness:
    graph: Graph
    witness_vertex: int
    params: tuple[int, int, int, int]
    leaves: tuple[int, ...]


def nice_planar_vertex_count(n: int) -> int:
    leaves = 2 * n * (2 * n - 1) ** (4 * n - 1)
    tree = 1 + sum(2 * n * (2 * n - 1) ** (i - 1) for i in range(1, 4 * n + 1))
    return tree + 2 * n * leaves - leaves


def build_nice_planar(n: int, max_n: int = 2) -> NiceWitness:
    """Tree of depth ``4n`` (root has ``2n`` children, other inner vertices ``2n-1``)
    whose leaves form the first row of a grid with ``2n`` rows."""
    if n < 1:
        raise ValueError("n must be positive")
    if n > cap_override(max_n):
        raise SizeCapExceeded(f"nice planar graph for n={n} exceeds the size cap")
    edges = []
    level = [0]
    nxt_id = 1
    for depth in range(4 * n):
        branching = 2 * n if depth == 0 else 2 * n - 1
        new_level = []
        for parent in level:
            for _ in range(branching):
                edges.append((parent, nxt_id))
                new_level.append(nxt_id)
                nxt_id += 1
        level = new_level
    leaves = level
    width = len(leaves)
    rows = [leaves]
    for _ in range(2 * n - 1):
        rows.append(list(range(nxt_id, nxt_id + width)))
        nxt_id += width
    for r, row in enumerate(rows):
        for c in range(width):
            if c + 1 < width:
                edges.append((row[c], row[c + 1]))
            if r + 1 < len(rows):
                edges.append((row[c], rows[r + 1][c]))
    g = Graph(range(nxt_id), edges)
    if g.n != nice_planar_vertex_count(n):
        raise AssertionError("vertex count differs from the closed form")
    return NiceWitness(g, 0, (n, 2 * n, 2 * n, n), tuple(leaves))


@dataclass(frozen=True)
class NiceResult:
    status: str                      # "true", "false" or "inconclusive"
    failed: int | None = None        # first violated condition
    detail: str = ""

    def __bool__(self) -> bool:
        return self.status == "true"


def _ball(g: Graph, w: int, r: int) -> set[int]:
    return {x for x, d in g.distances_from(w).items() if d <= r}


def _shortest_cycle_through(g: Graph, w: int) -> float:
    best = float("inf")
    for x in g.neighbors(w):
        h = Graph(g.vertices, [e for e in g.edges if e != edge_key(w, x)])
        d = h.distances_from(x).get(w)
        if d is not None:
            best = min(best, d + 1)
    return best


class _Budget:
    def __init__(self, nodes):
        self.left = nodes

    def tick(self):
        self.left -= 1
        if self.left < 0:
            raise SizeCapExceeded("grid embedding search budget exhausted")


def embeds_in_grid(h: Graph, height: int, budget: int = 200_000) -> bool:
    """Is the connected graph ``h`` an induced subgraph of a grid with ``height`` rows?"""
    if h.n == 0:
        return True
    if height <= 0:
        return False
    if any(h.degree(v) > (4 if height > 1 else 2) for v in h.vertices):
        return False
    if height == 1:
        return h.m == h.n - 1 and all(h.degree(v) <= 2 for v in h.vertices)
    order = []
    parent = {}
    start = h.vertices[0]
    seen = {start}
    queue = [start]
    while queue:
        x = queue.pop(0)
        order.append(x)
        for y in sorted(h.neighbors(x)):
            if y not in seen:
                seen.add(y)
                parent[y] = x
                queue.append(y)
    width = 2 * h.n + 1
    b = _Budget(budget)
    pos: dict[int, tuple[int, int]] = {}
    used: dict[tuple[int, int], int] = {}

    def ok(v, cell):
        r, c = cell
        if not (0 <= r < height and 0 <= c < width) or cell in used:
            return False
        for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            other = used.get((r + dr, c + dc))
            if other is not None and not h.has_edge(v, other):
                return False
        for w in h.neighbors(v):
            if w in pos and abs(pos[w][0] - r) + abs(pos[w][1] - c) != 1:
                return False
        return True

    def rec(i):
        b.tick()
        if i == len(order):
            return True
        v = order[i]
        pr, pc = pos[parent[v]]
        for cell in ((pr + 1, pc), (pr - 1, pc), (pr, pc + 1), (pr, pc - 1)):
            if ok(v, cell):
                pos[v] = cell
                used[cell] = v
                if rec(i + 1):
                    return True
                del pos[v]
                del used[cell]
        return False

    for r in range(height):
        cell = (r, h.n)
        pos[start] = cell
        used[cell] = start
        if rec(1):
            return True
        pos.clear()
        used.clear()
    return False


def check_nice(g: Graph, w: int, r: int, d: int, girth: int, c: int,
               max_c: int = 3, max_subsets: int = 1_000_000,
               max_component: int = 60) -> NiceResult:
    """Evaluate the four niceness conditions for the ``r``-ball around ``w``."""
    if c > cap_override(max_c):
        return NiceResult("inconclusive", None, f"c={c} exceeds the cap {max_c}")
    if w not in g.vertices:
        raise ValueError(f"{w} is not a vertex")
    ball = _ball(g, w, r)
    for x in sorted(ball):
        if g.degree(x) < d:
            return NiceResult("false", 1, f"vertex {x} has degree {g.degree(x)} < {d}")
    for x in sorted(ball):
        cyc = _shortest_cycle_through(g, x)
        if cyc < girth:
            return NiceResult("false", 2, f"cycle of length {cyc} through {x}")
    total = sum(comb(g.n, s) for s in range(c + 1))
    if total > max_subsets:
        return NiceResult("inconclusive", None, f"{total} vertex subsets exceed the budget")
    inconclusive = ""
    for size in range(c + 1):
        for removed in itertools.combinations(g.vertices, size):
            h = g.remove_vertices(removed)
            comps = h.components()
            rest = ball - set(removed)
            if rest:
                owner = [i for i, comp in enumerate(comps) if rest & set(comp)]
                if len(owner) > 1:
                    return NiceResult("false", 3, f"removing {list(removed)} separates the ball")
            bad, undecided = _count_non_grid(h, comps, size, max_component)
            if bad >= 2:
                return NiceResult("false", 4, f"removing {list(removed)} leaves {bad} non-grid components")
            if bad + undecided >= 2 and not inconclusive:
                inconclusive = f"grid test undecided after removing {list(removed)}"
    if inconclusive:
        return NiceResult("inconclusive", 4, inconclusive)
    return NiceResult("true")


def _count_non_grid(h: Graph, comps, height: int, max_component: int) -> tuple[int, int]:
    """Non-grid and undecided component counts; the largest component is only
    tested once another component has already failed or is undecided."""
    bad = undecided = 0
    ordered = sorted(comps, key=len)
    for i, comp in enumerate(ordered):
        if i == len(ordered) - 1 and bad + undecided == 0:
            break
        if len(comp) > max_component:
            undecided += 1
            continue
        try:
            if not embeds_in_grid(h.induced_subgraph(comp), height):
                bad += 1
        except SizeCapExceeded:
            undecided += 1
    return bad, undecided
