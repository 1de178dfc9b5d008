"""F_p-linear combinations of labelled bounded-treewidth graphs and the two
translations between C^{k+1}_p formulas and such combinations."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping

from .canon import Structure, canonical_search
from .graph import Graph, LabelledGraph, glue_vertex_maps, glue_with_maps
from .homcount import find_distinguisher, hom_count_brute, hom_count_labelled, hom_counts_by_labels
from .linalg import is_prime
from .logic import (FALSE, TRUE, And, Edge, Eq, Formula, FormulaError, ModExists, Not, Or, Top,
                    conj, disj, model_check, variables)
from .treedec import (TwkDecomposition, choose_labels, make_decomposition, validate_twk)


class CombinationTooLarge(RuntimeError):
    pass


DEFAULT_TERM_CAP = 100_000


@dataclass(frozen=True)
class Term:
    graph: LabelledGraph
    dec: TwkDecomposition


def _label_colors(lg: LabelledGraph) -> list[tuple[int, ...]]:
    pos: dict[int, list[int]] = {v: [] for v in lg.graph.vertices}
    for i, v in enumerate(lg.labels):
        pos[v].append(i)
    return [tuple(pos[v]) for v in lg.graph.vertices]


@lru_cache(maxsize=200_000)
def _canonical(lg: LabelledGraph) -> tuple[tuple, dict[int, int]]:
    g = lg.graph
    idx = {v: i for i, v in enumerate(g.vertices)}
    dense = Graph(range(g.n), [(idx[a], idx[b]) for a, b in g.edges])
    res = canonical_search(Structure.from_graph(dense, _label_colors(lg)))
    return res.certificate, {v: res.labeling[idx[v]] for v in g.vertices}


def labelled_key(lg: LabelledGraph) -> tuple:
    """Isomorphism invariant of a labelled graph (labels are respected positionally)."""
    return _canonical(lg)[0]


def canonical_term(term: Term) -> tuple[tuple, Term]:
    key, pos = _canonical(term.graph)
    g = term.graph.graph
    graph = Graph(range(g.n), [(pos[a], pos[b]) for a, b in g.edges])
    lg = LabelledGraph(graph, tuple(pos[x] for x in term.graph.labels))
    d = term.dec.decomposition
    dec = TwkDecomposition(
        make_decomposition([frozenset(pos[x] for x in d.bags[t]) for t in d.tree.vertices],
                           [(d.tree.vertices.index(a), d.tree.vertices.index(b)) for a, b in d.tree.edges]),
        d.tree.vertices.index(term.dec.root), term.dec.k)
    return key, Term(lg, dec)


class GraphCombination:
    """A finite sum ``sum alpha_i F_i`` with ``alpha_i`` in F_p, kept merged over isomorphic terms."""

    def __init__(self, p: int, k: int, terms: Iterable[tuple[int, Term]] = (),
                 cap: int = DEFAULT_TERM_CAP):
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
        self.p = p
        self.k = k
        self.cap = cap
        self._terms: dict[tuple, list] = {}
        for coef, term in terms:
            self._add_term(coef, term)

    @property
    def arity(self) -> int:
        return self.k + 1

    def _add_term(self, coef: int, term: Term, canonical: tuple | None = None) -> None:
        coef %= self.p
        if not coef:
            return
        if term.graph.arity != self.arity:
            raise ValueError(f"term arity {term.graph.arity} differs from {self.arity}")
        key, term = canonical if canonical is not None else canonical_term(term)
        slot = self._terms.get(key)
        if slot is None:
            self._terms[key] = [coef, term]
            if len(self._terms) > self.cap:
                raise CombinationTooLarge(f"combination exceeds {self.cap} terms")
        else:
            slot[0] = (slot[0] + coef) % self.p
            if not slot[0]:
                del self._terms[key]

    def terms(self) -> list[tuple[int, Term]]:
        return [(c, t) for _, (c, t) in sorted(self._terms.items(), key=lambda kv: kv[0])]

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GraphCombination):
            return NotImplemented
        return (self.p, self.k) == (other.p, other.k) and \
            {k: v[0] for k, v in self._terms.items()} == {k: v[0] for k, v in other._terms.items()}

    def copy(self) -> "GraphCombination":
        out = GraphCombination(self.p, self.k, cap=self.cap)
        out._terms = {k: [c, t] for k, (c, t) in self._terms.items()}
        return out

    def __add__(self, other: "GraphCombination") -> "GraphCombination":
        _compatible(self, other)
        out = self.copy()
        for key, (c, t) in other._terms.items():
            out._add_term(c, t, (key, t))
        return out

    def scale(self, a: int) -> "GraphCombination":
        out = GraphCombination(self.p, self.k, cap=self.cap)
        for key, (c, t) in self._terms.items():
            out._add_term(c * a, t, (key, t))
        return out

    def __sub__(self, other: "GraphCombination") -> "GraphCombination":
        return self + other.scale(-1)

    def glue(self, other: "GraphCombination") -> "GraphCombination":
        """The gluing product, extended bilinearly."""
        _compatible(self, other)
        out = GraphCombination(self.p, self.k, cap=self.cap)
        for c1, t1 in self.terms():
            for c2, t2 in other.terms():
                glued = glue_terms(t1, t2)
                if glued is not None:
                    out._add_term(c1 * c2, glued)
        return out

    def to_dict(self) -> dict:
        return {"p": self.p, "k": self.k, "terms": [
            {"coef": c, "n": t.graph.graph.n, "edges": [list(e) for e in sorted(t.graph.graph.edges)],
             "labels": list(t.graph.labels)} for c, t in self.terms()]}


def _compatible(a: GraphCombination, b: GraphCombination) -> None:
    if (a.p, a.k) != (b.p, b.k):
        raise ValueError("combinations over different primes or arities")


# ---------------------------------------------------------------------------
# basic terms


def _single_bag_term(graph: Graph, labels: tuple[int, ...], k: int) -> Term:
    lg = LabelledGraph(graph, labels)
    dec = TwkDecomposition(make_decomposition([frozenset(graph.vertices)], []), 0, k)
    validate_twk(lg, dec, strict=False)
    return Term(lg, dec)


def unit_term(k: int) -> Term:
    return _single_bag_term(Graph.empty(k + 1), tuple(range(k + 1)), k)


def equality_term(i: int, j: int, k: int) -> Term:
    """``I^{ij}`` for 1-based ``i < j``: label ``j`` sits on the vertex of label ``i``."""
    vs = [v for v in range(k + 1) if v != j - 1]
    labels = tuple(i - 1 if t == j - 1 else t for t in range(k + 1))
    return _single_bag_term(Graph(vs), labels, k)


def edge_term(i: int, j: int, k: int) -> Term:
    return _single_bag_term(Graph(range(k + 1), [(i - 1, j - 1)]), tuple(range(k + 1)), k)


def unit(p: int, k: int) -> GraphCombination:
    return GraphCombination(p, k, [(1, unit_term(k))])


def zero(p: int, k: int) -> GraphCombination:
    return GraphCombination(p, k)


def glue_terms(a: Term, b: Term) -> Term | None:
    """Glue two terms and join their decompositions at the (identified) root bags.

    ``None`` when the identification creates a loop: such a graph has no
    homomorphism into any loop-free graph.
    """
    _, fmap, kmap = glue_vertex_maps(a.graph, b.graph)
    if any(fmap[u] == fmap[v] for u, v in a.graph.graph.edges) or \
            any(kmap[u] == kmap[v] for u, v in b.graph.graph.edges):
        return None
    lg, fmap, kmap = glue_with_maps(a.graph, b.graph)
    da, db = a.dec.decomposition, b.dec.decomposition
    a_nodes = list(da.tree.vertices)
    b_nodes = [t for t in db.tree.vertices if t != b.dec.root]
    a_idx = {t: i for i, t in enumerate(a_nodes)}
    b_idx = {t: len(a_nodes) + i for i, t in enumerate(b_nodes)}
    b_idx[b.dec.root] = a_idx[a.dec.root]
    bags = [frozenset(fmap[x] for x in da.bags[t]) for t in a_nodes]
    bags += [frozenset(kmap[x] for x in db.bags[t]) for t in b_nodes]
    edges = [(a_idx[s], a_idx[t]) for s, t in da.tree.edges]
    edges += [(b_idx[s], b_idx[t]) for s, t in db.tree.edges]
    dec = TwkDecomposition(make_decomposition(bags, edges), a_idx[a.dec.root], a.dec.k)
    validate_twk(lg, dec, strict=False)
    return Term(lg, dec)


def extend_term(term: Term, ell: int) -> Term:
    """Add a fresh vertex carrying label ``ell`` (1-based); the old label-``ell``
    vertex keeps its edges but loses that label."""
    f = term.graph
    k = term.dec.k
    x = max(f.graph.vertices, default=-1) + 1
    graph = Graph(list(f.graph.vertices) + [x], f.graph.edges)
    w = tuple(x if i == ell - 1 else v for i, v in enumerate(f.labels))
    lg = LabelledGraph(graph, w)
    d = term.dec.decomposition
    wset = frozenset(w)
    if d.tree.n >= 2:
        nodes = list(d.tree.vertices)
        idx = {t: i for i, t in enumerate(nodes)}
        bags = [d.bags[t] for t in nodes] + [wset]
        edges = [(idx[a], idx[b]) for a, b in d.tree.edges] + [(idx[term.dec.root], len(nodes))]
        dec = TwkDecomposition(make_decomposition(bags, edges), len(nodes), k)
    elif frozenset(graph.vertices) == wset:
        dec = TwkDecomposition(make_decomposition([wset], []), 0, k)
    else:
        old = d.bags[d.tree.vertices[0]]
        dec = TwkDecomposition(make_decomposition([wset, old], [(0, 1)]), 0, k)
    validate_twk(lg, dec, strict=False)
    return Term(lg, dec)


# ---------------------------------------------------------------------------
# evaluation


def eval_combination(q: GraphCombination, g: LabelledGraph) -> int:
    """``sum alpha_i hom(F_i, g)`` in F_p."""
    if g.arity != q.arity:
        raise ValueError(f"arity mismatch: {g.arity} vs {q.arity}")
    return sum(c * hom_count_labelled(t.graph, g) for c, t in q.terms()) % q.p


def eval_table(q: GraphCombination, g: Graph) -> dict[tuple[int, ...], int]:
    """Values of ``q`` on ``(g, w)`` for every ``w`` in ``V(g)^(k+1)``; zeros are omitted."""
    out: dict[tuple[int, ...], int] = {}
    for c, t in q.terms():
        for w, cnt in hom_counts_by_labels(t.graph, g).items():
            out[w] = (out.get(w, 0) + c * cnt) % q.p
    return {w: v for w, v in out.items() if v}


# ---------------------------------------------------------------------------
# interpolation


def _poly_mul(a: list[int], b: list[int], p: int) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] = (out[i + j] + x * y) % p
    return out


def lagrange_coefficients(x1: Iterable[int], p: int) -> list[int]:
    """Coefficients (constant first) of the polynomial that is 1 on ``x1`` and 0 elsewhere on F_p."""
    total = [0]
    for x in sorted({v % p for v in x1}):
        poly = [1]
        for y in range(p):
            if y == x:
                continue
            inv = pow((x - y) % p, -1, p)
            poly = _poly_mul(poly, [(-y * inv) % p, inv], p)
        total = [(a + b) % p for a, b in itertools.zip_longest(total, poly, fillvalue=0)]
    while len(total) > 1 and total[-1] == 0:
        total.pop()
    return total


def interpolate(q: GraphCombination, x1: Iterable[int]) -> GraphCombination:
    """``L(q)`` in the gluing algebra, where ``L`` is 1 on ``x1`` and 0 elsewhere."""
    coeffs = lagrange_coefficients(x1, q.p)
    out = zero(q.p, q.k)
    power = unit(q.p, q.k)
    for j, a in enumerate(coeffs):
        if j:
            power = power.glue(q)
        if a:
            out = out + power.scale(a)
    return out


# ---------------------------------------------------------------------------
# formula -> combination


def formula_to_combination(phi: Formula, p: int, k: int, cap: int = DEFAULT_TERM_CAP) -> GraphCombination:
    """A combination that evaluates to 1 on labelled graphs satisfying ``phi`` and 0 otherwise."""
    used = variables(phi)
    if used and (min(used) < 1 or max(used) > k + 1):
        raise FormulaError(f"variables {sorted(used)} exceed x1..x{k + 1}")
    memo: dict[int, GraphCombination] = {}

    def rec(x) -> GraphCombination:
        hit = memo.get(id(x))
        if hit is not None:
            return hit[1]
        if isinstance(x, Top):
            out = GraphCombination(p, k, [(1, unit_term(k))], cap)
        elif isinstance(x, Eq):
            if x.i == x.j:
                out = GraphCombination(p, k, [(1, unit_term(k))], cap)
            else:
                i, j = sorted((x.i, x.j))
                out = GraphCombination(p, k, [(1, equality_term(i, j, k))], cap)
        elif isinstance(x, Edge):
            if x.i == x.j:
                out = GraphCombination(p, k, cap=cap)
            else:
                out = GraphCombination(p, k, [(1, edge_term(x.i, x.j, k))], cap)
        elif isinstance(x, Not):
            out = GraphCombination(p, k, [(1, unit_term(k))], cap) - rec(x.body)
        elif isinstance(x, And):
            out = rec(x.left).glue(rec(x.right))
        elif isinstance(x, Or):
            a, b = rec(x.left), rec(x.right)
            out = a + b - a.glue(b)
        elif isinstance(x, ModExists):
            t = rec(x.body)
            q = GraphCombination(p, k, [(c, extend_term(term, x.var)) for c, term in t.terms()], cap)
            out = interpolate(q, {x.c})
        else:
            raise TypeError(type(x).__name__)
        memo[id(x)] = (x, out)
        return out

    return rec(phi)


# ---------------------------------------------------------------------------
# graph -> formula


def graph_to_formula(f: LabelledGraph, dec: TwkDecomposition, m: int, p: int) -> Formula:
    """A formula in ``x_1..x_{k+1}`` true exactly when ``hom(f, G) = m (mod p)``."""
    validate_twk(f, dec, strict=True)
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    d = dec.decomposition
    adj = {t: set(d.tree.neighbors(t)) for t in d.tree.vertices}
    memo: dict = {}

    def subtree(root, banned):
        seen = {root}
        stack = [root]
        while stack:
            t = stack.pop()
            for s in adj[t]:
                if s not in seen and s != banned:
                    seen.add(s)
                    stack.append(s)
        return frozenset(seen)

    def rec(labels: tuple[int, ...], root, nodes: frozenset, m: int) -> Formula:
        m %= p
        key = (labels, root, nodes, m)
        if key in memo:
            return memo[key]
        if len(nodes) == 1:
            out = _single_bag_formula(f.graph, labels, m)
        else:
            nbrs = sorted(s for s in adj[root] if s in nodes)
            if len(nbrs) == 1:
                s = nbrs[0]
                rest = subtree(s, root) & nodes
                out_v = d.bags[root] - d.bags[s]
                in_v = d.bags[s] - d.bags[root]
                (z,), (y,) = tuple(out_v), tuple(in_v)
                ell = labels.index(z) + 1
                v = tuple(y if i == ell - 1 else u for i, u in enumerate(labels))
                parts = []
                for m1 in range(p):
                    for m2 in range(p):
                        if (m1 * m2 - m) % p:
                            continue
                        psi = rec(labels, root, frozenset([root]), m1)
                        inner = []
                        for cs in itertools.product(range(p), repeat=p):
                            if sum(i * c for i, c in zip(range(1, p + 1), cs)) % p != m2:
                                continue
                            inner.append(conj(ModExists(c, ell, rec(v, s, rest, i))
                                              for i, c in zip(range(1, p + 1), cs)))
                        parts.append(And(psi, disj(inner)))
                out = disj(parts)
            else:
                pieces = [frozenset({root}) | (subtree(s, root) & nodes) for s in nbrs]
                parts = []
                for ms in itertools.product(range(p), repeat=len(pieces)):
                    prod = 1
                    for x in ms:
                        prod = prod * x % p
                    if prod != m:
                        continue
                    parts.append(conj(rec(labels, root, piece, mi) for piece, mi in zip(pieces, ms)))
                out = disj(parts)
        memo[key] = out
        return out

    return rec(f.labels, dec.root, frozenset(d.tree.vertices), m)


def _single_bag_formula(g: Graph, labels: tuple[int, ...], m: int) -> Formula:
    if m not in (0, 1):
        return FALSE
    n = len(labels)
    atoms: list[Formula] = []
    for i in range(n):
        for j in range(i + 1, n):
            if labels[i] == labels[j]:
                atoms.append(Eq(i + 1, j + 1))
            if g.has_edge(labels[i], labels[j]):
                atoms.append(Edge(i + 1, j + 1))
    phi1 = conj(atoms)
    return phi1 if m == 1 else Not(phi1)


def sentence_for_graph(f: Graph, m: int, p: int, k: int) -> Formula:
    """A sentence with at most ``k+1`` variables true exactly when ``hom(f, G) = m (mod p)``."""
    chosen = choose_labels(f, k)
    if chosen is None:
        raise ValueError(f"graph has treewidth above {k}")
    lf, dec = chosen
    level = {i: graph_to_formula(lf, dec, i, p) for i in range(p)}
    for ell in range(k, -1, -1):
        nxt = {}
        for target in range(p):
            parts = []
            for cs in itertools.product(range(p), repeat=p):
                if sum(i * c for i, c in zip(range(1, p + 1), cs)) % p != target:
                    continue
                parts.append(conj(ModExists(c, ell + 1, level[i % p]) for i, c in zip(range(1, p + 1), cs)))
            nxt[target] = disj(parts)
        level = nxt
    return level[m % p]


@dataclass
class ProbeResult:
    formula: Formula | None
    witness: Graph | None
    verified: bool


def sentence_equivalence_probe(g: Graph, h: Graph, p: int, k: int, max_size: int = 5) -> ProbeResult:
    """Search treewidth-``k`` graphs up to ``max_size`` vertices for a mod-``p`` hom-count
    difference and turn the first one found into a separating sentence."""
    f = find_distinguisher(g, h, "treewidth", max_size, modulus=p, k=k)
    if f is None:
        return ProbeResult(None, None, False)
    m = hom_count_brute(f, g, p)
    phi = sentence_for_graph(f, m, p, k)
    ok = model_check(phi, g, {}, p) and not model_check(phi, h, {}, p)
    if not ok:
        raise AssertionError("constructed sentence does not separate the graphs")
    return ProbeResult(phi, f, True)
