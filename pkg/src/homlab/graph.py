"""Finite simple graphs, labelled and ordered graphs, products and serialization."""

from __future__ import annotations

import json
import math
import re
import warnings
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import networkx as nx


class GraphFormatError(ValueError):
    """Malformed graph input; ``lineno`` is 1-based when known."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


def _edge_key(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


class Graph:
    """Immutable simple undirected graph on nonnegative integer vertex ids.

    Edges are stored as sorted pairs ``(u, v)`` with ``u < v``.
    """

    __slots__ = ("vertices", "edges", "_adj", "_hash")

    def __init__(self, vertices: Iterable[int], edges: Iterable[Sequence[int]] = ()):
        vs = tuple(sorted(set(int(v) for v in vertices)))
        if vs and vs[0] < 0:
            raise ValueError("vertex ids must be nonnegative")
        vset = set(vs)
        es = set()
        for e in edges:
            u, v = int(e[0]), int(e[1])
            if u == v:
                raise ValueError(f"self-loop at vertex {u} is not allowed")
            if u not in vset or v not in vset:
                raise ValueError(f"edge {u}-{v} uses an undeclared vertex")
            es.add(_edge_key(u, v))
        adj: dict[int, set[int]] = {v: set() for v in vs}
        for u, v in es:
            adj[u].add(v)
            adj[v].add(u)
        self.vertices = vs
        self.edges = frozenset(es)
        self._adj = {v: frozenset(nb) for v, nb in adj.items()}
        self._hash = None

    # -- constructors -------------------------------------------------
    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]] = ()) -> "Graph":
        return cls(range(n), edges)

    @classmethod
    def complete(cls, n: int) -> "Graph":
        return cls(range(n), [(i, j) for i in range(n) for j in range(i + 1, n)])

    @classmethod
    def empty(cls, n: int) -> "Graph":
        """Edgeless graph (coclique) on ``n`` vertices."""
        return cls(range(n))

    @classmethod
    def path(cls, n: int) -> "Graph":
        """Path on ``n`` vertices."""
        return cls(range(n), [(i, i + 1) for i in range(n - 1)])

    @classmethod
    def cycle(cls, n: int) -> "Graph":
        if n < 3:
            raise ValueError("a cycle needs at least 3 vertices")
        return cls(range(n), [(i, (i + 1) % n) for i in range(n)])

    @classmethod
    def star(cls, leaves: int) -> "Graph":
        """Star K_{1,leaves} with center 0."""
        return cls(range(leaves + 1), [(0, i) for i in range(1, leaves + 1)])

    @classmethod
    def grid(cls, rows: int, cols: int) -> "Graph":
        """Grid with vertex ``r * cols + c`` at row ``r``, column ``c``."""
        edges = []
        for r in range(rows):
            for c in range(cols):
                v = r * cols + c
                if c + 1 < cols:
                    edges.append((v, v + 1))
                if r + 1 < rows:
                    edges.append((v, v + cols))
        return cls(range(rows * cols), edges)

    @classmethod
    def from_networkx(cls, g: nx.Graph) -> "Graph":
        return cls(g.nodes, g.edges)

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(self.vertices)
        g.add_edges_from(self.edges)
        return g

    # -- queries ------------------------------------------------------
    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def m(self) -> int:
        return len(self.edges)

    def neighbors(self, v: int) -> frozenset[int]:
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj.get(u, ())

    def is_dense(self) -> bool:
        return self.vertices == tuple(range(len(self.vertices)))

    def incident_edges(self, v: int) -> tuple[tuple[int, int], ...]:
        """Sorted canonical keys of the edges at ``v``."""
        return tuple(sorted(_edge_key(v, w) for w in self._adj[v]))

    def is_connected(self) -> bool:
        if not self.vertices:
            return True
        seen = {self.vertices[0]}
        queue = deque(seen)
        while queue:
            v = queue.popleft()
            for w in self._adj[v]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        return len(seen) == len(self.vertices)

    def components(self) -> list[tuple[int, ...]]:
        seen: set[int] = set()
        comps = []
        for s in self.vertices:
            if s in seen:
                continue
            comp = [s]
            seen.add(s)
            queue = deque([s])
            while queue:
                v = queue.popleft()
                for w in self._adj[v]:
                    if w not in seen:
                        seen.add(w)
                        comp.append(w)
                        queue.append(w)
            comps.append(tuple(sorted(comp)))
        return comps

    def distances_from(self, s: int) -> dict[int, int]:
        dist = {s: 0}
        queue = deque([s])
        while queue:
            v = queue.popleft()
            for w in self._adj[v]:
                if w not in dist:
                    dist[w] = dist[v] + 1
                    queue.append(w)
        return dist

    # -- derived graphs -------------------------------------------------
    def induced_subgraph(self, vs: Iterable[int]) -> "Graph":
        keep = set(vs)
        return Graph(keep, [e for e in self.edges if e[0] in keep and e[1] in keep])

    def remove_vertices(self, vs: Iterable[int]) -> "Graph":
        drop = set(vs)
        return self.induced_subgraph(v for v in self.vertices if v not in drop)

    def relabel(self, mapping: Mapping[int, int]) -> "Graph":
        return Graph((mapping[v] for v in self.vertices),
                     ((mapping[u], mapping[v]) for u, v in self.edges))

    def dense(self) -> tuple["Graph", dict[int, int]]:
        """Relabel to ids ``0..n-1`` in sorted order; returns the graph and the id map."""
        mapping = {v: i for i, v in enumerate(self.vertices)}
        return self.relabel(mapping), mapping

    def add_edges(self, edges: Iterable[Sequence[int]]) -> "Graph":
        return Graph(self.vertices, list(self.edges) + list(edges))

    def complement(self) -> "Graph":
        vs = self.vertices
        return Graph(vs, [(u, v) for i, u in enumerate(vs) for v in vs[i + 1:]
                          if (u, v) not in self.edges])

    # -- dunder -------------------------------------------------------
    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.vertices == other.vertices and self.edges == other.edges

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.vertices, self.edges))
        return self._hash

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, edges={sorted(self.edges)})"


@dataclass(frozen=True)
class LabelledGraph:
    """A graph with a tuple of labelled vertices (repetitions allowed)."""

    graph: Graph
    labels: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        vs = set(self.graph.vertices)
        for x in self.labels:
            if x not in vs:
                raise ValueError(f"label {x} is not a vertex")

    @property
    def arity(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class OrderedGraph:
    graph: Graph
    order: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "order", tuple(self.order))
        if sorted(self.order) != list(self.graph.vertices):
            raise ValueError("order must be a permutation of the vertex ids")

    @classmethod
    def by_id(cls, g: Graph) -> "OrderedGraph":
        return cls(g, g.vertices)

    def rank(self) -> dict[int, int]:
        return {v: i for i, v in enumerate(self.order)}


# ---------------------------------------------------------------------------
# products


def categorical_product(g: Graph, h: Graph) -> Graph:
    """Tensor product; vertex ``(a, x)`` gets id ``index(a) * |V(h)| + index(x)``."""
    gi = {v: i for i, v in enumerate(g.vertices)}
    hi = {v: i for i, v in enumerate(h.vertices)}
    nh = len(h.vertices)
    edges = []
    for a, b in g.edges:
        for x, y in h.edges:
            edges.append((gi[a] * nh + hi[x], gi[b] * nh + hi[y]))
            edges.append((gi[a] * nh + hi[y], gi[b] * nh + hi[x]))
    return Graph(range(len(g.vertices) * nh), edges)


def categorical_power(g: Graph, k: int) -> Graph:
    if k < 1:
        raise ValueError("power must be at least 1")
    out = g
    for _ in range(k - 1):
        out = categorical_product(out, g)
    return out


def glue(f: LabelledGraph, k: LabelledGraph) -> LabelledGraph:
    """Gluing product: disjoint union with the i-th labels identified.

    Ids are renumbered densely: vertices of ``f`` in sorted order first, then
    the remaining vertices of ``k``.
    """
    return glue_with_maps(f, k)[0]


def glue_vertex_maps(f: LabelledGraph, k: LabelledGraph) -> tuple[int, dict[int, int], dict[int, int]]:
    """Vertex count of the gluing product and the maps from ``f`` and ``k`` into it."""
    if f.arity != k.arity:
        raise ValueError("gluing needs equal label arity")
    fv = f.graph.vertices
    kv = k.graph.vertices
    nodes = [("f", v) for v in fv] + [("k", v) for v in kv]
    parent = {x: x for x in nodes}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in zip(f.labels, k.labels):
        ra, rb = find(("f", a)), find(("k", b))
        if ra != rb:
            parent[rb] = ra
    ids: dict = {}
    for x in nodes:
        r = find(x)
        if r not in ids:
            ids[r] = len(ids)
    fmap = {v: ids[find(("f", v))] for v in fv}
    kmap = {v: ids[find(("k", v))] for v in kv}
    return len(ids), fmap, kmap


def glue_with_maps(f: LabelledGraph, k: LabelledGraph) -> tuple[LabelledGraph, dict[int, int], dict[int, int]]:
    """:func:`glue` plus the vertex maps from ``f`` and from ``k`` into the result."""
    n, fmap, kmap = glue_vertex_maps(f, k)
    edges = [(fmap[u], fmap[v]) for u, v in f.graph.edges]
    edges += [(kmap[u], kmap[v]) for u, v in k.graph.edges]
    g = Graph(range(n), edges)
    return LabelledGraph(g, tuple(fmap[a] for a in f.labels)), fmap, kmap


def disjoint_union(g: Graph, h: Graph) -> tuple[Graph, dict[int, int], dict[int, int]]:
    gm = {v: i for i, v in enumerate(g.vertices)}
    hm = {v: len(gm) + i for i, v in enumerate(h.vertices)}
    edges = [(gm[u], gm[v]) for u, v in g.edges] + [(hm[u], hm[v]) for u, v in h.edges]
    return Graph(range(len(gm) + len(hm)), edges), gm, hm


# ---------------------------------------------------------------------------
# structural statistics


@dataclass(frozen=True)
class StructuralStats:
    min_degree: int | None
    girth: float
    is_planar: bool
    vertex_connectivity: int


def girth(g: Graph) -> float:
    """Length of a shortest cycle, ``math.inf`` for forests."""
    best = math.inf
    for s in g.vertices:
        dist = {s: 0}
        parent = {s: None}
        queue = deque([s])
        while queue:
            v = queue.popleft()
            if 2 * dist[v] + 1 >= best:
                break
            for w in g.neighbors(v):
                if w not in dist:
                    dist[w] = dist[v] + 1
                    parent[w] = v
                    queue.append(w)
                elif parent[v] != w:
                    best = min(best, dist[v] + dist[w] + 1)
    return best


def is_planar(g: Graph) -> bool:
    planar, _ = nx.check_planarity(g.to_networkx())
    return planar


def vertex_connectivity(g: Graph) -> int:
    if g.n <= 1:
        return 0
    return nx.node_connectivity(g.to_networkx())


def structural_stats(g: Graph) -> StructuralStats:
    min_deg = min((g.degree(v) for v in g.vertices), default=None)
    return StructuralStats(min_deg, girth(g), is_planar(g), vertex_connectivity(g))


# ---------------------------------------------------------------------------
# named graphs

_NAMED = re.compile(r"^([kcpsg]|co)(\d+)(?:x(\d+))?$")


def named_graph(name: str) -> Graph:
    """Parse names like ``k4``, ``c6``, ``p3`` (path on 3 vertices), ``s3``
    (star with 3 leaves), ``co5`` (coclique), ``g2x3`` (grid)."""
    m = _NAMED.match(name.strip().lower())
    if not m:
        raise ValueError(f"unknown graph name {name!r}")
    kind, a, b = m.group(1), int(m.group(2)), m.group(3)
    if kind == "g":
        if b is None:
            raise ValueError("grid needs rows x cols, e.g. g2x3")
        return Graph.grid(a, int(b))
    return {"k": Graph.complete, "c": Graph.cycle, "p": Graph.path,
            "s": Graph.star, "co": Graph.empty}[kind](a)


# ---------------------------------------------------------------------------
# serialization


def format_edge_list(g: Graph) -> str:
    if not g.is_dense():
        raise ValueError("edge-list format needs dense vertex ids 0..n-1")
    lines = [str(g.n)] + [f"{u} {v}" for u, v in sorted(g.edges)]
    return "\n".join(lines) + "\n"


def parse_edge_list(text: str) -> Graph:
    n = None
    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if n is None:
            if len(parts) != 1:
                raise GraphFormatError("first line must be the vertex count", lineno)
            try:
                n = int(parts[0])
            except ValueError:
                raise GraphFormatError(f"bad vertex count {parts[0]!r}", lineno) from None
            if n < 0:
                raise GraphFormatError("negative vertex count", lineno)
            continue
        if len(parts) != 2:
            raise GraphFormatError(f"expected 'u v', got {line!r}", lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError(f"non-integer endpoint in {line!r}", lineno) from None
        if u == v:
            raise GraphFormatError(f"self-loop {u} {v} is not allowed", lineno)
        if not (0 <= u < n and 0 <= v < n):
            raise GraphFormatError(f"endpoint out of range 0..{n - 1}", lineno)
        key = _edge_key(u, v)
        if key in seen:
            warnings.warn(f"line {lineno}: duplicate edge {u} {v}", stacklevel=2)
        seen.add(key)
        edges.append(key)
    if n is None:
        raise GraphFormatError("empty input")
    return Graph(range(n), edges)


def graph_to_dict(g: Graph | LabelledGraph | OrderedGraph) -> dict:
    labels = order = None
    if isinstance(g, LabelledGraph):
        g, labels = g.graph, g.labels
    elif isinstance(g, OrderedGraph):
        g, order = g.graph, g.order
    d: dict = {"n": g.n, "edges": [list(e) for e in sorted(g.edges)]}
    if not g.is_dense():
        d["vertices"] = list(g.vertices)
    if labels is not None:
        d["labels"] = list(labels)
    if order is not None:
        d["order"] = list(order)
    return d


def graph_from_dict(d: Mapping) -> Graph | LabelledGraph | OrderedGraph:
    """Inverse of :func:`graph_to_dict`; the result type follows the keys present."""
    try:
        vertices = d["vertices"] if "vertices" in d else range(int(d["n"]))
        g = Graph(vertices, [tuple(e) for e in d.get("edges", [])])
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphFormatError(f"bad graph JSON: {exc}") from None
    if d.get("labels") is not None:
        return LabelledGraph(g, tuple(d["labels"]))
    if d.get("order") is not None:
        return OrderedGraph(g, tuple(d["order"]))
    return g


def write_graph(g, fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(graph_to_dict(g), sort_keys=True)
    if fmt == "edges":
        return format_edge_list(g)
    raise ValueError(f"unknown format {fmt!r}")


def read_graph(text: str, fmt: str | None = None):
    """Read edge-list text or JSON; ``fmt=None`` sniffs a leading ``{``."""
    if fmt is None:
        fmt = "json" if text.lstrip().startswith("{") else "edges"
    if fmt == "json":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise GraphFormatError(exc.msg, exc.lineno) from None
        return graph_from_dict(d)
    if fmt == "edges":
        return parse_edge_list(text)
    raise ValueError(f"unknown format {fmt!r}")


def as_graph(g) -> Graph:
    if isinstance(g, (LabelledGraph, OrderedGraph)):
        return g.graph
    return g
