"""Verification suite: each check recomputes a claim by independent routes and
reports one row per (check, instance)."""

from __future__ import annotations

import itertools
import math
import random
import time
from dataclasses import dataclass, field
from typing import Callable

from .cfi import build_cfi, build_nice_planar, check_nice
from .combination import eval_table, formula_to_combination, graph_to_formula
from .enumeration import connected_graphs, graphs_up_to_iso
from .equiv import faben_jerrum_reduce, find_order_p_automorphism, is_isomorphic, tuple_orbits
from .graph import Graph, LabelledGraph, categorical_power, is_planar
from .groups import FiniteAbelianGroup
from .homcount import (cfi_system, find_distinguisher, hom_count_brute, hom_count_labelled,
                       hom_count_tw, hom_psi_counts, hom_psi_counts_brute, iter_homs)
from .imgame import (GamePosition, check_similarity, find_move, identity_move, solve_game_tiny,
                     validate_move)
from .linalg import fp_inverse, fp_solve, matmul
from .logic import model_check, random_formula, to_text
from .treedec import cap_override, exact_tree_decomposition, labelled_decomposition


@dataclass
class Row:
    id: str
    instance: str
    expected: str
    actual: str
    status: str                    # "pass" or "fail"
    millis: int | None = None

    def to_dict(self) -> dict:
        return {"id": self.id, "instance": self.instance, "expected": self.expected,
                "actual": self.actual, "status": self.status, "millis": self.millis}


@dataclass
class Context:
    seed: int = 0
    timing: bool = False
    p: int | None = None
    k: int | None = None


@dataclass
class CriterionReport:
    number: int
    name: str
    rows: list[Row]
    seconds: float
    limit: float | None

    @property
    def passed(self) -> bool:
        in_time = self.limit is None or self.seconds <= self.limit
        return in_time and bool(self.rows) and all(r.status == "pass" for r in self.rows)


class _Rows:
    """Collects rows, timing each one when asked."""

    def __init__(self, cid: str, ctx: Context):
        self.cid = cid
        self.ctx = ctx
        self.rows: list[Row] = []
        self._t = time.perf_counter()

    def add(self, instance: str, expected, actual, ok: bool) -> None:
        now = time.perf_counter()
        millis = round((now - self._t) * 1000) if self.ctx.timing else None
        self._t = now
        self.rows.append(Row(self.cid, instance, str(expected), str(actual), "pass" if ok else "fail", millis))


def _z(*orders) -> FiniteAbelianGroup:
    return FiniteAbelianGroup(tuple(orders))


BASES = {"K3": Graph.complete(3), "K4": Graph.complete(4), "P3": Graph.path(3), "S3": Graph.star(3)}
GROUPS = {"Z2": _z(2), "Z3": _z(3), "Z4": _z(4), "Z2xZ2": _z(2, 2)}


def _random_u(rng, gamma, base, total=None):
    elems = list(gamma.elements())
    u = [rng.choice(elems) for _ in base.vertices]
    if total is not None:
        u[-1] = gamma.sub(total, gamma.sum(u[:-1]))
    return u


# ---------------------------------------------------------------------------
# 1


def check_lem_iso(ctx: Context) -> list[Row]:
    out = _Rows("lem-iso", ctx)
    rng = random.Random(ctx.seed)
    for (bname, base), (gname, gamma) in itertools.product(BASES.items(), GROUPS.items()):
        hits = 0
        for _ in range(20):
            u = _random_u(rng, gamma, base)
            u2 = _random_u(rng, gamma, base, gamma.sum(u))
            hits += is_isomorphic(build_cfi(gamma, base, u).graph, build_cfi(gamma, base, u2).graph) is not None
        out.add(f"{bname}/{gname}", "20/20 isomorphic", f"{hits}/20 isomorphic", hits == 20)
    return out.rows


# ---------------------------------------------------------------------------
# 2


def check_cor_equiv(ctx: Context) -> list[Row]:
    out = _Rows("cor-equiv", ctx)
    rng = random.Random(ctx.seed)
    for (bname, base), (gname, gamma) in itertools.product(BASES.items(), GROUPS.items()):
        c0 = build_cfi(gamma, base, None)
        hom0 = hom_count_brute(base, c0.graph)
        ident = tuple(base.vertices)
        psi0 = hom_psi_counts(base, c0)[ident]
        agree = balanced = 0
        for i in range(20):
            # half the samples are forced to have zero sum
            u = _random_u(rng, gamma, base, gamma.zero() if i % 2 == 0 else None)
            cu = build_cfi(gamma, base, u)
            items = (gamma.sum(u) == gamma.zero(),
                     is_isomorphic(cu.graph, c0.graph) is not None,
                     hom_count_brute(base, cu.graph) == hom0,
                     hom_psi_counts(base, cu)[ident] == psi0)
            agree += len(set(items)) == 1
            balanced += items[0]
        out.add(f"{bname}/{gname}", "20/20 agree", f"{agree}/20 agree ({balanced} zero-sum)", agree == 20)
    return out.rows


# ---------------------------------------------------------------------------
# 3 and 4


def _small_patterns(max_n: int) -> list[Graph]:
    return [g for n in range(1, max_n + 1) for g in graphs_up_to_iso(n)]


def check_hom_psi(ctx: Context) -> list[Row]:
    out = _Rows("hom-psi", ctx)
    pats = _small_patterns(5)
    base = Graph.complete(3)
    for gname in ("Z2", "Z3"):
        gamma = GROUPS[gname]
        for uname, u in (("U=0", None), ("U=e0", {0: 1})):
            cfi = build_cfi(gamma, base, u)
            good = sum(hom_psi_counts(f, cfi) == dict(hom_psi_counts_brute(f, cfi)) for f in pats)
            out.add(f"K3/{gname}/{uname}", f"{len(pats)}/{len(pats)} patterns agree",
                    f"{good}/{len(pats)} patterns agree", good == len(pats))
    return out.rows


def _solvable_over_field(rows, rhs, p: int) -> bool:
    return fp_solve(rows, [x[0] for x in rhs], p) is not None


def check_equations(ctx: Context) -> list[Row]:
    out = _Rows("equations", ctx)
    pats = _small_patterns(5)
    base = Graph.complete(3)
    for gname in ("Z2", "Z3"):
        gamma = GROUPS[gname]
        p = gamma.order
        c0 = build_cfi(gamma, base, None)
        zero_counts = {f: hom_psi_counts_brute(f, c0) for f in pats}
        positive = all(v > 0 for counts in zero_counts.values() for v in counts.values())
        out.add(f"K3/{gname}/U=0", "every per-psi count positive", positive, positive)
        for u in gamma.vectors(base.n):
            if all(x == gamma.zero() for x in u):
                continue
            cu = build_cfi(gamma, base, list(u))
            bad = 0
            for f in pats:
                counts = hom_psi_counts_brute(f, cu)
                for psi in iter_homs(f, base):
                    key = tuple(psi[v] for v in f.vertices)
                    rows, rhs, _ = cfi_system(f, cu, psi)
                    want = zero_counts[f][key] if _solvable_over_field(rows, rhs, p) else 0
                    bad += counts[key] != want
            label = ",".join(str(x[0]) for x in u)
            out.add(f"K3/{gname}/U=({label})", "0 mismatches", f"{bad} mismatches", bad == 0)
    return out.rows


# ---------------------------------------------------------------------------
# 5 and 6


def check_coclique(ctx: Context) -> list[Row]:
    out = _Rows("coclique", ctx)
    pats = list(connected_graphs(6))
    k1 = Graph.complete(1)
    for n in (2, 3, 4):
        co = Graph.empty(n + 1)
        bad = sum(hom_count_brute(f, k1, n) != hom_count_brute(f, co, n) for f in pats)
        out.add(f"K1 vs coclique{n + 1} mod {n}", "0 differences", f"{bad} differences", bad == 0)
    return out.rows


def totient(n: int) -> int:
    return sum(1 for a in range(1, n + 1) if math.gcd(a, n) == 1)


def max_prime_multiplicity(n: int) -> int:
    best, d = 0, 2
    while n > 1:
        e = 0
        while n % d == 0:
            n //= d
            e += 1
        best = max(best, e)
        d += 1
    return best


def check_power(ctx: Context) -> list[Row]:
    out = _Rows("power", ctx)
    pats = _small_patterns(4)
    cap = cap_override(81)
    for (gname, g), n in itertools.product((("K2", Graph.complete(2)), ("P3", Graph.path(3)),
                                            ("K3", Graph.complete(3))), (2, 3, 4)):
        ell = max_prime_multiplicity(n)
        big = totient(n) + ell
        inst = f"{gname}^{big} vs {gname}^{ell} mod {n}"
        if g.n ** big > cap:
            out.add(inst, f"at most {cap} vertices", f"{g.n ** big} vertices", False)
            continue
        gb, gl = categorical_power(g, big), categorical_power(g, ell)
        bad = sum(hom_count_brute(f, gb, n) != hom_count_brute(f, gl, n) for f in pats)
        out.add(inst, "0 differences", f"{bad} differences", bad == 0)
    return out.rows


# ---------------------------------------------------------------------------
# 7


def random_graph(rng, max_n: int) -> Graph:
    n = rng.randint(1, max_n)
    prob = rng.choice((0.2, 0.35, 0.5, 0.65, 0.8))
    return Graph(range(n), [e for e in itertools.combinations(range(n), 2) if rng.random() < prob])


def check_faben_jerrum(ctx: Context) -> list[Row]:
    out = _Rows("faben-jerrum", ctx)
    rng = random.Random(ctx.seed)
    pats = _small_patterns(5)
    for i in range(50):
        g = random_graph(rng, 8)
        for p in (2, 3):
            red = faben_jerrum_reduce(g, p, ctx.seed)
            no_aut = find_order_p_automorphism(red, p, ctx.seed) is None
            bad = sum(hom_count_brute(f, g, p) != hom_count_brute(f, red, p) for f in pats)
            out.add(f"graph{i} n={g.n} m={g.m} p={p}", "reduced: no order-p automorphism, 0 differences",
                    f"reduced to n={red.n}: {'no' if no_aut else 'has'} order-p automorphism, {bad} differences",
                    no_aut and bad == 0)
    return out.rows


# ---------------------------------------------------------------------------
# 8


def round_trip_a(p: int, k: int, max_n: int = 4) -> tuple[int, int, str]:
    """Formula built from each labelled ``TW^k`` graph holds exactly where the hom count is ``m`` mod ``p``."""
    targets = [g for n in range(1, max_n + 1) for g in graphs_up_to_iso(n)]
    checks = bad = 0
    first = ""
    for f in targets:
        for labs in itertools.product(f.vertices, repeat=k + 1):
            lf = LabelledGraph(f, labs)
            dec = labelled_decomposition(lf, k)
            if dec is None:
                continue
            for m in range(p):
                phi = graph_to_formula(lf, dec, m, p)
                for g in targets:
                    for w in itertools.product(g.vertices, repeat=k + 1):
                        sat = model_check(phi, g, dict(enumerate(w, 1)), p)
                        want = hom_count_labelled(lf, LabelledGraph(g, w)) % p == m
                        checks += 1
                        if sat != want:
                            bad += 1
                            first = first or f"F={sorted(f.edges)} labels={labs} m={m} G={sorted(g.edges)} w={w}"
    return checks, bad, first


def round_trip_b(primes, ks, count: int, seed: int, max_n: int = 4, depth: int = 3) -> tuple[int, int, str]:
    """Combination built from each random formula evaluates to its truth value everywhere."""
    rng = random.Random(seed)
    targets = [g for n in range(1, max_n + 1) for g in graphs_up_to_iso(n)]
    bad = 0
    first = ""
    for _ in range(count):
        p = rng.choice(primes)
        k = rng.choice(ks)
        phi = random_formula(rng, depth, k + 1, p)
        q = formula_to_combination(phi, p, k)
        ok = True
        for g in targets:
            table = eval_table(q, g)
            for w in itertools.product(g.vertices, repeat=k + 1):
                if table.get(w, 0) != int(model_check(phi, g, dict(enumerate(w, 1)), p)):
                    ok = False
                    break
            if not ok:
                break
        if not ok:
            bad += 1
            first = first or f"p={p} k={k} {to_text(phi)}"
    return count, bad, first


def check_dvorak(ctx: Context) -> list[Row]:
    out = _Rows("dvorak", ctx)
    pa = ctx.p or 2
    ka = ctx.k or 1
    checks, bad, first = round_trip_a(pa, ka)
    out.add(f"round trip A p={pa} k={ka}", f"{checks}/{checks} agree",
            f"{checks - bad}/{checks} agree" + (f" first failure {first}" if bad else ""), bad == 0)
    primes = (ctx.p,) if ctx.p else (2, 3)
    ks = tuple(range(1, (ctx.k or 2) + 1))
    count, bad, first = round_trip_b(primes, ks, 200, ctx.seed)
    out.add(f"round trip B p in {list(primes)} k in {list(ks)}", f"{count}/{count} formulas agree",
            f"{count - bad}/{count} formulas agree" + (f" first failure {first}" if bad else ""), bad == 0)
    return out.rows


# ---------------------------------------------------------------------------
# 9


def check_tw_dp(ctx: Context) -> list[Row]:
    out = _Rows("tw-dp", ctx)
    pats = [(f, exact_tree_decomposition(f, 2)) for f in connected_graphs(8, "tw", 2)]
    for gname, g in (("K3", Graph.complete(3)), ("K4", Graph.complete(4)), ("C5", Graph.cycle(5))):
        for mod in (None, 2, 3):
            bad = sum(hom_count_tw(f, td, g, mod) != hom_count_brute(f, g, mod) for f, td in pats)
            out.add(f"{len(pats)} patterns into {gname} {'exact' if mod is None else f'mod {mod}'}",
                    "0 differences", f"{bad} differences", bad == 0)
    return out.rows


# ---------------------------------------------------------------------------
# 10


def check_planar_witness(ctx: Context) -> list[Row]:
    out = _Rows("planar-witness", ctx)
    base = Graph.complete(4)
    gamma = GROUPS["Z2"]
    c0 = build_cfi(gamma, base, None)
    cu = build_cfi(gamma, base, {0: 1})
    h0, hu = hom_count_brute(base, c0.graph), hom_count_brute(base, cu.graph)
    out.add("hom(K4, CFI) for U=0 vs sum U=1", "different", f"{h0} vs {hu}", h0 != hu)
    iso = is_isomorphic(c0.graph, cu.graph)
    out.add("CFI pair over K4/Z2", "non-isomorphic", "isomorphic" if iso else "non-isomorphic", iso is None)
    f = find_distinguisher(c0.graph, cu.graph, "planar", max_size=base.n)
    if f is None:
        out.add("planar distinguisher up to 4 vertices", "planar witness", "none found", False)
    else:
        ok = is_planar(f) and hom_count_brute(f, c0.graph) != hom_count_brute(f, cu.graph)
        out.add("planar distinguisher up to 4 vertices", "planar witness",
                f"n={f.n} edges={sorted(f.edges)}", ok)
    return out.rows


# ---------------------------------------------------------------------------
# 11


def _all_matrices(n: int):
    for bits in range(2 ** (n * n)):
        yield [[(bits >> (r * n + c)) & 1 for c in range(n)] for r in range(n)]


def _key(m) -> tuple:
    return tuple(map(tuple, m))


def similar_by_search(m, mp, gl) -> bool:
    """Exhaustive oracle: try every invertible matrix."""
    return any(matmul(m, s, 2) == matmul(s, mp, 2) for s in gl)


def check_imgame(ctx: Context) -> list[Row]:
    out = _Rows("imgame", ctx)
    rng = random.Random(ctx.seed)
    gls = {n: [m for m in _all_matrices(n) if fp_inverse(m, 2) is not None] for n in (1, 2, 3)}
    for n in (1, 2, 3):
        pairs = set()
        for m in _all_matrices(n):
            for s in gls[n]:
                pairs.add((_key(matmul(matmul(s, m, 2), fp_inverse(s, 2), 2)), _key(m)))
        bad = sum(check_similarity([(a, b)], 2).verdict != "witness" for a, b in sorted(pairs))
        out.add(f"all conjugate pairs dim {n}", f"{len(pairs)} witnesses", f"{len(pairs) - bad} witnesses", bad == 0)
    bad = 0
    for _ in range(1000):
        n = rng.randint(1, 3)
        a = [[rng.randrange(2) for _ in range(n)] for _ in range(n)]
        b = [[rng.randrange(2) for _ in range(n)] for _ in range(n)]
        res = check_similarity([(a, b)], 2, seed=ctx.seed)
        want = "witness" if similar_by_search(a, b, gls[n]) else "no-witness"
        bad += res.verdict != want
    out.add("1000 random pairs dim <= 3", "0 disagreements with exhaustive search", f"{bad} disagreements", bad == 0)

    for name, mv, pos in _mutation_cases():
        base_ok = bool(validate_move(pos, mv, 1, 2))
        caught = total = 0
        for i, j in itertools.product(range(len(mv.S)), repeat=2):
            flipped = [row[:] for row in mv.S]
            flipped[i][j] ^= 1
            total += 1
            caught += not validate_move(pos, type(mv)(mv.blocks_a, mv.blocks_b, mv.bijection, flipped), 1, 2)
        if len(mv.blocks_a) > 1:
            moved = [list(b) for b in mv.blocks_a]
            moved[1].append(moved[0].pop())
            if moved[0]:
                total += 1
                caught += not validate_move(pos, type(mv)(moved, mv.blocks_b, mv.bijection, mv.S), 1, 2)
        out.add(f"mutations of {name}", f"valid move, {total}/{total} mutants rejected",
                f"{'valid' if base_ok else 'invalid'} move, {caught}/{total} mutants rejected",
                base_ok and caught == total)

    for name, a, b in _iso_pairs():
        v = solve_game_tiny(a, b, 3, round_cap=5, seed=ctx.seed)
        out.add(f"game {name} k=3", "duplicator-survives 5", f"{v.verdict} {v.rounds}",
                v.verdict == "duplicator-survives" and v.rounds == 5)
    for name, a, b in (("K3 vs K4", Graph.complete(3), Graph.complete(4)),
                       ("P3 vs C4", Graph.path(3), Graph.cycle(4))):
        v = solve_game_tiny(a, b, 3, round_cap=5, seed=ctx.seed)
        out.add(f"game {name} k=3", "spoiler-wins 0", f"{v.verdict} {v.rounds}",
                v.verdict == "spoiler-wins" and v.rounds == 0)
    return out.rows


def _mutation_cases():
    cfi = build_cfi(GROUPS["Z2"], Graph.complete(3), None).graph
    pos = GamePosition(cfi, cfi, (None, None), (None, None), 2, (2,))
    yield "CFI[Z2,K3,0] orbit move", identity_move(pos, tuple_orbits(cfi, 2), 1), pos
    p4 = Graph.path(4)
    q4 = p4.relabel({0: 3, 1: 2, 2: 1, 3: 0})
    pos = GamePosition(p4, q4, (None, None), (None, None), 2, (2,))
    blocks_a = [[(u, v) for u in p4.vertices for v in p4.vertices if (u == v, p4.has_edge(u, v)) == t]
                for t in ((True, False), (False, True), (False, False))]
    blocks_b = [[(u, v) for u in q4.vertices for v in q4.vertices if (u == v, q4.has_edge(u, v)) == t]
                for t in ((True, False), (False, True), (False, False))]
    mv, _ = find_move(pos, blocks_a, blocks_b, 1, 2)
    yield "P4 type move", mv, pos


def _iso_pairs():
    c5 = Graph.cycle(5)
    yield "C5 vs relabelled C5", c5, c5.relabel({0: 0, 1: 2, 2: 4, 3: 1, 4: 3})
    p4 = Graph.path(4)
    yield "P4 vs relabelled P4", p4, p4.relabel({0: 2, 1: 0, 2: 3, 3: 1})
    gamma = GROUPS["Z2"]
    yield ("CFI[Z2,K3,(1,1,0)] vs CFI[Z2,K3,0]", build_cfi(gamma, Graph.complete(3), [1, 1, 0]).graph,
           build_cfi(gamma, Graph.complete(3), None).graph)


# ---------------------------------------------------------------------------
# 12


def nice_vertex_count_closed_form(n: int) -> int:
    """Tree with ``2n`` root children, branching ``2n-1`` below, depth ``4n``, plus ``2n-1`` extra grid rows."""
    leaves = 2 * n * (2 * n - 1) ** (4 * n - 1)
    tree = 1 + 2 * n * sum((2 * n - 1) ** i for i in range(4 * n))
    return tree + (2 * n - 1) * leaves


def check_nice_generator(ctx: Context) -> list[Row]:
    out = _Rows("nice", ctx)
    w = build_nice_planar(1)
    res = check_nice(w.graph, w.witness_vertex, 1, 2, 2, 1)
    out.add("nice planar n=1 is (1,2,2,1)-nice", "true", res.status, bool(res))
    out.add("nice planar n=1 planarity", True, is_planar(w.graph), is_planar(w.graph))
    want = nice_vertex_count_closed_form(1)
    out.add("nice planar n=1 vertex count", want, w.graph.n, w.graph.n == want)
    return out.rows


# ---------------------------------------------------------------------------
# registry


@dataclass(frozen=True)
class Criterion:
    number: int
    name: str
    run: Callable[[Context], list[Row]]
    limit: float | None = field(default=None)


CRITERIA = [
    Criterion(1, "lem-iso", check_lem_iso, 60),
    Criterion(2, "cor-equiv", check_cor_equiv, 300),
    Criterion(3, "hom-psi", check_hom_psi, 300),
    Criterion(4, "equations", check_equations),
    Criterion(5, "coclique", check_coclique, 120),
    Criterion(6, "power", check_power),
    Criterion(7, "faben-jerrum", check_faben_jerrum, 600),
    Criterion(8, "dvorak", check_dvorak, 900),
    Criterion(9, "tw-dp", check_tw_dp),
    Criterion(10, "planar-witness", check_planar_witness),
    Criterion(11, "imgame", check_imgame),
    Criterion(12, "nice", check_nice_generator, 10),
]


def lookup(ident: str) -> Criterion:
    """Find a criterion by number or name."""
    for c in CRITERIA:
        if ident == c.name or ident == str(c.number):
            return c
    raise KeyError(ident)


def run_criterion(c: Criterion, ctx: Context | None = None) -> CriterionReport:
    ctx = ctx or Context()
    t = time.perf_counter()
    rows = c.run(ctx)
    return CriterionReport(c.number, c.name, rows, time.perf_counter() - t, c.limit)
