"""Invertible-map game: positions, Duplicator-move validation, simultaneous
similarity over F_p, a solver for tiny instances and JSON transcripts.

Vertices of a structure are addressed by their original ids in every public
type. Tuples in ``A^l`` are ordered lexicographically over the sorted vertex
list, and that order indexes the rows and columns of all matrices.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

from .canon import Structure, find_isomorphism
from .cfi import CfiGraph, CfiStructure
from .equiv import _as_structure
from .graph import Graph, graph_from_dict, graph_to_dict
from .linalg import Matrix, fp_is_invertible, fp_nullspace, is_prime, matmul

ENUMERATION_LIMIT = 1 << 16


class MalformedMove(ValueError):
    pass


# ---------------------------------------------------------------------------
# simultaneous similarity


@dataclass
class SimilarityResult:
    verdict: str                   # "witness", "no-witness" or "inconclusive"
    witness: Matrix | None
    dimension: int                 # dimension of the solution space of the linear constraints
    enumerated: bool               # whether the whole solution space was searched

    def __bool__(self) -> bool:
        return self.verdict == "witness"


def _check_square(m, n, what):
    if len(m) != n or any(len(row) != n for row in m):
        raise ValueError(f"{what} is not {n}x{n}")


def similarity_constraints(mats: Sequence[tuple[Matrix, Matrix]], n: int) -> list[dict[int, int]]:
    """Sparse rows of ``M S - S M' = 0`` in the unknowns ``S[r][c]`` (index ``r * n + c``)."""
    rows = []
    for m, mp in mats:
        for r in range(n):
            for c in range(n):
                row: dict[int, int] = {}
                for k in range(n):
                    if m[r][k]:
                        row[k * n + c] = row.get(k * n + c, 0) + m[r][k]
                    if mp[k][c]:
                        row[r * n + k] = row.get(r * n + k, 0) - mp[k][c]
                rows.append(row)
    return rows


def _nullspace_gf2(rows: list[dict[int, int]], ncols: int) -> list[int]:
    piv: dict[int, int] = {}
    for row in rows:
        x = 0
        for j, v in row.items():
            if v % 2:
                x |= 1 << j
        while x:
            h = x.bit_length() - 1
            if h in piv:
                x ^= piv[h]
            else:
                piv[h] = x
                break
        if len(piv) == ncols:
            return []
    order = sorted(piv)
    for i, h in enumerate(order):
        for h2 in order[i + 1:]:
            if piv[h2] >> h & 1:
                piv[h2] ^= piv[h]
    basis = []
    for f in range(ncols):
        if f in piv:
            continue
        x = 1 << f
        for h, r in piv.items():
            if r >> f & 1:
                x |= 1 << h
        basis.append(x)
    return basis


def _gf2_invertible(s: int, n: int) -> bool:
    mask = (1 << n) - 1
    piv: dict[int, int] = {}
    for r in range(n):
        x = (s >> (r * n)) & mask
        while x:
            h = x.bit_length() - 1
            if h in piv:
                x ^= piv[h]
            else:
                piv[h] = x
                break
        if not x:
            return False
    return True


def _gf2_matrix(s: int, n: int) -> Matrix:
    return [[(s >> (r * n + c)) & 1 for c in range(n)] for r in range(n)]


def verify_similarity(mats: Sequence[tuple[Matrix, Matrix]], s: Matrix, p: int) -> bool:
    """``S`` is invertible and ``M S = S M'`` for every pair."""
    if s and not fp_is_invertible(s, p):
        return False
    for m, mp in mats:
        if matmul(m, s, p) != matmul(s, mp, p):
            return False
    return True


def check_similarity(mats: Sequence[tuple[Matrix, Matrix]], p: int, search_budget: int = 10_000,
                     seed: int = 0, n: int | None = None) -> SimilarityResult:
    """Look for one invertible ``S`` over F_p with ``M_i S = S M_i'`` for all ``i``.

    ``no-witness`` is reported only when the whole solution space was enumerated.
    """
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    mats = [([[x % p for x in row] for row in m], [[x % p for x in row] for row in mp]) for m, mp in mats]
    if n is None:
        if not mats:
            raise ValueError("matrix dimension unknown: pass n for an empty list")
        n = len(mats[0][0])
    for m, mp in mats:
        _check_square(m, n, "left matrix")
        _check_square(mp, n, "right matrix")
    if n == 0:
        return SimilarityResult("witness", [], 0, True)
    rows = similarity_constraints(mats, n)
    rng = random.Random(seed)
    if p == 2:
        return _search_gf2(mats, rows, n, search_budget, rng)
    return _search_fp(mats, rows, n, p, search_budget, rng)


def _search_gf2(mats, rows, n, budget, rng) -> SimilarityResult:
    basis = _nullspace_gf2(rows, n * n)
    d = len(basis)
    if d == 0:
        return SimilarityResult("no-witness", None, 0, True)

    def found(s):
        w = _gf2_matrix(s, n)
        if not verify_similarity(mats, w, 2):
            raise AssertionError("similarity witness failed verification")
        return SimilarityResult("witness", w, d, False)

    # random probes first: invertible elements are usually plentiful
    for _ in range(min(budget, 64)):
        s = 0
        for b in basis:
            if rng.getrandbits(1):
                s ^= b
        if _gf2_invertible(s, n):
            return found(s)
    if 2 ** d <= ENUMERATION_LIMIT:
        s = 0
        for i in range(1, 2 ** d):
            s ^= basis[(i & -i).bit_length() - 1]       # Gray code step
            if _gf2_invertible(s, n):
                res = found(s)
                return res
        return SimilarityResult("no-witness", None, d, True)
    for _ in range(max(0, budget - 64)):
        s = 0
        for b in basis:
            if rng.getrandbits(1):
                s ^= b
        if _gf2_invertible(s, n):
            return found(s)
    return SimilarityResult("inconclusive", None, d, False)


def _search_fp(mats, rows, n, p, budget, rng) -> SimilarityResult:
    dense = [[row.get(j, 0) % p for j in range(n * n)] for row in rows if any(v % p for v in row.values())]
    basis = fp_nullspace(dense, p, ncols=n * n)
    d = len(basis)
    if d == 0:
        return SimilarityResult("no-witness", None, 0, True)

    def combine(coefs):
        vec = [0] * (n * n)
        for c, b in zip(coefs, basis):
            if c:
                for j, x in enumerate(b):
                    if x:
                        vec[j] = (vec[j] + c * x) % p
        return [vec[r * n:(r + 1) * n] for r in range(n)]

    def attempt(coefs):
        s = combine(coefs)
        if fp_is_invertible(s, p):
            if not verify_similarity(mats, s, p):
                raise AssertionError("similarity witness failed verification")
            return s
        return None

    for _ in range(min(budget, 64)):
        s = attempt([rng.randrange(p) for _ in range(d)])
        if s is not None:
            return SimilarityResult("witness", s, d, False)
    if p ** d <= ENUMERATION_LIMIT:
        for coefs in itertools.product(range(p), repeat=d):
            s = attempt(coefs)
            if s is not None:
                return SimilarityResult("witness", s, d, False)
        return SimilarityResult("no-witness", None, d, True)
    for _ in range(max(0, budget - 64)):
        s = attempt([rng.randrange(p) for _ in range(d)])
        if s is not None:
            return SimilarityResult("witness", s, d, False)
    return SimilarityResult("inconclusive", None, d, False)


# ---------------------------------------------------------------------------
# positions and moves


class _Arena:
    """Dense view of one structure: indices ``0..n-1`` and the original ids."""

    def __init__(self, x):
        self.source = x
        self.s, self.ids = _as_structure(x)
        self.index = {v: i for i, v in enumerate(self.ids)}
        self.n = self.s.n

    def dense(self, t: Sequence[int]) -> tuple[int, ...]:
        try:
            return tuple(self.index[v] for v in t)
        except (KeyError, TypeError):
            raise MalformedMove(f"tuple {t!r} leaves the vertex set") from None

    def atomic_type(self, t: Sequence[int]) -> tuple:
        """Colours, equalities and arc labels of a dense tuple."""
        s = self.s
        arcs = s.arcs
        return (tuple(s.colors[x] for x in t),
                tuple((t[i] == t[j], arcs.get((t[i], t[j]))) for i in range(len(t)) for j in range(len(t))))


@dataclass
class GamePosition:
    """Pebble ``i`` lies on ``a[i]`` in ``A`` and on ``b[i]`` in ``B``; ``None`` means off the board."""

    A: object
    B: object
    a: tuple = ()
    b: tuple = ()
    k: int = 2
    primes: tuple[int, ...] = (2,)

    def __post_init__(self):
        self.a = tuple(self.a)
        self.b = tuple(self.b)
        self.primes = tuple(self.primes)
        if len(self.a) != len(self.b):
            raise ValueError("pebble tuples differ in length")
        if len(self.a) > self.k:
            raise ValueError(f"more than k={self.k} pebbles")
        if any((x is None) != (y is None) for x, y in zip(self.a, self.b)):
            raise ValueError("corresponding pebbles must be placed together")
        bad = [q for q in self.primes if not is_prime(q)]
        if bad:
            raise ValueError(f"not prime: {bad}")

    @cached_property
    def arena_a(self) -> _Arena:
        return _Arena(self.A)

    @cached_property
    def arena_b(self) -> _Arena:
        return _Arena(self.B)

    def placed(self) -> list[tuple[int, int]]:
        return [(x, y) for x, y in zip(self.a, self.b) if x is not None]


def partial_isomorphism_check(pos: GamePosition) -> bool:
    """Pebbles induce a well-defined map that preserves equality, colours and relations both ways."""
    pairs = pos.placed()
    ta = pos.arena_a.atomic_type(pos.arena_a.dense([x for x, _ in pairs]))
    tb = pos.arena_b.atomic_type(pos.arena_b.dense([y for _, y in pairs]))
    return ta == tb


@dataclass
class DuplicatorMove:
    """Partitions of ``A^l x A^l`` and ``B^l x B^l`` (elements are ``2l``-tuples of vertex ids),
    the bijection ``blocks_a[i] -> blocks_b[bijection[i]]`` and the matrix ``S`` (rows ``A^l``, columns ``B^l``)."""

    blocks_a: list[list[tuple]]
    blocks_b: list[list[tuple]]
    bijection: list[int]
    S: Matrix

    def to_dict(self) -> dict:
        return {"blocks_a": [[list(t) for t in blk] for blk in self.blocks_a],
                "blocks_b": [[list(t) for t in blk] for blk in self.blocks_b],
                "bijection": list(self.bijection),
                "S": [list(r) for r in self.S]}

    @classmethod
    def from_dict(cls, d: dict) -> "DuplicatorMove":
        try:
            return cls([[tuple(t) for t in blk] for blk in d["blocks_a"]],
                       [[tuple(t) for t in blk] for blk in d["blocks_b"]],
                       [int(i) for i in d["bijection"]],
                       [[int(x) for x in r] for r in d["S"]])
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedMove(f"bad move JSON: {exc}") from None


@dataclass
class MoveCheck:
    ok: bool
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def _tuple_index(t: Sequence[int], n: int) -> int:
    out = 0
    for x in t:
        out = out * n + x
    return out


def _char_matrix(block_dense: Sequence[tuple[int, ...]], n: int, ell: int) -> Matrix:
    size = n ** ell
    m = [[0] * size for _ in range(size)]
    for t in block_dense:
        m[_tuple_index(t[:ell], n)][_tuple_index(t[ell:], n)] = 1
    return m


def _dense_blocks(arena: _Arena, blocks, ell: int) -> list[list[tuple[int, ...]]]:
    out = []
    for blk in blocks:
        if not blk:
            raise MalformedMove("empty block")
        dense_blk = []
        for t in blk:
            if len(t) != 2 * ell:
                raise MalformedMove(f"element {t!r} is not a {2 * ell}-tuple")
            dense_blk.append(arena.dense(t))
        out.append(dense_blk)
    return out


def _covers(blocks: list[list[tuple]], n: int, ell: int) -> str:
    seen = set()
    for blk in blocks:
        for t in blk:
            if t in seen:
                return f"element {t} occurs twice"
            seen.add(t)
    if len(seen) != n ** (2 * ell):
        return f"partition covers {len(seen)} of {n ** (2 * ell)} elements"
    return ""


def validate_move(pos: GamePosition, mv: DuplicatorMove, ell: int, p: int) -> MoveCheck:
    """Check a Duplicator answer for Spoiler's choice of ``ell`` and ``p``.

    Raises :class:`MalformedMove` for blocks that are not lists of ``2 ell``-tuples over the
    vertex sets; every other defect yields a falsy result with a reason.
    """
    if ell < 1 or 2 * ell > pos.k:
        raise ValueError(f"need 1 <= l and 2l <= k, got l={ell}, k={pos.k}")
    if p not in pos.primes:
        raise ValueError(f"prime {p} not among {pos.primes}")
    A, B = pos.arena_a, pos.arena_b
    if A.n != B.n:
        return MoveCheck(False, "structures differ in size")
    n = A.n
    pa = _dense_blocks(A, mv.blocks_a, ell)
    pb = _dense_blocks(B, mv.blocks_b, ell)
    for side, blocks in (("A", pa), ("B", pb)):
        why = _covers(blocks, n, ell)
        if why:
            return MoveCheck(False, f"{side}: {why}")
    if len(pa) != len(pb):
        return MoveCheck(False, f"{len(pa)} blocks vs {len(pb)} blocks")
    if sorted(mv.bijection) != list(range(len(pb))) or len(mv.bijection) != len(pa):
        return MoveCheck(False, "block map is not a bijection")
    size = n ** ell
    s = [[x % p for x in row] for row in mv.S]
    if len(s) != size or any(len(row) != size for row in s):
        return MoveCheck(False, f"S is not {size}x{size}")
    if size and not fp_is_invertible(s, p):
        return MoveCheck(False, "S is singular")
    for i, blk in enumerate(pa):
        ca = _char_matrix(blk, n, ell)
        cb = _char_matrix(pb[mv.bijection[i]], n, ell)
        if matmul(ca, s, p) != matmul(s, cb, p):
            return MoveCheck(False, f"block {i} violates the conjugation identity")
    return MoveCheck(True)


def find_move(pos: GamePosition, blocks_a, blocks_b, ell: int, p: int,
              search_budget: int = 10_000, seed: int = 0) -> tuple[DuplicatorMove | None, SimilarityResult]:
    """Complete block-aligned partitions (``blocks_a[i] -> blocks_b[i]``) into a move by searching for ``S``."""
    A, B = pos.arena_a, pos.arena_b
    n = A.n
    pa = _dense_blocks(A, blocks_a, ell)
    pb = _dense_blocks(B, blocks_b, ell)
    mats = [(_char_matrix(x, n, ell), _char_matrix(y, n, ell)) for x, y in zip(pa, pb)]
    res = check_similarity(mats, p, search_budget, seed, n=n ** ell)
    if not res:
        return None, res
    return DuplicatorMove([list(b) for b in blocks_a], [list(b) for b in blocks_b],
                          list(range(len(blocks_a))), res.witness), res


def identity_move(pos: GamePosition, blocks, ell: int) -> DuplicatorMove:
    """The move ``P = P'``, ``f = id``, ``S = I``; valid whenever ``A`` and ``B`` are the same structure."""
    size = pos.arena_a.n ** ell
    ident = [[int(i == j) for j in range(size)] for i in range(size)]
    return DuplicatorMove([list(b) for b in blocks], [list(b) for b in blocks], list(range(len(blocks))), ident)


# ---------------------------------------------------------------------------
# tiny solver (l = 1)


@dataclass
class GameVerdict:
    verdict: str                   # "spoiler-wins", "duplicator-survives" or "inconclusive"
    rounds: int                    # rounds Spoiler needs, or the cap Duplicator survives
    complete: bool                 # False when the verdict rests on a restricted move set
    note: str = ""
    stats: dict = field(default_factory=dict)


def _pickups(placed: tuple, k: int) -> list[tuple]:
    """Board contents left after Spoiler lifts two pebbles."""
    off = k - len(placed)
    out = set()
    for j in range(max(0, 2 - off), min(2, len(placed)) + 1):
        for drop in itertools.combinations(range(len(placed)), j):
            out.add(tuple(x for i, x in enumerate(placed) if i not in drop))
    return sorted(out)


class _TinySolver:
    def __init__(self, A: _Arena, B: _Arena, k: int, primes, budget: int, seed: int, node_cap: int):
        self.A, self.B = A, B
        self.n = A.n
        self.k = k
        self.primes = primes
        self.budget = budget
        self.seed = seed
        self.node_cap = node_cap
        self.nodes = 0
        self.lost: set = set()
        self.survived: dict = {}
        self.unknown: set = set()
        self.iso_memo: dict = {}
        self.moves_tried = 0

    def partial_iso(self, placed) -> bool:
        return self.A.atomic_type([x for x, _ in placed]) == self.B.atomic_type([y for _, y in placed])

    def extends_to_iso(self, placed) -> bool:
        """``(A, a) ~ (B, b)``: then Duplicator plays orbit partitions forever."""
        key = placed
        if key not in self.iso_memo:
            def pebbled(ar: _Arena, verts):
                tags = [[] for _ in range(ar.n)]
                for i, v in enumerate(verts):
                    tags[v].append(i)
                cols = [(ar.s.colors[v], tuple(tags[v])) for v in range(ar.n)]
                return Structure(ar.n, cols, ar.s.arcs, ar.s.symmetric)
            sa = pebbled(self.A, [x for x, _ in placed])
            sb = pebbled(self.B, [y for _, y in placed])
            self.iso_memo[key] = find_isomorphism(sa, sb) is not None
        return self.iso_memo[key]

    def pair_colours(self, rest) -> tuple[dict, dict]:
        """Folklore 2-WL on the disjoint union with the remaining pebbles individualized."""
        n = self.n
        N = 2 * n

        def side(v):
            return (self.A, v) if v < n else (self.B, v - n)

        tags = [[] for _ in range(N)]
        for i, (x, y) in enumerate(rest):
            tags[x].append(i)
            tags[y + n].append(i)
        vcol = []
        for v in range(N):
            ar, w = side(v)
            vcol.append((ar.s.colors[w], tuple(tags[v])))

        def init(u, v):
            au, wu = side(u)
            av, wv = side(v)
            arc = au.s.arcs.get((wu, wv)) if au is av else None
            return (vcol[u], vcol[v], u == v, au is av, arc)

        pairs = [(u, v) for u in range(N) for v in range(N)]
        sig = [init(u, v) for u, v in pairs]
        ids = {s: i for i, s in enumerate(sorted(set(sig), key=repr))}
        col = [ids[s] for s in sig]
        while True:
            new_sig = []
            for u, v in pairs:
                ms = sorted((col[u * N + w], col[w * N + v]) for w in range(N))
                new_sig.append((col[u * N + v], tuple(ms)))
            ids = {s: i for i, s in enumerate(sorted(set(new_sig)))}
            new = [ids[s] for s in new_sig]
            if len(ids) == len(set(col)):
                col = new
                break
            col = new
        ca = {(u, v): col[u * N + v] for u in range(n) for v in range(n)}
        cb = {(u, v): col[(u + n) * N + v + n] for u in range(n) for v in range(n)}
        return ca, cb

    def type_blocks(self, rest):
        ra = [x for x, _ in rest]
        rb = [y for _, y in rest]
        ga: dict = {}
        gb: dict = {}
        for u in range(self.n):
            for v in range(self.n):
                ga.setdefault(self.A.atomic_type(ra + [u, v]), []).append((u, v))
                gb.setdefault(self.B.atomic_type(rb + [u, v]), []).append((u, v))
        return ga, gb

    def similar(self, blocks_a, blocks_b, p):
        n = self.n
        mats = [(_char_matrix(x, n, 1), _char_matrix(y, n, 1)) for x, y in zip(blocks_a, blocks_b)]
        self.moves_tried += 1
        return check_similarity(mats, p, self.budget, self.seed, n=n)

    def branch(self, rest, p, r):
        """Outcome for Duplicator once Spoiler has lifted pebbles leaving ``rest`` and picked ``p``."""
        ga, gb = self.type_blocks(rest)
        if set(ga) != set(gb):
            return "lose"
        keys = sorted(ga, key=repr)
        coarse = self.similar([ga[t] for t in keys], [gb[t] for t in keys], p)
        if coarse.verdict == "no-witness":
            return "lose"
        ca, cb = self.pair_colours(rest)
        wa: dict = {}
        wb: dict = {}
        for pr, c in ca.items():
            wa.setdefault(c, []).append(pr)
        for pr, c in cb.items():
            wb.setdefault(c, []).append(pr)
        candidates = []
        # finest first: fewer Spoiler replies to survive
        if set(wa) == set(wb) and len(wa) > len(ga):
            cs = sorted(wa)
            bla, blb = [wa[c] for c in cs], [wb[c] for c in cs]
            if self.similar(bla, blb, p):
                candidates.append((bla, blb))
        if coarse:
            candidates.append(([ga[t] for t in keys], [gb[t] for t in keys]))
        for bla, blb in candidates:
            if self.move_survives(rest, bla, blb, r):
                return "survive"
        return "unknown"

    def move_survives(self, rest, bla, blb, r) -> bool:
        nexts = set()
        for x, y in zip(bla, blb):
            for u in x:
                for v in y:
                    nexts.add(tuple(sorted(rest + ((u[0], v[0]), (u[1], v[1])))))
        return all(self.solve(q, r - 1)[0] == "survive" for q in sorted(nexts))

    def solve(self, placed: tuple, r: int) -> tuple[str, int]:
        """``("lose", rounds)`` when Spoiler provably wins, ``("survive", r)`` or ``("unknown", r)``."""
        if not self.partial_iso(placed):
            return "lose", 0
        if r == 0:
            return "survive", 0
        if placed in self.lost:
            return "lose", 1
        if self.survived.get(placed, -1) >= r:
            return "survive", r
        if (placed, r) in self.unknown:
            return "unknown", r
        if self.extends_to_iso(placed):
            self.survived[placed] = 1 << 30
            return "survive", r
        self.nodes += 1
        if self.nodes > self.node_cap:
            raise _CapHit()
        status = "survive"
        for p in self.primes:
            for rest in _pickups(placed, self.k):
                res = self.branch(rest, p, r)
                if res == "lose":
                    self.lost.add(placed)
                    return "lose", 1
                if res == "unknown":
                    status = "unknown"
        if status == "survive":
            self.survived[placed] = max(r, self.survived.get(placed, -1))
        else:
            self.unknown.add((placed, r))
        return status, r


class _CapHit(Exception):
    pass


def solve_game_tiny(A, B, k: int, ell_max: int = 1, primes: Sequence[int] = (2,), round_cap: int = 5,
                    search_budget: int = 2_000, seed: int = 0, node_cap: int = 20_000,
                    max_size: int = 6) -> GameVerdict:
    """Play the invertible-map game from the empty position for up to ``round_cap`` rounds.

    Duplicator's candidates are the atomic-type partition, the 2-WL pair colouring
    and, when the pebbled structures are isomorphic, the orbit strategy. A Spoiler win
    is reported only when no Duplicator move can survive the next round.
    """
    if ell_max != 1:
        raise ValueError("the tiny solver supports l = 1 only")
    if k < 2 or k > 3:
        raise ValueError("the tiny solver needs 2 <= k <= 3")
    ar_a, ar_b = _Arena(A), _Arena(B)
    if ar_a.n != ar_b.n:
        return GameVerdict("spoiler-wins", 0, True, "structures differ in size")
    if ar_a.n > max_size:
        raise ValueError(f"structures above {max_size} elements are not tiny")
    solver = _TinySolver(ar_a, ar_b, k, tuple(primes), search_budget, seed, node_cap)
    try:
        status, rounds = solver.solve((), round_cap)
    except _CapHit:
        return GameVerdict("inconclusive", round_cap, False, "node cap exceeded",
                           {"nodes": solver.nodes, "moves": solver.moves_tried})
    stats = {"nodes": solver.nodes, "moves": solver.moves_tried}
    if status == "lose":
        return GameVerdict("spoiler-wins", rounds, True, "", stats)
    if status == "survive":
        return GameVerdict("duplicator-survives", round_cap, True, "", stats)
    return GameVerdict("inconclusive", round_cap, False,
                       "Duplicator candidates restricted to type, 2-WL and orbit partitions", stats)


# ---------------------------------------------------------------------------
# transcripts


def _structure_to_json(x) -> dict:
    if isinstance(x, Graph):
        return {"kind": "graph", "graph": graph_to_dict(x)}
    if isinstance(x, CfiGraph):
        return {"kind": "graph", "graph": graph_to_dict(x.graph)}
    if isinstance(x, (Structure, CfiStructure)):
        s = x.to_structure() if isinstance(x, CfiStructure) else x
        return {"kind": "structure", "n": s.n, "colors": [repr(c) for c in s.colors],
                "arcs": [[u, v, repr(lab)] for (u, v), lab in sorted(s.arcs.items())]}
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _structure_from_json(d: dict):
    if d.get("kind") == "graph":
        return graph_from_dict(d["graph"])
    if d.get("kind") == "structure":
        return Structure(d["n"], d["colors"], {(u, v): lab for u, v, lab in d["arcs"]})
    raise MalformedMove(f"unknown structure kind {d.get('kind')!r}")


def play_transcript(A, B, k: int, primes: Sequence[int] = (2,), rounds: int = 3,
                    seed: int = 0, search_budget: int = 2_000) -> dict:
    """Record a game with random Spoiler choices and type-partition Duplicator answers (l = 1).

    Recording stops early once the type partitions of the two sides disagree or admit no
    similarity matrix, so the transcript may hold fewer than ``rounds`` rounds.
    """
    rng = random.Random(seed)
    pos = GamePosition(A, B, (None,) * k, (None,) * k, k, tuple(primes))
    doc = {"A": _structure_to_json(A), "B": _structure_to_json(B), "k": k,
           "primes": list(primes), "rounds": []}
    A_, B_ = pos.arena_a, pos.arena_b
    a, b = list(pos.a), list(pos.b)
    solver = _TinySolver(A_, B_, k, tuple(primes), search_budget, seed, 1)
    for _ in range(rounds):
        p = rng.choice(list(primes))
        lift = sorted(rng.sample(range(k), 2))
        for i in lift:
            a[i] = b[i] = None
        rest = tuple((A_.index[x], B_.index[y]) for x, y in zip(a, b) if x is not None)
        ga, gb = solver.type_blocks(rest)
        if set(ga) != set(gb):
            break
        keys = sorted(ga, key=repr)
        bla = [[tuple(A_.ids[v] for v in t) for t in ga[key]] for key in keys]
        blb = [[tuple(B_.ids[v] for v in t) for t in gb[key]] for key in keys]
        mv, _ = find_move(GamePosition(A, B, tuple(a), tuple(b), k, tuple(primes)), bla, blb, 1, p,
                          search_budget, seed)
        if mv is None:
            break
        blk = rng.randrange(len(bla))
        u = rng.choice(bla[blk])
        v = rng.choice(blb[mv.bijection[blk]])
        a[lift[0]], a[lift[1]] = u
        b[lift[0]], b[lift[1]] = v
        doc["rounds"].append({"prime": p, "ell": 1, "lift": lift, "move": mv.to_dict(),
                              "spoiler": {"block": blk, "u": list(u), "v": list(v)}})
    return doc


@dataclass
class TranscriptReport:
    legal: bool                    # every recorded move follows the rules
    rounds: int                    # rounds replayed
    winner: str                    # "spoiler", "duplicator-alive" or "illegal"
    reason: str = ""

    def to_dict(self) -> dict:
        return {"legal": self.legal, "rounds": self.rounds, "winner": self.winner, "reason": self.reason}


def validate_transcript(doc: dict | str) -> TranscriptReport:
    """Replay a recorded game and check every move."""
    if isinstance(doc, str):
        doc = json.loads(doc)
    try:
        A = _structure_from_json(doc["A"])
        B = _structure_from_json(doc["B"])
        k = int(doc["k"])
        primes = tuple(int(q) for q in doc["primes"])
        rounds = doc["rounds"]
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedMove(f"bad transcript: {exc}") from None
    a: list = [None] * k
    b: list = [None] * k
    pos = GamePosition(A, B, tuple(a), tuple(b), k, primes)
    if pos.arena_a.n != pos.arena_b.n:
        return TranscriptReport(True, 0, "spoiler", "structures differ in size")
    for r, rd in enumerate(rounds, start=1):
        ell = int(rd["ell"])
        lift = [int(i) for i in rd["lift"]]
        if len(lift) != 2 * ell or len(set(lift)) != len(lift) or not all(0 <= i < k for i in lift):
            return TranscriptReport(False, r - 1, "illegal", f"round {r}: bad pebble choice")
        for i in lift:
            a[i] = b[i] = None
        pos = GamePosition(A, B, tuple(a), tuple(b), k, primes)
        mv = DuplicatorMove.from_dict(rd["move"])
        check = validate_move(pos, mv, ell, int(rd["prime"]))
        if not check:
            return TranscriptReport(False, r - 1, "illegal", f"round {r}: {check.reason}")
        sp = rd["spoiler"]
        blk = int(sp["block"])
        u, v = tuple(sp["u"]), tuple(sp["v"])
        if not (0 <= blk < len(mv.blocks_a)) or u not in mv.blocks_a[blk] \
                or v not in mv.blocks_b[mv.bijection[blk]]:
            return TranscriptReport(False, r - 1, "illegal", f"round {r}: Spoiler tuple not in the chosen blocks")
        for i, x, y in zip(lift, u, v):
            a[i], b[i] = x, y
        pos = GamePosition(A, B, tuple(a), tuple(b), k, primes)
        if not partial_isomorphism_check(pos):
            return TranscriptReport(True, r, "spoiler", f"round {r}: pebbles are not a partial isomorphism")
    return TranscriptReport(True, len(rounds), "duplicator-alive")
