"""The counting logic C^k_p with modular quantifiers: syntax, parsing and model checking.

Text syntax::

    true   x1=x2   E(x1,x2)   !phi   (phi&psi)   (phi|psi)   E[c]x1.phi

``E[c]x.phi`` holds when the number of vertices satisfying ``phi`` is
congruent to ``c`` modulo ``p``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Union

from .graph import Graph


class FormulaError(ValueError):
    pass


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Eq:
    i: int
    j: int


@dataclass(frozen=True)
class Edge:
    i: int
    j: int


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class ModExists:
    c: int
    var: int
    body: "Formula"


Formula = Union[Top, Eq, Edge, Not, And, Or, ModExists]

TRUE = Top()
FALSE = Not(TRUE)


def conj(parts) -> Formula:
    parts = list(parts)
    if not parts:
        return TRUE
    out = parts[0]
    for x in parts[1:]:
        out = And(out, x)
    return out


def disj(parts) -> Formula:
    parts = list(parts)
    if not parts:
        return FALSE
    out = parts[0]
    for x in parts[1:]:
        out = Or(out, x)
    return out


def mod_exists(c: int, var: int, body: Formula, p: int) -> ModExists:
    return ModExists(c % p, var, body)


# ---------------------------------------------------------------------------
# traversal


def _children(phi):
    if isinstance(phi, Not):
        return (phi.body,)
    if isinstance(phi, (And, Or)):
        return (phi.left, phi.right)
    if isinstance(phi, ModExists):
        return (phi.body,)
    return ()


def free_vars(phi: Formula) -> frozenset[int]:
    return _free_vars(phi, {})


def _free_vars(phi, memo) -> frozenset[int]:
    key = id(phi)
    if key in memo:
        return memo[key][1]
    if isinstance(phi, (Eq, Edge)):
        out = frozenset((phi.i, phi.j))
    elif isinstance(phi, ModExists):
        out = _free_vars(phi.body, memo) - {phi.var}
    else:
        out = frozenset().union(*(_free_vars(c, memo) for c in _children(phi)))
    memo[key] = (phi, out)
    return out


def variables(phi: Formula) -> frozenset[int]:
    """Every variable index occurring in ``phi``, bound or free."""
    seen: set[int] = set()
    out: set[int] = set()
    stack = [phi]
    while stack:
        x = stack.pop()
        if id(x) in seen:
            continue
        seen.add(id(x))
        if isinstance(x, (Eq, Edge)):
            out |= {x.i, x.j}
        elif isinstance(x, ModExists):
            out.add(x.var)
        stack.extend(_children(x))
    return frozenset(out)


def size(phi: Formula) -> int:
    """Number of nodes in the formula tree (shared subformulas counted each time)."""
    memo: dict[int, int] = {}

    def rec(x):
        if id(x) not in memo:
            memo[id(x)] = 1 + sum(rec(c) for c in _children(x))
        return memo[id(x)]

    return rec(phi)


def depth(phi: Formula) -> int:
    return 1 + max((depth(c) for c in _children(phi)), default=0)


# ---------------------------------------------------------------------------
# printing and parsing


def to_text(phi: Formula) -> str:
    if isinstance(phi, Top):
        return "true"
    if isinstance(phi, Eq):
        return f"x{phi.i}=x{phi.j}"
    if isinstance(phi, Edge):
        return f"E(x{phi.i},x{phi.j})"
    if isinstance(phi, Not):
        return "!" + to_text(phi.body)
    if isinstance(phi, And):
        return f"({to_text(phi.left)}&{to_text(phi.right)})"
    if isinstance(phi, Or):
        return f"({to_text(phi.left)}|{to_text(phi.right)})"
    if isinstance(phi, ModExists):
        return f"E[{phi.c}]x{phi.var}.{to_text(phi.body)}"
    raise TypeError(type(phi).__name__)


_TOKEN = re.compile(r"\s*(true|E\[\d+\]x\d+\.|E\(x\d+,x\d+\)|x\d+=x\d+|[!&|()])")


def parse(text: str) -> Formula:
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise FormulaError(f"unexpected input at offset {pos}: {text[pos:pos + 10]!r}")
        tokens.append(m.group(1))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    out, i = _parse(tokens, 0)
    if i != len(tokens):
        raise FormulaError(f"trailing input after token {i}")
    return out


def _parse(tokens, i):
    if i >= len(tokens):
        raise FormulaError("unexpected end of formula")
    t = tokens[i]
    if t == "true":
        return TRUE, i + 1
    if t == "!":
        body, j = _parse(tokens, i + 1)
        return Not(body), j
    if t.startswith("E["):
        m = re.fullmatch(r"E\[(\d+)\]x(\d+)\.", t)
        body, j = _parse(tokens, i + 1)
        return ModExists(int(m.group(1)), int(m.group(2)), body), j
    if t.startswith("E("):
        m = re.fullmatch(r"E\(x(\d+),x(\d+)\)", t)
        return Edge(int(m.group(1)), int(m.group(2))), i + 1
    m = re.fullmatch(r"x(\d+)=x(\d+)", t)
    if m:
        return Eq(int(m.group(1)), int(m.group(2))), i + 1
    if t == "(":
        left, j = _parse(tokens, i + 1)
        if j >= len(tokens) or tokens[j] not in "&|":
            raise FormulaError("expected & or | inside parentheses")
        op = tokens[j]
        right, j = _parse(tokens, j + 1)
        if j >= len(tokens) or tokens[j] != ")":
            raise FormulaError("missing closing parenthesis")
        return (And if op == "&" else Or)(left, right), j + 1
    raise FormulaError(f"unexpected token {t!r}")


# ---------------------------------------------------------------------------
# semantics


def model_check(phi: Formula, g: Graph, assignment: Mapping[int, int], p: int) -> bool:
    """Does ``g`` satisfy ``phi`` under ``assignment`` (variable index -> vertex)?"""
    fv_memo: dict = {}
    missing = _free_vars(phi, fv_memo) - set(assignment)
    if missing:
        raise FormulaError(f"unbound variables: {sorted(missing)}")
    memo: dict = {}
    verts = g.vertices
    adj = {v: g.neighbors(v) for v in verts}

    def ev(x, env: dict) -> bool:
        fv = _free_vars(x, fv_memo)
        key = (id(x), tuple(sorted((v, env[v]) for v in fv)))
        hit = memo.get(key)
        if hit is not None:
            return hit
        if isinstance(x, Top):
            res = True
        elif isinstance(x, Eq):
            res = env[x.i] == env[x.j]
        elif isinstance(x, Edge):
            res = env[x.j] in adj[env[x.i]]
        elif isinstance(x, Not):
            res = not ev(x.body, env)
        elif isinstance(x, And):
            res = ev(x.left, env) and ev(x.right, env)
        elif isinstance(x, Or):
            res = ev(x.left, env) or ev(x.right, env)
        elif isinstance(x, ModExists):
            count = 0
            inner = dict(env)
            for v in verts:
                inner[x.var] = v
                if ev(x.body, inner):
                    count += 1
            res = (count - x.c) % p == 0
        else:
            raise TypeError(type(x).__name__)
        memo[key] = res
        return res

    return ev(phi, dict(assignment))


def random_formula(rng, depth: int, nvars: int, p: int) -> Formula:
    """Random formula over variables ``1..nvars`` with nesting depth at most ``depth``."""
    if depth == 0 or rng.random() < 0.2:
        r = rng.random()
        i, j = rng.randint(1, nvars), rng.randint(1, nvars)
        if r < 0.2:
            return TRUE
        return Eq(i, j) if r < 0.5 else Edge(i, j)
    kind = rng.choice(("not", "and", "or", "exists", "exists"))
    if kind == "not":
        return Not(random_formula(rng, depth - 1, nvars, p))
    if kind == "and":
        return And(random_formula(rng, depth - 1, nvars, p), random_formula(rng, depth - 1, nvars, p))
    if kind == "or":
        return Or(random_formula(rng, depth - 1, nvars, p), random_formula(rng, depth - 1, nvars, p))
    return ModExists(rng.randrange(p), rng.randint(1, nvars), random_formula(rng, depth - 1, nvars, p))
