"""Exact linear algebra over Z, Z_n and F_p.

Matrices are lists of lists of Python ints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .groups import FiniteAbelianGroup

Matrix = list[list[int]]


def identity(n: int) -> Matrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def zeros(r: int, c: int) -> Matrix:
    return [[0] * c for _ in range(r)]


def matmul(a: Matrix, b: Matrix, mod: int | None = None) -> Matrix:
    if not a:
        return []
    inner = len(b)
    cols = len(b[0]) if b else 0
    if any(len(row) != inner for row in a):
        raise ValueError("dimension mismatch in matmul")
    bt = list(zip(*b)) if b else [() for _ in range(cols)]
    out = [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]
    if mod is not None:
        out = [[x % mod for x in row] for row in out]
    return out


def transpose(a: Matrix) -> Matrix:
    return [list(r) for r in zip(*a)]


def determinant(a: Matrix) -> int:
    """Fraction-free Bareiss elimination."""
    n = len(a)
    if n == 0:
        return 1
    m = [list(r) for r in a]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if m[i][k] != 0), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


# ---------------------------------------------------------------------------
# Smith normal form


@dataclass
class SmithForm:
    u: Matrix
    d: Matrix
    v: Matrix

    @property
    def diagonal(self) -> list[int]:
        return [self.d[i][i] for i in range(min(len(self.d), len(self.d[0]) if self.d else 0))]


def smith_normal_form(a: Matrix, check: bool = True) -> SmithForm:
    """Return unimodular ``u``, ``v`` and diagonal ``d`` with ``u a v = d``.

    Diagonal entries are nonnegative and each divides the next.
    """
    rows = len(a)
    cols = len(a[0]) if rows else 0
    if any(len(r) != cols for r in a):
        raise ValueError("ragged matrix")
    d = [list(map(int, r)) for r in a]
    u = identity(rows)
    v = identity(cols)

    def swap_rows(i, j):
        d[i], d[j] = d[j], d[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for r in d:
            r[i], r[j] = r[j], r[i]
        for r in v:
            r[i], r[j] = r[j], r[i]

    def add_row(src, dst, c):  # row dst += c * row src
        d[dst] = [x + c * y for x, y in zip(d[dst], d[src])]
        u[dst] = [x + c * y for x, y in zip(u[dst], u[src])]

    def add_col(src, dst, c):  # col dst += c * col src
        for r in d:
            r[dst] += c * r[src]
        for r in v:
            r[dst] += c * r[src]

    t = 0
    while t < min(rows, cols):
        # pivot: smallest nonzero absolute value in the remaining block
        best = None
        for i in range(t, rows):
            for j in range(t, cols):
                if d[i][j] != 0 and (best is None or abs(d[i][j]) < abs(d[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        swap_rows(t, best[0])
        swap_cols(t, best[1])
        while True:
            done = True
            for i in range(t + 1, rows):
                if d[i][t] != 0:
                    q = d[i][t] // d[t][t]
                    add_row(t, i, -q)
                    if d[i][t] != 0:
                        done = False
            for j in range(t + 1, cols):
                if d[t][j] != 0:
                    q = d[t][j] // d[t][t]
                    add_col(t, j, -q)
                    if d[t][j] != 0:
                        done = False
            if done:
                # divisibility of the rest of the block by the pivot
                bad = next(((i, j) for i in range(t + 1, rows) for j in range(t + 1, cols)
                            if d[i][j] % d[t][t] != 0), None)
                if bad is None:
                    break
                add_row(bad[0], t, 1)
                continue
            # move the smallest entry of row/col t to the pivot and retry
            cand = [(abs(d[i][t]), i, t) for i in range(t, rows) if d[i][t] != 0]
            cand += [(abs(d[t][j]), t, j) for j in range(t, cols) if d[t][j] != 0]
            _, i, j = min(cand)
            if i != t:
                swap_rows(t, i)
            if j != t:
                swap_cols(t, j)
        if d[t][t] < 0:
            d[t] = [-x for x in d[t]]
            u[t] = [-x for x in u[t]]
        t += 1
    res = SmithForm(u, d, v)
    if check:
        check_smith_form(a, res)
    return res


def check_smith_form(a: Matrix, res: SmithForm) -> None:
    """Raise ``AssertionError`` unless every Smith-form postcondition holds."""
    rows = len(a)
    cols = len(a[0]) if rows else 0
    if rows and cols and matmul(matmul(res.u, a), res.v) != res.d:
        raise AssertionError("u a v != d")
    if abs(determinant(res.u)) != 1 or abs(determinant(res.v)) != 1:
        raise AssertionError("transform is not unimodular")
    for i in range(rows):
        for j in range(cols):
            if i != j and res.d[i][j] != 0:
                raise AssertionError("d is not diagonal")
    diag = res.diagonal
    for x, y in zip(diag, diag[1:]):
        if x < 0 or (x == 0 and y != 0) or (x != 0 and y % x != 0):
            raise AssertionError(f"divisibility chain broken: {diag}")


# ---------------------------------------------------------------------------
# counting solutions over finite abelian groups


def _solve_mod(sf: SmithForm, b: Sequence[int], n: int) -> tuple[int, list[int] | None]:
    """Count solutions of ``a x = b (mod n)`` given the Smith form of ``a``."""
    rows = len(sf.u)
    cols = len(sf.v)
    c = [sum(x * y for x, y in zip(row, b)) % n for row in sf.u]
    count = 1
    y = [0] * cols
    for i in range(rows):
        di = sf.d[i][i] if i < cols else 0
        g = math.gcd(di, n)
        if c[i] % g != 0:
            return 0, None
        if i < cols:
            count *= g
            if di % n != 0:
                nn = n // g
                y[i] = (c[i] // g) * pow((di // g) % nn, -1, nn) % nn if nn > 1 else 0
    count *= n ** max(0, cols - rows)
    x = [sum(vr[j] * y[j] for j in range(cols)) % n for vr in sf.v]
    return count, x


def count_solutions(a: Matrix, b: Sequence, gamma: FiniteAbelianGroup,
                    ncols: int | None = None) -> tuple[int, list | None]:
    """Number of ``x`` in ``gamma^cols`` with ``a x = b``, plus a witness.

    ``b`` holds one group element per row.  The system splits into one
    independent system per cyclic factor of ``gamma``; the count is their
    product.  The witness is the back-substituted particular solution
    (all free coordinates zero), given iff the count is positive.
    """
    rows = len(a)
    cols = len(a[0]) if rows else (ncols or 0)
    if rows and ncols is not None and ncols != cols:
        raise ValueError("column count mismatch")
    if len(b) != rows:
        raise ValueError(f"right-hand side has {len(b)} entries for {rows} rows")
    if any(len(r) != cols for r in a):
        raise ValueError("ragged matrix")
    b = [gamma.element(x) for x in b]
    if rows == 0:
        return gamma.order ** cols, [gamma.zero() for _ in range(cols)]
    sf = smith_normal_form(a)
    total = 1
    parts = []
    for comp, n in enumerate(gamma.cyclic_orders):
        cnt, x = _solve_mod(sf, [e[comp] for e in b], n)
        if cnt == 0:
            return 0, None
        total *= cnt
        parts.append(x)
    witness = [tuple(parts[comp][j] for comp in range(gamma.rank)) for j in range(cols)]
    return total, witness


def satisfies(a: Matrix, x: Sequence, b: Sequence, gamma: FiniteAbelianGroup) -> bool:
    for row, rhs in zip(a, b):
        acc = gamma.zero()
        for coef, xe in zip(row, x):
            if coef:
                acc = gamma.add(acc, gamma.scale(coef, xe))
        if acc != gamma.element(rhs):
            return False
    return True


# ---------------------------------------------------------------------------
# F_p


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


def _require_prime(p: int) -> None:
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")


def fp_row_reduce(m: Matrix, p: int) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form mod ``p`` and the pivot columns."""
    _require_prime(p)
    a = [[x % p for x in row] for row in m]
    rows = len(a)
    cols = len(a[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        piv = next((i for i in range(r, rows) if a[i][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = pow(a[r][c], -1, p)
        a[r] = [x * inv % p for x in a[r]]
        for i in range(rows):
            if i != r and a[i][c]:
                f = a[i][c]
                a[i] = [(x - f * y) % p for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    return a, pivots


def fp_rank(m: Matrix, p: int) -> int:
    return len(fp_row_reduce(m, p)[1])


def fp_nullspace(m: Matrix, p: int, ncols: int | None = None) -> list[list[int]]:
    """Basis of ``{x : m x = 0}``, one vector per free column in increasing order."""
    rows = len(m)
    cols = len(m[0]) if rows else (ncols or 0)
    red, pivots = fp_row_reduce(m, p) if rows else ([], [])
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for f in free:
        x = [0] * cols
        x[f] = 1
        for r, pc in enumerate(pivots):
            x[pc] = (-red[r][f]) % p
        basis.append(x)
    return basis


def fp_solve(m: Matrix, b: Sequence[int], p: int) -> list[int] | None:
    """One solution of ``m x = b`` mod ``p`` (free variables zero), or ``None``."""
    rows = len(m)
    cols = len(m[0]) if rows else 0
    aug = [list(row) + [b[i]] for i, row in enumerate(m)]
    red, pivots = fp_row_reduce(aug, p)
    if cols in pivots:
        return None
    x = [0] * cols
    for r, pc in enumerate(pivots):
        x[pc] = red[r][cols]
    return x


def fp_inverse(m: Matrix, p: int) -> Matrix | None:
    n = len(m)
    aug = [list(row) + [int(i == j) for j in range(n)] for i, row in enumerate(m)]
    red, pivots = fp_row_reduce(aug, p)
    if pivots[:n] != list(range(n)):
        return None
    return [row[n:] for row in red]


def fp_is_invertible(m: Matrix, p: int) -> bool:
    return fp_rank(m, p) == len(m)
