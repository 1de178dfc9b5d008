"""Finite abelian groups as products of cyclic groups."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence

GroupElement = tuple  # residues, one per cyclic factor


@dataclass(frozen=True)
class FiniteAbelianGroup:
    """Z_{n1} x ... x Z_{nr}."""

    cyclic_orders: tuple[int, ...]

    def __post_init__(self):
        orders = tuple(int(x) for x in self.cyclic_orders)
        if not orders:
            raise ValueError("need at least one cyclic factor")
        if any(x < 1 for x in orders):
            raise ValueError("cyclic orders must be >= 1")
        object.__setattr__(self, "cyclic_orders", orders)

    @classmethod
    def cyclic(cls, n: int) -> "FiniteAbelianGroup":
        return cls((n,))

    @classmethod
    def parse(cls, text: str) -> "FiniteAbelianGroup":
        """``"4"`` is Z_4, ``"2x2"`` (or ``"2,2"``) is Z_2 x Z_2."""
        parts = text.replace(",", "x").replace("*", "x").split("x")
        return cls(tuple(int(p) for p in parts if p.strip()))

    @property
    def order(self) -> int:
        out = 1
        for x in self.cyclic_orders:
            out *= x
        return out

    @property
    def rank(self) -> int:
        return len(self.cyclic_orders)

    def zero(self) -> GroupElement:
        return (0,) * self.rank

    def one(self) -> GroupElement:
        """The element with residue 1 in every factor."""
        return tuple(1 % n for n in self.cyclic_orders)

    def element(self, value) -> GroupElement:
        """Coerce an int (broadcast) or a sequence of residues into the group."""
        if isinstance(value, int):
            value = (value,) * self.rank
        value = tuple(value)
        if len(value) != self.rank:
            raise ValueError(f"expected {self.rank} residues, got {value}")
        return tuple(int(x) % n for x, n in zip(value, self.cyclic_orders))

    def add(self, a: GroupElement, b: GroupElement) -> GroupElement:
        return tuple((x + y) % n for x, y, n in zip(a, b, self.cyclic_orders))

    def sub(self, a: GroupElement, b: GroupElement) -> GroupElement:
        return tuple((x - y) % n for x, y, n in zip(a, b, self.cyclic_orders))

    def neg(self, a: GroupElement) -> GroupElement:
        return tuple((-x) % n for x, n in zip(a, self.cyclic_orders))

    def scale(self, c: int, a: GroupElement) -> GroupElement:
        return tuple((c * x) % n for x, n in zip(a, self.cyclic_orders))

    def sum(self, items) -> GroupElement:
        out = self.zero()
        for x in items:
            out = self.add(out, x)
        return out

    def elements(self) -> Iterator[GroupElement]:
        return itertools.product(*(range(n) for n in self.cyclic_orders))

    def vectors(self, length: int) -> Iterator[tuple[GroupElement, ...]]:
        return itertools.product(list(self.elements()), repeat=length)

    def __str__(self) -> str:
        return "x".join(f"Z{n}" for n in self.cyclic_orders)


def group_vector(gamma: FiniteAbelianGroup, index: Sequence, values=None) -> dict:
    """A total map ``index -> element``; missing entries default to zero."""
    values = values or {}
    if not isinstance(values, Mapping):
        values = dict(zip(index, values))
    extra = set(values) - set(index)
    if extra:
        raise ValueError(f"entries outside the index set: {sorted(extra)}")
    return {k: gamma.element(values.get(k, 0)) for k in index}


def vector_sum(gamma: FiniteAbelianGroup, vec: Mapping) -> GroupElement:
    return gamma.sum(vec.values())
