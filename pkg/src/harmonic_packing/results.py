"""Solver results, bound ledgers and shared partitioning helpers."""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .model import Item, Packing


@dataclass
class Bound:
    """One row of a bound ledger: ``observed <relation> value``."""

    name: str
    value: Fraction
    observed: Fraction
    relation: str = "<"

    @property
    def passed(self) -> bool:
        if self.relation == "<":
            return self.observed < self.value
        if self.relation == "<=":
            return self.observed <= self.value
        if self.relation == ">=":
            return self.observed >= self.value
        raise ValueError(self.relation)


@dataclass
class SolveResult:
    packing: Packing
    assortment: dict = field(default_factory=dict)   # itemset id -> chosen Item
    stats: dict = field(default_factory=dict)
    bounds: list[Bound] = field(default_factory=list)

    @property
    def bins(self) -> int:
        return self.packing.num_bins


class BoundViolation(AssertionError):
    pass


def check_bounds(bounds: Sequence[Bound]) -> None:
    for b in bounds:
        if not b.passed:
            raise BoundViolation(f"{b.name}: observed {b.observed} vs {b.relation} {b.value}")


def group_by(items: Sequence[Item], key) -> "OrderedDict[tuple, list[Item]]":
    """Partition preserving input order within classes; classes sorted by key."""
    groups: dict = {}
    for item in items:
        groups.setdefault(key(item), []).append(item)
    return OrderedDict(sorted(groups.items()))


def greedy_prefixes(seq: Sequence[Item], weight) -> list[list[Item]]:
    """Split ``seq`` into minimal prefixes whose weight reaches one (last may not)."""
    out = []
    cur: list[Item] = []
    acc = Fraction(0)
    for item in seq:
        cur.append(item)
        acc += weight(item)
        if acc >= 1:
            out.append(cur)
            cur, acc = [], Fraction(0)
    if cur:
        out.append(cur)
    return out
