"""Recursive shelf packing, canonical shelving and Next-Fit."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional, Sequence

from .harmonic import HarmonicContext, f_volume, type_vector
from .model import InputError, Item


class ContractError(AssertionError):
    """A routine was called with inputs violating its precondition."""


@dataclass
class ShelfTree:
    """One shelf along ``axis``; its children are shelves along ``axis - 1``.

    Leaves (``axis == 0``) hold a single item laid along the first axis.
    """

    axis: int
    offset: Fraction
    height: Fraction
    children: list["ShelfTree"] = field(default_factory=list)
    item_id: Optional[int] = None

    def shelf_heights(self) -> list[Fraction]:
        return [c.height for c in self.children]

    def leaves(self) -> list[int]:
        if self.item_id is not None:
            return [self.item_id]
        return [i for c in self.children for i in c.leaves()]


@dataclass
class UnitPack:
    """Result of packing a sequence into one unit bin."""

    positions: list[tuple[Any, tuple[Fraction, ...]]]
    tree: ShelfTree


def _pack(entries: list[tuple[int, tuple[Fraction, ...]]], t: tuple[int, ...], k: int,
          ctx: HarmonicContext, ids: Sequence[Optional[int]]) -> tuple[dict, list[ShelfTree]]:
    dims = len(t)
    if dims == 1:
        offset = Fraction(0)
        pos: dict = {}
        leaves = []
        for ref, lengths in entries:
            pos[ref] = (offset,)
            leaves.append(ShelfTree(0, offset, lengths[0], item_id=ids[ref]))
            offset += lengths[0]
        if offset > 1:
            raise ContractError(f"1D contents overflow the bin: {offset}")
        return pos, leaves

    axis = dims - 1
    if t[axis] == k:
        entries = sorted(entries, key=lambda e: -e[1][axis])
    pos = {}
    shelves: list[ShelfTree] = []
    members: list[list] = []
    start = 0
    offset = Fraction(0)
    while start < len(entries):
        width = Fraction(0)
        end = start
        while end < len(entries):
            width += f_volume(entries[end][1][:axis], ctx)
            end += 1
            if width >= 1:
                break
        prefix = entries[start:end]
        sub = [(ref, lengths[:axis]) for ref, lengths in prefix]
        sub_pos, sub_shelves = _pack(sub, t[:axis], k, ctx, ids)
        h = max(lengths[axis] for _, lengths in prefix)
        for ref, _ in prefix:
            pos[ref] = sub_pos[ref] + (offset,)
        shelves.append(ShelfTree(axis, offset, h, sub_shelves))
        members.append(prefix)
        offset += h
        start = end
    if offset > 1:
        raise ContractError(f"shelf heights sum to {offset} > 1 on axis {axis}")
    if t[axis] == k:
        # each later shelf is no taller than the harmonic base volume of the previous one
        for j in range(1, len(shelves)):
            prev = sum(f_volume(lengths[:axis], ctx) * lengths[axis] for _, lengths in members[j - 1])
            if shelves[j].height > prev:
                raise ContractError("shelf height exceeds wf-volume of the previous shelf")
    return pos, shelves


def hdh_unit_pack(seq: Sequence[Item], t: Optional[Sequence[int]], ctx: HarmonicContext,
                  dims: Optional[int] = None) -> UnitPack:
    """Pack a same-type sequence into one unit bin using recursive shelves.

    Only the first ``dims`` dimensions (default: all) are packed.  The
    caller guarantees that every item has type vector ``t`` on those
    dimensions and that all but the last item have harmonic volume below
    one.  Item order is kept unless the last packed axis is of the small
    class, in which case items are sorted by decreasing length on it.
    """
    seq = list(seq)
    if not seq:
        raise ContractError("empty sequence")
    dims = dims if dims is not None else seq[0].d
    if t is None:
        t = type_vector(seq[0].lengths[:dims], ctx)
    t = tuple(t)
    if len(t) != dims:
        raise ContractError(f"type vector {t} does not have {dims} entries")
    for item in seq:
        if type_vector(item.lengths[:dims], ctx) != t:
            raise ContractError(f"item {item.id} does not have type {t}")
    head = sum((f_volume(i.lengths[:dims], ctx) for i in seq[:-1]), Fraction(0))
    if head >= 1:
        raise ContractError(f"harmonic volume of all but the last item is {head} >= 1")
    entries = [(n, item.lengths[:dims]) for n, item in enumerate(seq)]
    pos, shelves = _pack(entries, t, ctx.k, ctx, [item.id for item in seq])
    total = sum((s.height for s in shelves), Fraction(0))
    root = ShelfTree(dims, Fraction(0), total, shelves)
    return UnitPack([(item, pos[n]) for n, item in enumerate(seq)], root)


# -- canonical shelving --------------------------------------------------------

@dataclass(eq=False)
class Rect:
    """A rounded 2D item: ``width`` = harmonic base width, ``height`` = last length."""

    width: Fraction
    height: Fraction
    id: int = 0
    item: Optional[Item] = None
    itemset: Optional[int] = None

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise InputError(f"rect {self.id} has non-positive side")

    @property
    def area(self) -> Fraction:
        return self.width * self.height

    def __repr__(self) -> str:
        return f"Rect({self.id}, w={self.width}, h={self.height})"


@dataclass
class Piece:
    rect: Rect
    width: Fraction
    slice_index: int = 0   # 0 unsliced, 1 leading slice, 2 trailing slice


@dataclass
class SliceRecord:
    rect_id: int
    widths: tuple[Fraction, Fraction]


@dataclass
class Shelf:
    height: Fraction
    pieces: list[Piece] = field(default_factory=list)

    @property
    def used(self) -> Fraction:
        return sum((p.width for p in self.pieces), Fraction(0))


def shelving_order(rects: Sequence[Rect]) -> list[Rect]:
    """Non-increasing height; ties by larger width, then smaller id."""
    return sorted(rects, key=lambda r: (-r.height, -r.width, r.id))


def canonical_shelving(rects: Sequence[Rect]) -> tuple[list[Shelf], list[SliceRecord]]:
    """Greedy tight shelves of width one, slicing at shelf boundaries.

    Every rect must have width at most one, so it is cut at most once.
    """
    shelves: list[Shelf] = []
    records: list[SliceRecord] = []
    free = Fraction(0)
    for r in shelving_order(rects):
        if r.width > 1:
            raise InputError(f"rect {r.id} is wider than a shelf")
        if free == 0:
            shelves.append(Shelf(r.height))
            free = Fraction(1)
        if r.width <= free:
            shelves[-1].pieces.append(Piece(r, r.width, 0))
            free -= r.width
            continue
        first, rest = free, r.width - free
        shelves[-1].pieces.append(Piece(r, first, 1))
        shelves.append(Shelf(r.height, [Piece(r, rest, 2)]))
        free = 1 - rest
        records.append(SliceRecord(r.id, (first, rest)))
    return shelves, records


def is_predecessor(smaller: Sequence[Fraction], larger: Sequence[Fraction]) -> bool:
    """Whether ``smaller`` maps one-to-one into ``larger`` with no size increase."""
    a = sorted(smaller, reverse=True)
    b = sorted(larger, reverse=True)
    return len(a) <= len(b) and all(x <= y for x, y in zip(a, b))


# -- Next-Fit -------------------------------------------------------------------

def next_fit_1d(sizes: Sequence[Fraction], capacity: Fraction = Fraction(1)) -> list[list[int]]:
    """Sequential Next-Fit; returns the index lists of each bin."""
    bins: list[list[int]] = []
    load = Fraction(0)
    for n, s in enumerate(sizes):
        if s > capacity:
            raise InputError(f"size {s} exceeds capacity {capacity}")
        if not bins or load + s > capacity:
            bins.append([])
            load = Fraction(0)
        bins[-1].append(n)
        load += s
    return bins
