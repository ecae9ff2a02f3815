"""Harmonic shelf algorithm for (multiple-choice) strip packing."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .harmonic import HarmonicContext, base_width, type_vector, wf_volume
from .model import InputError, Item, Itemset, Packing, PackingKind, Placement
from .results import Bound, SolveResult, check_bounds, greedy_prefixes, group_by
from .shelves import ShelfTree, hdh_unit_pack


@dataclass
class StripShelf:
    """A d-D shelf: a (d-1)-D unit packing of item bases plus a height."""

    btype: tuple[int, ...]
    height: Fraction
    items: list[Item]
    base_positions: list[tuple[Fraction, ...]]
    tree: ShelfTree


def _require_2d(items: Sequence[Item]) -> int:
    dims = {i.d for i in items}
    if len(dims) > 1:
        raise InputError(f"mixed dimensions {sorted(dims)}")
    d = dims.pop() if dims else 2
    if d < 2:
        raise InputError("strip packing needs d >= 2")
    return d


def build_shelves(items: Sequence[Item], ctx: HarmonicContext) -> list[StripShelf]:
    """Shelves grouped by base type, each class sorted by decreasing height.

    Within a class, a shelf is the minimal prefix whose bases reach
    harmonic area one.  Output is ordered by (base type, prefix index).
    """
    d = _require_2d(items)
    shelves = []
    classes = group_by(items, lambda i: type_vector(i.lengths, ctx, base_only=True))
    for bt, members in classes.items():
        members = sorted(members, key=lambda i: (-i.height, i.id))
        for prefix in greedy_prefixes(members, lambda i: base_width(i.lengths, ctx)):
            unit = hdh_unit_pack(prefix, bt, ctx, dims=d - 1)
            shelves.append(StripShelf(bt, prefix[0].height, prefix,
                                      [pos for _, pos in unit.positions], unit.tree))
    return shelves


def stack_shelves(shelves: Sequence[StripShelf], offset: Fraction = Fraction(0), bin: int = 0) -> list[Placement]:
    out = []
    for s in shelves:
        for item, pos in zip(s.items, s.base_positions):
            out.append(Placement(item.id, pos + (offset,), item.lengths, bin, item.orientation))
        offset += s.height
    return out


def hdh_sp(items: Sequence[Item], ctx: HarmonicContext) -> SolveResult:
    items = list(items)
    d = _require_2d(items)
    shelves = build_shelves(items, ctx)
    placements = stack_shelves(shelves)
    height = sum((s.height for s in shelves), Fraction(0))
    packing = Packing(PackingKind.STRIP, (Fraction(1),) * (d - 1) + (height,), placements,
                      {0: [s.tree for s in shelves]})
    Q = len({s.btype for s in shelves})
    vol_wf = sum((wf_volume(i.lengths, ctx) for i in items), Fraction(0))
    bounds = [Bound("height < Q + vol(wf_k(I))", Q + vol_wf, height)] if items else []
    check_bounds(bounds)
    stats = {"Q": Q, "vol_wf": vol_wf, "height": height, "k": ctx.k,
             "shelf_heights": [s.height for s in shelves]}
    return SolveResult(packing, {}, stats, bounds)


def min_wf_member(itemset: Itemset, ctx: HarmonicContext) -> Item:
    return min(itemset.members, key=lambda m: (wf_volume(m.lengths, ctx), m.id, m.perm))


def hdh_mcsp(itemsets: Sequence[Itemset], ctx: HarmonicContext) -> SolveResult:
    chosen = {s.id: min_wf_member(s, ctx) for s in itemsets}
    result = hdh_sp(list(chosen.values()), ctx)
    result.assortment = chosen
    return result


def lower_bound_sp(items: Sequence[Item], ctx: HarmonicContext) -> Fraction:
    """Largest of volume, scaled harmonic base volume and tallest item."""
    items = list(items)
    if not items:
        return Fraction(0)
    d = items[0].d
    vol = sum((i.volume for i in items), Fraction(0))
    vol_wf = sum((wf_volume(i.lengths, ctx) for i in items), Fraction(0))
    return max(vol, vol_wf / ctx.T ** (d - 1), max(i.height for i in items))
