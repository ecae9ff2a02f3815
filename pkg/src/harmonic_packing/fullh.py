"""Full-harmonic bin packing for plain and multiple-choice instances."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .harmonic import HarmonicContext, f_volume, type_vector
from .model import InputError, Item, Itemset, Packing, PackingKind, Placement, unit_bin
from .results import Bound, SolveResult, check_bounds, greedy_prefixes, group_by
from .shelves import hdh_unit_pack


def fullh_bp(items: Sequence[Item], ctx: HarmonicContext) -> SolveResult:
    """Pack items class by class, one bin per minimal prefix of harmonic volume >= 1."""
    items = list(items)
    dims = {i.d for i in items}
    if len(dims) > 1:
        raise InputError(f"mixed dimensions {sorted(dims)}")
    d = dims.pop() if dims else 1
    classes = group_by(items, lambda i: type_vector(i.lengths, ctx))
    placements: list[Placement] = []
    shelves = {}
    b = 0
    for t, members in classes.items():
        for prefix in greedy_prefixes(members, lambda i: f_volume(i.lengths, ctx)):
            unit = hdh_unit_pack(prefix, t, ctx)
            for item, pos in unit.positions:
                placements.append(Placement(item.id, pos, item.lengths, b, item.orientation))
            shelves[b] = unit.tree
            b += 1
    vol_f = sum((f_volume(i.lengths, ctx) for i in items), Fraction(0))
    Q = len(classes)
    packing = Packing(PackingKind.BIN, unit_bin(d), placements, shelves)
    bounds = [Bound("bins < Q + vol(f_k(I))", Q + vol_f, Fraction(b))] if items else []
    check_bounds(bounds)
    return SolveResult(packing, {}, {"Q": Q, "vol_f": vol_f, "k": ctx.k}, bounds)


def min_f_member(itemset: Itemset, ctx: HarmonicContext, measure=f_volume) -> Item:
    return min(itemset.members, key=lambda m: (measure(m.lengths, ctx), m.id, m.perm))


def fullh_mcbp(itemsets: Sequence[Itemset], ctx: HarmonicContext) -> SolveResult:
    """Choose the least harmonic volume member of every itemset, then run fullh."""
    chosen = {s.id: min_f_member(s, ctx) for s in itemsets}
    result = fullh_bp(list(chosen.values()), ctx)
    result.assortment = chosen
    flat = [m for s in itemsets for m in s.members]
    result.stats["Q_flat"] = len({type_vector(m.lengths, ctx) for m in flat})
    return result


def lower_bound_bp(items: Sequence[Item], ctx: HarmonicContext) -> Fraction:
    """``max(vol(I), vol(f_k(I)) / T_k^d)``; both bound the optimum from below."""
    items = list(items)
    if not items:
        return Fraction(0)
    d = items[0].d
    vol = sum((i.volume for i in items), Fraction(0))
    vol_f = sum((f_volume(i.lengths, ctx) for i in items), Fraction(0))
    return max(vol, vol_f / ctx.T**d)
