"""Shelf Next-Fit bin packing and the harmonic multiple-choice knapsack."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .harmonic import HarmonicContext, H_of, prod, wf_volume
from .model import Item, Itemset, Packing, PackingKind, Placement, unit_bin
from .results import Bound, SolveResult, check_bounds
from .shelves import next_fit_1d
from .strip import StripShelf, build_shelves, stack_shelves


def hdh_nf(items: Sequence[Item], ctx: HarmonicContext) -> SolveResult:
    """Strip shelves packed into bins: tallest shelf per base type alone, rest by Next-Fit."""
    items = list(items)
    d = items[0].d if items else 2
    shelves = build_shelves(items, ctx) if items else []
    firsts: list[StripShelf] = []
    rest: list[StripShelf] = []
    seen = set()
    for s in shelves:
        (rest if s.btype in seen else firsts).append(s)
        seen.add(s.btype)
    placements: list[Placement] = []
    trees = {}
    for b, s in enumerate(firsts):
        placements += stack_shelves([s], bin=b)
        trees[b] = [s.tree]
    groups = next_fit_1d([s.height for s in rest])
    for g, idx in enumerate(groups):
        b = len(firsts) + g
        placements += stack_shelves([rest[n] for n in idx], bin=b)
        trees[b] = [rest[n].tree for n in idx]
    bins = len(firsts) + len(groups)
    Q = len(firsts)
    vol_wf = sum((wf_volume(i.lengths, ctx) for i in items), Fraction(0))
    bounds = [Bound("bins <= Q + ceil(2 vol(wf_k(I)))", Fraction(Q + math.ceil(2 * vol_wf)),
                    Fraction(bins), "<=")] if items else []
    check_bounds(bounds)
    packing = Packing(PackingKind.BIN, unit_bin(d), placements, trees)
    return SolveResult(packing, {}, {"Q": Q, "vol_wf": vol_wf, "k": ctx.k}, bounds)


@dataclass
class KnapsackSelection:
    chosen: dict = field(default_factory=dict)   # itemset index -> member index
    profit: Fraction = Fraction(0)
    size: Fraction = Fraction(0)


def mcks_1d_fptas(itemsets: Sequence[Sequence[tuple[Fraction, Fraction]]], eps: Fraction,
                  capacity: Fraction = Fraction(1)) -> KnapsackSelection:
    """Profit-scaling DP for 1D multiple-choice knapsack.

    At most one ``(size, profit)`` pair per itemset is chosen.  Profits are
    scaled by ``mu = eps * P_max / (2n)`` and floored; the DP keeps the
    minimum total size for every scaled profit level.  Each chosen pair loses
    less than ``mu``, so the result is within ``eps * P_max / 2`` of optimal.
    """
    eps = Fraction(eps)
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    cands = [[(n, Fraction(s), Fraction(p)) for n, (s, p) in enumerate(group) if Fraction(s) <= capacity]
             for group in itemsets]
    pmax = max((p for group in cands for _, _, p in group), default=Fraction(0))
    if pmax == 0:
        return KnapsackSelection()
    n = len(itemsets)
    mu = eps * pmax / (2 * n)
    # dp[level] = (size, chosen) ; chosen as tuple of (set index, member index)
    dp: dict[int, tuple[Fraction, tuple]] = {0: (Fraction(0), ())}
    for j, group in enumerate(cands):
        nxt = dict(dp)
        for level, (size, chosen) in dp.items():
            for m, s, p in group:
                lv = level + math.floor(p / mu)
                tot = size + s
                if tot > capacity:
                    continue
                cur = nxt.get(lv)
                if cur is None or tot < cur[0]:
                    nxt[lv] = (tot, chosen + ((j, m),))
        dp = nxt
    level = max(dp)
    size, chosen = dp[level]
    picks = dict(chosen)
    profit = sum((Fraction(itemsets[j][m][1]) for j, m in picks.items()), Fraction(0))
    return KnapsackSelection(picks, profit, size)


K_KNAPSACK = 3


def knapsack_size(item: Item, ctx: HarmonicContext) -> Fraction:
    """``vol(wH_3(i))``: harmonic weights on the base, raw height."""
    return prod(H_of(x, ctx) for x in item.lengths[:-1]) * item.height


def hdh_ks(itemsets: Sequence[Itemset], eps: Fraction,
           ctx: Optional[HarmonicContext] = None) -> SolveResult:
    """Harmonic multiple-choice knapsack with ``k`` fixed to 3."""
    ctx = ctx or HarmonicContext(K_KNAPSACK)
    if ctx.k != K_KNAPSACK:
        raise ValueError("the knapsack reduction is defined for k = 3 only")
    itemsets = list(itemsets)
    d = itemsets[0].d if itemsets else 2
    sizes = [[(knapsack_size(m, ctx), m.profit or Fraction(0)) for m in s.members] for s in itemsets]
    sel = mcks_1d_fptas(sizes, eps) if itemsets else KnapsackSelection()
    J = [itemsets[j].members[m] for j, m in sorted(sel.chosen.items())]
    stats = {"k": ctx.k, "eps": Fraction(eps), "fptas_profit": sel.profit,
             "selected": len(J)}
    if not J:
        stats.update(bins_inner=0, profit=Fraction(0), selection=[])
        return SolveResult(Packing(PackingKind.BIN, unit_bin(d), []), {}, stats, [])
    inner = hdh_nf(J, ctx)
    by_bin = inner.packing.by_bin()
    profit_of = {m.id: (m.profit or Fraction(0)) for m in J}
    best_bin = max(sorted(by_bin), key=lambda b: sum(profit_of[p.item_id] for p in by_bin[b]))
    placements = [Placement(p.item_id, p.position, p.lengths, 0, p.orientation) for p in by_bin[best_bin]]
    profit = sum((profit_of[p.item_id] for p in placements), Fraction(0))
    b = len(by_bin)
    vol_wh = sum((knapsack_size(m, ctx) for m in J), Fraction(0))
    inner_bound = (Fraction(3) ** (d - 1) + math.ceil(2 * ctx.T ** (d - 1) * vol_wh))
    bounds = [Bound("b <= 3^(d-1) + ceil(2 T_3^(d-1) vol(wH_3(J)))", Fraction(inner_bound), Fraction(b), "<="),
              Bound("b <= 3^d", Fraction(3) ** d, Fraction(b), "<=")]
    check_bounds(bounds)
    chosen_ids = {p.item_id for p in placements}
    assortment = {itemsets[j].id: itemsets[j].members[m] for j, m in sel.chosen.items()
                  if itemsets[j].members[m].id in chosen_ids}
    stats.update(bins_inner=b, profit=profit, selected_profit=sum(profit_of.values(), Fraction(0)),
                 selection=J)
    packing = Packing(PackingKind.BIN, unit_bin(d), placements)
    return SolveResult(packing, assortment, stats, bounds)
