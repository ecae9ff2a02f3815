"""Harmonic guess-and-pack for multiple-choice bin packing.

Items are rounded to rectangles (harmonic base width by height).  Every
packing of empty shelves into bins with few distinct heights is guessed; a
DP then picks an assortment that fits the shelves, leaving the least small
area for the space outside them.  The best fractional packing is inflated
back to whole d-dimensional items with recursive shelves.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional, Sequence

from .harmonic import HarmonicContext, base_width, type_vector
from .model import InputError, Item, Itemset, Packing, PackingKind, Placement, compact_bins, unit_bin
from .results import Bound, SolveResult, check_bounds
from .shelves import ContractError, Rect, canonical_shelving, hdh_unit_pack, next_fit_1d


class BudgetExhausted(RuntimeError):
    """Plan enumeration hit its budget before any plan succeeded."""


def delta_of(eps: Fraction) -> Fraction:
    eps = Fraction(eps)
    if not 0 < eps <= 1:
        raise ValueError("epsilon must lie in (0, 1]")
    return eps / (2 + eps)


# -- rounding ------------------------------------------------------------------

@dataclass(frozen=True)
class RectSet:
    id: int
    members: tuple[Rect, ...]


def round_item(item: Item, ctx: HarmonicContext, itemset: Optional[int] = None) -> Rect:
    return Rect(base_width(item.lengths, ctx), item.height, item.id, item, itemset)


def round_instance(itemsets: Sequence[Itemset], ctx: HarmonicContext) -> list[RectSet]:
    out = []
    for s in itemsets:
        if s.d < 2:
            raise InputError("guess-and-pack needs d >= 2")
        out.append(RectSet(s.id, tuple(round_item(m, ctx, s.id) for m in s.members)))
    return out


def is_large(rect: Rect, delta: Fraction) -> bool:
    return rect.height > delta


# -- shelf plans ---------------------------------------------------------------

@dataclass(frozen=True)
class ShelfPlan:
    """Empty shelves packed into bins.

    ``bins[b][j]`` counts shelves of height ``heights[j]`` in bin ``b``.
    ``empty_bins`` is ``None`` to let :func:`choose_and_pack` add just
    enough shelf-free bins for the small items.
    """

    heights: tuple[Fraction, ...]
    bins: tuple[tuple[int, ...], ...]
    empty_bins: Optional[int] = None
    index: int = 0

    @property
    def t(self) -> int:
        return len(self.heights)

    def counts(self) -> list[int]:
        return [sum(c[j] for c in self.bins) for j in range(self.t)]

    def check(self, heights_available: Sequence[Fraction], delta: Fraction) -> None:
        if list(self.heights) != sorted(set(self.heights), reverse=True):
            raise ContractError("plan heights must be distinct and decreasing")
        if self.t > math.ceil(1 / delta**2):
            raise ContractError("too many distinct shelf heights")
        avail = set(heights_available)
        for h in self.heights:
            if h <= delta or h not in avail:
                raise ContractError(f"shelf height {h} is not a delta-large item height")
        for c in self.bins:
            if sum(n * h for n, h in zip(c, self.heights)) > 1:
                raise ContractError(f"configuration {c} overflows a bin")
        if any(n == 0 for n in self.counts()):
            raise ContractError("every plan height must be used by some shelf")


def configurations(heights: Sequence[Fraction]) -> list[tuple[int, ...]]:
    """All non-zero shelf-count vectors fitting one bin, in lexicographic order."""
    out = []

    def walk(j: int, room: Fraction, acc: list[int]) -> None:
        if j == len(heights):
            if any(acc):
                out.append(tuple(acc))
            return
        n = 0
        while n * heights[j] <= room:
            walk(j + 1, room - n * heights[j], acc + [n])
            n += 1

    walk(0, Fraction(1), [])
    return out


def plan_count_bound(N: int, n: int, delta: Fraction) -> int:
    """Closed-form cap on how many plans the enumeration may produce."""
    S = math.ceil(1 / delta**2)
    c = math.ceil(1 / delta)
    R = math.comb(S + c - 1, c - 1)
    return (N**S + 1) * (n + 1) ** R


class PlanStream:
    """Iterator over shelf plans; ``truncated`` is set if the budget stopped it."""

    def __init__(self, rect_sets: Sequence[RectSet], delta: Fraction, budget: Optional[int] = None,
                 max_shelf_bins: Optional[int] = None):
        self.delta = Fraction(delta)
        flat = [r for s in rect_sets for r in s.members]
        self.large_heights = sorted({r.height for r in flat if is_large(r, self.delta)}, reverse=True)
        self.n = len(rect_sets)
        self.max_shelf_bins = self.n if max_shelf_bins is None else min(max_shelf_bins, self.n)
        self.budget = budget
        self.truncated = False
        self.emitted = 0
        self.limit = math.ceil(1 / self.delta**2)
        self.configs = configurations(self.large_heights)

    def plans_with(self, b: int) -> Iterator[ShelfPlan]:
        """Plans using exactly ``b`` bins that hold shelves."""
        for combo in itertools.combinations_with_replacement(range(len(self.configs)), b):
            used = sorted({j for c in combo for j, x in enumerate(self.configs[c]) if x})
            if len(used) > self.limit:
                continue
            heights = tuple(self.large_heights[j] for j in used)
            bins = tuple(tuple(self.configs[c][j] for j in used) for c in combo)
            yield ShelfPlan(heights, bins)

    def __iter__(self) -> Iterator[ShelfPlan]:
        for b in range(self.max_shelf_bins + 1):
            for plan in self.plans_with(b):
                if self.budget is not None and self.emitted >= self.budget:
                    self.truncated = True
                    return
                yield ShelfPlan(plan.heights, plan.bins, plan.empty_bins, self.emitted)
                self.emitted += 1


def guess_shelves(rect_sets: Sequence[RectSet], delta: Fraction, budget: Optional[int] = None) -> PlanStream:
    return PlanStream(rect_sets, delta, budget)


# -- choose and pack -------------------------------------------------------------

@dataclass
class FractionalAssignment:
    """A shelf-based fractional packing of rounded items.

    ``bins[b]`` is the shelf-count vector of bin ``b`` (zeros for shelf-free
    bins).  ``large[j]`` lists ``(rect, width)`` slices placed on shelves of
    height ``heights[j]``; ``small`` holds the small rects, which live in the
    space above the shelves.
    """

    heights: tuple[Fraction, ...]
    bins: list[tuple[int, ...]]
    large: dict[int, list[tuple[Rect, Fraction]]]
    small: list[Rect]
    delta: Fraction
    chosen: dict = field(default_factory=dict)   # rect set id -> Rect
    small_area: Fraction = Fraction(0)
    plan_index: Optional[int] = None
    empty_bins: int = 0

    @property
    def m(self) -> int:
        return len(self.bins)

    @property
    def t(self) -> int:
        return len(self.heights)

    def counts(self) -> list[int]:
        return [sum(c[j] for c in self.bins) for j in range(self.t)]

    def shelf_height(self, b: int) -> Fraction:
        return sum((n * h for n, h in zip(self.bins[b], self.heights)), Fraction(0))

    def free_area(self) -> Fraction:
        return sum((1 - self.shelf_height(b) for b in range(self.m)), Fraction(0))

    def rects(self) -> list[Rect]:
        seen: dict[int, Rect] = {}
        for j in sorted(self.large):
            for r, _ in self.large[j]:
                seen.setdefault(id(r), r)
        return list(seen.values()) + list(self.small)

    def check(self) -> None:
        counts = self.counts()
        totals: dict[int, Fraction] = {}
        refs: dict[int, Rect] = {}
        for b in range(self.m):
            if self.shelf_height(b) > 1:
                raise ContractError(f"bin {b} shelves overflow")
        for j, slices in self.large.items():
            used = sum((w for _, w in slices), Fraction(0))
            if used > counts[j]:
                raise ContractError(f"class {j} holds width {used} on {counts[j]} shelves")
            for r, w in slices:
                if w <= 0 or r.height > self.heights[j] or not is_large(r, self.delta):
                    raise ContractError(f"bad slice of rect {r.id} in class {j}")
                totals[id(r)] = totals.get(id(r), Fraction(0)) + w
                refs[id(r)] = r
        for key, total in totals.items():
            if total != refs[key].width:
                raise ContractError(f"slices of rect {refs[key].id} sum to {total}")
        for r in self.small:
            if is_large(r, self.delta):
                raise ContractError(f"rect {r.id} is delta-large but outside the shelves")
        if sum((r.area for r in self.small), Fraction(0)) > self.free_area():
            raise ContractError("small items exceed the space outside shelves")

    def shelf_layout(self) -> dict[int, list[list[tuple[Rect, Fraction]]]]:
        """Slices of each class spread over its shelves, cutting at shelf ends."""
        out: dict[int, list[list[tuple[Rect, Fraction]]]] = {}
        counts = self.counts()
        for j in range(self.t):
            shelves: list[list[tuple[Rect, Fraction]]] = [[] for _ in range(counts[j])]
            s, free = 0, Fraction(1)
            for r, w in self.large.get(j, []):
                while w > 0:
                    if free == 0:
                        s, free = s + 1, Fraction(1)
                    part = min(w, free)
                    shelves[s].append((r, part))
                    free -= part
                    w -= part
            out[j] = shelves
        return out


def _reduce(u: tuple[int, ...], units: int, p: int) -> Optional[tuple[int, ...]]:
    """Consume ``units`` from the shortest fitting class ``p`` upwards; class 0 takes the rest."""
    v = list(u)
    x = units
    for r in range(p, 0, -1):
        take = min(x, v[r])
        v[r] -= take
        x -= take
    v[0] -= x
    if v[0] < 0:
        return None
    return tuple(v)


def _fit_class(height: Fraction, heights: Sequence[Fraction]) -> Optional[int]:
    """Index of the shortest shelf class at least ``height`` tall."""
    fit = None
    for r, h in enumerate(heights):
        if height <= h:
            fit = r
    return fit


def choose_and_pack(rect_sets: Sequence[RectSet], plan: ShelfPlan, delta: Fraction,
                    empty_bins: Optional[int] = None) -> Optional[FractionalAssignment]:
    """Pick one rect per set so the large ones fit the plan's shelves plus one extra.

    Large widths are rounded up to multiples of ``1/n``.  The DP minimises
    the area of the chosen small rects; the plan is accepted when that area
    fits outside the shelves.  Returns ``None`` if no assortment fits.
    """
    delta = Fraction(delta)
    n = len(rect_sets)
    heights = plan.heights
    t = len(heights)
    empty_bins = plan.empty_bins if empty_bins is None else empty_bins
    bins = list(plan.bins) + ([tuple(1 if j == 0 else 0 for j in range(t))] if t else [])
    counts = [sum(c[j] for c in bins) for j in range(t)]
    full = tuple(min(c * n, n * n) for c in counts)

    options: list[list[tuple[Rect, Optional[int], int]]] = []
    for s in rect_sets:
        opts = []
        for r in sorted(s.members, key=lambda r: r.id):
            if is_large(r, delta):
                p = _fit_class(r.height, heights)
                if p is None:
                    continue
                opts.append((r, p, math.ceil(r.width * n)))
            else:
                opts.append((r, None, 0))
        options.append(opts)

    memo: dict = {}

    def g(j: int, u: tuple[int, ...]) -> Optional[Fraction]:
        if j == 0:
            return Fraction(0)
        key = (j, u)
        if key in memo:
            return memo[key][0]
        best: Optional[Fraction] = None
        arg = None
        for idx, (r, p, units) in enumerate(options[j - 1]):
            if p is None:
                rest, cost = u, r.area
            else:
                rest, cost = _reduce(u, units, p), Fraction(0)
                if rest is None:
                    continue
            sub = g(j - 1, rest)
            if sub is None:
                continue
            if best is None or cost + sub < best:
                best, arg = cost + sub, (idx, rest)
        memo[key] = (best, arg)
        return best

    total = g(n, full)
    if total is None:
        return None
    free = sum((1 - sum(c * h for c, h in zip(cfg, heights)) for cfg in bins), Fraction(0))
    if empty_bins is None:
        empty_bins = max(0, math.ceil(total - free))
        if len(plan.bins) + empty_bins > max(n, 0):
            return None
    if total > free + empty_bins:
        return None
    bins += [tuple([0] * t)] * empty_bins

    large: dict[int, list[tuple[Rect, Fraction]]] = {j: [] for j in range(t)}
    small: list[Rect] = []
    chosen = {}
    u = full
    for j in range(n, 0, -1):
        idx, rest = memo[(j, u)][1]
        r, p, units = options[j - 1][idx]
        chosen[rect_sets[j - 1].id] = r
        if p is None:
            small.append(r)
        else:
            left = r.width
            for cls in range(p, -1, -1):
                took = (u[cls] - rest[cls]) if cls else units - sum(u[c] - rest[c] for c in range(1, p + 1))
                part = min(left, Fraction(took, n))
                if part > 0:
                    large[cls].append((r, part))
                    left -= part
            assert left == 0
        u = rest
    for j in large:
        large[j].reverse()
    small.reverse()
    fa = FractionalAssignment(heights, bins, large, small, delta, chosen, total, plan.index, empty_bins)
    fa.check()
    return fa


# -- inflate ----------------------------------------------------------------------

@dataclass
class Slot:
    """Space for one shelf: a bin and a range on the last axis."""

    bin: int
    offset: Fraction
    height: Fraction
    btype: Optional[tuple] = None


def _btype(r: Rect, ctx: HarmonicContext) -> tuple:
    return type_vector(r.item.lengths, ctx, base_only=True)


def inflate_bound(m: int, t: int, Q: int, delta: Fraction) -> Fraction:
    return Fraction(m) / (1 - delta) + t * (Q - 1) + 1 + delta * Q / (1 - delta)


def inflate(fa: FractionalAssignment, ctx: HarmonicContext) -> tuple[Packing, dict]:
    """Turn a fractional packing of rounded items into a packing of the whole items."""
    fa.check()
    rects = fa.rects()
    if not rects:
        return Packing(PackingKind.BIN, unit_bin(2), []), {"m": fa.m, "t": fa.t, "Q": 0, "bins": 0}
    d = rects[0].item.d
    if d < 2:
        raise InputError("inflate needs d >= 2")
    delta = fa.delta
    Q = len({_btype(r, ctx) for r in rects})

    # old shelf slots, bottom to top by class, and the free space above them
    old: dict[int, list[Slot]] = {j: [] for j in range(fa.t)}
    residual: list[tuple[int, Fraction]] = []
    for b, cfg in enumerate(fa.bins):
        z = Fraction(0)
        for j, count in enumerate(cfg):
            for _ in range(count):
                old[j].append(Slot(b, z, fa.heights[j]))
                z += fa.heights[j]
        residual.append((b, z))
    next_bin = fa.m

    # phase 1: one btype per shelf
    slots: list[Slot] = []
    overflow: list[Slot] = []
    for j in range(fa.t):
        widths: dict[tuple, Fraction] = {}
        for r, w in fa.large.get(j, []):
            q = _btype(r, ctx)
            widths[q] = widths.get(q, Fraction(0)) + w
        labels = [q for q in sorted(widths) for _ in range(math.ceil(widths[q]))]
        for n, q in enumerate(labels):
            if n < len(old[j]):
                s = old[j][n]
                slots.append(Slot(s.bin, s.offset, s.height, q))
            else:
                overflow.append(Slot(-1, Fraction(0), fa.heights[j], q))
    groups = next_fit_1d([s.height for s in overflow])
    for g in groups:
        z = Fraction(0)
        for n in g:
            s = overflow[n]
            slots.append(Slot(next_bin, z, s.height, s.btype))
            z += s.height
        next_bin += 1
    phase1_bins = len(groups)

    # phase 2: small items re-shelved per btype, Next-Fit into free space
    small_by_q: dict[tuple, list[Rect]] = {}
    for r in fa.small:
        small_by_q.setdefault(_btype(r, ctx), []).append(r)
    small_shelves = [(q, sh.height) for q in sorted(small_by_q)
                     for sh in canonical_shelving(small_by_q[q])[0]]
    cursor = 0
    phase2_bins = 0
    cap_bin, cap_top, cap_end = None, Fraction(0), Fraction(0)
    for q, h in small_shelves:
        while cap_bin is None or cap_top + h > cap_end:
            if cursor < len(residual):
                cap_bin, cap_top = residual[cursor]
                cap_end = Fraction(1)
                cursor += 1
            else:
                cap_bin, cap_top, cap_end = next_bin, Fraction(0), Fraction(1)
                next_bin += 1
                phase2_bins += 1
        slots.append(Slot(cap_bin, cap_top, h, q))
        cap_top += h

    # phase 3: canonical shelving per btype, each shelf packed by recursive shelves
    by_q: dict[tuple, list[Rect]] = {}
    for r in rects:
        by_q.setdefault(_btype(r, ctx), []).append(r)
    placements: list[Placement] = []
    trees: dict[int, list] = {}
    for q in sorted(by_q):
        mine = sorted((s for s in slots if s.btype == q), key=lambda s: (-s.height, s.bin, s.offset))
        canon, _ = canonical_shelving(by_q[q])
        if len(canon) > len(mine) or any(c.height > s.height for c, s in zip(canon, mine)):
            raise ContractError(f"canonical shelving of btype {q} is not dominated by its shelves")
        for shelf, slot in zip(canon, mine):
            whole = [p.rect for p in shelf.pieces if p.slice_index == 0]
            lead = [p.rect for p in shelf.pieces if p.slice_index == 1]
            group = [r.item for r in whole + lead]
            if not group:
                continue
            unit = hdh_unit_pack(group, q, ctx, dims=d - 1)
            for item, pos in unit.positions:
                placements.append(Placement(item.id, pos + (slot.offset,), item.lengths, slot.bin,
                                            item.orientation))
            unit.tree.offset = slot.offset
            unit.tree.height = shelf.height
            trees.setdefault(slot.bin, []).append(unit.tree)

    remap = {b: n for n, b in enumerate(sorted({p.bin for p in placements}))}
    placements = compact_bins(placements)
    trees = {remap[b]: v for b, v in trees.items() if b in remap}
    packing = Packing(PackingKind.BIN, unit_bin(d), placements, trees)
    bins = packing.num_bins
    bound = inflate_bound(fa.m, fa.t, Q, delta)
    if not bins < bound:
        raise ContractError(f"inflate used {bins} bins, bound {bound}")
    stats = {"m": fa.m, "t": fa.t, "Q": Q, "bins": bins, "phase1_bins": phase1_bins,
             "phase2_bins": phase2_bins, "bound": bound}
    return packing, stats


# -- driver -----------------------------------------------------------------------

def hgap_additive(Q: int, eps: Fraction) -> Fraction:
    """Additive term of the guarantee, as a function of base-type count and epsilon."""
    eps = Fraction(eps)
    return math.ceil((2 / eps + 1) ** 2) * (Q + eps / 2) + 3 + (Q + 3) * eps / 2


def hgap(itemsets: Sequence[Itemset], eps: Fraction, ctx: HarmonicContext,
         budget: Optional[int] = None, exhaustive: bool = False) -> SolveResult:
    """Guess shelves, choose an assortment per guess, inflate the best one.

    Plans come in order of shelf-bin count, and a plan with ``b`` shelf
    bins needs at least ``b + 1`` bins, so the search stops once that can
    no longer beat the best so far.  ``exhaustive`` disables the stop; the
    chosen plan is the same either way (fewest bins, earliest plan).
    """
    eps = Fraction(eps)
    delta = delta_of(eps)
    itemsets = list(itemsets)
    rect_sets = round_instance(itemsets, ctx)
    stream = guess_shelves(rect_sets, delta, budget)
    best: Optional[FractionalAssignment] = None
    evaluated = 0
    for plan in stream:
        b = len(plan.bins)
        if best is not None and not exhaustive and b >= 1 and b + 1 >= best.m:
            break
        plan.check(stream.large_heights, delta)
        evaluated += 1
        fa = choose_and_pack(rect_sets, plan, delta)
        if fa is None:
            continue
        if fa.m > b + fa.empty_bins + 1 or fa.heights != plan.heights:
            raise ContractError("choose-and-pack changed the plan beyond one extra shelf")
        if best is None or fa.m < best.m:
            best = fa
    if best is None:
        if stream.truncated:
            raise BudgetExhausted(f"no feasible plan within a budget of {budget} plans")
        raise ContractError("no plan succeeded under full enumeration")
    packing, istats = inflate(best, ctx)
    assortment = {sid: r.item for sid, r in sorted(best.chosen.items())}
    stats = {"k": ctx.k, "eps": eps, "delta": delta, "plans_evaluated": evaluated,
             "truncated": stream.truncated, "plan_index": best.plan_index,
             "plan_bins": best.m, "heights": list(best.heights), "small_area": best.small_area,
             "Q": istats["Q"], "t": istats["t"], "additive": hgap_additive(istats["Q"], eps)}
    bounds = [Bound("bins < m/(1-delta) + t(Q-1) + 1 + delta Q/(1-delta)", istats["bound"],
                    Fraction(packing.num_bins))] if assortment else []
    check_bounds(bounds)
    return SolveResult(packing, assortment, stats, bounds)
