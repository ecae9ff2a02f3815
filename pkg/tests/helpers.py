"""Shared test helpers: random instances and packings, brute-force checks, acceptance records."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction as F

from hypothesis import strategies as st

from harmonic_packing.harmonic import f_of, prod
from harmonic_packing.hgap import is_large
from harmonic_packing.model import Item, Itemset, Objective, Packing, PackingKind, Placement, unit_bin


FIG_HEIGHTS = [F(3, 8), F(13, 40), F(3, 10), F(1, 4), F(1, 5), F(3, 20)]
FIG_WIDTHS = [F(3, 10), F(2, 5), F(2, 5), F(1, 2), F(9, 10), F(1, 4)]


def grid_lengths(rng: random.Random, d: int, grid: int = 20, lo: int = 1) -> tuple:
    return tuple(F(rng.randint(lo, grid), grid) for _ in range(d))


def random_items(rng: random.Random, n: int, d: int, grid: int = 20) -> list[Item]:
    return [Item(i, grid_lengths(rng, d, grid)) for i in range(n)]


def mixed_items(rng: random.Random, n: int, d: int, k: int) -> list[Item]:
    """Items whose lengths hit every type class, boundaries included."""
    pool = [F(1, q) for q in range(1, k + 1)] + [F(1, q) + F(1, 97) for q in range(2, k + 1)]
    out = []
    for i in range(n):
        lengths = []
        for _ in range(d):
            if rng.random() < 0.3:
                lengths.append(min(F(1), rng.choice(pool)))
            else:
                lengths.append(F(rng.randint(1, 60), 60))
        out.append(Item(i, tuple(lengths)))
    return out


def rational(grid: int = 20):
    return st.integers(1, grid).map(lambda a: F(a, grid))


def items_strategy(d: int, max_n: int = 12, grid: int = 20):
    row = st.tuples(*[rational(grid) for _ in range(d)])
    return st.lists(row, min_size=0, max_size=max_n).map(
        lambda rows: [Item(i, r) for i, r in enumerate(rows)])


def itemsets_strategy(d: int, max_n: int = 6, max_members: int = 3, grid: int = 20):
    row = st.tuples(*[rational(grid) for _ in range(d)])
    sets = st.lists(st.lists(row, min_size=1, max_size=max_members), min_size=1, max_size=max_n)

    def build(raw):
        out = []
        item_id = 0
        for s, members in enumerate(raw):
            items = []
            for r in members:
                items.append(Item(item_id, r))
                item_id += 1
            out.append(Itemset(s, tuple(items)))
        return out

    return sets.map(build)


def guillotine_packing(rng: random.Random, d: int, bins: int = 2, depth: int = 3,
                       grid: int = 12) -> Packing:
    """Random valid packing: split each bin recursively, one item per leaf region.

    Items are shrunk and shifted inside their region, so contacts and gaps
    both occur and the layout is generally not shelf-like.
    """
    placements = []
    next_id = 0

    def split(lo: list, hi: list, level: int, b: int) -> None:
        nonlocal next_id
        axis = rng.randrange(d)
        span = hi[axis] - lo[axis]
        if level < depth and span > F(1, grid) and rng.random() < 0.8:
            cut = lo[axis] + span * F(rng.randint(1, 3), 4)
            left_hi = list(hi)
            left_hi[axis] = cut
            right_lo = list(lo)
            right_lo[axis] = cut
            split(lo, left_hi, level + 1, b)
            split(right_lo, hi, level + 1, b)
            return
        if rng.random() < 0.15:
            return   # leave the region empty
        pos, lengths = [], []
        for j in range(d):
            span = hi[j] - lo[j]
            length = span * F(rng.randint(1, 4), 4)
            shift = (span - length) * F(rng.randint(0, 2), 2)
            pos.append(lo[j] + shift)
            lengths.append(length)
        placements.append(Placement(next_id, tuple(pos), tuple(lengths), b))
        next_id += 1

    for b in range(bins):
        split([F(0)] * d, [F(1)] * d, 0, b)
    return Packing(PackingKind.BIN, unit_bin(d), placements)


def items_of(packing: Packing) -> list[Item]:
    return [Item(p.item_id, p.lengths) for p in packing.placements]


def synthetic_assignment(rng: random.Random, ctx, delta, n: int = 8, d: int = 2, grid: int = 12):
    """A random fractional assignment built directly, without the DP.

    Large rects go to a random class at least as tall as they are, some split
    across two classes; shelf counts are the rounded-up class widths and
    shelves go into bins by Next-Fit in random order.  Enough empty bins are
    added for the small area.
    """
    import math

    from harmonic_packing.hgap import FractionalAssignment, is_large, round_item
    from harmonic_packing.shelves import next_fit_1d

    items = [Item(i, grid_lengths(rng, d, grid)) for i in range(n)]
    rects = [round_item(item, ctx, item.id) for item in items]
    large = [r for r in rects if is_large(r, delta)]
    small = [r for r in rects if not is_large(r, delta)]
    heights = tuple(sorted({r.height for r in large}, reverse=True))
    slices: dict = {j: [] for j in range(len(heights))}
    for r in large:
        allowed = [j for j, h in enumerate(heights) if h >= r.height]
        if len(allowed) > 1 and rng.random() < 0.3:
            a, b = rng.sample(allowed, 2)
            part = r.width * F(rng.randint(1, 3), 4)
            slices[a].append((r, part))
            slices[b].append((r, r.width - part))
        else:
            slices[rng.choice(allowed)].append((r, r.width))
    counts = [math.ceil(sum((w for _, w in slices[j]), F(0))) for j in range(len(heights))]
    shelves = [j for j in range(len(heights)) for _ in range(counts[j])]
    rng.shuffle(shelves)
    bins = []
    for group in next_fit_1d([heights[j] for j in shelves]):
        cfg = [0] * len(heights)
        for n_ in group:
            cfg[shelves[n_]] += 1
        bins.append(tuple(cfg))
    free = sum((1 - sum(c * h for c, h in zip(cfg, heights)) for cfg in bins), F(0))
    small_area = sum((r.area for r in small), F(0))
    empty = max(0, math.ceil(small_area - free))
    bins += [tuple([0] * len(heights))] * empty
    return FractionalAssignment(heights, bins, slices, small, delta, {r.id: r for r in rects},
                                small_area, None, empty), items


ACCEPTANCE: dict = {}


def record(number: int, title: str, ok: bool, detail: str) -> None:
    """Remember a criterion's outcome for the end-of-run summary, then assert it."""
    line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    ACCEPTANCE[number] = line
    print(line)
    assert ok, line


def fits(assortment, heights, counts, width, delta):
    """Hall's condition for nested shelf classes, plus the small items."""
    need = [F(0)] * len(heights)
    for r in assortment:
        if is_large(r, delta):
            fit = [j for j, h in enumerate(heights) if r.height <= h]
            if not fit:
                return False
            need[fit[-1]] += width(r)
    return all(sum(need[:r + 1]) <= sum(counts[:r + 1]) for r in range(len(heights)))


def small_area(assortment, delta):
    return sum((r.area for r in assortment if not is_large(r, delta)), F(0))


def brute_orientation(lengths, bin_lengths, ctx, objective, height_axis=None):
    d = len(lengths)
    best = None
    for perm in itertools.permutations(range(d)):
        if objective is Objective.BASE_W:
            h = d - 1 if height_axis is None else height_axis
            if perm[-1] != h:
                continue
        scaled = [lengths[perm[j]] / bin_lengths[j] for j in range(d)]
        if any(x > 1 for x in scaled):
            continue
        dims = scaled if objective is Objective.FULL_VOL else scaled[:-1]
        value = prod(f_of(x, ctx) for x in dims)
        if best is None or (value, perm) < best:
            best = (value, perm)
    return best


def random_shelving(rects, rng):
    """Some shelf-based fractional packing: random order, random slicing, random slack."""
    shelves = []   # [free width, max height]
    for r in rng.sample(rects, len(rects)):
        left = r.width
        while left > 0:
            open_ = [s for s in shelves if s[0] > 0]
            if open_ and rng.random() < 0.7:
                s = rng.choice(open_)
            else:
                s = [F(1), F(0)]
                shelves.append(s)
            part = min(left, s[0])
            if part > F(1, 20) and rng.random() < 0.3:
                part = part * F(rng.randint(1, 3), 4)
            s[0] -= part
            s[1] = max(s[1], r.height)
            left -= part
    return [h + F(rng.randint(0, 2), 40) for _, h in shelves]
