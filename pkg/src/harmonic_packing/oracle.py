"""Exact solvers for desk-scale instances, used as ground truth in tests."""

from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional, Sequence

from .harmonic import to_rational
from .model import Item, Itemset, RotationPolicy, orientations

MAX_1BP = 15
MAX_DBP_ITEMS = 5
MAX_DBP_DIM = 3


class OracleLimit(ValueError):
    """Instance is larger than the exact solver is willing to handle."""


class Infeasible(ValueError):
    pass


# -- 1D bin packing ----------------------------------------------------------------

def _ffd(sizes: Sequence[Fraction], capacity: Fraction) -> int:
    loads: list[Fraction] = []
    for s in sorted(sizes, reverse=True):
        for n, load in enumerate(loads):
            if load + s <= capacity:
                loads[n] += s
                break
        else:
            loads.append(s)
    return len(loads)


def opt_1bp_exact(sizes: Sequence, capacity=1) -> int:
    """Minimum number of bins by branch and bound.

    Seeds the incumbent with first-fit decreasing; items go in decreasing
    order and bins with equal load are tried only once.
    """
    capacity = to_rational(capacity)
    sizes = sorted((to_rational(s) for s in sizes), reverse=True)
    if len(sizes) > MAX_1BP:
        raise OracleLimit(f"at most {MAX_1BP} sizes")
    if any(s > capacity for s in sizes):
        raise Infeasible("an item exceeds the capacity")
    if not sizes:
        return 0
    best = _ffd(sizes, capacity)
    lower = math.ceil(sum(sizes) / capacity)
    loads: list[Fraction] = []

    def search(i: int) -> None:
        nonlocal best
        if best == lower:
            return
        if i == len(sizes):
            best = min(best, len(loads))
            return
        s = sizes[i]
        seen = set()
        for n in range(len(loads)):
            if loads[n] in seen or loads[n] + s > capacity:
                continue
            seen.add(loads[n])
            loads[n] += s
            search(i + 1)
            loads[n] -= s
        if len(loads) + 1 < best:
            loads.append(s)
            search(i + 1)
            loads.pop()

    search(0)
    return best


def opt_1bp_subset_dp(sizes: Sequence, capacity=1) -> int:
    """Independent check: DP over subsets storing (bins, load of the open bin)."""
    capacity = to_rational(capacity)
    sizes = [to_rational(s) for s in sizes]
    n = len(sizes)
    if any(s > capacity for s in sizes):
        raise Infeasible("an item exceeds the capacity")
    best = [None] * (1 << n)
    best[0] = (1, Fraction(0)) if n else (0, Fraction(0))
    for mask in range(1 << n):
        if best[mask] is None:
            continue
        bins, load = best[mask]
        for i in range(n):
            if mask >> i & 1:
                continue
            cand = (bins, load + sizes[i]) if load + sizes[i] <= capacity else (bins + 1, sizes[i])
            nxt = mask | 1 << i
            if best[nxt] is None or cand < best[nxt]:
                best[nxt] = cand
    return best[-1][0] if n else 0


# -- d-dimensional single-bin feasibility ---------------------------------------------

def _separation(boxes: Sequence[Sequence[Fraction]], cap: Sequence[Fraction]) -> Optional[list]:
    """Per-axis ordering edges separating every pair of boxes, or None if they do not fit.

    Every pair must be separated along some axis.  The search fixes a
    separating axis and order per pair; on each axis the ordering
    constraints must leave every chain no longer than the capacity.
    """
    n = len(boxes)
    d = len(cap)
    if any(b[j] > cap[j] for b in boxes for j in range(d)):
        return None
    if sum(math.prod(b) for b in boxes) > math.prod(cap):
        return None
    pairs = list(itertools.combinations(range(n), 2))
    # most constrained pairs first
    pairs.sort(key=lambda p: sum(boxes[p[0]][j] + boxes[p[1]][j] <= cap[j] for j in range(d)))
    edges = [[[] for _ in range(n)] for _ in range(d)]   # edges[axis][a] = boxes after a

    def chain_ok(axis: int) -> bool:
        memo: dict[int, Fraction] = {}
        active: set[int] = set()

        def longest(v: int) -> Optional[Fraction]:
            if v in memo:
                return memo[v]
            if v in active:
                return None
            active.add(v)
            best = Fraction(0)
            for w in edges[axis][v]:
                sub = longest(w)
                if sub is None:
                    return None
                best = max(best, sub)
            active.discard(v)
            memo[v] = boxes[v][axis] + best
            return memo[v]

        for v in range(n):
            val = longest(v)
            if val is None or val > cap[axis]:
                return False
        return True

    def search(p: int) -> bool:
        if p == len(pairs):
            return True
        a, b = pairs[p]
        for axis in range(d):
            if boxes[a][axis] + boxes[b][axis] > cap[axis]:
                continue
            for first, second in ((a, b), (b, a)):
                edges[axis][first].append(second)
                if chain_ok(axis) and search(p + 1):
                    return True
                edges[axis][first].pop()
        return False

    return edges if search(0) else None


def _fits_fixed(boxes: Sequence[Sequence[Fraction]], cap: Sequence[Fraction]) -> bool:
    return _separation(boxes, cap) is not None


def positions_for(boxes: Sequence[Sequence[Fraction]], cap: Sequence[Fraction]) -> Optional[list[tuple]]:
    """A concrete placement for fixed-orientation boxes, or None."""
    edges = _separation(boxes, cap)
    if edges is None:
        return None
    n = len(boxes)
    pos = [[Fraction(0)] * len(cap) for _ in range(n)]
    for axis, succ in enumerate(edges):
        pred: dict[int, list[int]] = {v: [] for v in range(n)}
        for u in range(n):
            for w in succ[u]:
                pred[w].append(u)
        memo: dict[int, Fraction] = {}

        def start(v: int) -> Fraction:
            if v not in memo:
                memo[v] = max((start(u) + boxes[u][axis] for u in pred[v]), default=Fraction(0))
            return memo[v]

        for v in range(n):
            pos[v][axis] = start(v)
    return [tuple(p) for p in pos]


def fits_one_bin(items: Sequence[Item], policy: Optional[RotationPolicy] = None,
                 cap: Optional[Sequence[Fraction]] = None) -> bool:
    """Exact feasibility of packing ``items`` into one box, trying allowed orientations."""
    items = list(items)
    if not items:
        return True
    d = items[0].d
    cap = tuple(cap) if cap is not None else (Fraction(1),) * d
    if len(items) > MAX_DBP_ITEMS or d > MAX_DBP_DIM:
        raise OracleLimit(f"exact feasibility needs n <= {MAX_DBP_ITEMS} and d <= {MAX_DBP_DIM}")
    choices = [[m.lengths for m in orientations(i, policy).members] if policy else [i.lengths]
               for i in items]
    for combo in itertools.product(*choices):
        if _fits_fixed(combo, cap):
            return True
    return False


def opt_dbp_exact(items: Sequence[Item], policy: Optional[RotationPolicy] = None) -> int:
    """Minimum number of unit bins over all partitions of at most five items."""
    items = list(items)
    n = len(items)
    if n > MAX_DBP_ITEMS or any(i.d > MAX_DBP_DIM for i in items):
        raise OracleLimit(f"exact bin packing needs n <= {MAX_DBP_ITEMS} and d <= {MAX_DBP_DIM}")
    for i in items:
        if not fits_one_bin([i], policy):
            raise Infeasible(f"item {i.id} does not fit a bin")

    @lru_cache(maxsize=None)
    def feasible(mask: int) -> bool:
        return fits_one_bin([items[i] for i in range(n) if mask >> i & 1], policy)

    @lru_cache(maxsize=None)
    def best(mask: int) -> int:
        if mask == 0:
            return 0
        low = mask & -mask
        rest = mask ^ low
        out = n
        sub = rest
        while True:
            block = sub | low
            if feasible(block):
                out = min(out, 1 + best(mask ^ block))
            if sub == 0:
                break
            sub = (sub - 1) & rest
        return out

    return best((1 << n) - 1)


def opt_mcbp_exact(itemsets: Sequence[Itemset]) -> int:
    """Minimum bins over every assortment (one member per itemset)."""
    best = None
    for combo in itertools.product(*(s.members for s in itemsets)):
        value = opt_dbp_exact(list(combo))
        best = value if best is None else min(best, value)
    return best or 0


def opt_strip_exact(items: Sequence[Item]) -> Fraction:
    """Minimum strip height; the optimum is a sum of item heights at least the tallest."""
    items = list(items)
    if not items:
        return Fraction(0)
    if len(items) > MAX_DBP_ITEMS or items[0].d > MAX_DBP_DIM:
        raise OracleLimit(f"exact strip packing needs n <= {MAX_DBP_ITEMS} and d <= {MAX_DBP_DIM}")
    d = items[0].d
    heights = [i.height for i in items]
    tallest = max(heights)
    volume = sum((i.volume for i in items), Fraction(0))
    candidates = sorted({sum(c, Fraction(0)) for r in range(1, len(items) + 1)
                         for c in itertools.combinations(heights, r)})
    for h in candidates:
        if h < tallest or h < volume:
            continue
        if _fits_fixed([i.lengths for i in items], (Fraction(1),) * (d - 1) + (h,)):
            return h
    raise AssertionError("stacking every item always fits")


def opt_mcks_exact(itemsets: Sequence[Itemset], limit: int = 10**5) -> Fraction:
    """Maximum profit of at most one member per itemset packable into one unit bin."""
    itemsets = list(itemsets)
    if math.prod(len(s.members) + 1 for s in itemsets) > limit:
        raise OracleLimit("too many selections")
    selections = []
    for combo in itertools.product(*([None] + list(s.members) for s in itemsets)):
        chosen = [m for m in combo if m is not None]
        profit = sum((m.profit or Fraction(0) for m in chosen), Fraction(0))
        selections.append((profit, chosen))
    selections.sort(key=lambda s: -s[0])
    for profit, chosen in selections:
        if sum((m.volume for m in chosen), Fraction(0)) <= 1 and fits_one_bin(chosen):
            return profit
    return Fraction(0)


# -- weighting-function search ---------------------------------------------------------

def weighting_violation_search(g: Callable[[Fraction], Fraction], trials: int = 10**5, seed: int = 0,
                               denominator: int = 10080, k: Optional[int] = None
                               ) -> Optional[list[Fraction]]:
    """Randomly search for ``X`` with ``sum(X) <= 1`` and ``sum(g(X)) > 1``.

    Values live on the grid ``a / denominator``.  Half the trials put items
    just above the breakpoints ``1/(q+1)`` (for ``q < k``) and fill the rest
    with one more item; the others cut ``[0, 1]`` at random points.  A
    certificate is re-checked with exact arithmetic before it is returned.
    """
    D = denominator
    values = [None] + [Fraction(g(Fraction(a, D))) for a in range(1, D + 1)]
    scale = math.lcm(*(v.denominator for v in values[1:]))
    weight = [0] + [int(v * scale) for v in values[1:]]
    rng = random.Random(seed)
    qmax = (k - 1) if k else 10
    for _ in range(trials):
        parts: list[int] = []
        room = D
        if rng.random() < 0.5:
            for _ in range(rng.randint(1, 6)):
                q = rng.randint(1, qmax)
                a = D // (q + 1) + 1
                if a <= room:
                    parts.append(a)
                    room -= a
            if room > 0 and rng.random() < 0.9:
                parts.append(rng.randint(1, room))
        else:
            m = rng.randint(1, 8)
            cuts = sorted(rng.randint(0, D) for _ in range(m))
            prev = 0
            for c in cuts:
                if c > prev:
                    parts.append(c - prev)
                prev = c
        if not parts:
            continue
        if sum(weight[a] for a in parts) > scale:
            cert = [Fraction(a, D) for a in parts]
            if sum(cert) <= 1 and sum(Fraction(g(x)) for x in cert) > 1:
                return cert
    return None
