"""Kuhn-Munkres assignment over positive rationals under multiplication.

Orientation matching minimises a product of harmonic values.  The usual
log transform is not exact, but the Hungarian method only needs an ordered
abelian group: here "addition" is multiplication, "subtraction" is
division and the neutral element is one.  Potentials stay exact rationals.
Forbidden cells are ``None``.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional, Sequence

Cost = Optional[Fraction]


class InfeasibleAssignment(ValueError):
    pass


def min_product_assignment(cost: Sequence[Sequence[Cost]]) -> tuple[list[int], Fraction]:
    """Return ``(assign, value)`` minimising ``prod cost[r][assign[r]]``.

    ``cost`` is square with positive rational entries or ``None`` for
    forbidden pairs.  Raises :class:`InfeasibleAssignment` if no perfect
    assignment avoids forbidden cells.
    """
    n = len(cost)
    if n == 0:
        return [], Fraction(1)
    one = Fraction(1)
    # 1-indexed potentials as in the classic O(n^3) formulation
    u = [one] * (n + 1)
    v = [one] * (n + 1)
    p = [0] * (n + 1)
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv: list[Cost] = [None] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            delta: Cost = None
            j1 = -1
            for j in range(1, n + 1):
                if used[j]:
                    continue
                c = cost[i0 - 1][j - 1]
                if c is not None:
                    cur = c / (u[i0] * v[j])
                    if minv[j] is None or cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                if minv[j] is not None and (delta is None or minv[j] < delta):
                    delta = minv[j]
                    j1 = j
            if delta is None:
                raise InfeasibleAssignment("no assignment avoids the forbidden cells")
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] *= delta
                    v[j] /= delta
                elif minv[j] is not None:
                    minv[j] /= delta
            j0 = j1
            if p[j0] == 0:
                break
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == 0:
                break
    assign = [0] * n
    for j in range(1, n + 1):
        assign[p[j] - 1] = j - 1
    value = one
    for r, c in enumerate(assign):
        value *= cost[r][c]
    return assign, value


def lexmin_optimal_assignment(cost: Sequence[Sequence[Cost]]) -> tuple[list[int], Fraction]:
    """Optimal assignment, ties broken towards the lexicographically smallest.

    Fixes rows one at a time to the smallest column that still admits an
    optimal completion; each probe is one exact Hungarian run.
    """
    n = len(cost)
    _, best = min_product_assignment(cost)
    assign: list[int] = []
    taken: set[int] = set()
    prefix = Fraction(1)
    for r in range(n):
        for c in range(n):
            if c in taken or cost[r][c] is None:
                continue
            rows = range(r + 1, n)
            cols = [cc for cc in range(n) if cc not in taken and cc != c]
            sub = [[cost[rr][cc] for cc in cols] for rr in rows]
            try:
                _, rest = min_product_assignment(sub)
            except InfeasibleAssignment:
                continue
            if prefix * cost[r][c] * rest == best:
                assign.append(c)
                taken.add(c)
                prefix *= cost[r][c]
                break
        else:  # pragma: no cover - guarded by the optimum existing
            raise AssertionError("lost the optimum while fixing rows")
    return assign, best
