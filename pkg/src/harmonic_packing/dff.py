"""Rewrite a packing so each item's length on one axis passes through a weighting function.

Items are re-stacked along the axis: an item starts where the heaviest
chain of its predecessors (items below it whose projections overlap it)
ends, measured in transformed lengths.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .harmonic import HarmonicContext, H_of
from .model import Packing, PackingKind, Placement


@dataclass(frozen=True)
class WeightingFunction:
    """An exactly evaluable map on ``(0, 1]``.

    ``certified`` marks maps known to be weighting functions; only for those
    does the transform assert that every chain stays inside the bin.
    """

    name: str
    fn: Callable[[Fraction], Fraction]
    certified: bool = False

    def __call__(self, x: Fraction) -> Fraction:
        return self.fn(x)


def identity() -> WeightingFunction:
    return WeightingFunction("identity", lambda x: x, True)


def harmonic_weight(ctx: HarmonicContext) -> WeightingFunction:
    return WeightingFunction(f"H_{ctx.k}", lambda x: H_of(x, ctx), True)


def unscaled_harmonic(ctx: HarmonicContext) -> WeightingFunction:
    from .harmonic import f_of
    return WeightingFunction(f"f_{ctx.k}", lambda x: f_of(x, ctx), False)


def piecewise(pieces: Sequence[tuple[Fraction, Fraction, Fraction]], name: str = "piecewise",
              certified: bool = False) -> WeightingFunction:
    """Piecewise-linear map from ``(upper, slope, intercept)`` rows.

    Row ``r`` applies on ``(upper_{r-1}, upper_r]``; rows are sorted by
    ``upper`` and the last must reach 1.
    """
    rows = sorted((Fraction(u), Fraction(a), Fraction(b)) for u, a, b in pieces)
    if not rows or rows[-1][0] < 1:
        raise ValueError("pieces must cover (0, 1]")

    def fn(x: Fraction) -> Fraction:
        for upper, slope, intercept in rows:
            if x <= upper:
                return slope * x + intercept
        raise ValueError(f"{x} outside (0, 1]")

    return WeightingFunction(name, fn, certified)


@dataclass
class ChainState:
    level: int
    u: Fraction
    pi: Optional[int]   # predecessor item id on the heaviest chain


class ChainOverflow(AssertionError):
    pass


def _proj_overlap(a: Placement, b: Placement, q: int) -> bool:
    return all(max(a.position[j], b.position[j]) < min(a.position[j] + a.lengths[j], b.position[j] + b.lengths[j])
               for j in range(len(a.position)) if j != q)


def chain_states(placements: Sequence[Placement], g: WeightingFunction, q: int) -> dict[int, ChainState]:
    """Level, heaviest augmented chain height and predecessor of each item in one bin."""
    order = sorted(placements, key=lambda p: (p.position[q], p.item_id))
    states: dict[int, ChainState] = {}
    done: list[Placement] = []
    for p in order:
        gl = g(p.lengths[q])
        preds = [o for o in done if o.position[q] < p.position[q] and _proj_overlap(o, p, q)]
        if not preds:
            states[p.item_id] = ChainState(0, gl, None)
        else:
            level = 1 + max(states[o.item_id].level for o in preds)
            best = max(preds, key=lambda o: (states[o.item_id].u, -o.item_id))
            states[p.item_id] = ChainState(level, gl + states[best.item_id].u, best.item_id)
        done.append(p)
    return states


def weighting_transform_dim(packing: Packing, g: WeightingFunction, q: int) -> Packing:
    """Replace every length on axis ``q`` by ``g`` of it, re-stacking positions.

    Works on unit bins.  For a certified weighting function and a valid
    input the result is valid; otherwise check it with the validator.
    """
    if packing.kind is not PackingKind.BIN:
        raise ValueError("the transform applies to bin packings")
    out: list[Placement] = []
    for b, group in sorted(packing.by_bin().items()):
        states = chain_states(group, g, q)
        for p in group:
            st = states[p.item_id]
            gl = g(p.lengths[q])
            if g.certified and st.u > packing.bin_lengths[q]:
                raise ChainOverflow(f"chain at item {p.item_id} reaches {st.u}")
            pos = list(p.position)
            lengths = list(p.lengths)
            pos[q] = st.u - gl
            lengths[q] = gl
            out.append(Placement(p.item_id, tuple(pos), tuple(lengths), p.bin, p.orientation))
    return Packing(packing.kind, packing.bin_lengths, out)


def weighting_transform_all(packing: Packing, gs: Sequence[WeightingFunction]) -> Packing:
    if len(gs) != packing.d:
        raise ValueError("need one weighting function per axis")
    for q, g in enumerate(gs):
        packing = weighting_transform_dim(packing, g, q)
    return packing
