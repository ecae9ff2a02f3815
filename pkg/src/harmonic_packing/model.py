"""Items, itemsets, orientations, packings and the geometric validator."""

from __future__ import annotations

import enum
import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .harmonic import HarmonicContext, RationalLike, f_of, prod, to_rational
from .matching import InfeasibleAssignment, lexmin_optimal_assignment


class InputError(ValueError):
    """Malformed instance data."""


class InfeasibleOrientation(ValueError):
    """No allowed orientation of an item fits the bin."""


Perm = tuple[int, ...]


@dataclass(frozen=True)
class Item:
    """An axis-parallel cuboid with side lengths in ``(0, 1]``.

    ``orientation`` records how the lengths were permuted from the item as
    given: ``lengths[j] == original[orientation[j]]``.  Rotated variants of
    one item share its ``id``.
    """

    id: int
    lengths: tuple[Fraction, ...]
    profit: Optional[Fraction] = None
    orientation: Optional[Perm] = None

    def __post_init__(self):
        lengths = tuple(to_rational(x) for x in self.lengths)
        if not lengths:
            raise InputError(f"item {self.id}: needs at least one dimension")
        for x in lengths:
            if x <= 0 or x > 1:
                raise InputError(f"item {self.id}: length {x} outside (0, 1]")
        object.__setattr__(self, "lengths", lengths)
        if self.profit is not None:
            p = to_rational(self.profit)
            if p < 0:
                raise InputError(f"item {self.id}: negative profit {p}")
            object.__setattr__(self, "profit", p)
        if self.orientation is not None:
            perm = tuple(self.orientation)
            if sorted(perm) != list(range(len(lengths))):
                raise InputError(f"item {self.id}: bad orientation {perm}")
            object.__setattr__(self, "orientation", perm)

    @property
    def d(self) -> int:
        return len(self.lengths)

    @property
    def height(self) -> Fraction:
        return self.lengths[-1]

    @property
    def volume(self) -> Fraction:
        return prod(self.lengths)

    @property
    def perm(self) -> Perm:
        return self.orientation if self.orientation is not None else tuple(range(self.d))

    def key(self) -> tuple:
        """Identity of this variant: id plus orientation."""
        return (self.id, self.perm)


def make_items(rows: Iterable[Sequence[RationalLike]], start_id: int = 0) -> list[Item]:
    return [Item(start_id + n, tuple(to_rational(x) for x in row)) for n, row in enumerate(rows)]


@dataclass(frozen=True)
class Itemset:
    """Mutually exclusive variants; a solution uses exactly one member."""

    id: int
    members: tuple[Item, ...]

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise InputError(f"itemset {self.id} is empty")
        dims = {m.d for m in members}
        if len(dims) != 1:
            raise InputError(f"itemset {self.id} mixes dimensions {sorted(dims)}")
        object.__setattr__(self, "members", members)

    @property
    def d(self) -> int:
        return self.members[0].d


def singleton_itemsets(items: Sequence[Item]) -> list[Itemset]:
    return [Itemset(n, (item,)) for n, item in enumerate(items)]


def flatten(itemsets: Sequence[Itemset]) -> list[Item]:
    return [m for s in itemsets for m in s.members]


# -- rotations ---------------------------------------------------------------

class RotationKind(enum.Enum):
    NONE = "none"
    ALL = "all"
    FIX_LAST_AXIS = "fix-last-axis"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class RotationPolicy:
    kind: RotationKind = RotationKind.NONE
    perms: frozenset = frozenset()

    def __post_init__(self):
        if self.kind is RotationKind.EXPLICIT:
            if not self.perms:
                raise InputError("explicit rotation policy needs at least one permutation")
            sizes = {len(p) for p in self.perms}
            for p in self.perms:
                if sorted(p) != list(range(len(p))):
                    raise InputError(f"not a permutation: {p}")
            if len(sizes) != 1:
                raise InputError("explicit permutations disagree on dimension")

    @classmethod
    def parse(cls, name: str) -> "RotationPolicy":
        try:
            return cls(RotationKind(name.lower().replace("_", "-")))
        except ValueError:
            raise InputError(f"unknown rotation policy {name!r}") from None

    @classmethod
    def explicit(cls, perms: Iterable[Sequence[int]]) -> "RotationPolicy":
        return cls(RotationKind.EXPLICIT, frozenset(tuple(p) for p in perms))

    def allowed(self, d: int) -> list[Perm]:
        ident = tuple(range(d))
        if self.kind is RotationKind.NONE:
            return [ident]
        if self.kind is RotationKind.ALL:
            return list(itertools.permutations(range(d)))
        if self.kind is RotationKind.FIX_LAST_AXIS:
            return [p + (d - 1,) for p in itertools.permutations(range(d - 1))]
        perms = sorted(self.perms)
        if len(perms[0]) != d:
            raise InputError(f"explicit permutations are for d={len(perms[0])}, item has d={d}")
        return perms


def orient(item: Item, perm: Sequence[int]) -> Item:
    """Rotate ``item`` so that its new length ``j`` is its old length ``perm[j]``."""
    perm = tuple(perm)
    base = item.perm
    return Item(item.id, tuple(item.lengths[p] for p in perm), item.profit,
                tuple(base[p] for p in perm))


def orientations(item: Item, policy: RotationPolicy) -> Itemset:
    """All distinct allowed orientations of ``item`` as one itemset.

    Length vectors that coincide collapse onto the lexicographically
    smallest permutation producing them.
    """
    seen: dict[tuple, Item] = {}
    for perm in sorted(policy.allowed(item.d)):
        variant = orient(item, perm)
        seen.setdefault(variant.lengths, variant)
    return Itemset(item.id, tuple(seen.values()))


class Objective(enum.Enum):
    FULL_VOL = "full_vol"
    BASE_W = "base_w"


def orientation_cost(lengths: Sequence[Fraction], bin_lengths: Sequence[Fraction],
                     ctx: HarmonicContext, perm: Sequence[int],
                     objective: Objective = Objective.FULL_VOL) -> Optional[Fraction]:
    """Objective of one orientation, ``None`` if some scaled length exceeds 1."""
    d = len(lengths)
    scaled = [lengths[perm[j]] / bin_lengths[j] for j in range(d)]
    if any(x > 1 for x in scaled):
        return None
    dims = scaled if objective is Objective.FULL_VOL else scaled[:-1]
    return prod(f_of(x, ctx) for x in dims)


def best_orientation_perm(lengths: Sequence[RationalLike], bin_lengths: Sequence[RationalLike],
                          ctx: HarmonicContext, objective: Objective = Objective.FULL_VOL,
                          height_axis: Optional[int] = None) -> tuple[Perm, Fraction]:
    """Orientation minimising the harmonic volume (or base width) in the bin.

    ``lengths`` may exceed one when the bin is larger than the unit cube;
    every length is scaled by the bin length of the axis it is assigned to.
    For ``BASE_W`` the item axis ``height_axis`` (default: its last axis) is
    pinned to the last bin dimension and only the base is matched.  Ties go
    to the lexicographically smallest permutation.
    """
    lengths = [to_rational(x) for x in lengths]
    bin_lengths = [to_rational(x) for x in bin_lengths]
    d = len(lengths)
    if len(bin_lengths) != d:
        raise InputError("item and bin dimensions differ")

    def cell(axis: int, slot: int) -> Optional[Fraction]:
        x = lengths[axis] / bin_lengths[slot]
        return None if x > 1 else f_of(x, ctx)

    if objective is Objective.FULL_VOL:
        cost = [[cell(a, j) for a in range(d)] for j in range(d)]
        try:
            assign, value = lexmin_optimal_assignment(cost)
        except InfeasibleAssignment:
            raise InfeasibleOrientation(f"no orientation of {lengths} fits {bin_lengths}") from None
        return tuple(assign), value

    h = d - 1 if height_axis is None else height_axis
    if lengths[h] > bin_lengths[-1]:
        raise InfeasibleOrientation(f"axis {h} of {lengths} is taller than the bin")
    axes = [a for a in range(d) if a != h]
    cost = [[cell(a, j) for a in axes] for j in range(d - 1)]
    try:
        assign, value = lexmin_optimal_assignment(cost)
    except InfeasibleAssignment:
        raise InfeasibleOrientation(f"no base orientation of {lengths} fits {bin_lengths}") from None
    return tuple(axes[c] for c in assign) + (h,), value


def best_orientation(item: Item, bin_lengths: Sequence[RationalLike], ctx: HarmonicContext,
                     objective: Objective = Objective.FULL_VOL,
                     height_axis: Optional[int] = None) -> Item:
    perm, _ = best_orientation_perm(item.lengths, bin_lengths, ctx, objective, height_axis)
    return orient(item, perm)


def height_orientations(item: Item, ctx: HarmonicContext,
                        bin_lengths: Optional[Sequence[Fraction]] = None) -> Itemset:
    """At most ``d`` orientations: one per distinct height, best base for each.

    Only the height and the base width ``w`` matter once items are rounded
    to rectangles, so the remaining orientations are dominated.
    """
    d = item.d
    bin_lengths = bin_lengths or (Fraction(1),) * d
    members: dict[Fraction, Item] = {}
    for axis in range(d):
        h = item.lengths[axis]
        if h in members:
            continue
        try:
            perm, _ = best_orientation_perm(item.lengths, bin_lengths, ctx,
                                            Objective.BASE_W, height_axis=axis)
        except InfeasibleOrientation:
            continue
        members[h] = orient(item, perm)
    if not members:
        raise InfeasibleOrientation(f"item {item.id} fits in no orientation")
    return Itemset(item.id, tuple(members.values()))


# -- packings ----------------------------------------------------------------

class PackingKind(enum.Enum):
    BIN = "bin"
    STRIP = "strip"


@dataclass(frozen=True)
class Placement:
    item_id: int
    position: tuple[Fraction, ...]
    lengths: tuple[Fraction, ...]
    bin: int = 0
    orientation: Optional[Perm] = None

    @property
    def end(self) -> tuple[Fraction, ...]:
        return tuple(p + l for p, l in zip(self.position, self.lengths))


def place(item: Item, position: Sequence[Fraction], bin: int = 0) -> Placement:
    return Placement(item.id, tuple(position), item.lengths, bin, item.orientation)


@dataclass
class Packing:
    kind: PackingKind
    bin_lengths: tuple[Fraction, ...]
    placements: list[Placement] = field(default_factory=list)
    shelves: dict = field(default_factory=dict)

    @property
    def d(self) -> int:
        return len(self.bin_lengths)

    @property
    def num_bins(self) -> int:
        return len({p.bin for p in self.placements})

    @property
    def height(self) -> Fraction:
        """Top of the highest item along the last axis."""
        return max((p.position[-1] + p.lengths[-1] for p in self.placements), default=Fraction(0))

    def by_bin(self) -> dict[int, list[Placement]]:
        out: dict[int, list[Placement]] = defaultdict(list)
        for p in self.placements:
            out[p.bin].append(p)
        return dict(out)

    def item_ids(self) -> list[int]:
        return [p.item_id for p in self.placements]


def unit_bin(d: int) -> tuple[Fraction, ...]:
    return (Fraction(1),) * d


def compact_bins(placements: Iterable[Placement]) -> list[Placement]:
    """Renumber bins ``0..m-1`` in order of first use, dropping empty ones."""
    placements = list(placements)
    order = sorted({p.bin for p in placements})
    remap = {b: n for n, b in enumerate(order)}
    return [Placement(p.item_id, p.position, p.lengths, remap[p.bin], p.orientation)
            for p in placements]


def scale_packing(packing: Packing, bin_lengths: Sequence[Fraction]) -> Packing:
    """Map a unit-bin packing onto bins with the given side lengths."""
    L = tuple(to_rational(x) for x in bin_lengths)
    out = []
    for p in packing.placements:
        out.append(Placement(p.item_id, tuple(x * s for x, s in zip(p.position, L)),
                             tuple(x * s for x, s in zip(p.lengths, L)), p.bin, p.orientation))
    scaled_bin = tuple(a * b for a, b in zip(packing.bin_lengths, L))
    return Packing(packing.kind, scaled_bin, out, packing.shelves)


@dataclass(frozen=True)
class Violation:
    kind: str          # "containment" | "overlap" | "duplicate" | "missing" | "unexpected" | "shape"
    items: tuple
    message: str


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}

    def __str__(self) -> str:
        if self.ok:
            return "valid"
        return "\n".join(f"{v.kind}: {v.message}" for v in self.violations)


def _overlaps(a: Placement, b: Placement) -> bool:
    return all(max(pa, pb) < min(pa + la, pb + lb)
               for pa, la, pb, lb in zip(a.position, a.lengths, b.position, b.lengths))


def validate_packing(packing: Packing, expected_ids: Optional[Iterable[int]] = None) -> ValidationReport:
    """Report containment failures and positive-volume overlaps.

    Touching faces are allowed.  For strip packings the last axis is only
    bounded below.  When ``expected_ids`` is given, every id must appear
    exactly once.
    """
    report = ValidationReport()
    add = report.violations.append
    d = packing.d
    L = packing.bin_lengths
    strip = packing.kind is PackingKind.STRIP
    counts: dict[int, int] = defaultdict(int)
    good: list[Placement] = []
    for p in packing.placements:
        counts[p.item_id] += 1
        if len(p.position) != d or len(p.lengths) != d:
            add(Violation("shape", (p.item_id,), f"item {p.item_id} has wrong dimension"))
            continue
        if any(x <= 0 for x in p.lengths):
            add(Violation("shape", (p.item_id,), f"item {p.item_id} has a non-positive length"))
            continue
        if p.bin < 0:
            add(Violation("containment", (p.item_id,), f"item {p.item_id} in negative bin"))
        for j in range(d):
            lo, hi = p.position[j], p.position[j] + p.lengths[j]
            bounded = not (strip and j == d - 1)
            if lo < 0 or (bounded and hi > L[j]):
                add(Violation("containment", (p.item_id,),
                              f"item {p.item_id} spans [{lo}, {hi}] on axis {j} (bin {L[j]})"))
        good.append(p)
    for item_id, c in counts.items():
        if c > 1:
            add(Violation("duplicate", (item_id,), f"item {item_id} placed {c} times"))
    if expected_ids is not None:
        expected = set(expected_ids)
        for item_id in sorted(expected - counts.keys()):
            add(Violation("missing", (item_id,), f"item {item_id} not placed"))
        for item_id in sorted(counts.keys() - expected):
            add(Violation("unexpected", (item_id,), f"item {item_id} not in the instance"))

    bins: dict[int, list[Placement]] = defaultdict(list)
    for p in good:
        bins[p.bin].append(p)
    for b, group in bins.items():
        group.sort(key=lambda p: (p.position[0], p.item_id))
        for n, a in enumerate(group):
            a_end = a.position[0] + a.lengths[0]
            for other in group[n + 1:]:
                if other.position[0] >= a_end:
                    break
                if _overlaps(a, other):
                    pair = tuple(sorted((a.item_id, other.item_id)))
                    add(Violation("overlap", pair, f"items {pair[0]} and {pair[1]} overlap in bin {b}"))
    return report
