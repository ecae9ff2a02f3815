"""JSON instance files: parsing, canonical output and random generators."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import IO, Any, Optional, Sequence, Union

from .harmonic import HarmonicContext, format_rational, to_rational
from .model import (InfeasibleOrientation, InputError, Item, Itemset, Objective, RotationKind,
                    RotationPolicy, best_orientation_perm)

DISTRIBUTIONS = ("uniform-rational-grid", "type-stratified", "rotation-sensitive")


class ParseError(InputError):
    """Schema violation; ``pointer`` is a JSON pointer to the offending value."""

    def __init__(self, pointer: str, message: str):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer


@dataclass
class RawItem:
    lengths: tuple[Fraction, ...]
    profit: Optional[Fraction] = None


@dataclass
class Instance:
    """Lengths are as written in the file, i.e. in bin units before scaling."""

    d: int
    itemsets: list[list[RawItem]]
    bin: Optional[tuple[Fraction, ...]] = None
    rotation: Optional[str] = None
    extra: dict = field(default_factory=dict)

    @property
    def bin_lengths(self) -> tuple[Fraction, ...]:
        return self.bin or (Fraction(1),) * self.d

    @property
    def n_items(self) -> int:
        return sum(len(s) for s in self.itemsets)


def _rational(value: Any, pointer: str) -> Fraction:
    if isinstance(value, float) or isinstance(value, bool):
        raise ParseError(pointer, "rationals must be strings or integers, not floats")
    try:
        return to_rational(value)
    except (TypeError, ValueError) as exc:
        raise ParseError(pointer, str(exc)) from None


def parse_instance_data(data: Any) -> Instance:
    if not isinstance(data, dict):
        raise ParseError("", "instance must be an object")
    if "d" not in data:
        raise ParseError("/d", "missing")
    d = data["d"]
    if isinstance(d, bool) or not isinstance(d, int) or d < 1:
        raise ParseError("/d", "must be a positive integer")
    bin_lengths = None
    if data.get("bin") is not None:
        raw = data["bin"]
        if not isinstance(raw, list) or len(raw) != d:
            raise ParseError("/bin", f"must be a list of {d} rationals")
        bin_lengths = tuple(_rational(x, f"/bin/{j}") for j, x in enumerate(raw))
        for j, x in enumerate(bin_lengths):
            if x <= 0:
                raise ParseError(f"/bin/{j}", "bin lengths must be positive")
    rotation = data.get("rotation")
    if rotation is not None:
        if not isinstance(rotation, str):
            raise ParseError("/rotation", "must be a policy name")
        try:
            RotationPolicy.parse(rotation)
        except InputError as exc:
            raise ParseError("/rotation", str(exc)) from None
    sets = data.get("itemsets")
    if not isinstance(sets, list):
        raise ParseError("/itemsets", "must be a list of itemsets")
    L = bin_lengths or (Fraction(1),) * d
    longest = max(L)
    itemsets = []
    for s, members in enumerate(sets):
        if not isinstance(members, list) or not members:
            raise ParseError(f"/itemsets/{s}", "an itemset is a non-empty list of items")
        out = []
        for m, entry in enumerate(members):
            ptr = f"/itemsets/{s}/{m}"
            if not isinstance(entry, dict) or "lengths" not in entry:
                raise ParseError(ptr, "an item is an object with 'lengths'")
            lengths = entry["lengths"]
            if not isinstance(lengths, list) or len(lengths) != d:
                raise ParseError(ptr + "/lengths", f"must list {d} rationals")
            values = tuple(_rational(x, f"{ptr}/lengths/{j}") for j, x in enumerate(lengths))
            for j, x in enumerate(values):
                limit = longest if rotation not in (None, "none") else L[j]
                if x <= 0 or x > limit:
                    raise ParseError(f"{ptr}/lengths/{j}", f"length {x} outside (0, {limit}]")
            profit = None
            if entry.get("profit") is not None:
                profit = _rational(entry["profit"], ptr + "/profit")
                if profit < 0:
                    raise ParseError(ptr + "/profit", "profit must be non-negative")
            out.append(RawItem(values, profit))
        itemsets.append(out)
    extra = {k: v for k, v in data.items() if k not in ("d", "bin", "rotation", "itemsets")}
    return Instance(d, itemsets, bin_lengths, rotation, extra)


def parse_instance(source: Union[str, Path, IO[str]]) -> Instance:
    """Parse from a path, an open stream or ``-`` for stdin."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        if str(source) == "-":
            import sys
            text = sys.stdin.read()
        else:
            text = Path(source).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError("", f"invalid JSON: {exc}") from None
    return parse_instance_data(data)


def to_jsonable(value: Any) -> Any:
    """Rationals become lowest-terms strings; containers recurse."""
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    return value


def canonical_json(value: Any) -> str:
    return json.dumps(to_jsonable(value), sort_keys=True, indent=2) + "\n"


def instance_data(inst: Instance) -> dict:
    data: dict = {"d": inst.d, "itemsets": [
        [{"lengths": list(m.lengths), **({"profit": m.profit} if m.profit is not None else {})}
         for m in s] for s in inst.itemsets]}
    if inst.bin is not None:
        data["bin"] = list(inst.bin)
    if inst.rotation is not None:
        data["rotation"] = inst.rotation
    return data


def dump_instance(inst: Instance) -> str:
    return canonical_json(instance_data(inst))


# -- building solver input ---------------------------------------------------------

def _scaled(raw: Sequence[Fraction], L: Sequence[Fraction], perm: Sequence[int]) -> Optional[tuple]:
    out = tuple(raw[perm[j]] / L[j] for j in range(len(L)))
    return None if any(x > 1 for x in out) else out


def variants(raw: RawItem, item_id: int, L: Sequence[Fraction], policy: RotationPolicy) -> list[Item]:
    """Allowed orientations that fit the bin, scaled to unit lengths, duplicates collapsed."""
    d = len(L)
    seen: dict[tuple, Item] = {}
    for perm in sorted(policy.allowed(d)):
        lengths = _scaled(raw.lengths, L, perm)
        if lengths is not None and lengths not in seen:
            seen[lengths] = Item(item_id, lengths, raw.profit, perm if perm != tuple(range(d)) else None)
    if not seen:
        raise InfeasibleOrientation(f"item {item_id} fits the bin in no allowed orientation")
    return list(seen.values())


def policy_of(inst: Instance, override: Optional[str] = None) -> RotationPolicy:
    name = override or inst.rotation or "none"
    return RotationPolicy.parse(name)


def build_itemsets(inst: Instance, policy: RotationPolicy) -> list[Itemset]:
    """Itemsets in unit-bin coordinates; item ids run over the flattened file."""
    out = []
    item_id = 0
    for s, members in enumerate(inst.itemsets):
        chosen: list[Item] = []
        for raw in members:
            chosen += variants(raw, item_id, inst.bin_lengths, policy)
            item_id += 1
        out.append(Itemset(s, tuple(chosen)))
    return out


def matched_items(inst: Instance, ctx: HarmonicContext, objective: Objective = Objective.FULL_VOL) -> list[Item]:
    """Every item in its harmonic-volume minimising orientation (single-member itemsets only)."""
    out = []
    item_id = 0
    for members in inst.itemsets:
        for raw in members:
            perm, _ = best_orientation_perm(raw.lengths, inst.bin_lengths, ctx, objective)
            lengths = _scaled(raw.lengths, inst.bin_lengths, perm)
            out.append(Item(item_id, lengths, raw.profit, perm))
            item_id += 1
    return out


def height_itemsets(inst: Instance, ctx: HarmonicContext, policy: RotationPolicy) -> list[Itemset]:
    """Per raw item, one orientation per distinct height with the best base.

    For ``ALL`` this keeps at most ``d`` members; other policies fall back to
    every allowed orientation.
    """
    if policy.kind is not RotationKind.ALL:
        return build_itemsets(inst, policy)
    out = []
    item_id = 0
    d = inst.d
    for s, members in enumerate(inst.itemsets):
        chosen: list[Item] = []
        for raw in members:
            heights = set()
            for axis in range(d):
                if raw.lengths[axis] in heights:
                    continue
                try:
                    perm, _ = best_orientation_perm(raw.lengths, inst.bin_lengths, ctx,
                                                    Objective.BASE_W, height_axis=axis)
                except InfeasibleOrientation:
                    continue
                heights.add(raw.lengths[axis])
                chosen.append(Item(item_id, _scaled(raw.lengths, inst.bin_lengths, perm), raw.profit, perm))
            if not heights:
                raise InfeasibleOrientation(f"item {item_id} fits the bin in no orientation")
            item_id += 1
        out.append(Itemset(s, tuple(chosen)))
    return out


# -- generators -------------------------------------------------------------------

def _grid_in(rng: random.Random, lo: Fraction, hi: Fraction, steps: int) -> Fraction:
    """A point of ``(lo, hi]`` on a grid of ``steps`` cells."""
    return lo + (hi - lo) * Fraction(rng.randint(1, steps), steps)


def generate(n: int, d: int, distribution: str = "uniform-rational-grid", seed: int = 0,
             k: int = 4, q: Optional[int] = None, grid: int = 20, members: int = 1,
             profits: bool = False) -> Instance:
    """Deterministic random instance with ``n`` itemsets of ``members`` items each."""
    if distribution not in DISTRIBUTIONS:
        raise InputError(f"unknown distribution {distribution!r}")
    if n < 0 or d < 1 or members < 1 or grid < 1:
        raise InputError("n >= 0, d >= 1, members >= 1 and grid >= 1 are required")
    rng = random.Random(seed)

    def length() -> Fraction:
        if distribution == "uniform-rational-grid":
            return Fraction(rng.randint(1, grid), grid)
        cls = q if q is not None else rng.randint(1, k)
        if cls >= k:
            return _grid_in(rng, Fraction(0), Fraction(1, k), grid)
        return _grid_in(rng, Fraction(1, cls + 1), Fraction(1, cls), grid)

    def item() -> RawItem:
        if distribution == "rotation-sensitive":
            long_axis = rng.randrange(d)
            lengths = tuple(_grid_in(rng, Fraction(1, 2), Fraction(1), grid) if j == long_axis
                            else _grid_in(rng, Fraction(0), Fraction(1, k), grid) for j in range(d))
        else:
            lengths = tuple(length() for _ in range(d))
        profit = Fraction(rng.randint(1, 10)) if profits else None
        return RawItem(lengths, profit)

    itemsets = [[item() for _ in range(members)] for _ in range(n)]
    return Instance(d, itemsets)
