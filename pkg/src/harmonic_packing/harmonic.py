"""Exact rational arithmetic and the harmonic function family.

Every length handled by the solvers is a :class:`fractions.Fraction`.  The
harmonic map rounds a length in ``(1/(q+1), 1/q]`` up to ``1/q`` for
``q < k`` and scales lengths ``<= 1/k`` by ``k/(k-2)``.  ``T_k`` is the
smallest constant making ``f_k / T_k`` a weighting function.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence, Union

Rational = Fraction
RationalLike = Union[Fraction, int, str]


class DomainError(ValueError):
    """A value lies outside the domain of a harmonic function."""


def to_rational(value: RationalLike) -> Fraction:
    """Parse ``value`` exactly.

    Accepts Fractions, ints, decimal strings (``"0.3"``) and ``"p/q"``
    strings.  Floats are rejected since they cannot be parsed losslessly.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not text:
            raise ValueError("empty rational literal")
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational literal: {value!r}") from exc
    raise TypeError(f"cannot convert {type(value).__name__} to an exact rational")


def format_rational(x: Fraction) -> str:
    """Lowest-terms text form: ``"3/10"``, ``"2"``."""
    return str(Fraction(x))


def decimal_string(x: Fraction, places: int = 6) -> str:
    """Decimal rendering for reports, rounded half-up at ``places`` digits."""
    x = Fraction(x)
    sign = "-" if x < 0 else ""
    scaled = abs(x) * 10**places
    q = math.floor(scaled + Fraction(1, 2))
    whole, frac = divmod(q, 10**places)
    if places == 0:
        return f"{sign}{whole}"
    return f"{sign}{whole}.{frac:0{places}d}"


@lru_cache(maxsize=None)
def compute_T(k: int) -> Fraction:
    """Smallest ``T`` such that ``f_k / T`` is a weighting function.

    The supremum of ``sum f_k(x_i)`` over ``sum x_i <= 1`` is approached by
    ``n_q`` items just above ``1/(q+1)`` for each ``q < k`` plus small
    filler of slope ``k/(k-2)``.  Items just above ``1/(q+1)`` only exist in
    the limit when the boundaries themselves sum to strictly less than one,
    so the enumeration ranges over vectors with ``sum n_q/(q+1) < 1``.
    """
    if not isinstance(k, int) or k < 3:
        raise DomainError(f"k must be an integer >= 3, got {k!r}")
    slope = Fraction(k, k - 2)
    best = slope  # empty vector: all filler

    def walk(q: int, used: Fraction, value: Fraction) -> None:
        nonlocal best
        if q == k:
            total = value + slope * (1 - used)
            if total > best:
                best = total
            return
        step = Fraction(1, q + 1)
        n = 0
        while used + n * step < 1:
            walk(q + 1, used + n * step, value + Fraction(n, q))
            n += 1

    walk(1, Fraction(0), Fraction(0))
    return best


@dataclass(frozen=True)
class HarmonicContext:
    """Parameter ``k`` together with its exact ``T_k``."""

    k: int
    T: Fraction = field(init=False)
    small_slope: Fraction = field(init=False)

    def __post_init__(self):
        if not isinstance(self.k, int) or self.k < 3:
            raise DomainError(f"k must be an integer >= 3, got {self.k!r}")
        object.__setattr__(self, "T", compute_T(self.k))
        object.__setattr__(self, "small_slope", Fraction(self.k, self.k - 2))

    def type_of(self, x: Fraction) -> int:
        return type_of(x, self)

    def f(self, x: Fraction) -> Fraction:
        return f_of(x, self)

    def H(self, x: Fraction) -> Fraction:
        return f_of(x, self) / self.T


def _check_unit(x: Fraction) -> Fraction:
    if not isinstance(x, Fraction):
        x = to_rational(x)
    if x <= 0 or x > 1:
        raise DomainError(f"length must lie in (0, 1], got {x}")
    return x


def _k(ctx: HarmonicContext | int) -> int:
    return ctx if isinstance(ctx, int) else ctx.k


def type_of(x: Fraction, ctx: HarmonicContext | int) -> int:
    """Harmonic class of ``x``: ``q`` for ``x in (1/(q+1), 1/q]``, capped at ``k``."""
    x = _check_unit(x)
    # x in (1/(q+1), 1/q]  <=>  q = floor(1/x)
    q = x.denominator // x.numerator
    return min(q, _k(ctx))


def f_of(x: Fraction, ctx: HarmonicContext | int) -> Fraction:
    k = _k(ctx)
    q = type_of(x, k)
    if q < k:
        return Fraction(1, q)
    return Fraction(k, k - 2) * x


def H_of(x: Fraction, ctx: HarmonicContext) -> Fraction:
    return f_of(x, ctx) / ctx.T


def type_vector(lengths: Sequence[Fraction], ctx: HarmonicContext | int,
                base_only: bool = False) -> tuple[int, ...]:
    if base_only:
        lengths = lengths[:-1]
    return tuple(type_of(x, ctx) for x in lengths)


def prod(values) -> Fraction:
    out = Fraction(1)
    for v in values:
        out *= v
    return out


def volume(lengths: Sequence[Fraction]) -> Fraction:
    return prod(lengths)


def f_volume(lengths: Sequence[Fraction], ctx: HarmonicContext | int) -> Fraction:
    """``vol(f_k(i))``: product of ``f_k`` over every dimension."""
    return prod(f_of(x, ctx) for x in lengths)


def base_width(lengths: Sequence[Fraction], ctx: HarmonicContext | int) -> Fraction:
    """``w(i)``: product of ``f_k`` over the base dimensions (all but the last)."""
    return prod(f_of(x, ctx) for x in lengths[:-1])


def wf_volume(lengths: Sequence[Fraction], ctx: HarmonicContext | int) -> Fraction:
    """``vol(wf_k(i))``: ``f_k`` on the base, raw height."""
    return base_width(lengths, ctx) * lengths[-1]


class TransformMode(enum.Enum):
    FULL_F = "full_f"
    BASE_F = "base_f"
    BASE_H = "base_h"
    ROUND2D = "round2d"


def transform_lengths(lengths: Sequence[Fraction], ctx: HarmonicContext,
                      mode: TransformMode) -> tuple[Fraction, ...]:
    """Apply a harmonic transform to a length vector.

    ``ROUND2D`` returns the pair ``(w, h)`` with ``w`` the product of ``f_k``
    over the base dimensions and ``h`` the last length.
    """
    lengths = tuple(_check_unit(x) for x in lengths)
    if mode is TransformMode.FULL_F:
        return tuple(f_of(x, ctx) for x in lengths)
    if mode is TransformMode.BASE_F:
        return tuple(f_of(x, ctx) for x in lengths[:-1]) + lengths[-1:]
    if mode is TransformMode.BASE_H:
        return tuple(H_of(x, ctx) for x in lengths[:-1]) + lengths[-1:]
    if mode is TransformMode.ROUND2D:
        return (base_width(lengths, ctx), lengths[-1])
    raise ValueError(f"unknown mode {mode!r}")
