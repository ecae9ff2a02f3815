from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from harmonic_packing.harmonic import (DomainError, HarmonicContext, TransformMode, base_width,
                                       compute_T, decimal_string, f_of, f_volume, format_rational,
                                       H_of, to_rational, transform_lengths, type_of, type_vector,
                                       wf_volume)

unit = st.fractions(min_value=0, max_value=1, max_denominator=500).filter(lambda x: x > 0)
ks = st.integers(3, 9)


def test_t_table_small_k():
    assert [compute_T(k) for k in range(3, 8)] == [F(3), F(2), F(11, 6), F(7, 4), F(26, 15)]


def test_t_k8_value():
    assert compute_T(8) == F(31, 18)


def test_t_decreases_towards_limit():
    values = [compute_T(k) for k in range(3, 13)]
    assert all(a >= b for a, b in zip(values, values[1:]))
    assert all(v > F(16910302, 10**7) for v in values)


@pytest.mark.parametrize("bad", [2, 0, -1, 3.0, "4"])
def test_t_rejects_bad_k(bad):
    with pytest.raises(DomainError):
        compute_T(bad)
    with pytest.raises(DomainError):
        HarmonicContext(bad)


def test_type_boundaries():
    assert type_of(F(1), 4) == 1
    assert type_of(F(1, 2), 4) == 2
    assert type_of(F(1, 2) + F(1, 1000), 4) == 1
    assert type_of(F(1, 3), 4) == 3
    assert type_of(F(1, 4), 4) == 4
    assert type_of(F(1, 100), 4) == 4


def test_f_values():
    ctx = HarmonicContext(4)
    assert f_of(F(1, 2), ctx) == F(1, 2)
    assert f_of(F(2, 5), ctx) == F(1, 2)
    assert f_of(F(3, 10), ctx) == F(1, 3)
    assert f_of(F(1, 5), ctx) == F(2, 5)
    assert H_of(F(1, 5), ctx) == F(1, 5)


@pytest.mark.parametrize("bad", [F(0), F(-1, 2), F(3, 2)])
def test_domain(bad):
    with pytest.raises(DomainError):
        type_of(bad, 4)


@given(unit, ks)
def test_f_dominates_identity(x, k):
    assert f_of(x, k) >= x
    assert f_of(x, k) <= 1


@given(unit, unit, ks)
def test_f_monotone_within_class(x, y, k):
    if x <= y and type_of(x, k) == type_of(y, k):
        assert f_of(x, k) <= f_of(y, k)


def test_f_jumps_down_past_small_boundary():
    # the small tail at 1/k exceeds the value 1/(k-1) just above it
    assert f_of(F(1, 4), 4) == F(1, 2)
    assert f_of(F(1, 4) + F(1, 1000), 4) == F(1, 3)


@given(unit, ks)
def test_type_interval(x, k):
    q = type_of(x, k)
    if q < k:
        assert F(1, q + 1) < x <= F(1, q)
    else:
        assert x <= F(1, k - 1)


@given(st.lists(unit, min_size=1, max_size=4), st.integers(3, 6))
def test_volumes_consistent(lengths, k):
    ctx = HarmonicContext(k)
    assert f_volume(lengths, ctx) == base_width(lengths, ctx) * f_of(lengths[-1], ctx)
    assert wf_volume(lengths, ctx) == base_width(lengths, ctx) * lengths[-1]
    full = transform_lengths(lengths, ctx, TransformMode.FULL_F)
    assert full == tuple(f_of(x, ctx) for x in lengths)
    assert transform_lengths(lengths, ctx, TransformMode.ROUND2D) == (base_width(lengths, ctx), lengths[-1])
    assert type_vector(lengths, ctx, base_only=True) == type_vector(lengths, ctx)[:-1]


def test_rational_parsing_and_formatting():
    assert to_rational("3/6") == F(1, 2)
    assert to_rational(2) == F(2)
    assert format_rational(F(6, 4)) == "3/2"
    assert format_rational(F(4, 2)) == "2"
    assert decimal_string(F(26, 15)) == "1.733333"
    with pytest.raises((TypeError, ValueError)):
        to_rational("abc")
