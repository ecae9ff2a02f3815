import random
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from harmonic_packing.harmonic import HarmonicContext, wf_volume
from harmonic_packing.model import InputError, Item, PackingKind, validate_packing
from harmonic_packing.oracle import opt_strip_exact
from harmonic_packing.strip import build_shelves, hdh_mcsp, hdh_sp, lower_bound_sp

from helpers import items_strategy, itemsets_strategy, mixed_items


@given(st.integers(2, 4).flatmap(lambda d: items_strategy(d, max_n=25)), st.integers(3, 6))
def test_strip_valid_and_bounded(items, k):
    ctx = HarmonicContext(k)
    res = hdh_sp(items, ctx)
    assert res.packing.kind is PackingKind.STRIP
    assert validate_packing(res.packing, [i.id for i in items]).ok
    if items:
        assert res.stats["height"] < res.stats["Q"] + res.stats["vol_wf"]
        assert res.packing.height == res.stats["height"]


@given(items_strategy(2, max_n=20), st.integers(3, 5))
def test_shelves_sorted_within_class(items, k):
    ctx = HarmonicContext(k)
    shelves = build_shelves(items, ctx)
    by_type = {}
    for s in shelves:
        by_type.setdefault(s.btype, []).append(s)
        assert s.height == max(i.height for i in s.items)
    for group in by_type.values():
        hs = [i.height for s in group for i in s.items]
        assert hs == sorted(hs, reverse=True)


def test_strip_needs_two_dims():
    with pytest.raises(InputError):
        hdh_sp([Item(0, (F(1, 2),))], HarmonicContext(4))


def test_strip_empty():
    assert hdh_sp([], HarmonicContext(4)).stats["height"] == 0


@pytest.mark.parametrize("seed", range(15))
def test_strip_boundary_lengths(seed):
    rng = random.Random(seed)
    items = mixed_items(rng, 30, rng.randint(2, 3), 5)
    res = hdh_sp(items, HarmonicContext(5))
    assert validate_packing(res.packing, [i.id for i in items]).ok


@given(itemsets_strategy(2, max_n=8))
def test_mcsp_chooses_min_wf(itemsets):
    ctx = HarmonicContext(4)
    res = hdh_mcsp(itemsets, ctx)
    for s in itemsets:
        assert wf_volume(res.assortment[s.id].lengths, ctx) == min(wf_volume(m.lengths, ctx) for m in s.members)
    assert validate_packing(res.packing, [m.id for m in res.assortment.values()]).ok


@pytest.mark.parametrize("seed", range(10))
def test_strip_oracle_sandwich(seed):
    rng = random.Random(seed)
    ctx = HarmonicContext(4)
    items = [Item(n, (F(rng.randint(1, 8), 8), F(rng.randint(1, 8), 8))) for n in range(rng.randint(1, 4))]
    opt = opt_strip_exact(items)
    assert lower_bound_sp(items, ctx) <= opt <= hdh_sp(items, ctx).stats["height"]
