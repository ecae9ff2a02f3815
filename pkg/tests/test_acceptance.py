"""The twelve acceptance criteria, each at its stated size and tolerance."""

import itertools
import math
import random
import time
from fractions import Fraction as F

from harmonic_packing.dff import harmonic_weight, identity, unscaled_harmonic, weighting_transform_all
from harmonic_packing.fullh import fullh_bp
from harmonic_packing.harmonic import HarmonicContext, compute_T, f_of, f_volume, prod
from harmonic_packing.hgap import (choose_and_pack, delta_of, guess_shelves, hgap, hgap_additive,
                                   inflate, inflate_bound, round_instance)
from harmonic_packing.instances import DISTRIBUTIONS, build_itemsets, generate
from harmonic_packing.knapsack import hdh_ks, hdh_nf
from harmonic_packing.model import (Item, Itemset, Objective, Packing, PackingKind, Placement,
                                    RotationPolicy, best_orientation_perm, orientations, unit_bin,
                                    validate_packing)
from harmonic_packing.oracle import (opt_dbp_exact, opt_mcbp_exact, opt_mcks_exact, opt_strip_exact,
                                     positions_for, weighting_violation_search)
from harmonic_packing.results import BoundViolation
from harmonic_packing.shelves import Rect, canonical_shelving, is_predecessor
from harmonic_packing.strip import hdh_sp

from helpers import (FIG_HEIGHTS, FIG_WIDTHS, brute_orientation, fits, grid_lengths, guillotine_packing,
                     random_shelving, record, small_area, synthetic_assignment)


def random_items(rng, d, n_max):
    inst = generate(rng.randint(1, n_max), d, rng.choice(DISTRIBUTIONS), rng.randrange(10**6),
                    k=rng.randint(3, 6), grid=rng.choice([10, 20, 60]))
    return [s.members[0] for s in build_itemsets(inst, RotationPolicy())]


def tiny_items(rng, d=2, n_max=5, grid=10):
    return [Item(n, grid_lengths(rng, d, grid)) for n in range(rng.randint(1, n_max))]


def test_criterion_01_t_table():
    compute_T.cache_clear()
    start = time.perf_counter()
    values = [compute_T(k) for k in range(3, 8)]
    elapsed = time.perf_counter() - start
    want = [F(3), F(2), F(11, 6), F(7, 4), F(26, 15)]
    record(1, "T_k table", values == want and elapsed < 1,
           f"{[str(v) for v in values]} in {elapsed:.3f}s")


def test_criterion_02_weighting_property():
    start = time.perf_counter()
    scaled_clean, unscaled_found = [], []
    for k in range(3, 8):
        ctx = HarmonicContext(k)
        scaled_clean.append(weighting_violation_search(harmonic_weight(ctx), trials=10**5, seed=k, k=k) is None)
        cert = weighting_violation_search(unscaled_harmonic(ctx), trials=10**5, seed=k, k=k)
        unscaled_found.append(cert is not None and sum(cert) <= 1 and sum(f_of(x, ctx) for x in cert) > 1)
    elapsed = time.perf_counter() - start
    record(2, "weighting-function search", all(scaled_clean) and all(unscaled_found) and elapsed < 30,
           f"H_k clean {scaled_clean}, f_k certificates {unscaled_found}, {elapsed:.1f}s")


def test_criterion_03_fullh_bound():
    rng = random.Random(3)
    bad = []
    for trial in range(200):
        d, k = rng.choice([2, 3]), rng.choice([3, 4, 5])
        items = random_items(rng, d, 50)
        ctx = HarmonicContext(k)
        res = fullh_bp(items, ctx)
        Q = res.stats["Q"]
        vol_f = sum((f_volume(i.lengths, ctx) for i in items), F(0))
        if not (res.bins < Q + vol_f and validate_packing(res.packing, [i.id for i in items]).ok):
            bad.append(trial)
    record(3, "fullh bins < Q + vol(f_k(I))", not bad, f"200 instances, failures {bad}")


def test_criterion_04_oracle_sandwich():
    rng = random.Random(4)
    start = time.perf_counter()
    bad = []
    for trial in range(50):
        k = rng.choice([3, 4, 5])
        ctx = HarmonicContext(k)
        items = tiny_items(rng)
        opt = opt_dbp_exact(items)
        res = fullh_bp(items, ctx)
        Q = res.stats["Q"]
        if not (opt <= res.bins < Q + ctx.T ** 2 * opt):
            bad.append(trial)
    elapsed = time.perf_counter() - start
    record(4, "opt <= fullh < Q + T_k^d opt", not bad and elapsed < 300,
           f"50 instances, failures {bad}, {elapsed:.1f}s")


def test_criterion_05_hgap_desk_scale():
    rng = random.Random(5)
    ctx = HarmonicContext(4)
    eps = F(1)
    delta = delta_of(eps)
    start = time.perf_counter()
    bad, spot_checks = [], 0
    for trial in range(20):
        items = tiny_items(rng, n_max=5)
        sets = [orientations(i, RotationPolicy.parse("all")) for i in items]
        res = hgap(sets, eps, ctx, exhaustive=True)
        opt = opt_mcbp_exact(sets)
        limit = ctx.T * 2 * opt + hgap_additive(res.stats["Q"], eps)
        ok = (res.bins <= limit and not res.stats["truncated"]
              and validate_packing(res.packing, [i.id for i in items]).ok)
        # every plan that some assortment fits exactly must be accepted
        rects = round_instance(sets, ctx)
        for plan in guess_shelves(rects, delta):
            if len(plan.bins) > 3:
                break
            counts = plan.counts()
            free = sum((1 - sum(c * h for c, h in zip(cfg, plan.heights)) for cfg in plan.bins), F(0))
            for combo in itertools.product(*(s.members for s in rects)):
                if fits(combo, plan.heights, counts, lambda r: r.width, delta):
                    empty = max(0, math.ceil(small_area(combo, delta) - free))
                    spot_checks += 1
                    ok = ok and choose_and_pack(rects, plan, delta, empty_bins=empty) is not None
                    break
        if not ok:
            bad.append(trial)
    elapsed = time.perf_counter() - start
    record(5, "HGaP bound and plan acceptance", not bad and elapsed < 1800,
           f"20 instances, {spot_checks} plan spot-checks, failures {bad}, {elapsed:.1f}s")


def test_criterion_06_inflate_bound():
    rng = random.Random(6)
    bad = []
    for trial in range(50):
        ctx = HarmonicContext(rng.randint(3, 5))
        delta = rng.choice([F(1, 3), F(1, 5), F(1, 9)])
        fa, items = synthetic_assignment(rng, ctx, delta, n=rng.randint(1, 14), d=rng.randint(2, 3))
        packing, stats = inflate(fa, ctx)
        lengths = {i.id: i.lengths for i in items}
        whole = all(p.lengths == lengths[p.item_id] for p in packing.placements)
        bound = inflate_bound(fa.m, fa.t, stats["Q"], delta)
        if not (packing.num_bins < bound and whole and validate_packing(packing, list(lengths)).ok):
            bad.append(trial)
    record(6, "inflate bins < m/(1-delta) + t(Q-1) + 1 + delta Q/(1-delta)", not bad,
           f"50 assignments, failures {bad}")


def test_criterion_07_strip_bounds():
    rng = random.Random(7)
    bad_random, bad_tiny = [], []
    for trial in range(200):
        d, k = rng.choice([2, 3]), rng.choice([3, 4, 5])
        ctx = HarmonicContext(k)
        items = random_items(rng, d, 50)
        res = hdh_sp(items, ctx)
        if not (res.stats["height"] < res.stats["Q"] + res.stats["vol_wf"]
                and validate_packing(res.packing, [i.id for i in items]).ok):
            bad_random.append(trial)
    for trial in range(30):
        ctx = HarmonicContext(rng.choice([3, 4, 5]))
        items = tiny_items(rng, n_max=5)
        opt = opt_strip_exact(items)
        res = hdh_sp(items, ctx)
        if not (opt <= res.stats["height"] < res.stats["Q"] + ctx.T * opt):
            bad_tiny.append(trial)
    record(7, "strip height bounds", not bad_random and not bad_tiny,
           f"200 random failures {bad_random}, 30 tiny failures {bad_tiny}")


def test_criterion_08_hdh_nf():
    rng = random.Random(8)
    bad = []
    for trial in range(200):
        d, k = rng.choice([2, 3]), rng.choice([3, 4, 5])
        ctx = HarmonicContext(k)
        items = random_items(rng, d, 50)
        res = hdh_nf(items, ctx)
        if not (res.bins <= res.stats["Q"] + math.ceil(2 * res.stats["vol_wf"])
                and validate_packing(res.packing, [i.id for i in items]).ok):
            bad.append(trial)
    record(8, "HDH-NF bins <= Q + ceil(2 vol(wf_k(I)))", not bad, f"200 instances, failures {bad}")


def test_criterion_09_hdh_ks():
    rng = random.Random(9)
    eps = F(1, 2)
    start = time.perf_counter()
    bad, fired = [], 0
    for trial in range(30):
        sets, item_id = [], 0
        for s in range(rng.randint(1, 5)):
            members = []
            for _ in range(rng.randint(1, 2)):
                members.append(Item(item_id, grid_lengths(rng, 2, 10), F(rng.randint(1, 10))))
                item_id += 1
            sets.append(Itemset(s, tuple(members)))
        try:
            res = hdh_ks(sets, eps)
        except BoundViolation:
            fired += 1
            continue
        opt = opt_mcks_exact(sets)
        ids = [p.item_id for p in res.packing.placements]
        if not (res.stats["profit"] >= (1 - eps) * F(1, 3 ** 2) * opt
                and res.stats["bins_inner"] <= 9 and validate_packing(res.packing, ids).ok):
            bad.append(trial)
    elapsed = time.perf_counter() - start
    record(9, "HDH-KS profit >= (1-eps) 3^-d opt", not bad and not fired and elapsed < 600,
           f"30 instances, failures {bad}, bin-count assertion fired {fired}x, {elapsed:.1f}s")


def random_valid_packings(rng, count):
    """Guillotine layouts, exact-oracle layouts and solver outputs."""
    out = []
    while len(out) < count:
        kind = len(out) % 3
        d = rng.randint(1, 3)
        if kind == 0:
            out.append(guillotine_packing(rng, d, bins=rng.randint(1, 3), depth=rng.randint(2, 5)))
        elif kind == 1:
            boxes = [grid_lengths(rng, d, 6) for _ in range(rng.randint(1, 5))]
            pos = positions_for(boxes, (F(1),) * d)
            if pos is None:
                continue
            out.append(Packing(PackingKind.BIN, unit_bin(d),
                               [Placement(n, p, b) for n, (p, b) in enumerate(zip(pos, boxes))]))
        else:
            items = random_items(rng, max(d, 2), 20)
            out.append(fullh_bp(items, HarmonicContext(rng.randint(3, 5))).packing)
    return out


def test_criterion_10_dff_transform():
    rng = random.Random(10)
    gs = [identity(), harmonic_weight(HarmonicContext(3)), harmonic_weight(HarmonicContext(4))]
    bad, runs = [], 0
    for n, packing in enumerate(random_valid_packings(rng, 100)):
        ids = [p.item_id for p in packing.placements]
        assert validate_packing(packing, ids).ok
        for choice in itertools.product(gs, repeat=packing.d):
            runs += 1
            if not validate_packing(weighting_transform_all(packing, list(choice)), ids).ok:
                bad.append((n, [g.name for g in choice]))
    record(10, "weighting transform keeps packings valid", not bad,
           f"100 packings, {runs} transforms, failures {bad[:5]}")


def test_criterion_11_canonical_shelving():
    rects = [Rect(w, h, n + 1) for n, (w, h) in enumerate(zip(FIG_WIDTHS, FIG_HEIGHTS))]
    shelves, records = canonical_shelving(rects)
    pattern = {r.rect_id: r.widths for r in records}
    figure_ok = len(shelves) == 3 and pattern == {3: (F(3, 10), F(1, 10)), 5: (F(2, 5), F(1, 2))}
    rng = random.Random(11)
    dominated = 0
    for _ in range(100):
        rs = [Rect(F(rng.randint(1, 20), 20), F(rng.randint(1, 20), 20), n) for n in range(rng.randint(1, 12))]
        canon = [s.height for s in canonical_shelving(rs)[0]]
        dominated += is_predecessor(canon, random_shelving(rs, rng))
    record(11, "canonical shelving", figure_ok and dominated == 100,
           f"figure pattern {'matches' if figure_ok else 'differs'}, dominated {dominated}/100")


def test_criterion_12_rotation_matching():
    rng = random.Random(12)
    mismatches, invariance = 0, 0
    for _ in range(500):
        d = rng.randint(1, 5)
        ctx = HarmonicContext(rng.randint(3, 6))
        lengths = grid_lengths(rng, d, rng.choice([6, 12, 60]))
        for objective in Objective:
            perm, value = best_orientation_perm(lengths, (F(1),) * d, ctx, objective)
            if (value, perm) != brute_orientation(lengths, (F(1),) * d, ctx, objective):
                mismatches += 1
        side = F(rng.randint(1, 3))
        vols = {prod(f_of(lengths[p[j]] / side, ctx) for j in range(d))
                for p in itertools.permutations(range(d))}
        invariance += len(vols) == 1
    record(12, "orientation matching", mismatches == 0 and invariance == 500,
           f"500 items x 2 objectives, {mismatches} mismatches, square-bin invariance {invariance}/500")
