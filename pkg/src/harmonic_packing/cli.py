"""Command-line entry point: solve, validate, run oracles and generate instances."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from fractions import Fraction
from typing import Optional, Sequence

from .fullh import fullh_bp, fullh_mcbp
from .harmonic import (DomainError, HarmonicContext, compute_T, decimal_string, f_volume, to_rational,
                       type_vector, wf_volume)
from .hgap import BudgetExhausted, delta_of, hgap, inflate_bound
from .instances import (DISTRIBUTIONS, Instance, build_itemsets, canonical_json, dump_instance,
                        generate, height_itemsets, matched_items, parse_instance, policy_of,
                        to_jsonable)
from .knapsack import K_KNAPSACK, hdh_ks, knapsack_size
from .model import (InfeasibleOrientation, InputError, Item, Packing, PackingKind, Placement,
                    RotationKind, RotationPolicy, scale_packing, validate_packing)
from .oracle import (Infeasible, OracleLimit, opt_dbp_exact, opt_mcbp_exact, opt_mcks_exact,
                     opt_strip_exact)
from .results import Bound, SolveResult
from .strip import hdh_mcsp, hdh_sp

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_INPUT = 2
EXIT_TRUNCATED = 3

SOLVERS = ("pack-bp", "pack-mcbp", "pack-hgap", "pack-sp", "pack-mcsp", "pack-ks")


# -- report assembly --------------------------------------------------------------

def exact(x: Fraction) -> dict:
    return {"exact": Fraction(x), "decimal": decimal_string(Fraction(x))}


def packing_data(p: Packing) -> dict:
    return {
        "kind": p.kind.value,
        "bin": list(p.bin_lengths),
        "placements": [{"item": q.item_id, "bin": q.bin, "position": list(q.position),
                        "lengths": list(q.lengths),
                        **({"orientation": list(q.orientation)} if q.orientation is not None else {})}
                       for q in sorted(p.placements, key=lambda q: (q.bin, q.item_id))],
    }


def packing_from_data(data: dict) -> Packing:
    try:
        kind = PackingKind(data["kind"])
        bin_lengths = tuple(to_rational(x) for x in data["bin"])
        placements = [Placement(int(q["item"]), tuple(to_rational(x) for x in q["position"]),
                                tuple(to_rational(x) for x in q["lengths"]), int(q.get("bin", 0)),
                                tuple(q["orientation"]) if q.get("orientation") is not None else None)
                      for q in data["placements"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed packing: {exc}") from None
    return Packing(kind, bin_lengths, placements)


def ledger(solver: str, result: SolveResult, items: Sequence[Item], ctx: HarmonicContext,
           eps: Optional[Fraction]) -> list[Bound]:
    """Recompute each guarantee from the chosen items, not from solver stats."""
    items = list(items)
    if not items:
        return []
    d = items[0].d
    if solver in ("pack-bp", "pack-mcbp"):
        Q = len({type_vector(i.lengths, ctx) for i in items})
        vol_f = sum((f_volume(i.lengths, ctx) for i in items), Fraction(0))
        return [Bound("bins < Q + vol(f_k(I))", Q + vol_f, Fraction(result.bins))]
    if solver in ("pack-sp", "pack-mcsp"):
        Q = len({type_vector(i.lengths, ctx, base_only=True) for i in items})
        vol_wf = sum((wf_volume(i.lengths, ctx) for i in items), Fraction(0))
        return [Bound("height < Q + vol(wf_k(I))", Q + vol_wf, result.packing.height)]
    if solver == "pack-ks":
        ks_ctx = HarmonicContext(K_KNAPSACK)
        vol_wh = sum((knapsack_size(i, ks_ctx) for i in items), Fraction(0))
        b = Fraction(result.stats["bins_inner"])
        return [Bound("b <= 3^(d-1) + ceil(2 T_3^(d-1) vol(wH_3(J)))",
                      Fraction(3 ** (d - 1) + math.ceil(2 * ks_ctx.T ** (d - 1) * vol_wh)), b, "<="),
                Bound("b <= 3^d", Fraction(3 ** d), b, "<=")]
    if solver == "pack-hgap":
        Q = len({type_vector(i.lengths, ctx, base_only=True) for i in items})
        bound = inflate_bound(result.stats["plan_bins"], len(result.stats["heights"]), Q, delta_of(eps))
        return [Bound("bins < m/(1-delta) + t(Q-1) + 1 + delta Q/(1-delta)", bound, Fraction(result.bins))]
    return []


def _policy(inst: Instance, args) -> RotationPolicy:
    return policy_of(inst, args.rotations)


def solve(args, inst: Instance) -> dict:
    ctx = HarmonicContext(args.k)
    solver = args.command
    eps = to_rational(args.epsilon) if args.epsilon is not None else None
    policy = _policy(inst, args)
    cube = len(set(inst.bin_lengths)) == 1
    started = time.perf_counter()

    if solver == "pack-bp":
        if any(len(s) != 1 for s in inst.itemsets):
            raise InputError("pack-bp expects singleton itemsets; use pack-mcbp")
        if policy.kind is RotationKind.ALL and not cube:
            items = matched_items(inst, ctx)
            result = fullh_bp(items, ctx)
            result.assortment = {n: i for n, i in enumerate(items)}
        elif policy.kind is RotationKind.NONE or (policy.kind is RotationKind.ALL and cube):
            items = [s.members[0] for s in build_itemsets(inst, RotationPolicy())]
            result = fullh_bp(items, ctx)
            result.assortment = {n: i for n, i in enumerate(items)}
        else:
            result = fullh_mcbp(build_itemsets(inst, policy), ctx)
    elif solver == "pack-mcbp":
        result = fullh_mcbp(build_itemsets(inst, policy), ctx)
    elif solver == "pack-hgap":
        eps = eps if eps is not None else Fraction(1, 2)
        sets = height_itemsets(inst, ctx, policy)
        result = hgap(sets, eps, ctx, budget=args.budget)
    elif solver == "pack-sp":
        if any(len(s) != 1 for s in inst.itemsets):
            raise InputError("pack-sp expects singleton itemsets; use pack-mcsp")
        if policy.kind is RotationKind.NONE:
            items = [s.members[0] for s in build_itemsets(inst, policy)]
            result = hdh_sp(items, ctx)
            result.assortment = {n: i for n, i in enumerate(items)}
        else:
            result = hdh_mcsp(build_itemsets(inst, policy), ctx)
    elif solver == "pack-mcsp":
        result = hdh_mcsp(build_itemsets(inst, policy), ctx)
    elif solver == "pack-ks":
        eps = eps if eps is not None else Fraction(1, 2)
        if args.k != K_KNAPSACK:
            print(f"note: knapsack uses k = {K_KNAPSACK}", file=sys.stderr)
        ctx = HarmonicContext(K_KNAPSACK)
        result = hdh_ks(build_itemsets(inst, policy), eps, ctx)
    else:
        raise InputError(f"unknown solver {solver}")
    elapsed = (time.perf_counter() - started) * 1000

    chosen = list(result.assortment.values())
    # the knapsack guarantee concerns every item the FPTAS selected, not just the kept bin
    bounds = ledger(solver, result, result.stats.get("selection", chosen), ctx, eps)
    packing = result.packing
    if inst.bin is not None:
        packing = scale_packing(packing, inst.bin_lengths)
    expected = sorted(i.id for i in chosen) if solver != "pack-ks" else None
    report = validate_packing(packing, expected)

    out: dict = {"solver": solver, "k": ctx.k, "seed": args.seed, "runtime_ms": round(elapsed, 3),
                 "valid": report.ok, "packing": packing_data(packing),
                 "bounds": [{"name": b.name, "value": b.value, "observed": b.observed,
                             "relation": b.relation, "pass": b.passed} for b in bounds],
                 "assortment": {str(s): {"item": i.id, **({"orientation": list(i.orientation)}
                                                           if i.orientation is not None else {})}
                                for s, i in sorted(result.assortment.items())}}
    if eps is not None and solver in ("pack-hgap", "pack-ks"):
        out["epsilon"] = eps
    if solver == "pack-hgap":
        out["delta"] = result.stats["delta"]
        out["plan"] = {"heights": result.stats["heights"], "bins": result.stats["plan_bins"],
                       "index": result.stats["plan_index"], "evaluated": result.stats["plans_evaluated"],
                       "truncated": result.stats["truncated"]}
        out["additive"] = result.stats["additive"]
    if packing.kind is PackingKind.STRIP:
        out["height"] = exact(packing.height)
    else:
        out["bins"] = packing.num_bins
    if "Q" in result.stats:
        out["Q"] = result.stats["Q"]
    for key in ("vol_f", "vol_wf"):
        if key in result.stats:
            out[key] = exact(result.stats[key])
    if solver == "pack-ks":
        out["profit"] = exact(result.stats["profit"])
        out["selected"] = result.stats["selected"]
    return out


def emit(data: dict, fmt: str, stream=None) -> None:
    stream = stream or sys.stdout
    if fmt == "json":
        stream.write(canonical_json(data))
        return
    flat = {}
    for key, value in data.items():
        if key in ("packing", "assortment", "bounds", "plan"):
            continue
        if isinstance(value, dict) and "exact" in value:
            flat[key] = value["exact"]
            flat[key + "_decimal"] = value["decimal"]
        else:
            flat[key] = value
    if "bounds" in data:
        flat["bounds_pass"] = all(b["pass"] for b in data["bounds"])
    flat = to_jsonable(flat)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=sorted(flat), lineterminator="\n")
    writer.writeheader()
    writer.writerow(flat)
    stream.write(buf.getvalue())


# -- subcommands ----------------------------------------------------------------------

def cmd_solve(args) -> int:
    inst = parse_instance(args.instance)
    emit(solve(args, inst), args.out)
    return EXIT_OK


def cmd_validate(args) -> int:
    with open(args.solution) if args.solution != "-" else sys.stdin as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid JSON: {exc}") from None
    packing = packing_from_data(data.get("packing", data))
    expected = None
    if args.instance:
        inst = parse_instance(args.instance)
        expected = range(inst.n_items) if all(len(s) == 1 for s in inst.itemsets) else None
    report = validate_packing(packing, expected)
    out = {"valid": report.ok, "bins": packing.num_bins,
           "violations": [{"kind": v.kind, "items": list(v.items), "message": v.message}
                          for v in report.violations]}
    emit(out, args.out)
    return EXIT_OK if report.ok else EXIT_INVALID


def cmd_oracle(args) -> int:
    inst = parse_instance(args.instance)
    policy = _policy(inst, args)
    sets = build_itemsets(inst, policy)
    problem = args.problem
    if problem == "bp":
        if policy.kind is RotationKind.NONE and all(len(s) == 1 for s in inst.itemsets):
            value: object = opt_dbp_exact([s.members[0] for s in sets])
        else:
            value = opt_mcbp_exact(sets)
    elif problem == "sp":
        if any(len(s.members) != 1 for s in sets):
            raise InputError("the strip oracle takes fixed orientations")
        value = exact(opt_strip_exact([s.members[0] for s in sets]))
    elif problem == "ks":
        value = exact(opt_mcks_exact(sets))
    else:
        raise InputError(f"unknown problem {problem}")
    emit({"problem": problem, "opt": value}, args.out)
    return EXIT_OK


def cmd_tk(args) -> int:
    ks = range(args.k, args.upto + 1) if args.upto else [args.k]
    if args.out == "csv":
        rows = [{"k": k, "T": compute_T(k), "T_decimal": decimal_string(compute_T(k))} for k in ks]
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=["k", "T", "T_decimal"], lineterminator="\n")
        writer.writeheader()
        for r in rows:
            writer.writerow(to_jsonable(r))
        sys.stdout.write(buf.getvalue())
    else:
        for k in ks:
            print(compute_T(k) if not args.upto else f"{k} {compute_T(k)}")
    return EXIT_OK


def cmd_gen(args) -> int:
    inst = generate(args.n, args.d, args.distribution, args.seed, k=args.k, q=args.q, grid=args.grid,
                    members=args.members, profits=args.profits)
    sys.stdout.write(dump_instance(inst))
    return EXIT_OK


def _default_k() -> int:
    raw = os.environ.get("HARMONIC_K")
    if raw is None:
        return 4
    try:
        return int(raw)
    except ValueError:
        return 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="harmonic-pack", description=__doc__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--k", type=int, default=_default_k(), help="harmonic parameter (env HARMONIC_K)")
    common.add_argument("--out", choices=("json", "csv"), default="json")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1, help="accepted for compatibility; solves run sequentially")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in SOLVERS:
        p = sub.add_parser(name, parents=[common], help=f"run the {name[5:]} solver")
        p.add_argument("instance", help="instance JSON path or -")
        p.add_argument("--epsilon", default=None)
        p.add_argument("--rotations", default=None, choices=("none", "all", "fix-last-axis"))
        p.add_argument("--budget", type=int, default=None, help="maximum number of shelf plans")
        p.set_defaults(func=cmd_solve)

    p = sub.add_parser("validate", parents=[common], help="check a packing from a solver report")
    p.add_argument("solution")
    p.add_argument("--instance", default=None)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("oracle", parents=[common], help="exact optimum for tiny instances")
    p.add_argument("instance")
    p.add_argument("--problem", choices=("bp", "sp", "ks"), default="bp")
    p.add_argument("--rotations", default=None, choices=("none", "all", "fix-last-axis"))
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("tk", parents=[common], help="print T_k")
    p.add_argument("--upto", type=int, default=None)
    p.set_defaults(func=cmd_tk)

    p = sub.add_parser("gen", parents=[common], help="generate a random instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--distribution", choices=DISTRIBUTIONS, default="uniform-rational-grid")
    p.add_argument("--q", type=int, default=None, help="type class for type-stratified")
    p.add_argument("--grid", type=int, default=20)
    p.add_argument("--members", type=int, default=1)
    p.add_argument("--profits", action="store_true")
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        if args.k < 3:
            raise DomainError("k must be at least 3")
        return args.func(args)
    except BudgetExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TRUNCATED
    except (InputError, InfeasibleOrientation, DomainError, Infeasible, OracleLimit,
            ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
