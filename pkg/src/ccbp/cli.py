"""Command line entry point: ``ccbp <verb> ...``.  Exit status is 1 when a
prediction mismatches or a check finds a violation, 2 on usage errors."""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from . import algorithms, exact, harness
from .analysis import DEFAULT_SLACK, WEIGHT_NAMES, check_ceiling, check_floor, make_weight
from .core import format_rational, lower_bounds, parse_rational, validate_packing
from .generators import GENERATORS, GeneratorError, generate
from .plot import emit_plot

INT_PARAMS = ("k", "t", "N", "M", "d", "q")
RATIONAL_PARAMS = ("beta", "eps")


def _add_scenario_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("kind", choices=sorted(GENERATORS))
    for name in INT_PARAMS:
        p.add_argument(f"--{name}", type=int)
    for name in RATIONAL_PARAMS:
        p.add_argument(f"--{name}", type=parse_rational)


def _scenario(args):
    params = {n: getattr(args, n) for n in INT_PARAMS + RATIONAL_PARAMS if getattr(args, n) is not None}
    return generate(args.kind, **params)


def _print_report(rep: harness.RunReport) -> None:
    row = rep.row()
    print(
        f"{rep.kind} {rep.procedure}: measured={rep.measured_cost} opt={rep.opt_cost}"
        f"{'' if rep.opt_exact else ' (upper)'} ratio={row['ratio_exact']} ({row['ratio_dec']})"
        f" target={row['target_exact']} predicted={rep.predicted_cost} match={row['match']}"
    )


def _parse_values(text: str, convert):
    """``a..b`` (inclusive integer range) or a comma list."""
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [convert(v) for v in text.split(",") if v]


def _parse_point(text: str) -> dict:
    point = {}
    for part in text.split(","):
        key, _, value = part.partition("=")
        if key in INT_PARAMS:
            point[key] = int(value)
        elif key in RATIONAL_PARAMS:
            point[key] = parse_rational(value)
        elif key == "procedure":
            point[key] = value
        else:
            raise argparse.ArgumentTypeError(f"unknown grid key {key!r}")
    return point


def _write(text: str, path: str | None) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_gen(args) -> int:
    sc = _scenario(args)
    inst_path, meta_path = harness.write_scenario(sc, args.out)
    print(f"wrote {inst_path} and {meta_path}: n={sc.instance.n} predicted={sc.predicted_cost} opt={sc.opt_cost}")
    return 0


def cmd_run(args) -> int:
    rep = harness.run(_scenario(args), args.procedure)
    _print_report(rep)
    return 0 if rep.prediction_match else 1


def cmd_opt(args) -> int:
    inst = harness.read_instance(args.instance)
    cert = exact.optimal(inst, limit=args.limit)
    bounds = " ".join(f"{k}={v}" for k, v in lower_bounds(inst).items())
    print(f"n={inst.n} k={inst.k} {bounds}")
    print(f"opt={cert.cost} lower={cert.lower} ({cert.lower_kind}) exact={str(cert.exact).lower()}")
    for b in cert.upper.bins:
        print(" ".join(map(str, b.item_ids)))
    return 0


def cmd_verify_weights(args) -> int:
    sc = _scenario(args)
    procedure = args.procedure or sc.procedures[0]
    packers = {"next_fit": algorithms.next_fit, "worst_fit": algorithms.worst_fit, "first_fit": algorithms.first_fit}
    if procedure not in packers:
        print(f"verify-weights needs a packing algorithm, not {procedure!r}", file=sys.stderr)
        return 2
    k = sc.instance.k
    t = sc.instance.t if sc.instance.beta is not None else None
    w = make_weight(args.weight, k, t)
    ceiling = check_ceiling(sc.opt_cert.upper, w)
    floor = check_floor(packers[procedure](sc.instance), w, args.slack)
    print(f"ceiling: max bin weight {format_rational(max(ceiling.per_bin, default=0))} <= "
          f"{format_rational(ceiling.rho)}: {'pass' if ceiling.passed else 'FAIL'}")
    print(f"floor: total {format_rational(floor.total)} >= {len(floor.per_bin)} - "
          f"{format_rational(floor.floor_slack)}: {'pass' if floor.passed else 'FAIL'}")
    return 0 if ceiling.passed and floor.passed else 1


def cmd_poc(args) -> int:
    inst = harness.read_instance(args.instance)
    sep = exact.clustered_cost(inst, limit=args.limit)
    opt = exact.optimal(inst, limit=args.limit)
    ratio = Fraction(sep.total, opt.cost) if opt.cost else Fraction(1)
    print(f"clustered={sep.total} opt={opt.cost} exact={str(sep.exact and opt.exact).lower()} "
          f"ratio={format_rational(ratio)}")
    if sep.inadmissible:
        print(f"inadmissible clusters: {' '.join(map(str, sep.inadmissible))}")
    return 0


def cmd_batched(args) -> int:
    inst = harness.read_instance(args.instance)
    sep = exact.batched_cost(inst, limit=args.limit)
    opt = exact.optimal(inst, limit=args.limit)
    print(f"batched={sep.total} opt={opt.cost} exact={str(sep.exact and opt.exact).lower()}")
    status = 0
    if args.repack:
        rep = exact.repack_batched(opt.upper, args.q)
        bound = exact.repack_bound(args.q, inst.k, opt.cost)
        valid = validate_packing(inst, rep).valid
        ok = valid and len(rep) <= bound
        print(f"repack={len(rep)} bound={format_rational(bound)} valid={str(valid).lower()}")
        status = 0 if ok else 1
    return status


def cmd_sweep(args) -> int:
    if args.point:
        grid = [_parse_point(p) for p in args.point]
    else:
        grid = {}
        for name in INT_PARAMS:
            if getattr(args, name) is not None:
                grid[name] = _parse_values(getattr(args, name), int)
        for name in RATIONAL_PARAMS:
            if getattr(args, name) is not None:
                grid[name] = _parse_values(getattr(args, name), parse_rational)
        if args.procedure:
            grid["procedure"] = [args.procedure]
    rows = harness.sweep_rows(args.kind, grid, args.workers)
    _write(harness.rows_to_csv(rows), args.out)
    bad = [r for r in rows if r["error"] or r["match"] != "true"]
    return 1 if bad else 0


def cmd_fuzz(args) -> int:
    checks = args.checks.split(",") if args.checks else harness.FUZZ_CHECKS
    report = harness.fuzz(
        args.seed, args.count, args.n_max, args.k_min, args.k_max, args.beta, args.min_size, checks, args.workers
    )
    for name, ran in report.checked.items():
        print(f"{name}: {ran} instances")
    for v in report.violations:
        print(f"VIOLATION #{v.index} {v.check}: {v.detail}")
        print(v.instance, end="")
    print(f"violations: {len(report.violations)}")
    return 0 if report.passed else 1


def cmd_plot(args) -> int:
    with open(args.csv) as fh:
        _write(emit_plot(fh.read()), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ccbp", description="Cardinality-constrained bin packing lab")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("gen", help="write a scenario instance and its JSON sidecar")
    _add_scenario_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("run", help="run a scenario and compare with its prediction")
    _add_scenario_args(p)
    p.add_argument("--procedure", choices=sorted(harness.PROCEDURES))
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("opt", help="certified optimum of an instance file")
    p.add_argument("instance")
    p.add_argument("--limit", type=int, default=exact.DEFAULT_LIMIT)
    p.set_defaults(func=cmd_opt)

    p = sub.add_parser("verify-weights", help="weight ceiling and floor checks on a scenario run")
    _add_scenario_args(p)
    p.add_argument("--weight", required=True, choices=[n for n in WEIGHT_NAMES if n in DEFAULT_SLACK])
    p.add_argument("--procedure", choices=["next_fit", "worst_fit", "first_fit"])
    p.add_argument("--slack", type=parse_rational)
    p.set_defaults(func=cmd_verify_weights)

    p = sub.add_parser("poc", help="clustered optimum against the global optimum")
    p.add_argument("instance")
    p.add_argument("--limit", type=int, default=exact.DEFAULT_LIMIT)
    p.set_defaults(func=cmd_poc)

    p = sub.add_parser("batched", help="batched optimum, optionally with the repacking bound")
    p.add_argument("instance")
    p.add_argument("--q", type=int, default=2, choices=[2, 3])
    p.add_argument("--repack", action="store_true")
    p.add_argument("--limit", type=int, default=exact.DEFAULT_LIMIT)
    p.set_defaults(func=cmd_batched)

    p = sub.add_parser("sweep", help="CSV over a parameter grid")
    p.add_argument("kind", choices=sorted(GENERATORS))
    for name in INT_PARAMS + RATIONAL_PARAMS:
        p.add_argument(f"--{name}", help="value, comma list, or a..b range")
    p.add_argument("--point", action="append", help="explicit grid point such as k=4,N=32 (repeatable)")
    p.add_argument("--procedure", choices=sorted(harness.PROCEDURES))
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fuzz", help="seeded random checks of the upper bounds")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--n-max", type=int, default=12)
    p.add_argument("--k-min", type=int, default=2)
    p.add_argument("--k-max", type=int, default=6)
    p.add_argument("--beta", type=parse_rational)
    p.add_argument("--min-size", type=parse_rational)
    p.add_argument("--checks", help=f"comma list from {','.join(harness.FUZZ_CHECKS)}")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_fuzz)

    p = sub.add_parser("plot", help="SVG of ratio against N from a sweep CSV")
    p.add_argument("csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (GeneratorError, harness.IncompatibleProcedure, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
