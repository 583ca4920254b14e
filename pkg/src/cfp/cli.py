"""Command-line interface: ``cfp gen|solve|bench|families|audit``.

Exit status is 0 on success, 1 when any run fails to converge or an audit
fails, and 2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import analysis, bench, fixtures, instances
from .errors import CFPError, InsufficientTrace, ParseError
from .solvers import Method, SolverConfig, solve

logger = logging.getLogger("cfp")

GLOBAL_DEFAULTS = {
    "eps": 1e-6,
    "max_iter": 50000,
    "seed": 0,
    "out": ".",
    "threads": None,
    "record_iterates": False,
}


# rate and audit runs need accurate limits, so they default to a tighter tolerance
COMMAND_DEFAULTS = {"families": {"eps": 1e-10}, "audit": {"eps": 1e-10}}


def _int_list(text):
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _methods(text):
    try:
        return [Method(v.strip().lower()) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"methods must be among {[m.value for m in Method]}") from None


def _global_flags():
    # SUPPRESS lets the flags appear before or after the subcommand
    p = argparse.ArgumentParser(add_help=False)
    kw = {"default": argparse.SUPPRESS}
    p.add_argument("--eps", type=float, help="stopping tolerance on the gap (default 1e-6; 1e-10 for families and audit)", **kw)
    p.add_argument("--max-iter", type=int, dest="max_iter", help="iteration cap (default 50000)", **kw)
    p.add_argument("--seed", type=int, help="base seed (default 0)", **kw)
    p.add_argument("--out", help="output directory (default .)", **kw)
    p.add_argument("--threads", type=int, help="worker threads (default $CFP_THREADS or 1)", **kw)
    p.add_argument("--record-iterates", action="store_true", dest="record_iterates", **kw)
    return p


def build_parser():
    common = _global_flags()
    parser = argparse.ArgumentParser(prog="cfp", description="Projection methods for convex feasibility.", parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="write random ellipsoid instances")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--gamma", type=float, default=instances.DEFAULT_GAMMA)
    g.add_argument("--density", type=float, default=None)

    s = sub.add_parser("solve", parents=[common], help="run one method on one instance")
    s.add_argument("--instance", required=True)
    s.add_argument("--method", type=str.lower, choices=[m.value for m in Method], required=True)

    b = sub.add_parser("bench", parents=[common], help="run a benchmark suite")
    b.add_argument("--dims", type=_int_list, default=[10, 50])
    b.add_argument("--sets", type=_int_list, default=[5, 10])
    b.add_argument("--per-cell", type=int, default=5, dest="per_cell")
    b.add_argument("--methods", type=_methods, default=list(bench.ALL_METHODS))

    f = sub.add_parser("families", parents=[common], help="rate experiments on the epigraph families")
    f.add_argument("--family", type=int, choices=[1, 2], required=True)
    f.add_argument("--shape", "--phi", "--f", dest="shape", default="quadratic")
    f.add_argument("--dims", type=_int_list, default=None)
    f.add_argument("--start", type=float, default=None, help="distance of the start point from the origin")
    f.add_argument("--tail", type=int, default=10)

    a = sub.add_parser("audit", parents=[common], help="check invariants and rate bounds on recorded runs")
    a.add_argument("--instance", default=None, help="audit solver invariants on this instance instead of the fixtures")
    a.add_argument("--angles", type=_float_list, default=[30.0, 45.0, 60.0], help="fixture angles in degrees")
    a.add_argument("--variant", choices=["disk", "halfplane"], default="disk")
    return parser


def parse_args(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    for key, value in GLOBAL_DEFAULTS.items():
        if not hasattr(args, key):
            setattr(args, key, COMMAND_DEFAULTS.get(args.command, {}).get(key, value))
    if not args.eps > 0:
        parser.error("--eps must be positive")
    if args.max_iter < 1:
        parser.error("--max-iter must be at least 1")
    try:
        args.threads = bench.resolve_threads(args.threads)
    except ValueError as exc:
        parser.error(str(exc))
    return args


def _outdir(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_gen(args):
    out = _outdir(args)
    for i in range(args.count):
        seed = instances.derive_seed(args.seed, args.n, args.m, i)
        inst = instances.gen_ellipsoids(args.n, args.m, seed, args.gamma, args.density)
        path = instances.save(inst, out / f"{bench.instance_id(args.n, args.m, i)}{instances.SUFFIX}")
        print(path)
    return 0


def cmd_solve(args):
    inst = instances.load(args.instance)
    cfg = SolverConfig(Method(args.method), args.eps, args.max_iter, args.record_iterates)
    rec = solve(inst.problem(), cfg, inst.lifted_x0())
    print(f"method      {rec.method.label}")
    print(f"status      {rec.status.value}")
    print(f"iterations  {rec.iterations}")
    print(f"final_gap   {rec.final_gap:.6e}")
    print(f"wall_time_s {rec.wall_time:.6e}")
    if rec.message:
        print(f"message     {rec.message}")
    if args.record_iterates:
        path = _outdir(args) / f"{Path(args.instance).name.removesuffix(instances.SUFFIX)}-{rec.method.value}-trace.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["k", "gap", *[f"x{j}" for j in range(inst.n)]])
            U = inst.problem().U
            for k, (gap, x) in enumerate(zip(rec.gap_trace, rec.iterate_trace)):
                w.writerow([k, repr(float(gap)), *(repr(float(v)) for v in U.point(x))])
        print(f"trace       {path}")
    return 0 if rec.converged else 1


def _print_summary(table):
    print(f"{'method':6} {'conv':>6} {'it_mean':>9} {'it_min':>7} {'it_max':>7} {'it_std':>8} {'t_mean':>10} {'t_std':>10}")
    for method, row in table.items():
        it, t = row["iterations"], row["wall_time_s"]
        if it is None:
            print(f"{method.label:6} {row['converged']:>3}/{row['runs']:<2}  (no converged runs)")
            continue
        print(
            f"{method.label:6} {row['converged']:>3}/{row['runs']:<2} {it['mean']:9.2f} {it['min']:7.0f} {it['max']:7.0f} "
            f"{it['std']:8.2f} {t['mean']:10.3e} {t['std']:10.3e}"
        )


def cmd_bench(args):
    cfg = bench.SuiteConfig(
        dims=args.dims,
        set_counts=args.sets,
        instances_per_cell=args.per_cell,
        base_seed=args.seed,
        eps=args.eps,
        max_iter=args.max_iter,
        methods=args.methods,
        threads=args.threads,
    )
    result = bench.run_suite(cfg)
    out = _outdir(args)
    (out / "results.csv").write_text(bench.to_csv(result))
    _print_summary(bench.summarize(result))
    if len(result.methods()) >= 2:
        profile = bench.perf_profile(result, "time")
        (out / "profile.tsv").write_text(bench.profile_tsv(profile))
        (out / "profile.svg").write_text(bench.profile_svg(profile))
    print(f"wrote {out / 'results.csv'} ({len(result)} rows)")
    return 0 if all(r.status.value == "converged" for r in result.rows) else 1


def _tail_window(trace, limit, tail):
    """At most `tail`, and at most half the usable ratios so short runs skip their transient."""
    dist = np.array([np.linalg.norm(x - limit) for x in trace])
    usable = int(np.argmax(dist <= analysis.LIMIT_TOL)) if np.any(dist <= analysis.LIMIT_TOL) else dist.size
    return max(1, min(tail, (usable - 1) // 2))


FAMILY_HEADER = ("family", "shape", "n", "method", "status", "iterations", "final_gap", "q_estimate", "r_estimate", "classification")


def cmd_families(args):
    family = analysis.Family(args.family)
    dims = args.dims or ([1, 3, 5] if family is analysis.Family.ONE else [1, 3])
    start = args.start if args.start is not None else (1.0 if family is analysis.Family.ONE else 3.0)
    rows = []
    for n in dims:
        problem = fixtures.make_family(family, args.shape, n)
        x0 = fixtures.family_start(n, start)
        for method in (Method.MAAP, Method.CARM):
            rec = solve(problem, SolverConfig(method, args.eps, args.max_iter, True), x0)
            limit = problem.intersection.project(rec.final_point)
            try:
                report = analysis.estimate_rates(rec.iterate_trace, limit, _tail_window(rec.iterate_trace, limit, args.tail))
                q, r, cls = f"{report.q_estimate:.6g}", f"{report.r_estimate:.6g}", report.classification.value
            except InsufficientTrace:
                q = r = cls = ""
            rows.append((int(family), args.shape, n, method.value, rec.status.value, rec.iterations, f"{rec.final_gap:.6e}", q, r, cls))
    path = _outdir(args) / f"family{int(family)}-{args.shape}.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FAMILY_HEADER)
        w.writerows(rows)
    for row in rows:
        print("  ".join(str(v) for v in row))
    print(f"wrote {path}")
    return 0


AUDIT_HEADER = ("subject", "method", "check", "value", "limit", "passed")


def _fejer_worst(problem, trace):
    z = problem.feasible_point
    d = np.array([np.linalg.norm(x - z) for x in trace])
    return float(np.max(d[1:] - d[:-1], initial=0.0))


def _u_worst(problem, trace):
    return max((float(np.linalg.norm(x - problem.U.project(x))) for x in trace), default=0.0)


def cmd_audit(args):
    rows = []
    if args.instance:
        inst = instances.load(args.instance)
        problem = inst.problem()
        subject = Path(args.instance).name
        for method in Method:
            rec = solve(problem, SolverConfig(method, args.eps, args.max_iter, True), inst.lifted_x0())
            rows.append((subject, method.value, "converged", rec.status.value, "converged", rec.converged))
            rows.append((subject, method.value, "fejer_increase", _fejer_worst(problem, rec.iterate_trace), 1e-9, None))
            if method.circumcentered:
                rows.append((subject, method.value, "dist_to_U", _u_worst(problem, rec.iterate_trace), 1e-8, None))
            rows.append((subject, method.value, "a3_surrogate", analysis.a3_surrogate(problem, rec), True, None))
    else:
        for deg in args.angles:
            fx = fixtures.two_line(math.radians(deg), args.variant)
            for method in (Method.CARM, Method.MAAP):
                rec = solve(fx.problem, SolverConfig(method, args.eps, args.max_iter, True), fx.x0)
                rep = analysis.audit_rate_bounds(rec, fx.omega, intersection=fx.problem.intersection)
                rows.append((fx.name, method.value, "tail_ratio", rep.max_ratio, rep.bound + analysis.AUDIT_SLACK, rep.passed))
                rows.append((fx.name, method.value, "fejer_increase", _fejer_worst(fx.problem, rec.iterate_trace), 1e-9, None))
    table = []
    for subject, method, check, value, limit, passed in rows:
        if passed is None:
            passed = value <= limit if isinstance(value, float) else value == limit
        table.append((subject, method, check, value if isinstance(value, str) else repr(value), repr(limit), bool(passed)))
    path = _outdir(args) / "audit.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(AUDIT_HEADER)
        w.writerows(table)
    for row in table:
        print(f"{'PASS' if row[5] else 'FAIL'}  {row[0]:16} {row[1]:5} {row[2]:15} {row[3]}")
    print(f"wrote {path}")
    return 0 if all(r[5] for r in table) else 1


COMMANDS = {"gen": cmd_gen, "solve": cmd_solve, "bench": cmd_bench, "families": cmd_families, "audit": cmd_audit}


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ParseError, OSError, KeyError, ValueError) as exc:
        print(f"cfp {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except CFPError as exc:
        print(f"cfp {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
