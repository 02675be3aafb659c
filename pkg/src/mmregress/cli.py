"""Command-line entry point: ``gen``, ``solve``, ``bench`` and ``verify``.

Exit codes: 0 success, 1 verification failure, 2 invalid arguments or input
shape, 3 I/O failure, 4 rank-deficient design.
"""
import argparse
import contextlib
import json
import os
import sys

from threadpoolctl import threadpool_limits

from . import bench, verify
from .altmin import altmin_solve
from .datagen import SCHEMES, gen_instance, read_instance, write_instance
from .diagnostics import evaluate
from .errors import BadShape, MissingTruth, RankDeficient
from .local_search import SolverConfig, solve, write_trace

EXIT_VERIFY, EXIT_USAGE, EXIT_IO, EXIT_RANK = 1, 2, 3, 4


def thread_count(flag):
    """MM_THREADS wins over ``--threads``; None leaves BLAS untouched."""
    env = os.environ.get("MM_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise BadShape(f"MM_THREADS must be an integer, got {env!r}") from None
    return flag


def _limits(n):
    return threadpool_limits(limits=n) if n else contextlib.nullcontext()


def parse_radius(text, n, r):
    if text == "n":
        return n
    if text == "r":
        if r is None:
            raise MissingTruth("--R r needs truth.json to know r")
        return r
    try:
        return int(text)
    except ValueError:
        raise BadShape(f"--R must be an integer, 'n' or 'r', got {text!r}") from None


def cmd_gen(args):
    inst = gen_instance(args.n, args.d, args.r, args.sigma, args.scheme, seed=args.seed)
    write_instance(inst, args.out)
    print(f"wrote {args.out} (n={args.n}, d={args.d}, r={inst.truth.r})")
    return 0


def cmd_solve(args):
    inst = read_instance(args.input)
    trace_path = args.trace or os.path.join(args.input, "trace.csv")
    report_path = args.report or os.path.join(args.input, "report.json")
    if args.mode == "altmin":
        rep = altmin_solve(inst)
    else:
        r = inst.truth.r if inst.truth is not None else None
        R = parse_radius(args.R, inst.n, r)
        cfg = SolverConfig(R=R, tol=args.tol, max_iter=args.max_iter, mode=args.mode)
        rep = solve(inst, cfg)
    write_trace(rep.trace, trace_path)
    rep.trace_path = trace_path
    if inst.truth is not None:
        rep.metrics = evaluate(rep, inst).to_json()
    with open(report_path, "w") as f:
        json.dump(rep.to_json(), f, indent=1)
        f.write("\n")
    msg = f"{rep.method}: objective {rep.objective:.6g} after {rep.iterations} iterations"
    if rep.metrics:
        msg += f", hamming {rep.metrics['hamming']}, beta error {rep.metrics['beta_error']:.3g}"
    print(msg)
    return 0


def cmd_bench(args):
    with open(args.grid) as f:
        grid = bench.parse_grid(f.read())
    rows = bench.run_grid(grid, workers=args.workers)
    bench.write_rows(rows, args.out)
    agg_path = args.aggregate or os.path.splitext(args.out)[0] + "_aggregate.csv"
    bench.write_rows(bench.aggregate(rows), agg_path, bench.AGGREGATE_COLUMNS)
    bad = sum(r["status"] != "ok" for r in rows)
    print(f"{len(rows)} rows -> {args.out} ({bad} failed); aggregate -> {agg_path}")
    return 0


def cmd_verify(args):
    ok = True
    for res in verify.run(args.suite, seed_base=args.seed_base):
        print(res.summary())
        for seed, why in res.failures:
            print(f"  seed {seed}: {why}")
        ok &= res.ok
    return 0 if ok else EXIT_VERIFY


def build_parser():
    p = argparse.ArgumentParser(prog="mmregress",
                                description="Sparse mismatched linear regression.")
    p.add_argument("--threads", type=int, default=None,
                   help="BLAS thread count (MM_THREADS overrides)")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a synthetic instance directory")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--d", type=int, required=True)
    g.add_argument("--r", type=int, required=True)
    g.add_argument("--sigma", type=float, default=0.0)
    g.add_argument("--scheme", choices=SCHEMES, default="random")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="recover the permutation for an instance directory")
    s.add_argument("--input", required=True)
    s.add_argument("--R", default="n", help="radius: integer, 'n' or 'r'")
    s.add_argument("--mode", choices=("exact", "fast", "altmin"), default="exact")
    s.add_argument("--tol", type=float, default=0.0)
    s.add_argument("--max-iter", type=int, default=None)
    s.add_argument("--trace", default=None)
    s.add_argument("--report", default=None)
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bench", help="run a benchmark grid file")
    b.add_argument("grid")
    b.add_argument("--out", default="results.csv")
    b.add_argument("--aggregate", default=None)
    b.add_argument("--workers", type=int, default=1)
    b.set_defaults(func=cmd_bench)

    v = sub.add_parser("verify", help="run randomized oracle suites")
    v.add_argument("suite", nargs="?", default="all", choices=verify.SUITES + ("all",))
    v.add_argument("--seed-base", type=int, default=0)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with _limits(thread_count(args.threads)):
            return args.func(args)
    except (BadShape, MissingTruth, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RankDeficient as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RANK
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
