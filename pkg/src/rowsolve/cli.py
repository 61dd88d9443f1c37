"""Command-line front end.

Subcommands: gen (write a problem instance to disk), solve (one run, one
trace), bench (multi-trial ensembles across methods), rates (print the
convergence-rate report), lemmas (randomized checks of the two block
inequalities). Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import pathlib
import sys

import numpy as np

from .errors import DataError, UsageError
from .harness import (aggregate, read_vector, run_trials, worker_count,
                      write_ensemble, write_pgm, write_trace)
from .matrix import mm_read
from .partition import RngStream, attach_norms, contiguous_partition
from .problems import example1, load_instance, save_instance, tomo_instance
from .solvers import METHODS, SolverConfig, run
from .theory import convergence_rates, lemma_checks, range_null_split


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems through our exit-code scheme."""

    def error(self, message):
        raise UsageError(f"{message}\n{self.format_usage()}")


def _build_parser() -> _Parser:
    top = _Parser(prog="rowsolve", description=__doc__)
    sub = top.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a problem instance",
                         add_help=True)
    gen_sub = gen.add_subparsers(dest="generator", required=True)
    g1 = gen_sub.add_parser("example1", help="dense UDV^T family, m = 30n")
    g1.add_argument("--n", type=int, default=50)
    g1.add_argument("--delta", type=float, default=0.1)
    g1.add_argument("--seed", type=int, default=0)
    g1.add_argument("--out", default="instance")
    g2 = gen_sub.add_parser("tomo", help="2-D line-integral tomography")
    g2.add_argument("--grid", type=int, default=16, help="pixels per side")
    g2.add_argument("--angles", type=int, default=24)
    g2.add_argument("--rays", type=int, default=24, help="rays per angle")
    g2.add_argument("--seed", type=int, default=0)
    g2.add_argument("--out", default="instance")

    def add_solver_flags(p, bench=False):
        p.add_argument("--config", default=None,
                       help="flat key=value file supplying defaults")
        p.add_argument("--instance", default=None,
                       help="directory written by gen (overrides file flags)")
        p.add_argument("--matrix", default=None, help="Matrix Market file")
        p.add_argument("--rhs", default=None, help="single-column CSV")
        p.add_argument("--xstar", default=None,
                       help="reference solution CSV for the RSE column")
        p.add_argument("--tau-rows", type=int, default=1)
        p.add_argument("--tau-cols", type=int, default=1)
        p.add_argument("--max-iters", type=int, default=100_000)
        p.add_argument("--rse-tol", type=float, default=None)
        p.add_argument("--residual-tol", type=float, default=None)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--exec-mode", choices=("auto", "cached", "matvec"),
                       default="auto")
        p.add_argument("--reabk-alpha", type=float, default=None)
        p.add_argument("--consistent-mode", action="store_true")
        p.add_argument("--trace-stride", type=int, default=100)
        p.add_argument("--recompute-every", type=int, default=10_000)
        if bench:
            p.add_argument("--methods", default="rmr,ermr")
            p.add_argument("--trials", type=int, default=10)
            p.add_argument("--out", default="bench_out")
        else:
            p.add_argument("--method", choices=METHODS, default="ermr")
            p.add_argument("--out", default="trace.csv")

    solve = sub.add_parser("solve", help="run one method once")
    add_solver_flags(solve)
    bench = sub.add_parser("bench", help="multi-trial ensembles per method")
    add_solver_flags(bench, bench=True)

    rates = sub.add_parser("rates", help="print the convergence-rate report")
    rates.add_argument("--matrix", required=True)
    rates.add_argument("--tau-rows", type=int, default=1)
    rates.add_argument("--tau-cols", type=int, default=1)

    lemmas = sub.add_parser("lemmas", help="randomized block-inequality checks")
    lemmas.add_argument("--matrix", required=True)
    lemmas.add_argument("--trials", type=int, default=100)
    lemmas.add_argument("--seed", type=int, default=0)
    return top


def _expand_config(argv: list[str]) -> list[str]:
    """Splice `--config FILE` key=value pairs in before the explicit flags,
    so anything given on the command line wins."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        raise UsageError("--config needs a file argument")
    path = argv[idx + 1]
    tokens: list[str] = []
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise UsageError(f"{path}:{lineno}: expected key=value, got {line!r}")
                key, _, value = line.partition("=")
                key = key.strip().replace("_", "-")
                value = value.strip()
                if not key:
                    raise UsageError(f"{path}:{lineno}: empty key")
                if value.lower() in ("true", "false"):
                    if value.lower() == "true":
                        tokens.append(f"--{key}")
                else:
                    tokens.extend([f"--{key}", value])
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    rest = argv[:idx] + argv[idx + 2:]
    # argv[0] is the subcommand (and argv[1] the generator for gen)
    return rest[:1] + tokens + rest[1:]


def _load_problem(args):
    """Matrix, rhs, oracle from either an instance dir or individual files."""
    if args.instance is not None:
        inst = load_instance(args.instance)
        return inst.A, inst.b, inst.x_star, inst.descriptor
    if args.matrix is None or args.rhs is None:
        raise UsageError("provide --instance or both --matrix and --rhs")
    try:
        A = mm_read(args.matrix)
        b = read_vector(args.rhs)
        oracle = read_vector(args.xstar) if args.xstar else None
    except OSError as exc:
        raise UsageError(f"cannot read input: {exc}") from exc
    return A, b, oracle, {"matrix": args.matrix, "rhs": args.rhs}


def _config_from_args(args, method: str) -> SolverConfig:
    return SolverConfig(
        method=method, tau_rows=args.tau_rows, tau_cols=args.tau_cols,
        max_iters=args.max_iters, rse_tol=args.rse_tol,
        residual_tol=args.residual_tol, seed=args.seed,
        exec_mode=args.exec_mode, reabk_alpha=args.reabk_alpha,
        consistent_mode=args.consistent_mode and method == "ermr",
        trace_stride=args.trace_stride, recompute_every=args.recompute_every)


def _oracle_for(method: str, A, b, oracle):
    """rmr_homogeneous iterates y, so its reference is the null component."""
    if method != "rmr_homogeneous":
        return oracle
    if oracle is None:
        return None
    _, b_null = range_null_split(A, b)
    return b_null


def _cmd_gen(args) -> int:
    if args.generator == "example1":
        inst = example1(n=args.n, delta=args.delta, seed=args.seed)
    else:
        inst = tomo_instance(N=args.grid, num_angles=args.angles,
                             rays_per_angle=args.rays, seed=args.seed)
    doc = save_instance(inst, args.out)
    if args.generator == "tomo":
        write_pgm(inst.x_star.reshape(args.grid, args.grid),
                  f"{args.out}/phantom.pgm")
    print(f"wrote instance ({doc['m']} x {doc['n']}) to {args.out}/")
    return 0


def _cmd_solve(args) -> int:
    A, b, oracle, descriptor = _load_problem(args)
    config = _config_from_args(args, args.method)
    trace = run(config, A, b, oracle=_oracle_for(args.method, A, b, oracle))
    trace.metadata["instance"] = descriptor
    write_trace(trace, args.out)
    meta = trace.metadata
    final = trace.rse[-1] if trace.rse and trace.rse[-1] is not None else None
    rse_part = f" rse={final:.3e}" if final is not None else ""
    print(f"{args.method}: k={meta['iterations']} stopped_by={meta['stopped_by']}"
          f"{rse_part} residual={trace.residual[-1]:.3e} -> {args.out}")
    return 0


def _cmd_bench(args) -> int:
    A, b, oracle, descriptor = _load_problem(args)
    if oracle is None:
        raise UsageError("bench aggregates the RSE column; provide --xstar "
                         "or an instance directory with a reference solution")
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    for method in methods:
        if method not in METHODS:
            raise UsageError(f"unknown method {method!r} in --methods")
    outdir = pathlib.Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    print(f"bench: {args.trials} trials, workers={worker_count()}")
    for method in methods:
        config = _config_from_args(args, method)
        traces = run_trials(config, A, b,
                            oracle=_oracle_for(method, A, b, oracle),
                            trials=args.trials, descriptor=descriptor)
        for t, trace in enumerate(traces):
            write_trace(trace, outdir / f"{method}_trial{t:02d}.csv")
        ensemble = aggregate(traces)
        write_ensemble(ensemble, outdir / f"{method}_ensemble.csv")
        finals = [tr.final_rse() for tr in traces]
        known = [f for f in finals if f is not None]
        tail = f" median_final_rse={float(np.median(known)):.3e}" if known else ""
        print(f"{method}: {len(traces)} traces -> "
              f"{outdir / (method + '_ensemble.csv')}{tail}")
    return 0


def _cmd_rates(args) -> int:
    try:
        A = mm_read(args.matrix)
    except OSError as exc:
        raise UsageError(f"cannot read input: {exc}") from exc
    m, n = A.shape
    p_rows = attach_norms(contiguous_partition(m, args.tau_rows), A, "rows")
    p_cols = attach_norms(contiguous_partition(n, args.tau_cols), A, "cols")
    report = convergence_rates(A, p_rows, p_cols)
    print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    return 0


def _cmd_lemmas(args) -> int:
    try:
        A = mm_read(args.matrix)
    except OSError as exc:
        raise UsageError(f"cannot read input: {exc}") from exc
    report = lemma_checks(A, args.trials, RngStream(args.seed))
    print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    return 0 if report.passed else 2


def cli_main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    argv = list(argv)
    try:
        argv = _expand_config(argv)
        args = _build_parser().parse_args(argv)
        if args.command == "gen":
            return _cmd_gen(args)
        if args.command == "solve":
            return _cmd_solve(args)
        if args.command == "bench":
            return _cmd_bench(args)
        if args.command == "rates":
            return _cmd_rates(args)
        return _cmd_lemmas(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
