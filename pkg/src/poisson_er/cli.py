"""Command-line front end.

Usage:
  poisson-er solve-beta --c 2
  poisson-er walk --alpha 30 --p 0.1 --seed 7 --k-max 50 > walk.csv
  poisson-er sample --n 100 --c 2 --seed 1 > edges.txt
  poisson-er giant --c 3 --n 100000 --workers 8
  poisson-er all --out-dir reports

Exit codes: 0 all verdicts pass, 1 a verdict failed, 2 I/O failure,
64 usage error.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

from poisson_er.analysis import beta_solver
from poisson_er.errors import DomainError, ParameterError, TruncationError
from poisson_er.experiments import SUITE, load_config, merge_overrides, run_experiment, shipped_config, write_report
from poisson_er.exploration import ANALYTIC, GRAPH, analytic_walk, explore_graph_walk, walk_csv
from poisson_er.graph_model import ModelParams, format_edge_list, sample_fixed_core, sample_poissonized_core
from poisson_er.stochastic_kernel import RandomStream

EXIT_OK = 0
EXIT_VERDICT = 1
EXIT_IO = 2
EXIT_USAGE = 64

OUT_DIR_ENV = "POISSON_ER_OUT_DIR"

# Subcommand -> shipped config.
EXPERIMENTS = {
    "fluid": "fluid",
    "giant": "giant",
    "giant-clt": "giant_clt",
    "kc": "kc",
    "critical": "critical",
    "tau-clt": "tau_clt",
    "connectedness": "connectedness",
    "depoissonize": "depoissonize",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--c", type=float, help="c in p = c/n or p = (log n + c)/n")
    common.add_argument("--lambda", dest="lam", type=float, help="critical-window offset")
    common.add_argument("--n", type=int, help="size parameter (replaces the n grid)")
    common.add_argument("--alpha", type=float, help="Poisson mean of the core size")
    common.add_argument("--p", type=float, help="edge probability")
    common.add_argument("--trials", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--k-max", dest="k_max", type=int, help="walk length")
    common.add_argument("--out-dir", help=f"report directory (default ${OUT_DIR_ENV} or ./reports)")
    common.add_argument("--config", help="key = value config file")
    common.add_argument("--tolerance-scale", type=float, default=1.0)
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="poisson-er", description="Poissonized Erdos-Renyi graphs via Lukasiewicz walks.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _common_flags()
    sub.add_parser("sample", parents=[common], help="print a sampled core as an edge list")
    walk = sub.add_parser("walk", parents=[common], help="print a walk as CSV")
    walk.add_argument("--route", choices=(ANALYTIC, GRAPH), default=ANALYTIC)
    sub.add_parser("solve-beta", parents=[common], help="print beta(c)")
    for name in EXPERIMENTS:
        sub.add_parser(name, parents=[common], help=f"run the {name} experiment")
    sub.add_parser("all", parents=[common], help="run every shipped experiment")
    return parser


def _params(args) -> ModelParams:
    if args.p is not None:
        size = args.alpha if args.alpha is not None else args.n
        if size is None:
            raise UsageError("give --alpha or --n together with --p")
        return ModelParams(alpha=float(size), p=args.p)
    size = args.alpha if args.alpha is not None else args.n
    if size is None or args.c is None:
        raise UsageError("give --p, or --c with --n/--alpha")
    return ModelParams.supercritical(size, args.c)


def _cmd_solve_beta(args) -> int:
    if args.c is None:
        raise UsageError("solve-beta needs --c")
    print(f"{beta_solver(args.c).beta:.10g}")
    return EXIT_OK


def _cmd_sample(args) -> int:
    params = _params(args)
    stream = RandomStream(args.seed or 0, 0)
    if args.alpha is not None:
        core = sample_poissonized_core(stream, params)
    else:
        core = sample_fixed_core(stream, args.n, params.p)
    sys.stdout.write(format_edge_list(core))
    return EXIT_OK


def _cmd_walk(args) -> int:
    params = _params(args)
    if args.k_max is None:
        raise UsageError("walk needs --k-max")
    stream = RandomStream(args.seed or 0, 0)
    if args.route == GRAPH:
        walk = explore_graph_walk(stream, sample_poissonized_core(stream, params), params.p, max_steps=args.k_max)
    else:
        walk = analytic_walk(stream, params, args.k_max)
    sys.stdout.write(walk_csv(walk))
    return EXIT_OK


def _config_for(name: str, args, suite: bool):
    config = load_config(args.config) if args.config and not suite else shipped_config(name)
    overrides = {"trials": args.trials, "seed": args.seed, "workers": args.workers}
    if not suite:
        overrides.update(c=args.c, lam=args.lam, alpha=args.alpha, p=args.p, k_max=args.k_max)
        if args.n is not None:
            overrides["n_grid"] = [args.n]
        if args.c is not None and config.c_grid:
            overrides["c_grid"] = [args.c]
    config = merge_overrides(config, overrides)
    if args.tolerance_scale != 1.0:
        config = config.scaled(args.tolerance_scale)
    return config


def _out_dir(args) -> Path:
    return Path(args.out_dir or os.environ.get(OUT_DIR_ENV) or "reports")


def _run_named(names, args, suite: bool) -> int:
    status = EXIT_OK
    out_dir = _out_dir(args)
    for name in names:
        config = _config_for(name, args, suite)
        started = time.perf_counter()
        report = run_experiment(config)
        json_path, _ = write_report(report, out_dir, config)
        for line in report.summary_lines():
            print(line)
        print(f"[TIME] {config.experiment_name}: {time.perf_counter() - started:.1f}s -> {json_path}")
        sys.stdout.flush()
        if not report.passed:
            status = EXIT_VERDICT
    return status


def dispatch(args) -> int:
    if args.command == "solve-beta":
        return _cmd_solve_beta(args)
    if args.command == "sample":
        return _cmd_sample(args)
    if args.command == "walk":
        return _cmd_walk(args)
    if args.command == "all":
        return _run_named(SUITE, args, suite=True)
    return _run_named([EXPERIMENTS[args.command]], args, suite=False)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return dispatch(args)
    except (UsageError, ParameterError, DomainError, TruncationError) as exc:
        print(f"poisson-er: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"poisson-er: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
