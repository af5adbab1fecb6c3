"""Command-line benchmark harness.

Verbs:
  run <config>                  run the configured experiment grid
  fstar <config> [--budget B]   estimate the best attainable objective
  synth <spec-file> <out>       generate a synthetic dataset (LIBSVM text)
  gap <config> <weights-file>   duality gap of a stored weight vector

Exit codes: 0 on success, 1 on configuration errors, 2 when some runs
failed but the experiment completed.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .config import ConfigError, load_config, parse_kv
from .data import SyntheticSpec, generate_synthetic, save_libsvm
from .diagnostics import duality_gap
from .experiment import build_problem, estimate_fstar, run_experiment


def _cmd_run(args) -> int:
    config = load_config(args.config)
    result = run_experiment(config)
    print(f"wrote {len(result.run_files)} run files and {len(result.mean_files)} averaged files")
    print(f"summary: {result.summary_file}")
    if result.failures:
        for algo, seed, msg in result.failures:
            print(f"FAILED {algo} seed {seed}: {msg}", file=sys.stderr)
        return 2
    return 0


def _cmd_fstar(args) -> int:
    config = load_config(args.config)
    value, run = estimate_fstar(config, budget=args.budget)
    print(f"fstar_estimate = {value!r}")
    print(f"achieved by {run}")
    return 0


def _cmd_synth(args) -> int:
    kv = parse_kv(args.spec)
    unknown = set(kv) - {"n", "p", "noise", "seed"}
    if unknown:
        raise ConfigError(f"{args.spec}: unknown keys: {', '.join(sorted(unknown))}")
    try:
        spec = SyntheticSpec(
            n=int(kv.get("n", "1000")),
            p=int(kv.get("p", "50")),
            label_noise=float(kv.get("noise", "0")),
            seed=int(kv.get("seed", "0")),
        )
    except ValueError as exc:
        raise ConfigError(f"{args.spec}: {exc}") from exc
    dataset = generate_synthetic(spec)
    save_libsvm(dataset, args.out)
    print(f"wrote {dataset.n} x {dataset.p} dataset to {args.out}")
    return 0


def _cmd_gap(args) -> int:
    config = load_config(args.config)
    problem = build_problem(config)
    x = np.loadtxt(args.weights, ndmin=1)
    gap = duality_gap(problem, x)
    print(f"duality_gap = {gap!r}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="vrprox", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="verb", required=True)

    p_run = sub.add_parser("run", help="run an experiment configuration")
    p_run.add_argument("config")
    p_run.set_defaults(func=_cmd_run)

    p_fstar = sub.add_parser("fstar", help="estimate the best attainable objective")
    p_fstar.add_argument("config")
    p_fstar.add_argument("--budget", type=float, default=None, help="effective-pass budget (default 1000)")
    p_fstar.set_defaults(func=_cmd_fstar)

    p_synth = sub.add_parser("synth", help="generate a synthetic dataset")
    p_synth.add_argument("spec")
    p_synth.add_argument("out")
    p_synth.set_defaults(func=_cmd_synth)

    p_gap = sub.add_parser("gap", help="duality gap of a weight vector")
    p_gap.add_argument("config")
    p_gap.add_argument("weights")
    p_gap.set_defaults(func=_cmd_gap)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
