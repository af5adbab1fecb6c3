"""Experiment harness: multi-seed runs, trace persistence, reference-value
estimation.

Output layout per experiment: one CSV per (algorithm, seed) named
``<algorithm>_seed<seed>.csv``, one across-seed average per algorithm named
``<algorithm>_mean.csv`` (arithmetic mean of the numeric columns at each
row index), and a ``summary.csv`` with final objectives and fitted rates.
The environment variable ``VRPROX_OUTPUT_ROOT``, when set, is prepended to
the configured output directory.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import ConfigError, ExperimentConfig, resolve_lambda
from .data import SyntheticSpec, generate_synthetic, load_libsvm
from .diagnostics import fit_linear_rate
from .problem import Dataset, LossSpec, Problem
from .sampling import SamplingDistribution, build_distribution
from .schedules import StepPolicy
from .solvers import (
    RunOptions,
    run_accelerated_sgd,
    run_accelerated_svrg,
    run_basic,
    run_two_stage,
)
from .trace import CSV_HEADER, SolverTrace

__all__ = [
    "ExperimentResult",
    "build_problem",
    "estimate_fstar",
    "make_policy",
    "run_experiment",
    "run_single",
]

OUTPUT_ROOT_ENV = "VRPROX_OUTPUT_ROOT"


def load_dataset(config: ExperimentConfig) -> Dataset:
    if config.dataset == "synthetic":
        spec = SyntheticSpec(
            n=config.synthetic_n,
            p=config.synthetic_p,
            label_noise=config.synthetic_noise,
            seed=config.synthetic_seed,
        )
        return generate_synthetic(spec)
    return load_libsvm(
        config.dataset,
        label_map=config.label_map,
        normalize=config.normalize,
        require_binary=config.loss == "logistic",
    )


def build_problem(config: ExperimentConfig) -> Problem:
    dataset = load_dataset(config)
    lam = resolve_lambda(config.lambda_rule, dataset.n)
    return Problem(
        dataset=dataset,
        loss=LossSpec(kind=config.loss, n=dataset.n),
        l2=lam,
        regularizer=config.regularizer,
        mu=config.mu,
    )


def make_policy(algorithm: str, problem: Problem, dist: SamplingDistribution, stage1_epochs: float) -> StepPolicy:
    return StepPolicy(
        kind=algorithm,
        L=problem.max_smoothness,
        L_Q=dist.L_Q,
        mu=problem.mu,
        n=problem.n,
        stage1_epochs=stage1_epochs,
    )


def run_single(
    problem: Problem,
    algorithm: str,
    dist: SamplingDistribution,
    config: ExperimentConfig,
    seed: int,
    budget: float | None = None,
) -> SolverTrace:
    policy = make_policy(algorithm, problem, dist, config.stage1_epochs)
    opts = RunOptions(
        max_passes=budget if budget is not None else config.budget,
        seed=seed,
        averaging=config.averaging,
        record_every=config.record_every,
        perturbation=config.perturbation,
        mc_samples=config.mc_samples,
        fstar=config.fstar,
    )
    if policy.two_stage:
        trace = run_two_stage(problem, policy, dist, opts)
    elif policy.family == "sgd":
        trace = run_basic(problem, "sgd", dist, policy, opts)
    elif policy.family == "svrg":
        trace = run_basic(problem, "svrg", dist, policy, opts)
    elif policy.family == "acc_sgd":
        trace = run_accelerated_sgd(problem, "sgd", dist, policy, opts)
    else:
        trace = run_accelerated_svrg(problem, dist, policy, opts)
    trace.algorithm = algorithm
    trace.seed = seed
    return trace


def _write_mean_csv(traces: list[SolverTrace], path: Path) -> None:
    depth = min(len(t.rows) for t in traces)

    def mean_opt(vals):
        if any(v is None for v in vals):
            return None
        return float(np.mean(vals))

    lines = [CSV_HEADER]
    for r in range(depth):
        rows = [t.rows[r] for t in traces]
        k = float(np.mean([row.k for row in rows]))
        passes = float(np.mean([row.effective_passes for row in rows]))
        obj = float(np.mean([row.objective for row in rows]))
        avg = mean_opt([row.objective_avg for row in rows])
        gap = mean_opt([row.gap for row in rows])
        var = mean_opt([row.variance for row in rows])
        restart = int(any(row.restart for row in rows))
        fields = [
            repr(k),
            repr(passes),
            repr(obj),
            "" if avg is None else repr(avg),
            "" if gap is None else repr(gap),
            "" if var is None else repr(var),
            "",
            str(restart),
        ]
        lines.append(",".join(fields))
    path.write_text("\n".join(lines) + "\n")


@dataclass
class ExperimentResult:
    output_dir: Path
    run_files: list[Path]
    mean_files: list[Path]
    summary_file: Path
    failures: list[tuple[str, int, str]]


def output_dir(config: ExperimentConfig) -> Path:
    root = os.environ.get(OUTPUT_ROOT_ENV)
    out = Path(config.output)
    if root:
        out = Path(root) / out
    return out


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run every (algorithm, seed) pair and persist traces.

    Individual run failures are recorded in the summary and do not stop
    the remaining runs.
    """
    problem = build_problem(config)
    dist = build_distribution(config.sampling, problem.smoothness)
    out = output_dir(config)
    out.mkdir(parents=True, exist_ok=True)

    run_files: list[Path] = []
    mean_files: list[Path] = []
    failures: list[tuple[str, int, str]] = []
    summary_lines = ["algorithm,seed,status,final_passes,final_objective,fitted_rate"]

    fstar_ref = config.fstar
    for algo in config.algorithms:
        traces: list[SolverTrace] = []
        for seed in config.seeds:
            try:
                trace = run_single(problem, algo, dist, config, seed)
            except Exception as exc:  # failures are per-run, deliberately broad
                failures.append((algo, seed, str(exc)))
                summary_lines.append(f"{algo},{seed},error: {exc},,,")
                continue
            if trace.diverged:
                failures.append((algo, seed, trace.message))
            path = out / f"{algo}_seed{seed}.csv"
            trace.to_csv(path, include_seconds=config.record_timings)
            run_files.append(path)
            traces.append(trace)
            status = "diverged" if trace.diverged else "ok"
            rate = _fitted_rate(trace, fstar_ref)
            final = trace.final
            summary_lines.append(
                f"{algo},{seed},{status},{repr(final.effective_passes)},{repr(final.objective)},"
                f"{'' if rate is None else repr(rate)}"
            )
        if traces:
            mean_path = out / f"{algo}_mean.csv"
            _write_mean_csv(traces, mean_path)
            mean_files.append(mean_path)

    summary = out / "summary.csv"
    summary.write_text("\n".join(summary_lines) + "\n")
    return ExperimentResult(
        output_dir=out,
        run_files=run_files,
        mean_files=mean_files,
        summary_file=summary,
        failures=failures,
    )


def _fitted_rate(trace: SolverTrace, fstar: float | None) -> float | None:
    if fstar is None or len(trace.rows) < 4:
        return None
    half = len(trace.rows) // 2
    try:
        return fit_linear_rate(trace, fstar=fstar, window=(half, len(trace.rows)))
    except ValueError:
        return None


def estimate_fstar(config: ExperimentConfig, budget: float | None = None) -> tuple[float, str]:
    """Best objective value observed across the configured runs.

    Runs every (algorithm, seed) pair for ``budget`` effective passes
    (default 1000) and returns the minimum recorded objective together
    with the run that achieved it. Deterministic under fixed seeds.
    """
    if budget is None:
        budget = 1000.0
    problem = build_problem(config)
    dist = build_distribution(config.sampling, problem.smoothness)
    best = np.inf
    best_run = ""
    if budget <= 0:
        from .problem import evaluate_objective

        x0 = np.zeros(problem.p)
        value = evaluate_objective(
            problem, x0, mc_samples=config.mc_samples, rng_seed=0, perturbation=config.perturbation
        )
        return value, "initial point"
    for algo in config.algorithms:
        for seed in config.seeds:
            trace = run_single(problem, algo, dist, config, seed, budget=budget)
            objs = trace.column("objective")
            idx = int(np.nanargmin(objs))
            if objs[idx] < best:
                best = float(objs[idx])
                best_run = f"{algo} seed {seed} at row {idx}"
    if not np.isfinite(best):
        raise ConfigError("no finite objective observed; check the configuration")
    return best, best_run
