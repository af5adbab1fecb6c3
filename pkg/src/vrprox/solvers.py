"""The optimization loops.

Three drivers share the proximal-step skeleton:

* :func:`run_basic` -- plain proximal steps with any estimator, optional
  online averaging, and (for "_decr" policies) a two-stage restart that
  switches to decreasing steps after a configured pass budget;
* :func:`run_accelerated_sgd` -- extrapolated iterates
  y_k = x_k + beta_k (x_k - x_{k-1}) for exact or plain stochastic
  gradients, with the momentum coefficient derived from the weight
  recursions (beta_k needs the k+1 schedule entry, which is computed
  eagerly each iteration);
* :func:`run_accelerated_svrg` -- the anchored accelerated loop whose
  extrapolation point is a convex combination of the surrogate minimizer
  v_k and the anchor; its trace reports the objective at the anchor, which
  is the point the algorithm outputs.

All randomness flows from ``RunOptions.seed``; identical options produce
bit-identical traces.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from .diagnostics import duality_gap
from .estimators import make_estimator, variance_probe
from .problem import Perturbation, Problem, evaluate_objective
from .prox import Regularizer, prox, regularizer_value
from .sampling import SamplingDistribution
from .schedules import Schedule, StepPolicy, TwoStageController
from .trace import SolverTrace, TraceRow

__all__ = [
    "RunOptions",
    "run_accelerated_sgd",
    "run_accelerated_svrg",
    "run_basic",
    "run_two_stage",
    "update_averaging",
]

_BOUND_SLACK = 1.0 + 1e-12


@dataclass
class RunOptions:
    """Knobs of a single solver run."""

    max_passes: float
    seed: int = 0
    x0: np.ndarray | None = None
    averaging: bool = False
    record_every: float = 5.0
    perturbation: Perturbation = field(default_factory=Perturbation.none)
    mc_samples: int = 5
    fstar: float | None = None
    record_gap: bool = True
    probe_variance: bool = False
    probe_trials: int = 0  # 0 = exhaustive enumeration (perturbation-free only)
    divergence_factor: float = 1e6
    saga_beta: float = 0.0

    def __post_init__(self):
        if self.record_every < 1:
            raise ValueError("record cadence must be at least 1 effective pass")


def update_averaging(x_hat_prev: np.ndarray, x: np.ndarray, tau: float) -> np.ndarray:
    """Online average x_hat_k = (1 - tau) x_hat_{k-1} + tau x_k."""
    if not 0.0 < tau <= 1.0:
        raise ValueError("averaging weight must lie in (0, 1]")
    return (1.0 - tau) * np.asarray(x_hat_prev) + tau * np.asarray(x)


class _Recorder:
    """Writes trace rows at an effective-pass cadence."""

    def __init__(self, problem: Problem, opts: RunOptions, estimator, algorithm: str):
        self.problem = problem
        self.opts = opts
        self.estimator = estimator
        self.trace = SolverTrace(algorithm=algorithm, seed=opts.seed, fstar_ref=opts.fstar)
        self.plain = replace(problem, regularizer=Regularizer.none())
        self.gap_supported = (
            opts.record_gap
            and not opts.perturbation.active
            and problem.l2 > 0
            and problem.regularizer.kind in ("none", "l1")
        )
        self.t0 = time.perf_counter()
        self.next_mark: float | None = None
        self.guard: float | None = None

    def _objective(self, x) -> tuple[float, bool]:
        row_idx = len(self.trace.rows)
        smooth = evaluate_objective(
            self.plain,
            x,
            mc_samples=self.opts.mc_samples if self.opts.perturbation.active else 0,
            rng_seed=self.opts.seed * 1_000_003 + 7919 * row_idx,
            perturbation=self.opts.perturbation,
        )
        psi = regularizer_value(self.problem.regularizer, x)
        if np.isinf(psi):
            return smooth, False
        return smooth + psi, True

    def record(self, k: int, passes: float, x, x_hat=None, restart: bool = False) -> bool:
        """Append one row; returns False when the divergence guard trips."""
        obj, feasible = self._objective(x)
        obj_avg = None
        if x_hat is not None:
            obj_avg, _ = self._objective(x_hat)
        gap = duality_gap(self.problem, x) if self.gap_supported else None
        var = None
        if self.opts.probe_variance:
            probe_rng = np.random.default_rng((self.opts.seed, 65537, len(self.trace.rows)))
            var = variance_probe(self.estimator, x, trials=self.opts.probe_trials, rng=probe_rng)
        self.trace.append(
            TraceRow(
                k=k,
                effective_passes=passes,
                objective=obj,
                objective_avg=obj_avg,
                gap=gap,
                variance=var,
                seconds=time.perf_counter() - self.t0,
                restart=restart,
                feasible=feasible,
            )
        )
        if self.guard is None:
            # Guard threshold fixed by the first recorded objective.
            scale = max(abs(obj), 1e-12)
            self.guard = self.opts.divergence_factor * scale
        if not np.isfinite(obj) or obj > self.guard:
            self.trace.diverged = True
            self.trace.message = f"objective {obj} exceeded divergence guard {self.guard}"
            return False
        if self.next_mark is None or passes >= self.next_mark:
            every = self.opts.record_every
            self.next_mark = every * (np.floor(passes / every) + 1.0)
        return True

    def due(self, passes: float) -> bool:
        return self.next_mark is not None and passes >= self.next_mark


def _passes(estimator, problem) -> float:
    return estimator.evaluations / problem.n


def _start_point(problem: Problem, opts: RunOptions) -> np.ndarray:
    if opts.x0 is not None:
        x0 = np.array(opts.x0, dtype=np.float64, copy=True)
        if x0.shape != (problem.p,):
            raise ValueError("x0 has the wrong dimension")
        return x0
    return np.zeros(problem.p)


def _check_step_bound(policy: StepPolicy, variance_reduced: bool) -> None:
    base = policy.base_step()
    if variance_reduced:
        bound = 1.0 / (12.0 * policy.L_Q)
        name = "1/(12 L_Q)"
    else:
        bound = 1.0 / policy.L
        name = "1/L"
    if base > bound * _BOUND_SLACK:
        raise ValueError(f"step size {base} violates the bound {name} = {bound}")


def run_basic(
    problem: Problem,
    estimator_kind: str,
    dist: SamplingDistribution,
    policy: StepPolicy,
    opts: RunOptions,
) -> SolverTrace:
    """Proximal stochastic iteration with any gradient estimator."""
    if problem.mu <= 0:
        raise ValueError("solver runs require mu > 0 (strongly convex case only)")
    if policy.regime != "basic":
        raise ValueError(f"policy {policy.kind!r} is not a basic-regime policy")
    rng = np.random.default_rng(opts.seed)
    est = make_estimator(
        estimator_kind,
        problem,
        dist,
        opts.perturbation,
        batch=policy.batch_size,
        beta=opts.saga_beta,
    )
    _check_step_bound(policy, est.variance_reduced)

    x = _start_point(problem, opts)
    est.initialize(x, rng)
    sched = Schedule(policy, vr=est.variance_reduced)
    controller = TwoStageController(policy.stage1_epochs) if policy.two_stage else None
    if controller is not None and controller.should_restart(_passes(est, problem)):
        sched.restart_decreasing()

    x_hat = x.copy() if opts.averaging else None
    rec = _Recorder(problem, opts, est, algorithm=f"{estimator_kind}:{policy.kind}")
    alive = rec.record(0, _passes(est, problem), x, x_hat)
    k = 0
    while alive and _passes(est, problem) < opts.max_passes:
        passes = _passes(est, problem)
        if controller is not None and controller.should_restart(passes):
            sched.restart_decreasing()
            est.initialize(x, rng)
            if opts.averaging:
                x_hat = x.copy()
            alive = rec.record(k, _passes(est, problem), x, x_hat, restart=True)
            continue
        k += 1
        st = sched.advance()
        gs = est.estimate(x, rng)
        x = prox(problem.regularizer, st.eta, x - st.eta * gs.g)
        est.post_step(x, rng)
        if opts.averaging:
            x_hat = update_averaging(x_hat, x, st.tau)
        if not np.all(np.isfinite(x)):
            rec.trace.diverged = True
            rec.trace.message = f"non-finite iterate at iteration {k}"
            break
        if rec.due(_passes(est, problem)):
            alive = rec.record(k, _passes(est, problem), x, x_hat)
    if not rec.trace.diverged and (not rec.trace.rows or rec.trace.rows[-1].k != k):
        rec.record(k, _passes(est, problem), x, x_hat)
    return rec.trace


def run_accelerated_sgd(
    problem: Problem,
    estimator_kind: str,
    dist: SamplingDistribution,
    policy: StepPolicy,
    opts: RunOptions,
) -> SolverTrace:
    """Extrapolated proximal iteration for exact or plain stochastic
    gradients.

    Maintains the surrogate minimizer v_k = x_{k-1} + (x_k - x_{k-1})/delta_k
    and checks the runtime identity y_k = theta_k x_k + (1 - theta_k) v_k at
    every step.
    """
    if problem.mu <= 0:
        raise ValueError("solver runs require mu > 0 (strongly convex case only)")
    if estimator_kind not in ("exact", "sgd"):
        raise ValueError("accelerated extrapolation supports exact or sgd estimators")
    if policy.regime != "accelerated_sgd":
        raise ValueError(f"policy {policy.kind!r} is not an accelerated-sgd policy")
    rng = np.random.default_rng(opts.seed)
    est = make_estimator(estimator_kind, problem, dist, opts.perturbation, batch=policy.batch_size)
    _check_step_bound(policy, variance_reduced=False)

    x = _start_point(problem, opts)
    est.initialize(x, rng)
    sched = Schedule(policy, vr=False)
    controller = TwoStageController(policy.stage1_epochs) if policy.two_stage else None
    if controller is not None and controller.should_restart(_passes(est, problem)):
        sched.restart_decreasing()

    x_prev = x.copy()
    y = x.copy()
    v = x.copy()
    mu = problem.mu
    rec = _Recorder(problem, opts, est, algorithm=f"{estimator_kind}:{policy.kind}")
    alive = rec.record(0, _passes(est, problem), x)
    k = 0
    cur = sched.advance()
    while alive and _passes(est, problem) < opts.max_passes:
        passes = _passes(est, problem)
        if controller is not None and controller.should_restart(passes):
            sched.restart_decreasing()
            x_prev, y, v = x.copy(), x.copy(), x.copy()
            cur = sched.advance()
            alive = rec.record(k, _passes(est, problem), x, restart=True)
            continue
        k += 1
        gs = est.estimate(y, rng)
        x = prox(problem.regularizer, cur.eta, y - cur.eta * gs.g)
        nxt = sched.advance()
        beta = cur.delta * (1.0 - cur.delta) * nxt.eta / (cur.eta * nxt.delta + nxt.eta * cur.delta**2)
        y = x + beta * (x - x_prev)
        v = x_prev + (x - x_prev) / cur.delta
        theta = nxt.gamma / (cur.gamma + nxt.delta * mu)
        resid = np.linalg.norm(y - theta * x - (1.0 - theta) * v)
        if resid > 1e-8 * (1.0 + np.linalg.norm(y)):
            raise RuntimeError(f"extrapolation identity violated at iteration {k}: residual {resid}")
        est.post_step(x, rng)
        x_prev = x
        cur = nxt
        if not np.all(np.isfinite(x)):
            rec.trace.diverged = True
            rec.trace.message = f"non-finite iterate at iteration {k}"
            break
        if rec.due(_passes(est, problem)):
            alive = rec.record(k, _passes(est, problem), x)
    if not rec.trace.diverged and (not rec.trace.rows or rec.trace.rows[-1].k != k):
        rec.record(k, _passes(est, problem), x)
    return rec.trace


def run_accelerated_svrg(
    problem: Problem,
    dist: SamplingDistribution,
    policy: StepPolicy,
    opts: RunOptions,
) -> SolverTrace:
    """Accelerated anchored loop (fresh anchor perturbations, no seed table).

    Per iteration: solve (delta_k, gamma_k); form the extrapolation point
    y_{k-1} = theta_k v_{k-1} + (1 - theta_k) anchor; take the anchored
    gradient estimate at y_{k-1}; proximal step; update the surrogate
    minimizer v_k; move the anchor to x_k with probability 1/n. The traced
    objective is evaluated at the anchor (the output point).
    """
    if problem.mu <= 0:
        raise ValueError("solver runs require mu > 0 (strongly convex case only)")
    if policy.regime != "accelerated_svrg":
        raise ValueError(f"policy {policy.kind!r} is not an accelerated-svrg policy")
    rng = np.random.default_rng(opts.seed)
    est = make_estimator("svrg", problem, dist, opts.perturbation, svrg_mode="fresh")

    x = _start_point(problem, opts)
    est.initialize(x, rng)
    sched = Schedule(policy, vr=True)
    controller = TwoStageController(policy.stage1_epochs) if policy.two_stage else None
    if controller is not None and controller.should_restart(_passes(est, problem)):
        sched.restart_decreasing()

    v = x.copy()
    n, mu = problem.n, problem.mu
    rec = _Recorder(problem, opts, est, algorithm=f"svrg:{policy.kind}")
    alive = rec.record(0, _passes(est, problem), est.anchor)
    k = 0
    while alive and _passes(est, problem) < opts.max_passes:
        passes = _passes(est, problem)
        if controller is not None and controller.should_restart(passes):
            sched.restart_decreasing()
            x = est.anchor.copy()
            v = x.copy()
            est.initialize(x, rng)
            alive = rec.record(k, _passes(est, problem), est.anchor, restart=True)
            continue
        k += 1
        st = sched.advance()
        bound = min(1.0 / (3.0 * policy.L_Q), 1.0 / (15.0 * st.gamma * n))
        if st.eta > bound * _BOUND_SLACK:
            raise ValueError(
                f"step size {st.eta} violates the bound min(1/(3 L_Q), 1/(15 gamma_k n)) = {bound}"
            )
        theta = (3.0 * n * st.delta - 5.0 * mu * st.eta) / (3.0 - 5.0 * mu * st.eta)
        if theta < -1e-10 or theta > 1.0 + 1e-10:
            raise ValueError(f"mixing weight theta={theta} outside [0, 1]; inconsistent eta/mu/n")
        theta = min(max(theta, 0.0), 1.0)
        y = theta * v + (1.0 - theta) * est.anchor
        gs = est.estimate(y, rng)
        x = prox(problem.regularizer, st.eta, y - st.eta * gs.g)
        coef = mu * st.delta / st.gamma
        v = (1.0 - coef) * v + coef * y + (st.delta / (st.gamma * st.eta)) * (x - y)
        est.post_step(x, rng)
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v))):
            rec.trace.diverged = True
            rec.trace.message = f"non-finite iterate at iteration {k}"
            break
        if rec.due(_passes(est, problem)):
            alive = rec.record(k, _passes(est, problem), est.anchor)
    if not rec.trace.diverged and (not rec.trace.rows or rec.trace.rows[-1].k != k):
        rec.record(k, _passes(est, problem), est.anchor)
    return rec.trace


def run_two_stage(
    problem: Problem,
    policy: StepPolicy,
    dist: SamplingDistribution,
    opts: RunOptions,
) -> SolverTrace:
    """Dispatch a two-stage ("_decr") policy to its solver loop."""
    if not policy.two_stage:
        raise ValueError(f"policy {policy.kind!r} is not a two-stage policy")
    family = policy.family
    if family == "sgd":
        return run_basic(problem, "sgd", dist, policy, opts)
    if family in ("acc_sgd", "acc_mb_sgd"):
        return run_accelerated_sgd(problem, "sgd", dist, policy, opts)
    if family == "svrg":
        return run_basic(problem, "svrg", dist, policy, opts)
    return run_accelerated_svrg(problem, dist, policy, opts)
