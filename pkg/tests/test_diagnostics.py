import numpy as np
import pytest

import vrprox as vp
from vrprox import (
    Regularizer,
    RunOptions,
    build_distribution,
    duality_gap,
    fit_linear_rate,
    run_basic,
)
from vrprox.trace import SolverTrace, TraceRow

from oracles import newton_solve, ridge_closed_form, small_problem


class TestDualityGap:
    def test_ridge_closed_form_certified(self):
        prob = small_problem(n=8, p=5, loss="squared", l2=0.3)
        xstar = ridge_closed_form(prob)
        assert 0 <= duality_gap(prob, xstar) <= 1e-10

    def test_logistic_newton_certified(self):
        prob = small_problem(n=10, p=4, loss="logistic", l2=0.05)
        xstar = newton_solve(prob)
        assert 0 <= duality_gap(prob, xstar) <= 1e-8

    def test_weak_duality_on_random_points(self):
        prob = small_problem(n=10, p=4, loss="logistic", l2=0.05)
        rng = np.random.default_rng(0)
        for _ in range(50):
            x = rng.standard_normal(4) * rng.uniform(0.1, 5.0)
            assert duality_gap(prob, x) >= -1e-12

    def test_gap_equals_gradient_norm_identity_squared(self):
        # for the candidate built from loss slopes, the gap collapses to
        # ||grad F||^2 / (2 l2) when no l1 term is present
        prob = small_problem(n=8, p=5, loss="squared", l2=0.3)
        rng = np.random.default_rng(1)
        for _ in range(20):
            x = rng.standard_normal(5)
            g = vp.full_gradient(prob, x)
            expected = float(g @ g) / (2 * prob.l2)
            assert duality_gap(prob, x) == pytest.approx(expected, rel=1e-10, abs=1e-12)

    def test_gap_sandwiches_suboptimality(self):
        prob = small_problem(n=10, p=4, loss="logistic", l2=0.05)
        xstar = newton_solve(prob)
        fstar = vp.evaluate_objective(prob, xstar)
        rng = np.random.default_rng(2)
        for _ in range(20):
            x = xstar + rng.standard_normal(4) * 0.3
            gap = duality_gap(prob, x)
            assert gap >= vp.evaluate_objective(prob, x) - fstar - 1e-12

    def test_l1_composite_gap_vanishes_at_optimum(self):
        prob = small_problem(n=10, p=4, loss="logistic", l2=0.05, reg=Regularizer.l1(0.01))
        dist = build_distribution("uniform", prob.smoothness)
        pol = vp.StepPolicy(
            kind="svrg_const", L=prob.max_smoothness, L_Q=dist.L_Q, mu=prob.mu, n=prob.n
        )
        tr = run_basic(prob, "svrg", dist, pol, RunOptions(max_passes=3000, record_every=500, seed=1))
        assert tr.final.gap is not None
        assert 0 <= tr.final.gap <= 1e-8

    def test_unsupported_combinations_error(self):
        prob = small_problem(reg=Regularizer.box(-1.0, 1.0), l2=0.05)
        with pytest.raises(ValueError, match="regularizer"):
            duality_gap(prob, np.zeros(prob.p))
        prob2 = small_problem(l2=0.0)
        with pytest.raises(ValueError, match="l2 > 0"):
            duality_gap(prob2, np.zeros(prob2.p))


class TestFstarEstimate:
    def make_config(self, tmp_path):
        from vrprox.config import load_config

        cfg = tmp_path / "c.cfg"
        cfg.write_text(
            "dataset = synthetic\n"
            "synthetic.n = 60\n"
            "synthetic.p = 5\n"
            "synthetic.noise = 0.1\n"
            "synthetic.seed = 4\n"
            "loss = logistic\n"
            "lambda = 1/10n\n"
            "algorithms = svrg_const\n"
            "seeds = 0,1\n"
            f"output = {tmp_path / 'o'}\n"
        )
        return load_config(cfg)

    def test_agrees_with_certified_optimum_and_is_reproducible(self, tmp_path):
        from vrprox.experiment import build_problem, estimate_fstar

        config = self.make_config(tmp_path)
        problem = build_problem(config)
        xstar = newton_solve(problem)
        assert duality_gap(problem, xstar) <= 1e-12
        fstar = vp.evaluate_objective(problem, xstar)
        value, run_id = estimate_fstar(config, budget=300)
        assert run_id
        # the best observed value may round one ulp past the oracle optimum
        assert -1e-12 <= value - fstar <= 1e-8
        again, _ = estimate_fstar(config, budget=300)
        assert again == value


class TestFitLinearRate:
    def test_exact_geometric_sequence(self):
        ks = np.arange(200, dtype=float)
        objs = 0.7 + 3.0 * 0.97**ks
        rate = fit_linear_rate(None, fstar=0.7, ks=ks, objectives=objs)
        assert rate == pytest.approx(0.97, abs=1e-10)

    def test_gradient_descent_rate_bound(self):
        prob = small_problem(n=8, p=4, l2=0.1)
        dist = build_distribution("uniform", prob.smoothness)
        pol = vp.StepPolicy(
            kind="sgd_const", L=prob.max_smoothness, L_Q=dist.L_Q, mu=prob.mu, n=prob.n
        )
        tr = run_basic(prob, "exact", dist, pol, RunOptions(max_passes=400, record_every=25))
        xstar = newton_solve(prob)
        fstar = vp.evaluate_objective(prob, xstar)
        rows = [r for r in tr.rows if r.objective - fstar > 1e-14]
        rate = fit_linear_rate(
            None,
            fstar=fstar,
            ks=np.array([r.k for r in rows], dtype=float),
            objectives=np.array([r.objective for r in rows]),
        )
        assert rate <= 1 - prob.mu / prob.max_smoothness + 0.01

    def test_accelerated_rate_beats_sqrt_bound(self):
        l2 = 1e-6
        diag = [0.5, 5e-4]
        n = len(diag)
        A = np.diag(np.sqrt(n * np.asarray(diag)))
        ds = vp.Dataset(features=A, labels=np.ones(n))
        prob = vp.Problem(dataset=ds, loss=vp.LossSpec("squared", n), l2=l2, mu=5e-4 + l2)
        dist = build_distribution("uniform", prob.smoothness)
        pol = vp.StepPolicy(
            kind="acc_sgd_const", L=prob.max_smoothness, L_Q=dist.L_Q, mu=prob.mu, n=n
        )
        tr = vp.run_accelerated_sgd(prob, "exact", dist, pol, RunOptions(max_passes=4000, record_every=50))
        xstar = ridge_closed_form(prob)
        fstar = vp.evaluate_objective(prob, xstar)
        rows = [r for r in tr.rows if r.objective - fstar > 1e-13]
        rate = fit_linear_rate(
            None,
            fstar=fstar,
            ks=np.array([r.k for r in rows], dtype=float),
            objectives=np.array([r.objective for r in rows]),
        )
        assert rate <= 1 - 0.5 * np.sqrt(prob.mu / prob.max_smoothness)

    def test_nonpositive_gap_rejected(self):
        ks = np.arange(5, dtype=float)
        objs = np.array([1.0, 0.9, 0.8, 0.7, 0.6])
        with pytest.raises(ValueError, match="positive"):
            fit_linear_rate(None, fstar=0.8, ks=ks, objectives=objs)

    def test_window_selection_on_trace(self):
        trace = SolverTrace()
        for k in range(50):
            trace.append(TraceRow(k=k, effective_passes=float(k), objective=1.0 + 0.9**k))
        rate = fit_linear_rate(trace, fstar=1.0, window=(10, 40))
        assert rate == pytest.approx(0.9, abs=1e-9)
