import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vrprox import (
    Schedule,
    StepPolicy,
    TwoStageController,
    gamma_product_closed_form,
    solve_delta,
)


class TestSolveDelta:
    def test_basic_fixed_point(self):
        delta, gamma = solve_delta("basic", eta=1.0 / 2.0, gamma_prev=0.1, mu=0.1)
        assert delta == 0.1 / 2.0
        assert gamma == 0.1

    def test_basic_closed_form_general(self):
        eta, gp, mu = 0.2, 1.5, 0.3
        delta, gamma = solve_delta("basic", eta, gp, mu)
        # delta solves delta = eta * gamma with the gamma recursion
        assert abs(delta - eta * gamma) < 1e-15
        assert abs(gamma - ((1 - delta) * gp + mu * delta)) < 1e-15

    def test_accelerated_sgd_fixed_point(self):
        L, mu = 2.0, 0.02
        delta, gamma = solve_delta("accelerated_sgd", 1.0 / L, mu, mu)
        assert delta == math.sqrt(mu / L)
        assert gamma == mu

    def test_accelerated_sgd_general_root(self):
        eta, gp, mu = 0.3, 2.0, 0.5
        delta, gamma = solve_delta("accelerated_sgd", eta, gp, mu)
        assert abs(delta - math.sqrt(eta * gamma)) < 1e-13
        assert abs(gamma - ((1 - delta) * gp + mu * delta)) < 1e-15

    def test_accelerated_svrg_fixed_point(self):
        mu, eta, n = 1e-3, 0.5, 40
        delta, gamma = solve_delta("accelerated_svrg", eta, mu, mu, n)
        assert delta == math.sqrt(5 * eta * mu / (3 * n))
        assert gamma == mu

    def test_accelerated_svrg_general_root(self):
        mu, eta, n = 1e-3, 0.5, 40
        delta, gamma = solve_delta("accelerated_svrg", eta, 5 * mu, mu, n)
        c = 5 * eta / (3 * n)
        assert abs(delta**2 + c * (5 * mu - mu) * delta - c * 5 * mu) < 1e-18
        assert abs(delta - math.sqrt(c * gamma)) < 1e-13

    def test_delta_must_stay_below_one(self):
        with pytest.raises(ValueError, match="too large"):
            solve_delta("basic", eta=20.0, gamma_prev=0.1, mu=0.1)

    def test_precondition(self):
        with pytest.raises(ValueError):
            solve_delta("basic", eta=0.1, gamma_prev=0.05, mu=0.1)


class TestStepPolicy:
    def make(self, kind, L=1.0, L_Q=0.35, mu=1e-4, n=1000, stage1=0.0):
        return StepPolicy(kind=kind, L=L, L_Q=L_Q, mu=mu, n=n, stage1_epochs=stage1)

    def test_svrg_const_value(self):
        assert self.make("svrg_const").step_size(1) == pytest.approx(1.0 / 4.2, rel=1e-15)

    def test_acc_svrg_const_value(self):
        pol = self.make("acc_svrg_const", L_Q=0.25, mu=1e-4, n=1000)
        assert pol.step_size(1) == pytest.approx(2.0 / 3.0, rel=1e-15)

    def test_sgd_decr_value(self):
        pol = self.make("sgd_decr", L=1.0, mu=0.1)
        assert pol.step_size(100, "decreasing") == pytest.approx(2.0 / 10.2, rel=1e-15)

    def test_svrg_decr_base_includes_mu_cap(self):
        pol = self.make("svrg_decr", L_Q=0.25, mu=1e-3, n=1000)
        assert pol.base_step() == min(1.0 / 3.0, 1.0 / 5.0)

    def test_acc_sgd_decr_quadratic_term(self):
        pol = self.make("acc_sgd_decr", L=1.0, mu=0.1)
        assert pol.step_size(10, "decreasing") == min(1.0, 4.0 / (0.1 * 144))

    def test_acc_svrg_decr_term(self):
        pol = self.make("acc_svrg_decr", L_Q=0.25, mu=1e-4, n=100)
        k = 5000
        expected = min(pol.base_step(), 12 * 100 / (5 * 1e-4 * (k + 2) ** 2))
        assert pol.step_size(k, "decreasing") == expected

    def test_mu_zero_rejected(self):
        with pytest.raises(ValueError, match="strongly convex"):
            StepPolicy(kind="sgd_const", L=1.0, L_Q=1.0, mu=0.0, n=10)

    def test_minibatch_size(self):
        pol = self.make("acc_mb_sgd_decr", L=1.0, mu=1e-4)
        assert pol.batch_size == math.ceil(math.sqrt(1.0 / 1e-4))
        assert self.make("sgd_const").batch_size == 1

    def test_const_policies_have_no_decreasing_stage(self):
        with pytest.raises(ValueError):
            self.make("svrg_const").step_size(3, "decreasing")

    @given(st.integers(min_value=1, max_value=3000))
    @settings(max_examples=60)
    def test_step_sizes_non_increasing(self, k):
        for kind in ("sgd_decr", "acc_sgd_decr", "svrg_decr", "acc_svrg_decr"):
            pol = self.make(kind, mu=0.01, n=50)
            assert pol.step_size(k + 1, "decreasing") <= pol.step_size(k, "decreasing")
            assert pol.step_size(1, "decreasing") <= pol.base_step()


class TestGammaClosedForms:
    def test_constant(self):
        assert gamma_product_closed_form("constant", 3, delta=0.5) == 0.125

    def test_harmonic_small_k(self):
        assert gamma_product_closed_form("harmonic", 5) == pytest.approx(2.0 / 42.0, rel=1e-15)

    def test_capped_beyond_threshold(self):
        delta = 0.4
        k0 = math.ceil(2.0 / delta - 2.0)
        k = k0 + 7
        expected = (1 - delta) ** (k0 - 1) * k0 * (k0 + 1) / ((k + 1) * (k + 2))
        assert gamma_product_closed_form("capped", k, delta=delta) == pytest.approx(expected, rel=1e-15)

    def _running(self, deltas):
        out = 1.0
        for d in deltas:
            out *= 1.0 - d
        return out

    def test_running_product_matches_constant(self):
        mu, eta = 1e-3, 0.25
        pol = StepPolicy(kind="sgd_const", L=4.0, L_Q=4.0, mu=mu, n=10)
        sched = Schedule(pol, vr=False)
        for k in (1, 10, 100, 1000):
            while sched.k < k:
                st_ = sched.advance()
            assert st_.gamma_prod == pytest.approx((1 - mu * eta) ** k, rel=1e-12)

    def test_running_product_matches_accelerated(self):
        mu, L = 1e-3, 4.0
        pol = StepPolicy(kind="acc_sgd_const", L=L, L_Q=L, mu=mu, n=10)
        sched = Schedule(pol, vr=False)
        target = 1.0
        for k in range(1, 2001):
            st_ = sched.advance()
            target *= 1 - math.sqrt(mu / L)
        assert st_.gamma_prod == pytest.approx((1 - math.sqrt(mu / L)) ** 2000, rel=1e-12)

    def test_telescoping_identity(self):
        rng = np.random.default_rng(3)
        deltas = rng.uniform(0.01, 0.9, size=500)
        gam = np.cumprod(1 - deltas)
        lhs = np.sum(deltas / gam) + 1.0
        assert lhs == pytest.approx(1.0 / gam[-1], rel=1e-10)


class TestScheduleDriver:
    def test_gamma_stays_in_band(self):
        pol = StepPolicy(kind="svrg_decr", L=0.25, L_Q=0.25, mu=1e-2, n=20, stage1_epochs=0)
        sched = Schedule(pol, vr=True, gamma0=5e-2, stage="decreasing")
        gammas = [sched.advance().gamma for _ in range(500)]
        assert all(1e-2 - 1e-15 <= g <= 5e-2 + 1e-15 for g in gammas)

    def test_tau_rule(self):
        pol = StepPolicy(kind="svrg_const", L=0.25, L_Q=0.25, mu=1e-2, n=20)
        vr = Schedule(pol, vr=True).advance()
        plain = Schedule(pol, vr=False).advance()
        assert vr.tau == min(vr.delta, 1.0 / 100.0)
        assert plain.tau == plain.delta

    def test_restart_resets_product_and_counter(self):
        pol = StepPolicy(kind="svrg_decr", L=0.25, L_Q=0.25, mu=1e-2, n=20, stage1_epochs=5)
        sched = Schedule(pol, vr=True)
        for _ in range(50):
            sched.advance()
        sched.restart_decreasing()
        assert sched.k == 0 and sched.gamma_prod == 1.0 and sched.gamma == pol.mu
        # after the restart the running product matches the capped closed form
        states = [sched.advance() for _ in range(400)]
        delta_cap = pol.mu * pol.base_step()
        for k in (1, 50, 399):
            expected = gamma_product_closed_form("capped", states[k - 1].k, delta=delta_cap)
            assert states[k - 1].gamma_prod == pytest.approx(expected, rel=1e-11)


class TestTwoStageController:
    def test_zero_budget_fires_immediately(self):
        c = TwoStageController(0.0)
        assert c.should_restart(0.0)
        assert not c.should_restart(100.0)

    def test_fires_exactly_once_at_threshold(self):
        c = TwoStageController(30.0)
        fired = [p for p in np.arange(0, 60, 0.5) if c.should_restart(p)]
        assert fired == [30.0]
