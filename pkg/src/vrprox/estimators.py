"""Unbiased gradient estimators for the solver loops.

Four kinds are provided:

* ``exact`` -- the full smooth gradient (deterministic);
* ``sgd`` -- importance-weighted single or minibatch component gradients;
* ``svrg`` -- anchored difference estimator whose anchor moves to the
  current iterate with probability 1/n per step. In ``replay`` mode only
  the n perturbation seeds of the anchor snapshot are stored, so the
  anchor term reproduces bit-for-bit the draws that entered the stored
  mean gradient (O(n+p) memory). In ``fresh`` mode the anchor term uses a
  new perturbation draw each step and no seeds are kept;
* ``saga`` -- a table of n past component gradients updated one uniformly
  chosen row per step, with an optional strong-convexity shift
  ``beta`` in [0, mu].

Every estimator counts the component-gradient evaluations it performs in
``.evaluations``; effective passes are evaluations divided by n.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .problem import Perturbation, Problem, component_gradient, full_gradient
from .sampling import SamplingDistribution, sample

__all__ = [
    "ExactGradient",
    "GradientSample",
    "SagaEstimator",
    "SgdEstimator",
    "SvrgEstimator",
    "make_estimator",
    "variance_probe",
]

_SEED_HIGH = 2**63 - 1


@dataclass
class GradientSample:
    """One gradient estimate: the vector, the component drawn (or None for
    deterministic estimates) and the perturbation seed of the query term."""

    g: np.ndarray
    index: int | None = None
    seed: int = 0


def _draw_seed(rng: np.random.Generator) -> int:
    return int(rng.integers(0, _SEED_HIGH))


class _EstimatorBase:
    kind = "base"

    def __init__(self, problem: Problem, dist: SamplingDistribution, perturbation: Perturbation):
        if dist.n != problem.n:
            raise ValueError("sampling distribution size must match component count")
        self.problem = problem
        self.dist = dist
        self.perturbation = perturbation
        self.evaluations = 0

    # Estimators that need a starting point override this.
    def initialize(self, x0: np.ndarray, rng: np.random.Generator) -> None:
        del x0, rng

    def post_step(self, x: np.ndarray, rng: np.random.Generator) -> None:
        del x, rng

    def estimate(self, x: np.ndarray, rng: np.random.Generator, charge: bool = True) -> GradientSample:
        raise NotImplementedError

    def estimate_for_index(self, x: np.ndarray, i: int) -> np.ndarray:
        """Value of the estimate conditional on drawing component i
        (perturbation-free only; used by exhaustive diagnostics)."""
        raise NotImplementedError

    @property
    def variance_reduced(self) -> bool:
        return False

    def _weight(self, i: int) -> float:
        return 1.0 / (self.dist.q[i] * self.problem.n)

    def _require_inactive(self):
        if self.perturbation.active:
            raise ValueError("exhaustive enumeration requires an inactive perturbation")


class ExactGradient(_EstimatorBase):
    kind = "exact"

    def estimate(self, x, rng, charge=True):
        del rng
        g = full_gradient(self.problem, x)
        if charge:
            self.evaluations += self.problem.n
        return GradientSample(g=g, index=None, seed=0)

    def estimate_for_index(self, x, i):
        del i
        return full_gradient(self.problem, x)


class SgdEstimator(_EstimatorBase):
    kind = "sgd"

    def __init__(self, problem, dist, perturbation, batch: int = 1):
        super().__init__(problem, dist, perturbation)
        if batch < 1:
            raise ValueError("batch size must be at least 1")
        self.batch = batch

    def estimate(self, x, rng, charge=True):
        acc = np.zeros(self.problem.p)
        last_i, last_seed = 0, 0
        for _ in range(self.batch):
            i = sample(self.dist, rng)
            seed = _draw_seed(rng) if self.perturbation.active else 0
            acc += self._weight(i) * component_gradient(self.problem, i, x, self.perturbation, seed)
            last_i, last_seed = i, seed
        if charge:
            self.evaluations += self.batch
        return GradientSample(g=acc / self.batch, index=last_i, seed=last_seed)

    def estimate_for_index(self, x, i):
        self._require_inactive()
        if self.batch != 1:
            raise ValueError("exhaustive enumeration is only defined for batch size 1")
        return self._weight(i) * component_gradient(self.problem, i, x)


class SvrgEstimator(_EstimatorBase):
    kind = "svrg"

    def __init__(self, problem, dist, perturbation, mode: str = "replay"):
        super().__init__(problem, dist, perturbation)
        if mode not in ("replay", "fresh"):
            raise ValueError(f"unknown anchor mode {mode!r}")
        self.mode = mode
        self.anchor: np.ndarray | None = None
        self.mean_grad: np.ndarray | None = None
        self.seed_table: np.ndarray | None = None
        self.anchor_epoch = 0

    @property
    def variance_reduced(self) -> bool:
        return True

    def initialize(self, x0, rng):
        self.anchor = np.array(x0, dtype=np.float64, copy=True)
        self._refresh_mean(rng)
        self.evaluations += self.problem.n

    def _refresh_mean(self, rng):
        if self.mode == "replay":
            if self.perturbation.active:
                self.seed_table = rng.integers(0, _SEED_HIGH, size=self.problem.n)
            else:
                self.seed_table = np.zeros(self.problem.n, dtype=np.int64)
            self.mean_grad = self.recompute_mean()
        else:
            base = _draw_seed(rng) if self.perturbation.active else 0
            self.mean_grad = full_gradient(self.problem, self.anchor, self.perturbation, base)

    def recompute_mean(self) -> np.ndarray:
        """Anchor mean gradient from the stored seeds, bit-identical to the
        value computed when the anchor was last reset (replay mode)."""
        if self.anchor is None:
            raise RuntimeError("estimator not initialized")
        if self.mode != "replay":
            raise RuntimeError("seed replay is only available in replay mode")
        if not self.perturbation.active:
            return full_gradient(self.problem, self.anchor)
        grads = [
            component_gradient(self.problem, i, self.anchor, self.perturbation, int(self.seed_table[i]))
            for i in range(self.problem.n)
        ]
        return np.mean(np.stack(grads), axis=0)

    def estimate(self, x, rng, charge=True):
        if self.anchor is None:
            raise RuntimeError("estimator not initialized")
        i = sample(self.dist, rng)
        active = self.perturbation.active
        query_seed = _draw_seed(rng) if active else 0
        if self.mode == "replay":
            anchor_seed = int(self.seed_table[i])
        else:
            anchor_seed = _draw_seed(rng) if active else 0
        gq = component_gradient(self.problem, i, x, self.perturbation, query_seed)
        ga = component_gradient(self.problem, i, self.anchor, self.perturbation, anchor_seed)
        g = self._weight(i) * (gq - ga) + self.mean_grad
        if charge:
            self.evaluations += 2
        return GradientSample(g=g, index=i, seed=query_seed)

    def post_step(self, x, rng, force_reset: bool | None = None):
        if self.anchor is None:
            raise RuntimeError("estimator not initialized")
        reset = rng.random() < 1.0 / self.problem.n
        if force_reset is not None:
            reset = force_reset
        if reset:
            self.anchor = np.array(x, dtype=np.float64, copy=True)
            self._refresh_mean(rng)
            self.anchor_epoch += 1
            self.evaluations += self.problem.n

    def estimate_for_index(self, x, i):
        self._require_inactive()
        if self.anchor is None:
            raise RuntimeError("estimator not initialized")
        gq = component_gradient(self.problem, i, x)
        ga = component_gradient(self.problem, i, self.anchor)
        return self._weight(i) * (gq - ga) + self.mean_grad


class SagaEstimator(_EstimatorBase):
    kind = "saga"

    def __init__(self, problem, dist, perturbation, beta: float = 0.0):
        super().__init__(problem, dist, perturbation)
        if not 0.0 <= beta <= problem.mu:
            raise ValueError("beta must lie in [0, mu]")
        self.beta = beta
        self.table: np.ndarray | None = None
        self.mean_grad: np.ndarray | None = None

    @property
    def variance_reduced(self) -> bool:
        return True

    def initialize(self, x0, rng):
        x0 = np.asarray(x0, dtype=np.float64)
        n, p = self.problem.n, self.problem.p
        rows = []
        for i in range(n):
            seed = _draw_seed(rng) if self.perturbation.active else 0
            rows.append(component_gradient(self.problem, i, x0, self.perturbation, seed) - self.beta * x0)
        self.table = np.stack(rows)
        self.mean_grad = np.mean(self.table, axis=0)
        self.evaluations += n

    def estimate(self, x, rng, charge=True):
        if self.table is None:
            raise RuntimeError("estimator not initialized")
        i = sample(self.dist, rng)
        seed = _draw_seed(rng) if self.perturbation.active else 0
        gi = component_gradient(self.problem, i, x, self.perturbation, seed)
        g = self._weight(i) * (gi - self.beta * x - self.table[i]) + self.mean_grad + self.beta * x
        if charge:
            self.evaluations += 1
        return GradientSample(g=g, index=i, seed=seed)

    def post_step(self, x, rng, force_index: int | None = None):
        if self.table is None:
            raise RuntimeError("estimator not initialized")
        j = int(rng.integers(0, self.problem.n))
        if force_index is not None:
            j = force_index
        seed = _draw_seed(rng) if self.perturbation.active else 0
        new_row = component_gradient(self.problem, j, x, self.perturbation, seed) - self.beta * np.asarray(x)
        self.mean_grad = self.mean_grad + (new_row - self.table[j]) / self.problem.n
        self.table[j] = new_row
        self.evaluations += 1

    def recompute_mean(self) -> np.ndarray:
        if self.table is None:
            raise RuntimeError("estimator not initialized")
        return np.mean(self.table, axis=0)

    def estimate_for_index(self, x, i):
        self._require_inactive()
        if self.table is None:
            raise RuntimeError("estimator not initialized")
        gi = component_gradient(self.problem, i, x)
        return self._weight(i) * (gi - self.beta * x - self.table[i]) + self.mean_grad + self.beta * x


def make_estimator(
    kind: str,
    problem: Problem,
    dist: SamplingDistribution,
    perturbation: Perturbation,
    batch: int = 1,
    beta: float = 0.0,
    svrg_mode: str = "replay",
) -> _EstimatorBase:
    if kind == "exact":
        return ExactGradient(problem, dist, perturbation)
    if kind == "sgd":
        return SgdEstimator(problem, dist, perturbation, batch=batch)
    if kind == "svrg":
        return SvrgEstimator(problem, dist, perturbation, mode=svrg_mode)
    if kind == "saga":
        return SagaEstimator(problem, dist, perturbation, beta=beta)
    raise ValueError(f"unknown estimator kind {kind!r}")


def variance_probe(
    estimator: _EstimatorBase,
    x: np.ndarray,
    trials: int = 0,
    rng: np.random.Generator | None = None,
) -> float:
    """Second moment E||g - grad f(x)||^2 of the estimator at x.

    ``trials`` == 0 enumerates the component draw exactly (requires an
    inactive perturbation); otherwise an empirical average over ``trials``
    fresh estimates is returned. The probe is purely diagnostic: it never
    consumes a solver's generator and never charges the evaluation counter.
    """
    x = np.asarray(x, dtype=np.float64)
    exact = full_gradient(estimator.problem, x)
    if trials == 0:
        estimator._require_inactive()
        total = 0.0
        for i in range(estimator.problem.n):
            dev = estimator.estimate_for_index(x, i) - exact
            total += float(estimator.dist.q[i]) * float(dev @ dev)
        return total
    if trials < 0:
        raise ValueError("trials must be nonnegative")
    rng = rng or np.random.default_rng(0)
    total = 0.0
    for _ in range(trials):
        dev = estimator.estimate(x, rng, charge=False).g - exact
        total += float(dev @ dev)
    return total / trials
