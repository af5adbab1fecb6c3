"""Finite-sum composite objectives with exact or perturbed gradient oracles.

The smooth part is f(x) = (1/n) sum_i [ loss_i(x) + (l2/2)||x||^2 ]: the
ridge term is folded into every component, so each per-component smoothness
bound includes +l2 and the strong-convexity modulus defaults to l2. The
nonsmooth part is a :class:`~vrprox.prox.Regularizer`.

Gradient oracles are pure functions of (component, point, perturbation,
seed); all randomness enters through the seed, which makes any past draw
replayable bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .prox import Regularizer, regularizer_value

__all__ = [
    "Dataset",
    "LossSpec",
    "Perturbation",
    "Problem",
    "component_gradient",
    "evaluate_objective",
    "full_gradient",
    "normalize_rows",
    "smoothness_bounds",
]


def normalize_rows(features: np.ndarray) -> np.ndarray:
    """Scale every row to unit Euclidean norm (zero rows are left as-is)."""
    features = np.asarray(features, dtype=np.float64)
    norms = np.linalg.norm(features, axis=1, keepdims=True)
    safe = np.where(norms > 0, norms, 1.0)
    return features / safe


@dataclass(frozen=True)
class Dataset:
    """Dense feature matrix (n x p) with one label per row.

    Labels live in {-1, +1} for classification and are arbitrary reals for
    regression. When ``normalized`` is set, every row must have unit norm.
    """

    features: np.ndarray
    labels: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        feats = np.ascontiguousarray(self.features, dtype=np.float64)
        labels = np.ascontiguousarray(self.labels, dtype=np.float64)
        if feats.ndim != 2:
            raise ValueError("features must be a 2-D matrix")
        if labels.shape != (feats.shape[0],):
            raise ValueError("labels must have one entry per feature row")
        if not np.all(np.isfinite(feats)):
            raise ValueError("features contain non-finite entries")
        if self.normalized:
            norms = np.linalg.norm(feats, axis=1)
            if np.max(np.abs(norms - 1.0)) > 1e-12:
                raise ValueError("normalized dataset has rows with norm != 1")
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class LossSpec:
    """Per-example loss family and component count."""

    kind: str  # "logistic" | "squared"
    n: int

    def __post_init__(self):
        if self.kind not in ("logistic", "squared"):
            raise ValueError(f"unknown loss kind {self.kind!r}")
        if self.n <= 0:
            raise ValueError("component count must be positive")


def smoothness_bounds(dataset: Dataset, loss: LossSpec, l2: float) -> np.ndarray:
    """Per-component gradient-Lipschitz bounds, ridge contribution included.

    Logistic: 0.25 * ||a_i||^2 + l2 (so 0.25 + l2 on unit-norm rows);
    squared: ||a_i||^2 + l2. The bounds hold uniformly over dropout masks
    because masking never increases a row norm.
    """
    sq = np.einsum("ij,ij->i", dataset.features, dataset.features)
    factor = 0.25 if loss.kind == "logistic" else 1.0
    return factor * sq + l2


@dataclass(frozen=True)
class Perturbation:
    """Stochastic corruption of single-component gradient evaluations.

    dropout zeroes each feature coordinate independently with probability
    ``rate`` and evaluates the loss on the masked row, with no
    inverse-probability rescaling; the exact component objective is then the
    expectation over masks. gaussian adds zero-mean coordinatewise noise of
    the given standard deviation directly to the gradient (the objective is
    unchanged); it exists for tests where the noise second moment is known
    in closed form.
    """

    kind: str = "none"  # "none" | "dropout" | "gaussian"
    rate: float = 0.0
    std: float = 0.0

    def __post_init__(self):
        if self.kind not in ("none", "dropout", "gaussian"):
            raise ValueError(f"unknown perturbation kind {self.kind!r}")
        if self.kind == "dropout" and not (0.0 <= self.rate < 1.0):
            raise ValueError("dropout rate must lie in [0, 1)")
        if self.kind == "gaussian" and self.std < 0:
            raise ValueError("gaussian std must be nonnegative")

    @staticmethod
    def none() -> "Perturbation":
        return Perturbation("none")

    @staticmethod
    def dropout(rate: float) -> "Perturbation":
        return Perturbation("dropout", rate=float(rate))

    @staticmethod
    def gaussian(std: float) -> "Perturbation":
        return Perturbation("gaussian", std=float(std))

    @property
    def active(self) -> bool:
        if self.kind == "dropout":
            return self.rate > 0.0
        if self.kind == "gaussian":
            return self.std > 0.0
        return False


@dataclass(frozen=True)
class Problem:
    """Composite objective F = f + psi over a dataset.

    ``smoothness`` holds the per-component bounds L_i (ridge included) and
    ``mu`` the strong-convexity modulus, which must satisfy L_i >= mu.
    """

    dataset: Dataset
    loss: LossSpec
    l2: float
    regularizer: Regularizer = field(default_factory=Regularizer.none)
    smoothness: np.ndarray | None = None
    mu: float | None = None

    def __post_init__(self):
        if self.l2 < 0:
            raise ValueError("l2 strength must be nonnegative")
        if self.loss.n != self.dataset.n:
            raise ValueError("loss component count must match dataset rows")
        smooth = self.smoothness
        if smooth is None:
            smooth = smoothness_bounds(self.dataset, self.loss, self.l2)
        smooth = np.asarray(smooth, dtype=np.float64)
        mu = self.l2 if self.mu is None else float(self.mu)
        if mu < self.l2:
            raise ValueError("mu cannot be below the ridge strength l2")
        if np.any(smooth < mu):
            raise ValueError("every smoothness bound must satisfy L_i >= mu")
        object.__setattr__(self, "smoothness", smooth)
        object.__setattr__(self, "mu", mu)

    @property
    def n(self) -> int:
        return self.dataset.n

    @property
    def p(self) -> int:
        return self.dataset.p

    @property
    def max_smoothness(self) -> float:
        return float(np.max(self.smoothness))


def _loss_values(kind: str, rows: np.ndarray, labels: np.ndarray, x: np.ndarray) -> np.ndarray:
    z = rows @ x
    # overflow deliberately produces inf here; callers report the component
    with np.errstate(over="ignore"):
        if kind == "logistic":
            return np.logaddexp(0.0, -labels * z)
        return 0.5 * (z - labels) ** 2


def _loss_slope(kind: str, row: np.ndarray, label: float, x: np.ndarray) -> float:
    # d loss / d (row @ x)
    z = float(row @ x)
    if kind == "logistic":
        return -label / (1.0 + np.exp(label * z))
    return z - label


def _loss_slopes(kind: str, rows: np.ndarray, labels: np.ndarray, x: np.ndarray) -> np.ndarray:
    z = rows @ x
    if kind == "logistic":
        return -labels / (1.0 + np.exp(labels * z))
    return z - labels


def _dropout_mask(rate: float, p: int, seed: int) -> np.ndarray:
    # P(coordinate zeroed) = rate; the draw is fully determined by the seed.
    rng = np.random.default_rng(seed)
    return (rng.random(p) >= rate).astype(np.float64)


def component_gradient(
    problem: Problem,
    i: int,
    x: np.ndarray,
    perturbation: Perturbation | None = None,
    seed: int = 0,
) -> np.ndarray:
    """Gradient of component i at x, optionally perturbed.

    The result is a pure function of (problem, i, x, perturbation, seed):
    the same seed replays the identical perturbed draw. Components are
    0-indexed.
    """
    if not 0 <= i < problem.n:
        raise IndexError(f"component index {i} out of range [0, {problem.n})")
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (problem.p,):
        raise ValueError(f"point has shape {x.shape}, expected ({problem.p},)")
    pert = perturbation or Perturbation.none()
    row = problem.dataset.features[i]
    label = problem.dataset.labels[i]
    kind = problem.loss.kind

    if pert.kind == "dropout" and pert.rate > 0.0:
        row = row * _dropout_mask(pert.rate, problem.p, seed)
        return _loss_slope(kind, row, label, x) * row + problem.l2 * x

    grad = _loss_slope(kind, row, label, x) * row + problem.l2 * x
    if pert.kind == "gaussian" and pert.std > 0.0:
        rng = np.random.default_rng(seed)
        grad = grad + rng.normal(0.0, pert.std, problem.p)
    return grad


def full_gradient(
    problem: Problem,
    x: np.ndarray,
    perturbation: Perturbation | None = None,
    seed_base: int = 0,
) -> np.ndarray:
    """Average of all component gradients.

    Without perturbation this is the exact smooth gradient (computed
    vectorized); otherwise component i uses seed ``seed_base + i``.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (problem.p,):
        raise ValueError(f"point has shape {x.shape}, expected ({problem.p},)")
    pert = perturbation or Perturbation.none()
    if not pert.active:
        feats = problem.dataset.features
        slopes = _loss_slopes(problem.loss.kind, feats, problem.dataset.labels, x)
        return feats.T @ slopes / problem.n + problem.l2 * x
    grads = [component_gradient(problem, i, x, pert, seed_base + i) for i in range(problem.n)]
    return np.mean(np.stack(grads), axis=0)


def evaluate_objective(
    problem: Problem,
    x: np.ndarray,
    mc_samples: int = 0,
    rng_seed: int = 0,
    perturbation: Perturbation | None = None,
) -> float:
    """Composite objective value F(x) = mean loss + (l2/2)||x||^2 + psi(x).

    With ``mc_samples`` == 0 (or no active dropout) the unperturbed finite
    sum is evaluated exactly. With m > 0 and dropout active, the per-point
    loss is averaged over m fresh masks per data point, which estimates the
    expectation objective; the draw is determined by ``rng_seed``. Gaussian
    gradient noise leaves the objective itself unchanged.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (problem.p,):
        raise ValueError(f"point has shape {x.shape}, expected ({problem.p},)")
    if mc_samples < 0:
        raise ValueError("mc_samples must be nonnegative")
    feats = problem.dataset.features
    labels = problem.dataset.labels
    pert = perturbation or Perturbation.none()
    dropout = pert.kind == "dropout" and pert.rate > 0.0 and mc_samples > 0

    if not dropout:
        losses = _loss_values(problem.loss.kind, feats, labels, x)
        _check_finite_losses(losses)
        mean_loss = float(np.mean(losses))
    else:
        rng = np.random.default_rng(rng_seed)
        total = 0.0
        for _ in range(mc_samples):
            masks = (rng.random(feats.shape) >= pert.rate).astype(np.float64)
            losses = _loss_values(problem.loss.kind, feats * masks, labels, x)
            _check_finite_losses(losses)
            total += float(np.mean(losses))
        mean_loss = total / mc_samples

    smooth = mean_loss + 0.5 * problem.l2 * float(x @ x)
    return smooth + regularizer_value(problem.regularizer, x)


def _check_finite_losses(losses: np.ndarray) -> None:
    bad = np.flatnonzero(~np.isfinite(losses))
    if bad.size:
        raise FloatingPointError(f"non-finite loss at component {int(bad[0])}")
