"""Index distributions over sum components and their derived constants.

A distribution Q = (q_1, ..., q_n) determines two constants used by the
step-size policies: the sampling-dependent smoothness
L_Q = max_i L_i / (q_i n) and the noise amplification
rho_Q = 1 / (n min_i q_i), which equals 1 exactly for uniform sampling.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["SamplingDistribution", "build_distribution", "from_weights", "sample"]


@dataclass(frozen=True)
class SamplingDistribution:
    q: np.ndarray
    L_Q: float
    rho_Q: float
    _cdf: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        q = np.asarray(self.q, dtype=np.float64)
        if q.ndim != 1 or q.size == 0:
            raise ValueError("q must be a nonempty vector")
        if np.any(q <= 0):
            raise ValueError("all sampling probabilities must be positive")
        if abs(float(np.sum(q)) - 1.0) > 1e-12:
            raise ValueError("sampling probabilities must sum to 1")
        object.__setattr__(self, "q", q)
        cdf = np.cumsum(q)
        cdf[-1] = 1.0
        object.__setattr__(self, "_cdf", cdf)

    @property
    def n(self) -> int:
        return self.q.size


def build_distribution(mode: str, L: np.ndarray) -> SamplingDistribution:
    """Uniform or Lipschitz-proportional distribution over n components.

    uniform: q_i = 1/n, L_Q = max_i L_i, rho_Q = 1.
    lipschitz: q_i = L_i / sum_j L_j, L_Q = mean(L), rho_Q = sum(L)/(n min L).
    """
    L = np.asarray(L, dtype=np.float64)
    if np.any(L <= 0):
        raise ValueError("smoothness bounds must be positive")
    n = L.size
    if mode == "uniform":
        q = np.full(n, 1.0 / n)
        return SamplingDistribution(q, L_Q=float(np.max(L)), rho_Q=1.0)
    if mode == "lipschitz":
        total = float(np.sum(L))
        q = L / total
        return SamplingDistribution(q, L_Q=total / n, rho_Q=total / (n * float(np.min(L))))
    raise ValueError(f"unknown sampling mode {mode!r}")


def from_weights(q: np.ndarray, L: np.ndarray) -> SamplingDistribution:
    """Arbitrary user-supplied probabilities; constants are recomputed."""
    q = np.asarray(q, dtype=np.float64)
    L = np.asarray(L, dtype=np.float64)
    if q.shape != L.shape:
        raise ValueError("q and L must have matching lengths")
    n = q.size
    q = q / np.sum(q)
    L_Q = float(np.max(L / (q * n)))
    rho_Q = 1.0 / (n * float(np.min(q)))
    return SamplingDistribution(q, L_Q=L_Q, rho_Q=rho_Q)


def sample(dist: SamplingDistribution, rng: np.random.Generator) -> int:
    """Draw one 0-based index with probability q_i (inverse CDF)."""
    u = rng.random()
    return int(np.searchsorted(dist._cdf, u, side="right"))
