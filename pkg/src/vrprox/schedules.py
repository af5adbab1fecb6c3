"""Step-size policies and the coupled weight recursions that drive them.

Every solver run owns one :class:`Schedule`, which advances the sequences
(eta_k, delta_k, gamma_k, Gamma_k, tau_k). The weights satisfy

    gamma_k = (1 - delta_k) * gamma_{k-1} + mu * delta_k

together with a regime-dependent coupling:

    basic             delta_k = eta_k * gamma_k
    accelerated_sgd   delta_k = sqrt(eta_k * gamma_k)
    accelerated_svrg  delta_k = sqrt(5 * eta_k * gamma_k / (3 n))

Gamma_k is the running product of (1 - delta_t). Policies cover constant
step sizes and two-stage variants that restart with decreasing steps after
a configured number of effective passes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "POLICY_KINDS",
    "Schedule",
    "ScheduleState",
    "StepPolicy",
    "TwoStageController",
    "gamma_product_closed_form",
    "solve_delta",
]

REGIMES = ("basic", "accelerated_sgd", "accelerated_svrg")

POLICY_KINDS = (
    "sgd_const",
    "sgd_decr",
    "acc_sgd_const",
    "acc_sgd_decr",
    "acc_mb_sgd_decr",
    "svrg_const",
    "svrg_decr",
    "acc_svrg_const",
    "acc_svrg_decr",
)

# policy kind -> (family, schedule regime, restarts with decreasing steps)
_POLICY_TABLE = {
    "sgd_const": ("sgd", "basic", False),
    "sgd_decr": ("sgd", "basic", True),
    "acc_sgd_const": ("acc_sgd", "accelerated_sgd", False),
    "acc_sgd_decr": ("acc_sgd", "accelerated_sgd", True),
    "acc_mb_sgd_decr": ("acc_mb_sgd", "accelerated_sgd", True),
    "svrg_const": ("svrg", "basic", False),
    "svrg_decr": ("svrg", "basic", True),
    "acc_svrg_const": ("acc_svrg", "accelerated_svrg", False),
    "acc_svrg_decr": ("acc_svrg", "accelerated_svrg", True),
}


def solve_delta(
    regime: str,
    eta: float,
    gamma_prev: float,
    mu: float,
    n: int | None = None,
) -> tuple[float, float]:
    """Solve the coupled (delta_k, gamma_k) system for one iteration.

    Returns the pair (delta_k, gamma_k). The basic regime has the closed
    form delta = eta*gamma_prev / (1 + eta*(gamma_prev - mu)); the
    accelerated regimes take the positive root of
    delta^2 + c*(gamma_prev - mu)*delta - c*gamma_prev = 0 with c = eta
    (sgd) or c = 5*eta/(3n) (svrg). gamma_prev == mu is kept on the exact
    fixed point gamma_k = mu.
    """
    if regime not in REGIMES:
        raise ValueError(f"unknown schedule regime {regime!r}")
    if not eta > 0:
        raise ValueError("step size must be positive")
    if not gamma_prev >= mu >= 0:
        raise ValueError("need gamma_prev >= mu >= 0")

    if regime == "basic":
        if gamma_prev == mu:
            delta, gamma = eta * mu, mu
        else:
            delta = eta * gamma_prev / (1.0 + eta * (gamma_prev - mu))
            gamma = (1.0 - delta) * gamma_prev + mu * delta
    else:
        if regime == "accelerated_svrg":
            if n is None:
                raise ValueError("accelerated_svrg regime needs the component count n")
            c = 5.0 * eta / (3.0 * n)
        else:
            c = eta
        if gamma_prev == mu:
            delta, gamma = math.sqrt(c * mu), mu
        else:
            b = c * (gamma_prev - mu)
            delta = 0.5 * (-b + math.sqrt(b * b + 4.0 * c * gamma_prev))
            gamma = (1.0 - delta) * gamma_prev + mu * delta

    if not 0.0 < delta < 1.0:
        raise ValueError(
            f"schedule weight delta={delta} outside (0, 1): step size "
            f"eta={eta} too large for regime {regime!r}"
        )
    return delta, gamma


@dataclass(frozen=True)
class StepPolicy:
    """One row of the benchmark step-size table.

    L is the global smoothness bound used by the sgd families, L_Q the
    sampling-dependent one used by the svrg families. stage1_epochs is the
    effective-pass budget of the constant stage for two-stage ("_decr")
    policies; 0 means decreasing steps from the start.
    """

    kind: str
    L: float
    L_Q: float
    mu: float
    n: int
    stage1_epochs: float = 0.0

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise ValueError(f"unknown policy kind {self.kind!r}")
        if self.mu <= 0:
            raise ValueError("mu must be positive (strongly convex case only)")
        if self.L <= 0 or self.L_Q <= 0:
            raise ValueError("smoothness constants must be positive")
        if self.n <= 0:
            raise ValueError("component count must be positive")

    @property
    def family(self) -> str:
        return _POLICY_TABLE[self.kind][0]

    @property
    def regime(self) -> str:
        return _POLICY_TABLE[self.kind][1]

    @property
    def two_stage(self) -> bool:
        return _POLICY_TABLE[self.kind][2]

    @property
    def batch_size(self) -> int:
        """Minibatch size; ceil(sqrt(L/mu)) for the minibatch policy, else 1."""
        if self.family == "acc_mb_sgd":
            return max(1, math.ceil(math.sqrt(self.L / self.mu)))
        return 1

    def base_step(self) -> float:
        """Largest step the policy ever produces (its constant-stage value)."""
        family = self.family
        if family in ("sgd", "acc_sgd", "acc_mb_sgd"):
            return 1.0 / self.L
        if family == "svrg":
            if self.kind == "svrg_const":
                return 1.0 / (12.0 * self.L_Q)
            return min(1.0 / (12.0 * self.L_Q), 1.0 / (5.0 * self.mu * self.n))
        return min(1.0 / (3.0 * self.L_Q), 1.0 / (15.0 * self.mu * self.n))

    def step_size(self, k: int, stage: str = "constant") -> float:
        """eta_k for iteration k >= 1 of the given stage."""
        base = self.base_step()
        if stage == "constant":
            return base
        if stage != "decreasing":
            raise ValueError(f"unknown stage {stage!r}")
        if not self.two_stage:
            raise ValueError(f"policy {self.kind!r} has no decreasing stage")
        if k < 1:
            raise ValueError("decreasing stage counts iterations from k = 1")
        family = self.family
        if family in ("sgd", "svrg"):
            return min(base, 2.0 / (self.mu * (k + 2.0)))
        if family in ("acc_sgd", "acc_mb_sgd"):
            return min(base, 4.0 / (self.mu * (k + 2.0) ** 2))
        return min(base, 12.0 * self.n / (5.0 * self.mu * (k + 2.0) ** 2))


@dataclass
class ScheduleState:
    """Snapshot of the weight sequences at iteration k."""

    k: int
    eta: float
    delta: float
    gamma: float
    gamma_prod: float
    tau: float
    regime: str


class Schedule:
    """Mutable per-run driver of the weight recursions.

    ``vr`` selects the averaging weight: variance-reduced estimators use
    tau_k = min(delta_k, 1/(5n)), plain stochastic gradients tau_k =
    delta_k.
    """

    def __init__(
        self,
        policy: StepPolicy,
        vr: bool,
        gamma0: float | None = None,
        stage: str = "constant",
    ):
        self.policy = policy
        self.regime = policy.regime
        self.vr = vr
        self.mu = policy.mu
        self.n = policy.n
        self.stage = stage
        self.k = 0
        self.gamma = policy.mu if gamma0 is None else float(gamma0)
        if self.gamma < self.mu:
            raise ValueError("gamma0 must be at least mu")
        self.gamma_prod = 1.0

    def advance(self) -> ScheduleState:
        self.k += 1
        eta = self.policy.step_size(self.k, self.stage)
        delta, gamma = solve_delta(self.regime, eta, self.gamma, self.mu, self.n)
        self.gamma = gamma
        self.gamma_prod *= 1.0 - delta
        tau = min(delta, 1.0 / (5.0 * self.n)) if self.vr else delta
        return ScheduleState(
            k=self.k,
            eta=eta,
            delta=delta,
            gamma=gamma,
            gamma_prod=self.gamma_prod,
            tau=tau,
            regime=self.regime,
        )

    def restart_decreasing(self) -> None:
        """Reset to k = 0 with gamma_0 = mu and switch to decreasing steps."""
        self.k = 0
        self.gamma = self.mu
        self.gamma_prod = 1.0
        self.stage = "decreasing"


class TwoStageController:
    """Fires exactly once, when the effective-pass counter reaches the
    constant-stage budget."""

    def __init__(self, stage1_epochs: float):
        if stage1_epochs < 0:
            raise ValueError("stage1_epochs must be nonnegative")
        self.stage1_epochs = stage1_epochs
        self.fired = False

    def should_restart(self, effective_passes: float) -> bool:
        if not self.fired and effective_passes >= self.stage1_epochs:
            self.fired = True
            return True
        return False


def gamma_product_closed_form(pattern: str, k: int, delta: float | None = None) -> float:
    """Closed form of Gamma_k = prod_{t<=k} (1 - delta_t) for test oracles.

    Patterns: "constant" (delta_t = delta), "harmonic" (delta_t = 2/(t+2)),
    "capped" (delta_t = min(2/(t+2), delta)).
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    if pattern == "constant":
        if delta is None:
            raise ValueError("constant pattern needs delta")
        return (1.0 - delta) ** k
    if pattern == "harmonic":
        return 2.0 / ((k + 1.0) * (k + 2.0))
    if pattern == "capped":
        if delta is None:
            raise ValueError("capped pattern needs delta")
        k0 = math.ceil(2.0 / delta - 2.0)
        if k < k0:
            return (1.0 - delta) ** k
        head = (1.0 - delta) ** (k0 - 1)
        return head * (k0 * (k0 + 1.0)) / ((k + 1.0) * (k + 2.0))
    raise ValueError(f"unknown pattern {pattern!r}")
