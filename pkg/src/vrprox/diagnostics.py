"""Optimality certification and rate measurement.

The duality gap pairs the primal objective with a dual value built from the
per-example loss derivatives: with margins m_i = a_i.x and candidate
alpha_i = loss_i'(m_i), the dual objective is

    D(alpha) = -(1/n) sum_i conj_i(alpha_i) - (1/(2*l2)) * penalty(v),
    v = (1/n) sum_i alpha_i a_i,

where conj_i is the per-example convex conjugate (binary-entropy form for
logistic, quadratic for squared loss). Without an l1 term the penalty is
||v||^2; with weight w it is sum_j max(|v_j| - w, 0)^2, which keeps the
bound exact for the composite optimum. Weak duality gives
F(x) - D(alpha) >= 0 for every x, and the gap upper-bounds F(x) - F*.
"""

from __future__ import annotations

import numpy as np

from .problem import Problem, evaluate_objective
from .trace import SolverTrace

__all__ = ["duality_gap", "fit_linear_rate"]


def _xlogx(s: np.ndarray) -> np.ndarray:
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = s[pos] * np.log(s[pos])
    return out


def duality_gap(problem: Problem, x: np.ndarray) -> float:
    """Fenchel duality gap of the (unperturbed) objective at x.

    Requires a ridge-regularized smooth part (l2 > 0) and a regularizer
    that is either absent or a weighted l1 norm.
    """
    if problem.l2 <= 0:
        raise ValueError("duality gap needs a ridge-regularized smooth part (l2 > 0)")
    reg = problem.regularizer
    if reg.kind not in ("none", "l1"):
        raise ValueError(f"duality gap not defined for regularizer kind {reg.kind!r}")
    x = np.asarray(x, dtype=np.float64)
    feats = problem.dataset.features
    labels = problem.dataset.labels
    margins = feats @ x

    if problem.loss.kind == "logistic":
        # alpha_i = -b_i * s_i with s_i = sigmoid(-b_i m_i); the conjugate is
        # the negative binary entropy of s_i.
        s = 1.0 / (1.0 + np.exp(labels * margins))
        alpha = -labels * s
        conj = _xlogx(s) + _xlogx(1.0 - s)
    else:
        alpha = margins - labels
        conj = 0.5 * alpha**2 + alpha * labels

    v = feats.T @ alpha / problem.n
    if reg.kind == "l1":
        shrunk = np.maximum(np.abs(v) - reg.weight, 0.0)
        penalty = float(shrunk @ shrunk)
    else:
        penalty = float(v @ v)
    dual = -float(np.mean(conj)) - penalty / (2.0 * problem.l2)
    return evaluate_objective(problem, x) - dual


def fit_linear_rate(
    trace: SolverTrace | None,
    fstar: float,
    window: tuple[int, int] | None = None,
    ks: np.ndarray | None = None,
    objectives: np.ndarray | None = None,
) -> float:
    """Per-iteration contraction factor fitted on log(F(x_k) - fstar).

    Accepts either a trace (with an optional ``window`` of row indices) or
    raw (ks, objectives) arrays. The suboptimality must be strictly
    positive over the window.
    """
    if trace is not None:
        ks = trace.column("k")
        objectives = trace.column("objective")
    if ks is None or objectives is None:
        raise ValueError("need a trace or explicit (ks, objectives)")
    ks = np.asarray(ks, dtype=np.float64)
    objectives = np.asarray(objectives, dtype=np.float64)
    if window is not None:
        lo, hi = window
        ks, objectives = ks[lo:hi], objectives[lo:hi]
    if ks.size < 2:
        raise ValueError("rate fit needs at least two rows")
    gaps = objectives - fstar
    if np.any(~np.isfinite(gaps)) or np.any(gaps <= 0):
        raise ValueError("suboptimality must be positive and finite over the window")
    slope = np.polyfit(ks, np.log(gaps), 1)[0]
    return float(np.exp(slope))
