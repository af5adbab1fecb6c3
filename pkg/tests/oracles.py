"""Independent reference computations used to freeze expected test values.

Nothing here touches the library's solver or estimator code paths: the
point is that every derived expectation comes from a second route
(finite differences, dense Newton, exhaustive enumeration, scalar
minimization).
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy.optimize import minimize_scalar

import vrprox as vp


def finite_difference_gradient(fun, x, h=1e-6):
    x = np.asarray(x, dtype=np.float64)
    g = np.zeros_like(x)
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        g[j] = (fun(x + e) - fun(x - e)) / (2 * h)
    return g


def newton_solve(problem, tol=1e-14, iters=200):
    """Dense Newton on the smooth ridge objective (no nonsmooth term)."""
    A = problem.dataset.features
    b = problem.dataset.labels
    n, p = A.shape
    x = np.zeros(p)
    for _ in range(iters):
        m = A @ x
        if problem.loss.kind == "logistic":
            s = 1.0 / (1.0 + np.exp(b * m))
            g = A.T @ (-b * s) / n + problem.l2 * x
            w = s * (1.0 - s)
            H = (A.T * w) @ A / n + problem.l2 * np.eye(p)
        else:
            g = A.T @ (m - b) / n + problem.l2 * x
            H = A.T @ A / n + problem.l2 * np.eye(p)
        x = x - np.linalg.solve(H, g)
        if np.linalg.norm(g) < tol:
            break
    return x


def ridge_closed_form(problem):
    """Exact minimizer of the squared-loss ridge objective."""
    A = problem.dataset.features
    b = problem.dataset.labels
    n, p = A.shape
    return np.linalg.solve(A.T @ A / n + problem.l2 * np.eye(p), A.T @ b / n)


def prox_scalar_oracle(weight, eta, u, tol=1e-12):
    """1-D numerical minimizer of eta*w*|x| + 0.5*(x-u)^2."""
    lo = u - eta * weight - 1.0
    hi = u + eta * weight + 1.0
    res = minimize_scalar(
        lambda t: eta * weight * abs(t) + 0.5 * (t - u) ** 2,
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": tol},
    )
    return float(res.x)


def enumerate_dropout_gradient(problem, i, x, rate):
    """Exact marginalized perturbed gradient by summing over all 2^p masks."""
    p = problem.p
    row = problem.dataset.features[i]
    label = problem.dataset.labels[i]
    total = np.zeros(p)
    for bits in itertools.product((0.0, 1.0), repeat=p):
        mask = np.array(bits)
        prob_mask = np.prod(np.where(mask == 0.0, rate, 1.0 - rate))
        masked = row * mask
        z = float(masked @ x)
        if problem.loss.kind == "logistic":
            slope = -label / (1.0 + np.exp(label * z))
        else:
            slope = z - label
        total += prob_mask * (slope * masked)
    return total + problem.l2 * x


def enumerate_dropout_loss(problem, i, x, rate):
    """Exact marginalized per-component loss over all 2^p masks."""
    row = problem.dataset.features[i]
    label = problem.dataset.labels[i]
    total = 0.0
    for bits in itertools.product((0.0, 1.0), repeat=problem.p):
        mask = np.array(bits)
        prob_mask = np.prod(np.where(mask == 0.0, rate, 1.0 - rate))
        z = float((row * mask) @ x)
        if problem.loss.kind == "logistic":
            loss = np.logaddexp(0.0, -label * z)
        else:
            loss = 0.5 * (z - label) ** 2
        total += prob_mask * loss
    return total + 0.5 * problem.l2 * float(x @ x)


def exhaustive_expectation(estimator, x):
    """Q-weighted average of the estimate over every possible index draw."""
    acc = np.zeros(estimator.problem.p)
    for i in range(estimator.problem.n):
        acc += estimator.dist.q[i] * estimator.estimate_for_index(x, i)
    return acc


def small_problem(n=5, p=4, loss="logistic", l2=0.05, seed=11, mu=None, reg=None):
    ds = vp.generate_synthetic(vp.SyntheticSpec(n=n, p=p, label_noise=0.2, seed=seed))
    return vp.Problem(
        dataset=ds,
        loss=vp.LossSpec(loss, n),
        l2=l2,
        regularizer=reg or vp.Regularizer.none(),
        mu=mu,
    )
