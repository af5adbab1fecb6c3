"""Proximal operators for the nonsmooth term of a composite objective.

Supported regularizers: none, a weighted l1 norm, and the indicator of a
coordinatewise box. All operators are stateless and act coordinatewise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Regularizer", "prox", "regularizer_value"]


@dataclass(frozen=True)
class Regularizer:
    """Specification of the nonsmooth term.

    kind is one of "none", "l1", "box". For l1, ``weight`` is the
    nonnegative multiplier of the norm. For box, ``lower`` and ``upper``
    are broadcastable coordinatewise bounds with lower <= upper.
    """

    kind: str = "none"
    weight: float = 0.0
    lower: np.ndarray | float | None = None
    upper: np.ndarray | float | None = None

    def __post_init__(self):
        if self.kind not in ("none", "l1", "box"):
            raise ValueError(f"unknown regularizer kind {self.kind!r}")
        if self.kind == "l1":
            if not np.isfinite(self.weight) or self.weight < 0:
                raise ValueError("l1 weight must be finite and nonnegative")
        if self.kind == "box":
            lo, hi = np.asarray(self.lower), np.asarray(self.upper)
            if np.any(lo > hi):
                raise ValueError("box bounds require lower <= upper")

    @staticmethod
    def none() -> "Regularizer":
        return Regularizer("none")

    @staticmethod
    def l1(weight: float) -> "Regularizer":
        return Regularizer("l1", weight=float(weight))

    @staticmethod
    def box(lower, upper) -> "Regularizer":
        return Regularizer("box", lower=lower, upper=upper)


def prox(reg: Regularizer, eta: float, u: np.ndarray) -> np.ndarray:
    """Proximal map of eta * reg at u: argmin_x eta*psi(x) + 0.5*||x - u||^2.

    For "none" this is the identity, for "l1" coordinatewise
    soft-thresholding, for "box" coordinatewise clamping. Ties
    |u_j| == eta*weight map to exactly 0.
    """
    if not eta > 0:
        raise ValueError(f"prox step must be positive, got eta={eta}")
    u = np.asarray(u, dtype=np.float64)
    if reg.kind == "none":
        return u.copy()
    if reg.kind == "l1":
        shift = eta * reg.weight
        return np.sign(u) * np.maximum(np.abs(u) - shift, 0.0)
    # box
    return np.clip(u, reg.lower, reg.upper)


def regularizer_value(reg: Regularizer, x: np.ndarray) -> float:
    """Value of the nonsmooth term at x; +inf outside a box indicator."""
    x = np.asarray(x, dtype=np.float64)
    if reg.kind == "none":
        return 0.0
    if reg.kind == "l1":
        return float(reg.weight * np.sum(np.abs(x)))
    inside = np.all(x >= reg.lower) and np.all(x <= reg.upper)
    return 0.0 if inside else float("inf")
