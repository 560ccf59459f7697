"""Approximation-ratio lower bounds for the resilient selection."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InputError

# h uses 1/(1+beta), which is what the proofs need; some statements of the
# result print 1/(1+alpha) instead.
H_CONVENTION = "max(1/(1+beta), 1/(alpha-beta))"


@dataclass(frozen=True)
class BoundInputs:
    alpha: int
    beta: int
    kappa: float | None = None
    c_total: float | None = None

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise InputError("ranks must be non-negative")
        for name in ("kappa", "c_total"):
            v = getattr(self, name)
            if v is not None:
                _unit(v, name)


def _unit(x: float, name: str) -> float:
    if not (0.0 <= x <= 1.0) or math.isnan(x):
        raise InputError(f"{name} must lie in [0, 1], got {x}")
    return float(x)


def h(alpha: int, beta: int) -> float:
    if alpha < 1:
        raise InputError(f"alpha must be >= 1, got {alpha}")
    if beta < 0:
        raise InputError(f"beta must be >= 0, got {beta}")
    if beta >= alpha:
        return 0.0
    return max(1.0 / (1 + beta), 1.0 / (alpha - beta))


def greedy_factor(kappa: float) -> float:
    """(1 - exp(-kappa)) / kappa, continuous at kappa = 0."""
    kappa = _unit(kappa, "kappa")
    if kappa < 1e-6:
        return 1.0 - kappa / 2 + kappa * kappa / 6
    return -math.expm1(-kappa) / kappa


def bound_submodular_uniform(kappa: float, alpha: int, beta: int) -> float:
    kappa = _unit(kappa, "kappa")
    return max(1.0 - kappa, h(alpha, beta)) * greedy_factor(kappa)


def bound_submodular_matroid(kappa: float, alpha: int, beta: int) -> float:
    kappa = _unit(kappa, "kappa")
    return max(1.0 - kappa, h(alpha, beta)) / (1.0 + kappa)


def bound_monotone(c_total: float) -> float:
    c = _unit(c_total, "c_total")
    return (1.0 - c) ** 3


def all_bounds(b: BoundInputs) -> dict:
    out: dict = {"alpha": b.alpha, "beta": b.beta, "h_convention": H_CONVENTION}
    if b.alpha >= 1:
        out["h"] = h(b.alpha, b.beta)
    if b.kappa is not None and b.alpha >= 1:
        out["submodular_uniform"] = bound_submodular_uniform(b.kappa, b.alpha, b.beta)
        out["submodular_matroid"] = bound_submodular_matroid(b.kappa, b.alpha, b.beta)
    if b.c_total is not None:
        out["monotone"] = bound_monotone(b.c_total)
    return out
