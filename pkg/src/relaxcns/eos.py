"""Gamma-law constitutive functions in Lagrangian variables.

Pressure is ``p(v) = v**(-gamma)`` (pressure coefficient fixed to 1) and the
potential energy is ``H(v) = v**(1-gamma) / (gamma-1)`` so that ``H' = -p``.
All functions accept scalars or numpy arrays.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DomainError(ValueError):
    """Raised when a constitutive function is evaluated outside v > 0."""


@dataclass(frozen=True)
class GasModel:
    gamma: float = 2.0
    mu: float = 1.0
    tau: float = 0.01

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ValueError(f"gamma must exceed 1, got {self.gamma}")
        if not self.mu > 0.0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if not self.tau >= 0.0:
            raise ValueError(f"tau must be non-negative, got {self.tau}")

    def with_tau(self, tau: float) -> "GasModel":
        return GasModel(self.gamma, self.mu, tau)


def _check_positive(v, name="v"):
    arr = np.asarray(v, dtype=float)
    if np.any(~(arr > 0.0)):
        raise DomainError(f"{name} must be positive (min={np.min(arr)!r})")
    return arr


def pressure(model: GasModel, v, order: int = 0):
    """``d^order/dv^order`` of ``v**(-gamma)`` for order 0..3."""
    if order not in (0, 1, 2, 3):
        raise ValueError(f"unsupported derivative order {order}; 0..3 allowed")
    v = _check_positive(v)
    g = model.gamma
    coef = 1.0
    for k in range(order):
        coef *= -(g + k)
    out = coef * v ** (-g - order)
    return out if out.ndim else float(out)


def potential(model: GasModel, v):
    v = _check_positive(v)
    out = v ** (1.0 - model.gamma) / (model.gamma - 1.0)
    return out if out.ndim else float(out)


def relative_quantity(model: GasModel, which: str, v, w):
    """Bregman gap ``F(v|w) = F(v) - F(w) - F'(w)(v-w)`` for F = p or H."""
    v = _check_positive(v, "v")
    w = _check_positive(w, "w")
    if which == "pressure":
        out = pressure(model, v) - pressure(model, w) - pressure(model, w, 1) * (v - w)
    elif which == "potential":
        # H'(w) = -p(w)
        out = potential(model, v) - potential(model, w) + pressure(model, w) * (v - w)
    else:
        raise ValueError(f"unknown relative quantity {which!r}")
    out = np.asarray(out)
    return out if out.ndim else float(out)


def lambda1(model: GasModel, v):
    v = _check_positive(v)
    out = -np.sqrt(model.gamma) * v ** (-(model.gamma + 1.0) / 2.0)
    return out if out.ndim else float(out)


def lambda1_inverse(model: GasModel, w):
    """Solve ``lambda1(v) = w`` for v; requires w < 0."""
    w = np.asarray(w, dtype=float)
    if np.any(~(w < 0.0)):
        raise DomainError("lambda1 is negative; its inverse needs w < 0")
    out = (model.gamma / w**2) ** (1.0 / (model.gamma + 1.0))
    return out if out.ndim else float(out)


def z1(model: GasModel, v, u):
    """1-Riemann invariant ``u + int^v lambda1`` with zero integration constant."""
    v = _check_positive(v)
    g = model.gamma
    out = np.asarray(u, dtype=float) + 2.0 * np.sqrt(g) / (g - 1.0) * v ** (-(g - 1.0) / 2.0)
    return out if out.ndim else float(out)


def characteristic_data(model: GasModel, v, u):
    """Return ``(lambda1, lambda2, z1)`` of the p-system at (v, u)."""
    l1 = lambda1(model, v)
    return l1, -l1, z1(model, v, u)
