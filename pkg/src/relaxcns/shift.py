"""Weight function and the a-contraction shift ODE."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .eos import GasModel, pressure
from .waves import ShockProfile, Waves, composite_bundle, eval_shock


class ShiftAccuracyWarning(UserWarning):
    """The grid under-resolves the shock transition used by the shift quadrature."""


@dataclass(frozen=True, eq=False)
class WeightSpec:
    lambda_amp: float
    shock: ShockProfile
    delta_S: float

    def __post_init__(self):
        if not (self.delta_S < self.lambda_amp <= np.sqrt(self.delta_S)):
            raise ValueError(
                f"need delta_S < lambda <= sqrt(delta_S); got lambda={self.lambda_amp}, "
                f"delta_S={self.delta_S}"
            )

    @classmethod
    def default(cls, shock: ShockProfile, lambda_amp: float | None = None) -> "WeightSpec":
        d = shock.end_states.delta_S
        return cls(np.sqrt(d) if lambda_amp is None else lambda_amp, shock, d)


def weight(spec: WeightSpec, xi, derivative: bool = False):
    """``a(xi) = 1 + lambda/delta_S (p(v_m) - p(v_S(xi)))``; optionally also a'."""
    s = eval_shock(spec.shock, xi)
    model, es = spec.shock.model, spec.shock.end_states
    k = spec.lambda_amp / spec.delta_S
    a = 1.0 + k * (pressure(model, es.v_m) - pressure(model, s.v))
    if not derivative:
        return a
    return a, -k * pressure(model, s.v, 1) * s.v_xi


def drift_constant(model: GasModel, v_m: float) -> float:
    """M = 5(gamma+1) sigma_m^3 / (8 gamma p(v_m)), sigma_m = sqrt(-p'(v_m))."""
    g = model.gamma
    sm = np.sqrt(-pressure(model, v_m, 1))
    return 5.0 * (g + 1.0) * sm**3 / (8.0 * g * pressure(model, v_m))


@dataclass(frozen=True)
class ShiftState:
    X: float = 0.0
    Xdot: float = 0.0
    M: float = 0.0


def initial_shift(model: GasModel, v_m: float) -> ShiftState:
    return ShiftState(0.0, 0.0, drift_constant(model, v_m))


def advance(shift: ShiftState, Xdot_now: float, dt: float, Xdot_pred: float | None = None) -> ShiftState:
    """Heun update; without a predictor rate the step is exact for constant rates."""
    second = Xdot_now if Xdot_pred is None else Xdot_pred
    X = shift.X + 0.5 * dt * (Xdot_now + second)
    return replace(shift, X=X, Xdot=second)


def resolution_cells(shock: ShockProfile, dx: float) -> float:
    """Cells across the shock transition (sum of the two tail lengths)."""
    return (1.0 / abs(shock.rate_left) + 1.0 / abs(shock.rate_right)) / dx


def shift_integrals(v, xi, waves: Waves, spec: WeightSpec, X: float, t: float, bundle=None):
    """The two quadratures of the shift ODE (the ``Y1`` and ``Y2`` functionals)."""
    model, es = waves.model, waves.end_states
    c = composite_bundle(waves, t, xi, X) if bundle is None else bundle
    a = weight(spec, xi - X)
    s = c.shock
    dp = pressure(model, v) - pressure(model, c.v)
    y1 = np.trapezoid(a / es.sigma * s.u_xi * dp, xi)
    y2 = -np.trapezoid(a * pressure(model, s.v, 1) * s.v_xi * (v - c.v), xi)
    return y1, y2


def shift_rate(state, waves: Waves, spec: WeightSpec, shift: ShiftState, t: float | None = None, bundle=None) -> float:
    """Right-hand side of the shift ODE for the field ``state`` at shift ``shift.X``."""
    t = state.t if t is None else t
    xi = state.grid.centers
    if resolution_cells(spec.shock, state.grid.dx) < 8.0:
        warnings.warn(
            f"only {resolution_cells(spec.shock, state.grid.dx):.1f} cells across the shock",
            ShiftAccuracyWarning,
            stacklevel=2,
        )
    y1, y2 = shift_integrals(state.v, xi, waves, spec, shift.X, t, bundle)
    return float(-shift.M / spec.delta_S * (y1 + y2))


@dataclass
class ShiftCoupling:
    """Owns the shift state of one run; called by :func:`relaxcns.solver.run`."""

    waves: Waves
    spec: WeightSpec
    state: ShiftState
    frozen_rate: float | None = None  # testing hook: impose a constant rate
    history: list = field(default_factory=list)
    under_resolved: bool = False

    @classmethod
    def create(cls, waves: Waves, lambda_amp: float | None = None) -> "ShiftCoupling":
        spec = WeightSpec.default(waves.shock, lambda_amp)
        return cls(waves, spec, initial_shift(waves.model, waves.end_states.v_m))

    def rate(self, state, X: float) -> float:
        if self.frozen_rate is not None:
            return self.frozen_rate
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", ShiftAccuracyWarning)
            r = shift_rate(state, self.waves, self.spec, replace(self.state, X=X))
        if caught:
            self.under_resolved = True
        return r

    def advance(self, Xdot_now: float, Xdot_pred: float, dt: float):
        self.state = advance(self.state, Xdot_now, dt, Xdot_pred)
        return self.state.X, self.state.Xdot

    def record(self, t: float, Xdot: float):
        self.state = replace(self.state, Xdot=Xdot)
        self.history.append((t, self.state.X, Xdot))
