"""Relative-entropy bookkeeping and error functionals against the shifted
composite wave.

All integrals are trapezoid sums over the solver's cell centers, evaluated in
the pre-shift frame: the weight is ``a(xi - X)`` on the fixed grid.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .eos import pressure, relative_quantity
from .shift import WeightSpec, weight
from .solver import FieldState
from .waves import CompositeEval, Waves, composite_bundle


class IncompleteIngredientsError(ValueError):
    pass


def _trap(f, xi):
    return float(np.trapezoid(f, xi))


@dataclass
class EntropyReport:
    t: float
    eta_integral: float
    Y: float
    J_bad: float
    J_good: float
    Xdot: float = 0.0
    identity_residual: float = float("nan")
    terms: dict = field(default_factory=dict)

    @property
    def rhs(self) -> float:
        """Xdot * Y + J_bad - J_good."""
        return self.Xdot * self.Y + self.J_bad - self.J_good

    def negative_good_terms(self) -> list[str]:
        return [k for k in ("G1", "G2", "G3", "G", "GR") if self.terms.get(k, 0.0) < 0.0]


def source_terms(waves: Waves, c: CompositeEval):
    """Residual sources ``F1`` and ``F2`` the composite wave leaves in the
    momentum and stress equations."""
    model, es = waves.model, waves.end_states
    mu, tau = model.mu, model.tau
    r, s = c.raref, c.shock
    if r.u_xx is None or r.u_xt is None:
        raise IncompleteIngredientsError("rarefaction second derivatives are required")
    R = mu * r.u_x / r.v
    R_x = mu * (r.u_xx / r.v - r.u_x * r.v_x / r.v**2)
    R_t = mu * (r.u_xt / r.v - r.u_x * r.v_t / r.v**2)
    v_xi = r.v_x + s.v_xi
    F1 = (
        pressure(model, c.v, 1) * v_xi
        - pressure(model, r.v, 1) * r.v_x
        - pressure(model, s.v, 1) * s.v_xi
        - R_x
    )
    F2 = tau * R_t + (r.v - es.v_m) * s.pi + (s.v - es.v_m) * R
    return F1, F2


def entropy_report(
    state: FieldState,
    waves: Waves,
    spec: WeightSpec,
    X: float,
    Xdot: float,
    previous: EntropyReport | None = None,
) -> EntropyReport:
    """Weighted relative entropy and the terms of its time-derivative identity."""
    model, es = waves.model, waves.end_states
    mu, tau, sig = model.mu, model.tau, es.sigma
    xi = state.grid.centers
    t = state.t
    c = composite_bundle(waves, t, xi, X)
    s, r = c.shock, c.raref
    A, A_xi = weight(spec, xi - X, derivative=True)
    ev, eu, ep = state.v - c.v, state.u - c.u, state.pi - c.pi
    y = pressure(model, state.v) - pressure(model, c.v)
    Hrel = relative_quantity(model, "potential", state.v, c.v)
    prel = relative_quantity(model, "pressure", state.v, c.v)
    eta = 0.5 * eu**2 + Hrel + tau * ep**2 / (2.0 * mu)
    F1, F2 = source_terms(waves, c)
    dp_S = pressure(model, s.v, 1) * s.v_xi  # p(v_S)_xi

    T = {}
    T["Y1"] = _trap(A * s.u_xi / sig * y, xi)
    T["Y2"] = -_trap(A * dp_S * ev, xi)
    T["Y3"] = _trap(A * s.u_xi * (eu - y / sig), xi)
    T["Y4"] = -_trap(A * (pressure(model, c.v, 1) * s.v_xi - dp_S) * ev, xi)
    T["Y5"] = _trap(A * tau / mu * s.pi_xi * ep, xi)
    T["Y6"] = -_trap(A_xi * tau * ep**2 / (2.0 * mu), xi)
    T["Y7"] = -0.5 * _trap(A_xi * (eu - y / sig) * (eu + y / sig), xi)
    T["Y8"] = -_trap(A_xi * Hrel, xi) - 0.5 * _trap(A_xi * (y / sig) ** 2, xi)

    T["B1"] = _trap(A_xi * y**2, xi) / (2.0 * sig)
    T["B2"] = sig * _trap(A * s.v_xi * prel, xi)
    T["B3"] = -_trap(A_xi * ep * y, xi) / sig
    T["B4"] = -_trap(A * c.pi / mu * ep * ev, xi)
    T["B5"] = _trap(A_xi * ep**2, xi) / (2.0 * sig)
    T["S1"] = -_trap(A * eu * F1, xi)
    T["S2"] = -_trap(A * ep / mu * F2, xi)

    T["G1"] = 0.5 * sig * _trap(A_xi * (eu - y / sig + ep / sig) ** 2, xi)
    T["G2"] = sig * _trap(A_xi * Hrel, xi)
    T["G3"] = sig * tau / (2.0 * mu) * _trap(A_xi * ep**2, xi)
    T["G"] = _trap(A * state.v / mu * ep**2, xi)
    T["GR"] = _trap(A * r.u_x * prel, xi)

    Y = sum(T[f"Y{i}"] for i in range(1, 9))
    J_bad = sum(T[k] for k in ("B1", "B2", "B3", "B4", "B5", "S1", "S2"))
    J_good = sum(T[k] for k in ("G1", "G2", "G3", "G", "GR"))
    rep = EntropyReport(t, _trap(A * eta, xi), Y, J_bad, J_good, Xdot, terms=T)
    if previous is not None and t > previous.t:
        # backward difference of the integral against the trapezoid mean of the right side
        lhs = (rep.eta_integral - previous.eta_integral) / (t - previous.t)
        rep.identity_residual = abs(lhs - 0.5 * (rep.rhs + previous.rhs))
    return rep


@dataclass
class ErrorReport:
    t: float
    sup_error: float
    l2_v: float
    l2_u: float
    l2_pi: float
    g_S: float
    g_R: float
    g_Pi: float
    relaxation_gap: float

    def as_dict(self):
        return asdict(self)


def relaxation_gap(state: FieldState, mu: float) -> float:
    """Discrete L2 norm of ``Pi - mu u_xi / v`` over cells with a centered stencil."""
    dx = state.grid.dx
    ux = (state.u[2:] - state.u[:-2]) / (2.0 * dx)
    gap = state.pi[1:-1] - mu * ux / state.v[1:-1]
    return float(np.sqrt(np.trapezoid(gap**2, state.grid.centers[1:-1])))


def error_report(state: FieldState, waves: Waves, X: float) -> ErrorReport:
    model = waves.model
    xi = state.grid.centers
    c = composite_bundle(waves, state.t, xi, X)
    ev, eu, ep = state.v - c.v, state.u - c.u, state.pi - c.pi
    sup = float(max(np.max(np.abs(ev)), np.max(np.abs(eu)), np.max(np.abs(ep))))
    l2 = [float(np.sqrt(np.trapezoid(e**2, xi))) for e in (ev, eu, ep)]
    return ErrorReport(
        t=state.t,
        sup_error=sup,
        l2_v=l2[0],
        l2_u=l2[1],
        l2_pi=l2[2],
        g_S=_trap(c.shock.v_xi * ev**2, xi),
        g_R=_trap(c.raref.u_x * ev**2, xi),
        g_Pi=_trap(state.v / model.mu * ep**2, xi),
        relaxation_gap=relaxation_gap(state, model.mu),
    )


DIAGNOSTIC_COLUMNS = (
    "t,eta,Y,Jbad,Jgood,residual,supE,l2v,l2u,l2pi,gS,gR,gPi,relaxgap,X,Xdot".split(",")
)


def diagnostic_row(ent: EntropyReport, err: ErrorReport, X: float, Xdot: float) -> list[float]:
    return [
        ent.t,
        ent.eta_integral,
        ent.Y,
        ent.J_bad,
        ent.J_good,
        ent.identity_residual,
        err.sup_error,
        err.l2_v,
        err.l2_u,
        err.l2_pi,
        err.g_S,
        err.g_R,
        err.g_Pi,
        err.relaxation_gap,
        X,
        Xdot,
    ]
