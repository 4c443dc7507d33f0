"""Finite-volume solvers for the relaxed system in the co-moving frame

    v_t - s v_xi - u_xi = 0
    u_t - s u_xi + p(v)_xi = Pi_xi
    tau Pi_t - s tau Pi_xi + v Pi = mu u_xi

and for the classical Navier-Stokes limit (tau = 0).

The relaxed step is Strang split: the stiff part ``tau Pi_t = mu u_xi - v Pi``
leaves v and u untouched, so with v and u_xi frozen it integrates exactly.
The remaining transport part is advanced with MUSCL-minmod reconstruction,
Rusanov fluxes and two-stage SSP Runge-Kutta.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Literal

import numpy as np

from .eos import GasModel, pressure

NG = 2  # ghost layers


class SolverError(RuntimeError):
    """Numerical failure during a run."""

    def __init__(self, msg, step=None, t=None):
        if step is not None:
            msg = f"{msg} (step {step}, t={t:.6g})"
        super().__init__(msg)
        self.step, self.t = step, t


class PositivityError(SolverError):
    pass


class StallError(SolverError):
    pass


@dataclass(frozen=True)
class Grid:
    half_width: float
    cells: int

    def __post_init__(self):
        if self.cells < 16:
            raise ValueError("need at least 16 cells")
        if not self.half_width > 0.0:
            raise ValueError("half_width must be positive")

    @property
    def dx(self) -> float:
        return 2.0 * self.half_width / self.cells

    @property
    def centers(self) -> np.ndarray:
        # symmetric construction keeps xi_i = -xi_{N-1-i} exactly
        k = np.arange(self.cells) - 0.5 * (self.cells - 1)
        return k * self.dx

    def ghost_centers(self):
        dx, L = self.dx, self.half_width
        left = -L - dx * (np.arange(NG, 0, -1) - 0.5)
        right = L + dx * (np.arange(1, NG + 1) - 0.5)
        return left, right


@dataclass(eq=False)
class FieldState:
    t: float
    v: np.ndarray
    u: np.ndarray
    pi: np.ndarray
    grid: Grid

    def __post_init__(self):
        n = self.grid.cells
        for name in ("v", "u", "pi"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (n,):
                raise ValueError(f"{name} must have length {n}")
            setattr(self, name, arr)
        if self.t < 0.0:
            raise ValueError("t must be non-negative")
        if np.any(~(self.v > 0.0)):
            raise PositivityError("specific volume must be positive")

    def copy(self) -> "FieldState":
        return FieldState(self.t, self.v.copy(), self.u.copy(), self.pi.copy(), self.grid)

    def to_files(self, csv_path, model: GasModel, sigma: float, json_path=None):
        csv_path = Path(csv_path)
        json_path = Path(json_path) if json_path else csv_path.with_suffix(".json")
        data = np.column_stack([self.grid.centers, self.v, self.u, self.pi])
        np.savetxt(csv_path, data, delimiter=",", header="xi,v,u,pi", comments="", fmt="%.17g")
        meta = {
            "t": self.t,
            "sigma": sigma,
            "gamma": model.gamma,
            "mu": model.mu,
            "tau": model.tau,
            "N": self.grid.cells,
            "L": self.grid.half_width,
        }
        json_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
        return csv_path, json_path


@dataclass(frozen=True)
class SolverConfig:
    end_time: float
    cfl: float = 0.9
    scheme: Literal["relaxed_imex", "classical_reference"] = "relaxed_imex"
    boundary: Literal["farfield_dirichlet"] = "farfield_dirichlet"
    sigma: float = 0.0
    output_stride: int = 10
    max_dt: float | None = None
    min_dt: float = 1e-12
    max_steps: int = 50_000_000

    def __post_init__(self):
        if not 0.0 < self.cfl:
            raise ValueError("cfl must be positive")
        if self.end_time < 0.0:
            raise ValueError("end_time must be non-negative")
        if self.output_stride < 1:
            raise ValueError("output_stride must be >= 1")

    def validate_strict(self):
        """Production bounds: cfl in (0, 0.95] and end_time > 0."""
        if not 0.0 < self.cfl <= 0.95:
            raise ValueError(f"cfl must lie in (0, 0.95], got {self.cfl}")
        if not self.end_time > 0.0:
            raise ValueError("end_time must be positive")


# ---------------------------------------------------------------------------
# boundaries

Ghosts = tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]
Boundary = Callable[[float, float], Ghosts]


def static_boundary(state: FieldState) -> Boundary:
    """Ghost cells frozen at the outermost interior values."""
    g = tuple(
        np.full(NG, arr[idx]) for idx in (0, -1) for arr in (state.v, state.u, state.pi)
    )
    vl, ul, pl, vr, ur, pr = g

    def boundary(t, X=0.0):
        return vl, ul, pl, vr, ur, pr

    return boundary


def composite_boundary(waves, grid: Grid) -> Boundary:
    """Ghost cells pinned to the exact time-dependent composite wave."""
    from .waves import eval_composite

    left, right = grid.ghost_centers()
    xs = np.concatenate([left, right])

    def boundary(t, X=0.0):
        v, u, pi = eval_composite(waves, t, xs, X)
        return v[:NG], u[:NG], pi[:NG], v[NG:], u[NG:], pi[NG:]

    return boundary


def _extend(arr, gl, gr):
    return np.concatenate([gl, arr, gr])


# ---------------------------------------------------------------------------
# kernels


def characteristic_speeds(model: GasModel, v):
    """Eigenvalues ``(0, -c, +c)`` of the lab-frame relaxed system, ``c = sqrt(mu/tau - p'(v))``."""
    if model.tau <= 0.0:
        raise ValueError("tau = 0: speeds are unbounded; use the classical scheme")
    c = np.sqrt(model.mu / model.tau - pressure(model, v, 1))
    return np.zeros_like(c), -c, c


def stable_dt(model: GasModel, config: SolverConfig, state: FieldState) -> float:
    dx = state.grid.dx
    s = abs(config.sigma)
    if config.scheme == "relaxed_imex":
        _, _, c = characteristic_speeds(model, state.v)
        dt = config.cfl * dx / (np.max(c) + s)
    else:
        c = np.sqrt(-pressure(model, state.v, 1))
        dt_hyp = config.cfl * dx / (np.max(c) + s)
        dt_visc = 0.9 * dx**2 * np.min(state.v) / (2.0 * model.mu)
        dt = min(dt_hyp, dt_visc)
    if config.max_dt is not None:
        dt = min(dt, config.max_dt)
    return float(dt)


def _minmod(a, b):
    return np.where(a * b > 0.0, np.where(np.abs(a) < np.abs(b), a, b), 0.0)


def _faces(q):
    """Left/right MUSCL-minmod states at the N+1 interior-bounding interfaces
    from an array carrying NG ghost cells on each side."""
    d = np.diff(q)
    slope = _minmod(d[:-1], d[1:])  # for ext cells 1..N+2
    qc = q[1:-1]
    left = (qc + 0.5 * slope)[:-1]
    right = (qc - 0.5 * slope)[1:]
    return left, right


def _transport_rhs(model, sigma, v, u, pi, gl, gr, dx):
    """Semi-discrete RHS of the transport part plus the two boundary fluxes."""
    ve, ue, pe = _extend(v, gl[0], gr[0]), _extend(u, gl[1], gr[1]), _extend(pi, gl[2], gr[2])
    vL, vR = _faces(ve)
    uL, uR = _faces(ue)
    pL, pR = _faces(pe)
    if np.any(vL <= 0.0) or np.any(vR <= 0.0):
        raise PositivityError("reconstructed specific volume non-positive")
    pvL, pvR = pressure(model, vL), pressure(model, vR)
    cL = np.sqrt(-pressure(model, vL, 1))
    cR = np.sqrt(-pressure(model, vR, 1))
    a = np.abs(sigma) + np.maximum(cL, cR)
    f_v = 0.5 * ((-sigma * vL - uL) + (-sigma * vR - uR)) - 0.5 * a * (vR - vL)
    f_u = 0.5 * ((-sigma * uL + pvL - pL) + (-sigma * uR + pvR - pR)) - 0.5 * a * (uR - uL)
    f_p = 0.5 * (-sigma * pL - sigma * pR) - 0.5 * a * (pR - pL)
    rv = -(f_v[1:] - f_v[:-1]) / dx
    ru = -(f_u[1:] - f_u[:-1]) / dx
    rp = -(f_p[1:] - f_p[:-1]) / dx
    bflux = np.array([f_v[0], f_v[-1], f_u[0], f_u[-1]])
    return rv, ru, rp, bflux


def _central_ux(u, gl_u, gr_u, dx):
    ue = np.concatenate([gl_u[-1:], u, gr_u[:1]])
    return (ue[2:] - ue[:-2]) / (2.0 * dx)


def _equilibrium_pi(model, v, u, gl_u, gr_u, dx):
    return model.mu * _central_ux(u, gl_u, gr_u, dx) / v


def _relax(model, v, u, pi, ghosts, dx, h):
    """Exact solution over time h of tau Pi_t = mu u_xi - v Pi with v, u frozen."""
    pi_eq = _equilibrium_pi(model, v, u, ghosts[1], ghosts[4], dx)
    return pi_eq + (pi - pi_eq) * np.exp(-v * h / model.tau)


@dataclass
class StepInfo:
    dt: float
    # time-integrated boundary fluxes: [F_v(left), F_v(right), F_u(left), F_u(right)]
    boundary_flux: np.ndarray = field(default_factory=lambda: np.zeros(4))


def _split(g):
    return (g[0], g[1], g[2]), (g[3], g[4], g[5])


def _ssp2(model, sigma, v, u, pi, bc0, bc1, dx, dt, relaxed):
    """Two-stage SSP-RK of the transport part; with ``relaxed=False`` Pi is
    slaved to mu u_xi / v at each stage (classical viscous term)."""
    gl0, gr0 = _split(bc0)
    gl1, gr1 = _split(bc1)
    if not relaxed:
        # ghost stress stays at the prescribed far-field value
        pi = _equilibrium_pi(model, v, u, gl0[1], gr0[1], dx)
    rv, ru, rp, b0 = _transport_rhs(model, sigma, v, u, pi, gl0, gr0, dx)
    v1, u1, p1 = v + dt * rv, u + dt * ru, pi + dt * rp
    if np.any(v1 <= 0.0):
        raise PositivityError("specific volume non-positive after RK stage")
    if not relaxed:
        p1 = _equilibrium_pi(model, v1, u1, gl1[1], gr1[1], dx)
    rv, ru, rp, b1 = _transport_rhs(model, sigma, v1, u1, p1, gl1, gr1, dx)
    v2 = 0.5 * (v + v1 + dt * rv)
    u2 = 0.5 * (u + u1 + dt * ru)
    p2 = 0.5 * (pi + p1 + dt * rp)
    return v2, u2, p2, 0.5 * dt * (b0 + b1)


def step_relaxed(
    state: FieldState,
    model: GasModel,
    config: SolverConfig,
    boundary: Boundary,
    dt: float | None = None,
    X0: float = 0.0,
    X1: float | None = None,
) -> tuple[FieldState, StepInfo]:
    """One Strang-split step: half relaxation, transport, half relaxation."""
    if model.tau <= 0.0:
        raise ValueError("relaxed step requires tau > 0")
    if dt is None:
        dt = stable_dt(model, config, state)
    X1 = X0 if X1 is None else X1
    dx, t = state.grid.dx, state.t
    bc0 = boundary(t, X0)
    bc1 = boundary(t + dt, X1)
    pi = _relax(model, state.v, state.u, state.pi, bc0, dx, 0.5 * dt)
    v, u, pi, bflux = _ssp2(model, config.sigma, state.v, state.u, pi, bc0, bc1, dx, dt, True)
    pi = _relax(model, v, u, pi, bc1, dx, 0.5 * dt)
    _check_positive(v, dt)
    return FieldState(t + dt, v, u, pi, state.grid), StepInfo(dt, bflux)


def step_classical(
    state: FieldState,
    model: GasModel,
    config: SolverConfig,
    boundary: Boundary,
    dt: float | None = None,
    X0: float = 0.0,
    X1: float | None = None,
) -> tuple[FieldState, StepInfo]:
    """One SSP-RK2 step of the tau = 0 system; the stress is slaved to
    ``mu u_xi / v`` (central differences) and enters through the same
    interface fluxes as in the relaxed scheme."""
    if dt is None:
        dt = stable_dt(model, config, state)
    X1 = X0 if X1 is None else X1
    dx, t = state.grid.dx, state.t
    bc0 = boundary(t, X0)
    bc1 = boundary(t + dt, X1)
    v, u, _, bflux = _ssp2(model, config.sigma, state.v, state.u, state.pi, bc0, bc1, dx, dt, False)
    _check_positive(v, dt)
    pi = _equilibrium_pi(model, v, u, bc1[1], bc1[4], dx)
    return FieldState(t + dt, v, u, pi, state.grid), StepInfo(dt, bflux)


def _check_positive(v, dt):
    bad = np.flatnonzero(~(v > 0.0))
    if bad.size:
        raise PositivityError(f"v <= 0 in cell {bad[0]} with dt={dt:.3e}")


# ---------------------------------------------------------------------------
# driver


@dataclass
class RunResult:
    final: FieldState
    samples: list = field(default_factory=list)
    steps: int = 0
    X: float = 0.0
    shift_history: list = field(default_factory=list)  # (t, X, Xdot)


def run(
    initial: FieldState,
    model: GasModel,
    config: SolverConfig,
    boundary: Boundary,
    shift_coupling=None,
    sampler=None,
) -> RunResult:
    """Advance ``initial`` to ``config.end_time``.

    ``shift_coupling`` (see :class:`relaxcns.shift.ShiftCoupling`) is updated
    once per step with a Heun predictor/corrector; ``sampler(state, X, Xdot,
    step)`` is called at step 0, every ``output_stride`` steps and at the end.
    """
    stepper = step_relaxed if config.scheme == "relaxed_imex" else step_classical
    state = initial.copy()
    res = RunResult(final=state)
    X, Xdot = 0.0, 0.0
    if shift_coupling is not None:
        X = shift_coupling.state.X
        Xdot = shift_coupling.rate(state, X)
        shift_coupling.record(state.t, Xdot)
    res.shift_history.append((state.t, X, Xdot))
    if sampler is not None:
        res.samples.append(sampler(state, X, Xdot, 0))
    step = 0
    T = config.end_time
    while state.t < T * (1.0 - 1e-14):
        if step >= config.max_steps:
            raise StallError("max_steps exceeded", step, state.t)
        dt = min(stable_dt(model, config, state), T - state.t)
        if dt < config.min_dt and T - state.t > config.min_dt:
            raise StallError(f"time step underflow dt={dt:.3e}", step, state.t)
        try:
            if shift_coupling is None:
                state, _ = stepper(state, model, config, boundary, dt=dt, X0=X, X1=X)
            else:
                Xpred = X + dt * Xdot
                state, _ = stepper(state, model, config, boundary, dt=dt, X0=X, X1=Xpred)
                rate_pred = shift_coupling.rate(state, Xpred)
                X, Xdot = shift_coupling.advance(Xdot, rate_pred, dt)
                # rate at the accepted (t^{n+1}, X^{n+1}) seeds the next predictor
                Xdot = shift_coupling.rate(state, X)
                shift_coupling.record(state.t, Xdot)
        except SolverError as exc:
            raise type(exc)(str(exc), step, state.t) from exc
        step += 1
        res.shift_history.append((state.t, X, Xdot))
        done = not state.t < T * (1.0 - 1e-14)
        if sampler is not None and (step % config.output_stride == 0 or done):
            res.samples.append(sampler(state, X, Xdot, step))
    res.final, res.steps, res.X = state, step, X
    return res


def with_sigma(config: SolverConfig, sigma: float) -> SolverConfig:
    return replace(config, sigma=sigma)
