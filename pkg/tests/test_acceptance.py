"""Frozen desk-scale acceptance checks; each prints one PASS/FAIL line."""

import math
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from relaxcns.eos import GasModel, pressure
from relaxcns.harness import load_config, run_entropy_check, run_relax_sweep
from relaxcns.shift import ShiftState, WeightSpec, drift_constant, shift_rate, weight
from relaxcns.solver import FieldState, Grid, SolverConfig, composite_boundary, run, static_boundary, step_relaxed
from relaxcns.waves import (
    build_end_states,
    build_rarefaction,
    build_waves,
    burgers_w,
    eval_composite,
    eval_rarefaction,
    eval_shock,
    solve_shock_profile,
)

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
M = GasModel(gamma=2.0, mu=1.0, tau=0.01)


def _report(capsys, n: int, title: str, checks: dict, extra: str = ""):
    ok = all(checks.values())
    failed = [k for k, v in checks.items() if not v]
    line = f"[criterion {n}] {'PASS' if ok else 'FAIL'} {title}"
    line += f" | failed: {', '.join(failed)}" if failed else ""
    line += f" | {extra}" if extra else ""
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


def test_criterion_1_shock_profile(capsys):
    t0 = time.perf_counter()
    es = build_end_states(M, 1.2, 0.0, 1.0, 0.9)
    prof = solve_shock_profile(M, es)
    s = es.sigma
    v = prof.v_nodes
    v_xi = prof.interpolant.derivative()(prof.nodes)
    u_xi = -s * v_xi
    pi = -(s**2 * (es.v_m - v) + pressure(M, es.v_m) - pressure(M, v))
    pi_xi = (s**2 + pressure(M, v, 1)) * v_xi
    residual = np.max(np.abs([
        -s * v_xi - u_xi,
        -s * u_xi + pressure(M, v, 1) * v_xi - pi_xi,
        -s * M.tau * pi_xi + v * pi - M.mu * u_xi,
    ]))
    alg = max(
        np.max(np.abs(s * v + prof.u_nodes - s * es.v_m - es.u_m)),
        np.max(np.abs(prof.pi_nodes + s * (prof.u_nodes - es.u_m) - pressure(M, v) + pressure(M, es.v_m))),
    )
    monotone = bool(np.all(np.diff(v) > 0.0) and np.all(np.diff(prof.u_nodes) < 0.0))
    elapsed = time.perf_counter() - t0

    m0 = M.with_tau(0.0)
    es0 = build_end_states(m0, 1.2, 0.0, 1.0, 0.9)
    prof0 = solve_shock_profile(m0, es0)
    s0 = es0.sigma

    def rhs(_, y):
        h = s0**2 * (es0.v_m - y[0]) + pressure(m0, es0.v_m) - pressure(m0, y[0])
        return [y[0] * h / (m0.mu * s0)]

    errs = []
    for span in ((0.0, 30.0), (0.0, -30.0)):
        xs = np.linspace(*span, 301)
        ref = solve_ivp(rhs, span, [1.1], method="Radau", t_eval=xs, rtol=1e-12, atol=1e-14)
        errs.append(np.max(np.abs(ref.y[0] - eval_shock(prof0, xs).v)))
    classical = max(errs)
    checks = {
        "system residual < 1e-8": residual < 1e-8,
        "algebraic relations < 1e-10": alg < 1e-10,
        "monotone": monotone,
        "tau=0 vs reference ODE < 1e-6": classical < 1e-6,
        "runtime < 1 s": elapsed < 1.0,
    }
    _report(capsys, 1, "shock profile", checks,
            f"residual={residual:.2e} alg={alg:.2e} tau0_err={classical:.2e} time={elapsed:.3f}s")


def test_criterion_2_rarefaction(capsys):
    t0 = time.perf_counter()
    es = build_end_states(M, 1.2, 0.0, 1.0, 0.9)
    r = build_rarefaction(M, es, eps=0.5)
    x = np.linspace(-5, 5, 41)
    t = 1.0

    def residual(d):
        ev = lambda tt, xx: eval_rarefaction(r, tt, xx)  # noqa: E731
        vt = (ev(t + d, x).v - ev(t - d, x).v) / (2 * d)
        ut = (ev(t + d, x).u - ev(t - d, x).u) / (2 * d)
        ux = (ev(t, x + d).u - ev(t, x - d).u) / (2 * d)
        px = (pressure(M, ev(t, x + d).v) - pressure(M, ev(t, x - d).v)) / (2 * d)
        return max(np.max(np.abs(vt - ux)), np.max(np.abs(ut + px)))

    res = np.array([residual(d) for d in (1e-2, 5e-3, 2.5e-3)])
    orders = np.log2(res[:-1] / res[1:])

    rd = build_rarefaction(M, es, eps=0.1)
    rng = np.random.default_rng(2024)
    ts = np.round(rng.uniform(0, 200, 10_000), 0)
    xs = rng.uniform(-500, 500, 10_000)
    bounds = True
    for tt in np.unique(ts):
        w, w_x = burgers_w(rd, float(tt), xs[ts == tt])
        bounds &= bool(np.all((rd.w_minus < w) & (w < rd.w_m)) and np.all(w_x > 0.0))
    elapsed = time.perf_counter() - t0
    checks = {
        "second-order FD residual decay": bool(np.all(orders > 1.8)),
        "w- < w < wm and w_x > 0 at 1e4 points": bounds,
        "runtime < 5 s": elapsed < 5.0,
    }
    _report(capsys, 2, "rarefaction", checks,
            f"residuals={np.array2string(res, precision=2)} orders={np.array2string(orders, precision=2)} "
            f"time={elapsed:.2f}s")


def test_criterion_3_solver_sanity(capsys):
    t0 = time.perf_counter()
    waves = build_waves(M, 1.2, 0.0, 1.0, 0.9, eps=0.1)
    sigma = waves.end_states.sigma

    def initial(N):
        g = Grid(100.0, N)
        v, u, pi = eval_composite(waves, 0.0, g.centers, 0.0)
        b = 0.01 * np.exp(-((g.centers / 10.0) ** 2))
        return FieldState(0.0, v + b, u - math.sqrt(2.0) * b, pi, g)

    s = initial(4096)
    cfg = SolverConfig(end_time=1.0, sigma=sigma)
    bc = composite_boundary(waves, s.grid)
    cons = 0.0
    for _ in range(50):
        new, info = step_relaxed(s, M, cfg, bc)
        b = info.boundary_flux
        cons = max(cons, abs(s.grid.dx * (new.v.sum() - s.v.sum()) + b[1] - b[0]),
                   abs(s.grid.dx * (new.u.sum() - s.u.sum()) + b[3] - b[2]))
        s = new

    g = Grid(10.0, 64)
    const = FieldState(0.0, np.full(64, 1.2), np.full(64, 0.3), np.zeros(64), g)
    fixed, _ = step_relaxed(const, M, SolverConfig(end_time=1.0, sigma=sigma), static_boundary(const))
    fixed_err = max(np.max(np.abs(fixed.v - const.v)), np.max(np.abs(fixed.u - const.u)), np.max(np.abs(fixed.pi)))

    finals = {}
    for N in (1024, 2048, 4096):
        st = initial(N)
        finals[N] = run(st, M, SolverConfig(end_time=2.0, sigma=sigma), composite_boundary(waves, st.grid)).final

    def diff(c, f):
        d = sum(np.sum((0.5 * (getattr(f, k)[0::2] + getattr(f, k)[1::2]) - getattr(c, k)) ** 2) for k in ("v", "u", "pi"))
        return math.sqrt(d * c.grid.dx)

    e1, e2 = diff(finals[1024], finals[2048]), diff(finals[2048], finals[4096])
    order = math.log2(e1 / e2)
    elapsed = time.perf_counter() - t0
    checks = {
        "conservation < 1e-12 per step": cons < 1e-12,
        "equilibrium fixed point": fixed_err < 1e-15,
        "self-convergence order >= 1.8": order >= 1.8,
        "runtime < 120 s": elapsed < 120.0,
    }
    _report(capsys, 3, "solver sanity", checks,
            f"conservation={cons:.1e} fixed={fixed_err:.1e} order={order:.2f} time={elapsed:.1f}s")


@pytest.mark.slow
def test_criterion_4_stability(capsys, default_stability):
    summary, elapsed = default_stability
    sc = summary.scalars
    checks = {
        "excess sup_error ratio < 0.2": sc["excess_ratio"] < 0.2,
        "|Xdot| last-decile max < 0.2 x first-decile max": sc["xdot_last_decile_max"] < 0.2 * sc["xdot_first_decile_max"],
        "|X(T)|/T < |X(T/4)|/(T/4)": sc["drift_T"] < sc["drift_quarter"],
        "runtime < 15 min": elapsed < 900.0,
    }
    _report(capsys, 4, "stability", checks,
            f"excess={sc['excess_ratio']:.4f} raw={sc['decay_ratio']:.3f} xdot_trend={sc['xdot_trend']:.4f} "
            f"drift={sc['drift_T']:.4f}/{sc['drift_quarter']:.4f} time={elapsed:.0f}s")


@pytest.mark.slow
def test_criterion_5_entropy_identity(capsys):
    cfg = load_config(CONFIGS / "entropy_check.toml")
    assert cfg.end_time == 2.0 and cfg.N == 2048
    t0 = time.perf_counter()
    sc = run_entropy_check(cfg).scalars
    elapsed = time.perf_counter() - t0
    checks = {
        "residual ratio >= 1.7": sc["residual_ratio"] >= 1.7,
        "eta >= 0": sc["eta_nonnegative_N2048"] and sc["eta_nonnegative_N4096"],
        "eta <= 2 eta(0) + margin": sc["eta_bounded_N2048"] and sc["eta_bounded_N4096"],
    }
    _report(capsys, 5, "entropy identity", checks,
            f"residual={sc['residual_mean_N2048']:.2e}->{sc['residual_mean_N4096']:.2e} "
            f"ratio={sc['residual_ratio']:.2f} time={elapsed:.0f}s")


@pytest.mark.slow
def test_criterion_6_relaxation_limit(capsys):
    cfg = load_config(CONFIGS / "relax_sweep.toml")
    assert cfg.tau_list == (1e-2, 1e-3, 1e-4)
    t0 = time.perf_counter()
    summary = run_relax_sweep(cfg, jobs=3)
    elapsed = time.perf_counter() - t0
    sc = summary.scalars
    t = summary.tables["sweep"]
    checks = {
        "L2 difference strictly decreasing": sc["diff_strictly_decreasing"],
        "relaxation gap strictly decreasing": sc["gap_strictly_decreasing"],
        "gap exponent >= 0.5": sc["gap_exponent"] >= 0.5,
        "runtime < 30 min": elapsed < 1800.0,
    }
    _report(capsys, 6, "relaxation limit", checks,
            f"diff={np.array2string(t.column('diff_l2'), precision=2)} "
            f"gap={np.array2string(t.column('relax_gap'), precision=2)} "
            f"exponent={sc['gap_exponent']:.2f} time={elapsed:.0f}s")


def test_criterion_7_weight_and_shift(capsys):
    # delta_S = 0.1 so that both sqrt(delta_S) and 2 delta_S lie in the admissible window
    weak = build_waves(M, 0.9**-0.5, 0.0, 1.0, 0.9, eps=0.1)
    d = weak.end_states.delta_S
    rng = np.random.default_rng(55)
    xi = rng.uniform(-150, 150, 10_000)
    order = np.argsort(xi)
    bounds = True
    for lam in (math.sqrt(d), 2 * d):
        a, da = weight(WeightSpec(lam, weak.shock, d), xi, derivative=True)
        bounds &= bool(np.all((1.0 < a) & (a < 1.0 + lam)) and np.all(da > 0.0) and np.all(np.diff(a[order]) > 0.0))

    closed = 5 * 3 * 2 * math.sqrt(2) / 16  # 5(g+1) s_m^3 / (8 g p(v_m)) with s_m = sqrt(2)
    m_err = abs(drift_constant(M, 1.0) - closed)

    waves = build_waves(M, 1.2, 0.0, 1.0, 0.9, eps=0.1)
    spec = WeightSpec.default(waves.shock)
    rate = 0.0
    for t, X in ((0.0, 0.0), (3.0, 1.7), (10.0, -2.5)):
        g = Grid(150.0, 2048)
        st = FieldState(t, *eval_composite(waves, t, g.centers, X), g)
        rate = max(rate, abs(shift_rate(st, waves, spec, ShiftState(X, 0.0, drift_constant(M, 1.0)))))
    checks = {
        "weight bounds at 1e4 points for both amplitudes": bounds,
        "M closed form to 1e-12": m_err < 1e-12,
        "zero-perturbation Xdot = 0": rate < 1e-13,
    }
    _report(capsys, 7, "weight and shift", checks, f"M={drift_constant(M, 1.0):.12f} |Xdot|={rate:.1e}")
