"""Experiment configuration, orchestration and artifact output.

Configs are flat TOML files with dotted keys, e.g.::

    experiment = "stability"
    model.gamma = 2.0
    grid.L = "auto"

Every key in :data:`CONFIG_KEYS` is mandatory except ``sweep.tau_list`` and
``waves.eps``.  ``"auto"`` is accepted where a default rule exists.
"""
from __future__ import annotations

import hashlib
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .diagnostics import (
    DIAGNOSTIC_COLUMNS,
    diagnostic_row,
    entropy_report,
    error_report,
    relaxation_gap,
)
from .eos import GasModel, lambda1, pressure
from .shift import ShiftCoupling, resolution_cells
from .solver import (
    FieldState,
    Grid,
    RunResult,
    SolverConfig,
    _equilibrium_pi,
    composite_boundary,
    run,
    stable_dt,
)
from .waves import (
    ShockProfile,
    Waves,
    build_end_states,
    build_waves,
    eval_composite,
    relaxation_bound,
)

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

EXPERIMENTS = ("stability", "relax_sweep", "profile_only", "entropy_check")
SHAPES = ("gaussian_bump", "zero")
FORMATS = ("csv", "json", "svg")
AUTO = "auto"

# dotted config key -> ExperimentConfig attribute
CONFIG_KEYS = {
    "experiment": "experiment",
    "model.gamma": "gamma",
    "model.mu": "mu",
    "model.tau": "tau",
    "waves.v_plus": "v_plus",
    "waves.u_plus": "u_plus",
    "waves.v_m": "v_m",
    "waves.v_minus": "v_minus",
    "waves.eps": "eps",
    "grid.L": "L",
    "grid.N": "N",
    "solver.cfl": "cfl",
    "solver.end_time": "end_time",
    "solver.output_stride": "output_stride",
    "shift.lambda_amp": "lambda_amp",
    "perturbation.shape": "shape",
    "perturbation.amplitude": "amplitude",
    "perturbation.center": "center",
    "perturbation.width": "width",
    "perturbation.target_fields": "target_fields",
    "sweep.tau_list": "tau_list",
    "output_dir": "output_dir",
    "seed": "seed",
}
OPTIONAL_KEYS = {"sweep.tau_list", "waves.eps"}

# eta margin coefficient kappa in eta(t) <= 2 eta(0) + kappa delta_R^theta
ETA_MARGIN_KAPPA = 0.05


class ConfigError(ValueError):
    """Invalid experiment configuration; raised before any computation."""


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str = "stability"
    gamma: float = 2.0
    mu: float = 1.0
    tau: float = 0.01
    v_plus: float = 1.2
    u_plus: float = 0.0
    v_m: float = 1.0
    v_minus: float = 0.9
    eps: float | str = 0.1
    L: float | str = AUTO
    N: int = 4096
    cfl: float = 0.9
    end_time: float = 200.0
    output_stride: int = 10
    lambda_amp: float | str = AUTO
    shape: str = "gaussian_bump"
    amplitude: float = 0.01
    center: float = 0.0
    width: float | str = AUTO
    target_fields: tuple[str, ...] = ("v", "u")
    tau_list: tuple[float, ...] = ()
    output_dir: str = "runs/stability"
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "target_fields", tuple(self.target_fields))
        object.__setattr__(self, "tau_list", tuple(float(t) for t in self.tau_list))

    # -- derived quantities -------------------------------------------------
    def model(self, tau: float | None = None) -> GasModel:
        return GasModel(self.gamma, self.mu, self.tau if tau is None else tau)

    def end_states(self, tau: float | None = None):
        return build_end_states(self.model(tau), self.v_plus, self.u_plus, self.v_m, self.v_minus)

    def half_width(self) -> float:
        if self.L != AUTO:
            return float(self.L)
        es = self.end_states()
        return max(40.0 / es.delta_S, 8.0 * abs(lambda1(self.model(), self.v_minus)) * self.end_time)

    def bump_width(self) -> float:
        return 5.0 / self.end_states().delta_S if self.width == AUTO else float(self.width)

    def eps_value(self) -> float | None:
        return None if self.eps == AUTO else float(self.eps)

    def lambda_value(self) -> float | None:
        return None if self.lambda_amp == AUTO else float(self.lambda_amp)

    # -- serialization ------------------------------------------------------
    def to_mapping(self) -> dict:
        d = asdict(self)
        out = {}
        for key, attr in CONFIG_KEYS.items():
            val = d[attr]
            if isinstance(val, tuple):
                val = list(val)
            out[key] = val
        return out

    def to_toml(self) -> str:
        lines = []
        for key, val in self.to_mapping().items():
            lines.append(f"{key} = {_toml_value(val)}")
        return "\n".join(lines) + "\n"

    def content_hash(self) -> str:
        """Git blob hash of the canonical config text."""
        data = self.to_toml().encode()
        return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


def _toml_value(val) -> str:
    if isinstance(val, bool):
        return "true" if val else "false"
    if isinstance(val, (int, float)):
        return repr(val)
    if isinstance(val, list):
        return "[" + ", ".join(_toml_value(v) for v in val) + "]"
    return json.dumps(str(val))


def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def parse_config(text: str) -> ExperimentConfig:
    try:
        raw = _flatten(tomllib.loads(text))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    unknown = sorted(set(raw) - set(CONFIG_KEYS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    missing = sorted(set(CONFIG_KEYS) - OPTIONAL_KEYS - set(raw))
    if missing:
        raise ConfigError(f"missing config keys: {', '.join(missing)}")
    kwargs = {CONFIG_KEYS[k]: v for k, v in raw.items()}
    types = {f.name: f.type for f in fields(ExperimentConfig)}
    for name, val in kwargs.items():
        if isinstance(val, str) and val != AUTO and "str" not in types[name]:
            raise ConfigError(f"{name}: expected a number, got {val!r}")
    try:
        cfg = ExperimentConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    validate_config(cfg)
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def tau_window(cfg: ExperimentConfig) -> float:
    """Admissible relaxation times: tau <= min(inf mu/|sigma^2 + p'(v_S)|, 1)."""
    return min(relaxation_bound(cfg.model(0.0), cfg.end_states(0.0)), 1.0)


def validate_config(cfg: ExperimentConfig) -> ExperimentConfig:
    """Reject inadmissible configs before any computation starts."""
    if cfg.experiment not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {cfg.experiment!r}")
    if cfg.shape not in SHAPES:
        raise ConfigError(f"perturbation.shape must be one of {SHAPES}")
    if not set(cfg.target_fields) <= {"v", "u"} or not cfg.target_fields:
        raise ConfigError("perturbation.target_fields must be a non-empty subset of [v, u]")
    try:
        model = cfg.model()
        es = cfg.end_states()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    window = tau_window(cfg)
    taus = [cfg.tau] + list(cfg.tau_list)
    for t in taus:
        if not 0.0 < t <= window:
            raise ConfigError(f"tau={t} outside the admissible window (0, {window:.6g}]")
    if cfg.experiment == "relax_sweep":
        if not cfg.tau_list:
            raise ConfigError("relax_sweep needs sweep.tau_list")
        if any(a < b for a, b in zip(cfg.tau_list, cfg.tau_list[1:])):
            raise ConfigError("sweep.tau_list must be sorted in descending order")
    if not 0.0 < cfg.cfl <= 0.95:
        raise ConfigError("solver.cfl must lie in (0, 0.95]")
    if not cfg.end_time > 0.0:
        raise ConfigError("solver.end_time must be positive")
    if int(cfg.N) != cfg.N or cfg.N < 16:
        raise ConfigError("grid.N must be an integer >= 16")
    if int(cfg.output_stride) != cfg.output_stride or cfg.output_stride < 1:
        raise ConfigError("solver.output_stride must be a positive integer")
    for name in ("L", "width", "eps", "lambda_amp"):
        val = getattr(cfg, name)
        if val != AUTO and not float(val) > 0.0:
            raise ConfigError(f"{name} must be positive or 'auto'")
    if cfg.lambda_amp != AUTO and not es.delta_S < float(cfg.lambda_amp) <= math.sqrt(es.delta_S):
        raise ConfigError("shift.lambda_amp must satisfy delta_S < lambda <= sqrt(delta_S)")
    if "v" in cfg.target_fields and cfg.shape != "zero":
        if abs(cfg.amplitude) >= min(es.v_minus, es.v_m, es.v_plus):
            raise ConfigError("perturbation amplitude would make v non-positive")
    del model
    return cfg


# ---------------------------------------------------------------------------
# tabular results


@dataclass
class Table:
    columns: list[str]
    rows: list[list[float]] = field(default_factory=list)

    def array(self) -> np.ndarray:
        return np.asarray(self.rows, dtype=float).reshape(-1, len(self.columns))

    def column(self, name: str) -> np.ndarray:
        return self.array()[:, self.columns.index(name)]


@dataclass(frozen=True)
class SeriesSpec:
    """One chart: ``y`` against ``x`` from table ``table``."""

    name: str
    table: str
    x: str
    y: str
    absolute: bool = False
    logx: bool = False


@dataclass
class Summary:
    experiment: str
    config: ExperimentConfig
    scalars: dict = field(default_factory=dict)
    tables: dict[str, Table] = field(default_factory=dict)
    series: list[SeriesSpec] = field(default_factory=list)
    snapshots: dict = field(default_factory=dict)  # name -> (FieldState, sigma, GasModel)
    profile: ShockProfile | None = None


# ---------------------------------------------------------------------------
# setup


@dataclass
class Setup:
    model: GasModel
    waves: Waves
    grid: Grid
    initial: FieldState
    perturbation_h2: float


def perturbation(cfg: ExperimentConfig, waves: Waves, xi: np.ndarray):
    """Bump added to (v, u).  With both targets the u part is ``-sqrt(-p'(v_m))``
    times the v part, so the bump travels with the shock family."""
    zero = np.zeros_like(xi)
    if cfg.shape == "zero" or cfg.amplitude == 0.0:
        return zero, zero
    g = cfg.amplitude * np.exp(-(((xi - cfg.center) / cfg.bump_width()) ** 2))
    if cfg.target_fields == ("u",):
        return zero, g
    c_m = math.sqrt(-pressure(waves.model, waves.end_states.v_m, 1))
    dv = g
    du = -c_m * g if "u" in cfg.target_fields else zero
    return dv, du


def _h2_norm(f: np.ndarray, dx: float) -> float:
    f1 = np.gradient(f, dx)
    f2 = np.gradient(f1, dx)
    return float(np.sqrt(np.sum(f**2 + f1**2 + f2**2) * dx))


def prepare(cfg: ExperimentConfig, tau: float | None = None, equilibrium_pi: bool = False) -> Setup:
    """Waves, grid and perturbed initial state; Pi starts on the composite
    unless ``equilibrium_pi`` (then on the discrete mu u_xi / v)."""
    model = cfg.model(tau)
    waves = build_waves(model, cfg.v_plus, cfg.u_plus, cfg.v_m, cfg.v_minus, eps=cfg.eps_value())
    grid = Grid(cfg.half_width(), int(cfg.N))
    xi = grid.centers
    v, u, pi = eval_composite(waves, 0.0, xi, 0.0)
    dv, du = perturbation(cfg, waves, xi)
    v, u = v + dv, u + du
    if equilibrium_pi:
        g = composite_boundary(waves, grid)(0.0, 0.0)
        pi = _equilibrium_pi(model, v, u, g[1], g[4], grid.dx)
    h2 = math.hypot(_h2_norm(dv, grid.dx), _h2_norm(du, grid.dx))
    return Setup(model, waves, grid, FieldState(0.0, v, u, pi, grid), h2)


@dataclass
class Trajectory:
    result: RunResult
    diagnostics: Table
    shift: Table
    coupling: ShiftCoupling


def simulate(cfg: ExperimentConfig, setup: Setup | None = None, end_time: float | None = None) -> Trajectory:
    """Coupled solver + shift run sampling the full diagnostic row."""
    s = prepare(cfg) if setup is None else setup
    coupling = ShiftCoupling.create(s.waves, cfg.lambda_value())
    scfg = SolverConfig(
        end_time=cfg.end_time if end_time is None else end_time,
        cfl=cfg.cfl,
        sigma=s.waves.end_states.sigma,
        output_stride=int(cfg.output_stride),
    )
    prev = [None]

    def sampler(state, X, Xdot, step):
        ent = entropy_report(state, s.waves, coupling.spec, X, Xdot, prev[0])
        prev[0] = ent
        return diagnostic_row(ent, error_report(state, s.waves, X), X, Xdot)

    res = run(s.initial, s.model, scfg, composite_boundary(s.waves, s.grid), coupling, sampler)
    diag = Table(list(DIAGNOSTIC_COLUMNS), [list(map(float, r)) for r in res.samples])
    shift = Table(["t", "X", "Xdot"], [list(map(float, r)) for r in res.shift_history])
    return Trajectory(res, diag, shift, coupling)


# ---------------------------------------------------------------------------
# experiments


def _decile_max(t: np.ndarray, y: np.ndarray, T: float, last: bool) -> float:
    mask = t >= 0.9 * T if last else t <= 0.1 * T
    return float(np.max(np.abs(y[mask])))


def _trend_scalars(shift: Table, T: float) -> dict:
    t, X, Xd = shift.column("t"), shift.column("X"), shift.column("Xdot")
    first = _decile_max(t, Xd, T, last=False)
    last = _decile_max(t, Xd, T, last=True)
    Xq = float(np.interp(0.25 * T, t, X))
    return {
        "xdot_first_decile_max": first,
        "xdot_last_decile_max": last,
        "xdot_trend": last / first if first > 0.0 else float("nan"),
        "X_T": float(X[-1]),
        "X_quarter": Xq,
        "drift_T": abs(float(X[-1])) / T,
        "drift_quarter": abs(Xq) / (0.25 * T),
    }


def eta_theta(q: float = 2.0) -> float:
    return min(0.5, 1.5 - 1.0 / q)


def run_stability(cfg: ExperimentConfig) -> Summary:
    """Perturbed run plus a zero-perturbation floor run on the same grid."""
    if cfg.experiment != "stability":
        raise ConfigError("run_stability needs experiment = 'stability'")
    T = cfg.end_time
    setup = prepare(cfg)
    traj = simulate(cfg, setup)
    diag = traj.diagnostics
    supE = diag.column("supE")
    eta = diag.column("eta")
    es = setup.waves.end_states
    sc = {
        "N": int(cfg.N),
        "L": setup.grid.half_width,
        "dx": setup.grid.dx,
        "delta_S": es.delta_S,
        "delta_R": es.delta_R,
        "sigma": es.sigma,
        "steps": traj.result.steps,
        "shock_cells": resolution_cells(setup.waves.shock, setup.grid.dx),
        "under_resolved": bool(traj.coupling.under_resolved),
        "perturbation_h2": setup.perturbation_h2,
        "sup_error_0": float(supE[0]),
        "sup_error_T": float(supE[-1]),
        "decay_ratio": float(supE[-1] / supE[0]) if supE[0] > 0.0 else float("nan"),
        "eta_0": float(eta[0]),
        "eta_max": float(eta.max()),
        "eta_min": float(eta.min()),
        "identity_residual_mean": float(np.nanmean(diag.column("residual"))),
    }
    sc.update(_trend_scalars(traj.shift, T))
    theta = eta_theta()
    sc["eta_margin"] = ETA_MARGIN_KAPPA * es.delta_R**theta
    sc["eta_bounded"] = bool(np.all(eta <= 2.0 * eta[0] + sc["eta_margin"]))
    tables = {"diagnostics": diag, "shift": traj.shift}
    if cfg.shape != "zero" and cfg.amplitude != 0.0:
        floor_cfg = replace(cfg, shape="zero", amplitude=0.0)
        floor = simulate(floor_cfg, prepare(floor_cfg))
        fsup = floor.diagnostics.column("supE")
        sc["floor_sup_error_T"] = float(fsup[-1])
        sc["floor_sup_error_max"] = float(fsup.max())
        sc["floor_X_T"] = float(floor.shift.column("X")[-1])
        sc["excess_ratio"] = float((supE[-1] - fsup[-1]) / supE[0])
        tables["floor_diagnostics"] = floor.diagnostics
        tables["floor_shift"] = floor.shift
    else:
        sc["floor_sup_error_T"] = float(supE[-1])
        sc["floor_sup_error_max"] = float(supE.max())
        sc["floor_X_T"] = sc["X_T"]
        sc["excess_ratio"] = 0.0
    series = [
        SeriesSpec("sup_error", "diagnostics", "t", "supE"),
        SeriesSpec("eta", "diagnostics", "t", "eta"),
        SeriesSpec("abs_xdot", "shift", "t", "Xdot", absolute=True),
    ]
    snaps = {"state_final": (traj.result.final, es.sigma, setup.model)}
    return Summary("stability", cfg, sc, tables, series, snaps, setup.waves.shock)


def run_entropy_check(cfg: ExperimentConfig) -> Summary:
    """Identity residual on grids N and 2N with matching sample times."""
    T = cfg.end_time
    sc: dict = {}
    tables = {}
    means = []
    for k, n in enumerate((int(cfg.N), 2 * int(cfg.N))):
        c = replace(cfg, N=n, output_stride=int(cfg.output_stride) * (k + 1))
        traj = simulate(c, prepare(c))
        d = traj.diagnostics
        eta = d.column("eta")
        es = traj.coupling.waves.end_states
        margin = ETA_MARGIN_KAPPA * es.delta_R ** eta_theta()
        m = float(np.nanmean(d.column("residual")))
        means.append(m)
        sc[f"residual_mean_N{n}"] = m
        sc[f"residual_final_N{n}"] = float(d.column("residual")[-1])
        sc[f"eta_nonnegative_N{n}"] = bool(np.all(eta >= 0.0))
        sc[f"eta_bounded_N{n}"] = bool(np.all(eta <= 2.0 * eta[0] + margin))
        sc[f"eta_max_N{n}"] = float(eta.max())
        sc[f"eta_0_N{n}"] = float(eta[0])
        sc["eta_margin"] = margin
        tables[f"diagnostics_N{n}"] = d
        tables[f"shift_N{n}"] = traj.shift
    sc["residual_ratio"] = means[0] / means[1] if means[1] > 0.0 else float("inf")
    sc["end_time"] = T
    series = [SeriesSpec(f"residual_{name}", name, "t", "residual") for name in tables if name.startswith("diag")]
    series += [SeriesSpec(f"eta_{name}", name, "t", "eta") for name in tables if name.startswith("diag")]
    return Summary("entropy_check", cfg, sc, tables, series)


def profile_only(cfg: ExperimentConfig) -> Summary:
    from .waves import solve_shock_profile

    model = cfg.model()
    es = cfg.end_states()
    prof = solve_shock_profile(model, es)
    sc = {
        "sigma": es.sigma,
        "delta_S": es.delta_S,
        "tail_rate": prof.tail_rate,
        "nodes": int(prof.nodes.size),
        "xi_min": float(prof.nodes[0]),
        "xi_max": float(prof.nodes[-1]),
    }
    return Summary("profile_only", cfg, sc, profile=prof)


def _sweep_job(cfg: ExperimentConfig, tau: float | None, max_dt: float | None):
    """One sweep entry; ``tau=None`` is the classical reference."""
    setup = prepare(cfg, tau=0.0, equilibrium_pi=True)
    waves0 = setup.waves
    model = cfg.model(0.0 if tau is None else tau)
    scfg = SolverConfig(
        end_time=cfg.end_time,
        cfl=cfg.cfl,
        sigma=waves0.end_states.sigma,
        scheme="classical_reference" if tau is None else "relaxed_imex",
        max_dt=max_dt,
    )
    res = run(setup.initial, model, scfg, composite_boundary(waves0, setup.grid))
    return res.final, res.steps


def _fit_exponent(x, y) -> float:
    x, y = np.asarray(x, float), np.asarray(y, float)
    ok = (x > 0) & (y > 0)
    if ok.sum() < 2 or np.unique(x[ok]).size < 2:
        return float("nan")
    return float(np.polyfit(np.log(x[ok]), np.log(y[ok]), 1)[0])


def run_relax_sweep(cfg: ExperimentConfig, jobs: int = 1) -> Summary:
    """Relaxed runs over ``tau_list`` against one classical run, all started
    from the tau = 0 composite with Pi on the discrete equilibrium."""
    if cfg.experiment != "relax_sweep":
        raise ConfigError("run_relax_sweep needs experiment = 'relax_sweep'")
    taus = list(cfg.tau_list)
    # classical dt capped by the smallest relaxed CFL step
    s0 = prepare(cfg, tau=0.0, equilibrium_pi=True)
    probe = SolverConfig(end_time=cfg.end_time, cfl=cfg.cfl, sigma=s0.waves.end_states.sigma)
    dt_cap = stable_dt(cfg.model(min(taus)), probe, s0.initial)
    entries = [(t, None) for t in taus] + [(None, dt_cap)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            outs = list(ex.map(_sweep_job, [cfg] * len(entries), *zip(*entries)))
    else:
        outs = [_sweep_job(cfg, t, m) for t, m in entries]
    ref, ref_steps = outs[-1]
    dx = ref.grid.dx
    table = Table(["tau", "diff_l2", "relax_gap", "steps"])
    for tau, (final, steps) in zip(taus, outs[:-1]):
        diff = math.sqrt(float(np.sum((final.v - ref.v) ** 2 + (final.u - ref.u) ** 2)) * dx)
        table.rows.append([tau, diff, relaxation_gap(final, cfg.mu), float(steps)])
    diffs, gaps = table.column("diff_l2"), table.column("relax_gap")
    strict = lambda a: bool(np.all(np.diff(a) < 0.0))  # noqa: E731
    sc = {
        "classical_steps": ref_steps,
        "classical_max_dt": dt_cap,
        "diff_strictly_decreasing": strict(diffs),
        "gap_strictly_decreasing": strict(gaps),
        "gap_nonmonotone": not strict(gaps),
        "gap_exponent": _fit_exponent(table.column("tau"), gaps),
        "diff_exponent": _fit_exponent(table.column("tau"), diffs),
        "classical_relax_gap": relaxation_gap(ref, cfg.mu),
    }
    series = [
        SeriesSpec("diff_l2", "sweep", "tau", "diff_l2", logx=True),
        SeriesSpec("relax_gap", "sweep", "tau", "relax_gap", logx=True),
    ]
    snaps = {"state_classical": (ref, s0.waves.end_states.sigma, cfg.model(0.0))}
    return Summary("relax_sweep", cfg, sc, {"sweep": table}, series, snaps)


def run_experiment(cfg: ExperimentConfig, jobs: int = 1) -> Summary:
    validate_config(cfg)
    if cfg.experiment == "stability":
        return run_stability(cfg)
    if cfg.experiment == "relax_sweep":
        return run_relax_sweep(cfg, jobs)
    if cfg.experiment == "entropy_check":
        return run_entropy_check(cfg)
    return profile_only(cfg)


# ---------------------------------------------------------------------------
# output


def _atomic_write(path: Path, data: bytes):
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_bytes(columns, rows) -> bytes:
    lines = [",".join(columns)]
    for r in rows:
        lines.append(",".join(format(float(x), ".17g") for x in r))
    return ("\n".join(lines) + "\n").encode()


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x) if math.isfinite(x) else None
    return x


def _svg_bytes(spec: SeriesSpec, table: Table) -> bytes:
    import io

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    x, y = table.column(spec.x), table.column(spec.y)
    if spec.absolute:
        y = np.abs(y)
    keep = np.isfinite(y) & (y > 0.0)
    with matplotlib.rc_context({"svg.hashsalt": "relaxcns", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(x[keep], y[keep], lw=1.2, marker="o" if keep.sum() < 20 else None)
        ax.set_yscale("log")
        if spec.logx:
            ax.set_xscale("log")
        ax.set_xlabel(spec.x)
        ax.set_ylabel(f"|{spec.y}|" if spec.absolute else spec.y)
        ax.set_title(spec.name)
        fig.tight_layout()
        buf = io.BytesIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
        plt.close(fig)
    return buf.getvalue()


def emit_outputs(summary: Summary, out_dir, formats=("csv", "json")) -> list[Path]:
    """Write the requested artifacts into ``out_dir``; returns the paths.

    The config echo and its content hash live in ``summary.json``; without
    ``json`` they go to ``config.toml`` instead."""
    formats = tuple(formats)
    bad = set(formats) - set(FORMATS)
    if bad:
        raise ValueError(f"unknown formats: {sorted(bad)}")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-probe"
        probe.write_bytes(b"")
        probe.unlink()
    except OSError as exc:
        raise OSError(f"output directory not writable: {out}: {exc}") from exc
    cfg = summary.config
    written: list[Path] = []

    def put(name: str, data: bytes):
        p = out / name
        _atomic_write(p, data)
        written.append(p)

    if "csv" in formats:
        for name, tab in summary.tables.items():
            put(f"{name}.csv", _csv_bytes(tab.columns, tab.rows))
        for name, (state, sigma, model) in summary.snapshots.items():
            g = state.grid
            rows = np.column_stack([g.centers, state.v, state.u, state.pi])
            put(f"{name}.csv", _csv_bytes(["xi", "v", "u", "pi"], rows))
            meta = {"t": state.t, "sigma": sigma, "gamma": model.gamma, "mu": model.mu,
                    "tau": model.tau, "N": g.cells, "L": g.half_width}
            put(f"{name}.json", (json.dumps(_jsonable(meta), indent=2, sort_keys=True) + "\n").encode())
        if summary.profile is not None:
            with tempfile.TemporaryDirectory(dir=out) as td:
                c, j = summary.profile.to_files(Path(td) / "profile.csv", Path(td) / "profile.json")
                put("profile.csv", Path(c).read_bytes())
                put("profile.json", Path(j).read_bytes())
    if "svg" in formats:
        for spec in summary.series:
            put(f"{spec.name}.svg", _svg_bytes(spec, summary.tables[spec.table]))
    if "json" in formats:
        doc = {
            "experiment": summary.experiment,
            "config": cfg.to_mapping(),
            "config_hash": cfg.content_hash(),
            "scalars": summary.scalars,
            "tables": {k: f"{k}.csv" for k in summary.tables},
            "series": [asdict(s) for s in summary.series],
        }
        put("summary.json", (json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n").encode())
    else:
        put("config.toml", f"# content hash {cfg.content_hash()}\n{cfg.to_toml()}".encode())
    return written
