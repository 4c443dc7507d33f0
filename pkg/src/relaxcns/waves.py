"""Wave construction: Riemann end states, viscous 2-shock profile, smoothed
1-rarefaction, and their shifted superposition in the moving frame.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline
from scipy.special import beta as beta_fn, betainc

from .eos import DomainError, GasModel, lambda1, lambda1_inverse, pressure, z1


class WaveConfigurationError(ValueError):
    """End states do not form an admissible S2 o R1 configuration."""


class RelaxationTooLargeError(ValueError):
    """tau violates the sub-characteristic bound needed for a monotone profile."""


class ProfileNonexistenceError(RuntimeError):
    pass


class RootFindingError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# end states


@dataclass(frozen=True)
class WaveEndStates:
    v_minus: float
    u_minus: float
    v_m: float
    u_m: float
    v_plus: float
    u_plus: float
    sigma: float
    delta_S: float
    delta_R: float


def build_end_states(model: GasModel, v_plus, u_plus, v_m, v_minus) -> WaveEndStates:
    """End states with (v_m,u_m) on the 2-shock curve of (v_plus,u_plus) and
    (v_minus,u_minus) on the 1-rarefaction curve of (v_m,u_m)."""
    v_plus, u_plus, v_m, v_minus = map(float, (v_plus, u_plus, v_m, v_minus))
    if not (0.0 < v_minus <= v_m < v_plus):
        raise WaveConfigurationError(
            f"need 0 < v_minus <= v_m < v_plus, got {v_minus}, {v_m}, {v_plus}"
        )
    p_m, p_p = pressure(model, v_m), pressure(model, v_plus)
    sigma = np.sqrt((p_m - p_p) / (v_plus - v_m))
    # Lax: lambda2(v_plus) < sigma < lambda2(v_m)
    if not (-lambda1(model, v_plus) < sigma < -lambda1(model, v_m)):
        raise WaveConfigurationError("Lax entropy condition fails for the 2-shock")
    u_m = u_plus + sigma * (v_plus - v_m)
    u_minus = u_m + z1(model, v_m, 0.0) - z1(model, v_minus, 0.0)
    return WaveEndStates(
        v_minus=v_minus,
        u_minus=float(u_minus),
        v_m=v_m,
        u_m=float(u_m),
        v_plus=v_plus,
        u_plus=u_plus,
        sigma=float(sigma),
        delta_S=float(abs(p_p - p_m)),
        delta_R=float(abs(v_m - v_minus)),
    )


# ---------------------------------------------------------------------------
# viscous shock


def _h(model, es, v):
    return es.sigma**2 * (es.v_m - v) + (pressure(model, es.v_m) - pressure(model, v))


def _dh(model, es, v):
    return -es.sigma**2 - pressure(model, v, 1)


def _profile_rhs(model, es, v):
    """d v / d xi along the profile."""
    s = es.sigma
    return v * _h(model, es, v) / (model.mu * s + model.tau * s * _dh(model, es, v))


def relaxation_bound(model: GasModel, es: WaveEndStates, samples: int = 2001) -> float:
    """inf over [v_m, v_plus] of mu / |h'(v)|."""
    v = np.linspace(es.v_m, es.v_plus, samples)
    return float(np.min(model.mu / np.abs(_dh(model, es, v))))


@dataclass(frozen=True, eq=False)
class ShockProfile:
    end_states: WaveEndStates
    model: GasModel
    nodes: np.ndarray
    v_nodes: np.ndarray
    u_nodes: np.ndarray
    pi_nodes: np.ndarray
    rate_left: float
    rate_right: float
    interpolant: CubicHermiteSpline = field(repr=False)

    @property
    def tail_rate(self) -> float:
        """Slower of the two linearized decay rates (1/length)."""
        return min(abs(self.rate_left), abs(self.rate_right))

    @property
    def width(self) -> float:
        return 1.0 / self.tail_rate

    def __call__(self, xi):
        return eval_shock(self, xi)

    def to_files(self, csv_path, json_path=None):
        csv_path = Path(csv_path)
        json_path = Path(json_path) if json_path else csv_path.with_suffix(".json")
        data = np.column_stack([self.nodes, self.v_nodes, self.u_nodes, self.pi_nodes])
        np.savetxt(csv_path, data, delimiter=",", header="xi,v,u,pi", comments="", fmt="%.17g")
        es, m = self.end_states, self.model
        meta = {
            "sigma": es.sigma,
            "delta_S": es.delta_S,
            "tail_rate": self.tail_rate,
            "v_m": es.v_m,
            "u_m": es.u_m,
            "v_plus": es.v_plus,
            "u_plus": es.u_plus,
            "gamma": m.gamma,
            "mu": m.mu,
            "tau": m.tau,
        }
        json_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
        return csv_path, json_path


def _monotone_slopes(x, y, d):
    """Clip Hermite slopes into the Fritsch-Carlson region so the cubic is monotone."""
    d = d.copy()
    delta = np.diff(y) / np.diff(x)
    for k in range(len(delta)):
        if delta[k] == 0.0:
            d[k] = d[k + 1] = 0.0
            continue
        a, b = d[k] / delta[k], d[k + 1] / delta[k]
        r = a * a + b * b
        if r > 9.0:
            t = 3.0 / np.sqrt(r)
            d[k], d[k + 1] = t * a * delta[k], t * b * delta[k]
    return d


def solve_shock_profile(
    model: GasModel, end_states: WaveEndStates, tol: float = 1e-10, spacing: float | None = None
) -> ShockProfile:
    """Heteroclinic orbit of the traveling-wave ODE, anchored at the midpoint
    volume at xi = 0 and integrated towards both equilibria."""
    es = end_states
    if es.v_plus <= es.v_m:
        raise WaveConfigurationError("zero-strength shock has no profile")
    bound = relaxation_bound(model, es)
    if not model.tau < bound:
        raise RelaxationTooLargeError(f"tau={model.tau} must be below {bound:.6g}")
    interior = np.linspace(es.v_m, es.v_plus, 2001)[1:-1]
    if np.any(_h(model, es, interior) <= 0.0):
        raise ProfileNonexistenceError("h changes sign inside (v_m, v_plus)")

    s = es.sigma
    denom = lambda v: model.mu * s + model.tau * s * _dh(model, es, v)  # noqa: E731
    rate_left = float(es.v_m * _dh(model, es, es.v_m) / denom(es.v_m))
    rate_right = float(es.v_plus * _dh(model, es, es.v_plus) / denom(es.v_plus))
    if spacing is None:
        spacing = 0.02 / min(rate_left, -rate_right)

    def rhs(_, y):
        return [_profile_rhs(model, es, y[0])]

    v0 = 0.5 * (es.v_m + es.v_plus)
    span = 200.0 / min(rate_left, -rate_right) + 50.0

    def hit_plus(_, y):
        return es.v_plus - y[0] - tol

    def hit_minus(_, y):
        return y[0] - es.v_m - tol

    hit_plus.terminal = hit_minus.terminal = True
    kw = dict(method="DOP853", rtol=1e-13, atol=1e-15, dense_output=True)
    fwd = solve_ivp(rhs, (0.0, span), [v0], events=hit_plus, **kw)
    bwd = solve_ivp(rhs, (0.0, -span), [v0], events=hit_minus, **kw)
    if fwd.status != 1 or bwd.status != 1:
        raise ProfileNonexistenceError("profile integration did not reach the end states")
    xi_r, xi_l = float(fwd.t[-1]), float(bwd.t[-1])

    n_r = max(int(np.ceil(xi_r / spacing)), 8)
    n_l = max(int(np.ceil(-xi_l / spacing)), 8)
    xs_r = np.linspace(0.0, xi_r, n_r + 1)
    xs_l = np.linspace(xi_l, 0.0, n_l + 1)[:-1]
    nodes = np.concatenate([xs_l, xs_r])
    v_nodes = np.concatenate([bwd.sol(xs_l)[0], fwd.sol(xs_r)[0]])
    v_nodes[0], v_nodes[-1] = bwd.y[0, -1], fwd.y[0, -1]
    if np.any(np.diff(v_nodes) <= 0.0):
        raise ProfileNonexistenceError("computed profile is not strictly monotone")
    slopes = _monotone_slopes(nodes, v_nodes, _profile_rhs(model, es, v_nodes))
    interp = CubicHermiteSpline(nodes, v_nodes, slopes, extrapolate=False)
    u_nodes = es.u_m - s * (v_nodes - es.v_m)
    pi_nodes = -s * (u_nodes - es.u_m) + (pressure(model, v_nodes) - pressure(model, es.v_m))
    return ShockProfile(
        end_states=es,
        model=model,
        nodes=nodes,
        v_nodes=v_nodes,
        u_nodes=u_nodes,
        pi_nodes=pi_nodes,
        rate_left=rate_left,
        rate_right=rate_right,
        interpolant=interp,
    )


@dataclass(frozen=True)
class ShockEval:
    v: np.ndarray
    u: np.ndarray
    pi: np.ndarray
    v_xi: np.ndarray
    u_xi: np.ndarray
    pi_xi: np.ndarray

    def __iter__(self):
        return iter((self.v, self.u, self.pi, self.v_xi, self.u_xi, self.pi_xi))


def eval_shock(profile: ShockProfile, xi) -> ShockEval:
    """Profile values and first derivatives at arbitrary xi.

    Inside the node range v comes from the monotone cubic; beyond it the
    linearized exponential tails take over. u and Pi follow algebraically from
    the integrated traveling-wave relations, and v_xi from the profile ODE.
    """
    es, model = profile.end_states, profile.model
    xi = np.asarray(xi, dtype=float)
    v = np.empty_like(xi)
    v_xi = np.empty_like(xi)
    lo, hi = profile.nodes[0], profile.nodes[-1]
    left, right = xi < lo, xi > hi
    mid = ~(left | right)
    v[mid] = profile.interpolant(xi[mid])
    v_xi[mid] = _profile_rhs(model, es, v[mid])
    d = (profile.v_nodes[0] - es.v_m) * np.exp(profile.rate_left * (xi[left] - lo))
    v[left], v_xi[left] = es.v_m + d, profile.rate_left * d
    d = (es.v_plus - profile.v_nodes[-1]) * np.exp(profile.rate_right * (xi[right] - hi))
    v[right], v_xi[right] = es.v_plus - d, -profile.rate_right * d
    s = es.sigma
    u = es.u_m - s * (v - es.v_m)
    pi = -_h(model, es, v)
    u_xi = -s * v_xi
    pi_xi = -_dh(model, es, v) * v_xi
    return ShockEval(v, u, pi, v_xi, u_xi, pi_xi)


# ---------------------------------------------------------------------------
# smoothed rarefaction


def burgers_normalization(q: float) -> float:
    """k_q with k_q * int_0^inf (1+y^2)^-q dy = 1."""
    if not q > 0.5:
        raise ValueError("q must exceed 1/2 for the kernel to be integrable")
    return 2.0 / float(beta_fn(0.5, q - 0.5))


@dataclass(frozen=True)
class RarefactionWave:
    model: GasModel
    v_minus: float
    u_minus: float
    v_m: float
    u_m: float
    eps: float
    q: float
    k_q: float
    w_minus: float
    w_m: float

    @property
    def delta_R(self) -> float:
        return abs(self.v_m - self.v_minus)

    def w0(self, x):
        z = self.eps * np.asarray(x, dtype=float)
        if self.q == 2.0:
            frac = (z / (1.0 + z * z) + np.arctan(z)) * (2.0 / np.pi)
        else:
            # k_q * int_0^z (1+y^2)^-q dy via y^2 = s/(1-s): regularized incomplete beta
            frac = np.sign(z) * betainc(0.5, self.q - 0.5, z * z / (1.0 + z * z))
        return 0.5 * (self.w_m + self.w_minus) + 0.5 * (self.w_m - self.w_minus) * frac

    def w0_x(self, x):
        z = self.eps * np.asarray(x, dtype=float)
        return 0.5 * (self.w_m - self.w_minus) * self.k_q * self.eps * (1.0 + z * z) ** (-self.q)

    def w0_xx(self, x):
        z = self.eps * np.asarray(x, dtype=float)
        amp = 0.5 * (self.w_m - self.w_minus) * self.k_q * self.eps
        return amp * (-2.0 * self.q * self.eps * z) * (1.0 + z * z) ** (-self.q - 1.0)


def build_rarefaction(
    model: GasModel, end_states: WaveEndStates, eps: float | None = None, q: float = 2.0
) -> RarefactionWave:
    es = end_states
    if eps is None:
        eps = es.delta_R**3 if es.delta_R > 0.0 else 1.0
    if not eps > 0.0:
        raise ValueError("smoothing parameter eps must be positive")
    if not q > 1.5:
        raise ValueError("tail exponent q must exceed 3/2")
    return RarefactionWave(
        model=model,
        v_minus=es.v_minus,
        u_minus=es.u_minus,
        v_m=es.v_m,
        u_m=es.u_m,
        eps=float(eps),
        q=float(q),
        k_q=burgers_normalization(q),
        w_minus=lambda1(model, es.v_minus),
        w_m=lambda1(model, es.v_m),
    )


def _characteristic_foot(raref: RarefactionWave, t: float, x: np.ndarray, guess=None, max_iter: int = 100):
    """Solve x = x0 + t*w0(x0) for x0 by bracketed Newton iteration."""
    if t == 0.0:
        return x.copy()
    lo = x - t * raref.w_m
    hi = x - t * raref.w_minus
    x0 = x - t * raref.w0(x) if guess is None else guess
    x0 = np.clip(x0, lo, hi)
    # residual floor set by rounding in x0 + t*w0(x0) - x
    tol = 1e-14 * (1.0 + np.abs(x) + t * abs(raref.w_minus))
    g_prev = np.full_like(x, np.inf)
    for _ in range(max_iter):
        g = x0 + t * raref.w0(x0) - x
        lo = np.where(g < 0.0, x0, lo)
        hi = np.where(g > 0.0, x0, hi)
        step = g / (1.0 + t * raref.w0_x(x0))
        if np.all((np.abs(g) <= tol) | (np.abs(step) <= 1e-15 * (1.0 + np.abs(x0)))):
            return x0 - step
        nxt = x0 - step
        # bisect when Newton leaves the bracket or stops halving the residual (cycling)
        bad = (nxt <= lo) | (nxt >= hi) | (np.abs(g) > 0.5 * g_prev)
        x0 = np.where(bad, 0.5 * (lo + hi), nxt)
        g_prev = np.abs(g)
    raise RootFindingError("characteristic root finding did not converge")


def burgers_w(raref: RarefactionWave, t: float, x):
    """Smooth Burgers solution ``w`` and ``w_x`` at (t, x)."""
    if t < 0.0:
        raise ValueError("t must be non-negative")
    w, w_x, _ = _burgers_full(raref, t, np.asarray(x, dtype=float))
    return w, w_x


_FOOT_CACHE: dict = {}


def _burgers_full(raref, t, x):
    x = np.atleast_1d(x)
    # warm start from the last solve on the same abscissae (successive time levels)
    key = (id(raref), x.shape, float(x.flat[0]), float(x.flat[-1]))
    guess = _FOOT_CACHE.get(key)
    x0 = _characteristic_foot(raref, float(t), x, guess=None if guess is None else guess[1])
    if x.size > 64:
        _FOOT_CACHE.clear()
        _FOOT_CACHE[key] = (t, x0)
    d1 = raref.w0_x(x0)
    jac = 1.0 + t * d1
    w = raref.w0(x0)
    w_x = d1 / jac
    w_xx = raref.w0_xx(x0) / jac**3
    shape = np.shape(x)
    return w.reshape(shape), w_x.reshape(shape), w_xx.reshape(shape)


@dataclass(frozen=True)
class RarefactionEval:
    v: np.ndarray
    u: np.ndarray
    v_x: np.ndarray
    u_x: np.ndarray
    v_xx: np.ndarray
    u_xx: np.ndarray
    v_t: np.ndarray
    u_t: np.ndarray
    u_xt: np.ndarray


def eval_rarefaction(raref: RarefactionWave, t: float, x) -> RarefactionEval:
    """(v, u) of the approximate 1-rarefaction and the derivatives needed by
    the composite-wave source terms."""
    model = raref.model
    g = model.gamma
    w, w_x, w_xx = _burgers_full(raref, t, np.asarray(x, dtype=float))
    if np.any(w >= 0.0):
        raise DomainError("Burgers state must stay negative (lambda1 < 0)")
    v = lambda1_inverse(model, w)
    v = np.asarray(v, dtype=float)
    a = -2.0 / (g + 1.0)
    dv_dw = a * v / w
    d2v_dw2 = a * (a - 1.0) * v / w**2
    v_x = dv_dw * w_x
    v_xx = d2v_dw2 * w_x**2 + dv_dw * w_xx
    v_t = dv_dw * (-w * w_x)
    zminus = z1(model, raref.v_minus, raref.u_minus)
    u = zminus - 2.0 * np.sqrt(g) / (g - 1.0) * v ** (-(g - 1.0) / 2.0)
    c = np.sqrt(g) * v ** (-(g + 1.0) / 2.0)
    u_x = c * v_x
    u_xx = c * v_xx - 0.5 * (g + 1.0) * c / v * v_x**2
    p1 = pressure(model, v, 1)
    p2 = pressure(model, v, 2)
    u_t = -p1 * v_x
    u_xt = -(p2 * v_x**2 + p1 * v_xx)
    return RarefactionEval(v, u, v_x, u_x, v_xx, u_xx, v_t, u_t, u_xt)


def exact_fan(model: GasModel, end_states: WaveEndStates, t: float, x):
    """Self-similar 1-rarefaction (v^r, u^r)(x/t) of the Riemann problem."""
    es = end_states
    wl, wr = lambda1(model, es.v_minus), lambda1(model, es.v_m)
    x = np.asarray(x, dtype=float)
    if t == 0.0:
        w = np.where(x > 0.0, wr, wl)
    else:
        w = np.clip(x / t, wl, wr)
    v = lambda1_inverse(model, w)
    u = z1(model, es.v_minus, es.u_minus) - z1(model, v, 0.0)
    return v, u


# ---------------------------------------------------------------------------
# composite wave


@dataclass(frozen=True)
class Waves:
    """Everything needed to evaluate the shifted composite wave."""

    model: GasModel
    end_states: WaveEndStates
    shock: ShockProfile | None
    raref: RarefactionWave
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def rarefaction_at(self, t: float, xi: np.ndarray) -> RarefactionEval:
        """Rarefaction in the moving frame; memoizes the last (t, grid) request."""
        key = (float(t), xi.shape, float(xi.flat[0]), float(xi.flat[-1]), float(np.sum(xi))) if xi.size else None
        hit = self._cache.get("raref")
        if key is not None and hit is not None and hit[0] == key:
            return hit[1]
        r = eval_rarefaction(self.raref, t, xi + self.end_states.sigma * t)
        if key is not None:
            self._cache["raref"] = (key, r)
        return r


def build_waves(
    model: GasModel,
    v_plus: float,
    u_plus: float,
    v_m: float,
    v_minus: float,
    eps: float | None = None,
    q: float = 2.0,
    tol: float = 1e-10,
) -> Waves:
    es = build_end_states(model, v_plus, u_plus, v_m, v_minus)
    shock = solve_shock_profile(model, es, tol=tol)
    return Waves(model, es, shock, build_rarefaction(model, es, eps, q))


@dataclass(frozen=True)
class CompositeEval:
    v: np.ndarray
    u: np.ndarray
    pi: np.ndarray
    shock: ShockEval
    raref: RarefactionEval


def composite_bundle(waves: Waves, t: float, xi, X: float = 0.0) -> CompositeEval:
    es = waves.end_states
    xi = np.asarray(xi, dtype=float)
    r = waves.rarefaction_at(t, xi)
    if waves.shock is None:
        z = np.zeros_like(xi)
        s = ShockEval(np.full_like(xi, es.v_m), np.full_like(xi, es.u_m), z, z, z, z)
    else:
        s = eval_shock(waves.shock, xi - X)
    v = r.v + s.v - es.v_m
    if np.any(v <= 0.0):
        raise WaveConfigurationError("composite specific volume is non-positive")
    u = r.u + s.u - es.u_m
    pi = s.pi + waves.model.mu * r.u_x / r.v
    return CompositeEval(v, u, pi, s, r)


def eval_composite(waves: Waves, t: float, xi, X: float = 0.0):
    c = composite_bundle(waves, t, xi, X)
    return c.v, c.u, c.pi
