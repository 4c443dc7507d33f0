import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relaxcns.eos import (
    DomainError,
    GasModel,
    characteristic_data,
    lambda1,
    lambda1_inverse,
    pressure,
    relative_quantity,
)

G2 = GasModel(gamma=2.0, mu=1.0, tau=0.01)
volumes = st.floats(min_value=0.5, max_value=3.0)
gammas = st.floats(min_value=1.05, max_value=3.0)


def test_pressure_values():
    assert pressure(G2, 1.0) == 1.0
    assert pressure(G2, 1.0, order=1) == -2.0
    assert pressure(G2, 1.2) == pytest.approx(1 / 1.44, rel=1e-15)
    # d2 and d3 of v^-2 at v=1: 6 and -24
    assert pressure(G2, 1.0, order=2) == 6.0
    assert pressure(G2, 1.0, order=3) == -24.0


@pytest.mark.parametrize("bad", [0.0, -1.0, np.nan])
def test_pressure_domain(bad):
    with pytest.raises(DomainError):
        pressure(G2, bad)


def test_pressure_order_cap():
    with pytest.raises(ValueError, match="unsupported"):
        pressure(G2, 1.0, order=4)


@pytest.mark.parametrize("kw", [dict(gamma=1.0), dict(mu=0.0), dict(tau=-1e-3)])
def test_model_validation(kw):
    with pytest.raises(ValueError):
        GasModel(**kw)


@given(v=volumes, g=gammas)
def test_pressure_derivative_matches_finite_difference(v, g):
    m = GasModel(gamma=g)
    h = 1e-5
    for order in (1, 2, 3):
        fd = (pressure(m, v + h, order - 1) - pressure(m, v - h, order - 1)) / (2 * h)
        assert fd == pytest.approx(pressure(m, v, order), rel=1e-6)


def test_relative_quantities_examples():
    assert relative_quantity(G2, "potential", 1.0, 1.0) == 0.0
    assert relative_quantity(G2, "potential", 2.0, 1.0) == pytest.approx(0.5, abs=1e-15)
    assert relative_quantity(G2, "pressure", 2.0, 1.0) == pytest.approx(1.25, abs=1e-15)
    with pytest.raises(DomainError):
        relative_quantity(G2, "pressure", -1.0, 1.0)


def test_relative_quantities_nonnegative_dense():
    v, w = np.meshgrid(np.linspace(0.5, 3, 201), np.linspace(0.5, 3, 201))
    for which in ("pressure", "potential"):
        r = relative_quantity(G2, which, v, w)
        off = v != w
        assert np.all(r[off] > 0.0)
        assert np.all(r[~off] == 0.0)


# C fitted once on v, w in [0.5, 2] (v_ref = 1) for gamma = 2 and frozen:
# max |v-w|^2 / H(v|w) = 8.0 at (v, w) = (2, 2 - 0) corner limit, max over p(v|w) = 4.0
QUAD_BOUND_C = 8.5


@given(v=st.floats(0.5, 2.0), w=st.floats(0.5, 2.0))
def test_quadratic_lower_bound(v, w):
    d2 = (v - w) ** 2
    assert d2 <= QUAD_BOUND_C * relative_quantity(G2, "potential", v, w) + 1e-15
    assert d2 <= QUAD_BOUND_C * relative_quantity(G2, "pressure", v, w) + 1e-15


def test_fitted_constant_is_tight():
    v, w = np.meshgrid(np.linspace(0.5, 2, 301), np.linspace(0.5, 2, 301))
    off = np.abs(v - w) > 1e-9
    ratio_h = ((v - w) ** 2)[off] / relative_quantity(G2, "potential", v, w)[off]
    ratio_p = ((v - w) ** 2)[off] / relative_quantity(G2, "pressure", v, w)[off]
    assert 7.0 < max(ratio_h.max(), ratio_p.max()) < QUAD_BOUND_C


def test_characteristic_data_examples():
    l1, l2, z = characteristic_data(G2, 1.0, 0.0)
    assert l1 == pytest.approx(-np.sqrt(2), abs=1e-15)
    assert l2 == -l1
    assert z == pytest.approx(2 * np.sqrt(2), abs=1e-15)
    assert lambda1(G2, 0.9) == pytest.approx(-1.656347, abs=1e-6)
    assert lambda1(G2, 0.9) == pytest.approx(-np.sqrt(2) * 0.9**-1.5, rel=1e-15)


@given(v=volumes, u=st.floats(-5, 5), c=st.floats(-5, 5))
def test_z1_additive_in_u(v, u, c):
    z_a = characteristic_data(G2, v, u + c)[2]
    z_b = characteristic_data(G2, v, u)[2]
    assert z_a - z_b == pytest.approx(c, abs=1e-12)


@given(g=gammas)
@settings(max_examples=30)
def test_lambda1_increasing_and_invertible(g):
    m = GasModel(gamma=g)
    v = np.linspace(0.3, 4.0, 400)
    l1 = lambda1(m, v)
    assert np.all(np.diff(l1) > 0.0)
    assert np.allclose(lambda1_inverse(m, l1), v, rtol=1e-13)
    # lambda1 = -sqrt(-p')
    assert np.allclose(l1, -np.sqrt(-pressure(m, v, 1)), rtol=1e-14)


def test_z1_is_antiderivative_of_lambda1():
    from scipy.integrate import quad

    z = lambda v: characteristic_data(G2, v, 0.0)[2]  # noqa: E731
    ref, _ = quad(lambda s: lambda1(G2, s), 0.9, 1.3, epsabs=1e-14)
    assert z(1.3) - z(0.9) == pytest.approx(ref, abs=1e-12)
