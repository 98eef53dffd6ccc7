import numpy as np
import pytest
from hypothesis import given, strategies as st

from polewarp.benchmark import rk4_sample
from polewarp.dtengine import (CoefficientTable, DegenerateInitialStateError, PropagationError,
                               indicator_coefficients, propagate_coefficients)
from polewarp.models import WSCC9Model, lorenz_model, smib_model
from polewarp.models.base import DynamicalModel
from polewarp.models.equilibrium import solve_algebraic
from polewarp.precision import TaylorSeries, cauchy_term, make_context, series_mul
from polewarp.timewarp import IdentityMap, TimeContractionMap, inverse_map, theta_series

from dt_oracles import interpolated_tau_coefficients

CTX = make_context(50)


class ToyDAE(DynamicalModel):
    """x' = -x + v, 0 = v - x^2: solution x = 1 / (1 + (1/x0 - 1) e^t)."""

    name = "toy"
    n, m = 1, 1
    state_names = ("x",)
    algebraic_names = ("v",)

    def __init__(self, gain=1):
        self.gain = gain

    def f(self, ops, x, v):
        return [-x[0] + v[0]]

    def g(self, ops, x, v):
        return [self.gain * v[0] - x[0] * x[0]]

    def jacobians(self, ops, x, v):
        return [[-ops.one]], [[ops.one]], [[-2 * x[0]]], [[ops.convert(self.gain)]]

    def dt_f_coeff(self, st, k):
        return [-st.X[0][k] + st.V[0][k]]

    def dt_g_coeff(self, st, k):
        return [self.gain * st.V[0][k] - cauchy_term(st.ctx, st.X[0], st.X[0], k)]


def test_first_coefficient_is_vector_field():
    m = lorenz_model("10", "28", "8/3")
    tab = propagate_coefficients(m, IdentityMap(), [1, 0, 0], [], 3, CTX)
    assert [s[1] for s in tab.X] == [-10, 28, 0]


def test_first_coefficient_scaled_by_theta0():
    m = lorenz_model("10", "28", "8/3")
    tab = propagate_coefficients(m, TimeContractionMap(K=1, p=3), [1, 0, 0], [], 3, CTX)
    assert all(abs(s[1] - c / CTX.mpf(3)) < 1e-45 for s, c in zip(tab.X, [-10, 28, 0]))


def test_order0_is_initial_condition():
    tab = propagate_coefficients(smib_model(), TimeContractionMap(K=5), [0.7, 1.5], [], 5, CTX)
    assert [s[0] for s in tab.X] == [CTX.mpf(0.7), CTX.mpf(1.5)]
    assert all(s.order == 5 for s in tab.X)


def test_toy_dae_matches_closed_form():
    x0 = CTX.mpf("0.4")
    tab = propagate_coefficients(ToyDAE(), IdentityMap(), [x0], [x0 * x0], 10, CTX)
    exact = CTX.taylor(lambda t: 1 / (1 + (1 / x0 - 1) * CTX.exp(t)), 0, 10)
    for a, b in zip(tab.X[0], exact):
        assert abs(a - b) < CTX.mpf(10) ** -30
    for k in range(11):
        assert abs(tab.V[0][k] - cauchy_term(CTX, tab.X[0].coeffs, tab.X[0].coeffs, k)) < 1e-40


def test_singular_algebraic_jacobian():
    with pytest.raises(PropagationError):
        propagate_coefficients(ToyDAE(gain=0), IdentityMap(), [0], [0], 3, CTX)


def test_inconsistent_initial_condition():
    with pytest.raises(PropagationError):
        propagate_coefficients(ToyDAE(), IdentityMap(), [0.5], [1.0], 3, CTX)


def test_bad_dimensions_and_order():
    with pytest.raises(ValueError):
        propagate_coefficients(smib_model(), IdentityMap(), [0.1], [], 3, CTX)
    with pytest.raises(ValueError):
        propagate_coefficients(smib_model(), IdentityMap(), [0.1, 0.0], [], 0, CTX)


def _compose(outer, inner, order):
    """Series of outer(inner(tau)) for inner(0) = 0, by Horner in series arithmetic."""
    acc = TaylorSeries.constant(CTX, outer[order], order)
    for k in range(order - 1, -1, -1):
        acc = series_mul(acc, inner, order) + TaylorSeries.constant(CTX, outer[k], order)
    return acc


def test_identity_map_reduction():
    """theta = 1 gives the ordinary Taylor series; composing it with t(tau)
    must reproduce the mapped series exactly."""
    m = lorenz_model(1, 2, 1)
    x0 = [0.5, 0.5, 0.5]
    order = 12
    tm = TimeContractionMap(K=1)
    plain = propagate_coefficients(m, IdentityMap(), x0, [], order, CTX)
    mapped = propagate_coefficients(m, tm, x0, [], order, CTX)
    th = theta_series(tm, order, CTX)
    t_of_tau = TaylorSeries(tuple([CTX.zero] + [th[k - 1] / k for k in range(1, order + 1)]), CTX)
    for sp, sm in zip(plain.X, mapped.X):
        comp = _compose(sp, t_of_tau, order)
        for a, b in zip(comp, sm):
            assert abs(a - b) <= CTX.mpf(10) ** -40


@pytest.mark.parametrize("params,x0", [((1, 2, 1), [0.5, 0.5, 0.5]), ((10, 28, "8/3"), [2, -1, 3])])
def test_tau_coefficients_match_rk4_divided_differences(params, x0):
    ctx = make_context(40)
    sig, rho, beta = params
    m = lorenz_model(sig, rho, ctx.mpf(8) / 3 if beta == "8/3" else beta)
    tm = TimeContractionMap(K=1)
    tab = propagate_coefficients(m, tm, x0, [], 8, ctx)
    ref = interpolated_tau_coefficients(m, tm, x0, 8, ctx)
    for k in range(9):
        scale = max(abs(tab.X[i][k]) for i in range(3))
        err = max(abs(ref[i][k] - tab.X[i][k]) for i in range(3))
        assert err <= 1e-6 * scale


def test_doubling_order_keeps_lower_coefficients():
    m = lorenz_model(1, 2, 1)
    tm = TimeContractionMap(K=1)
    a = propagate_coefficients(m, tm, [0.5, 0.5, 0.5], [], 10, CTX)
    b = propagate_coefficients(m, tm, [0.5, 0.5, 0.5], [], 20, CTX)
    for sa, sb in zip(a.X, b.X):
        assert list(sa) == list(sb.coeffs[:11])


def test_truncated_series_matches_oracle_at_small_tau():
    m = lorenz_model(1, 2, 1)
    tm = TimeContractionMap(K=1)
    x0 = [0.5, 0.5, 0.5]
    tab = propagate_coefficients(m, tm, x0, [], 24, CTX)
    taus = [0.01, 0.03, 0.05]
    ref = rk4_sample(m, x0, [inverse_map(tm, t) for t in taus], max_dt=1e-4)
    for tau, xr in zip(taus, ref):
        xs = [float(v) for v in tab.evaluate_states(tau)]
        assert xs == pytest.approx(list(xr), rel=1e-8)


@pytest.mark.parametrize("load_model", ["constant_impedance", "constant_power"])
def test_wscc_series_matches_oracle_at_small_tau(load_model):
    post = WSCC9Model(network_state="post", load_model=load_model)
    xo, vo = post.operating_point()
    x0 = list(np.array(xo) + [0.3, -0.2, 0.1, 0.002, -0.003, 0.001])
    v0 = solve_algebraic(post, CTX, x0, post.solve_algebraic_float(x0, vo))
    tm = TimeContractionMap(K=5)
    tab = propagate_coefficients(post, tm, x0, v0, 30, CTX)
    taus = [0.02, 0.05]
    ref = rk4_sample(post, x0, [inverse_map(tm, t) for t in taus], max_dt=1e-4,
                     v0=[float(c) for c in v0])
    for tau, xr in zip(taus, ref):
        xs = [float(v) for v in tab.evaluate_states(tau)]
        assert xs == pytest.approx(list(xr), rel=1e-8, abs=1e-10)
    # algebraic series keep g = 0 along the expansion
    x = tab.evaluate_states(CTX.mpf("0.03"))
    v = [s(CTX.mpf("0.03")) for s in tab.V]
    assert max(abs(r) for r in post.g(CTX, x, v)) < 1e-12


# --- indicator ---------------------------------------------------------------------

def _table(series):
    return CoefficientTable([TaylorSeries.from_values(CTX, s) for s in series], [],
                            order=len(series[0]) - 1)


def test_indicator_constant_offset():
    ind = indicator_coefficients(_table([[3, 0, 0, 0], [4, 0, 0, 0]]), [0, 0])
    assert ind.h[0] == CTX.mpf(-1) / 25
    assert all(c == 0 for c in list(ind.h)[1:])


def test_indicator_binomial_example():
    ind = indicator_coefficients(_table([[0, 1] + [0] * 8]), [1])
    assert list(ind.h) == [-(k + 1) for k in range(10)]


def test_indicator_degenerate():
    with pytest.raises(DegenerateInitialStateError):
        indicator_coefficients(_table([[1, 1, 0]]), [1])


@given(st.lists(st.floats(-2, 2), min_size=3, max_size=3), st.integers(5, 25))
def test_convolution_identity(x0, order):
    m = lorenz_model(1, 2, 1)
    if sum((a - 1) ** 2 for a in x0) < 1e-3:
        return
    tab = propagate_coefficients(m, TimeContractionMap(K=1), x0, [], order, CTX)
    ind = indicator_coefficients(tab, [1, 1, 1])
    assert ind.h[0] < 0
    for k in range(order + 1):
        c = cauchy_term(CTX, ind.h.coeffs, ind.d.coeffs, k)
        scale = max(abs(a) for a in ind.h.coeffs[: k + 1]) * max(abs(a) for a in ind.d.coeffs)
        assert abs(c - (-1 if k == 0 else 0)) <= CTX.mpf(10) ** (5 - 50) * max(1, scale)


def test_lorenz_stable_partial_sums_trend_down():
    m = lorenz_model(1, 2, 1)
    tab = propagate_coefficients(m, TimeContractionMap(K=1), [0.5] * 3, [], 80, make_context(81))
    ind = indicator_coefficients(tab, [1, 1, 1])
    assert ind.h[0] < 0
    vals = [float(ind.h(t)) for t in (0.5, 0.8, 0.9)]
    assert vals[0] > vals[1] > vals[2]
