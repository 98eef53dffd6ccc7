import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polewarp.pade import (PadeError, PoleHitError, RootSet, build_pade, denominator_roots,
                           evaluate_pade, numerator_roots, polynomial_roots,
                           smallest_positive_real_root)
from polewarp.precision import TaylorSeries, cauchy_term, make_context, reciprocal_coeffs

from rational_cases import match_error, pole_digits, random_rational

CTX = make_context(50)


def series(values, ctx=CTX):
    return TaylorSeries(tuple(ctx.convert(v) for v in values), ctx)


def test_geometric_series_gives_simple_pole():
    a = build_pade(series([1] * 6), 0, 1)
    assert a.P == (1,)
    assert [float(q) for q in a.Q] == [1.0, -1.0]
    assert evaluate_pade(a, CTX.mpf("0.5")) == 2
    assert evaluate_pade(a, 0) == 1


def test_exp_one_one():
    h = series([CTX.one / CTX.factorial(k) for k in range(4)])
    a = build_pade(h, 1, 1)
    assert [float(c) for c in a.P] == pytest.approx([1, 0.5])
    assert [float(c) for c in a.Q] == pytest.approx([1, -0.5])


def test_double_pole():
    a = build_pade(series([-(k + 1) for k in range(5)]), 0, 2)
    assert [float(q) for q in a.Q] == pytest.approx([1, -2, 1])
    roots = denominator_roots(a)
    assert all(abs(r - 1) < 1e-20 for r in roots.roots)


def test_evaluating_at_pole_signals():
    a = build_pade(series([1] * 3), 0, 1)
    with pytest.raises(PoleHitError):
        evaluate_pade(a, 1)


def test_too_short_series_rejected():
    with pytest.raises(PadeError):
        build_pade(series([1, 2, 3]), 2, 2)


def test_degenerate_table_reduces_denominator():
    # a polynomial has no denominator: every Toeplitz system is singular
    a = build_pade(series([1, 2, 0, 0, 0, 0, 0]), 3, 3)
    assert a.M_deg == 0 and a.reductions == 3
    assert [float(c) for c in a.P] == [1, 2, 0, 0]


def test_factored_denominator_roots():
    rs = polynomial_roots(CTX, [1, CTX.mpf(-3) / 2, CTX.mpf(1) / 2])  # (1-t)(1-t/2)
    got = sorted(float(r.real) for r in rs.roots)
    assert got == pytest.approx([1.0, 2.0], abs=1e-30)
    assert rs.converged and rs.condition_hint <= CTX.mpf(10) ** (10 - CTX.dps)


def test_root_of_linear_q():
    assert polynomial_roots(CTX, [1, -1]).roots == [1]


def test_smallest_positive_real_root_selection():
    r = RootSet([CTX.mpc(2), CTX.mpc(1)], [0, 0])
    assert smallest_positive_real_root(r).tau_pole == 1
    r = RootSet([CTX.mpc("0.5", "0.3"), CTX.mpc("0.5", "-0.3"), CTX.mpc("1.2")], [0] * 3)
    sel = smallest_positive_real_root(r, imag_tol=1e-6)
    assert sel.tau_pole == CTX.mpf("1.2") and sel.complex_excluded == 2
    r = RootSet([CTX.mpc(-1), CTX.mpc(0)], [0, 0])
    assert smallest_positive_real_root(r).tau_pole is None


def test_froissart_doublet_filtered():
    # 1/(1 - t) times (t - 0.4)/(t - 0.4 - 1e-15)
    ctx = make_context(60)
    d = ctx.mpf("0.4") + ctx.mpf("1e-15")
    # P = t - 0.4, Q = (1 - t)(t - d), rescaled to q0 = 1
    P = [-ctx.mpf("0.4"), ctx.one]
    Q = [-d, 1 + d, -ctx.one]
    scale = Q[0]
    P = [p / scale for p in P]
    Q = [q / scale for q in Q]
    n = 12
    rq = reciprocal_coeffs(ctx, Q + [ctx.zero] * (n + 1 - len(Q)), n)
    h = TaylorSeries(tuple(cauchy_term(ctx, P + [ctx.zero] * (n - 1), rq, k)
                           for k in range(n + 1)), ctx)
    a = build_pade(h, 1, 2)
    poles, zeros = denominator_roots(a), numerator_roots(a)
    sel = smallest_positive_real_root(poles, zeros=zeros, doublet_tol=ctx.mpf(10) ** -12)
    assert len(sel.filtered) == 1
    assert sel.filtered[0][0] == pytest.approx(0.4, abs=1e-12)
    assert abs(sel.tau_pole - 1) < ctx.mpf(10) ** -30
    unfiltered = smallest_positive_real_root(poles)
    assert float(unfiltered.tau_pole) == pytest.approx(0.4)


@settings(max_examples=40)
@given(st.integers(1, 20), st.integers(0, 19), st.integers(0, 2 ** 32 - 1))
def test_series_match_random_h(L, dm, seed):
    """Random h often yields poles near 0; the linearised conditions hold to
    working precision, the recomputed series up to the growth of 1/Q."""
    M = max(1, L - dm)
    rng = np.random.default_rng(seed)
    h = series([rng.uniform(-1, 1) for _ in range(L + M + 1)])
    a = build_pade(h, L, M)
    assert a.reductions <= M
    tol = CTX.mpf(10) ** (10 - CTX.dps)
    n = L + M
    for k in range(n + 1):
        qh = CTX.fsum(a.Q[j] * h[k - j] for j in range(min(k, a.M_deg) + 1))
        assert abs(qh - (a.P[k] if k <= L else 0)) <= tol
    growth = max(abs(c) for c in reciprocal_coeffs(CTX, list(a.Q) + [0] * n, n))
    assert match_error(a, h) <= tol * max(1, growth)


@settings(max_examples=30)
@given(st.integers(0, 12), st.integers(1, 12), st.integers(0, 2 ** 32 - 1))
def test_pole_exactness_and_residuals(L, M, seed):
    ctx = make_context(50)
    case = random_rational(ctx, np.random.default_rng(seed), L, M)
    a = build_pade(case.h, L, M)
    roots = denominator_roots(a)
    assert len(roots) == M
    assert pole_digits(roots.roots, case.poles) >= ctx.dps / 2
    qmax = max(abs(q) for q in a.Q)
    for z in roots.roots:
        val = sum(q * z ** j for j, q in enumerate(a.Q))
        assert abs(val) <= ctx.mpf(10) ** (10 - ctx.dps) * qmax * max(1, abs(z)) ** M
