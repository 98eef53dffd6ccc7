"""Differential-transformation propagation of Taylor coefficients in tau.

With ``dx/dtau = theta(tau) f(x, v)`` and ``0 = g(x, v)`` the coefficients
obey

    X(k+1) = (theta * F)(k) / (k + 1)
    J_v V(k+1) = -(order-(k+1) terms of g not involving V(k+1))

where ``F(k)`` is the DT image of the vector field, assembled by each model
from Cauchy products and the sine/cosine pair recurrence below.  Order ``k``
depends on every lower order, so the loop over ``k`` is sequential.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .precision import (
    Context,
    SingularMatrixError,
    TaylorSeries,
    cauchy_term,
    lu_factor,
    lu_solve,
    reciprocal_coeffs,
)
from .timewarp import theta_series

DEGENERATE_D0 = 1e-20


class PropagationError(RuntimeError):
    pass


class DegenerateInitialStateError(ValueError):
    """Initial state coincides with the SEP; the verdict is trivially Stable."""


def sincos_step(ctx: Context, D: list, S: list, C: list, k: int) -> None:
    """Append order-``k`` coefficients of sin(delta), cos(delta).

    ``S(k) = (1/k) sum_{j=1..k} j D(j) C(k-j)`` and
    ``C(k) = -(1/k) sum_{j=1..k} j D(j) S(k-j)``; needs ``D`` through ``k``.
    """
    jd = [j * D[j] for j in range(1, k + 1)]
    # pairs (j D(j), C(k-j)) for j = 1..k
    s = ctx.fdot(jd, C[k - 1::-1]) if k > 0 else ctx.zero
    c = ctx.fdot(jd, S[k - 1::-1]) if k > 0 else ctx.zero
    S.append(s / k)
    C.append(-c / k)


@dataclass
class CoefficientTable:
    X: list  # per-state TaylorSeries
    V: list  # per-algebraic TaylorSeries
    aux: dict = field(default_factory=dict)
    order: int = 0

    @property
    def ctx(self):
        return self.X[0].ctx

    def state_series(self):
        return self.X

    def evaluate_states(self, tau):
        return [s(tau) for s in self.X]


@dataclass
class IndicatorSeries:
    h: TaylorSeries
    d: TaylorSeries
    x_star: tuple

    @property
    def order(self) -> int:
        return self.h.order


def propagate_coefficients(model, tmap, x0, v0, order: int, ctx: Context,
                           consistency_tol=None) -> CoefficientTable:
    """Taylor coefficients of x(tau), v(tau) through ``order``."""
    if order < 1:
        raise ValueError("order must be at least 1")
    if len(x0) != model.n or len(v0) != model.m:
        raise ValueError(
            f"expected {model.n} states and {model.m} algebraics, got {len(x0)} and {len(v0)}")
    theta = theta_series(tmap, order, ctx).coeffs
    st = model.dt_start(ctx, x0, v0)

    lu = None
    if model.m:
        if consistency_tol is None:
            consistency_tol = ctx.mpf(10) ** (-(ctx.dps // 2))
        g0 = model.g(ctx, [s[0] for s in st.X], [s[0] for s in st.V])
        if max(abs(r) for r in g0) > consistency_tol:
            raise PropagationError(
                f"inconsistent initial condition: |g(x0, v0)| = {ctx.nstr(max(abs(r) for r in g0), 5)}")
        gv = model.jacobians(ctx, [s[0] for s in st.X], [s[0] for s in st.V])[3]
        try:
            lu = lu_factor(ctx, gv)
        except SingularMatrixError as exc:
            raise PropagationError("singular algebraic Jacobian J_v") from exc

    F = [[] for _ in range(model.n)]
    for k in range(order):
        fk = model.dt_f_coeff(st, k)
        for i in range(model.n):
            F[i].append(fk[i])
            st.X[i].append(cauchy_term(ctx, theta, F[i], k) / (k + 1))
        model.dt_advance_aux(st, k + 1)
        if model.m:
            for j in range(model.m):
                st.V[j].append(ctx.zero)
            r = model.dt_g_coeff(st, k + 1)
            dv = lu_solve(ctx, lu, [-c for c in r])
            for j in range(model.m):
                st.V[j][k + 1] = dv[j]

    X = [TaylorSeries(tuple(s), ctx) for s in st.X]
    V = [TaylorSeries(tuple(s), ctx) for s in st.V]
    aux = {k: TaylorSeries(tuple(v[: order + 1]), ctx) for k, v in st.aux.items()
           if isinstance(v, list) and len(v) > order}
    return CoefficientTable(X=X, V=V, aux=aux, order=order)


def indicator_coefficients(table: CoefficientTable, x_star, order: int | None = None,
                           degenerate_tol: float = DEGENERATE_D0) -> IndicatorSeries:
    """Series of ``h = -1 / |x(tau) - x*|^2``."""
    ctx = table.ctx
    if order is None:
        order = table.order
    if order > table.order:
        raise ValueError(f"table has order {table.order}, asked for {order}")
    xs = [ctx.convert(c) for c in x_star]
    errs = []
    for s, c in zip(table.X, xs):
        e = list(s.coeffs[: order + 1])
        e[0] = e[0] - c
        errs.append(e)
    d = [ctx.fsum(cauchy_term(ctx, e, e, k) for e in errs) for k in range(order + 1)]
    if d[0] < degenerate_tol:
        raise DegenerateInitialStateError(
            f"initial state is within {degenerate_tol:g} (squared distance) of the SEP")
    h = [-c for c in reciprocal_coeffs(ctx, d, order)]
    return IndicatorSeries(h=TaylorSeries(tuple(h), ctx), d=TaylorSeries(tuple(d), ctx),
                           x_star=tuple(xs))
