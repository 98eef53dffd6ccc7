"""Newton solve for the designated stable equilibrium point."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..precision import SingularMatrixError, lu_factor, lu_solve
from .base import FLOAT, ModelError

MAX_NEWTON = 50


class EquilibriumError(ModelError):
    pass


@dataclass(frozen=True)
class EquilibriumPoint:
    x_star: tuple
    v_star: tuple
    residual_norm: object
    iterations: int
    stable: bool  # linearisation has no eigenvalue with positive real part

    def to_dict(self) -> dict:
        return {"x_star": [str(c) for c in self.x_star], "v_star": [str(c) for c in self.v_star],
                "residual_norm": float(self.residual_norm), "iterations": self.iterations,
                "stable": self.stable}


def _stacked(model, ctx, x, v, x_ref):
    keep = [i for i in range(model.n) if i not in model.redundant_f_rows]
    fx, fv, gx, gv = model.jacobians(ctx, x, v)
    fval = model.f(ctx, x, v)
    gval = model.g(ctx, x, v)
    res = [fval[i] for i in keep] + list(gval)
    jac = [list(fx[i]) + list(fv[i]) for i in keep]
    jac += [list(gx[i]) + list(gv[i]) for i in range(model.m)]
    for r, grad in model.sep_constraints(ctx, x, x_ref):
        res.append(r)
        jac.append(list(grad) + [ctx.zero] * model.m)
    return res, jac


def linear_stability(model, x, v, tol=1e-8) -> bool:
    """Eigenvalue test of the reduced Jacobian ``fx - fv gv^-1 gx`` in float64.

    Eigenvalues up to ``tol`` count as neutral (e.g. the COI angle mode).
    """
    xf, vf = [float(c) for c in x], [float(c) for c in v]
    fx, fv, gx, gv = model.jacobians(FLOAT, xf, vf)
    A = np.array(fx, dtype=float)
    if model.m:
        A = A - np.array(fv, dtype=float) @ np.linalg.solve(np.array(gv, dtype=float),
                                                            np.array(gx, dtype=float))
    return bool(np.max(np.linalg.eigvals(A).real) <= tol)


def _newton_step(model, ctx, x, v, res, jac):
    if len(jac) != model.n + model.m:
        raise EquilibriumError("stacked SEP system is not square")
    try:
        step = lu_solve(ctx, lu_factor(ctx, jac), [-r for r in res])
    except SingularMatrixError as exc:
        raise EquilibriumError("singular Jacobian in SEP solve") from exc
    return ([a + b for a, b in zip(x, step[: model.n])],
            [a + b for a, b in zip(v, step[model.n:])])


def find_sep(model, ctx, x_guess, v_guess=None, tol=None, max_iter=MAX_NEWTON,
             x_ref=None) -> EquilibriumPoint:
    """Newton iteration on ``[f; g] = 0`` at the precision of ``ctx``.

    The residual target defaults to ``10**-(dps/2)``; once it is met one
    extra step is taken so the point is accurate to nearly full precision.
    Models with a continuous symmetry add gauge rows through
    ``sep_constraints``, referenced to ``x_ref`` (default: the guess).
    """
    if tol is None:
        tol = ctx.mpf(10) ** (-(ctx.dps // 2))
    x = [ctx.convert(c) for c in x_guess]
    v = [ctx.convert(c) for c in (v_guess if v_guess is not None else [0] * model.m)]
    if len(x) != model.n or len(v) != model.m:
        raise EquilibriumError("guess has the wrong dimension")
    x_ref = list(x) if x_ref is None else [ctx.convert(c) for c in x_ref]
    for it in range(max_iter + 1):
        res, jac = _stacked(model, ctx, x, v, x_ref)
        norm = max(abs(r) for r in res)
        if norm <= tol:
            break
        if it == max_iter:
            raise EquilibriumError(
                f"Newton did not converge in {max_iter} iterations (|F| = {ctx.nstr(norm, 5)})")
        x, v = _newton_step(model, ctx, x, v, res, jac)
    if norm > 0:
        x2, v2 = _newton_step(model, ctx, x, v, res, jac)
        norm2 = max(abs(r) for r in _stacked(model, ctx, x2, v2, x_ref)[0])
        if norm2 < norm:
            x, v, norm = x2, v2, norm2
    return EquilibriumPoint(tuple(x), tuple(v), norm, it, linear_stability(model, x, v))


def solve_algebraic(model, ctx, x, v_guess, tol=None, max_iter=MAX_NEWTON) -> list:
    """Newton on ``g(x, .) = 0`` at working precision with ``x`` held fixed."""
    if not model.m:
        return []
    if tol is None:
        tol = ctx.mpf(10) ** (-(ctx.dps // 2))
    x = [ctx.convert(c) for c in x]
    v = [ctx.convert(c) for c in v_guess]
    for _ in range(max_iter):
        r = model.g(ctx, x, v)
        norm = max(abs(c) for c in r)
        try:
            dv = lu_solve(ctx, lu_factor(ctx, model.jacobians(ctx, x, v)[3]), [-c for c in r])
        except SingularMatrixError as exc:
            raise EquilibriumError("singular J_v in algebraic solve") from exc
        v = [a + b for a, b in zip(v, dv)]
        if norm <= tol:
            return v
    raise EquilibriumError(f"algebraic solve did not converge (|g| = {ctx.nstr(norm, 5)})")
