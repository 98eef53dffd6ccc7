"""Common model interface for ``x' = f(x, v)``, ``0 = g(x, v)``.

Residuals and Jacobians are written once against a "numeric namespace" that
is either an mpmath context or :data:`FLOAT` (plain Python floats), so the
high-precision pipeline and the float RK4 oracle share one set of equations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np


class FloatOps:
    """Minimal stand-in for an mpmath context over Python floats."""

    zero = 0.0
    one = 1.0
    pi = math.pi
    sin = staticmethod(math.sin)
    cos = staticmethod(math.cos)
    sqrt = staticmethod(math.sqrt)
    asin = staticmethod(math.asin)

    @staticmethod
    def mpf(v):
        return float(parse_param(v))

    convert = mpf

    @staticmethod
    def fsum(it):
        return math.fsum(it)


FLOAT = FloatOps()


def parse_param(value):
    """Accept numbers, decimal strings and ``"p/q"`` fraction strings.

    Returns an int, float, str or Fraction suitable for ``ctx.mpf``;
    fractions are kept exact so ``"8/3"`` is correct at any precision.
    """
    if isinstance(value, str) and "/" in value:
        return Fraction(value.replace(" ", ""))
    return value


def hp(ops, value):
    value = parse_param(value)
    if isinstance(value, Fraction):
        if ops is FLOAT:
            return float(value)
        return ops.mpf(value.numerator) / value.denominator
    return ops.mpf(value)


class ModelError(ValueError):
    pass


@dataclass
class DTState:
    """Working storage for DT propagation: coefficient lists grown in place."""

    ctx: object
    X: list
    V: list
    aux: dict = field(default_factory=dict)


class DynamicalModel:
    """Base class.  Subclasses fill in the residuals and DT hooks.

    ``n`` states, ``m`` algebraic variables (0 for ODEs).
    """

    name = "model"
    n = 0
    m = 0
    state_names: tuple = ()
    algebraic_names: tuple = ()
    # rows of f that are identically dependent (dropped in the SEP solve)
    redundant_f_rows: tuple = ()
    # blow-up bound on |x| for the oracle; power systems override
    blowup_norm = 1e6

    # --- residuals -----------------------------------------------------
    def f(self, ops, x, v):
        raise NotImplementedError

    def g(self, ops, x, v):
        return []

    def jacobians(self, ops, x, v):
        """Return ``(fx, fv, gx, gv)`` as nested lists."""
        raise NotImplementedError

    def sep_constraints(self, ops, x, x_ref):
        """Extra ``(residual, grad_x)`` rows pinning a continuous symmetry."""
        return []

    # --- float fast paths (oracle) ---------------------------------------
    def f_float(self, x, v):
        return np.array(self.f(FLOAT, list(x), list(v)), dtype=float)

    def solve_algebraic_float(self, x, v_guess, tol=1e-12, maxiter=20):
        """Newton on ``g(x, .) = 0`` in floats, warm-started at ``v_guess``."""
        if self.m == 0:
            return np.zeros(0)
        v = np.array(v_guess, dtype=float)
        for _ in range(maxiter):
            r = np.array(self.g(FLOAT, list(x), list(v)))
            if np.linalg.norm(r, np.inf) <= tol:
                return v
            gv = np.array(self.jacobians(FLOAT, list(x), list(v))[3])
            v = v - np.linalg.solve(gv, r)
        r = np.array(self.g(FLOAT, list(x), list(v)))
        if np.linalg.norm(r, np.inf) > 1e3 * tol:
            raise ModelError(f"algebraic solve failed, |g| = {np.linalg.norm(r, np.inf):.3e}")
        return v

    # --- DT hooks --------------------------------------------------------
    def dt_start(self, ctx, x0, v0) -> DTState:
        st = DTState(ctx, [[ctx.convert(c)] for c in x0], [[ctx.convert(c)] for c in v0])
        self.dt_init_aux(st)
        return st

    def dt_init_aux(self, st: DTState) -> None:
        pass

    def dt_advance_aux(self, st: DTState, k: int) -> None:
        """Extend auxiliary series to order ``k`` once ``X[.][k]`` is known."""

    def dt_f_coeff(self, st: DTState, k: int) -> list:
        """Order-``k`` DT coefficient of ``f`` (all inputs known to order k)."""
        raise NotImplementedError

    def dt_g_coeff(self, st: DTState, k: int) -> list:
        """Order-``k`` coefficient of ``g``; affine in ``V[.][k]``."""
        return []

    # --- misc ------------------------------------------------------------
    def describe(self) -> dict:
        return {"family": self.name}
