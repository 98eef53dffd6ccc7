from __future__ import annotations

import math

from ..precision import cauchy_term
from .base import FLOAT, DynamicalModel, hp


class LorenzModel(DynamicalModel):
    """x' = sigma (y - x),  y' = x (rho - z) - y,  z' = x y - beta z."""

    name = "lorenz"
    n = 3
    m = 0
    state_names = ("x", "y", "z")

    def __init__(self, sigma="10", rho="28", beta="8/3"):
        self.params = {"sigma": sigma, "rho": rho, "beta": beta}
        for key, val in self.params.items():
            if not math.isfinite(float(hp(FLOAT, val))):
                raise ValueError(f"{key} must be finite")

    def _p(self, ops):
        return (hp(ops, self.params["sigma"]), hp(ops, self.params["rho"]),
                hp(ops, self.params["beta"]))

    def f(self, ops, x, v):
        s, r, b = self._p(ops)
        return [s * (x[1] - x[0]), x[0] * (r - x[2]) - x[1], x[0] * x[1] - b * x[2]]

    def jacobians(self, ops, x, v):
        s, r, b = self._p(ops)
        z, o = ops.zero, ops.one
        fx = [[-s, s, z],
              [r - x[2], -o, -x[0]],
              [x[1], x[0], -b]]
        return fx, [[], [], []], [], []

    def symmetric_twin(self, x):
        """Image under the (x, y, z) -> (-x, -y, z) symmetry."""
        return [-x[0], -x[1], x[2]]

    def nontrivial_equilibria(self, ops):
        s, r, b = self._p(ops)
        c = ops.sqrt(b * (r - 1))
        return [c, c, r - 1], [-c, -c, r - 1]

    def dt_f_coeff(self, st, k):
        ctx = st.ctx
        s, r, b = self._p(ctx)
        X, Y, Z = st.X
        xz = cauchy_term(ctx, X, Z, k)
        xy = cauchy_term(ctx, X, Y, k)
        return [s * (Y[k] - X[k]), r * X[k] - xz - Y[k], xy - b * Z[k]]

    def describe(self):
        return {"family": self.name, "params": dict(self.params)}


def lorenz_model(sigma="10", rho="28", beta="8/3") -> LorenzModel:
    return LorenzModel(sigma, rho, beta)
