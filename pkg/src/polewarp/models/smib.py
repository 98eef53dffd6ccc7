"""Classical single-machine infinite-bus swing model."""

from __future__ import annotations

import math

from ..dtengine import sincos_step
from .base import FLOAT, DynamicalModel, ModelError, hp


class SMIBModel(DynamicalModel):
    """delta' = omega,  omega' = (Pm - Pmax sin(delta) - D omega) / M."""

    name = "smib"
    n = 2
    m = 0
    state_names = ("delta", "omega")
    blowup_norm = 100.0

    def __init__(self, M="0.1", D="0.2", Pm="1", Pmax="2", blowup_norm=None):
        self.params = {"M": M, "D": D, "Pm": Pm, "Pmax": Pmax}
        Mf, Df, Pmf, Pmaxf = (float(hp(FLOAT, self.params[k])) for k in ("M", "D", "Pm", "Pmax"))
        if not Mf > 0:
            raise ValueError("inertia M must be positive")
        if Df < 0:
            raise ValueError("damping D must be non-negative")
        if not Pmaxf > 0:
            raise ValueError("Pmax must be positive")
        if abs(Pmf) > Pmaxf:
            raise ModelError(f"no equilibrium: |Pm| = {abs(Pmf)} exceeds Pmax = {Pmaxf}")
        if blowup_norm is not None:
            self.blowup_norm = float(blowup_norm)

    def _p(self, ops):
        return tuple(hp(ops, self.params[k]) for k in ("M", "D", "Pm", "Pmax"))

    def sep(self, ops):
        """Designated SEP ``(asin(Pm/Pmax), 0)``."""
        _, _, pm, pmax = self._p(ops)
        return [ops.asin(pm / pmax), ops.zero]

    def uep(self, ops):
        d, _ = self.sep(ops)
        return [ops.pi - d, ops.zero]

    def f(self, ops, x, v):
        M, D, pm, pmax = self._p(ops)
        return [x[1], (pm - pmax * ops.sin(x[0]) - D * x[1]) / M]

    def jacobians(self, ops, x, v):
        M, D, pm, pmax = self._p(ops)
        fx = [[ops.zero, ops.one],
              [-pmax * ops.cos(x[0]) / M, -D / M]]
        return fx, [[], []], [], []

    def dt_init_aux(self, st):
        ctx = st.ctx
        d0 = st.X[0][0]
        st.aux["sin"] = [ctx.sin(d0)]
        st.aux["cos"] = [ctx.cos(d0)]

    def dt_advance_aux(self, st, k):
        sincos_step(st.ctx, st.X[0], st.aux["sin"], st.aux["cos"], k)

    def dt_f_coeff(self, st, k):
        ctx = st.ctx
        M, D, pm, pmax = self._p(ctx)
        W = st.X[1]
        drive = pm if k == 0 else ctx.zero
        return [W[k], (drive - pmax * st.aux["sin"][k] - D * W[k]) / M]

    def describe(self):
        return {"family": self.name, "params": dict(self.params)}


def smib_model(M="0.1", D="0.2", Pm="1", Pmax="2", blowup_norm=None) -> SMIBModel:
    return SMIBModel(M, D, Pm, Pmax, blowup_norm)
