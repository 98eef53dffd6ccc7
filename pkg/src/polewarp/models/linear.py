"""Scalar linear test problem ``x' = a x`` (oracle self-checks)."""

from __future__ import annotations

from .base import DynamicalModel, hp


class LinearModel(DynamicalModel):
    name = "linear"
    n = 1
    m = 0
    state_names = ("x",)

    def __init__(self, a="-1"):
        self.params = {"a": a}

    def f(self, ops, x, v):
        return [hp(ops, self.params["a"]) * x[0]]

    def jacobians(self, ops, x, v):
        return [[hp(ops, self.params["a"])]], [[]], [], []

    def dt_f_coeff(self, st, k):
        return [hp(st.ctx, self.params["a"]) * st.X[0][k]]

    def describe(self):
        return {"family": self.name, "params": dict(self.params)}
