"""Time contraction ``tau = 1 - (K t + 1)**(-p)`` and its inverse derivative.

The map sends ``t in [0, inf)`` onto ``tau in [0, 1)``.  Integrating the
system in ``tau`` needs ``theta(tau) = dt/dtau``, whose Taylor coefficients
about ``tau = 0`` follow from the first-order ODE
``(1 - tau) theta' = ((p + 1)/p) theta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .precision import Context, TaylorSeries


@dataclass(frozen=True)
class TimeContractionMap:
    K: float = 1.0
    p: int = 3

    def __post_init__(self):
        if not self.K > 0:
            raise ValueError(f"rate K must be positive, got {self.K}")
        if int(self.p) != self.p or self.p < 1:
            raise ValueError(f"exponent p must be a positive integer, got {self.p}")

    @property
    def horizon(self) -> float:
        """Image of ``t = +inf``; always 1 for this family."""
        return 1.0

    def to_dict(self) -> dict:
        return {"K": self.K, "p": self.p}


@dataclass(frozen=True)
class IdentityMap:
    """``tau = t``: theta is identically one.  Used to cross-check the DT engine."""

    horizon: float = float("inf")

    def to_dict(self) -> dict:
        return {"identity": True}


def map_time(m: TimeContractionMap, t, ctx: Context | None = None):
    """``tau = M(t)``.  Float in, float out unless a context is given."""
    if t < 0:
        raise ValueError(f"time must be non-negative, got {t}")
    # expm1/log1p keep full relative accuracy for small K t
    if ctx is None:
        return -math.expm1(-m.p * math.log1p(m.K * t))
    t = ctx.convert(t)
    return -ctx.expm1(-m.p * ctx.log1p(ctx.convert(m.K) * t))


def inverse_map(m: TimeContractionMap, tau, ctx: Context | None = None):
    """``t = ((1 - tau)**(-1/p) - 1) / K`` for ``0 <= tau < 1``."""
    if tau < 0 or tau >= 1:
        raise ValueError(f"tau must lie in [0, 1), got {tau}")
    if ctx is None:
        return math.expm1(-math.log1p(-tau) / m.p) / m.K
    tau = ctx.convert(tau)
    return ctx.expm1(-ctx.log1p(-tau) / m.p) / ctx.convert(m.K)


def theta_series(m, order: int, ctx: Context) -> TaylorSeries:
    """Taylor coefficients of ``dt/dtau`` about ``tau = 0`` through ``order``.

    ``Theta(0) = 1/(p K)``, ``Theta(k+1) = Theta(k) (k + (p+1)/p) / (k+1)``.
    """
    if order < 0:
        raise ValueError("order must be non-negative")
    if isinstance(m, IdentityMap):
        return TaylorSeries.constant(ctx, 1, order)
    ratio = ctx.mpf(m.p + 1) / m.p
    th = [1 / (m.p * ctx.convert(m.K))]
    for k in range(order):
        th.append(th[-1] * (k + ratio) / (k + 1))
    return TaylorSeries(tuple(th), ctx)
