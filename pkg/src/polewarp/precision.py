"""Arbitrary-precision scalars and truncated Taylor series.

All numerics run on :mod:`mpmath` values bound to an explicit
:class:`mpmath.MPContext`; nothing here touches the global ``mpmath.mp``
precision.  A context is created once per scenario with :func:`make_context`
and passed around by value.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import mpmath

MIN_DIGITS = 34

# Type aliases.  mpf/mpc instances belong to whatever context created them.
HPReal = mpmath.ctx_mp_python.mpf
HPComplex = mpmath.ctx_mp_python.mpc
Context = mpmath.MPContext


class SingularSeriesError(ZeroDivisionError):
    """Raised when a series with zero constant term is inverted."""


class SeriesOrderError(ValueError):
    pass


class SingularMatrixError(ZeroDivisionError):
    pass


def make_context(digits: int) -> Context:
    """Fresh mpmath context with ``digits`` decimal digits (round to nearest)."""
    if digits < 1:
        raise ValueError(f"digits must be positive, got {digits}")
    ctx = mpmath.MPContext()
    ctx.dps = int(digits)
    return ctx


def default_digits(L: int, M: int) -> int:
    """Working precision rule for an [L/M] approximant: L+M+1 digits, floor 34."""
    return max(L + M + 1, MIN_DIGITS)


def digits_of(ctx: Context) -> int:
    return int(ctx.dps)


def to_hp(ctx: Context, value) -> HPReal:
    """Convert ``value`` (int, str, float, mpf) into ``ctx``.

    Strings are parsed at full precision, so ``"0.1"`` is exact to the
    working precision while ``0.1`` carries binary float error.
    """
    return ctx.mpf(value)


def cauchy_term(ctx: Context, a: Sequence, b: Sequence, k: int, start: int = 0):
    """``sum(a[j] * b[k-j] for j in start..k)`` with a single final rounding."""
    if k < start:
        return ctx.zero
    return ctx.fdot(a[start:k + 1], b[k - start::-1])


@dataclass(frozen=True)
class TaylorSeries:
    """Dense truncated series ``sum_k coeffs[k] * tau**k``."""

    coeffs: tuple
    ctx: Context

    def __post_init__(self):
        if not self.coeffs:
            raise ValueError("a series needs at least one coefficient")

    @classmethod
    def from_values(cls, ctx: Context, values: Iterable) -> "TaylorSeries":
        return cls(tuple(ctx.mpf(v) for v in values), ctx)

    @classmethod
    def zeros(cls, ctx: Context, order: int) -> "TaylorSeries":
        return cls(tuple(ctx.zero for _ in range(order + 1)), ctx)

    @classmethod
    def constant(cls, ctx: Context, value, order: int = 0) -> "TaylorSeries":
        c = [ctx.zero] * (order + 1)
        c[0] = ctx.mpf(value)
        return cls(tuple(c), ctx)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def digits(self) -> int:
        return digits_of(self.ctx)

    def __len__(self) -> int:
        return len(self.coeffs)

    def __getitem__(self, k):
        return self.coeffs[k]

    def __iter__(self):
        return iter(self.coeffs)

    def truncate(self, order: int) -> "TaylorSeries":
        if order > self.order:
            raise SeriesOrderError(f"cannot truncate order {self.order} series to {order}")
        return TaylorSeries(self.coeffs[: order + 1], self.ctx)

    def __neg__(self) -> "TaylorSeries":
        return TaylorSeries(tuple(-c for c in self.coeffs), self.ctx)

    def __add__(self, other: "TaylorSeries") -> "TaylorSeries":
        return series_add(self, other)

    def __sub__(self, other: "TaylorSeries") -> "TaylorSeries":
        return series_add(self, -other)

    def __mul__(self, other: "TaylorSeries") -> "TaylorSeries":
        return series_mul(self, other, min(self.order, other.order))

    def __call__(self, tau):
        """Horner evaluation of the truncated polynomial."""
        ctx = self.ctx
        tau = ctx.convert(tau)
        acc = ctx.zero
        for c in reversed(self.coeffs):
            acc = acc * tau + c
        return acc

    def to_floats(self) -> list[float]:
        return [float(c) for c in self.coeffs]


def _check_ctx(a: TaylorSeries, b: TaylorSeries) -> None:
    if a.ctx.prec != b.ctx.prec:
        raise ValueError(
            f"precision mismatch: {a.ctx.dps} vs {b.ctx.dps} digits")


def series_add(a: TaylorSeries, b: TaylorSeries) -> TaylorSeries:
    _check_ctx(a, b)
    n = min(len(a), len(b))
    return TaylorSeries(tuple(a[k] + b[k] for k in range(n)), a.ctx)


def series_mul(a: TaylorSeries, b: TaylorSeries, order: int) -> TaylorSeries:
    """Cauchy product truncated at ``order``."""
    _check_ctx(a, b)
    if a.order < order or b.order < order:
        raise SeriesOrderError(
            f"need inputs of order >= {order}, got {a.order} and {b.order}")
    ctx = a.ctx
    return TaylorSeries(
        tuple(cauchy_term(ctx, a.coeffs, b.coeffs, k) for k in range(order + 1)), ctx)


def reciprocal_coeffs(ctx: Context, a: Sequence, order: int) -> list:
    """Coefficients of ``1/a`` up to ``order`` by forward substitution.

    ``r_0 = 1/a_0`` and ``r_k = -(sum_{j=1..k} a_j r_{k-j}) / a_0``.
    """
    if a[0] == 0:
        raise SingularSeriesError("series has zero constant term")
    inv0 = 1 / a[0]
    r = [inv0]
    for k in range(1, order + 1):
        r.append(-cauchy_term(ctx, a, r, k, start=1) * inv0)
    return r


def series_reciprocal(a: TaylorSeries, order: int | None = None) -> TaylorSeries:
    if order is None:
        order = a.order
    if a.order < order:
        # missing high coefficients are zero, which is exact for polynomials
        coeffs = list(a.coeffs) + [a.ctx.zero] * (order - a.order)
    else:
        coeffs = a.coeffs
    return TaylorSeries(tuple(reciprocal_coeffs(a.ctx, coeffs, order)), a.ctx)


@dataclass(frozen=True)
class LUFactors:
    lu: list
    perm: list

    def pivots(self) -> list:
        return [self.lu[i][i] for i in range(len(self.perm))]


def lu_factor(ctx: Context, M) -> LUFactors:
    """Doolittle LU with partial pivoting of a square list-of-lists."""
    n = len(M)
    A = [[ctx.convert(v) for v in row] for row in M]
    perm = list(range(n))
    for c in range(n):
        p = max(range(c, n), key=lambda r: abs(A[r][c]))
        if A[p][c] == 0:
            raise SingularMatrixError(f"zero pivot in column {c}")
        if p != c:
            A[c], A[p] = A[p], A[c]
            perm[c], perm[p] = perm[p], perm[c]
        inv = 1 / A[c][c]
        row_c = A[c]
        for r in range(c + 1, n):
            fac = A[r][c] * inv
            A[r][c] = fac
            if fac:
                row = A[r]
                for j in range(c + 1, n):
                    row[j] -= fac * row_c[j]
    return LUFactors(A, perm)


def lu_solve(ctx: Context, f: LUFactors, rhs) -> list:
    A, n = f.lu, len(f.perm)
    b = [ctx.convert(rhs[p]) for p in f.perm]
    for i in range(1, n):
        b[i] -= ctx.fdot(A[i][:i], b[:i])
    for i in range(n - 1, -1, -1):
        b[i] = (b[i] - ctx.fdot(A[i][i + 1:], b[i + 1:])) / A[i][i]
    return b
