"""[L/M] Padé approximants and their denominator roots.

The denominator is normalised to ``q_0 = 1`` and found from the M x M
Toeplitz system ``sum_{j=1..M} q_j h_{L+m-j} = -h_{L+m}`` (m = 1..M),
solved by dense LU with partial pivoting.  Roots of ``Q`` (and of ``P``,
for the spurious-pole filter) come from an Aberth-Ehrlich simultaneous
iteration run at the working precision.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .precision import (
    Context,
    SingularMatrixError,
    TaylorSeries,
    lu_factor,
    lu_solve,
    reciprocal_coeffs,
    cauchy_term,
)

log = logging.getLogger(__name__)

MAX_SWEEPS = 500
REFINE_STEPS = 3


class PadeError(RuntimeError):
    pass


class PoleHitError(ZeroDivisionError):
    pass


class RootFindingError(RuntimeError):
    def __init__(self, msg, roots=None):
        super().__init__(msg)
        self.roots = roots


@dataclass(frozen=True)
class PadeApproximant:
    P: tuple
    Q: tuple
    L: int
    M_deg: int
    ctx: Context
    reductions: int = 0

    def __call__(self, tau):
        return evaluate_pade(self, tau)

    def maclaurin(self, order: int) -> list:
        """Series of P/Q through ``order`` by series division.

        A small root of Q makes ``1/Q`` grow geometrically, so the division
        runs with doubled precision and the result is rounded back.
        """
        ctx = self.ctx
        with ctx.workdps(2 * ctx.dps):
            q = list(self.Q) + [ctx.zero] * max(0, order + 1 - len(self.Q))
            p = list(self.P) + [ctx.zero] * max(0, order + 1 - len(self.P))
            rq = reciprocal_coeffs(ctx, q, order)
            out = [cauchy_term(ctx, p, rq, k) for k in range(order + 1)]
        return [+c for c in out]


@dataclass
class RootSet:
    roots: list
    residuals: list
    converged: bool = True
    sweeps: int = 0

    @property
    def condition_hint(self):
        return max(self.residuals) if self.residuals else 0.0

    def __len__(self):
        return len(self.roots)


def _toeplitz(h, L, M):
    def hh(i):
        return h[i] if i >= 0 else 0
    A = [[hh(L + m - j) for j in range(1, M + 1)] for m in range(1, M + 1)]
    rhs = [-hh(L + m) for m in range(1, M + 1)]
    return A, rhs


def _singular(ctx, factors, A) -> bool:
    scale = max((abs(v) for row in A for v in row), default=ctx.zero)
    if scale == 0:
        return True
    tol = scale * ctx.mpf(10) ** (10 - ctx.dps)
    return min(abs(p) for p in factors.pivots()) <= tol


def _refined_solve(ctx, factors, A, rhs, steps=REFINE_STEPS):
    """LU solve plus iterative refinement; ``fdot`` residuals are exactly summed."""
    x = lu_solve(ctx, factors, rhs)
    for _ in range(steps):
        r = [b - ctx.fdot(row, x) for row, b in zip(A, rhs)]
        if not any(r):
            break
        x = [a + d for a, d in zip(x, lu_solve(ctx, factors, r))]
    return x


def build_pade(h: TaylorSeries, L: int, M_deg: int) -> PadeApproximant:
    """[L/M_deg] approximant of ``h``; drops the denominator degree while singular."""
    if L < 0 or M_deg < 0:
        raise ValueError("degrees must be non-negative")
    if h.order < L + M_deg:
        raise PadeError(f"need {L + M_deg + 1} coefficients, have {len(h)}")
    ctx = h.ctx
    coeffs = h.coeffs
    M = M_deg
    reductions = 0
    q = [ctx.one]
    while M > 0:
        A, rhs = _toeplitz(coeffs, L, M)
        try:
            factors = lu_factor(ctx, A)
            if _singular(ctx, factors, A):
                raise SingularMatrixError("near-singular Toeplitz system")
        except SingularMatrixError:
            log.info("Padé [%d/%d] degenerate, reducing denominator degree", L, M)
            M -= 1
            reductions += 1
            continue
        q = [ctx.one] + _refined_solve(ctx, factors, A, rhs)
        break
    p = [ctx.fsum(q[j] * coeffs[i - j] for j in range(min(i, M) + 1)) for i in range(L + 1)]
    if reductions:
        log.warning("Padé denominator degree reduced %d -> %d", M_deg, M)
    return PadeApproximant(tuple(p), tuple(q), L, M, ctx, reductions)


def _horner(ctx, coeffs, z):
    acc = ctx.zero
    for c in reversed(coeffs):
        acc = acc * z + c
    return acc


def evaluate_pade(a: PadeApproximant, tau):
    ctx = a.ctx
    z = ctx.convert(tau)
    den = _horner(ctx, a.Q, z)
    scale = ctx.fsum(abs(c) * abs(z) ** j for j, c in enumerate(a.Q))
    if abs(den) <= scale * ctx.mpf(10) ** (-ctx.dps):
        raise PoleHitError(f"evaluation at a pole of the approximant (tau={ctx.nstr(z, 10)})")
    return _horner(ctx, a.P, z) / den


# --- polynomial roots -------------------------------------------------------

def _effective(ctx, coeffs):
    """Strip trailing (highest-degree) coefficients that are numerically zero."""
    c = list(coeffs)
    big = max((abs(v) for v in c), default=ctx.zero)
    tol = big * ctx.mpf(10) ** (2 - ctx.dps)
    while len(c) > 1 and abs(c[-1]) <= tol:
        c.pop()
    return c


def _initial_guesses(ctx, coeffs):
    n = len(coeffs) - 1
    desc = [complex(c) for c in reversed(coeffs)]
    try:
        with np.errstate(all="ignore"):
            z0 = np.roots(np.array(desc))
        if len(z0) == n and np.all(np.isfinite(z0)):
            # nudge off the real axis so conjugate pairs can separate
            return [ctx.mpc(z.real, z.imag) + ctx.mpc(0, 1e-9 * (1 + abs(z)) * (i % 3 - 1))
                    for i, z in enumerate(z0)]
    except (np.linalg.LinAlgError, ValueError, OverflowError):
        pass
    # Cauchy-bound circle with an irrational angular offset
    lead = abs(coeffs[-1])
    radius = 1 + max(abs(c) / lead for c in coeffs[:-1])
    return [radius * ctx.expjpi(ctx.mpf(2 * k) / n + ctx.mpf("0.4")) for k in range(n)]


def _residual(ctx, coeffs, z):
    num = abs(_horner(ctx, coeffs, z))
    den = ctx.fsum(abs(c) * abs(z) ** j for j, c in enumerate(coeffs))
    return num / den if den else num


def polynomial_roots(ctx: Context, coeffs, max_sweeps: int = MAX_SWEEPS,
                     strict: bool = True) -> RootSet:
    """All complex roots of ``sum coeffs[j] z**j`` (ascending order).

    Aberth-Ehrlich with per-root freezing, then one Newton polish.
    Residuals are backward errors ``|p(z)| / sum |c_j| |z|**j``.
    """
    c = [ctx.convert(v) for v in _effective(ctx, coeffs)]
    n = len(c) - 1
    if n < 1:
        return RootSet([], [], True, 0)
    dc = [j * c[j] for j in range(1, n + 1)]
    z = _initial_guesses(ctx, c)
    tol = ctx.mpf(10) ** (-(ctx.dps - 3))
    res_tol = ctx.mpf(10) ** (2 - ctx.dps)
    active = set(range(n))
    sweeps = 0
    while active and sweeps < max_sweeps:
        sweeps += 1
        for i in sorted(active):
            zi = z[i]
            pv = _horner(ctx, c, zi)
            if pv == 0:
                active.discard(i)
                continue
            ratio = pv / _horner(ctx, dc, zi)
            s = ctx.fsum(1 / (zi - z[j]) for j in range(n) if j != i and z[j] != zi)
            w = ratio / (1 - ratio * s)
            z[i] = zi - w
            if (abs(w) <= tol * max(abs(z[i]), ctx.mpf(10) ** (-ctx.dps // 2))
                    or _residual(ctx, c, z[i]) <= res_tol):
                active.discard(i)
    for i in range(n):
        d = _horner(ctx, dc, z[i])
        if d != 0:
            cand = z[i] - _horner(ctx, c, z[i]) / d
            if _residual(ctx, c, cand) <= _residual(ctx, c, z[i]):
                z[i] = cand
    res = [_residual(ctx, c, zi) for zi in z]
    out = RootSet(z, res, not active, sweeps)
    if active and strict:
        raise RootFindingError(
            f"Aberth iteration did not converge in {max_sweeps} sweeps "
            f"({len(active)} roots pending, worst residual {ctx.nstr(max(res), 3)})", out)
    return out


def denominator_roots(a: PadeApproximant, max_sweeps: int = MAX_SWEEPS,
                      strict: bool = False) -> RootSet:
    if a.M_deg < 1:
        return RootSet([], [], True, 0)
    return polynomial_roots(a.ctx, a.Q, max_sweeps, strict)


def numerator_roots(a: PadeApproximant, max_sweeps: int = MAX_SWEEPS,
                    strict: bool = False) -> RootSet:
    if a.L < 1:
        return RootSet([], [], True, 0)
    return polynomial_roots(a.ctx, a.P, max_sweeps, strict)


@dataclass
class PoleSelection:
    tau_pole: object  # mpf or None
    candidates: list = field(default_factory=list)  # positive real roots, ascending
    filtered: list = field(default_factory=list)    # doublets that were discarded
    complex_excluded: int = 0


def smallest_positive_real_root(r: RootSet, imag_tol: float = 1e-6, pos_tol: float = 1e-8,
                                zeros: RootSet | None = None, doublet_tol=None,
                                ctx: Context | None = None) -> PoleSelection:
    """Smallest root with ``|Im| <= imag_tol`` and ``Re > pos_tol``.

    A candidate is dropped as a Froissart doublet when some root in
    ``zeros`` lies within ``doublet_tol`` of it.
    """
    real, n_complex = [], 0
    for z in r.roots:
        if abs(z.imag) <= imag_tol and z.real > pos_tol:
            real.append(z)
        elif z.real > pos_tol:
            n_complex += 1
    real.sort(key=lambda z: z.real)
    kept, dropped = [], []
    for z in real:
        if zeros is not None and doublet_tol is not None and zeros.roots:
            gap = min(abs(z - w) for w in zeros.roots)
            if gap <= doublet_tol:
                dropped.append((z.real, gap))
                continue
        kept.append(z.real)
    return PoleSelection(kept[0] if kept else None, kept, dropped, n_complex)
