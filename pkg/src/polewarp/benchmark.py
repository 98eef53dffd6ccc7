"""Fixed-step RK4 reference integrator (float64) and its verdicts."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .timewarp import inverse_map, map_time

DEFAULT_DT = 1e-4
DEFAULT_HORIZON = {"lorenz": 30.0, "smib": 15.0, "wscc9": 15.0}
CONV_TOL = 1e-4
HORIZON_FRACTION = 0.1
SETTLE_TOL = 1e-3


class OracleVerdict(str, Enum):
    STABLE = "Stable"
    OTHER_SEP = "UnstableOtherSEP"
    DIVERGENT = "UnstableDivergent"
    INCONCLUSIVE = "Inconclusive"

    @property
    def is_stable(self) -> bool:
        return self is OracleVerdict.STABLE


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (samples, n)
    algebraics: np.ndarray  # (samples, m)
    terminated: str  # "horizon" | "blowup"
    dt: float

    @property
    def final_state(self):
        return self.states[-1]

    def __len__(self):
        return len(self.times)


def rk4_integrate(model, x0, v0=None, dt: float = DEFAULT_DT, horizon: float | None = None,
                  record_every: int = 10, blowup: float | None = None) -> Trajectory:
    """Classic RK4 on ``x' = f(x, v(x))``; ``v`` re-solved at every stage.

    Samples are kept every ``record_every`` steps plus the last step.
    Integration stops early once ``|x|_inf`` exceeds the blow-up bound.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if horizon is None:
        horizon = DEFAULT_HORIZON.get(model.name, 10.0)
    if blowup is None:
        blowup = model.blowup_norm
    x = np.array([float(c) for c in x0])
    v = np.array([float(c) for c in (v0 if v0 is not None else [])])
    if model.m:
        v = model.solve_algebraic_float(x, v)

    steps = int(round(horizon / dt))
    ts, xs, vs = [0.0], [x.copy()], [v.copy()]
    status = "horizon"
    for i in range(1, steps + 1):
        x, v = _rk4_step(model, x, v, dt)
        if model.m:
            v = model.solve_algebraic_float(x, v)
        bad = not np.all(np.isfinite(x)) or np.max(np.abs(x)) > blowup
        if i % record_every == 0 or i == steps or bad:
            ts.append(i * dt)
            xs.append(x.copy())
            vs.append(v.copy())
        if bad:
            status = "blowup"
            break
    return Trajectory(np.array(ts), np.array(xs), np.array(vs).reshape(len(ts), model.m),
                      status, dt)


def rk4_sample(model, x0, times, max_dt: float = DEFAULT_DT, v0=None, ctx=None) -> np.ndarray:
    """States at the given (possibly negative) times, hitting each one exactly.

    Each gap between consecutive targets is split into equal RK4 steps no
    longer than ``max_dt``; negative times integrate backwards from 0.
    With ``ctx`` the steps run in that multiprecision context (``x0`` and
    ``times`` are converted) and an object array of context numbers is
    returned; otherwise everything is float64.
    """
    if ctx is None:
        conv, step = float, _rk4_step
        zero = 0.0
    else:
        conv, zero = ctx.convert, ctx.zero

        def step(model, x, v, h):
            return _rk4_step_ctx(model, ctx, x, v, h)

    out = {}
    for sign in (1, -1):
        targets = sorted({abs(conv(t)) for t in times if (t > 0 if sign > 0 else t < 0)})
        x = np.array([conv(c) for c in x0], dtype=object if ctx else float)
        v = np.array([conv(c) for c in (v0 or [])], dtype=object if ctx else float)
        t_prev = zero
        for t in targets:
            n = max(1, math.ceil(float(t - t_prev) / max_dt))
            h = sign * (t - t_prev) / n
            for _ in range(n):
                x, v = step(model, x, v, h)
            out[sign * t] = x.copy()
            t_prev = t
    x0c = np.array([conv(c) for c in x0], dtype=object if ctx else float)
    return np.array([out[conv(t)] if t != 0 else x0c for t in times])


def _rk4_step(model, x, v, h):
    def rhs(xs, vguess):
        vs = model.solve_algebraic_float(xs, vguess) if model.m else vguess
        return model.f_float(xs, vs), vs

    k1, va = rhs(x, v)
    k2, vb = rhs(x + 0.5 * h * k1, va)
    k3, vc = rhs(x + 0.5 * h * k2, vb)
    k4, vd = rhs(x + h * k3, vc)
    return x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4), vd


def _rk4_step_ctx(model, ctx, x, v, h):
    from .models.equilibrium import solve_algebraic

    def rhs(xs, vguess):
        vs = np.array(solve_algebraic(model, ctx, list(xs), list(vguess)), dtype=object) \
            if model.m else vguess
        return np.array(model.f(ctx, list(xs), list(vs)), dtype=object), vs

    k1, va = rhs(x, v)
    k2, vb = rhs(x + h / 2 * k1, va)
    k3, vc = rhs(x + h / 2 * k2, vb)
    k4, vd = rhs(x + h * k3, vc)
    return x + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4), vd


def truth_classify(traj: Trajectory, x_star, model=None, conv_tol: float = CONV_TOL,
                   horizon_fraction: float = HORIZON_FRACTION,
                   settle_tol: float = SETTLE_TOL) -> OracleVerdict:
    """Oracle verdict from the tail of a trajectory.

    Settling elsewhere is judged by the vector-field norm over the tail,
    which needs ``model``; without it that branch reports Inconclusive.
    """
    if traj.terminated == "blowup":
        return OracleVerdict.DIVERGENT
    xs = np.array([float(c) for c in x_star])
    t_end = traj.times[-1]
    tail = traj.times >= t_end * (1 - horizon_fraction)
    dist = np.linalg.norm(traj.states[tail] - xs, axis=1)
    if np.max(dist) <= conv_tol:
        return OracleVerdict.STABLE
    if model is not None:
        speed = max(np.linalg.norm(model.f_float(x, v))
                    for x, v in zip(traj.states[tail], traj.algebraics[tail]))
        if speed <= settle_tol and np.min(dist) > conv_tol:
            return OracleVerdict.OTHER_SEP
    return OracleVerdict.INCONCLUSIVE


def indicator_along_trajectory(traj: Trajectory, x_star, tmap):
    """``(tau, h)`` samples of ``h = -1/|x - x*|^2``; samples at x* are skipped.

    Returns ``(pairs, skipped_indices)``.
    """
    xs = np.array([float(c) for c in x_star])
    out, skipped = [], []
    for i, (t, x) in enumerate(zip(traj.times, traj.states)):
        d = float(np.sum((x - xs) ** 2))
        if d == 0.0:
            skipped.append(i)
            continue
        out.append((float(map_time(tmap, t)), -1.0 / d))
    return out, skipped


def h_at_tau(traj: Trajectory, x_star, tmap, tau: float) -> float:
    """Oracle indicator at a given tau, linearly interpolated in time."""
    t = float(inverse_map(tmap, tau))
    if t > traj.times[-1]:
        raise ValueError(f"trajectory ends at t={traj.times[-1]:.3f}, need t={t:.3f}")
    xs = np.array([float(c) for c in x_star])
    x = np.array([np.interp(t, traj.times, traj.states[:, j]) for j in range(traj.states.shape[1])])
    return -1.0 / float(np.sum((x - xs) ** 2))


def rk4_order_ratio(dt: float = 0.1, horizon: float = 1.0) -> float:
    """Endpoint-error ratio on ``x' = -x`` when the step is halved (about 16 for RK4)."""
    from .models.linear import LinearModel

    model = LinearModel("-1")
    exact = math.exp(-horizon)
    errs = [abs(rk4_integrate(model, [1.0], dt=h, horizon=horizon).final_state[0] - exact)
            for h in (dt, dt / 2)]
    return errs[0] / errs[1]
