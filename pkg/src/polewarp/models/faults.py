"""Fault-on integration producing the post-fault initial condition."""

from __future__ import annotations

import numpy as np

from .base import ModelError
from .wscc9 import FaultScenario, WSCC9Model

__all__ = ["FaultScenario", "post_fault_initial_state", "prefault_model"]


def prefault_model(data=None, load_model=None) -> WSCC9Model:
    return WSCC9Model(data, None, "pre", load_model)


def post_fault_initial_state(scenario: FaultScenario, data=None, load_model=None, dt=1e-4):
    """Integrate the fault-on network from the prefault SEP for ``clearing_time``.

    Returns ``(post_model, x0, v0, x_pre)`` with floats; ``v0`` solves the
    post-fault network at ``x0``.  ``x_pre`` is the prefault operating point,
    which is also the Newton guess for the post-fault SEP.
    """
    from ..benchmark import rk4_integrate

    pre = prefault_model(data, load_model)
    x_pre, v_pre = pre.operating_point()
    x, v = np.array(x_pre), np.array(v_pre)
    if scenario.clearing_time > 0:
        on = WSCC9Model(pre.data, scenario, "on", pre.load_model)
        traj = rk4_integrate(on, x, v, dt=dt, horizon=scenario.clearing_time)
        if traj.terminated == "blowup":
            raise ModelError("fault-on trajectory blew up before clearing")
        x, v = traj.final_state, traj.algebraics[-1]
    post = WSCC9Model(pre.data, scenario, "post", pre.load_model)
    try:
        v0 = post.solve_algebraic_float(x, v)
    except (ModelError, np.linalg.LinAlgError) as exc:
        raise ModelError("algebraic solve failed at the switching instant") from exc
    return post, list(x), list(v0), x_pre
