"""WSCC 3-machine 9-bus system with classical generators.

States are ``(delta_1..3, omega_1..3)``: rotor angles measured in the
centre-of-inertia (COI) frame and speed deviations in p.u.  Algebraic
variables are rectangular bus voltages ``(e_1..e_9, f_1..f_9)``.

Each machine is a constant EMF ``E_i`` behind ``x'_d``; the EMF source is
folded into the network as a Norton injection, so current balance reads
``Y_aug V = I(delta)``.  With constant-impedance loads ``g`` is linear in V.
The constant-power option replaces the current balance at load buses by
``V conj((Y V)_l) + S_l = 0``, which is quadratic in ``(e, f)``.

COI angles keep the post-fault SEP isolated up to the conserved quantity
``sum H_i delta_i``; :meth:`sep_constraints` pins that quantity during the
equilibrium solve.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
import scipy.linalg

from ..dtengine import sincos_step
from ..precision import cauchy_term
from .base import FLOAT, DynamicalModel, ModelError

NETWORK_STATES = ("pre", "on", "post")


@dataclass(frozen=True)
class FaultScenario:
    faulted_bus: int  # 1-based bus id
    r_f: float
    x_f: float
    clearing_time: float

    def __post_init__(self):
        if self.clearing_time < 0:
            raise ValueError("clearing_time must be non-negative")
        if self.r_f == 0 and self.x_f == 0:
            raise ValueError("fault impedance must be nonzero")

    @property
    def admittance(self) -> complex:
        return 1.0 / complex(self.r_f, self.x_f)

    def to_dict(self) -> dict:
        return {"faulted_bus": self.faulted_bus, "r_f": self.r_f, "x_f": self.x_f,
                "clearing_time": self.clearing_time}


def load_network(path=None) -> dict:
    if path is None:
        text = resources.files("polewarp.data").joinpath("wscc9.json").read_text()
    else:
        text = Path(path).read_text()
    data = json.loads(text)
    for key in ("buses", "lines", "machines", "base_MVA"):
        if key not in data:
            raise ModelError(f"network file missing key '{key}'")
    return data


def build_ybus(data: dict) -> np.ndarray:
    ids = [b["id"] for b in data["buses"]]
    pos = {bid: i for i, bid in enumerate(ids)}
    n = len(ids)
    Y = np.zeros((n, n), dtype=complex)
    for ln in data["lines"]:
        i, j = pos[ln["from"]], pos[ln["to"]]
        z = complex(ln["R"], ln["X"])
        if z == 0:
            raise ModelError(f"zero impedance line {ln['from']}-{ln['to']}")
        y = 1 / z
        b = 0.5j * ln.get("B", 0.0)
        Y[i, i] += y + b
        Y[j, j] += y + b
        Y[i, j] -= y
        Y[j, i] -= y
    return Y


def solve_power_flow(data: dict, tol=1e-13, maxiter=30):
    """Polar Newton power flow.  Returns complex bus voltages and injections."""
    Y = build_ybus(data)
    base = data["base_MVA"]
    buses = data["buses"]
    n = len(buses)
    P = np.array([(b.get("P_gen", 0.0) - b.get("P_load", 0.0)) / base for b in buses])
    Q = np.array([(b.get("Q_gen", 0.0) - b.get("Q_load", 0.0)) / base for b in buses])
    Vm = np.array([b.get("V", 1.0) for b in buses])
    Va = np.zeros(n)
    pv = [i for i, b in enumerate(buses) if b["type"] == "pv"]
    pq = [i for i, b in enumerate(buses) if b["type"] == "pq"]
    if sum(b["type"] == "slack" for b in buses) != 1:
        raise ModelError("power flow needs exactly one slack bus")
    ang = pv + pq
    for _ in range(maxiter):
        V = Vm * np.exp(1j * Va)
        S = V * np.conj(Y @ V)
        mis = np.concatenate([S.real[ang] - P[ang], S.imag[pq] - Q[pq]])
        if np.max(np.abs(mis)) < tol:
            break
        # dS/dVa, dS/dVm (standard complex form)
        Ibus = Y @ V
        dS_dVa = 1j * np.diag(V) @ np.conj(np.diag(Ibus) - Y @ np.diag(V))
        dS_dVm = np.diag(V) @ np.conj(Y @ np.diag(np.exp(1j * Va))) + \
            np.diag(np.exp(1j * Va)) @ np.diag(np.conj(Ibus))
        J = np.block([
            [dS_dVa.real[np.ix_(ang, ang)], dS_dVm.real[np.ix_(ang, pq)]],
            [dS_dVa.imag[np.ix_(pq, ang)], dS_dVm.imag[np.ix_(pq, pq)]],
        ])
        dx = np.linalg.solve(J, -mis)
        Va[ang] += dx[: len(ang)]
        Vm[pq] += dx[len(ang):]
    else:
        raise ModelError("power flow did not converge")
    V = Vm * np.exp(1j * Va)
    S = V * np.conj(Y @ V)
    return V, S, Y


class WSCC9Model(DynamicalModel):
    name = "wscc9"
    n = 6
    m = 18
    redundant_f_rows = (0,)
    blowup_norm = 50.0

    def __init__(self, data=None, fault: FaultScenario | None = None, network_state="post",
                 load_model=None, blowup_norm=None):
        if network_state not in NETWORK_STATES:
            raise ValueError(f"network_state must be one of {NETWORK_STATES}")
        if network_state == "on" and fault is None:
            raise ValueError("fault-on network needs a FaultScenario")
        self.data = load_network() if data is None else data
        self.fault = fault
        self.network_state = network_state
        self.load_model = load_model or self.data.get("loads", "constant_impedance")
        if self.load_model not in ("constant_impedance", "constant_power"):
            raise ValueError(f"unknown load model {self.load_model!r}")
        if blowup_norm is not None:
            self.blowup_norm = float(blowup_norm)
        self._init_operating_point()

    # ------------------------------------------------------------------
    def _init_operating_point(self):
        d = self.data
        base = d["base_MVA"]
        self.omega_s = 2 * math.pi * d.get("freq_hz", 60.0)
        buses = d["buses"]
        self.nb = len(buses)
        if self.nb != 9 or len(d["machines"]) != 3:
            raise ModelError("WSCC9Model expects 9 buses and 3 machines")
        pos = {b["id"]: i for i, b in enumerate(buses)}
        V, S, Y = solve_power_flow(d)
        mach = d["machines"]
        self.gen_bus = [pos[mc["bus"]] for mc in mach]
        self.H = [float(mc["H"]) for mc in mach]
        self.D = [float(mc.get("D", 0.0)) for mc in mach]
        self.xd = [float(mc["xd_prime"]) for mc in mach]
        # machine internal EMFs from terminal conditions
        Sg = S.copy()
        for i, b in enumerate(buses):
            Sg[i] += complex(b.get("P_load", 0.0), b.get("Q_load", 0.0)) / base
        Eph = []
        for k, bi in enumerate(self.gen_bus):
            Ig = np.conj(Sg[bi] / V[bi])
            Eph.append(V[bi] + 1j * self.xd[k] * Ig)
        Eph = np.array(Eph)
        Hs = sum(self.H)
        coi = sum(h * np.angle(e) for h, e in zip(self.H, Eph)) / Hs
        rot = np.exp(-1j * coi)
        V = V * rot
        Eph = Eph * rot
        self.E = [float(abs(e)) for e in Eph]
        self.Pm = [float((e * np.conj((e - V[bi]) / (1j * x))).real)
                   for e, bi, x in zip(Eph, self.gen_bus, self.xd)]
        self.load_bus = [pos[b["id"]] for b in buses if b.get("P_load", 0.0) or b.get("Q_load", 0.0)]
        self.S_load = {pos[b["id"]]: complex(b.get("P_load", 0.0), b.get("Q_load", 0.0)) / base
                       for b in buses if b.get("P_load", 0.0) or b.get("Q_load", 0.0)}
        # network matrix seen by the DAE
        Yn = Y.copy()
        for k, bi in enumerate(self.gen_bus):
            Yn[bi, bi] += 1 / (1j * self.xd[k])
        if self.load_model == "constant_impedance":
            for bi, s in self.S_load.items():
                Yn[bi, bi] += np.conj(s) / abs(V[bi]) ** 2
        if self.network_state == "on":
            fb = pos[self.fault.faulted_bus]
            Yn[fb, fb] += self.fault.admittance
        self.Ynet = Yn
        self.G = Yn.real.tolist()
        self.B = Yn.imag.tolist()
        self.pf_voltages = V
        self.delta_pf = [float(np.angle(e)) for e in Eph]
        self._quad_rows = set(self.load_bus) if self.load_model == "constant_power" else set()
        self._lu = None
        self.state_names = tuple([f"delta{k+1}" for k in range(3)] + [f"omega{k+1}" for k in range(3)])
        self.algebraic_names = tuple([f"e{i+1}" for i in range(9)] + [f"f{i+1}" for i in range(9)])

    def operating_point(self):
        """Pre-fault equilibrium ``(x, v)`` from the power flow (floats)."""
        x = list(self.delta_pf) + [0.0, 0.0, 0.0]
        v = list(self.pf_voltages.real) + list(self.pf_voltages.imag)
        return x, v

    def with_network(self, network_state, fault=None):
        return WSCC9Model(self.data, fault if fault is not None else self.fault, network_state,
                          self.load_model, self.blowup_norm)

    # ------------------------------------------------------------------
    def _consts(self, ops):
        c = getattr(self, "_cache", {})
        key = id(ops) if ops is not FLOAT else "float"
        if key not in c:
            cv = ops.convert
            c[key] = dict(
                G=[[cv(v) for v in row] for row in self.G],
                B=[[cv(v) for v in row] for row in self.B],
                E=[cv(v) for v in self.E], xd=[cv(v) for v in self.xd],
                H=[cv(v) for v in self.H], D=[cv(v) for v in self.D],
                Pm=[cv(v) for v in self.Pm], ws=cv(self.omega_s),
                EX=[cv(e) / cv(x) for e, x in zip(self.E, self.xd)],
                Hs=cv(sum(self.H)),
                SL={b: (cv(s.real), cv(s.imag)) for b, s in self.S_load.items()},
            )
            self._cache = c
        return c[key]

    def _net_currents(self, c, ops, e, f, i):
        G, B = c["G"][i], c["B"][i]
        ire = ops.fsum(G[j] * e[j] - B[j] * f[j] for j in range(9))
        iim = ops.fsum(B[j] * e[j] + G[j] * f[j] for j in range(9))
        return ire, iim

    def electrical_power(self, ops, x, v):
        c = self._consts(ops)
        e, f = v[:9], v[9:]
        out = []
        for k, bi in enumerate(self.gen_bus):
            out.append(c["EX"][k] * (e[bi] * ops.sin(x[k]) - f[bi] * ops.cos(x[k])))
        return out

    def f(self, ops, x, v):
        c = self._consts(ops)
        w = x[3:]
        wcoi = ops.fsum(h * wi for h, wi in zip(c["H"], w)) / c["Hs"]
        pe = self.electrical_power(ops, x, v)
        fd = [c["ws"] * (wi - wcoi) for wi in w]
        fw = [(c["Pm"][k] - pe[k] - c["D"][k] * w[k]) / (2 * c["H"][k]) for k in range(3)]
        return fd + fw

    def g(self, ops, x, v):
        c = self._consts(ops)
        e, f = v[:9], v[9:]
        gre, gim = [], []
        inj = {bi: k for k, bi in enumerate(self.gen_bus)}
        for i in range(9):
            ire, iim = self._net_currents(c, ops, e, f, i)
            if i in self._quad_rows:
                pl, ql = c["SL"][i]
                gre.append(e[i] * ire + f[i] * iim + pl)
                gim.append(f[i] * ire - e[i] * iim + ql)
                continue
            if i in inj:
                k = inj[i]
                ire = ire - c["EX"][k] * ops.sin(x[k])
                iim = iim + c["EX"][k] * ops.cos(x[k])
            gre.append(ire)
            gim.append(iim)
        return gre + gim

    def jacobians(self, ops, x, v):
        c = self._consts(ops)
        z = ops.zero
        e, f = v[:9], v[9:]
        fx = [[z] * 6 for _ in range(6)]
        fv = [[z] * 18 for _ in range(6)]
        gx = [[z] * 6 for _ in range(18)]
        gv = [[z] * 18 for _ in range(18)]
        for k in range(3):
            for j in range(3):
                fx[k][3 + j] = c["ws"] * ((1 if j == k else 0) - c["H"][j] / c["Hs"])
        for k, bi in enumerate(self.gen_bus):
            s, co = ops.sin(x[k]), ops.cos(x[k])
            ex = c["EX"][k]
            two_h = 2 * c["H"][k]
            # Pe = EX (e sin - f cos)
            fx[3 + k][k] = -ex * (e[bi] * co + f[bi] * s) / two_h
            fx[3 + k][3 + k] = -c["D"][k] / two_h
            fv[3 + k][bi] = -ex * s / two_h
            fv[3 + k][9 + bi] = ex * co / two_h
            if bi not in self._quad_rows:
                gx[bi][k] = -ex * co
                gx[9 + bi][k] = -ex * s
        for i in range(9):
            G, B = c["G"][i], c["B"][i]
            if i in self._quad_rows:
                ire, iim = self._net_currents(c, ops, e, f, i)
                for j in range(9):
                    gv[i][j] = e[i] * G[j] + f[i] * B[j] + (ire if j == i else z)
                    gv[i][9 + j] = -e[i] * B[j] + f[i] * G[j] + (iim if j == i else z)
                    gv[9 + i][j] = f[i] * G[j] - e[i] * B[j] - (iim if j == i else z)
                    gv[9 + i][9 + j] = -f[i] * B[j] - e[i] * G[j] + (ire if j == i else z)
            else:
                for j in range(9):
                    gv[i][j] = G[j]
                    gv[i][9 + j] = -B[j]
                    gv[9 + i][j] = B[j]
                    gv[9 + i][9 + j] = G[j]
        return fx, fv, gx, gv

    def sep_constraints(self, ops, x, x_ref):
        c = self._consts(ops)
        res = ops.fsum(h * (a - b) for h, a, b in zip(c["H"], x[:3], x_ref[:3]))
        grad = list(c["H"]) + [ops.zero] * 3
        return [(res, grad)]

    # ------------------------------------------------------------------
    def solve_algebraic_float(self, x, v_guess, tol=1e-12, maxiter=20):
        if self._quad_rows:
            return super().solve_algebraic_float(x, v_guess, tol, maxiter)
        if self._lu is None:
            gv = np.array(self.jacobians(FLOAT, [0.0] * 6, [1.0] * 18)[3])
            self._lu = scipy.linalg.lu_factor(gv)
        rhs = np.zeros(18)
        for k, bi in enumerate(self.gen_bus):
            ex = self.E[k] / self.xd[k]
            rhs[bi] = ex * math.sin(x[k])
            rhs[9 + bi] = -ex * math.cos(x[k])
        return scipy.linalg.lu_solve(self._lu, rhs)

    def f_float(self, x, v):
        w = x[3:]
        wcoi = sum(h * wi for h, wi in zip(self.H, w)) / sum(self.H)
        out = np.empty(6)
        for k, bi in enumerate(self.gen_bus):
            pe = self.E[k] / self.xd[k] * (v[bi] * math.sin(x[k]) - v[9 + bi] * math.cos(x[k]))
            out[k] = self.omega_s * (w[k] - wcoi)
            out[3 + k] = (self.Pm[k] - pe - self.D[k] * w[k]) / (2 * self.H[k])
        return out

    # --- DT hooks -------------------------------------------------------
    def dt_init_aux(self, st):
        ctx = st.ctx
        st.aux["sin"] = [[ctx.sin(st.X[k][0])] for k in range(3)]
        st.aux["cos"] = [[ctx.cos(st.X[k][0])] for k in range(3)]

    def dt_advance_aux(self, st, k):
        for i in range(3):
            sincos_step(st.ctx, st.X[i], st.aux["sin"][i], st.aux["cos"][i], k)

    def dt_f_coeff(self, st, k):
        ctx = st.ctx
        c = self._consts(ctx)
        W = st.X[3:]
        wcoi = ctx.fsum(h * w[k] for h, w in zip(c["H"], W)) / c["Hs"]
        out_d, out_w = [], []
        for i, bi in enumerate(self.gen_bus):
            S, C = st.aux["sin"][i], st.aux["cos"][i]
            pe = c["EX"][i] * (cauchy_term(ctx, st.V[bi], S, k) - cauchy_term(ctx, st.V[9 + bi], C, k))
            pm = c["Pm"][i] if k == 0 else ctx.zero
            out_d.append(c["ws"] * (W[i][k] - wcoi))
            out_w.append((pm - pe - c["D"][i] * W[i][k]) / (2 * c["H"][i]))
        return out_d + out_w

    def dt_g_coeff(self, st, k):
        ctx = st.ctx
        c = self._consts(ctx)
        E, F = st.V[:9], st.V[9:]
        inj = {bi: i for i, bi in enumerate(self.gen_bus)}

        def currents(i, j):
            G, B = c["G"][i], c["B"][i]
            re = ctx.fsum(G[b] * E[b][j] - B[b] * F[b][j] for b in range(9))
            im = ctx.fsum(B[b] * E[b][j] + G[b] * F[b][j] for b in range(9))
            return re, im

        gre, gim = [], []
        for i in range(9):
            if i in self._quad_rows:
                # order-k coefficient of V_i conj(I_i) + S_l
                ire, iim = zip(*(currents(i, j) for j in range(k + 1)))
                p = cauchy_term(ctx, E[i], ire, k) + cauchy_term(ctx, F[i], iim, k)
                q = cauchy_term(ctx, F[i], ire, k) - cauchy_term(ctx, E[i], iim, k)
                if k == 0:
                    pl, ql = c["SL"][i]
                    p, q = p + pl, q + ql
                gre.append(p)
                gim.append(q)
                continue
            r, m = currents(i, k)
            if i in inj:
                j = inj[i]
                r = r - c["EX"][j] * st.aux["sin"][j][k]
                m = m + c["EX"][j] * st.aux["cos"][j][k]
            gre.append(r)
            gim.append(m)
        return gre + gim

    def describe(self):
        out = {"family": self.name, "network_state": self.network_state,
               "load_model": self.load_model}
        if self.fault is not None:
            out["fault"] = self.fault.to_dict()
        return out


def wscc9_model(fault=None, network_state="post", data=None, load_model=None,
                blowup_norm=None) -> WSCC9Model:
    return WSCC9Model(data, fault, network_state, load_model, blowup_norm)
