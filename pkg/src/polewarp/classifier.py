"""End-to-end stability assessment: SEP, coefficients, Padé poles, verdict."""

from __future__ import annotations

import copy
import json
import time
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path

from . import benchmark
from .dtengine import indicator_coefficients, propagate_coefficients
from .models import FLOAT, LorenzModel, SMIBModel
from .models.equilibrium import find_sep, solve_algebraic
from .models.faults import FaultScenario, post_fault_initial_state
from .models.linear import LinearModel
from .pade import (PoleHitError, build_pade, denominator_roots, numerator_roots,
                   smallest_positive_real_root)
from .precision import default_digits, make_context
from .timewarp import TimeContractionMap, inverse_map

SCHEMA = "polewarp.scenario/1"
DEFAULT_EPSILON = 0.01
HORIZON_OFFSET = 1e-3
SUBTYPE_ZERO_TOL = 0.05
# |h| beyond this multiple of |h_0| at the horizon reads as "heading to -inf"
SUBTYPE_CEILING = 1e4


class ConfigError(ValueError):
    """Bad scenario configuration; ``key`` names the offending entry."""

    def __init__(self, key, msg):
        super().__init__(f"{key}: {msg}")
        self.key = key


class StageError(RuntimeError):
    """Numerical failure inside one pipeline stage."""

    def __init__(self, stage, cause):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


class Status(str, Enum):
    STABLE = "Stable"
    OTHER_SEP = "UnstableOtherSEP"
    DIVERGENT = "UnstableDivergent"
    UNCLASSIFIED = "UnstableUnclassified"

    @property
    def is_stable(self) -> bool:
        return self is Status.STABLE


@dataclass
class ScenarioConfig:
    model: dict
    initial: dict
    name: str = "scenario"
    mapping: dict = field(default_factory=lambda: {"K": 1.0, "p": 3})
    order: dict = field(default_factory=lambda: {"L": 40, "M": 40})
    digits: int | None = None
    epsilon: float = DEFAULT_EPSILON
    sep_guess: list | None = None
    imag_tol: float | None = None
    pos_tol: float = 1e-8
    oracle: dict = field(default_factory=dict)
    max_order: int = 400

    def __post_init__(self):
        fam = self.model.get("family") if isinstance(self.model, dict) else None
        if fam not in MODEL_FAMILIES:
            raise ConfigError("model.family", f"unknown family {fam!r}")
        kind = self.initial.get("kind") if isinstance(self.initial, dict) else None
        if kind not in ("explicit", "fault"):
            raise ConfigError("initial.kind", "must be 'explicit' or 'fault'")
        if kind == "explicit" and "x0" not in self.initial:
            raise ConfigError("initial.x0", "explicit initial condition needs x0")
        if kind == "fault" and fam != "wscc9":
            raise ConfigError("initial.kind", "fault scenarios need the wscc9 family")
        try:
            L, M = int(self.order["L"]), int(self.order["M"])
        except (KeyError, TypeError, ValueError):
            raise ConfigError("order", "needs integer L and M") from None
        if L < 0 or M < 1:
            raise ConfigError("order", "need L >= 0 and M >= 1")
        if L + M + 1 > self.max_order:
            raise ConfigError("order", f"L+M+1 exceeds max_order {self.max_order}")
        try:
            self.tmap
        except (TypeError, ValueError, KeyError) as exc:
            raise ConfigError("mapping", str(exc)) from None
        if not 0 < self.epsilon < self.tmap.horizon:
            raise ConfigError("epsilon", "must lie in (0, horizon)")
        if self.digits is not None and int(self.digits) < 15:
            raise ConfigError("digits", "must be at least 15")

    @property
    def family(self) -> str:
        return self.model["family"]

    @property
    def L(self) -> int:
        return int(self.order["L"])

    @property
    def M_deg(self) -> int:
        return int(self.order["M"])

    @property
    def tmap(self) -> TimeContractionMap:
        return TimeContractionMap(float(self.mapping.get("K", 1.0)), int(self.mapping.get("p", 3)))

    @property
    def working_digits(self) -> int:
        return int(self.digits) if self.digits else default_digits(self.L, self.M_deg)

    def replace(self, **changes) -> "ScenarioConfig":
        data = copy.deepcopy(self.to_dict())
        data.pop("schema")
        data.update(changes)
        return ScenarioConfig(**data)

    def with_clearing_time(self, fct: float) -> "ScenarioConfig":
        initial = dict(self.initial, clearing_time=float(fct))
        return self.replace(initial=initial)

    def to_dict(self) -> dict:
        return {"schema": SCHEMA, **asdict(self)}

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        data = dict(data)
        schema = data.pop("schema", None)
        if schema != SCHEMA:
            raise ConfigError("schema", f"expected {SCHEMA!r}, got {schema!r}")
        known = set(cls.__dataclass_fields__)
        for key in data:
            if key not in known:
                raise ConfigError(key, "unknown key")
        for key in ("model", "initial"):
            if key not in data:
                raise ConfigError(key, "missing")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "ScenarioConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON: {exc}") from None


MODEL_FAMILIES = ("lorenz", "smib", "wscc9", "linear")


def build_model(cfg: ScenarioConfig):
    params = dict(cfg.model.get("params", {}))
    try:
        if cfg.family == "lorenz":
            return LorenzModel(**params)
        if cfg.family == "smib":
            return SMIBModel(**params)
        if cfg.family == "linear":
            return LinearModel(**params)
    except TypeError as exc:
        raise ConfigError("model.params", str(exc)) from None
    raise ConfigError("model.family", "wscc9 models are built from the initial condition")


def _network_data(cfg):
    path = cfg.model.get("network_file")
    if path is None:
        return None
    from .models.wscc9 import load_network
    try:
        return load_network(path)
    except OSError as exc:
        raise ConfigError("model.network_file", f"cannot read {path}: {exc.strerror}") from None


@dataclass
class Problem:
    """Model, float initial condition and SEP guess for one scenario."""

    model: object
    x0: list
    v0: list
    sep_guess: list
    v_guess: list
    gauge_ref: list | None = None


def prepare(cfg: ScenarioConfig) -> Problem:
    if cfg.family == "wscc9":
        data = _network_data(cfg)
        load_model = cfg.model.get("load_model")
        if cfg.initial["kind"] == "fault":
            ini = cfg.initial
            try:
                scen = FaultScenario(int(ini.get("faulted_bus", 9)), float(ini.get("r_f", 0.01)),
                                     float(ini.get("x_f", 0.02)), float(ini["clearing_time"]))
            except KeyError:
                raise ConfigError("initial.clearing_time", "missing") from None
            except ValueError as exc:
                raise ConfigError("initial", str(exc)) from None
            model, x0, v0, x_pre = post_fault_initial_state(scen, data, load_model)
        else:
            from .models.wscc9 import WSCC9Model
            model = WSCC9Model(data, None, "post", load_model)
            x0 = list(cfg.initial["x0"])
            v0 = list(cfg.initial.get("v0") or model.operating_point()[1])
            x_pre = model.operating_point()[0]
        guess = cfg.sep_guess or x_pre
        return Problem(model, x0, v0, list(guess), model.operating_point()[1], list(x_pre))
    model = build_model(cfg)
    x0 = list(cfg.initial["x0"])
    if len(x0) != model.n:
        raise ConfigError("initial.x0", f"expected {model.n} entries")
    if cfg.sep_guess is not None:
        guess = list(cfg.sep_guess)
    elif cfg.family == "lorenz":
        guess = list(model.nontrivial_equilibria(FLOAT)[0])
    elif cfg.family == "smib":
        guess = model.sep(FLOAT)
    else:
        guess = [0.0] * model.n
    return Problem(model, x0, [], guess, [])


@dataclass
class StabilityVerdict:
    status: Status
    tau_pole: object  # mpf or None
    pole_error: object
    epsilon: float
    h_at_horizon: object  # mpf, or None when tau lands on a pole
    h0: object
    digits: int
    diagnostics: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    @property
    def is_stable(self) -> bool:
        return self.status.is_stable

    def to_dict(self) -> dict:
        def s(v):
            return None if v is None else str(v)
        return {"status": self.status.value, "tau_pole": s(self.tau_pole),
                "pole_error": s(self.pole_error), "epsilon": self.epsilon,
                "h_at_horizon": s(self.h_at_horizon), "h0": s(self.h0), "digits": self.digits,
                "diagnostics": self.diagnostics, "timings": self.timings}

    @classmethod
    def from_dict(cls, d: dict, ctx=None) -> "StabilityVerdict":
        ctx = ctx or make_context(d["digits"])

        def p(v):
            return None if v is None else ctx.mpf(v)
        return cls(Status(d["status"]), p(d["tau_pole"]), p(d["pole_error"]), d["epsilon"],
                   p(d["h_at_horizon"]), p(d["h0"]), d["digits"], d.get("diagnostics", {}),
                   d.get("timings", {}))


@dataclass
class Pipeline:
    """Intermediate products of one assessment (kept for CLI exports)."""

    cfg: ScenarioConfig
    ctx: object
    problem: Problem
    sep: object = None
    table: object = None
    indicator: object = None
    pade: object = None
    roots: object = None
    zeros: object = None
    selection: object = None


def _timed(timings, stage, fn, *args, **kw):
    t0 = time.perf_counter()
    try:
        return fn(*args, **kw)
    except (ConfigError, StageError):
        raise
    except (ArithmeticError, ValueError, RuntimeError) as exc:
        raise StageError(stage, exc) from exc
    finally:
        timings[stage] = time.perf_counter() - t0


def run_pipeline(cfg: ScenarioConfig, timings: dict | None = None, stop_after: str | None = None):
    timings = {} if timings is None else timings
    ctx = make_context(cfg.working_digits)
    prob = _timed(timings, "setup", prepare, cfg)
    pl = Pipeline(cfg, ctx, prob)
    model = prob.model
    pl.sep = _timed(timings, "sep", find_sep, model, ctx, prob.sep_guess, prob.v_guess or None,
                    x_ref=prob.gauge_ref)
    v0 = _timed(timings, "consistency", solve_algebraic, model, ctx, prob.x0, prob.v0) \
        if model.m else []
    order = cfg.L + cfg.M_deg
    pl.table = _timed(timings, "propagation", propagate_coefficients, model, cfg.tmap,
                      [ctx.convert(c) for c in prob.x0], v0, order, ctx)
    pl.indicator = _timed(timings, "indicator", indicator_coefficients, pl.table, pl.sep.x_star)
    if stop_after == "coeffs":
        return pl
    pl.pade = _timed(timings, "pade", build_pade, pl.indicator.h, cfg.L, cfg.M_deg)
    pl.roots = _timed(timings, "roots", denominator_roots, pl.pade)
    pl.zeros = _timed(timings, "zeros", numerator_roots, pl.pade)
    horizon = cfg.tmap.horizon
    imag_tol = cfg.imag_tol if cfg.imag_tol is not None else 1e-6 * horizon
    pl.selection = smallest_positive_real_root(
        pl.roots, imag_tol, cfg.pos_tol, zeros=pl.zeros,
        doublet_tol=ctx.mpf(10) ** (-(ctx.dps / 4)), ctx=ctx)
    return pl


def subtype(h_hz, h0, zero_tol=SUBTYPE_ZERO_TOL, ceiling=SUBTYPE_CEILING) -> Status:
    """Unstable subtype from the approximant value near the horizon."""
    if h_hz is None:
        return Status.UNCLASSIFIED
    if abs(h_hz) <= zero_tol * abs(h0):
        return Status.DIVERGENT
    if h_hz < 0 and abs(h_hz) <= ceiling * abs(h0):
        return Status.OTHER_SEP
    return Status.UNCLASSIFIED


def verdict_from_pipeline(pl: Pipeline, timings: dict) -> StabilityVerdict:
    cfg, ctx = pl.cfg, pl.ctx
    horizon = cfg.tmap.horizon
    tau_pole = pl.selection.tau_pole
    pole_error = abs(tau_pole - horizon) if tau_pole is not None else None
    try:
        h_hz = pl.pade(ctx.mpf(horizon) * (1 - ctx.mpf(HORIZON_OFFSET)))
    except PoleHitError:
        h_hz = None
    h0 = pl.indicator.h[0]
    if pole_error is not None and pole_error <= cfg.epsilon:
        status = Status.STABLE
    else:
        status = subtype(h_hz, h0)
    diag = {
        "degree_reductions": pl.pade.reductions,
        "effective_M": pl.pade.M_deg,
        "filtered_roots": len(pl.selection.filtered),
        "complex_excluded": pl.selection.complex_excluded,
        "real_candidates": [str(c) for c in pl.selection.candidates[:5]],
        "root_residual_max": float(pl.roots.condition_hint) if len(pl.roots) else 0.0,
        "roots_converged": pl.roots.converged,
        "sep": [str(c) for c in pl.sep.x_star],
        "sep_residual": float(pl.sep.residual_norm),
        "sep_linearly_stable": pl.sep.stable,
        "order": [cfg.L, cfg.M_deg],
        "mapping": cfg.tmap.to_dict(),
    }
    return StabilityVerdict(status, tau_pole, pole_error, cfg.epsilon, h_hz, h0,
                            cfg.working_digits, diag, dict(timings))


def assess(cfg: ScenarioConfig) -> StabilityVerdict:
    """Run the full assessment for one scenario."""
    timings: dict = {}
    pl = run_pipeline(cfg, timings)
    return verdict_from_pipeline(pl, timings)


def assess_with_pipeline(cfg: ScenarioConfig):
    timings: dict = {}
    pl = run_pipeline(cfg, timings)
    return verdict_from_pipeline(pl, timings), pl


# --- oracle side --------------------------------------------------------------

@dataclass
class OracleRun:
    verdict: benchmark.OracleVerdict
    trajectory: benchmark.Trajectory
    x_star: list
    model: object


def run_oracle(cfg: ScenarioConfig, horizon: float | None = None, sep=None) -> OracleRun:
    prob = prepare(cfg)
    if sep is None:
        sep = find_sep(prob.model, make_context(34), prob.sep_guess, prob.v_guess or None,
                       x_ref=prob.gauge_ref)
    x_star = [float(c) for c in sep.x_star]
    dt = float(cfg.oracle.get("dt", benchmark.DEFAULT_DT))
    horizon = horizon or cfg.oracle.get("horizon")
    traj = benchmark.rk4_integrate(prob.model, prob.x0, prob.v0, dt=dt, horizon=horizon)
    v = benchmark.truth_classify(traj, x_star, prob.model,
                                 conv_tol=float(cfg.oracle.get("conv_tol", benchmark.CONV_TOL)))
    return OracleRun(v, traj, x_star, prob.model)


@dataclass
class AgreementReport:
    method: str
    oracle: str
    match: bool | None  # None when the oracle is inconclusive
    tau_pole: str | None
    details: dict = field(default_factory=dict)

    @property
    def inconclusive(self) -> bool:
        return self.match is None


def verdicts_match(method: Status, oracle: benchmark.OracleVerdict) -> bool | None:
    if oracle is benchmark.OracleVerdict.INCONCLUSIVE:
        return None
    return method.is_stable == oracle.is_stable


def classify_against_oracle(cfg: ScenarioConfig, oracle_horizon: float | None = None):
    verdict = assess(cfg)
    orc = run_oracle(cfg, oracle_horizon)
    return AgreementReport(verdict.status.value, orc.verdict.value,
                           verdicts_match(verdict.status, orc.verdict),
                           None if verdict.tau_pole is None else str(verdict.tau_pole),
                           {"oracle_end_time": float(orc.trajectory.times[-1]),
                            "oracle_terminated": orc.trajectory.terminated})


# --- critical clearing time ---------------------------------------------------

class BracketError(ValueError):
    pass


@dataclass
class CCTBracket:
    method: tuple
    oracle: tuple
    step: float
    evaluations: dict = field(default_factory=dict)

    @property
    def agree(self) -> bool:
        return self.method == self.oracle

    def to_dict(self) -> dict:
        return {"method": list(self.method), "oracle": list(self.oracle), "step": self.step,
                "agree": self.agree,
                "evaluations": {k: {str(t): s for t, s in v.items()}
                                for k, v in self.evaluations.items()}}


def _bisect(is_stable, lo, hi, step, log):
    """Bracket the flip on the grid ``lo + i*step``; endpoints must be checked by the caller."""
    n = max(1, round((hi - lo) / step))
    a, b = 0, n
    while b - a > 1:
        mid = (a + b) // 2
        t = round(lo + mid * step, 12)
        st = is_stable(t)
        log[t] = st
        if st:
            a = mid
        else:
            b = mid
    return round(lo + a * step, 12), round(lo + b * step, 12) if b < n else hi


def cct_bisect(cfg: ScenarioConfig, fct_lo: float, fct_hi: float, step: float = 0.01,
               oracle_horizon: float | None = None, with_oracle: bool = True) -> CCTBracket:
    """Bracket the critical clearing time for both the method and the oracle."""
    if cfg.initial.get("kind") != "fault":
        raise ConfigError("initial.kind", "cct-bisect needs a fault scenario")
    if step <= 0:
        raise ValueError("step must be positive")
    if fct_hi < fct_lo:
        raise ValueError("fct_hi must not be below fct_lo")
    if fct_lo == fct_hi:
        return CCTBracket((fct_lo, fct_hi), (fct_lo, fct_hi), step)

    method_log: dict = {}
    oracle_log: dict = {}

    def method_stable(t):
        return assess(cfg.with_clearing_time(t)).is_stable

    def oracle_stable(t):
        return run_oracle(cfg.with_clearing_time(t), oracle_horizon).verdict.is_stable

    lo_ok, hi_ok = method_stable(fct_lo), method_stable(fct_hi)
    method_log.update({fct_lo: lo_ok, fct_hi: hi_ok})
    if not lo_ok or hi_ok:
        raise BracketError(
            f"precondition violated: method verdicts at fct_lo={fct_lo} and fct_hi={fct_hi} are "
            f"{'Stable' if lo_ok else 'Unstable'}/{'Stable' if hi_ok else 'Unstable'}")
    mb = _bisect(method_stable, fct_lo, fct_hi, step, method_log)
    ob = None
    if with_oracle:
        o_lo, o_hi = oracle_stable(fct_lo), oracle_stable(fct_hi)
        oracle_log.update({fct_lo: o_lo, fct_hi: o_hi})
        if o_lo and not o_hi:
            ob = _bisect(oracle_stable, fct_lo, fct_hi, step, oracle_log)
        else:
            ob = (None, None)
    return CCTBracket(mb, ob or (None, None), step,
                      {"method": method_log, "oracle": oracle_log})
