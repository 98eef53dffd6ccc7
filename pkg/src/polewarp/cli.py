"""Command-line front end: ``polewarp <subcommand> --config <file>``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

from . import __version__
from .benchmark import indicator_along_trajectory
from .classifier import (BracketError, ConfigError, ScenarioConfig, StageError,
                         assess_with_pipeline, cct_bisect, run_oracle, run_pipeline)
from .dtengine import DegenerateInitialStateError
from .models.base import ModelError
from .pade import PoleHitError
from .timewarp import map_time

EXIT_STABLE = 0
EXIT_UNSTABLE = 10
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
DIGITS_ENV = "POLEWARP_DIGITS"


@dataclass
class RunManifest:
    command: str
    config: dict
    tool_version: str
    digits: int
    timings: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)

    @property
    def total_seconds(self) -> float:
        return sum(self.timings.values())

    def to_dict(self) -> dict:
        return {**asdict(self), "total_seconds": self.total_seconds}


def builtin_scenarios() -> list[str]:
    root = resources.files("polewarp.scenarios")
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".json"))


def resolve_config_path(name: str):
    p = Path(name)
    if p.exists():
        return p
    stem = name if name.endswith(".json") else name + ".json"
    root = resources.files("polewarp.scenarios")
    cand = root.joinpath(stem)
    if cand.is_file():
        return cand
    return p  # let the loader report the missing file


def load_config(args) -> ScenarioConfig:
    path = resolve_config_path(args.config)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {args.config}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON: {exc}") from None
    cfg = ScenarioConfig.from_dict(data)
    changes = {}
    if getattr(args, "order", None):
        changes["order"] = {"L": args.order[0], "M": args.order[1]}
    if getattr(args, "epsilon", None) is not None:
        changes["epsilon"] = args.epsilon
    digits = getattr(args, "digits", None)
    if digits is None and cfg.digits is None and os.environ.get(DIGITS_ENV):
        try:
            digits = int(os.environ[DIGITS_ENV])
        except ValueError:
            raise ConfigError(DIGITS_ENV, "must be an integer") from None
    if digits is not None:
        changes["digits"] = digits
    return cfg.replace(**changes) if changes else cfg


def atomic_write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)
    return path


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _emit(args, name: str, text: str, manifest: RunManifest) -> None:
    if args.out_dir:
        path = atomic_write(Path(args.out_dir) / name, text)
        manifest.outputs.append(str(path))
    else:
        sys.stdout.write(text)


def _finish(args, manifest: RunManifest, stem: str) -> None:
    if args.out_dir:
        path = Path(args.out_dir) / f"{stem}.manifest.json"
        manifest.outputs.append(str(path))
        atomic_write(path, json.dumps(manifest.to_dict(), indent=2) + "\n")


# --- subcommands --------------------------------------------------------------

def _assess_one(cfg: ScenarioConfig):
    return assess_with_pipeline(cfg)[0]


def cmd_assess(args) -> int:
    cfgs = [load_config(argparse.Namespace(**{**vars(args), "config": c})) for c in args.config_list]
    jobs = max(1, args.jobs or 1)
    if jobs > 1 and len(cfgs) > 1:
        with ThreadPoolExecutor(jobs) as pool:
            verdicts = list(pool.map(_assess_one, cfgs))
    else:
        verdicts = [_assess_one(c) for c in cfgs]
    out = []
    for cfg, v in zip(cfgs, verdicts):
        manifest = RunManifest("assess", cfg.to_dict(), __version__, cfg.working_digits,
                               dict(v.timings))
        record = {"scenario": cfg.name, "config": cfg.to_dict(), **v.to_dict()}
        if args.out_dir:
            _emit(args, f"{cfg.name}.verdict.json", json.dumps(record, indent=2) + "\n", manifest)
            _finish(args, manifest, cfg.name)
        out.append(record)
        if not args.json:
            tp = "none" if v.tau_pole is None else f"{float(v.tau_pole):.6f}"
            print(f"{cfg.name}: {v.status.value}  tau_pole={tp}  epsilon={v.epsilon}  "
                  f"h(tau_h)={'pole' if v.h_at_horizon is None else f'{float(v.h_at_horizon):.6g}'}")
    if args.json:
        print(json.dumps(out[0] if len(out) == 1 else out, indent=2))
    return EXIT_STABLE if all(v.is_stable for v in verdicts) else EXIT_UNSTABLE


def cmd_simulate(args) -> int:
    cfg = load_config(args)
    t0 = time.perf_counter()
    orc = run_oracle(cfg, args.horizon)
    manifest = RunManifest("simulate", cfg.to_dict(), __version__, cfg.working_digits,
                           {"oracle": time.perf_counter() - t0})
    names = list(orc.model.state_names)
    rows = []
    xs = orc.x_star
    for t, x in zip(orc.trajectory.times, orc.trajectory.states):
        d = sum((a - b) ** 2 for a, b in zip(x, xs))
        h = repr(-1.0 / d) if d > 0 else ""
        rows.append([repr(float(t)), repr(float(map_time(cfg.tmap, float(t))))]
                    + [repr(float(c)) for c in x] + [h])
    _emit(args, f"{cfg.name}.simulate.csv", _csv(rows, ["t", "tau", *names, "h"]), manifest)
    _finish(args, manifest, cfg.name)
    print(f"# oracle verdict: {orc.verdict.value} ({orc.trajectory.terminated})", file=sys.stderr)
    return EXIT_STABLE if orc.verdict.is_stable else EXIT_UNSTABLE


def cmd_compare(args) -> int:
    cfg = load_config(args)
    timings: dict = {}
    pl = run_pipeline(cfg, timings)
    t0 = time.perf_counter()
    orc = run_oracle(cfg, args.horizon, sep=pl.sep)
    timings["oracle"] = time.perf_counter() - t0
    pairs, _ = indicator_along_trajectory(orc.trajectory, orc.x_star, cfg.tmap)
    stride = max(1, len(pairs) // args.samples)
    rows = []
    for tau, h in pairs[::stride]:
        try:
            hp = pl.pade(pl.ctx.convert(tau))
            rows.append([repr(tau), repr(h), str(hp), repr(abs(float(hp) - h))])
        except PoleHitError:
            rows.append([repr(tau), repr(h), "", ""])
    manifest = RunManifest("compare", cfg.to_dict(), __version__, cfg.working_digits, timings)
    _emit(args, f"{cfg.name}.compare.csv", _csv(rows, ["tau", "h_oracle", "h_pade", "abs_diff"]),
          manifest)
    _finish(args, manifest, cfg.name)
    return EXIT_STABLE


def cmd_coeffs(args) -> int:
    cfg = load_config(args)
    timings: dict = {}
    pl = run_pipeline(cfg, timings, stop_after="coeffs")
    model = pl.problem.model
    header = ["k", *[f"X_{n}" for n in model.state_names],
              *[f"V_{n}" for n in model.algebraic_names], "h_k"]
    rows = []
    for k in range(pl.table.order + 1):
        rows.append([k, *[str(s[k]) for s in pl.table.X], *[str(s[k]) for s in pl.table.V],
                     str(pl.indicator.h[k])])
    manifest = RunManifest("coeffs", cfg.to_dict(), __version__, cfg.working_digits, timings)
    _emit(args, f"{cfg.name}.coeffs.csv", _csv(rows, header), manifest)
    _finish(args, manifest, cfg.name)
    return EXIT_STABLE


def cmd_pade_roots(args) -> int:
    cfg = load_config(args)
    timings: dict = {}
    pl = run_pipeline(cfg, timings)
    sel = pl.selection
    filtered = {str(z) for z, _ in sel.filtered}
    kept = {str(z) for z in sel.candidates}
    records = []
    for z, r in sorted(zip(pl.roots.roots, pl.roots.residuals), key=lambda p: abs(p[0])):
        re = str(z.real)
        status = "kept" if re in kept else "doublet" if re in filtered else "other"
        records.append({"re": re, "im": str(z.imag), "residual": float(r), "status": status})
    payload = {"scenario": cfg.name, "L": cfg.L, "M": pl.pade.M_deg,
               "tau_pole": None if sel.tau_pole is None else str(sel.tau_pole), "roots": records}
    manifest = RunManifest("pade-roots", cfg.to_dict(), __version__, cfg.working_digits, timings)
    if args.json:
        _emit(args, f"{cfg.name}.roots.json", json.dumps(payload, indent=2) + "\n", manifest)
    else:
        lines = [f"{'re':>24} {'im':>24} {'residual':>10}  status"]
        for r in records:
            lines.append(f"{float(r['re']):24.16e} {float(r['im']):24.16e} "
                         f"{r['residual']:10.2e}  {r['status']}")
        _emit(args, f"{cfg.name}.roots.txt", "\n".join(lines) + "\n", manifest)
    _finish(args, manifest, cfg.name)
    return EXIT_STABLE


def cmd_cct_bisect(args) -> int:
    cfg = load_config(args)
    t0 = time.perf_counter()
    br = cct_bisect(cfg, args.lo, args.hi, args.step, with_oracle=not args.no_oracle)
    manifest = RunManifest("cct-bisect", cfg.to_dict(), __version__, cfg.working_digits,
                           {"bisect": time.perf_counter() - t0})
    if args.json:
        _emit(args, f"{cfg.name}.cct.json", json.dumps(br.to_dict(), indent=2) + "\n", manifest)
    else:
        _emit(args, f"{cfg.name}.cct.txt",
              f"method bracket: {list(br.method)}\noracle bracket: {list(br.oracle)}\n"
              f"agree: {br.agree}\n", manifest)
    _finish(args, manifest, cfg.name)
    return EXIT_STABLE


# --- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="polewarp", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, multi=False):
        if multi:
            sp.add_argument("--config", dest="config_list", action="append", required=True,
                            help="scenario file or built-in name (repeatable)")
        else:
            sp.add_argument("--config", required=True, help="scenario file or built-in name")
        sp.add_argument("--json", action="store_true")
        sp.add_argument("--digits", type=int)
        sp.add_argument("--order", type=int, nargs=2, metavar=("L", "M"))
        sp.add_argument("--epsilon", type=float)
        sp.add_argument("--out-dir")
        sp.add_argument("--jobs", type=int, default=1)
        return sp

    common(sub.add_parser("assess", help="run the pole test"), multi=True).set_defaults(
        func=cmd_assess)

    s = common(sub.add_parser("simulate", help="RK4 oracle trajectory as CSV"))
    s.add_argument("--horizon", type=float)
    s.set_defaults(func=cmd_simulate)
    c = common(sub.add_parser("compare", help="oracle vs approximant indicator CSV"))
    c.add_argument("--horizon", type=float)
    c.add_argument("--samples", type=int, default=2000)
    c.set_defaults(func=cmd_compare)
    common(sub.add_parser("coeffs", help="Taylor coefficient table CSV")).set_defaults(
        func=cmd_coeffs)
    common(sub.add_parser("pade-roots", help="denominator roots")).set_defaults(
        func=cmd_pade_roots)
    b = common(sub.add_parser("cct-bisect", help="critical clearing time bracket"))
    b.add_argument("--lo", type=float, required=True)
    b.add_argument("--hi", type=float, required=True)
    b.add_argument("--step", type=float, default=0.01)
    b.add_argument("--no-oracle", action="store_true")
    b.set_defaults(func=cmd_cct_bisect)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BracketError, DegenerateInitialStateError, ModelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except StageError as exc:
        print(f"numerical error in stage '{exc.stage}': {exc.cause}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
