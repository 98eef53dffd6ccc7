"""Method and oracle verdicts for the 9-bus fault over a list of clearing times.

    python scripts/wscc_cct_scan.py 0.1 0.3 0.5 0.57 0.58
"""

import argparse
from dataclasses import dataclass

from polewarp.classifier import ScenarioConfig, assess, run_oracle
from polewarp.cli import resolve_config_path


@dataclass
class ScanConfig:
    scenario: str = "wscc9_fault"
    order: int = 100
    oracle: bool = True


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("times", type=float, nargs="+")
    ap.add_argument("--scenario", default=ScanConfig.scenario)
    ap.add_argument("--order", type=int, default=ScanConfig.order)
    ap.add_argument("--no-oracle", action="store_true")
    args = ap.parse_args(argv)
    scan = ScanConfig(args.scenario, args.order, not args.no_oracle)

    base = ScenarioConfig.load(resolve_config_path(scan.scenario))
    base = base.replace(order={"L": scan.order, "M": scan.order})
    print("fct  method  tau_pole  h_at_horizon  oracle")
    for t in args.times:
        cfg = base.with_clearing_time(t)
        v = assess(cfg)
        orc = run_oracle(cfg).verdict.value if scan.oracle else "-"
        tp = "-" if v.tau_pole is None else f"{float(v.tau_pole):.5f}"
        hz = "pole" if v.h_at_horizon is None else f"{float(v.h_at_horizon):.4g}"
        print(f"{t:.3f}  {v.status.value}  {tp}  {hz}  {orc}", flush=True)


if __name__ == "__main__":
    main()
