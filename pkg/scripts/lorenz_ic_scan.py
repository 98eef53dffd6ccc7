"""Verdict, oracle and horizon value of h for Lorenz initial conditions.

    python scripts/lorenz_ic_scan.py --chaotic "1,1,1" "5,5,20" "-8,-8,27"
"""

import argparse
from dataclasses import dataclass

from polewarp.classifier import ScenarioConfig, assess, run_oracle


@dataclass
class LorenzScan:
    params: tuple = ("1", "2", "1")
    order: int = 40
    digits: int = 81
    K: float = 1.0


CHAOTIC = ("10", "28", "8/3")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("ics", nargs="+", help="comma-separated x,y,z")
    ap.add_argument("--chaotic", action="store_true")
    ap.add_argument("--order", type=int, default=LorenzScan.order)
    args = ap.parse_args(argv)
    scan = LorenzScan(CHAOTIC if args.chaotic else LorenzScan.params, args.order,
                      2 * args.order + 1)

    sigma, rho, beta = scan.params
    print("x0  verdict  tau_pole  |h_hz|/|h0|  oracle")
    for ic in args.ics:
        x0 = [float(c) for c in ic.split(",")]
        cfg = ScenarioConfig(model={"family": "lorenz",
                                    "params": {"sigma": sigma, "rho": rho, "beta": beta}},
                             initial={"kind": "explicit", "x0": x0},
                             mapping={"K": scan.K, "p": 3},
                             order={"L": scan.order, "M": scan.order}, digits=scan.digits)
        v = assess(cfg)
        ratio = "pole" if v.h_at_horizon is None else f"{float(abs(v.h_at_horizon / v.h0)):.3g}"
        tp = "-" if v.tau_pole is None else f"{float(v.tau_pole):.5f}"
        print(f"{ic}  {v.status.value}  {tp}  {ratio}  {run_oracle(cfg).verdict.value}",
              flush=True)


if __name__ == "__main__":
    main()
