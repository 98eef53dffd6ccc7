"""Assess every built-in scenario and print one line each."""

from polewarp.classifier import ScenarioConfig, assess
from polewarp.cli import builtin_scenarios, resolve_config_path


def main():
    for name in builtin_scenarios():
        cfg = ScenarioConfig.load(resolve_config_path(name))
        v = assess(cfg)
        tp = "-" if v.tau_pole is None else f"{float(v.tau_pole):.5f}"
        print(f"{cfg.name:18s} {v.status.value:22s} tau_pole={tp}  "
              f"t={sum(v.timings.values()):.1f}s", flush=True)


if __name__ == "__main__":
    main()
