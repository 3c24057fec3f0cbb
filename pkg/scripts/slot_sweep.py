"""Chaos-only reliability and first-round coverage versus the Chaos slot duration.

With ``--retx 1`` a phase gets one productive round, which isolates how much
of the slot is lost to the dead gap before aggregation starts.

    python scripts/slot_sweep.py --retx 1
"""
import argparse

from xpcsim.harness import ExperimentConfig, InterferenceConfig, run_experiment
from xpcsim.packets import PhaseTag


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--runs", type=int, default=200)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--retx", type=int, default=1)
    ap.add_argument("--primitive", default="chaos", choices=("chaos", "hybrid"))
    ap.add_argument("--interference", default="low")
    ap.add_argument("--slots", type=int, nargs="+", default=[10, 25, 50, 75, 100, 150])
    args = ap.parse_args()

    print(f"{'slot ms':>7} {'rel %':>7} {'lat ms':>8} {'P1 cov %':>9}")
    for slot in args.slots:
        cfg = ExperimentConfig(
            primitive=args.primitive, slot_ms=slot, timeout_retx=args.retx,
            runs=args.runs, seed=args.seed,
            interference=InterferenceConfig(kind=args.interference),
        )
        res = run_experiment(cfg)
        cov = res.aggregate["coverage"][PhaseTag.P1]
        print(f"{slot:7d} {res.reliability:7.2f} {res.latency_ms:8.2f} {cov:9.2f}")


if __name__ == "__main__":
    main()
