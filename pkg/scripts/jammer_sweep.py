"""Reliability as the number of microwave jammers grows from 1 to 8.

    python scripts/jammer_sweep.py --runs 100
"""
import argparse

from xpcsim.harness import ExperimentConfig, InterferenceConfig, run_experiment
from xpcsim.packets import PhaseTag

VARIANTS = (("2pc", "glossy"), ("2pc", "chaos"), ("2pc", "hybrid"), ("3pc", "glossy"), ("3pc", "hybrid"))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--runs", type=int, default=100)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--max-jammers", type=int, default=8)
    ap.add_argument("--duty", type=float, default=0.5)
    args = ap.parse_args()

    counts = range(1, args.max_jammers + 1)
    print("variant      " + " ".join(f"{j:>6}" for j in counts) + "   avg retx P1")
    for proto, prim in VARIANTS:
        rels, retx = [], []
        for j in counts:
            cfg = ExperimentConfig(
                protocol=proto, primitive=prim, runs=args.runs, seed=args.seed,
                interference=InterferenceConfig(kind="microwave", jammers=j, duty=args.duty),
            )
            res = run_experiment(cfg)
            rels.append(res.reliability)
            retx.append(res.aggregate["retx"][PhaseTag.P1])
        print(f"{proto}-{prim:<8} " + " ".join(f"{r:6.1f}" for r in rels)
              + "   " + " ".join(f"{x:.1f}" for x in retx))


if __name__ == "__main__":
    main()
