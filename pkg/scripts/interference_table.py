"""Reliability and latency of every protocol/primitive pair under each interference profile.

    python scripts/interference_table.py --runs 200 --out-dir results/
"""
import argparse
import os
from dataclasses import replace

from xpcsim.harness import ExperimentConfig, InterferenceConfig, run_experiment, write_csv

SETTINGS = {
    "low": InterferenceConfig(kind="low"),
    "high": InterferenceConfig(kind="high"),
    "wifi": InterferenceConfig(kind="wifi", jammers=1),
    "microwave": InterferenceConfig(kind="microwave", jammers=1),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--runs", type=int, default=200)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--out-dir", help="write one CSV per cell here")
    args = ap.parse_args()

    base = ExperimentConfig(runs=args.runs, seed=args.seed)
    print(f"{'interference':<12} {'protocol':<9} {'primitive':<8} {'rel %':>7} {'lat ms':>8}")
    for name, itf in SETTINGS.items():
        for proto in ("2pc", "3pc"):
            for prim in ("glossy", "chaos", "hybrid"):
                cfg = replace(base, protocol=proto, primitive=prim, interference=itf)
                res = run_experiment(cfg)
                print(f"{name:<12} {proto:<9} {prim:<8} {res.reliability:7.2f} {res.latency_ms:8.2f}")
                if args.out_dir:
                    os.makedirs(args.out_dir, exist_ok=True)
                    write_csv(res, os.path.join(args.out_dir, f"{name}_{proto}_{prim}.csv"))


if __name__ == "__main__":
    main()
