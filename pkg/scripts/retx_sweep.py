"""Outcome mix versus the retransmission limit, by primitive.

    python scripts/retx_sweep.py --interference high
"""
import argparse

from xpcsim.harness import ExperimentConfig, InterferenceConfig, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--runs", type=int, default=200)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--protocol", default="2pc", choices=("2pc", "3pc"))
    ap.add_argument("--interference", default="high")
    ap.add_argument("--jammers", type=int, default=0)
    ap.add_argument("--limits", type=int, nargs="+", default=[1, 2, 3, 5, 9])
    args = ap.parse_args()

    print(f"{'primitive':<8} {'retx':>4} {'rel %':>7} {'lat ms':>8}  outcomes")
    for prim in ("glossy", "chaos", "hybrid"):
        for r in args.limits:
            cfg = ExperimentConfig(
                protocol=args.protocol, primitive=prim, timeout_retx=r,
                runs=args.runs, seed=args.seed,
                interference=InterferenceConfig(kind=args.interference, jammers=args.jammers),
            )
            res = run_experiment(cfg)
            mix = ", ".join(f"{k} {v}" for k, v in sorted(res.aggregate["outcomes"].items()))
            print(f"{prim:<8} {r:4d} {res.reliability:7.2f} {res.latency_ms:8.2f}  {mix}")


if __name__ == "__main__":
    main()
