"""Command-line entry point: ``xpcsim --config exp.yaml --runs 200 --out results.csv``."""
from __future__ import annotations

import argparse
import math
import sys

from .harness import (
    ConfigError,
    ExperimentConfig,
    csv_text,
    load_config,
    run_experiment,
    with_overrides,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="xpcsim",
        description="Run XPC atomic-commit experiments over simulated Glossy/Chaos/Hybrid floods.",
    )
    p.add_argument("--config", metavar="PATH", help="YAML experiment file")
    p.add_argument("--protocol", choices=("2pc", "3pc"))
    p.add_argument("--primitive", choices=("glossy", "chaos", "hybrid"))
    p.add_argument("--slot-ms", type=int, dest="slot_ms", help="Chaos slot duration")
    p.add_argument("--retx", type=int, help="retransmission limit per phase")
    p.add_argument("--interference", choices=("low", "high", "wifi", "microwave"))
    p.add_argument("--jammers", type=int)
    p.add_argument("--runs", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", metavar="PATH", help="CSV output path (stdout when omitted)")
    p.add_argument("--workers", type=int, default=1, help="worker processes")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on bad flags, which is also our config-error code
        return int(exc.code or 0)

    try:
        cfg = load_config(args.config) if args.config else ExperimentConfig()
        cfg = with_overrides(
            cfg,
            protocol=args.protocol,
            primitive=args.primitive,
            slot_ms=args.slot_ms,
            retx=args.retx,
            interference=args.interference,
            jammers=args.jammers,
            runs=args.runs,
            seed=args.seed,
            out=args.out,
        )
        cfg.validate()
        if args.workers < 1:
            raise ConfigError("--workers must be at least 1")
    except ConfigError as exc:
        print(f"xpcsim: invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"xpcsim: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO

    result = run_experiment(cfg, workers=args.workers)
    text = csv_text(result)
    try:
        if cfg.out:
            with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"xpcsim: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO

    agg = result.aggregate
    lat = agg["latency_ms"]
    summary = (
        f"{cfg.protocol}/{cfg.primitive} {cfg.interference.kind} jammers={cfg.interference.jammers}: "
        f"reliability {agg['reliability']:.2f}%  latency "
        f"{'nan' if math.isnan(lat) else f'{lat:.2f}'} ms over {cfg.runs} runs"
    )
    print(summary, file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
