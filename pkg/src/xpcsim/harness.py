"""Experiment runner: configuration, per-run metrics, aggregation and CSV output."""
from __future__ import annotations

import csv
import io
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from typing import Mapping, Optional, Sequence

import yaml

from .packets import PhaseTag
from .primitives import ChaosParams, GlossyParams
from .protocols import Decision, make_protocol
from .radio import (
    InterferenceKind,
    InterferenceProfile,
    Network,
    Topology,
    TopologySpec,
    build_topology,
    select_jammers,
)
from .rounds import Mode, RadioChannel, Transaction
from .xpc import XpcConfig

CSV_HEADER = (
    "run", "seed", "outcome", "reliability", "latency_ms",
    "p1_cov", "p2_cov", "p3_cov", "p1_retx", "p2_retx", "p3_retx",
)
PHASES = (PhaseTag.P1, PhaseTag.P2, PhaseTag.P3)


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass(frozen=True)
class InterferenceConfig:
    kind: str = "low"
    jammers: int = 0
    nodes: Optional[tuple] = None  # explicit jammer ids; overrides ``jammers``
    duty: float = 0.5
    period_ms: float = 20.0
    wifi_idle_mean_ms: float = 20.0
    wifi_burst_ms: float = 10.0
    high_prr_scale: float = 0.9


@dataclass(frozen=True)
class ExperimentConfig:
    protocol: str = "2pc"
    primitive: str = "glossy"
    slot_ms: int = 50
    timeout_retx: int = 9
    runs: int = 100
    seed: int = 1
    out: Optional[str] = None
    data_slot_ms: int = 12
    period_ms: int = 1000
    wake_jitter_us: int = 20_000
    topology: TopologySpec = field(default_factory=TopologySpec)
    interference: InterferenceConfig = field(default_factory=InterferenceConfig)
    glossy: GlossyParams = field(default_factory=GlossyParams)
    chaos: ChaosParams = field(default_factory=ChaosParams)

    def validate(self) -> "ExperimentConfig":
        """Check every field; raises :class:`ConfigError` on the first problem."""
        if self.protocol not in ("2pc", "3pc"):
            raise ConfigError(f"protocol must be 2pc or 3pc, got {self.protocol!r}")
        if self.primitive not in {m.value for m in Mode}:
            raise ConfigError(f"primitive must be glossy, chaos or hybrid, got {self.primitive!r}")
        for name in ("slot_ms", "data_slot_ms", "period_ms", "runs"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value <= 0:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        if not isinstance(self.timeout_retx, int) or self.timeout_retx < 1:
            raise ConfigError(f"retx must be an integer >= 1, got {self.timeout_retx!r}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be a 64-bit non-negative integer, got {self.seed!r}")
        if not isinstance(self.wake_jitter_us, int) or self.wake_jitter_us < 0:
            raise ConfigError("wake_jitter_us must be a non-negative integer")
        itf = self.interference
        try:
            InterferenceKind(itf.kind)
        except ValueError:
            raise ConfigError(
                f"interference must be one of low, high, wifi, microwave, got {itf.kind!r}"
            ) from None
        if not isinstance(itf.jammers, int) or itf.jammers < 0:
            raise ConfigError(f"jammers must be a non-negative integer, got {itf.jammers!r}")
        try:
            topo = self.build_topology()
        except ValueError as exc:
            raise ConfigError(f"topology: {exc}") from None
        n_nodes = len(topo.nodes)
        count = len(itf.nodes) if itf.nodes is not None else itf.jammers
        if count >= n_nodes:
            raise ConfigError(f"jammer count {count} must be below the node count {n_nodes}")
        if itf.nodes is not None:
            bad = set(itf.nodes) - set(topo.nodes)
            if bad:
                raise ConfigError(f"jammer nodes {sorted(bad)} are not in the topology")
        try:
            self.profile(topo)
        except ValueError as exc:
            raise ConfigError(f"interference: {exc}") from None
        return self

    def build_topology(self) -> Topology:
        return build_topology(self.topology)

    def profile(self, topo: Topology) -> InterferenceProfile:
        itf = self.interference
        if itf.nodes is not None:
            jammers = frozenset(itf.nodes)
        else:
            jammers = select_jammers(topo, itf.jammers)
        return InterferenceProfile(
            kind=InterferenceKind(itf.kind),
            jammers=jammers,
            duty=itf.duty,
            period_ms=itf.period_ms,
            wifi_idle_mean_ms=itf.wifi_idle_mean_ms,
            wifi_burst_ms=itf.wifi_burst_ms,
            high_prr_scale=itf.high_prr_scale,
        )


def _build(cls, data, section: str):
    if data is None:
        return cls()
    if not isinstance(data, Mapping):
        raise ConfigError(f"section {section!r} must be a mapping")
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown keys in {section!r}: {sorted(unknown)}")
    kwargs = dict(data)
    for key in ("links", "nodes"):
        if isinstance(kwargs.get(key), list):
            kwargs[key] = tuple(tuple(x) if isinstance(x, list) else x for x in kwargs[key])
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{section}: {exc}") from None


# top-level aliases accepted in config files, matching the CLI flag names
_ALIASES = {"retx": "timeout_retx"}


def config_from_mapping(data: Mapping) -> ExperimentConfig:
    if data is None:
        data = {}
    if not isinstance(data, Mapping):
        raise ConfigError("config file must hold a mapping at the top level")
    data = {_ALIASES.get(k, k): v for k, v in data.items()}
    nested = {
        "topology": TopologySpec,
        "interference": InterferenceConfig,
        "glossy": GlossyParams,
        "chaos": ChaosParams,
    }
    kwargs = {}
    itf = data.get("interference")
    if isinstance(itf, str):
        data["interference"] = {"kind": itf}
    for key, value in data.items():
        if key in nested:
            kwargs[key] = _build(nested[key], value, key)
        elif key in {f.name for f in fields(ExperimentConfig)}:
            kwargs[key] = value
        else:
            raise ConfigError(f"unknown config key {key!r}")
    return ExperimentConfig(**kwargs)


def load_config(path: str) -> ExperimentConfig:
    """Read a YAML config file. ``OSError`` propagates; bad content raises ConfigError."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    return config_from_mapping(data)


def with_overrides(cfg: ExperimentConfig, **overrides) -> ExperimentConfig:
    """Apply flag-style overrides; ``None`` values are ignored."""
    top = {}
    itf = {}
    for key, value in overrides.items():
        if value is None:
            continue
        if key == "interference":
            itf["kind"] = value
        elif key == "jammers":
            itf["jammers"] = value
            itf["nodes"] = None
        else:
            top[_ALIASES.get(key, key)] = value
    if itf:
        top["interference"] = replace(cfg.interference, **itf)
    return replace(cfg, **top)


@dataclass
class RunMetrics:
    run: int
    seed: int
    outcome: str
    reliability: int
    latency_ms: float
    coverage: dict
    attempts: dict
    decisions: dict


def first_round_coverage(replied_after_first: int, cohort_nodes: int) -> float:
    if cohort_nodes <= 0:
        raise ValueError("cohort must be non-empty")
    if not 0 <= replied_after_first <= cohort_nodes:
        raise ValueError("replied count out of range")
    return 100.0 * replied_after_first / cohort_nodes


def avg_retransmissions(attempts: Sequence) -> float:
    """Mean attempts per phase; a timed-out phase already counts ``timeout_retx + 1``."""
    if not attempts:
        raise ValueError("need at least one run")
    return sum(attempts) / len(attempts)


def _mean(values):
    return sum(values) / len(values) if values else math.nan


def run_once(cfg: ExperimentConfig, topo: Topology, profile: InterferenceProfile, index: int) -> RunMetrics:
    seed = cfg.seed + index
    net = Network(topo, profile, seed=seed)
    rng = random.Random(f"run:{seed}")
    xcfg = XpcConfig(
        topo.participants, cfg.timeout_retx, cfg.data_slot_ms, cfg.period_ms
    )
    channel = RadioChannel(
        net, rng, xcfg.cohort, glossy=cfg.glossy, chaos=cfg.chaos,
        wake_jitter_us=cfg.wake_jitter_us,
    )
    tx = Transaction(
        make_protocol(cfg.protocol), xcfg, Mode(cfg.primitive),
        chaos_slot_ms=cfg.slot_ms, host_id=topo.host,
    )
    out = tx.run(channel)
    return RunMetrics(
        run=index,
        seed=seed,
        outcome=out.label,
        reliability=int(out.reliable),
        latency_ms=out.latency_ms,
        coverage=dict(out.first_coverage),
        attempts=dict(out.attempts),
        decisions=dict(out.decisions),
    )


def _run_chunk(args):
    cfg, topo, profile, indices = args
    return [run_once(cfg, topo, profile, i) for i in indices]


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    runs: list
    aggregate: dict

    @property
    def reliability(self) -> float:
        return self.aggregate["reliability"]

    @property
    def latency_ms(self) -> float:
        return self.aggregate["latency_ms"]


def aggregate(runs: Sequence, protocol: str) -> dict:
    phases = make_protocol(protocol).phases
    agg = {
        "reliability": 100.0 * _mean([r.reliability for r in runs]),
        "latency_ms": _mean([r.latency_ms for r in runs]),
        "outcomes": {},
        "coverage": {},
        "retx": {},
    }
    for r in runs:
        agg["outcomes"][r.outcome] = agg["outcomes"].get(r.outcome, 0) + 1
    for ph in phases:
        agg["coverage"][ph] = _mean([r.coverage[ph] for r in runs if ph in r.coverage])
        reached = [r.attempts[ph] for r in runs if ph in r.attempts]
        agg["retx"][ph] = avg_retransmissions(reached) if reached else math.nan
    return agg


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    """Run ``cfg.runs`` transactions with sub-seeds ``seed + i`` and aggregate them."""
    cfg.validate()
    topo = cfg.build_topology()
    profile = cfg.profile(topo)
    indices = list(range(cfg.runs))
    if workers <= 1 or cfg.runs == 1:
        runs = _run_chunk((cfg, topo, profile, indices))
    else:
        chunks = [indices[k::workers] for k in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(_run_chunk, [(cfg, topo, profile, c) for c in chunks if c])
            runs = [r for part in parts for r in part]
    runs.sort(key=lambda r: r.run)
    return ExperimentResult(cfg, runs, aggregate(runs, cfg.protocol))


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return f"{x:.2f}"


def _phase_cells(values: Mapping, phases, missing: str):
    cells = []
    for ph in PHASES:
        if ph not in phases:
            cells.append("")
        elif ph in values:
            v = values[ph]
            cells.append(_fmt(float(v)) if isinstance(v, float) else str(v))
        else:
            cells.append(missing)
    return cells


def csv_text(result: ExperimentResult) -> str:
    phases = make_protocol(result.config.protocol).phases
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in result.runs:
        cov = _phase_cells(r.coverage, phases, "")
        retx = _phase_cells(r.attempts, phases, "")
        w.writerow([r.run, r.seed, r.outcome, r.reliability, _fmt(r.latency_ms), *cov, *retx])
    agg = result.aggregate
    outcome = ";".join(f"{k}={v}" for k, v in sorted(agg["outcomes"].items()))
    cov = [_fmt(agg["coverage"][ph]) if ph in phases else "" for ph in PHASES]
    retx = [_fmt(agg["retx"][ph]) if ph in phases else "" for ph in PHASES]
    w.writerow(["mean", result.config.seed, outcome, _fmt(agg["reliability"]),
                _fmt(agg["latency_ms"]), *cov, *retx])
    return buf.getvalue()


def write_csv(result: ExperimentResult, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(csv_text(result))


def decision_counts(result: ExperimentResult) -> dict:
    counts = {d: 0 for d in Decision}
    for r in result.runs:
        for d in r.decisions.values():
            counts[d] += 1
    return counts
