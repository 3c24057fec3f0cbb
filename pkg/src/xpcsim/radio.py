"""Seeded radio model for a multi-hop low-power network.

Links carry a packet reception ratio and a received-signal level used by the
capture rule. Interference comes either as a PRR scaling (low/high background
noise) or as jammer nodes that blank reception at their neighbours.
"""
from __future__ import annotations

import bisect
import math
import random
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

NodeId = int

CONSTRUCTIVE_WINDOW_US = 0.5
CAPTURE_WINDOW_US = 160.0
CAPTURE_THRESHOLD_DB = 3.0


class TopologyError(ValueError):
    """Raised when a topology spec cannot produce a connected network."""


@dataclass(frozen=True)
class LinkQuality:
    base_prr: float
    rssi_margin_db: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.base_prr <= 1.0:
            raise ValueError(f"base_prr must be in [0, 1], got {self.base_prr}")


@dataclass(frozen=True)
class TopologySpec:
    """Either an explicit link list or a random-geometric generator.

    Explicit links are ``(a, b, prr)`` or ``(a, b, prr, rssi_db)`` tuples.
    Random-geometric nodes are placed in the unit square; nodes closer than
    ``radius`` are linked with a PRR falling quadratically from ``prr_near``
    to ``prr_edge`` at the radius.
    """

    kind: str = "random_geometric"
    nodes: int = 20
    radius: float = 0.35
    seed: int = 7
    host: NodeId = 0
    links: tuple = ()
    prr_near: float = 0.99
    prr_edge: float = 0.80
    rssi_max_db: float = 6.0
    max_retries: int = 200

    def __post_init__(self):
        if self.kind not in ("random_geometric", "explicit"):
            raise ValueError(f"unknown topology kind {self.kind!r}")
        if self.kind == "random_geometric":
            if self.nodes < 2:
                raise ValueError("a topology needs at least 2 nodes")
            if self.radius <= 0:
                raise ValueError("radius must be positive")
        if not (0.0 <= self.prr_edge <= 1.0 and 0.0 <= self.prr_near <= 1.0):
            raise ValueError("prr_near and prr_edge must be in [0, 1]")


@dataclass
class Topology:
    nodes: tuple
    links: dict
    host: NodeId = 0
    positions: Optional[dict] = None
    neighbors: dict = field(init=False, repr=False)

    def __post_init__(self):
        nbrs = {n: [] for n in self.nodes}
        for (a, b) in self.links:
            if a == b:
                raise TopologyError(f"self-link on node {a}")
            if (b, a) not in self.links:
                raise TopologyError(f"link {a}-{b} is not symmetric")
            if self.links[(a, b)].base_prr != self.links[(b, a)].base_prr:
                raise TopologyError(f"link {a}-{b} has asymmetric PRR")
            nbrs[a].append(b)
        self.neighbors = {n: tuple(sorted(v)) for n, v in nbrs.items()}
        if self.host not in self.neighbors:
            raise TopologyError(f"host {self.host} is not a topology node")

    def link(self, sender: NodeId, receiver: NodeId) -> LinkQuality:
        return self.links[(sender, receiver)]

    def degree(self, node: NodeId) -> int:
        return len(self.neighbors[node])

    def hops_from(self, source: NodeId) -> dict:
        dist = {source: 0}
        queue = deque([source])
        while queue:
            u = queue.popleft()
            for v in self.neighbors[u]:
                if v not in dist:
                    dist[v] = dist[u] + 1
                    queue.append(v)
        return dist

    def is_connected(self) -> bool:
        return len(self.hops_from(self.host)) == len(self.nodes)

    def diameter(self) -> int:
        return max(max(self.hops_from(n).values()) for n in self.nodes)

    @property
    def participants(self) -> tuple:
        return tuple(n for n in self.nodes if n != self.host)


def _explicit_topology(spec: TopologySpec) -> Topology:
    rng = random.Random(f"rssi:{spec.seed}")
    links = {}
    nodes = {spec.host}
    for entry in spec.links:
        a, b, prr = int(entry[0]), int(entry[1]), float(entry[2])
        nodes.update((a, b))
        if len(entry) > 3:
            rssi_ab = rssi_ba = float(entry[3])
        else:
            rssi_ab = rng.uniform(0.0, spec.rssi_max_db)
            rssi_ba = rng.uniform(0.0, spec.rssi_max_db)
        links[(a, b)] = LinkQuality(prr, rssi_ab)
        links[(b, a)] = LinkQuality(prr, rssi_ba)
    return Topology(tuple(sorted(nodes)), links, spec.host)


def _random_geometric(spec: TopologySpec, attempt: int) -> Topology:
    rng = random.Random(f"topology:{spec.seed}:{attempt}")
    pos = {n: (rng.random(), rng.random()) for n in range(spec.nodes)}
    links = {}
    for a in range(spec.nodes):
        for b in range(a + 1, spec.nodes):
            d = math.dist(pos[a], pos[b])
            if d <= spec.radius:
                frac = (d / spec.radius) ** 2
                prr = spec.prr_near - (spec.prr_near - spec.prr_edge) * frac
                links[(a, b)] = LinkQuality(prr, rng.uniform(0.0, spec.rssi_max_db))
                links[(b, a)] = LinkQuality(prr, rng.uniform(0.0, spec.rssi_max_db))
    return Topology(tuple(range(spec.nodes)), links, spec.host, pos)


def build_topology(spec: TopologySpec) -> Topology:
    """Build a connected topology, retrying random layouts with new sub-seeds."""
    if spec.kind == "explicit":
        topo = _explicit_topology(spec)
        if not topo.is_connected():
            raise TopologyError("explicit link list does not connect every node to the host")
        return topo
    for attempt in range(spec.max_retries):
        topo = _random_geometric(spec, attempt)
        if topo.is_connected():
            return topo
    raise TopologyError(
        f"no connected layout for n={spec.nodes}, r={spec.radius} "
        f"after {spec.max_retries} attempts"
    )


class InterferenceKind(str, Enum):
    LOW = "low"
    HIGH = "high"
    WIFI = "wifi"
    MICROWAVE = "microwave"


@dataclass(frozen=True)
class InterferenceProfile:
    kind: InterferenceKind = InterferenceKind.LOW
    jammers: frozenset = frozenset()
    duty: float = 0.5
    period_ms: float = 20.0
    wifi_idle_mean_ms: float = 20.0
    wifi_burst_ms: float = 10.0
    high_prr_scale: float = 0.9

    def __post_init__(self):
        object.__setattr__(self, "kind", InterferenceKind(self.kind))
        object.__setattr__(self, "jammers", frozenset(self.jammers))
        if not 0.0 <= self.duty <= 1.0:
            raise ValueError(f"duty cycle must be in [0, 1], got {self.duty}")
        if self.period_ms <= 0:
            raise ValueError("period must be positive")
        if self.wifi_idle_mean_ms <= 0 or self.wifi_burst_ms < 0:
            raise ValueError("wifi burst/idle parameters must be positive")
        if not 0.0 <= self.high_prr_scale <= 1.0:
            raise ValueError("high_prr_scale must be in [0, 1]")

    @property
    def prr_scale(self) -> float:
        return self.high_prr_scale if self.kind is InterferenceKind.HIGH else 1.0

    @property
    def period_us(self) -> int:
        return round(self.period_ms * 1000)


class BurstTrace:
    """Alternating idle/burst on-off trace, extended lazily from its own RNG.

    Idle gaps are exponential, bursts have a fixed length.
    """

    def __init__(self, rng: random.Random, idle_mean_us: float, burst_us: int):
        self._rng = rng
        self._idle_mean_us = idle_mean_us
        self._burst_us = burst_us
        self._starts: list = []
        self._ends: list = []
        self._horizon = 0

    def _extend(self, t: int):
        while self._horizon <= t:
            start = self._horizon + int(self._rng.expovariate(1.0 / self._idle_mean_us))
            end = start + self._burst_us
            self._starts.append(start)
            self._ends.append(end)
            self._horizon = end

    def active(self, t: int) -> bool:
        self._extend(t)
        i = bisect.bisect_right(self._starts, t) - 1
        return i >= 0 and t < self._ends[i]


def interference_active(
    profile: InterferenceProfile, jammer: NodeId, t: int, trace: Optional[BurstTrace] = None
) -> bool:
    """Whether ``jammer`` is emitting at time ``t`` (µs on the jammer's own clock).

    Low/high profiles never jam; they act through ``profile.prr_scale``.
    WiFi needs the jammer's ``BurstTrace``.
    """
    if jammer not in profile.jammers:
        raise ValueError(f"node {jammer} is not a jammer of this profile")
    kind = profile.kind
    if kind is InterferenceKind.MICROWAVE:
        period = profile.period_us
        return (t % period) < profile.duty * period
    if kind is InterferenceKind.WIFI:
        if trace is None:
            raise ValueError("wifi interference needs a burst trace")
        return trace.active(t)
    return False


def select_jammers(topology: Topology, count: int) -> frozenset:
    """The ``count`` highest-degree non-host nodes, ties broken by lower id."""
    if count < 0 or count >= len(topology.nodes):
        raise ValueError(f"jammer count {count} out of range for {len(topology.nodes)} nodes")
    ranked = sorted(topology.participants, key=lambda n: (-topology.degree(n), n))
    return frozenset(ranked[:count])


class Network:
    """Topology plus one run's interference state.

    Each jammer gets a random clock offset so periodic jamming is not phase
    locked to the transaction start; WiFi jammers get their own burst traces.
    Both are drawn from ``seed``.
    """

    def __init__(self, topology: Topology, profile: Optional[InterferenceProfile] = None, seed: int = 0):
        self.topology = topology
        self.profile = profile or InterferenceProfile()
        unknown = self.profile.jammers - set(topology.nodes)
        if unknown:
            raise ValueError(f"jammers {sorted(unknown)} are not topology nodes")
        rng = random.Random(f"jam:{seed}")
        self._offsets = {}
        self._traces = {}
        for j in sorted(self.profile.jammers):
            self._offsets[j] = rng.randrange(self.profile.period_us)
            if self.profile.kind is InterferenceKind.WIFI:
                self._traces[j] = BurstTrace(
                    random.Random(f"wifi:{seed}:{j}"),
                    self.profile.wifi_idle_mean_ms * 1000,
                    round(self.profile.wifi_burst_ms * 1000),
                )
        self._jammed_by = {
            n: tuple(j for j in topology.neighbors[n] if j in self.profile.jammers)
            for n in topology.nodes
        }
        self._scale = self.profile.prr_scale

    def jammer_active(self, jammer: NodeId, t: int) -> bool:
        return interference_active(
            self.profile, jammer, t + self._offsets[jammer], self._traces.get(jammer)
        )

    def jammed(self, node: NodeId, t: int) -> bool:
        return any(self.jammer_active(j, t) for j in self._jammed_by[node])

    def prr(self, sender: NodeId, receiver: NodeId) -> float:
        return self.topology.links[(sender, receiver)].base_prr * self._scale

    def rssi(self, sender: NodeId, receiver: NodeId) -> float:
        return self.topology.links[(sender, receiver)].rssi_margin_db


def reception_outcome(
    receiver: NodeId,
    concurrent_tx: Sequence,
    t: int,
    net: Network,
    rng: random.Random,
):
    """Decide what ``receiver`` decodes from simultaneous transmissions.

    ``concurrent_tx`` holds ``(sender, payload, offset_us)`` triples. Returns the
    decoded payload or ``None`` when nothing is received.
    """
    if not concurrent_tx:
        raise ValueError("reception_outcome needs at least one transmission")
    if net.jammed(receiver, t):
        return None

    strongest = max(concurrent_tx, key=lambda tx: (net.rssi(tx[0], receiver), -tx[0]))
    s_node, s_payload, s_offset = strongest
    offsets = [tx[2] for tx in concurrent_tx]
    spread = max(offsets) - min(offsets)

    if spread <= CONSTRUCTIVE_WINDOW_US and all(tx[1] == s_payload for tx in concurrent_tx):
        return s_payload if rng.random() < net.prr(s_node, receiver) else None

    if spread > CAPTURE_WINDOW_US:
        return None
    s_rssi = net.rssi(s_node, receiver)
    for sender, payload, offset in concurrent_tx:
        if sender == s_node:
            continue
        # aligned copies of the same packet add up rather than interfere
        if payload == s_payload and abs(offset - s_offset) <= CONSTRUCTIVE_WINDOW_US:
            continue
        if s_rssi - net.rssi(sender, receiver) < CAPTURE_THRESHOLD_DB:
            return None
    return s_payload if rng.random() < net.prr(s_node, receiver) else None
