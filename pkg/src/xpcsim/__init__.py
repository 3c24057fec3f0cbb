"""Simulator for XPC atomic commit over synchronous-transmission floods.

Modules, bottom up: :mod:`radio` (links, capture, jammers), :mod:`primitives`
(Glossy and Chaos), :mod:`xpc` (host and participant callbacks),
:mod:`protocols` (2PC/3PC), :mod:`hybrid` (primitive policy), :mod:`rounds`
(TDMA kernel and transaction driver) and :mod:`harness` (experiments, CSV).
"""
from .harness import ExperimentConfig, InterferenceConfig, run_experiment
from .packets import HostMessage, PhaseTag, Primitive, Reply
from .protocols import Decision, ThreePhaseCommit, TwoPhaseCommit, make_protocol
from .radio import InterferenceKind, InterferenceProfile, Network, TopologySpec, build_topology
from .rounds import Mode, RadioChannel, Transaction

__all__ = [
    "Decision", "ExperimentConfig", "HostMessage", "InterferenceConfig", "InterferenceKind",
    "InterferenceProfile", "Mode", "Network", "PhaseTag", "Primitive", "RadioChannel",
    "Reply", "ThreePhaseCommit", "TopologySpec", "Transaction", "TwoPhaseCommit",
    "build_topology", "make_protocol", "run_experiment",
]
