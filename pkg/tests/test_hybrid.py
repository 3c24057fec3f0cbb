import random
from dataclasses import replace

import pytest
from hypothesis import given
from hypothesis import strategies as st

from xpcsim.harness import ExperimentConfig, InterferenceConfig, run_experiment
from xpcsim.hybrid import select_primitive, translate_packet
from xpcsim.packets import PhaseTag, Primitive, Reply
from xpcsim.primitives import ChaosAggregate
from xpcsim.protocols import TwoPhaseCommit
from xpcsim.radio import InterferenceKind, InterferenceProfile, Network, TopologySpec, build_topology
from xpcsim.rounds import LossyChannel, Mode, RadioChannel, Transaction
from xpcsim.xpc import XpcConfig


def test_attempt_zero_is_chaos():
    plan = select_primitive(PhaseTag.P1, 0, 9)
    assert plan.primitive is Primitive.CHAOS and plan.chaos_slot_ms == 50


def test_retries_are_glossy():
    plan = select_primitive(PhaseTag.P1, 1, 9)
    assert plan.primitive is Primitive.GLOSSY and not plan.timeout


def test_last_attempt_signals_timeout():
    plan = select_primitive(PhaseTag.P2, 9, 9)
    assert plan.timeout and plan.primitive is Primitive.GLOSSY


def test_out_of_range_attempts():
    with pytest.raises(ValueError):
        select_primitive(PhaseTag.P1, -1, 9)
    with pytest.raises(ValueError):
        select_primitive(PhaseTag.P1, 10, 9)


@given(st.integers(1, 20).flatmap(lambda r: st.tuples(st.just(r), st.integers(0, r))))
def test_only_attempt_zero_uses_chaos(args):
    retx, attempt = args
    plan = select_primitive(PhaseTag.P3, attempt, retx)
    assert (plan.primitive is Primitive.CHAOS) == (attempt == 0)
    assert plan.timeout == (attempt == retx and attempt > 0)


def test_translate_partial_flags():
    agg = ChaosAggregate(0b0111, (1, 1, 1, 0))
    replies, missing = translate_packet(agg, (1, 2, 3, 4))
    assert missing == {4}
    assert replies == {1: Reply.VOTE_YES, 2: Reply.VOTE_YES, 3: Reply.VOTE_YES}


def test_translate_full_and_empty():
    full = ChaosAggregate(0b11, (1, 2))
    assert translate_packet(full, (5, 9)) == ({5: Reply.VOTE_YES, 9: Reply.VOTE_NO}, set())
    assert translate_packet(ChaosAggregate.empty(3), (1, 2, 3)) == ({}, {1, 2, 3})
    with pytest.raises(ValueError):
        translate_packet(full, (1, 2, 3))


def test_jammed_host_forces_full_glossy_retry():
    # node 3 jams the host continuously, so the Chaos attempt collects nothing
    links = [(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0), (0, 3, 1.0), (2, 3, 1.0)]
    topo = build_topology(TopologySpec(kind="explicit", links=tuple(links)))
    prof = InterferenceProfile(InterferenceKind.MICROWAVE, frozenset({3}), duty=1.0)
    net = Network(topo, prof, seed=1)
    cfg = XpcConfig(cohort=(1, 2, 3), timeout_retx=3)
    ch = RadioChannel(net, random.Random(1), cfg.cohort)
    tx = Transaction(TwoPhaseCommit(), cfg, Mode.HYBRID)
    first = tx.step(ch)
    assert first.primitive is Primitive.CHAOS and first.replies == {}
    assert tx.ctrl.primitive is Primitive.GLOSSY
    assert tx.ctrl.schedule.slot_assignment == (1, 2, 3)


def test_one_chaos_attempt_per_phase():
    cfg = XpcConfig(cohort=(1, 2, 3), timeout_retx=4)
    for seed in range(30):
        tx = Transaction(TwoPhaseCommit(), cfg, Mode.HYBRID)
        out = tx.run(LossyChannel(cfg.cohort, 0.3, 0.3, random.Random(seed)))
        chaos = {}
        for rec in out.round_log:
            if rec.primitive is Primitive.CHAOS:
                chaos[rec.phase] = chaos.get(rec.phase, 0) + 1
                assert rec.attempt == 0
        assert all(v == 1 for v in chaos.values())


def test_hybrid_is_at_least_as_reliable_as_chaos_on_paired_seeds():
    base = ExperimentConfig(
        runs=30, seed=5, interference=InterferenceConfig(kind="microwave", jammers=1)
    )
    chaos = run_experiment(replace(base, primitive="chaos"))
    hybrid = run_experiment(replace(base, primitive="hybrid"))
    assert hybrid.reliability >= chaos.reliability
