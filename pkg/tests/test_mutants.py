"""Each mutation knob must be caught by a specific check, not just "something"."""

import pytest

from pulsenet import proto_2ec, proto_ring
from pulsenet.harness.explore import explore_all
from pulsenet.harness.schedulers import RandomUniform
from pulsenet.sim import Ring, TwoEdgeConnected, init_network, run
from pulsenet.topology import build_ring, complete_graph, gen_random_2ec
from pulsenet.verify import StepMonitor, check_terminal


def fired_rules(topo, proto, seeds=range(5)):
    out = set()
    for seed in seeds:
        state = init_network(topo, proto, record_trace=False)
        mon = StepMonitor(state)
        result = run(state, RandomUniform(seed), observer=mon)
        out |= {v.rule for v in check_terminal(result).violations + mon.violations}
    return out


@pytest.mark.parametrize("slack", [1, 3])
def test_threshold_off_by_one_breaks_exact_count(monkeypatch, slack):
    monkeypatch.setattr(proto_2ec, "THRESHOLD_SLACK", slack)
    assert "edge-count-exact" in fired_rules(gen_random_2ec(5, 1, 2), TwoEdgeConnected(5))


def test_threshold_plus_three_trips_cap_monitor(monkeypatch):
    monkeypatch.setattr(proto_2ec, "THRESHOLD_SLACK", 3)
    assert "threshold-cap" in fired_rules(complete_graph(3, [1, 2, 3]), TwoEdgeConnected(3))


def test_threshold_minus_one_found_by_explorer(monkeypatch):
    monkeypatch.setattr(proto_2ec, "THRESHOLD_SLACK", 1)
    rep = explore_all(init_network(complete_graph(3, [1, 2, 3]), TwoEdgeConnected(3)))
    assert not rep.ok and "edge-count-exact" in rep.violation_counts


def test_early_ring_exit(monkeypatch):
    monkeypatch.setattr(proto_ring, "EXIT_DIFF", 2)
    fired = fired_rules(build_ring(4, 0b0101, [3, 1, 4, 2]), Ring())
    assert {"ring-nonleader-diff", "post-termination-delivery"} <= fired


def test_missing_rebalance(monkeypatch):
    monkeypatch.setattr(proto_ring, "REBALANCE_PULSES", 0)
    fired = fired_rules(build_ring(4, 0b0011, [3, 1, 4, 2]), Ring())
    assert {"leader-identity", "ring-nonleader-diff"} <= fired


def test_knobs_restored():
    assert proto_2ec.THRESHOLD_SLACK == 2
    assert proto_ring.EXIT_DIFF == 3 and proto_ring.REBALANCE_PULSES == 2
