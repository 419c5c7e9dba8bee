import random

import pytest

from pulsenet.harness.explore import explore_all
from pulsenet.harness.schedulers import (
    EdgeStarve,
    RandomUniform,
    ScheduleInfeasible,
    Scripted,
    make_scheduler,
    pick,
)
from pulsenet.harness.sweep import build_instance, parse_seed_range, seed_sweep
from pulsenet.sim import (
    DELIVERY,
    Ring,
    SimulationError,
    TwoEdgeConnected,
    deliver,
    enabled_deliveries,
    init_network,
    run,
)
from pulsenet.topology import build_ring, complete_graph, gen_random_2ec
from pulsenet.verify import check_terminal

AB, BC = (0, 1), (1, 2)


class TestSchedulers:
    def test_random_deterministic(self):
        enabled = [(0, 1), (0, 2), (1, 1), (2, 2)]
        a, b = RandomUniform(0), RandomUniform(0)
        assert [pick(a, enabled) for _ in range(20)] == [pick(b, enabled) for _ in range(20)]

    def test_random_covers_all(self):
        enabled = [(0, 1), (0, 2), (1, 1)]
        rng = RandomUniform(5)
        assert {pick(rng, enabled) for _ in range(200)} == set(enabled)

    def test_starve(self):
        s = EdgeStarve({AB})
        assert all(pick(s, [AB, BC]) == BC for _ in range(20))
        assert pick(s, [AB]) == AB

    def test_scripted(self):
        s = Scripted([AB, BC])
        assert pick(s, [AB, BC]) == AB
        assert s.remaining == 1
        with pytest.raises(ScheduleInfeasible):
            pick(s, [AB])

    def test_scripted_head_not_enabled(self):
        with pytest.raises(ScheduleInfeasible):
            pick(Scripted([AB]), [BC])

    def test_scripted_exhausted(self):
        with pytest.raises(ScheduleInfeasible):
            pick(Scripted([]), [AB])

    def test_empty_enabled(self):
        with pytest.raises(SimulationError):
            pick(RandomUniform(0), [])

    def test_factory(self):
        assert isinstance(make_scheduler("random", 1), RandomUniform)
        assert isinstance(make_scheduler("starve", 1, [AB]), EdgeStarve)
        assert isinstance(make_scheduler("script", script=[AB]), Scripted)
        with pytest.raises(SimulationError):
            make_scheduler("fair")

    def test_starved_edge_still_delivered(self):
        topo = gen_random_2ec(5, 2, 1)
        starved = topo.directed_edges()[:3]
        r = run(init_network(topo, TwoEdgeConnected(5)), EdgeStarve(starved, 2))
        assert check_terminal(r).ok

    def test_scripted_replay_reproduces_trace(self):
        topo = complete_graph(3, [1, 2, 3])
        first = run(init_network(topo, TwoEdgeConnected(3)), RandomUniform(7))
        script = [topo.peer(ev.node, ev.port) for ev in first.state.trace if ev.kind == DELIVERY]
        second = run(init_network(topo, TwoEdgeConnected(3)), Scripted(script))
        assert second.state.trace == first.state.trace


class TestExplore:
    def test_ring2(self):
        rep = explore_all(init_network(build_ring(2, 0, [1, 2]), Ring()))
        assert rep.ok and not rep.truncated and rep.deadlocks == 0
        assert {leader for leader, _ in rep.terminal_summary} == {1}

    def test_ring3(self):
        rep = explore_all(init_network(build_ring(3, 0b011, [1, 2, 3]), Ring()))
        assert rep.ok and rep.terminal_ok == rep.terminal_states
        assert {leader for leader, _ in rep.terminal_summary} == {2}
        assert rep.max_total_messages <= 45

    def test_triangle(self):
        rep = explore_all(init_network(complete_graph(3, [1, 2, 3]), TwoEdgeConnected(3)))
        assert rep.ok and rep.deadlocks == 0
        assert set(rep.terminal_summary) == {(0, 48)}
        assert rep.max_depth == 48

    def test_truncation_reported(self):
        rep = explore_all(init_network(complete_graph(3, [1, 2, 3]), TwoEdgeConnected(3)), state_cap=50)
        assert rep.truncated and not rep.ok
        assert rep.states_visited == 50

    def test_bad_cap(self):
        with pytest.raises(ValueError):
            explore_all(init_network(build_ring(2), Ring()), state_cap=0)

    def test_random_runs_inside_explored_set(self):
        # every terminal verdict a random run reaches was found by the explorer
        topo = build_ring(3, 0b101, [1, 2, 3])
        rep = explore_all(init_network(topo, Ring()))
        for seed in range(30):
            v = check_terminal(run(init_network(topo, Ring()), RandomUniform(seed)))
            assert (v.leader, v.total_messages) in rep.terminal_summary

    def test_fingerprint_soundness_spot_check(self):
        # two schedules reaching the same fingerprint must have the same futures
        topo = complete_graph(3, [1, 2, 3])
        rng = random.Random(0)
        seen = {}
        for trial in range(40):
            s = init_network(topo, TwoEdgeConnected(3), record_trace=False)
            for _ in range(rng.randrange(1, 12)):
                deliver(s, rng.choice(enabled_deliveries(s)))
            fp = s.fingerprint()
            succ = set()
            for e in enabled_deliveries(s):
                c = s.copy()
                deliver(c, e)
                succ.add(c.fingerprint())
            if fp in seen:
                assert seen[fp] == succ
            seen[fp] = succ

    def test_detects_mutant(self, monkeypatch):
        from pulsenet import proto_ring
        monkeypatch.setattr(proto_ring, "EXIT_DIFF", 2)
        rep = explore_all(init_network(build_ring(3, 0, [1, 2, 3]), Ring()))
        assert not rep.ok and rep.violation_counts


class TestSweep:
    def test_ring5(self):
        ids = random.Random(5).sample(range(1, 21), 5)
        table = seed_sweep(build_ring(5, 0b01101, ids), Ring(), range(100))
        assert table.passed == 100 and table.all_ok

    def test_random_2ec(self):
        topo = gen_random_2ec(6, 2, seed=0)
        table = seed_sweep(topo, TwoEdgeConnected(6), range(50))
        assert table.passed == 50
        exact = 6 * min(topo.node_ids) + 6 + 2
        assert all(set(r.verdict.message_totals.values()) == {exact} for r in table.rows)
        s = table.summary()
        assert s["messages_min"] == s["messages_max"] == 2 * topo.m * exact

    def test_mutant_fails(self, monkeypatch):
        from pulsenet import proto_2ec
        monkeypatch.setattr(proto_2ec, "THRESHOLD_SLACK", 1)
        table = seed_sweep(complete_graph(3, [1, 2, 3]), TwoEdgeConnected(3), range(5))
        assert table.failed > 0

    def test_build_instance(self):
        topo, proto = build_instance({"topology": {"kind": "ring", "n": 4, "flip_mask": 3}})
        assert isinstance(proto, Ring) and topo.n == 4
        topo, proto = build_instance({"topology": {"kind": "cycle_chords", "n": 5, "chords": [[0, 2]]}})
        assert proto == TwoEdgeConnected(5) and topo.m == 6
        with pytest.raises(SimulationError):
            build_instance({"topology": {"kind": "torus"}})

    def test_seed_range(self):
        assert parse_seed_range("3..7") == range(3, 8)
        assert parse_seed_range("4") == range(4, 5)
        with pytest.raises(ValueError):
            parse_seed_range("9..2")
