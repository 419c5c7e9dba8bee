"""
Checking every schedule, not just a few
=======================================

Random runs sample the adversary.  On tiny instances we can instead explore
every delivery order.  Pulses are indistinguishable, so two schedules that
leave the same counters everywhere lead to the same future; the explorer
merges them, which keeps the state space small.
"""

from pulsenet.harness.explore import explore_all
from pulsenet.sim import Ring, TwoEdgeConnected, init_network
from pulsenet.topology import build_ring, complete_graph

cases = [("ring of 2, IDs {1,2}", init_network(build_ring(2, 0, [1, 2]), Ring()))]
cases += [(f"ring of 3, mask {m:03b}", init_network(build_ring(3, m, [1, 2, 3]), Ring())) for m in range(8)]
cases.append(("triangle, N = 3", init_network(complete_graph(3, [1, 2, 3]), TwoEdgeConnected(3))))

for name, initial in cases:
    rep = explore_all(initial)
    outcomes = ", ".join(f"leader {k[0]} after {k[1]} pulses" for k in rep.terminal_summary)
    print(f"{name:22s} {rep.states_visited:5d} states, {rep.terminal_states} terminal, "
          f"deadlocks {rep.deadlocks}, truncated {rep.truncated}, ok {rep.ok}: {outcomes}")
