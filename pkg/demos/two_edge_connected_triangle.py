"""
Electing a leader on a triangle with contentless pulses
=======================================================

Three nodes with IDs 1, 2 and 3 run the 2-edge-connected protocol with the
bound N = 3.  Nothing they send carries content, yet the node with the
smallest ID ends up as the unique leader and every other node learns it.
"""

from collections import Counter

from pulsenet.harness.schedulers import RandomUniform
from pulsenet.sim import PROTOCOL_EVENT, TwoEdgeConnected, init_network, run
from pulsenet.topology import complete_graph, dfs_tree
from pulsenet.verify import check_event_order, check_terminal

topo = complete_graph(3, [1, 2, 3])
state = init_network(topo, TwoEdgeConnected(3))

# IDs are scaled by N so that any two differ by at least N
print("scaled IDs:", [nd.id_scaled for nd in state.nodes])

result = run(state, RandomUniform(seed=0))
print("outcome:", result.outcome.value)
print("outputs:", state.outputs())

# every directed edge carries exactly N * ID_min + N + 2 pulses
print("pulses per directed edge:", sorted(set(state.next_seq.values())))

# where the pulses went: synchronized counting first, then the DFS notification
phases = Counter(ev.ghost_phase for ev in state.trace if ev.kind == "delivery")
print("deliveries by phase:", dict(phases))

# the labelled DFS events, in the order they happened
for ev in state.trace:
    if ev.kind == PROTOCOL_EVENT:
        port = "" if ev.port is None else f" port {ev.port}"
        print(f"  step {ev.step:3d}  node {ev.node}: {ev.event_name}{port}")

verdict = check_terminal(result)
print("verdict ok:", verdict.ok, "| leader terminated last:", verdict.leader_last)
print("matches the DFS oracle:", check_event_order(state.trace, dfs_tree(topo)) == [])
