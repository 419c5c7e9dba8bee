"""
A ring whose nodes disagree about left and right
================================================

Each node of a ring labels its two ports 0 and 1 arbitrarily.  The ring
protocol still elects the node with the largest ID: losers turn into relays,
the winner's solitude check comes back from the other side, and a group of
three pulses tells everyone to stop.
"""

from pulsenet.harness.schedulers import RandomUniform
from pulsenet.sim import Ring, init_network, run
from pulsenet.topology import build_ring
from pulsenet.verify import check_terminal, splice_reduced_ring

ids = [4, 9, 2, 7, 5]
# bits 1, 2 and 4 set: three nodes see the ring mirrored
topo = build_ring(5, flip_mask=0b10110, node_ids=ids)
state = init_network(topo, Ring())
result = run(state, RandomUniform(seed=3))

# phase history of each node, read back from the trace
history = {v: [] for v in range(topo.n)}
for ev in state.trace:
    if ev.kind == "protocol-event" and ev.event_name != "Rcv":
        history[ev.node].append(ev.event_name)
for v in range(topo.n):
    print(f"node {v} (ID {ids[v]}):", " -> ".join(history[v]))

leader = topo.max_id_node()
print("leader node:", leader, "sent", sum(state.nodes[leader].sigma), "pulses;",
      "4 * ID_max + 3 =", 4 * max(ids) + 3)
print("total pulses:", sum(state.next_seq.values()), "<= bound", topo.n * (4 * max(ids) + 3))
print("non-leader Diff values:", [nd.diff for v, nd in enumerate(state.nodes) if v != leader])
print("verdict ok:", check_terminal(result).ok)

# the relays really are transparent: remove the smallest-ID node and replay
rep = splice_reduced_ring(state.trace, topo, topo.min_id_node())
print("neighbours cannot tell the node was there:", rep.equivalent)
