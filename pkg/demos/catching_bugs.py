"""
Do the checks have teeth?
=========================

A verifier that never fails proves nothing.  Here we break the protocols on
purpose, one constant at a time, and watch which checks complain.
"""

from pulsenet import proto_2ec, proto_ring
from pulsenet.harness.schedulers import RandomUniform
from pulsenet.sim import Ring, TwoEdgeConnected, init_network, run
from pulsenet.topology import build_ring, complete_graph
from pulsenet.verify import StepMonitor, check_terminal


def complaints(topo, proto, seeds=range(5)):
    rules = set()
    for seed in seeds:
        state = init_network(topo, proto, record_trace=False)
        mon = StepMonitor(state)
        result = run(state, RandomUniform(seed), observer=mon)
        rules |= {v.rule for v in check_terminal(result).violations + mon.violations}
    return sorted(rules) or ["none"]


triangle = complete_graph(3, [1, 2, 3])
ring = build_ring(4, 0b0101, [3, 1, 4, 2])
print("correct 2ec build :", complaints(triangle, TwoEdgeConnected(3)))
print("correct ring build:", complaints(ring, Ring()))

mutants = [
    ("threshold one short", proto_2ec, "THRESHOLD_SLACK", 1, triangle, TwoEdgeConnected(3)),
    ("threshold one long", proto_2ec, "THRESHOLD_SLACK", 3, triangle, TwoEdgeConnected(3)),
    ("relays stop at |Diff| = 2", proto_ring, "EXIT_DIFF", 2, ring, Ring()),
    ("no rebalancing pulses", proto_ring, "REBALANCE_PULSES", 0, ring, Ring()),
]
for label, module, attr, value, topo, proto in mutants:
    saved = getattr(module, attr)
    setattr(module, attr, value)
    try:
        print(f"{label:26s}:", complaints(topo, proto))
    finally:
        setattr(module, attr, saved)
