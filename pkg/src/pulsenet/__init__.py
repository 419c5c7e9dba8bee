"""Simulator and verification harness for content-oblivious leader election."""

from .sim import Outcome, Ring, TwoEdgeConnected, init_network, run
from .topology import Topology, build_ring, complete_graph, gen_random_2ec
from .verify import check_step, check_terminal

__version__ = "0.1.0"

__all__ = [
    "Outcome",
    "Ring",
    "TwoEdgeConnected",
    "init_network",
    "run",
    "Topology",
    "build_ring",
    "complete_graph",
    "gen_random_2ec",
    "check_step",
    "check_terminal",
]
