"""Uniform leader election on unoriented rings (competing, solitude check, relaying).

The protocol is written with blocking receives.  Each node keeps the pulses
that have arrived but were not yet taken by a receive in ``pending`` (arrival
order); a receive on a fixed port takes the oldest pending pulse from that
port, a receive on "any" port takes the oldest pending pulse overall.  A
delivery appends to ``pending`` and then the node runs every receive it can
satisfy before returning.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .proto_2ec import Emission, Event

__all__ = [
    "COMPETING",
    "SOLITUDE_WAIT1",
    "SOLITUDE_WAIT_ANY",
    "LEADER_WAIT1",
    "REBALANCE_WAIT0",
    "REBALANCE_WAIT1",
    "RELAYING",
    "DONE_LEADER",
    "DONE_NON_LEADER",
    "NodeStateRing",
    "init_node_ring",
    "handle_pulse_ring",
    "output_ring",
    "VIOLATION_EVENTS",
]

COMPETING = "Competing"
SOLITUDE_WAIT1 = "SolitudeWait1"
SOLITUDE_WAIT_ANY = "SolitudeWaitAny"
LEADER_WAIT1 = "LeaderWait1"
REBALANCE_WAIT0 = "RebalanceWait0"
REBALANCE_WAIT1 = "RebalanceWait1"
RELAYING = "Relaying"
DONE_LEADER = "DoneLeader"
DONE_NON_LEADER = "DoneNonLeader"

# ghost phase labels for emitted pulses
PH_COMPETE = "competing"
PH_SOLITUDE = "solitude"
PH_TERMINATE = "termination"
PH_REBALANCE = "rebalancing"
PH_RELAY = "relay"

# Mutation knobs; see tests/test_mutants.py.
EXIT_DIFF = 3
REBALANCE_PULSES = 2

DIFF_OVERFLOW = "DiffOverflow"
VIOLATION_EVENTS = frozenset({DIFF_OVERFLOW})


@dataclass
class NodeStateRing:
    id_original: int
    id_doubled: int
    sigma: list[int] = field(default_factory=lambda: [0, 0])
    rho: list[int] = field(default_factory=lambda: [0, 0])
    consumed: list[int] = field(default_factory=lambda: [0, 0])
    pending: deque = field(default_factory=deque)
    diff: int = 0
    phase: str = COMPETING
    iteration: int = 1
    waiting_for: int = 0
    q: int | None = None
    # (sigma, consumed) captured when Relaying was entered
    relay_entry: tuple | None = None

    @property
    def terminated(self) -> bool:
        return self.phase in (DONE_LEADER, DONE_NON_LEADER)

    def copy(self) -> "NodeStateRing":
        return NodeStateRing(
            self.id_original, self.id_doubled, list(self.sigma), list(self.rho),
            list(self.consumed), deque(self.pending), self.diff, self.phase,
            self.iteration, self.waiting_for, self.q, self.relay_entry,
        )

    def fingerprint(self) -> tuple:
        return (
            tuple(self.sigma), tuple(self.rho), tuple(self.consumed), tuple(self.pending),
            self.diff, self.phase, self.iteration, self.waiting_for, self.q,
        )


def init_node_ring(node_id: int) -> tuple[NodeStateRing, list[Emission]]:
    if node_id < 1:
        raise ValueError(f"node ID must be >= 1, got {node_id}")
    st = NodeStateRing(node_id, 2 * node_id, sigma=[1, 1])
    return st, [Emission(0, 1, PH_COMPETE), Emission(1, 1, PH_COMPETE)]


def _send(st: NodeStateRing, port: int, k: int, phase: str, out: list[Emission]) -> None:
    if k > 0:
        st.sigma[port] += k
        out.append(Emission(port, k, phase))


def _take(st: NodeStateRing, port: int, events: list[Event]) -> bool:
    if st.rho[port] <= st.consumed[port]:
        return False
    st.pending.remove(port)
    st.consumed[port] += 1
    events.append(Event("Rcv", port))
    return True


def _take_any(st: NodeStateRing, events: list[Event]) -> int | None:
    if not st.pending:
        return None
    q = st.pending.popleft()
    st.consumed[q] += 1
    events.append(Event("Rcv", q))
    return q


def _enter(st: NodeStateRing, phase: str, events: list[Event]) -> None:
    st.phase = phase
    events.append(Event(phase))


def handle_pulse_ring(st: NodeStateRing, port: int) -> tuple[NodeStateRing, list[Emission], list[Event]]:
    """Deliver one pulse on ``port``; drain every satisfiable receive.

    ``st`` is updated in place and returned.  Events carry each completed
    receive (``"Rcv"`` with its port) and each phase entered.
    """
    if st.terminated:
        raise ValueError("handler called on a terminated node")
    out: list[Emission] = []
    events: list[Event] = []
    st.rho[port] += 1
    st.pending.append(port)

    while True:
        ph = st.phase
        if ph == COMPETING:
            w = st.waiting_for
            if not _take(st, w, events):
                break
            if w == 0:
                st.waiting_for = 1
            elif st.iteration < st.id_doubled:
                st.iteration += 1
                st.waiting_for = 0
                _send(st, 0, 1, PH_COMPETE, out)
                _send(st, 1, 1, PH_COMPETE, out)
            else:
                _send(st, 0, 2, PH_SOLITUDE, out)
                _enter(st, SOLITUDE_WAIT1, events)
        elif ph == SOLITUDE_WAIT1:
            if not _take(st, 1, events):
                break
            _enter(st, SOLITUDE_WAIT_ANY, events)
        elif ph == SOLITUDE_WAIT_ANY:
            q = _take_any(st, events)
            if q is None:
                break
            st.q = q
            if q == 1:
                _send(st, 0, 1, PH_TERMINATE, out)
                _enter(st, LEADER_WAIT1, events)
            else:
                _send(st, 1, REBALANCE_PULSES, PH_REBALANCE, out)
                _enter(st, REBALANCE_WAIT0, events)
        elif ph == LEADER_WAIT1:
            if not _take(st, 1, events):
                break
            _enter(st, DONE_LEADER, events)
        elif ph == REBALANCE_WAIT0:
            if not _take(st, 0, events):
                break
            _enter(st, REBALANCE_WAIT1, events)
        elif ph == REBALANCE_WAIT1:
            if not _take(st, 1, events):
                break
            st.diff = 0
            st.relay_entry = (tuple(st.sigma), tuple(st.consumed))
            _enter(st, RELAYING, events)
        elif ph == RELAYING:
            q = _take_any(st, events)
            if q is None:
                break
            st.q = q
            st.diff += 2 * q - 1
            _send(st, 1 - q, 1, PH_RELAY, out)
            if abs(st.diff) > 3:
                events.append(Event(DIFF_OVERFLOW, q))
            if abs(st.diff) >= EXIT_DIFF:
                _enter(st, DONE_NON_LEADER, events)
        else:
            break
    return st, out, events


def output_ring(st: NodeStateRing) -> str:
    if st.phase == DONE_LEADER:
        return "Leader"
    if st.phase == DONE_NON_LEADER:
        return "NonLeader"
    return "Undecided"
