"""Deterministic discrete-event engine for content-oblivious networks.

One step delivers exactly one pulse, chosen by a scheduler among the directed
edges that have pulses in transit, and runs the receiving node's handler to
completion.  Pulses are indistinguishable to the protocols; each carries a
:class:`Ghost` tag (sender, sender phase, per-edge sequence number) that only
monitors and the trace can see.  Within a directed edge pulses are delivered
in sequence order, so the scheduler's freedom is which edge fires next.
"""

from __future__ import annotations

import enum
import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, NamedTuple, Protocol as TypingProtocol

from . import proto_2ec, proto_ring
from .proto_2ec import Emission
from .topology import Port, Topology

__all__ = [
    "SimulationError",
    "InvalidChoice",
    "Ghost",
    "TraceEvent",
    "TwoEdgeConnected",
    "Ring",
    "NetworkState",
    "Outcome",
    "RunResult",
    "init_network",
    "enabled_deliveries",
    "deliver",
    "run",
    "message_bound",
    "default_max_steps",
    "write_trace",
    "read_trace",
    "protocol_from_name",
]

DELIVERY = "delivery"
EMISSION = "emission"
PROTOCOL_EVENT = "protocol-event"
VIOLATION = "violation"
TERMINATION = "termination"
SUMMARY = "summary"

POST_TERMINATION = "post-termination-delivery"


class SimulationError(ValueError):
    pass


class InvalidChoice(SimulationError):
    """The scheduler chose a directed edge with no pulse in transit."""


class Ghost(NamedTuple):
    sender: int
    phase: str
    seq: int


class TraceEvent(NamedTuple):
    step: int
    kind: str
    node: int | None = None
    port: int | None = None
    ghost_phase: str | None = None
    ghost_seq: int | None = None
    event_name: str | None = None


# -- protocols ------------------------------------------------------------


@dataclass(frozen=True)
class TwoEdgeConnected:
    """Synchronized counting + DFS notification with known bound ``N >= n``."""

    N: int
    name = "2ec"

    def validate(self, topo: Topology) -> None:
        if self.N < topo.n:
            raise SimulationError(f"N={self.N} is below the node count n={topo.n}")
        if topo.port_base() != 1:
            raise SimulationError("2ec protocol needs ports numbered 1..deg at every node")
        low = [v for v in range(topo.n) if topo.degree(v) < 2]
        if low:
            raise SimulationError(f"nodes {low} have degree < 2")

    def init_node(self, topo: Topology, v: int):
        return proto_2ec.init_node_2ec(topo.node_ids[v], topo.degree(v), self.N)

    handle = staticmethod(proto_2ec.handle_pulse_2ec)
    output = staticmethod(proto_2ec.output_2ec)
    violation_events = proto_2ec.VIOLATION_EVENTS

    def params(self) -> dict:
        return {"protocol": self.name, "n_bound": self.N}


@dataclass(frozen=True)
class Ring:
    """Uniform election on unoriented rings with ports {0, 1}."""

    name = "ring"

    def validate(self, topo: Topology) -> None:
        if not topo.is_ring():
            raise SimulationError("ring protocol needs a cycle with ports {0, 1} at every node")

    def init_node(self, topo: Topology, v: int):
        return proto_ring.init_node_ring(topo.node_ids[v])

    handle = staticmethod(proto_ring.handle_pulse_ring)
    output = staticmethod(proto_ring.output_ring)
    violation_events = proto_ring.VIOLATION_EVENTS

    def params(self) -> dict:
        return {"protocol": self.name}


def protocol_from_name(name: str, n_bound: int | None = None):
    if name == "2ec":
        if n_bound is None:
            raise SimulationError("2ec protocol needs an N bound")
        return TwoEdgeConnected(n_bound)
    if name == "ring":
        return Ring()
    raise SimulationError(f"unknown protocol {name!r}")


# -- state ----------------------------------------------------------------


@dataclass
class NetworkState:
    topology: Topology
    protocol: TwoEdgeConnected | Ring
    nodes: list
    in_flight: dict[Port, deque]
    next_seq: dict[Port, int]
    absorbed: dict[Port, int]
    # ghost phases already delivered on each directed edge (monitor input)
    delivered_phases: dict[Port, set]
    edge_order: list[Port]
    step_count: int = 0
    trace: list[TraceEvent] | None = field(default_factory=list)
    violations: list[TraceEvent] = field(default_factory=list)
    terminated_at: dict[int, int] = field(default_factory=dict)
    last_node: int | None = None

    def copy(self, keep_trace: bool = False) -> "NetworkState":
        return NetworkState(
            self.topology,
            self.protocol,
            [nd.copy() for nd in self.nodes],
            {e: deque(q) for e, q in self.in_flight.items()},
            dict(self.next_seq),
            dict(self.absorbed),
            {e: set(s) for e, s in self.delivered_phases.items()},
            self.edge_order,
            self.step_count,
            list(self.trace) if keep_trace and self.trace is not None else None,
            list(self.violations),
            dict(self.terminated_at),
            self.last_node,
        )

    def in_flight_count(self, edge: Port) -> int:
        return len(self.in_flight[edge])

    def total_in_flight(self) -> int:
        return sum(len(q) for q in self.in_flight.values())

    def outputs(self) -> list[str]:
        return [self.protocol.output(nd) for nd in self.nodes]

    def all_terminated(self) -> bool:
        return all(nd.terminated for nd in self.nodes)

    def fingerprint(self) -> tuple:
        """Ghost-blind global state: node states plus per-edge pulse counts."""
        return (
            tuple(nd.fingerprint() for nd in self.nodes),
            tuple(len(self.in_flight[e]) for e in self.edge_order),
        )

    def _log(self, ev: TraceEvent) -> None:
        if self.trace is not None:
            self.trace.append(ev)


def _emit(state: NetworkState, v: int, emissions: Iterable[Emission]) -> None:
    for em in emissions:
        edge = (v, em.port)
        q = state.in_flight[edge]
        seq = state.next_seq[edge]
        for k in range(em.count):
            q.append(Ghost(v, em.phase, seq + k))
            state._log(TraceEvent(state.step_count, EMISSION, v, em.port, em.phase, seq + k))
        state.next_seq[edge] = seq + em.count


def init_network(topology: Topology, protocol, record_trace: bool = True) -> NetworkState:
    protocol.validate(topology)
    edges = topology.directed_edges()
    state = NetworkState(
        topology=topology,
        protocol=protocol,
        nodes=[],
        in_flight={e: deque() for e in edges},
        next_seq={e: 0 for e in edges},
        absorbed={e: 0 for e in edges},
        delivered_phases={e: set() for e in edges},
        edge_order=edges,
        trace=[] if record_trace else None,
    )
    for v in range(topology.n):
        nd, emissions = protocol.init_node(topology, v)
        state.nodes.append(nd)
        _emit(state, v, emissions)
    return state


def enabled_deliveries(state: NetworkState) -> list[Port]:
    """Directed edges with at least one pulse in transit, in canonical order."""
    fl = state.in_flight
    return [e for e in state.edge_order if fl[e]]


def deliver(state: NetworkState, edge: Port) -> NetworkState:
    """Deliver the oldest pulse on ``edge``; mutates and returns ``state``."""
    q = state.in_flight.get(edge)
    if not q:
        raise InvalidChoice(f"no pulse in transit on directed edge {edge}")
    ghost = q.popleft()
    w, j = state.topology.ports[edge[0]][edge[1]]
    state.step_count += 1
    step = state.step_count
    state.last_node = w
    state.delivered_phases[edge].add(ghost.phase)
    state._log(TraceEvent(step, DELIVERY, w, j, ghost.phase, ghost.seq))
    node = state.nodes[w]
    if node.terminated:
        state.absorbed[edge] += 1
        ev = TraceEvent(step, VIOLATION, w, j, ghost.phase, ghost.seq, POST_TERMINATION)
        state.violations.append(ev)
        state._log(ev)
        return state
    _, emissions, events = state.protocol.handle(node, j)
    _emit(state, w, emissions)
    bad = state.protocol.violation_events
    for name, port in events:
        state._log(TraceEvent(step, PROTOCOL_EVENT, w, port, event_name=name))
        if name in bad:
            ev = TraceEvent(step, VIOLATION, w, port, event_name=name)
            state.violations.append(ev)
            state._log(ev)
    if node.terminated:
        state.terminated_at[w] = step
        state._log(TraceEvent(step, TERMINATION, w, event_name=state.protocol.output(node)))
    return state


# -- driver ---------------------------------------------------------------


class Outcome(enum.Enum):
    ALL_TERMINATED = "AllTerminated"
    DEADLOCK = "Deadlock"
    STEP_LIMIT = "StepLimit"


@dataclass
class RunResult:
    state: NetworkState
    outcome: Outcome


class Scheduler(TypingProtocol):
    def pick(self, enabled: list[Port]) -> Port: ...


def message_bound(topology: Topology, protocol) -> int:
    """Theoretical total pulse count: exact for 2ec, an upper bound for rings."""
    ids = topology.node_ids
    if isinstance(protocol, TwoEdgeConnected):
        n_ = protocol.N
        return 2 * topology.m * (n_ * min(ids) + n_ + 2)
    return topology.n * (4 * max(ids) + 3)


def default_max_steps(topology: Topology, protocol) -> int:
    return 16 * message_bound(topology, protocol)


def run(
    state: NetworkState,
    scheduler: Scheduler,
    max_steps: int | None = None,
    observer: Callable[[NetworkState], None] | None = None,
) -> RunResult:
    """Drive ``state`` until every node terminates, nothing is deliverable, or the step cap.

    ``max_steps`` counts deliveries made by this call; ``observer`` (e.g. a
    monitor) is called after every delivery.
    """
    if max_steps is None:
        max_steps = default_max_steps(state.topology, state.protocol)
    if max_steps < 1:
        raise SimulationError("max_steps must be >= 1")
    taken = 0
    while True:
        if state.all_terminated():
            return RunResult(state, Outcome.ALL_TERMINATED)
        enabled = enabled_deliveries(state)
        if not enabled:
            return RunResult(state, Outcome.DEADLOCK)
        if taken >= max_steps:
            return RunResult(state, Outcome.STEP_LIMIT)
        deliver(state, scheduler.pick(enabled))
        taken += 1
        if observer is not None:
            observer(state)


# -- trace files ----------------------------------------------------------


def write_trace(trace: Iterable[TraceEvent], path: str | Path, summary: dict | None = None) -> None:
    with open(path, "w") as fh:
        for ev in trace:
            fh.write(json.dumps(ev._asdict()) + "\n")
        if summary is not None:
            fh.write(json.dumps({"kind": SUMMARY, **summary}) + "\n")


def read_trace(path: str | Path) -> tuple[list[TraceEvent], dict | None]:
    events: list[TraceEvent] = []
    summary = None
    with open(path) as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            if rec.get("kind") == SUMMARY:
                summary = rec
                continue
            events.append(TraceEvent(**{k: rec.get(k) for k in TraceEvent._fields}))
    return events, summary
