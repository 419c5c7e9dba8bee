"""Runtime monitors and terminal verdicts for both election protocols.

Monitors read global state and ghost tags, so they sit outside the protocol
boundary.  :func:`check_step` encodes the per-step invariants; the terminal
checkers encode leader uniqueness, quiescence, leader-terminates-last and the
exact (2ec) or bounded (ring) message counts.  Rule names used in
:class:`Violation` records are listed in :data:`RULES`.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import proto_2ec, proto_ring
from .sim import (
    DELIVERY,
    POST_TERMINATION,
    PROTOCOL_EVENT,
    NetworkState,
    Outcome,
    Ring,
    RunResult,
    TraceEvent,
    TwoEdgeConnected,
    deliver,
    init_network,
)
from .topology import (
    DfsTree,
    OrientedGraph,
    Topology,
    dfs_tree,
    is_two_edge_connected,
    robbins_orientation,
    shortest_lengths_to,
)

__all__ = [
    "RULES",
    "Violation",
    "Verdict",
    "Oracles",
    "build_oracles",
    "check_step",
    "check_terminal",
    "check_event_order",
    "expected_event_sequence",
    "SpliceReport",
    "splice_reduced_ring",
    "StepMonitor",
]

RULES = {
    # per-step, 2ec
    "near-sync": "|Count(u) - Count(v)| <= 1 on edges without delivered DFS notification pulses",
    "small-counter": "Count(v) <= ID(r) + length of shortest directed path v -> r",
    "sync-sigma": "sigma_i = Count + 1 on every port while counting",
    "threshold-cap": "rho_i, sigma_i <= LeaderID + N + 2 once LeaderID is known",
    # per-step, ring
    "ring-lockstep": "neighboring competing nodes differ by at most one iteration",
    "ring-diff-cap": "|Diff| <= 3",
    "ring-relay-budget": "entering Relaying, sent = consumed = 2*ID + 2 on both ports",
    "ring-send-imbalance": "a 3-pulse send imbalance needs the termination send or a matching relay imbalance",
    # engine-reported
    "protocol-violation": "protocol handler reported an impossible transition",
    POST_TERMINATION: "a pulse arrived at a terminated node",
    # terminal
    "outcome": "run must end with every node terminated",
    "leader-unique": "exactly one node outputs Leader, all others NonLeader",
    "leader-identity": "the expected node (min ID for 2ec, max ID for ring) is the leader",
    "leader-id-known": "every 2ec node ends with LeaderID = scaled minimum ID",
    "edge-count-exact": "every directed edge carries exactly N*ID_min + N + 2 pulses",
    "quiescence": "no pulse in transit or left unconsumed at termination",
    "leader-last": "the leader terminates strictly after every other node",
    "ring-total-bound": "total pulses <= n * (4 * ID_max + 3)",
    "ring-leader-total": "the leader sends exactly 4 * ID_max + 3 pulses",
    "ring-nonleader-diff": "every non-leader ends with |Diff| = 3",
    "event-order": "DFS events follow the oracle traversal exactly",
}


@dataclass
class Violation:
    step: int
    rule: str
    node: int | None = None
    edge: tuple | None = None
    observed: object = None
    expected: object = None

    def __str__(self):
        where = f" node={self.node}" if self.node is not None else ""
        if self.edge is not None:
            where += f" edge={self.edge}"
        return f"[step {self.step}] {self.rule}{where}: observed {self.observed!r}, expected {self.expected!r}"


@dataclass
class Verdict:
    ok: bool
    leader: int | None
    quiescent: bool
    leader_last: bool
    message_totals: dict
    total_messages: int
    violations: list[Violation] = field(default_factory=list)
    reason: str | None = None


@dataclass
class Oracles:
    dfs: DfsTree
    orientation: OrientedGraph
    distances: dict[int, int]


def build_oracles(topology: Topology) -> Oracles:
    dfs = dfs_tree(topology)
    orient = robbins_orientation(dfs, topology.n)
    return Oracles(dfs, orient, shortest_lengths_to(orient, dfs.root))


# -- per-step monitors ----------------------------------------------------


def _check_2ec(state: NetworkState, oracles: Oracles, nodes: Iterable[int], out: list[Violation]) -> None:
    topo = state.topology
    N = state.protocol.N
    id_r = N * min(topo.node_ids)
    dist = oracles.distances
    phases = state.delivered_phases
    step = state.step_count
    nds = state.nodes
    for v in nodes:
        nd = nds[v]
        bound = id_r + dist[v]
        if nd.count > bound:
            out.append(Violation(step, "small-counter", v, None, nd.count, f"<= {bound}"))
        if nd.pc == proto_2ec.COUNTING:
            for p, s in nd.sigma.items():
                if s != nd.count + 1:
                    out.append(Violation(step, "sync-sigma", v, (v, p), s, nd.count + 1))
        if nd.leader_id is not None:
            cap = nd.leader_id + N + 2
            for p in nd.rho:
                if nd.rho[p] > cap or nd.sigma[p] > cap:
                    out.append(Violation(step, "threshold-cap", v, (v, p),
                                         (nd.rho[p], nd.sigma[p]), f"<= {cap}"))
        for i, (w, j) in topo.ports[v].items():
            if proto_2ec.DFS in phases[(v, i)] or proto_2ec.DFS in phases[(w, j)]:
                continue
            if abs(nd.count - nds[w].count) > 1:
                out.append(Violation(step, "near-sync", v, (v, i),
                                     (nd.count, nds[w].count), "|difference| <= 1"))


def _check_ring(state: NetworkState, nodes: Iterable[int], out: list[Violation]) -> None:
    topo = state.topology
    step = state.step_count
    nds = state.nodes
    for v in nodes:
        nd = nds[v]
        if nd.phase == proto_ring.COMPETING:
            for p in (0, 1):
                w = topo.ports[v][p][0]
                other = nds[w]
                if other.phase == proto_ring.COMPETING and abs(nd.iteration - other.iteration) > 1:
                    out.append(Violation(step, "ring-lockstep", v, (v, p),
                                         (nd.iteration, other.iteration), "|difference| <= 1"))
        if abs(nd.diff) > 3:
            out.append(Violation(step, "ring-diff-cap", v, None, nd.diff, "|Diff| <= 3"))
        if nd.relay_entry is not None:
            budget = nd.id_doubled + 2
            sent, consumed = nd.relay_entry
            if sent != (budget, budget) or consumed != (budget, budget):
                out.append(Violation(step, "ring-relay-budget", v, None,
                                     {"sent": sent, "consumed": consumed}, budget))
        s0, s1 = nd.sigma
        if abs(s0 - s1) >= 3:
            leader_send = nd.phase in (proto_ring.LEADER_WAIT1, proto_ring.DONE_LEADER)
            relay = nd.relay_entry is not None and abs(nd.consumed[1] - nd.consumed[0]) >= 3
            # the relay imbalance must be on the opposite side of the send imbalance
            if relay:
                relay = (s0 - s1) * (nd.consumed[1] - nd.consumed[0]) > 0
            if not (leader_send or relay):
                out.append(Violation(step, "ring-send-imbalance", v, None, (s0, s1), "|sigma0 - sigma1| < 3"))


def check_step(state: NetworkState, oracles: Oracles | None = None,
               nodes: Iterable[int] | None = None) -> list[Violation]:
    """Evaluate every per-step invariant; ``nodes`` restricts the check to those nodes.

    Only the receiving node's state changes in a step, so checking that node
    (and the edges incident to it) after every delivery is equivalent to a
    full pass.
    """
    out: list[Violation] = []
    targets = range(state.topology.n) if nodes is None else nodes
    if isinstance(state.protocol, TwoEdgeConnected):
        if oracles is None:
            oracles = build_oracles(state.topology)
        _check_2ec(state, oracles, targets, out)
    else:
        _check_ring(state, targets, out)
    return out


class StepMonitor:
    """Observer for :func:`pulsenet.sim.run`: checks the node touched by each delivery.

    ``sample_every > 1`` runs the (full) check only every that many steps.
    """

    def __init__(self, state: NetworkState, oracles: Oracles | None = None, sample_every: int = 1):
        self.oracles = oracles
        if oracles is None and isinstance(state.protocol, TwoEdgeConnected):
            self.oracles = build_oracles(state.topology)
        self.sample_every = sample_every
        self.violations: list[Violation] = check_step(state, self.oracles)

    def __call__(self, state: NetworkState) -> None:
        if self.sample_every == 1:
            if state.last_node is not None:
                self.violations.extend(check_step(state, self.oracles, (state.last_node,)))
        elif state.step_count % self.sample_every == 0:
            self.violations.extend(check_step(state, self.oracles))


# -- terminal verdict -----------------------------------------------------

UNSUPPORTED = "unsupported, no verdict"


def check_terminal(result: RunResult, protocol=None) -> Verdict:
    state = result.state
    protocol = protocol or state.protocol
    topo = state.topology
    step = state.step_count
    if isinstance(protocol, TwoEdgeConnected) and not is_two_edge_connected(topo):
        return Verdict(False, None, False, False, {}, 0, [], UNSUPPORTED)
    violations: list[Violation] = []
    for ev in state.violations:
        rule = POST_TERMINATION if ev.event_name == POST_TERMINATION else "protocol-violation"
        violations.append(Violation(ev.step, rule, ev.node, None, ev.event_name, None))

    totals = {e: state.next_seq[e] for e in state.edge_order}
    grand = sum(totals.values())
    outputs = state.outputs()
    leaders = [v for v, o in enumerate(outputs) if o == "Leader"]
    leader = leaders[0] if len(leaders) == 1 else None

    in_transit = state.total_in_flight()
    absorbed = sum(state.absorbed.values())
    unconsumed = 0
    if isinstance(protocol, Ring):
        unconsumed = sum(len(nd.pending) for nd in state.nodes)
    quiescent = in_transit == 0 and absorbed == 0 and unconsumed == 0

    reason = None
    if result.outcome is not Outcome.ALL_TERMINATED:
        reason = result.outcome.value
        violations.append(Violation(step, "outcome", None, None, reason, Outcome.ALL_TERMINATED.value))

    if len(leaders) != 1 or any(o != "NonLeader" for v, o in enumerate(outputs) if v != leader):
        violations.append(Violation(step, "leader-unique", None, None, outputs, "one Leader, rest NonLeader"))

    if not quiescent:
        violations.append(Violation(step, "quiescence", None, None,
                                    {"in_transit": in_transit, "absorbed": absorbed, "unconsumed": unconsumed}, 0))

    leader_last = False
    if leader is not None and leader in state.terminated_at:
        t_leader = state.terminated_at[leader]
        leader_last = all(t < t_leader for v, t in state.terminated_at.items() if v != leader)
        leader_last = leader_last and len(state.terminated_at) == topo.n
    if not leader_last:
        violations.append(Violation(step, "leader-last", leader, None, dict(state.terminated_at),
                                    "leader strictly last"))

    if isinstance(protocol, TwoEdgeConnected):
        N = protocol.N
        want = topo.min_id_node()
        if leader != want:
            violations.append(Violation(step, "leader-identity", leader, None, leader, want))
        exact = N * min(topo.node_ids) + N + 2
        for e, c in totals.items():
            if c != exact:
                violations.append(Violation(step, "edge-count-exact", e[0], e, c, exact))
        id_r = N * min(topo.node_ids)
        for v, nd in enumerate(state.nodes):
            if nd.leader_id != id_r:
                violations.append(Violation(step, "leader-id-known", v, None, nd.leader_id, id_r))
    else:
        want = topo.max_id_node()
        if leader != want:
            violations.append(Violation(step, "leader-identity", leader, None, leader, want))
        id_max = max(topo.node_ids)
        bound = topo.n * (4 * id_max + 3)
        if grand > bound:
            violations.append(Violation(step, "ring-total-bound", None, None, grand, f"<= {bound}"))
        sent_by_want = sum(state.nodes[want].sigma)
        if sent_by_want != 4 * id_max + 3:
            violations.append(Violation(step, "ring-leader-total", want, None, sent_by_want, 4 * id_max + 3))
        for v, nd in enumerate(state.nodes):
            if v != want and abs(nd.diff) != 3:
                violations.append(Violation(step, "ring-nonleader-diff", v, None, nd.diff, 3))

    return Verdict(
        ok=not violations,
        leader=leader,
        quiescent=quiescent,
        leader_last=leader_last,
        message_totals=totals,
        total_messages=grand,
        violations=violations,
        reason=reason,
    )


# -- DFS event order ------------------------------------------------------

DFS_EVENTS = ("StartDFS", "SendExplore", "ReceiveExplore", "SendDone", "ReceiveDone")


def expected_event_sequence(dfs: DfsTree) -> list[tuple[str, int, int | None]]:
    """``StartDFS(r)`` then a send and a receive event per traversed directed edge."""
    seq: list[tuple[str, int, int | None]] = [("StartDFS", dfs.root, None)]
    for src, sp, dst, dp, kind in dfs.traversal:
        tag = "Explore" if kind == "explore" else "Done"
        seq.append(("Send" + tag, src, sp))
        seq.append(("Receive" + tag, dst, dp))
    return seq


def check_event_order(trace: Sequence[TraceEvent], dfs: DfsTree) -> list[Violation]:
    actual = [(ev.event_name, ev.node, ev.port, ev.step) for ev in trace
              if ev.kind == PROTOCOL_EVENT and ev.event_name in DFS_EVENTS]
    expected = expected_event_sequence(dfs)
    out: list[Violation] = []
    for k, want in enumerate(expected):
        if k >= len(actual):
            out.append(Violation(-1, "event-order", want[1], None, "missing", want))
            continue
        got = actual[k][:3]
        if got != want:
            out.append(Violation(actual[k][3], "event-order", got[1], None, got, want))
            # one mismatch desynchronizes the rest; report it once
            return out
    for extra in actual[len(expected):]:
        out.append(Violation(extra[3], "event-order", extra[1], None, extra[:3], "no further DFS events"))
    return out


# -- reduced-ring replay --------------------------------------------------


@dataclass
class SpliceReport:
    applicable: bool
    equivalent: bool
    removed: int
    reduced: Topology | None = None
    node_map: dict[int, int] = field(default_factory=dict)
    mismatches: dict[int, tuple] = field(default_factory=dict)
    stalled: int = 0
    reorders: int = 0
    reason: str | None = None


def _receive_sequences(trace: Iterable[TraceEvent], n: int, rename=None) -> dict[int, list]:
    seqs: dict[int, list] = defaultdict(list)
    for ev in trace:
        if ev.kind == PROTOCOL_EVENT and ev.event_name not in proto_ring.VIOLATION_EVENTS:
            v = ev.node if rename is None else rename.get(ev.node)
            if v is not None:
                seqs[v].append((ev.event_name, ev.port))
    return {v: seqs.get(v, []) for v in range(n)}


def _reduce_ring(topo: Topology, x: int) -> tuple[Topology, dict[int, int], tuple, tuple]:
    a_end = topo.ports[x][0]
    b_end = topo.ports[x][1]
    keep = [v for v in range(topo.n) if v != x]
    new = {v: k for k, v in enumerate(keep)}
    ports: list[dict] = []
    for v in keep:
        pm = {}
        for i, (w, j) in topo.ports[v].items():
            if w == x:
                # splice: the far side of x on the other port
                far = b_end if (v, i) == a_end else a_end
                pm[i] = (new[far[0]], far[1])
            else:
                pm[i] = (new[w], j)
        ports.append(pm)
    reduced = Topology(tuple(topo.node_ids[v] for v in keep), tuple(ports))
    return reduced, new, a_end, b_end


def splice_reduced_ring(trace: Sequence[TraceEvent], topology: Topology, removed: int) -> SpliceReport:
    """Replay a ring run on the ring with ``removed`` spliced out.

    Pulses relayed or sent by the removed node are contracted into direct
    deliveries on the spliced edge.  Every surviving node is fed deliveries in
    the order it saw them originally (a delivery waits only if its pulse has
    not been sent yet in the reduced run).  The report compares each
    surviving node's sequence of completed receives and phase changes.
    """
    entered = any(ev.kind == PROTOCOL_EVENT and ev.node == removed and ev.event_name == proto_ring.RELAYING
                  for ev in trace)
    if not entered:
        return SpliceReport(False, False, removed, reason="removed node never entered Relaying")
    reduced, new, a_end, b_end = _reduce_ring(topology, removed)
    rstate = init_network(reduced, Ring(), record_trace=True)

    pending: list[tuple[int, int]] = []
    reorders = 0

    def flush() -> None:
        # deliver in each node's original arrival order while possible; when
        # every head is still unsent, let the oldest available pulse overtake
        nonlocal reorders
        while pending:
            blocked: set[int] = set()
            first_free = None
            for k, e in enumerate(pending):
                dest = reduced.ports[e[0]][e[1]][0]
                ready = bool(rstate.in_flight[e])
                if ready and first_free is None:
                    first_free = k
                if dest in blocked:
                    continue
                if ready:
                    deliver(rstate, pending.pop(k))
                    break
                blocked.add(dest)
            else:
                if first_free is None:
                    return
                reorders += 1
                deliver(rstate, pending.pop(first_free))

    for ev in trace:
        if ev.kind != DELIVERY:
            continue
        w, j = ev.node, ev.port
        if w == removed:
            continue
        v, i = topology.ports[w][j]
        if v == removed:
            far = b_end if (w, j) == a_end else a_end
            pending.append((new[far[0]], far[1]))
        else:
            pending.append((new[v], i))
        flush()

    original = _receive_sequences(trace, topology.n)
    replayed = _receive_sequences(rstate.trace, reduced.n)
    mismatches = {}
    for v, k in new.items():
        if original[v] != replayed[k]:
            mismatches[v] = (original[v], replayed[k])
    equivalent = not mismatches and not pending and rstate.total_in_flight() == 0
    return SpliceReport(True, equivalent, removed, reduced, new, mismatches, len(pending), reorders,
                        None if equivalent else "replay diverged or stalled")
