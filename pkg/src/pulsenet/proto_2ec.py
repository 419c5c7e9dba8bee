"""Leader election on 2-edge-connected networks: synchronized counting + DFS notification.

The blocking pseudocode is recast as an explicit program counter.  Every
"wait until" becomes a resting location whose predicate is re-evaluated
level-triggered: on entry and after every pulse.  A node never sees anything
but the arrival port; its only memory of the past is the per-port counters.

Ports are numbered ``1 .. deg``.  IDs are scaled by ``N`` inside
:func:`init_node_2ec`, so the scaled minimum ID ``ID(r)`` and the notification
threshold ``ID(r) + N + 2`` appear everywhere below as ``leader_id`` and
:func:`threshold`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

__all__ = [
    "SYNC",
    "DFS",
    "BOT",
    "LEADER",
    "NON_LEADER",
    "Emission",
    "Event",
    "NodeState2EC",
    "init_node_2ec",
    "handle_pulse_2ec",
    "output_2ec",
    "threshold",
    "VIOLATION_EVENTS",
]

# ghost phase labels
SYNC = "SyncCounting"
DFS = "DfsNotify"

BOT = "Bot"
LEADER = "Leader"
NON_LEADER = "NonLeader"

# program locations; the *_SELECT / FINAL_DONE ones are transient
COUNTING = "Counting"
AWAIT_EXPLORE_CONFIRM = "AwaitExploreConfirm"
NOTIFY_SELECT = "NotifySelect"
AWAIT_RHO_THRESHOLD = "AwaitRhoThreshold"
NOTIFY_INNER = "NotifyInner"
FINAL_DONE_SEND = "FinalDoneSend"
TERMINATED = "Terminated"

# Slack added to LeaderID + N in every notification threshold.  Exposed as a
# module constant so mutation tests can perturb it.
THRESHOLD_SLACK = 2

OVERFLOW = "Overflow"
VIOLATION_EVENTS = frozenset({OVERFLOW})


class Emission(NamedTuple):
    port: int
    count: int
    phase: str


class Event(NamedTuple):
    name: str
    port: int | None = None


@dataclass
class NodeState2EC:
    id_original: int
    id_scaled: int
    N: int
    degree: int
    sigma: dict[int, int]
    rho: dict[int, int]
    count: int = 0
    state: str = BOT
    leader_id: int | None = None
    parent: int | None = None
    unexplored: set[int] = field(default_factory=set)
    pc: str = COUNTING
    pc_port: int | None = None

    @property
    def terminated(self) -> bool:
        return self.pc == TERMINATED

    def copy(self) -> "NodeState2EC":
        return NodeState2EC(
            self.id_original, self.id_scaled, self.N, self.degree,
            dict(self.sigma), dict(self.rho), self.count, self.state,
            self.leader_id, self.parent, set(self.unexplored), self.pc, self.pc_port,
        )

    def fingerprint(self) -> tuple:
        ports = sorted(self.rho)
        return (
            tuple(self.rho[p] for p in ports),
            tuple(self.sigma[p] for p in ports),
            self.count, self.state, self.leader_id, self.parent,
            tuple(sorted(self.unexplored)), self.pc, self.pc_port,
        )


def threshold(state: NodeState2EC) -> int:
    """Total pulses per port that complete a notification: LeaderID + N + 2."""
    return state.leader_id + state.N + THRESHOLD_SLACK


def init_node_2ec(node_id: int, degree: int, N: int) -> tuple[NodeState2EC, list[Emission]]:
    if node_id < 1:
        raise ValueError(f"node ID must be >= 1, got {node_id}")
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if degree < 2:
        raise ValueError(f"degree {degree} < 2: node cannot lie on a 2-edge-connected graph")
    ports = range(1, degree + 1)
    st = NodeState2EC(
        id_original=node_id,
        id_scaled=node_id * N,
        N=N,
        degree=degree,
        sigma={p: 1 for p in ports},
        rho={p: 0 for p in ports},
    )
    return st, [Emission(p, 1, SYNC) for p in ports]


def _send_until(st: NodeState2EC, port: int, total: int, out: list[Emission]) -> None:
    k = total - st.sigma[port]
    if k > 0:
        st.sigma[port] = total
        out.append(Emission(port, k, DFS))


def handle_pulse_2ec(st: NodeState2EC, port: int) -> tuple[NodeState2EC, list[Emission], list[Event]]:
    """Deliver one pulse on ``port`` and run the node until it blocks again.

    ``st`` is updated in place and returned.
    """
    if st.pc == TERMINATED:
        raise ValueError("handler called on a terminated node")
    out: list[Emission] = []
    events: list[Event] = []
    rho = st.rho
    rho[port] += 1

    if st.pc == COUNTING:
        if rho[port] == min(rho.values()):
            st.count += 1
            for p in sorted(rho):
                st.sigma[p] += 1
                out.append(Emission(p, 1, SYNC))
            if st.count == st.id_scaled:
                st.state = LEADER
                st.leader_id = st.id_scaled
                events.append(Event("StartDFS"))
                st.unexplored = set(rho)
                st.pc = NOTIFY_SELECT
        elif rho[port] - st.sigma[port] > 1:
            st.state = NON_LEADER
            st.parent = port
            st.leader_id = (st.count // st.N) * st.N
            st.pc = AWAIT_EXPLORE_CONFIRM
            st.pc_port = port
    elif rho[port] > threshold(st):
        events.append(Event(OVERFLOW, port))

    if st.pc != COUNTING:
        _advance(st, out, events)
    return st, out, events


def _advance(st: NodeState2EC, out: list[Emission], events: list[Event]) -> None:
    rho = st.rho
    while True:
        pc = st.pc
        if pc == AWAIT_EXPLORE_CONFIRM:
            i = st.pc_port
            if rho[i] != threshold(st):
                return
            events.append(Event("ReceiveExplore", i))
            st.unexplored = set(rho) - {st.parent}
            st.pc, st.pc_port = NOTIFY_SELECT, None
        elif pc == NOTIFY_SELECT:
            if not st.unexplored:
                st.pc = FINAL_DONE_SEND if st.state == NON_LEADER else TERMINATED
                st.pc_port = None
                continue
            j = min(st.unexplored)
            events.append(Event("SendExplore", j))
            st.pc, st.pc_port = AWAIT_RHO_THRESHOLD, j
        elif pc == AWAIT_RHO_THRESHOLD:
            j = st.pc_port
            if rho[j] < st.leader_id + 1:
                return
            _send_until(st, j, threshold(st), out)
            st.pc = NOTIFY_INNER
        elif pc == NOTIFY_INNER:
            j = st.pc_port
            t = threshold(st)
            ready = [h for h in sorted(st.unexplored) if rho[h] == t]
            if not ready:
                return
            h = ready[0]
            st.unexplored.discard(h)
            if h == j:
                events.append(Event("ReceiveDone", j))
                st.pc, st.pc_port = NOTIFY_SELECT, None
            else:
                events.append(Event("ReceiveExplore", h))
                events.append(Event("SendDone", h))
                _send_until(st, h, t, out)
        elif pc == FINAL_DONE_SEND:
            events.append(Event("SendDone", st.parent))
            _send_until(st, st.parent, threshold(st), out)
            st.pc = TERMINATED
        else:  # COUNTING or TERMINATED
            return


def output_2ec(st: NodeState2EC) -> str:
    """``"Leader"``, ``"NonLeader"`` or ``"Undecided"`` while still counting."""
    if st.state == BOT:
        return "Undecided"
    return st.state
