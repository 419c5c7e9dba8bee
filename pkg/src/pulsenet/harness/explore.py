"""Exhaustive breadth-first exploration of every delivery schedule.

States are deduplicated by their ghost-blind fingerprint (node states plus
per-edge pulse counts).  Each new state runs the per-step monitors; each
terminal state gets a terminal verdict.  Leader-terminates-last is checked on
every transition, so it holds for all schedules and not only for the first
path that reached a merged state.
"""

from __future__ import annotations

import time
from collections import Counter, deque
from dataclasses import dataclass, field

from ..sim import (
    POST_TERMINATION,
    NetworkState,
    Outcome,
    RunResult,
    TwoEdgeConnected,
    deliver,
    enabled_deliveries,
)
from ..verify import Violation, build_oracles, check_step, check_terminal

__all__ = ["ExplorationReport", "explore_all", "DEFAULT_STATE_CAP"]

DEFAULT_STATE_CAP = 5_000_000
# keep at most this many example violations per rule
_KEEP = 5


@dataclass
class ExplorationReport:
    states_visited: int = 0
    transitions: int = 0
    terminal_states: int = 0
    terminal_ok: int = 0
    # (leader node, total pulses) -> number of terminal states
    terminal_summary: Counter = field(default_factory=Counter)
    deadlocks: int = 0
    violation_counts: Counter = field(default_factory=Counter)
    violation_examples: list[Violation] = field(default_factory=list)
    truncated: bool = False
    max_depth: int = 0
    max_total_messages: int = 0
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return (not self.truncated and self.deadlocks == 0 and not self.violation_counts
                and self.terminal_states > 0 and self.terminal_ok == self.terminal_states)

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "states_visited": self.states_visited,
            "transitions": self.transitions,
            "terminal_states": self.terminal_states,
            "terminal_ok": self.terminal_ok,
            "terminal_summary": [
                {"leader": k[0], "total_messages": k[1], "states": c}
                for k, c in sorted(self.terminal_summary.items(), key=lambda kv: (str(kv[0][0]), kv[0][1]))
            ],
            "deadlocks": self.deadlocks,
            "violations": dict(self.violation_counts),
            "violation_examples": [str(v) for v in self.violation_examples],
            "truncated": self.truncated,
            "max_depth": self.max_depth,
            "max_total_messages": self.max_total_messages,
            "seconds": round(self.seconds, 3),
        }


def _record(report: ExplorationReport, found: list[Violation]) -> None:
    for v in found:
        report.violation_counts[v.rule] += 1
        if sum(1 for x in report.violation_examples if x.rule == v.rule) < _KEEP:
            report.violation_examples.append(v)


def _leader_order(before: dict, state: NetworkState) -> list[Violation]:
    """A fresh termination must not be the leader's while others still run,
    and nothing may terminate after the leader."""
    out = []
    for v, t in state.terminated_at.items():
        if v in before:
            continue
        others_running = any(not nd.terminated for k, nd in enumerate(state.nodes) if k != v)
        if state.protocol.output(state.nodes[v]) == "Leader" and others_running:
            out.append(Violation(t, "leader-last", v, None, "leader terminated first", "leader strictly last"))
        elif any(state.protocol.output(state.nodes[k]) == "Leader" for k in before):
            out.append(Violation(t, "leader-last", v, None, "terminated after leader", "leader strictly last"))
    return out


def explore_all(initial: NetworkState, state_cap: int = DEFAULT_STATE_CAP,
                monitors: bool = True) -> ExplorationReport:
    if state_cap < 1:
        raise ValueError("state_cap must be >= 1")
    t0 = time.perf_counter()
    report = ExplorationReport()
    oracles = build_oracles(initial.topology) if isinstance(initial.protocol, TwoEdgeConnected) else None

    root = initial.copy(keep_trace=False)
    seen = {root.fingerprint()}
    if monitors:
        _record(report, check_step(root, oracles))
    frontier: deque[tuple[NetworkState, int]] = deque([(root, 0)])
    report.states_visited = 1

    while frontier:
        state, depth = frontier.popleft()
        report.max_depth = max(report.max_depth, depth)
        enabled = enabled_deliveries(state)
        if state.all_terminated() or not enabled:
            outcome = Outcome.ALL_TERMINATED if state.all_terminated() else Outcome.DEADLOCK
            if outcome is Outcome.DEADLOCK:
                report.deadlocks += 1
            verdict = check_terminal(RunResult(state, outcome))
            report.terminal_states += 1
            report.terminal_ok += verdict.ok
            report.terminal_summary[(verdict.leader, verdict.total_messages)] += 1
            report.max_total_messages = max(report.max_total_messages, verdict.total_messages)
            _record(report, verdict.violations)
            # pulses left behind by finished nodes are still deliverable
            if outcome is Outcome.DEADLOCK or not enabled:
                continue
        for edge in enabled:
            nxt = state.copy()
            deliver(nxt, edge)
            report.transitions += 1
            if monitors:
                _record(report, _leader_order(state.terminated_at, nxt))
            for ev in nxt.violations[len(state.violations):]:
                rule = POST_TERMINATION if ev.event_name == POST_TERMINATION else "protocol-violation"
                _record(report, [Violation(ev.step, rule, ev.node, None, ev.event_name, None)])
            fp = nxt.fingerprint()
            if fp in seen:
                continue
            if len(seen) >= state_cap:
                report.truncated = True
                continue
            seen.add(fp)
            report.states_visited += 1
            if monitors:
                _record(report, check_step(nxt, oracles, (nxt.last_node,)))
            frontier.append((nxt, depth + 1))

    report.seconds = time.perf_counter() - t0
    return report
