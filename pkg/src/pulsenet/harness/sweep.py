"""Seed sweeps: one monitored run per scheduler seed, aggregated into a table.

An *instance spec* is a plain dict (the JSON accepted by ``pulsenet sweep
--spec``)::

    {"topology": {"kind": "random_2ec", "n": 6, "extra_edges": 2, "seed": 3},
     "protocol": "2ec", "n_bound": 6, "scheduler": "random"}

Topology kinds: ``ring`` (n, flip_mask, node_ids), ``complete`` (n, node_ids),
``cycle_chords`` (n, chords, node_ids), ``random_2ec`` (n, extra_edges, seed,
max_id) and ``file`` (path).  ``n_bound`` defaults to the node count.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Iterable

from ..sim import SimulationError, init_network, protocol_from_name, run
from ..topology import (
    Topology,
    build_ring,
    complete_graph,
    cycle_with_chords,
    gen_random_2ec,
    load_topology,
)
from ..verify import StepMonitor, Verdict, check_terminal
from .schedulers import make_scheduler

__all__ = ["SeedResult", "SweepTable", "build_topology", "build_instance", "seed_sweep", "parse_seed_range"]


def build_topology(spec: dict) -> Topology:
    kind = spec.get("kind")
    ids = spec.get("node_ids")
    if kind == "ring":
        return build_ring(spec["n"], spec.get("flip_mask", 0), ids)
    if kind == "complete":
        return complete_graph(spec["n"], ids)
    if kind == "cycle_chords":
        return cycle_with_chords(spec["n"], [tuple(c) for c in spec.get("chords", ())], ids)
    if kind == "random_2ec":
        return gen_random_2ec(spec["n"], spec.get("extra_edges", 0), spec.get("seed", 0), spec.get("max_id"))
    if kind == "file":
        return load_topology(spec["path"])
    raise SimulationError(f"unknown topology kind {kind!r}")


def build_instance(spec: dict):
    """Return ``(topology, protocol)`` for an instance spec."""
    topo = build_topology(spec["topology"])
    name = spec.get("protocol", "ring" if topo.is_ring() and topo.port_base() == 0 else "2ec")
    return topo, protocol_from_name(name, spec.get("n_bound", topo.n))


@dataclass
class SeedResult:
    seed: int
    ok: bool
    outcome: str
    steps: int
    total_messages: int
    leader: int | None
    monitor_violations: int
    verdict: Verdict


@dataclass
class SweepTable:
    rows: list[SeedResult] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def runs(self) -> int:
        return len(self.rows)

    @property
    def passed(self) -> int:
        return sum(r.ok for r in self.rows)

    @property
    def failed(self) -> int:
        return self.runs - self.passed

    @property
    def all_ok(self) -> bool:
        return self.runs > 0 and self.failed == 0

    def summary(self) -> dict:
        totals = [r.total_messages for r in self.rows]
        steps = [r.steps for r in self.rows]
        return {
            "runs": self.runs,
            "passed": self.passed,
            "failed": self.failed,
            "failed_seeds": [r.seed for r in self.rows if not r.ok],
            "messages_min": min(totals, default=None),
            "messages_max": max(totals, default=None),
            "steps_min": min(steps, default=None),
            "steps_max": max(steps, default=None),
            "leaders": sorted({r.leader for r in self.rows if r.leader is not None}),
            "seconds": round(self.seconds, 3),
        }


def seed_sweep(topology: Topology, protocol, seeds: Iterable[int], scheduler: str = "random",
               monitors: bool = True, starved=()) -> SweepTable:
    """Run ``topology`` once per seed; a seed passes iff its verdict is ok and
    the step monitors reported nothing."""
    table = SweepTable()
    t0 = time.perf_counter()
    for seed in seeds:
        state = init_network(topology, protocol, record_trace=False)
        mon = StepMonitor(state) if monitors else None
        result = run(state, make_scheduler(scheduler, seed, starved), observer=mon)
        verdict = check_terminal(result)
        nbad = len(mon.violations) if mon else 0
        table.rows.append(SeedResult(seed, verdict.ok and nbad == 0, result.outcome.value,
                                     state.step_count, verdict.total_messages, verdict.leader, nbad, verdict))
    table.seconds = time.perf_counter() - t0
    return table


def parse_seed_range(text: str) -> range:
    """``"A..B"`` (inclusive) or a single integer."""
    if ".." in text:
        a, b = text.split("..", 1)
        lo, hi = int(a), int(b)
        if hi < lo:
            raise ValueError(f"empty seed range {text!r}")
        return range(lo, hi + 1)
    k = int(text)
    return range(k, k + 1)
