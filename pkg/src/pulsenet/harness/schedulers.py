"""Scheduler policies: the adversary that picks which directed edge fires next.

Every policy is a deterministic function of its own state and the enabled
edges, which the engine always presents in canonical order.
"""

from __future__ import annotations

import random
from typing import Iterable, Sequence

from ..sim import SimulationError
from ..topology import Port

__all__ = ["ScheduleInfeasible", "RandomUniform", "EdgeStarve", "Scripted", "pick", "make_scheduler"]


class ScheduleInfeasible(SimulationError):
    """A scripted schedule asked for an edge that has nothing in transit."""


class RandomUniform:
    def __init__(self, seed: int = 0):
        self.seed = seed
        self._rng = random.Random(seed)

    def pick(self, enabled: Sequence[Port]) -> Port:
        if not enabled:
            raise SimulationError("pick() called with no enabled deliveries")
        return enabled[self._rng.randrange(len(enabled))]

    def __repr__(self):
        return f"RandomUniform(seed={self.seed})"


class EdgeStarve:
    """Never fires a starved edge while any other edge is enabled."""

    def __init__(self, starved: Iterable[Port], seed: int = 0):
        self.starved = frozenset(tuple(e) for e in starved)
        self.seed = seed
        self._rng = random.Random(seed)

    def pick(self, enabled: Sequence[Port]) -> Port:
        if not enabled:
            raise SimulationError("pick() called with no enabled deliveries")
        free = [e for e in enabled if e not in self.starved]
        pool = free or list(enabled)
        return pool[self._rng.randrange(len(pool))]

    def __repr__(self):
        return f"EdgeStarve({sorted(self.starved)}, seed={self.seed})"


class Scripted:
    """Replays an explicit edge sequence; raises when the head is not enabled."""

    def __init__(self, edges: Iterable[Port]):
        self._queue = [tuple(e) for e in edges]
        self._pos = 0

    @property
    def remaining(self) -> int:
        return len(self._queue) - self._pos

    def pick(self, enabled: Sequence[Port]) -> Port:
        if self._pos >= len(self._queue):
            raise ScheduleInfeasible("scripted schedule exhausted")
        head = self._queue[self._pos]
        if head not in enabled:
            raise ScheduleInfeasible(f"scripted edge {head} is not enabled (enabled: {list(enabled)})")
        self._pos += 1
        return head


def pick(policy, enabled: Sequence[Port]) -> Port:
    return policy.pick(enabled)


def make_scheduler(kind: str, seed: int = 0, starved: Iterable[Port] = (), script: Iterable[Port] = ()):
    if kind == "random":
        return RandomUniform(seed)
    if kind == "starve":
        return EdgeStarve(starved, seed)
    if kind == "script":
        return Scripted(script)
    raise SimulationError(f"unknown scheduler kind {kind!r}")
