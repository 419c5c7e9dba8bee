"""Port-numbered network topologies and the combinatorial oracles used by the monitors.

A :class:`Topology` is a multigraph in which every node sees its incident
edges only through local port numbers.  ``ports[v][i] == (w, j)`` means that a
pulse sent by node ``v`` on port ``i`` arrives at node ``w`` on port ``j``.

Besides construction helpers (rings with adversarial port labels, random
2-edge-connected graphs, a JSON file format) the module provides the ground
truth the verifier checks the protocols against: bridge detection, the
port-priority DFS tree rooted at the minimum-ID node, its strongly connected
orientation, and directed distances in that orientation.
"""

from __future__ import annotations

import json
import random
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

__all__ = [
    "TopologyError",
    "Topology",
    "DfsTree",
    "OrientedGraph",
    "build_ring",
    "from_edge_list",
    "complete_graph",
    "cycle_with_chords",
    "is_two_edge_connected",
    "find_bridges",
    "is_connected",
    "dfs_tree",
    "robbins_orientation",
    "is_strongly_connected",
    "shortest_lengths_to",
    "gen_random_2ec",
    "save_topology",
    "load_topology",
    "topology_to_dict",
    "topology_from_dict",
]

FILE_VERSION = 1

Port = tuple[int, int]
# Undirected edge key: (v, i, w, j) with (v, i) < (w, j).
EdgeKey = tuple[int, int, int, int]


class TopologyError(ValueError):
    """Raised for malformed topologies or inputs an oracle cannot handle."""


@dataclass(frozen=True)
class Topology:
    node_ids: tuple[int, ...]
    ports: tuple[dict[int, Port], ...]

    def __post_init__(self):
        n = len(self.node_ids)
        if n == 0:
            raise TopologyError("topology needs at least one node")
        if len(self.ports) != n:
            raise TopologyError("ports must list one port map per node")
        if len(set(self.node_ids)) != n:
            raise TopologyError(f"duplicate node IDs: {self.node_ids}")
        if any(not isinstance(x, int) or x < 1 for x in self.node_ids):
            raise TopologyError(f"node IDs must be positive integers: {self.node_ids}")
        for v, pmap in enumerate(self.ports):
            for i, (w, j) in pmap.items():
                if not 0 <= w < n:
                    raise TopologyError(f"port ({v},{i}) points at unknown node {w}")
                back = self.ports[w].get(j)
                if back != (v, i):
                    raise TopologyError(
                        f"port ({v},{i}) -> ({w},{j}) is not matched by ({w},{j}) -> {back}"
                    )

    @property
    def n(self) -> int:
        return len(self.node_ids)

    def degree(self, v: int) -> int:
        return len(self.ports[v])

    def port_numbers(self, v: int) -> list[int]:
        return sorted(self.ports[v])

    def peer(self, v: int, i: int) -> Port:
        return self.ports[v][i]

    def directed_edges(self) -> list[Port]:
        """All directed edges as ``(source node, source port)`` in canonical order."""
        return [(v, i) for v in range(self.n) for i in sorted(self.ports[v])]

    def edges(self) -> list[EdgeKey]:
        """Undirected edges, each listed once as ``(v, i, w, j)`` with ``(v, i) < (w, j)``."""
        out = []
        for v, i in self.directed_edges():
            w, j = self.ports[v][i]
            if (v, i) < (w, j):
                out.append((v, i, w, j))
        return out

    @property
    def m(self) -> int:
        return sum(len(p) for p in self.ports) // 2

    def port_base(self) -> int | None:
        """0 or 1 when every node numbers its ports ``base .. base+deg-1``, else None."""
        for base in (0, 1):
            if all(sorted(p) == list(range(base, base + len(p))) for p in self.ports):
                return base
        return None

    def min_id_node(self) -> int:
        return min(range(self.n), key=lambda v: self.node_ids[v])

    def max_id_node(self) -> int:
        return max(range(self.n), key=lambda v: self.node_ids[v])

    def neighbors(self, v: int) -> list[int]:
        return [self.ports[v][i][0] for i in sorted(self.ports[v])]

    def is_ring(self) -> bool:
        """True iff every node has ports {0, 1} and the edges form one cycle."""
        if any(sorted(p) != [0, 1] for p in self.ports):
            return False
        return is_connected(self)

    def with_ids(self, node_ids: Sequence[int]) -> "Topology":
        return Topology(tuple(node_ids), self.ports)


# -- construction ---------------------------------------------------------


def from_edge_list(node_ids: Sequence[int], edges: Iterable[Sequence[int]]) -> Topology:
    """Build a topology from ``(v, i, w, j)`` quadruples, each undirected edge once."""
    ports: list[dict[int, Port]] = [{} for _ in node_ids]
    for v, i, w, j in edges:
        for a, p in ((v, i), (w, j)):
            if not 0 <= a < len(node_ids):
                raise TopologyError(f"edge endpoint {a} out of range")
            if p in ports[a]:
                raise TopologyError(f"port {p} used twice at node {a}")
        if (v, i) == (w, j):
            raise TopologyError(f"edge ({v},{i}) connects a port to itself")
        ports[v][i] = (w, j)
        ports[w][j] = (v, i)
    return Topology(tuple(node_ids), tuple(ports))


def _from_adjacency(node_ids: Sequence[int], pairs: Sequence[tuple[int, int]], rng: random.Random | None,
                    base: int = 1) -> Topology:
    incident: list[list[int]] = [[] for _ in node_ids]
    for k, (u, w) in enumerate(pairs):
        incident[u].append(k)
        incident[w].append(k)
    port_of: dict[tuple[int, int], int] = {}
    for v, ks in enumerate(incident):
        order = list(ks)
        if rng is not None:
            rng.shuffle(order)
        for p, k in enumerate(order, start=base):
            port_of[(v, k)] = p
    quads = []
    for k, (u, w) in enumerate(pairs):
        quads.append((u, port_of[(u, k)], w, port_of[(w, k)]))
    return from_edge_list(node_ids, quads)


def complete_graph(n: int, node_ids: Sequence[int] | None = None) -> Topology:
    """K_n with ports numbered in neighbor-index order."""
    ids = list(node_ids) if node_ids is not None else list(range(1, n + 1))
    pairs = [(u, w) for u in range(n) for w in range(u + 1, n)]
    return _from_adjacency(ids, pairs, None)


def cycle_with_chords(n: int, chords: Iterable[tuple[int, int]] = (),
                      node_ids: Sequence[int] | None = None) -> Topology:
    """Cycle 0-1-...-(n-1)-0 plus the given chords, ports 1..deg in edge order."""
    if n < 3:
        raise TopologyError(f"a simple cycle needs at least 3 nodes, got {n}")
    ids = list(node_ids) if node_ids is not None else list(range(1, n + 1))
    pairs = [(v, (v + 1) % n) for v in range(n)]
    seen = {frozenset(p) for p in pairs}
    for u, w in chords:
        key = frozenset((u, w))
        if u == w or key in seen:
            raise TopologyError(f"chord ({u}, {w}) is a loop or duplicates an edge")
        seen.add(key)
        pairs.append((u, w))
    return _from_adjacency(ids, pairs, None)


def build_ring(n: int, flip_mask: Sequence[int] | int = 0, node_ids: Sequence[int] | None = None) -> Topology:
    """Ring of ``n`` nodes with ports {0, 1}.

    Canonically node ``v``'s port 0 leads to ``v+1`` and port 1 to ``v-1``
    (indices mod n).  Setting bit ``v`` of ``flip_mask`` (an int bit mask or a
    sequence of 0/1) swaps the two labels at node ``v``.  ``n == 2`` yields two
    parallel edges.
    """
    if n < 2:
        raise TopologyError(f"a ring needs at least 2 nodes, got {n}")
    if isinstance(flip_mask, int):
        flips = [(flip_mask >> v) & 1 for v in range(n)]
    else:
        flips = [1 if b else 0 for b in flip_mask]
        if len(flips) != n:
            raise TopologyError("flip_mask must have one entry per node")
    ids = list(node_ids) if node_ids is not None else list(range(1, n + 1))
    if len(ids) != n:
        raise TopologyError("node_ids must have one entry per node")

    def label(v: int, side: int) -> int:
        # side 0 is the clockwise endpoint, side 1 the counter-clockwise one
        return side ^ flips[v]

    quads = [(v, label(v, 0), (v + 1) % n, label((v + 1) % n, 1)) for v in range(n)]
    return from_edge_list(ids, quads)


def gen_random_2ec(n: int, extra_edges: int, seed: int, max_id: int | None = None) -> Topology:
    """Random Hamiltonian cycle plus ``extra_edges`` chords, random port numbering.

    The result is a simple graph and 2-edge-connected by construction.  IDs are
    distinct integers drawn from ``1 .. max_id`` (default ``4 * n``).
    """
    if n < 3:
        raise TopologyError(f"gen_random_2ec needs n >= 3, got {n}")
    capacity = n * (n - 1) // 2 - n
    if extra_edges < 0 or extra_edges > capacity:
        raise TopologyError(f"extra_edges={extra_edges} exceeds chord capacity {capacity} for n={n}")
    rng = random.Random(seed)
    order = list(range(n))
    rng.shuffle(order)
    pairs = [(order[k], order[(k + 1) % n]) for k in range(n)]
    present = {frozenset(p) for p in pairs}
    chords = [(u, w) for u in range(n) for w in range(u + 1, n) if frozenset((u, w)) not in present]
    pairs += rng.sample(chords, extra_edges)
    hi = max_id if max_id is not None else 4 * n
    if hi < n:
        raise TopologyError(f"max_id={hi} cannot supply {n} distinct IDs")
    ids = rng.sample(range(1, hi + 1), n)
    return _from_adjacency(ids, pairs, rng)


# -- connectivity ---------------------------------------------------------


def is_connected(topo: Topology, skip_edge: EdgeKey | None = None) -> bool:
    seen = {0}
    stack = [0]
    while stack:
        v = stack.pop()
        for i, (w, j) in topo.ports[v].items():
            if skip_edge is not None and (skip_edge[:2] == (v, i) or skip_edge[2:] == (v, i)):
                continue
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == topo.n


def find_bridges(topo: Topology) -> list[EdgeKey]:
    """Bridges by the low-link DFS; parallel edges are distinct and never bridges."""
    n = topo.n
    disc = [-1] * n
    low = [0] * n
    bridges: list[EdgeKey] = []
    timer = 0
    for start in range(n):
        if disc[start] != -1:
            continue
        disc[start] = low[start] = timer
        timer += 1
        # frames: (node, port used to enter it or None, iterator over its ports)
        stack = [(start, None, iter(sorted(topo.ports[start])))]
        while stack:
            v, entry, it = stack[-1]
            advanced = False
            for i in it:
                if i == entry:
                    continue
                w, _ = topo.ports[v][i]
                if disc[w] == -1:
                    disc[w] = low[w] = timer
                    timer += 1
                    stack.append((w, topo.ports[v][i][1], iter(sorted(topo.ports[w]))))
                    advanced = True
                    break
                low[v] = min(low[v], disc[w])
            if advanced:
                continue
            stack.pop()
            if stack and entry is not None:
                u = stack[-1][0]
                low[u] = min(low[u], low[v])
                if low[v] > disc[u]:
                    w, j = topo.ports[v][entry]
                    a, b = (v, entry), (w, j)
                    bridges.append(a + b if a < b else b + a)
    return sorted(bridges)


def is_two_edge_connected(topo: Topology) -> bool:
    """Connected and bridgeless, counting parallel edges as distinct."""
    return is_connected(topo) and not find_bridges(topo)


# -- DFS tree and orientation ---------------------------------------------


@dataclass
class DfsTree:
    """The port-priority DFS tree rooted at the minimum-ID node.

    ``traversal`` is the token walk: ``2m`` entries ``(src, src_port, dst,
    dst_port, kind)`` with ``kind`` in ``{"explore", "done"}``.
    """

    root: int
    parent: dict[int, Port]
    depth: dict[int, int]
    tree_edges: list[EdgeKey]
    back_edges: list[EdgeKey]
    traversal: list[tuple[int, int, int, int, str]]

    def is_ancestor(self, a: int, b: int) -> bool:
        """True iff ``a`` is a proper ancestor of ``b``."""
        while b in self.parent:
            b = self.parent[b][0]
            if b == a:
                return True
        return False


def _key(v: int, i: int, w: int, j: int) -> EdgeKey:
    return (v, i, w, j) if (v, i) < (w, j) else (w, j, v, i)


def dfs_tree(topo: Topology) -> DfsTree:
    """Run the DFS token walk, always exploring the smallest unexplored port first."""
    if not is_connected(topo):
        raise TopologyError("dfs_tree requires a connected topology")
    root = topo.min_id_node()
    unexplored = [set(p) for p in topo.ports]
    parent: dict[int, Port] = {}
    depth = {root: 0}
    visited = {root}
    tree: list[EdgeKey] = []
    back: list[EdgeKey] = []
    walk: list[tuple[int, int, int, int, str]] = []
    v = root
    while True:
        if unexplored[v]:
            i = min(unexplored[v])
            w, j = topo.ports[v][i]
            walk.append((v, i, w, j, "explore"))
            if w not in visited:
                visited.add(w)
                parent[w] = (v, j)
                depth[w] = depth[v] + 1
                unexplored[w].discard(j)
                tree.append(_key(v, i, w, j))
                v = w
            else:
                # back edge: the receiver answers at once
                unexplored[w].discard(j)
                walk.append((w, j, v, i, "done"))
                unexplored[v].discard(i)
                back.append(_key(v, i, w, j))
        elif v == root:
            break
        else:
            u, j = parent[v]
            i = topo.ports[v][j][1]
            walk.append((v, j, u, i, "done"))
            unexplored[u].discard(i)
            v = u
    return DfsTree(root, parent, depth, sorted(tree), sorted(back), walk)


@dataclass
class OrientedGraph:
    n: int
    arcs: list[tuple[int, int]] = field(default_factory=list)

    def successors(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.n)]
        for u, w in self.arcs:
            out[u].append(w)
        return out


def robbins_orientation(dfs: DfsTree, n: int | None = None) -> OrientedGraph:
    """Tree edges parent -> child, back edges descendant -> ancestor."""
    size = n if n is not None else len(dfs.depth)
    arcs = []
    for v, i, w, j in dfs.tree_edges:
        if dfs.parent.get(w, (None,))[0] == v and dfs.parent[w][1] == j:
            arcs.append((v, w))
        else:
            arcs.append((w, v))
    for v, i, w, j in dfs.back_edges:
        arcs.append((v, w) if dfs.depth[v] > dfs.depth[w] else (w, v))
    return OrientedGraph(size, arcs)


def _reach(adj: list[list[int]], src: int) -> set[int]:
    seen = {src}
    stack = [src]
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def is_strongly_connected(g: OrientedGraph) -> bool:
    fwd = g.successors()
    rev: list[list[int]] = [[] for _ in range(g.n)]
    for u, w in g.arcs:
        rev[w].append(u)
    return len(_reach(fwd, 0)) == g.n and len(_reach(rev, 0)) == g.n


def shortest_lengths_to(g: OrientedGraph, r: int) -> dict[int, int]:
    """Length of a shortest directed path from every node to ``r``."""
    rev: list[list[int]] = [[] for _ in range(g.n)]
    for u, w in g.arcs:
        rev[w].append(u)
    dist = {r: 0}
    queue = deque([r])
    while queue:
        u = queue.popleft()
        for w in rev[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                queue.append(w)
    if len(dist) != g.n:
        missing = sorted(set(range(g.n)) - dist.keys())
        raise TopologyError(f"nodes {missing} cannot reach {r}; input was not 2-edge-connected")
    if max(dist.values()) >= g.n:
        raise TopologyError("distance exceeds n-1")
    return dist


# -- file format ----------------------------------------------------------


def topology_to_dict(topo: Topology) -> dict:
    return {
        "version": FILE_VERSION,
        "node_ids": list(topo.node_ids),
        "ports": [list(e) for e in topo.edges()],
    }


def topology_from_dict(data: dict) -> Topology:
    version = data.get("version")
    if version != FILE_VERSION:
        raise TopologyError(f"unsupported topology file version {version!r}")
    return from_edge_list(data["node_ids"], [tuple(q) for q in data["ports"]])


def save_topology(topo: Topology, path: str | Path) -> None:
    Path(path).write_text(json.dumps(topology_to_dict(topo)) + "\n")


def load_topology(path: str | Path) -> Topology:
    return topology_from_dict(json.loads(Path(path).read_text()))
