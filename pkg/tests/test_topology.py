import random

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pulsenet.topology import (
    OrientedGraph,
    Topology,
    TopologyError,
    build_ring,
    complete_graph,
    cycle_with_chords,
    dfs_tree,
    find_bridges,
    from_edge_list,
    gen_random_2ec,
    is_connected,
    is_strongly_connected,
    is_two_edge_connected,
    load_topology,
    robbins_orientation,
    save_topology,
    shortest_lengths_to,
)

A, B, C = 0, 1, 2


def brute_force_bridges(topo):
    return sorted(e for e in topo.edges() if not is_connected(topo, skip_edge=e))


def path3():
    return from_edge_list([1, 2, 3], [(0, 1, 1, 1), (1, 2, 2, 1)])


class TestTopologyType:
    def test_involution_enforced(self):
        with pytest.raises(TopologyError):
            Topology((1, 2), ({0: (1, 0)}, {0: (1, 0)}))

    def test_duplicate_ids_rejected(self):
        with pytest.raises(TopologyError):
            complete_graph(3, [1, 1, 2])

    def test_nonpositive_ids_rejected(self):
        with pytest.raises(TopologyError):
            complete_graph(3, [0, 1, 2])

    def test_port_reused(self):
        with pytest.raises(TopologyError):
            from_edge_list([1, 2, 3], [(0, 1, 1, 1), (0, 1, 2, 1)])

    def test_complete_graph_ports(self):
        t = complete_graph(3, [1, 2, 3])
        assert t.port_base() == 1
        assert t.ports[A] == {1: (B, 1), 2: (C, 1)}
        assert t.ports[B] == {1: (A, 1), 2: (C, 2)}
        assert t.m == 3 and len(t.directed_edges()) == 6

    def test_min_max_nodes(self):
        t = complete_graph(4, [7, 3, 9, 5])
        assert t.min_id_node() == 1 and t.max_id_node() == 2


class TestBuildRing:
    def test_canonical_orientation(self):
        t = build_ring(3, 0)
        for v in range(3):
            assert t.ports[v][0] == ((v + 1) % 3, 1)
        assert t.is_ring()

    def test_single_flip(self):
        base = build_ring(3, 0)
        t = build_ring(3, 0b010)
        assert t.ports[1][0] == base.ports[1][1]
        assert t.ports[1][1] == base.ports[1][0]
        for v in range(3):
            for i, (w, j) in t.ports[v].items():
                assert t.ports[w][j] == (v, i)

    def test_mask_as_sequence(self):
        assert build_ring(4, [0, 1, 0, 1]) == build_ring(4, 0b1010)

    def test_two_nodes_parallel_edges(self):
        t = build_ring(2, 0)
        assert t.n == 2 and t.m == 2
        assert set(t.port_numbers(0)) == {0, 1} and set(t.port_numbers(1)) == {0, 1}
        assert {t.ports[0][0], t.ports[0][1]} == {(1, 0), (1, 1)}
        assert t.is_ring()

    def test_too_small(self):
        with pytest.raises(TopologyError):
            build_ring(1)


class TestBridges:
    def test_triangle(self):
        assert is_two_edge_connected(complete_graph(3))

    def test_path(self):
        t = path3()
        assert not is_two_edge_connected(t)
        assert len(find_bridges(t)) == 2

    def test_k4(self):
        t = complete_graph(4)
        assert is_two_edge_connected(t)
        assert brute_force_bridges(t) == []

    def test_parallel_edges_are_not_bridges(self):
        assert find_bridges(build_ring(2)) == []

    def test_bridge_between_triangles(self):
        pairs = [(0, 1, 1, 1), (1, 2, 2, 1), (2, 2, 0, 2), (3, 1, 4, 1), (4, 2, 5, 1), (5, 2, 3, 2),
                 (0, 3, 3, 3)]
        t = from_edge_list([1, 2, 3, 4, 5, 6], pairs)
        assert find_bridges(t) == brute_force_bridges(t) == [(0, 3, 3, 3)]

    @settings(max_examples=60, deadline=None)
    @given(st.integers(3, 8), st.integers(0, 40), st.data())
    def test_lowlink_matches_brute_force(self, n, seed, data):
        t = gen_random_2ec(n, 0, seed)
        # drop a random edge so that bridges usually appear
        edges = t.edges()
        drop = data.draw(st.integers(0, len(edges) - 1))
        keep = [e for k, e in enumerate(edges) if k != drop]
        ports = [{} for _ in range(n)]
        for v, i, w, j in keep:
            ports[v][i] = (w, j)
            ports[w][j] = (v, i)
        sub = Topology(t.node_ids, tuple(ports))
        assert find_bridges(sub) == brute_force_bridges(sub)


class TestDfs:
    def test_triangle_tree(self):
        d = dfs_tree(complete_graph(3, [1, 2, 3]))
        assert d.root == A
        assert d.parent == {B: (A, 1), C: (B, 2)}
        assert d.back_edges == [(A, 2, C, 1)]

    def test_triangle_traversal(self):
        d = dfs_tree(complete_graph(3, [1, 2, 3]))
        kinds = [(s, t, k) for s, _, t, _, k in d.traversal]
        assert kinds == [(A, B, "explore"), (B, C, "explore"), (C, A, "explore"),
                         (A, C, "done"), (C, B, "done"), (B, A, "done")]

    def test_root_is_min_id(self):
        assert dfs_tree(complete_graph(4, [5, 2, 8, 4])).root == 1

    @pytest.mark.parametrize("n", [3, 4, 6, 9])
    def test_cycle_is_hamiltonian_path(self, n):
        t = cycle_with_chords(n)
        d = dfs_tree(t)
        assert len(d.tree_edges) == n - 1 and len(d.back_edges) == 1
        v, _, w, _ = d.back_edges[0]
        assert d.root in (v, w)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(3, 8), st.integers(0, 3), st.integers(0, 10_000))
    def test_traversal_covers_each_direction_once(self, n, extra, seed):
        extra = min(extra, n * (n - 1) // 2 - n)
        t = gen_random_2ec(n, extra, seed)
        d = dfs_tree(t)
        assert len(d.traversal) == 2 * t.m
        seen = [(s, sp) for s, sp, _, _, _ in d.traversal]
        assert sorted(seen) == t.directed_edges()
        pos = {}
        for k, (s, sp, r, rp, kind) in enumerate(d.traversal):
            pos[(frozenset([(s, sp), (r, rp)]), kind)] = k
        for key in {k for k, _ in pos}:
            assert pos[(key, "explore")] < pos[(key, "done")]
        for v, _, w, _ in d.back_edges:
            assert d.is_ancestor(v, w) or d.is_ancestor(w, v)


class TestOrientation:
    def test_triangle(self):
        d = dfs_tree(complete_graph(3, [1, 2, 3]))
        g = robbins_orientation(d, 3)
        assert sorted(g.arcs) == [(A, B), (B, C), (C, A)]
        assert is_strongly_connected(g)

    def test_triangle_distances(self):
        d = dfs_tree(complete_graph(3, [1, 2, 3]))
        assert shortest_lengths_to(robbins_orientation(d, 3), A) == {A: 0, C: 1, B: 2}

    @pytest.mark.parametrize("n", [3, 5, 8])
    def test_cycle(self, n):
        t = cycle_with_chords(n)
        g = robbins_orientation(dfs_tree(t), n)
        assert all(len(s) == 1 for s in g.successors())
        assert sorted(shortest_lengths_to(g, 0).values()) == list(range(n))

    def test_unreachable_raises(self):
        with pytest.raises(TopologyError):
            shortest_lengths_to(OrientedGraph(3, [(0, 1), (1, 2)]), 0)

    @settings(max_examples=80, deadline=None)
    @given(st.integers(3, 8), st.integers(0, 3), st.integers(0, 10_000))
    def test_networkx_agrees(self, n, extra, seed):
        extra = min(extra, n * (n - 1) // 2 - n)
        t = gen_random_2ec(n, extra, seed)
        g = robbins_orientation(dfs_tree(t), n)
        dg = nx.MultiDiGraph()
        dg.add_nodes_from(range(n))
        dg.add_edges_from(g.arcs)
        assert is_strongly_connected(g) == nx.is_strongly_connected(dg) is True
        r = dfs_tree(t).root
        want = nx.shortest_path_length(dg.reverse(), source=r)
        assert shortest_lengths_to(g, r) == want


class TestGenerator:
    def test_four_cycle(self):
        t = gen_random_2ec(4, 0, seed=1)
        assert t.m == 4 and all(t.degree(v) == 2 for v in range(4))

    def test_seed_7(self):
        assert is_two_edge_connected(gen_random_2ec(6, 3, seed=7))

    def test_deterministic(self):
        assert gen_random_2ec(7, 2, seed=3) == gen_random_2ec(7, 2, seed=3)

    def test_capacity(self):
        with pytest.raises(TopologyError):
            gen_random_2ec(4, 3, seed=0)

    def test_ids_distinct_in_range(self):
        t = gen_random_2ec(8, 3, seed=11)
        assert len(set(t.node_ids)) == 8 and max(t.node_ids) <= 32

    def test_simple_graph(self):
        t = gen_random_2ec(6, 9, seed=2)
        pairs = [frozenset((v, w)) for v, _, w, _ in t.edges()]
        assert len(pairs) == len(set(pairs)) == 15


def test_file_roundtrip(tmp_path):
    t = gen_random_2ec(6, 2, seed=random.Random(5).randrange(100))
    p = tmp_path / "t.json"
    save_topology(t, p)
    assert load_topology(p) == t


def test_file_version_checked(tmp_path):
    p = tmp_path / "t.json"
    p.write_text('{"version": 99, "node_ids": [1], "ports": []}')
    with pytest.raises(TopologyError):
        load_topology(p)
