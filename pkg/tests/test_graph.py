from __future__ import annotations

import random

import networkx as nx
import pytest
from hypothesis import given, strategies as st

from oracles import from_networkx, small_cubic_corpus, to_networkx
from treelike.constructions import petersen, petersen_fragment, treelike_snark
from treelike.graph import (
    GenGraph,
    GraphError,
    are_isomorphic,
    check_isomorphism,
    components,
    contract,
    degrees_in,
    girth,
    half_edge_distance,
    is_cycle,
    is_cyclically_k_connected,
    is_join,
)

CORPUS = small_cubic_corpus()


def relabel(g: GenGraph, perm: list[int]) -> GenGraph:
    h = GenGraph()
    h.add_vertices(g.num_vertices)
    edges = [(perm[u], perm[v]) for u, v in g.edge_endpoints()]
    random.Random(len(edges)).shuffle(edges)
    for u, v in edges:
        h.add_edge(u, v)
    return h


def test_join_two_loose_half_edges():
    g = GenGraph()
    a, b = g.add_vertex(), g.add_vertex()
    g.join(g.add_loose(a), g.add_loose(b))
    assert g.num_edges == 1 and g.loose() == []


def test_join_rejects_loops_and_reuse():
    g = GenGraph()
    v = g.add_vertex()
    h = g.add_loose(v)
    with pytest.raises(GraphError):
        g.join(h, h)
    with pytest.raises(GraphError):
        g.join(h, g.add_loose(v))
    w = g.add_vertex()
    h2 = g.add_loose(w)
    g.join(h, h2)
    with pytest.raises(GraphError):
        g.join(h, g.add_loose(w))


def test_petersen_counts():
    g = petersen()
    assert (g.num_vertices, g.num_edges, g.is_cubic()) == (10, 15, True)


def test_subdivide():
    tri = from_networkx(nx.cycle_graph(3))
    tri.subdivide(0)
    assert tri.num_vertices == 4 and girth(tri) == 4
    g = petersen()
    g.subdivide(0)
    g.subdivide(5)
    assert (g.num_vertices, g.num_edges) == (12, 17)
    p = from_networkx(nx.path_graph(2))
    p.subdivide(0)
    p.subdivide(0)
    assert p.num_edges == 3 and nx.is_isomorphic(to_networkx(p), nx.path_graph(4))


@pytest.mark.parametrize("name", sorted(CORPUS))
def test_girth_matches_networkx(name):
    g = CORPUS[name]
    assert girth(g) == nx.girth(nx.Graph(to_networkx(g)))


def test_girth_of_forest_is_infinite():
    assert girth(from_networkx(nx.balanced_tree(2, 3))) == float("inf")


def test_cyclic_connectivity():
    assert is_cyclically_k_connected(petersen(), 4)[0]
    ok, witness = is_cyclically_k_connected(CORPUS["prism"], 4)
    assert not ok and len(witness) == 3
    assert is_cyclically_k_connected(treelike_snark("F*(F+F)"), 4)[0]


def test_disconnected_cyclic_connectivity_rejected():
    g = from_networkx(nx.disjoint_union(nx.complete_graph(4), nx.complete_graph(4)))
    with pytest.raises(GraphError):
        is_cyclically_k_connected(g, 3)


def test_spoke_distances_in_fragment():
    f = petersen_fragment()
    g = f.graph
    assert half_edge_distance(g, f.spokes[0], f.spokes[0]) == 0
    for left in f.spokes[3:]:
        for other in g.loose():
            if other != left:
                assert half_edge_distance(g, left, other) >= 3


def test_contract_circuit_of_prism():
    g = CORPUS["prism"]
    tri = [i for i, (u, v) in enumerate(g.edge_endpoints()) if u < 3 and v < 3]
    q, vmap = contract(g, tri)
    assert q.num_vertices == 4 and q.num_edges == 6
    assert len(set(vmap[:3])) == 1


@given(st.sampled_from(sorted(CORPUS)), st.randoms(use_true_random=False))
def test_isomorphism_under_relabelling(name, rnd):
    g = CORPUS[name]
    perm = list(range(g.num_vertices))
    rnd.shuffle(perm)
    h = relabel(g, perm)
    res = are_isomorphic(g, h)
    assert res.isomorphic and check_isomorphism(g, h, res.mapping)


def test_non_isomorphic_pair():
    assert not are_isomorphic(CORPUS["petersen"], CORPUS["ladder10"]).isomorphic
    assert not are_isomorphic(CORPUS["K33"], CORPUS["prism"]).isomorphic


def test_text_round_trip_keeps_edge_order():
    g = treelike_snark("F*(F+F)")
    h = GenGraph.from_text(g.to_text())
    assert h.edge_endpoints() == g.edge_endpoints()
    f = petersen_fragment()
    h = GenGraph.from_text(f.graph.to_text())
    assert len(h.loose()) == 5


@pytest.mark.parametrize("name", ["K4", "K33", "prism", "cube"])
def test_join_cycle_duality_exhaustive(name):
    """Every edge subset of a cubic graph is a cycle iff its complement is a join."""
    g = CORPUS[name]
    full = (1 << g.num_edges) - 1
    for mask in range(full + 1):
        assert is_cycle(g, mask) == is_join(g, full & ~mask)


def test_degrees_and_components():
    g = CORPUS["K4"]
    assert degrees_in(g, 0b000111) == [sum(1 for i in range(3) if v in g.edge_endpoints()[i]) for v in range(4)]
    assert len(components(g, (1 << 6) - 1)) == 4
