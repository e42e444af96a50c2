"""Exhaustive and randomised property checks at small scale."""

from __future__ import annotations

from hypothesis import given, settings, strategies as st

from oracles import brute_three_edge_colorings, small_cubic_corpus
from treelike.chromatic import EdgeColoring, edge_cut, parity_check
from treelike.graph import is_cycle, is_join

CORPUS = small_cubic_corpus()
UP_TO_10 = [n for n in sorted(CORPUS) if CORPUS[n].num_vertices <= 10]
UP_TO_12_EDGES = [n for n in sorted(CORPUS) if CORPUS[n].num_edges <= 12]


def test_parity_lemma_exhaustive():
    """Every cut, every proper 3-edge-colouring, every graph with at most 10 vertices."""
    checked = 0
    for name in UP_TO_10:
        g = CORPUS[name]
        n = g.num_vertices
        cuts = [edge_cut(g, [v for v in range(n) if mask >> v & 1]) for mask in range(1, 1 << (n - 1))]
        for col in brute_three_edge_colorings(g):
            coloring = EdgeColoring(list(col))
            for cut in cuts:
                assert parity_check(g, coloring, cut)
                checked += 1
    assert checked > 0


def test_join_cycle_duality_exhaustive():
    for name in UP_TO_12_EDGES:
        g = CORPUS[name]
        full = (1 << g.num_edges) - 1
        for mask in range(full + 1):
            assert is_join(g, mask) == is_cycle(g, full & ~mask)


@settings(max_examples=200)
@given(st.sampled_from(sorted(CORPUS)), st.data())
def test_join_cycle_duality_random(name, data):
    g = CORPUS[name]
    full = (1 << g.num_edges) - 1
    mask = data.draw(st.integers(0, full))
    assert is_join(g, mask) == is_cycle(g, full & ~mask)
