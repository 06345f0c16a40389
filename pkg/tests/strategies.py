"""Hypothesis strategies shared by the tests."""

import hypothesis.strategies as st

from modgraphs.graph import LabeledGraph


@st.composite
def graphs(draw, min_n=1, max_n=7):
    n = draw(st.integers(min_n, max_n))
    pairs = [(u, v) for u in range(1, n + 1) for v in range(u + 1, n + 1)]
    mask = draw(st.integers(0, (1 << len(pairs)) - 1))
    return LabeledGraph.from_edges(n, [p for i, p in enumerate(pairs) if (mask >> i) & 1])


@st.composite
def graph_and_perm(draw, min_n=1, max_n=7):
    g = draw(graphs(min_n, max_n))
    perm = draw(st.permutations(list(range(1, g.n + 1))))
    return g, perm
