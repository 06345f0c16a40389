import itertools
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from modgraphs.graph import ContractError, LabeledGraph, all_labeled_graphs, induced_subgraph
from modgraphs.tree import (
    JOIN,
    UNION,
    Leaf,
    Node,
    beta,
    binary_trees,
    double_factorial,
    dump_tree,
    edge_count,
    expanded_trees,
    graph_of,
    induced_subtree,
    inflate,
    is_in_class,
    is_md_tree,
    iter_nodes,
    load_tree,
    modular_decomposition,
)
from modgraphs.classes import EMPTY, p4_class
from strategies import graph_and_perm, graphs

P4 = LabeledGraph.path(4)


def test_decomposition_examples():
    t = modular_decomposition(P4)
    assert isinstance(t, Node) and t.dec == P4 and len(t.children) == 4
    assert modular_decomposition(LabeledGraph.empty(1)) == Leaf(1)
    k3 = modular_decomposition(LabeledGraph.complete(3))
    assert k3.dec == JOIN and len(k3.children) == 3
    c4 = modular_decomposition(LabeledGraph.cycle(4))
    assert c4.dec == JOIN and all(ch.dec == UNION for ch in c4.children)


@given(graphs(max_n=8))
def test_round_trip_and_validity(g):
    t = modular_decomposition(g)
    assert graph_of(t) == g
    assert is_md_tree(t)
    assert sorted(t.leaves()) == list(range(1, g.n + 1))


@given(graph_and_perm(max_n=7))
def test_decomposition_commutes_with_relabeling(gp):
    g, perm = gp
    t = modular_decomposition(g)
    u = modular_decomposition(g.relabel(perm))
    assert beta(g) == beta(g.relabel(perm))
    assert edge_count(t) == edge_count(u)


@given(graphs(min_n=2, max_n=7), st.data())
def test_induced_subtree_matches_induced_subgraph(g, data):
    t = modular_decomposition(g)
    k = data.draw(st.integers(1, g.n))
    dom = data.draw(st.permutations(list(range(1, g.n + 1))))[:k]
    inj = {d: i + 1 for i, d in enumerate(dom)}
    sub = induced_subtree(t, inj)
    assert graph_of(sub) == induced_subgraph(g, inj)
    assert sorted(sub.leaves()) == list(range(1, k + 1))


def test_induced_subtree_errors():
    t = modular_decomposition(P4)
    with pytest.raises(ContractError):
        induced_subtree(t, {})
    with pytest.raises(ContractError):
        induced_subtree(t, {1: 2})


@pytest.mark.parametrize("k", range(1, 7))
def test_binary_tree_counts(k):
    trees = list(binary_trees(list(range(1, k + 1)), JOIN))
    assert len(trees) == double_factorial(2 * k - 3) if k > 1 else len(trees) == 1
    assert len(set(trees)) == len(trees)
    assert all(graph_of(t) == LabeledGraph.complete(k) for t in trees)


@given(graphs(max_n=6))
def test_expanded_trees(g):
    count, gen = expanded_trees(g)
    trees = list(gen)
    assert len(trees) == count == len(set(trees))
    md = modular_decomposition(g)
    primes = [len(nd.children) for _, nd in iter_nodes(md) if not (nd.dec == JOIN or nd.dec == UNION)]
    for t in trees:
        assert graph_of(t) == g
        if g.n > 1:
            assert edge_count(t) == 2 * g.n - 2 - sum(e - 2 for e in primes)


def test_beta_values():
    assert beta(LabeledGraph.complete(2)) == 0
    assert beta(P4) == 1
    assert beta(LabeledGraph.path(5)) == pytest.approx(1.5)
    assert all(beta(g) == 0 for g in all_labeled_graphs(4) if is_in_class(g, EMPTY))


def test_inflate_replaces_node():
    t = Node.build(JOIN, [Leaf(1), Leaf(2), Leaf(3)])
    tau = Node.build(JOIN, [Node.build(JOIN, [Leaf(1), Leaf(2)]), Leaf(3)])
    out = inflate(t, (), tau)
    assert graph_of(out) == graph_of(t)
    assert edge_count(out) == 4


def test_class_membership():
    p4 = p4_class()
    assert sum(is_in_class(g, p4) for g in all_labeled_graphs(5)) == 832
    assert not is_in_class(LabeledGraph.path(5), p4)


@given(graphs(max_n=7))
def test_tree_text_round_trip(g):
    t = modular_decomposition(g)
    assert load_tree(dump_tree(t)) == t


def test_tree_text_rejects_non_prime():
    text = '{"dec": {"prime": "3\\n1 2\\n"}, "children": [{"leaf": 1}, {"leaf": 2}, {"leaf": 3}]}'
    with pytest.raises(ValueError):
        load_tree(text)
