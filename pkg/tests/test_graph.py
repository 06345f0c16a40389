import itertools

import pytest
from hypothesis import given

from modgraphs.graph import (
    ContractError,
    GraphFormatError,
    LabeledGraph,
    all_labeled_graphs,
    are_isomorphic,
    automorphism_count,
    canonical_form,
    format_graph,
    graph_code,
    induced_subgraph,
    is_module,
    is_prime,
    iso_classes,
    labeling_count,
    occ_count,
    occ_count_labeled,
    parse_graph,
)

from strategies import graph_and_perm, graphs

P4 = LabeledGraph.path(4)
K2 = LabeledGraph.complete(2)


def test_induced_subgraph_examples():
    assert induced_subgraph(P4, {2: 1, 3: 2}) == K2
    assert induced_subgraph(P4, {1: 1, 2: 2, 3: 3, 4: 4}) == P4
    assert induced_subgraph(P4, {}).n == 0
    with pytest.raises(ContractError):
        induced_subgraph(P4, {1: 2})


def test_occ_count_examples():
    assert occ_count(K2, P4) == 6
    assert occ_count(LabeledGraph.empty(1), P4) == 4
    # 4! injections of P4 into itself; all induce a path: iso count 24, exact labeled count |Aut| = 2
    assert occ_count(P4, P4) == 24
    assert occ_count_labeled(P4, P4) == 2
    assert occ_count(LabeledGraph.complete(3), P4) == 0
    assert occ_count(LabeledGraph.path(5), P4) == 0


def test_modules_and_primes():
    c4 = LabeledGraph.cycle(4)
    assert is_module(c4, {1, 3})
    assert not is_module(P4, {1, 3})
    assert is_module(P4, {1, 2, 3, 4}) and is_module(P4, {2})
    assert is_prime(P4)
    assert not is_prime(c4)
    assert not any(is_prime(g) for g in all_labeled_graphs(3))
    # labeled primes: 12 paths on 4 vertices; on 5 vertices P5, house, bull (60 each) and C5 (12)
    assert sum(is_prime(g) for g in all_labeled_graphs(4)) == 12
    assert sum(is_prime(g) for g in all_labeled_graphs(5)) == 192


def test_iso_classes_and_labelings():
    for n, classes in ((3, 4), (4, 11), (5, 34)):
        reps = iso_classes(n)
        assert len(reps) == classes
        assert sum(labeling_count(g) for g in reps) == 2 ** (n * (n - 1) // 2)
    assert automorphism_count(P4) == 2
    assert automorphism_count(LabeledGraph.cycle(5)) == 10


@given(graph_and_perm())
def test_canonical_form_is_relabeling_invariant(gp):
    g, perm = gp
    h = g.relabel(perm)
    assert canonical_form(g) == canonical_form(h)
    assert are_isomorphic(g, h)
    assert occ_count(g, h) == occ_count(g, g)


@given(graphs(max_n=6))
def test_occ_counts_against_enumeration(h):
    # iso and labeled conventions differ by the number of labelings of the pattern
    for k in range(1, min(h.n, 3) + 1):
        for g in iso_classes(k):
            labeled_total = sum(occ_count_labeled(x, h) for x in all_labeled_graphs(k) if are_isomorphic(x, g))
            assert occ_count(g, h) == labeled_total
    total = sum(occ_count_labeled(x, h) for x in all_labeled_graphs(2))
    assert total == h.n * (h.n - 1)


@given(graphs(max_n=7))
def test_format_round_trip(g):
    text = format_graph(g)
    assert parse_graph(text) == g
    assert format_graph(parse_graph(text)) == text


@given(graphs(max_n=7))
def test_complement_and_code(g):
    assert g.complement().complement() == g
    assert g.edge_count() + g.complement().edge_count() == g.n * (g.n - 1) // 2
    assert graph_code(g) < 2 ** (g.n * (g.n - 1) // 2) or g.n < 2


@pytest.mark.parametrize(
    "text, line",
    [("", 1), ("x\n", 1), ("3\n1 2\n1 1\n", 3), ("3\n1 4\n", 2), ("3\n1 2\n2 1\n", 3), ("2\n1\n", 2)],
)
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(GraphFormatError) as err:
        parse_graph(text)
    assert err.value.line == line


def test_numpy_round_trip():
    for g in itertools.islice(all_labeled_graphs(5), 0, 1024, 37):
        assert LabeledGraph.from_numpy(g.to_numpy()) == g
