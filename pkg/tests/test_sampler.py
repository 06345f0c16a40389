import collections

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chisquare

from modgraphs import _kernels_py, kernels
from modgraphs import sampler as S
from modgraphs.classes import EMPTY, PathClass, p4_class
from modgraphs.graph import ContractError, LabeledGraph
from modgraphs.sampler import (
    CountCache,
    RngStream,
    sample_adjacency,
    sample_binary_tree,
    sample_brownian_cographon,
    sample_injection,
    sample_shape,
    sample_uniform_graph,
    sample_uniform_tree,
)
from modgraphs.tree import Leaf, graph_of, is_in_class, is_md_tree, iter_nodes, modular_decomposition

CLASSES = {"empty": EMPTY, "p4": p4_class(), "paths": PathClass()}


@pytest.fixture(scope="module")
def caches():
    return {name: CountCache(cls, 200) for name, cls in CLASSES.items()}


def clusters(t):
    """Leaf sets of the internal nodes: identifies an unordered tree regardless of decorations."""
    out = []

    def walk(x):
        if isinstance(x, Leaf):
            return frozenset([x.label])
        s = frozenset().union(*(walk(c) for c in x.children))
        out.append(s)
        return s

    walk(t)
    return frozenset(out)


@pytest.mark.parametrize("name", list(CLASSES))
def test_float_tables_match_exact_counts(caches, name):
    c = caches[name]
    assert max(c.float_count_check(n) for n in range(1, 201)) < 1e-12


@pytest.mark.parametrize("name", list(CLASSES))
def test_high_precision_tables_match_float_tables(caches, name):
    c = caches[name]
    mp = c.mp_tables(80)
    approx = np.array([[float(x) for x in row[:81]] for row in mp])
    ref = c.tab[:, :81]
    assert np.allclose(approx, ref, rtol=1e-13, atol=0)


@pytest.mark.skipif(kernels.backend() != "compiled", reason="compiled kernels not built")
@pytest.mark.parametrize("name", list(CLASSES))
@pytest.mark.parametrize("n", [1, 2, 7, 50, 200])
def test_compiled_and_pure_shapes_agree(caches, name, n):
    c = caches[name]
    for i in range(5):
        a = sample_shape(c, n, RngStream(11, n, (i,)))
        b = sample_shape(c, n, RngStream(11, n, (i,)), backend="python")
        for f in ("kind", "lo", "size", "parent", "aux", "perm_data"):
            assert np.array_equal(getattr(a, f), getattr(b, f))
        assert np.array_equal(a.adjacency(), b.adjacency())
        adj = np.zeros((n, n), dtype=np.uint8)
        _kernels_py.fill_adjacency(adj, len(a.kind), a.kind, a.lo, a.size, a.parent, a.aux, a.perm_data,
                                   c.rep_adj, c.rep_k)
        assert np.array_equal(adj, a.adjacency())


@settings(max_examples=40)
@given(name=st.sampled_from(list(CLASSES)), n=st.integers(1, 40), seed=st.integers(0, 10**6))
def test_sampled_trees_are_valid(caches, name, n, seed):
    c = caches[name]
    cls = CLASSES[name]
    t = sample_uniform_tree(cls, n, c, RngStream(seed, n))
    assert t.size == n
    assert is_md_tree(t)
    g = graph_of(t)
    assert is_in_class(g, cls)
    assert modular_decomposition(g) == t
    # the adjacency path gives the graph of the same tree
    adj = sample_adjacency(c, n, RngStream(seed, n))
    assert LabeledGraph.from_numpy(adj.astype(bool)) == g


def test_determinism(caches):
    c = caches["paths"]
    a = [sample_adjacency(c, 120, RngStream(3, 120, (i,))) for i in range(3)]
    b = [sample_adjacency(c, 120, RngStream(3, 120, (i,))) for i in range(3)]
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert not np.array_equal(a[0], a[1])


def test_size_contract(caches):
    c = caches["empty"]
    with pytest.raises(ContractError):
        sample_shape(c, 0, RngStream(1))
    with pytest.raises(ContractError):
        sample_shape(c, 201, RngStream(1))
    with pytest.raises(ContractError):
        sample_uniform_tree(PathClass(), 5, c, RngStream(1))


def _chi2_uniform(counter, total, covered=True):
    obs = list(counter.values()) + [0] * (total - len(counter))
    assert len(counter) <= total
    assert len(counter) == total or not covered
    return chisquare(obs).pvalue


@pytest.mark.parametrize("name,n,total", [("empty", 4, 52), ("paths", 4, 64), ("p4", 4, 64)])
def test_uniform_on_small_sizes(caches, name, n, total):
    c = caches[name]
    cnt = collections.Counter(sample_adjacency(c, n, RngStream(5, n, (i,))).tobytes() for i in range(6400))
    assert c.count(n) == total
    assert _chi2_uniform(cnt, total) > 1e-3


@pytest.mark.parametrize("name,n", [("paths", 4), ("p4", 5)])
def test_forced_exact_resolution_stays_uniform(monkeypatch, name, n):
    # a huge guard sends most choices through the high-precision / exact resolver
    monkeypatch.setattr(S, "GUARD", 0.2)
    c = CountCache(CLASSES[name], n)
    shapes = [sample_shape(c, n, RngStream(9, n, (i,))) for i in range(4000)]
    assert sum(s.exact_path for s in shapes) > 3000
    cnt = collections.Counter(sample_adjacency(c, n, RngStream(9, n, (i,))).tobytes() for i in range(4000))
    assert _chi2_uniform(cnt, c.count(n), covered=False) > 1e-3


def test_forced_resolution_at_large_size(monkeypatch):
    monkeypatch.setattr(S, "GUARD", 1e-4)
    c = CountCache(PathClass(), 300)
    shape = sample_shape(c, 300, RngStream(4, 300))
    assert shape.exact_path
    t = shape.to_tree()
    assert t.size == 300 and is_md_tree(t)


def test_binary_tree_shapes_uniform():
    # 15 unordered binary trees on 4 labeled leaves
    cnt = collections.Counter(clusters(sample_binary_tree(4, 0.5, RngStream(2, 0, (i,)))) for i in range(6000))
    assert _chi2_uniform(cnt, 15) > 1e-3


@given(k=st.integers(1, 12), p=st.floats(0, 1), seed=st.integers(0, 10**6))
def test_binary_tree_and_cographon_samples(k, p, seed):
    t = sample_binary_tree(k, p, RngStream(seed))
    assert t.size == k
    assert all(len(nd.children) == 2 for _, nd in iter_nodes(t))
    g = sample_brownian_cographon(k, p, RngStream(seed))
    assert g.n == k and is_in_class(g, EMPTY)


def test_cographon_edge_extremes():
    assert sample_brownian_cographon(6, 1.0, RngStream(1)) == LabeledGraph.complete(6)
    assert sample_brownian_cographon(6, 0.0, RngStream(1)) == LabeledGraph.empty(6)
    with pytest.raises(ContractError):
        sample_brownian_cographon(3, 1.5, RngStream(1))


@given(n=st.integers(1, 30), data=st.data())
def test_injection_contract(n, data):
    ell = data.draw(st.integers(0, n))
    inj = sample_injection(n, ell, RngStream(n, ell))
    assert sorted(inj.values()) == list(range(1, ell + 1))
    assert all(1 <= d <= n for d in inj)
    with pytest.raises(ContractError):
        sample_injection(n, n + 1, RngStream(1))


def test_injection_uniform():
    cnt = collections.Counter(tuple(sorted(sample_injection(4, 2, RngStream(7, 0, (i,))).items()))
                              for i in range(6000))
    assert _chi2_uniform(cnt, 12) > 1e-3


def test_graph_sampler_matches_adjacency(caches):
    c = caches["p4"]
    g = sample_uniform_graph(CLASSES["p4"], 30, c, RngStream(8, 30))
    adj = sample_adjacency(c, 30, RngStream(8, 30))
    assert g == LabeledGraph.from_numpy(adj.astype(bool))
