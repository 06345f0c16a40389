import csv
import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modgraphs.analytic import predict_KH, solve_constants
from modgraphs.classes import EMPTY, PathClass, p4_class
from modgraphs.experiments import (
    CLAIM_DENSITY,
    CLAIM_SCALING,
    CLAIM_SUBTREE,
    ExperimentConfig,
    all_tuples,
    falling,
    iso_code_table,
    is_binary,
    pattern_name,
    random_tuples,
    run_density,
    run_scaling,
    shape_induced_subtree,
    tree_key,
    tuple_codes,
)
from modgraphs.graph import (
    ContractError,
    LabeledGraph,
    all_labeled_graphs,
    are_isomorphic,
    graph_code,
    induced_subgraph,
    occ_count,
    occ_count_labeled,
)
from modgraphs.sampler import CountCache, RngStream, sample_shape
from modgraphs.tree import induced_subtree, is_in_class

from strategies import graphs

CLASSES = {"builtin:empty": EMPTY, "builtin:p4": p4_class(), "builtin:paths": PathClass()}
P4 = LabeledGraph.path(4)
K2 = LabeledGraph.complete(2)


@pytest.fixture(scope="module")
def caches():
    return {spec: CountCache(cls, 60) for spec, cls in CLASSES.items()}


@settings(max_examples=50)
@given(spec=st.sampled_from(list(CLASSES)), n=st.integers(2, 40), seed=st.integers(0, 10**6), data=st.data())
def test_shape_induced_subtree_matches_tree(caches, spec, n, seed, data):
    shape = sample_shape(caches[spec], n, RngStream(seed, n))
    ell = data.draw(st.integers(1, min(n, 6)))
    leaves = data.draw(st.permutations(range(n)))[:ell]
    expected = induced_subtree(shape.to_tree(), {c + 1: i + 1 for i, c in enumerate(leaves)})
    assert shape_induced_subtree(shape, leaves) == expected


@given(g=graphs(4, 8), seed=st.integers(0, 10**6), ell=st.integers(2, 4))
def test_tuple_codes_match_graph_code(g, seed, ell):
    if ell > g.n:
        return
    adj = np.array([[g.has_edge(a + 1, b + 1) for b in range(g.n)] for a in range(g.n)], dtype=np.uint8)
    tuples = random_tuples(g.n, ell, 20, np.random.default_rng(seed))
    codes = tuple_codes(adj, tuples)
    for t, code in zip(tuples, codes):
        sub = induced_subgraph(g, {int(v) + 1: i + 1 for i, v in enumerate(t)})
        assert graph_code(sub) == code


def test_random_and_all_tuples():
    gen = np.random.default_rng(1)
    t = random_tuples(10, 4, 500, gen)
    assert t.shape == (500, 4)
    assert all(len(set(row)) == 4 for row in t.tolist())
    full = all_tuples(6, 3)
    assert len(full) == falling(6, 3) == 120
    assert len({tuple(r) for r in full.tolist()}) == 120


def test_iso_code_table_classes():
    table, classes = iso_code_table(4)
    assert len(classes) == 11 and len(table) == 64
    for code in (0, 5, 63, 17):
        g = next(h for h in all_labeled_graphs(4) if graph_code(h) == code)
        assert are_isomorphic(g, classes[table[code]])


def test_tree_keys():
    from modgraphs.tree import JOIN, UNION, Leaf, Node

    t = Node(JOIN, (Node(UNION, (Leaf(1), Leaf(2))), Leaf(3)))
    assert tree_key(t) == "join(union(1,2),3)"
    assert is_binary(t)
    assert not is_binary(Node(JOIN, (Leaf(1), Leaf(2), Leaf(3))))
    assert pattern_name(K2) == "K2"


def _class_mean(cls, n, stat):
    members = [g for g in all_labeled_graphs(n) if is_in_class(g, cls)]
    return float(np.mean([stat(g) for g in members]))


@pytest.mark.parametrize("spec", ["builtin:empty", "builtin:paths"])
def test_exhaustive_density_at_small_size(spec):
    n, samples = 5, 3000
    cfg = ExperimentConfig(spec, [n], samples, [K2, P4, LabeledGraph.path(3)], seed=4)
    rep = run_density(cfg)
    cls = CLASSES[spec]
    for h in cfg.patterns:
        row = rep.row(n, pattern_name(h))
        assert row.claim == CLAIM_DENSITY and row.samples == samples
        exact = _class_mean(cls, n, lambda g: occ_count(h, g)) / n**h.n
        assert abs(row.empirical - exact) < 4 * row.stderr + 1e-12


def test_absent_prime_density_is_zero():
    rep = run_density(ExperimentConfig("builtin:empty", [40], 20, [P4], seed=1))
    row = rep.row(40, pattern_name(P4))
    assert row.empirical == 0.0 and row.predicted == 0.0


def test_scaling_against_exact_expectation():
    n, samples = 5, 3000
    cls = CLASSES["builtin:p4"]
    rep = run_scaling(ExperimentConfig("builtin:p4", [n], samples, [P4], seed=2))
    row = rep.row(n, pattern_name(P4))
    kh = predict_KH(P4, solve_constants(cls), cls)
    assert row.claim == CLAIM_SCALING and row.predicted == pytest.approx(kh.K_H)
    exact = _class_mean(cls, n, lambda g: occ_count_labeled(P4, g)) / n ** float(kh.exponent)
    assert abs(row.empirical - exact) < 4 * row.stderr


def test_results_do_not_depend_on_jobs():
    base = dict(cls_spec="builtin:p4", sizes=[30], samples=12, patterns=[K2, P4], seed=7,
                subtree_size=3, subtree_injections=10, injections=50)
    one = run_density(ExperimentConfig(**base, jobs=1)).to_csv()
    two = run_density(ExperimentConfig(**base, jobs=2)).to_csv()
    assert one == two


def test_subtree_rows_form_a_distribution():
    rep = run_density(ExperimentConfig("builtin:p4", [50], 30, [], seed=3, subtree_size=3, subtree_injections=20))
    rows = [r for r in rep.rows if r.claim == CLAIM_SUBTREE]
    # 3 binary shapes x 4 decorations, plus the non-binary bucket
    assert len(rows) == 13
    assert sum(r.empirical for r in rows) == pytest.approx(1.0)
    assert sum(r.predicted for r in rows) == pytest.approx(1.0)


def test_csv_layout(tmp_path):
    rep = run_density(ExperimentConfig("builtin:empty", [20], 5, [K2], seed=1))
    path = tmp_path / "r.csv"
    rep.write(str(path))
    rows = list(csv.reader(io.StringIO(path.read_text())))
    assert rows[0] == ["claim", "size", "statistic", "samples", "empirical", "stderr", "predicted", "ratio", "flag"]
    assert rows[1][2] == "K2" and float(rows[1][6]) == 0.5


def test_config_contracts():
    with pytest.raises(ContractError):
        run_density(ExperimentConfig("builtin:empty", [20], 0, [K2]))
    with pytest.raises(ContractError):
        run_density(ExperimentConfig("builtin:empty", [0], 5, [K2]))
    with pytest.raises(ContractError):
        run_density(ExperimentConfig("builtin:empty", [20], 5, [LabeledGraph.empty(8)]))
    with pytest.raises(ContractError):
        run_density(ExperimentConfig("builtin:empty", [50], 5, [K2], order=40))


def test_budget_flags_partial_report():
    cfg = ExperimentConfig("builtin:empty", [200], 4, [P4, LabeledGraph.complete(4)], seed=1,
                           injection_budget=10)
    rep = run_density(cfg)
    assert rep.partial
    assert all(r.flag for r in rep.rows)
