import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from modgraphs.analytic import (
    ConditionError,
    count_ratio,
    decorated_binary_trees,
    gamma_half,
    identity_residuals,
    labeled_graph_prob,
    predict_KH,
    predict_sample_prob,
    predict_sample_prob_enumerated,
    predict_subtree_prob,
    solve_constants,
)
from modgraphs.classes import EMPTY, CustomClass, PathClass, p4_class
from modgraphs.graph import ContractError, LabeledGraph, all_labeled_graphs, iso_classes
from modgraphs.series import class_counts, solve_tree_series, t_tau_total
from modgraphs.tree import expanded_trees

CLASSES = [EMPTY, p4_class(), PathClass()]


@pytest.fixture(scope="module")
def constants():
    return {cls.name: solve_constants(cls) for cls in CLASSES}


def test_empty_class_closed_forms(constants):
    # cographs: Lambda(w) = exp(w) - 1 - w, so kappa = log 2, K = 1, p = 1/2
    c = constants["empty"]
    assert c.kappa == pytest.approx(math.log(2), abs=1e-12)
    assert c.K == pytest.approx(1.0, abs=1e-12)
    assert c.R == pytest.approx(2 * math.log(2) - 1, abs=1e-12)
    assert c.p == pytest.approx(0.5, abs=1e-12)
    assert c.mu == pytest.approx(math.sqrt(2 * c.R * 2), rel=1e-12)


@pytest.mark.parametrize("cls", CLASSES, ids=lambda c: c.name)
def test_identities(cls, constants):
    c = constants[cls.name]
    res = identity_residuals(cls, c)
    assert max(res.values()) < 1e-9
    assert 0 < c.p < 1 and c.R > 0 and c.mu > 0 and c.C > 0


def test_paths_constants_are_stable(constants):
    c = constants["paths"]
    assert c.p == pytest.approx(0.410077807, abs=1e-8)


def test_condition_failure_raises():
    # radius of convergence too small for Lambda' to reach 1
    cls = CustomClass(lambda n: math.factorial(n) if n >= 4 else 0, lambda h, n: 0, 0.05)
    with pytest.raises(ConditionError):
        solve_constants(cls)


@pytest.mark.parametrize("cls", [EMPTY, p4_class()], ids=lambda c: c.name)
def test_count_ratio_tends_to_one(cls, constants):
    c = constants[cls.name]
    counts = class_counts(cls, 120)
    gaps = [abs(count_ratio(counts[n], n, c) - 1) for n in (15, 30, 60, 120)]
    assert gaps == sorted(gaps, reverse=True)
    assert gaps[-1] < 0.01


@pytest.mark.parametrize("ell", [2, 3, 4])
@pytest.mark.parametrize("p", [0.5, 0.288, 0.41])
def test_sample_prob_closed_form_matches_enumeration(ell, p):
    for h in iso_classes(ell):
        assert predict_sample_prob(h, p) == pytest.approx(predict_sample_prob_enumerated(h, p), abs=1e-14)


@given(p=st.floats(0.01, 0.99))
def test_sample_probs_sum_to_one(p):
    for ell in (2, 3, 4, 5):
        assert sum(predict_sample_prob(h, p) for h in iso_classes(ell)) == pytest.approx(1.0, abs=1e-12)


@given(p=st.floats(0.01, 0.99))
def test_labeled_probs_sum_to_one(p):
    assert sum(labeled_graph_prob(g, p) for g in all_labeled_graphs(4)) == pytest.approx(1.0, abs=1e-12)


def test_sample_prob_edge_and_triangle():
    assert predict_sample_prob(LabeledGraph.complete(2), 0.3) == pytest.approx(0.3)
    assert predict_sample_prob(LabeledGraph.complete(3), 0.3) == pytest.approx(0.09)
    assert predict_sample_prob(LabeledGraph.path(4), 0.3) == 0.0
    with pytest.raises(ContractError):
        predict_sample_prob(LabeledGraph.empty(9), 0.5)


@given(p=st.floats(0.01, 0.99), ell=st.integers(2, 5))
def test_subtree_probs_sum_to_one(p, ell):
    assert sum(predict_subtree_prob(t, p) for t in decorated_binary_trees(ell)) == pytest.approx(1.0, abs=1e-12)


def test_gamma_half():
    for twice in range(1, 30):
        assert gamma_half(twice) == pytest.approx(math.gamma(twice / 2), rel=1e-13)
    with pytest.raises(ContractError):
        gamma_half(0)


@pytest.mark.parametrize("cls", CLASSES, ids=lambda c: c.name)
def test_edge_constant_is_p(cls, constants):
    c = constants[cls.name]
    kh = predict_KH(LabeledGraph.complete(2), c, cls)
    assert kh.K_H == pytest.approx(c.p, rel=1e-12)
    assert kh.exponent == 2


def test_absent_prime_has_zero_constant(constants):
    kh = predict_KH(LabeledGraph.path(4), constants["empty"], EMPTY)
    assert kh.K_H == 0.0


def test_cograph_constant_matches_graphon(constants):
    # for a cograph the constant is the labeled sampling probability of the limit
    c = constants["p4"]
    h = LabeledGraph.path(3)
    assert predict_KH(h, c, p4_class()).K_H == pytest.approx(labeled_graph_prob(h, c.p), rel=1e-12)


def _exact_expectation(cls, h, order):
    bundle = solve_tree_series(cls, order)
    _, gen = expanded_trees(h)
    total = None
    for tau in gen:
        s = t_tau_total(tau, cls, bundle)
        total = s if total is None else total + s
    return total.counts(), class_counts(cls, order)


@pytest.mark.parametrize("cls", [p4_class(), PathClass()], ids=lambda c: c.name)
def test_prime_constant_against_exact_expectations(cls, constants):
    c = constants[cls.name]
    h = LabeledGraph.path(4)
    kh = predict_KH(h, c, cls)
    occ, counts = _exact_expectation(cls, h, 120)
    ratios = [occ[n] / counts[n] / n**3 / kh.K_H for n in (30, 60, 120)]
    gaps = [r - 1 for r in ratios]
    assert all(g > 0 for g in gaps)
    assert gaps == sorted(gaps, reverse=True)
    assert ratios[-1] < 1.3
    # the variant without the (1+K)^d factor is off by more than an order of magnitude
    assert predict_KH(h, c, cls, printed=True).K_H < kh.K_H / 10
