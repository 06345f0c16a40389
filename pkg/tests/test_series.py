import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from modgraphs.classes import EMPTY, PathClass, p4_class
from modgraphs.graph import ContractError, LabeledGraph
from modgraphs.oracles import class_trees, marked_tree_count
from modgraphs.series import (
    ExactSeries,
    admissible_node_sets,
    class_counts,
    edge_profile,
    solve_tree_series,
    t_tau_series,
    t_tau_series_long,
    t_tau_total,
    tree_counts,
)
from modgraphs.tree import JOIN, UNION, Leaf, Node

ORDER = 8
fracs = st.fractions(min_value=-5, max_value=5, max_denominator=7)


def series(zero_constant=False):
    return st.lists(fracs, min_size=ORDER + 1, max_size=ORDER + 1).map(
        lambda c: ExactSeries.from_coeffs([0] + c[1:] if zero_constant else c, ORDER)
    )


@given(series(), series(), series())
def test_ring_laws(f, g, h):
    assert f * g == g * f
    assert (f * g) * h == f * (g * h)
    assert f * (g + h) == f * g + f * h
    assert f - f == ExactSeries.zero(ORDER)


@given(series(zero_constant=True))
def test_exp_log_inverse(f):
    e = f.exp()
    assert e.log() == f
    assert e * (-f).exp() == ExactSeries.constant(1, ORDER)
    assert e.derive() == (f.derive() * e).truncate(ORDER - 1)


@given(series())
def test_inverse(f):
    if f.a[0] == 0:
        with pytest.raises((ContractError, ZeroDivisionError)):
            f.inverse()
    else:
        assert f * f.inverse() == ExactSeries.constant(1, ORDER)


@given(series(), series(zero_constant=True))
def test_compose_matches_horner(f, g):
    # f(g) via Horner with truncated products
    out = ExactSeries.zero(ORDER)
    for c in reversed(f.coeffs):
        out = out * g + ExactSeries.constant(c, ORDER)
    assert f.compose(g) == out


def test_compose_needs_zero_constant():
    with pytest.raises(ContractError):
        ExactSeries.z(4).compose(ExactSeries.constant(1, 4))


def test_integrate_derive():
    f = ExactSeries.from_coeffs([1, 2, 3, 4, 5], 4)
    assert f.derive().integrate() == f - ExactSeries.constant(1, 4)
    assert f.derive()[0] == 2


@pytest.mark.parametrize(
    "cls, expected",
    [
        (EMPTY, [1, 2, 8, 52, 472, 5504, 78416]),
        (p4_class(), [1, 2, 8, 64, 832, 13904]),
        (PathClass(), [1, 2, 8, 64, 892, 16784]),
    ],
)
def test_counts_known_values(cls, expected):
    assert class_counts(cls, len(expected))[1:] == expected


@pytest.mark.parametrize("cls", [EMPTY, p4_class(), PathClass()])
def test_counts_match_tree_enumeration(cls):
    counts = class_counts(cls, 6)
    for n in range(1, 6):
        assert counts[n] == len(class_trees(cls, n))


@pytest.mark.parametrize("cls", [EMPTY, p4_class(), PathClass()])
def test_grammar_identities(cls):
    tc = tree_counts(cls, 12)
    for n in range(1, 13):
        assert tc["tau"][n] == tc["alpha"][n] + tc["sigma"][n]
        assert tc["alpha"][n] == (n == 1) + tc["pi"][n] + tc["sigma"][n]
    b = solve_tree_series(cls, 12)
    # T' = T^join exp(A), and the blossomed series is T'
    assert b.T.derive() == (b.T_join * (-b.exp_neg_A.log()).exp()).truncate(b.T.order - 1)
    assert b.T_blo == b.T.derive()
    if cls is EMPTY:
        assert b.T == b.T_not_join * 2 - ExactSeries.z(b.T.order)


def test_sigma_recurrence_by_hand():
    tc = tree_counts(EMPTY, 8)
    a, e = tc["alpha"], tc["E"]
    for n in range(2, 9):
        assert tc["sigma"][n] == sum(math.comb(n - 1, m - 1) * a[m] * e[n - m] for m in range(1, n))


TAUS = [
    Node(JOIN, (Leaf(1), Leaf(2))),
    Node(UNION, (Leaf(1), Leaf(2))),
    Node.build(JOIN, [Node(UNION, (Leaf(1), Leaf(2))), Leaf(3)]),
    Node.build(UNION, [Node(JOIN, (Leaf(1), Leaf(3))), Leaf(2)]),
]


@pytest.mark.parametrize("cls", [EMPTY, p4_class()])
@pytest.mark.parametrize("tau", TAUS)
def test_marked_tree_series_against_enumeration(cls, tau):
    b = solve_tree_series(cls, 6)
    total = t_tau_total(tau, cls, b)
    long_form = None
    for ns in admissible_node_sets(tau):
        assert t_tau_series(tau, ns, cls, b) == t_tau_series_long(tau, ns, cls, b)
        s = t_tau_series_long(tau, ns, cls, b)
        long_form = s if long_form is None else long_form + s
    brute = [marked_tree_count(cls, tau, n) for n in range(1, 7)]
    assert total.counts()[1:7] == brute
    assert long_form.counts()[1:7] == brute


def test_marked_tree_series_with_prime_node():
    cls = p4_class()
    tau = Node.build(LabeledGraph.path(4), [Leaf(1), Leaf(2), Leaf(3), Leaf(4)])
    b = solve_tree_series(cls, 7)
    total = t_tau_total(tau, cls, b)
    assert total.counts()[1:8] == [marked_tree_count(cls, tau, n) for n in range(1, 8)]


def test_edge_profile_sums():
    tau = TAUS[2]
    for ns in admissible_node_sets(tau):
        prof = edge_profile(tau, ns)
        prof.check()
        assert prof.edges == 4


def test_marked_series_needs_decoration_in_class():
    tau = Node.build(LabeledGraph.path(4), [Leaf(1), Leaf(2), Leaf(3), Leaf(4)])
    b = solve_tree_series(EMPTY, 6)
    assert all(x == 0 for x in t_tau_total(tau, EMPTY, b).counts())
