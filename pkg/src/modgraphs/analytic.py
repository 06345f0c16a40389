"""Singularity constants of a class and the limit predictions built from them."""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Context, Decimal
from fractions import Fraction

from .classes import PrimeClass, check_condition_c, lambda_eval, occ_series_eval
from .graph import ContractError, LabeledGraph, automorphism_count, are_isomorphic
from .tree import (
    JOIN,
    UNION,
    Leaf,
    Node,
    Tree,
    beta,
    binary_trees,
    dec_graph,
    double_factorial,
    graph_of,
    is_linear,
    iter_nodes,
    modular_decomposition,
)

K2 = LabeledGraph.complete(2)
E2 = LabeledGraph.empty(2)


class ConditionError(ValueError):
    """The class does not satisfy the growth condition needed for the constants."""


@dataclass(frozen=True)
class ClassConstants:
    kappa: float
    R: float
    K: float
    mu: float
    C: float
    p: float
    lambda2: float
    q: float = float("nan")

    def as_dict(self) -> dict[str, float]:
        return {"kappa": self.kappa, "R": self.R, "K": self.K, "mu": self.mu, "C": self.C, "p": self.p}


@dataclass(frozen=True)
class AsymptoticPrediction:
    K_H: float
    exponent: Fraction


def solve_constants(cls: PrimeClass, tol: float = 1e-12) -> ClassConstants:
    """``kappa`` with ``Lambda'(kappa) = 1``, then ``R, K, mu, C`` and the edge parameter ``p``."""
    ok, diag = check_condition_c(cls)
    if not ok:
        raise ConditionError(diag.get("failed", "condition not met"))
    lo, hi = diag["bracket"]
    ev_tol = min(tol, 1e-13) * 1e-2

    def f(w):
        return lambda_eval(cls, w, 1, ev_tol) - 1.0

    flo, fhi = f(lo), f(hi)
    if not (flo < 0 < fhi):
        raise ArithmeticError(f"no sign change on [{lo}, {hi}]: {flo}, {fhi}")
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    kappa = 0.5 * (lo + hi)
    for _ in range(3):
        step = f(kappa) / lambda_eval(cls, kappa, 2, ev_tol)
        if abs(step) > hi - lo + 1e-12:
            break
        kappa -= step
    if not (f(kappa - 1e-9) < 0 < f(kappa + 1e-9)):
        raise ArithmeticError("root of Lambda' - 1 is not isolated")
    K = math.expm1(kappa)
    lam = lambda_eval(cls, kappa, 0, ev_tol)
    lam2 = lambda_eval(cls, kappa, 2, ev_tol)
    R = kappa - lam
    mu = math.sqrt(2 * R * lam2)
    C = (1 + K) * R / (mu * math.sqrt(math.pi))
    occ_join = occ_series_eval(cls, K2, K, ev_tol)
    occ_union = occ_series_eval(cls, E2, K, ev_tol)
    p = (1 + (1 + K) ** 2 * occ_join) / lam2
    q = (1 + (1 + K) ** 2 * occ_union) / lam2
    return ClassConstants(kappa=kappa, R=R, K=K, mu=mu, C=C, p=p, lambda2=lam2, q=q)


def identity_residuals(cls: PrimeClass, c: ClassConstants) -> dict[str, float]:
    """Residuals of the identities the constants must satisfy."""
    return {
        "lambda1": abs(lambda_eval(cls, c.kappa, 1) - 1),
        "K": abs((1 + c.K) * (cls.p_eval(c.K, 1) + 1) - 2),
        "p+q": abs(c.p + c.q - 1),
    }


def log_predict_count(n: int, c: ClassConstants) -> float:
    if n < 1:
        raise ContractError("n must be positive")
    return math.log(c.C) + math.lgamma(n + 1) - n * math.log(c.R) - 1.5 * math.log(n)


def predict_count(n: int, c: ClassConstants) -> float | Decimal:
    """``C n! / (R^n n^{3/2})``; a ``Decimal`` once the value leaves the float range."""
    log_value = log_predict_count(n, c)
    if log_value < 700:
        return math.exp(log_value)
    return Decimal(log_value).exp(Context(prec=17))


def count_ratio(exact: int, n: int, c: ClassConstants) -> float:
    """``exact / predict_count(n)`` computed in log space."""
    if exact <= 0:
        return 0.0
    return math.exp(math.log(exact) - log_predict_count(n, c))


def _is_binary_linear(tau: Tree) -> bool:
    return all(len(nd.children) == 2 and is_linear(nd.dec) for _, nd in iter_nodes(tau))


def predict_subtree_prob(tau: Tree, p: float) -> float:
    """Limit probability that a uniform induced subtree on ``|tau|`` leaves equals ``tau``.

    ``(l-1)! / (2(l-1))! * 2^(l-1) * p^(#join) (1-p)^(#union)`` for binary ``tau``, else 0.
    """
    if isinstance(p, ClassConstants):
        p = p.p
    ell = tau.size
    if ell == 1:
        return 1.0
    if not _is_binary_linear(tau):
        return 0.0
    joins = sum(1 for _, nd in iter_nodes(tau) if nd.dec == JOIN)
    unions = ell - 1 - joins
    return math.factorial(ell - 1) / math.factorial(2 * (ell - 1)) * 2 ** (ell - 1) * p**joins * (1 - p) ** unions


def decorated_binary_trees(ell: int):
    """Every binary tree on leaves ``1..ell`` with every decoration pattern."""
    for shape in binary_trees(list(range(1, ell + 1)), JOIN):
        nodes = [path for path, _ in iter_nodes(shape)]
        for mask in range(1 << len(nodes)):
            chosen = {path for i, path in enumerate(nodes) if (mask >> i) & 1}
            yield _redecorate(shape, (), chosen)


def _redecorate(t: Tree, path, joins) -> Tree:
    if isinstance(t, Leaf):
        return t
    ch = tuple(_redecorate(c, path + (i,), joins) for i, c in enumerate(t.children))
    return Node(JOIN if path in joins else UNION, ch)


MAX_SAMPLE_PATTERN = 8


def labeled_graph_prob(h: LabeledGraph, p: float) -> float:
    """Probability that the graph of a uniform binary tree with i.i.d. decorations is exactly ``h``.

    Such a tree has graph ``h`` exactly when it is an expanded tree of ``h``
    whose decorations are the ones of the linear nodes it refines; ``h`` must
    therefore be a cograph.
    """
    ell = h.n
    if ell == 1:
        return 1.0
    t = modular_decomposition(h)
    weight = 1.0
    for _, nd in iter_nodes(t):
        if not is_linear(nd.dec):
            return 0.0
        d = len(nd.children)
        weight *= double_factorial(2 * d - 3) * (p if nd.dec == JOIN else 1 - p) ** (d - 1)
    return weight / double_factorial(2 * ell - 3)


def predict_sample_prob(h: LabeledGraph, p: float) -> float:
    """Probability that ``ell = |h|`` points sampled from the limit graphon induce a copy of ``h``."""
    if h.n > MAX_SAMPLE_PATTERN:
        raise ContractError(f"pattern too large: {h.n} > {MAX_SAMPLE_PATTERN}")
    return math.factorial(h.n) / automorphism_count(h) * labeled_graph_prob(h, p)


def predict_sample_prob_enumerated(h: LabeledGraph, p: float) -> float:
    """Same as :func:`predict_sample_prob` by summing over every decorated binary tree."""
    ell = h.n
    if ell == 1:
        return 1.0
    total = 0.0
    for b in decorated_binary_trees(ell):
        if are_isomorphic(graph_of(b), h):
            joins = sum(1 for _, nd in iter_nodes(b) if nd.dec == JOIN)
            total += p**joins * (1 - p) ** (ell - 1 - joins)
    return total / double_factorial(2 * ell - 3)


def gamma_half(twice: int) -> float:
    """``Gamma(twice / 2)`` for a positive integer ``twice``, by the recurrence."""
    if twice <= 0:
        raise ContractError("argument must be positive")
    if twice % 2 == 0:
        return float(math.factorial(twice // 2 - 1))
    g = math.sqrt(math.pi)
    x = 0.5
    while 2 * x < twice:
        g *= x
        x += 1
    return g


def predict_KH(h: LabeledGraph, c: ClassConstants, cls: PrimeClass, printed: bool = False) -> AsymptoticPrediction:
    """Constant ``K_H`` in ``E[Occ_H] ~ K_H n^(|H| - beta(H))`` (labeled occurrences).

    A prime node with ``d`` children contributes
    ``Occ_dec(K) (1+K)^d R^((d-2)/2) / Lambda''^(d/2)``.  ``printed=True`` gives the
    variant ``Occ_dec(K) R^(d-2) / Lambda''^(d/2)`` instead, kept for comparison;
    it disagrees with the exact finite-n expectations.
    """
    t = modular_decomposition(h)
    b = beta(h)
    exponent = h.n - b
    if h.n == 1:
        return AsymptoticPrediction(1.0, exponent)
    lin = 1
    prime_factor = 1.0
    d_join = n_join = d_union = n_union = 0
    for _, nd in iter_nodes(t):
        d = len(nd.children)
        if nd.dec == JOIN:
            lin *= double_factorial(2 * d - 3)
            d_join += d
            n_join += 1
        elif nd.dec == UNION:
            lin *= double_factorial(2 * d - 3)
            d_union += d
            n_union += 1
        else:
            occ = occ_series_eval(cls, nd.dec, c.K)
            if printed:
                prime_factor *= occ * c.R ** (d - 2) / c.lambda2 ** (d / 2)
            else:
                prime_factor *= occ * (1 + c.K) ** d * c.R ** ((d - 2) / 2) / c.lambda2 ** (d / 2)
    twice_arg = 2 * h.n - 1 - int(2 * b)
    head = math.sqrt(math.pi) * lin / (2 ** float(h.n - 1 - b) * gamma_half(twice_arg))
    k_h = head * prime_factor * c.p ** (d_join - n_join) * (1 - c.p) ** (d_union - n_union)
    return AsymptoticPrediction(k_h, exponent)


def tree_constant(tau: Tree, c: ClassConstants, cls: PrimeClass) -> float:
    """``B_tau``: leading constant of the marked-tree series with induced subtree ``tau``."""
    e = sum(len(nd.children) for _, nd in iter_nodes(tau))
    out = c.R**tau.size / c.mu**e
    for _, nd in iter_nodes(tau):
        d = len(nd.children)
        occ = occ_series_eval(cls, dec_graph(nd.dec, d), c.K)
        out *= occ * (1 + c.K) ** d + (1 if is_linear(nd.dec) else 0)
    return out


def tree_constant_for_set(tau: Tree, nset, c: ClassConstants, cls: PrimeClass) -> float:
    """``C_{tau,N}`` for one admissible node set."""
    nset = set(nset)
    e = f = 0
    out = c.R**tau.size
    for path, nd in iter_nodes(tau):
        d = len(nd.children)
        e += d
        if path in nset:
            f += d
            out *= occ_series_eval(cls, dec_graph(nd.dec, d), c.K)
    return out * (1 + c.K) ** f / c.mu**e
