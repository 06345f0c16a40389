"""Truncated exponential generating series with exact coefficients.

A series is stored by its labeled numerators ``a[n] = n! * c_n``.  For
counting series these are integers and the usual EGF operations (labeled
product, set construction, derivative) stay in integer arithmetic; rational
numerators appear only through division or rational inputs.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction

from .classes import PathClass, PrimeClass
from .graph import ContractError, LabeledGraph
from .tree import Leaf, Tree, dec_graph, is_linear, iter_nodes


def _norm(x):
    if isinstance(x, Fraction) and x.denominator == 1:
        return int(x.numerator)
    return x


class _Binomials:
    """Rows of Pascal's triangle, grown on demand."""

    def __init__(self):
        self.rows: list[list[int]] = [[1]]

    def row(self, n: int) -> list[int]:
        while len(self.rows) <= n:
            prev = self.rows[-1]
            self.rows.append([1] + [prev[i] + prev[i + 1] for i in range(len(prev) - 1)] + [1])
        return self.rows[n]


BINOM = _Binomials()


class ExactSeries:
    """Series ``sum c_n z^n`` truncated at ``order``, held as ``a[n] = n! c_n``."""

    __slots__ = ("order", "a")

    def __init__(self, labeled: Iterable, order: int | None = None):
        a = [_norm(x) for x in labeled]
        if order is None:
            order = len(a) - 1
        if order < 0:
            raise ContractError("order must be nonnegative")
        a = a[: order + 1] + [0] * (order + 1 - len(a))
        self.order = order
        self.a = a

    # -- construction ---------------------------------------------------------

    @classmethod
    def from_coeffs(cls, coeffs: Sequence, order: int | None = None) -> ExactSeries:
        return cls([Fraction(c) * math.factorial(n) for n, c in enumerate(coeffs)], order)

    @classmethod
    def zero(cls, order: int) -> ExactSeries:
        return cls([], order)

    @classmethod
    def constant(cls, c, order: int) -> ExactSeries:
        return cls([c], order)

    @classmethod
    def z(cls, order: int) -> ExactSeries:
        return cls([0, 1], order)

    @classmethod
    def monomial(cls, k: int, order: int) -> ExactSeries:
        """``z**k`` (not ``z**k / k!``)."""
        return cls([0] * k + [math.factorial(k)], order) if k <= order else cls.zero(order)

    # -- access -----------------------------------------------------------------

    @property
    def coeffs(self) -> list[Fraction]:
        return [Fraction(x) / math.factorial(n) for n, x in enumerate(self.a)]

    def counts(self) -> list[int]:
        """``n! [z^n]`` as integers; fails if some are not integral."""
        out = []
        for n, x in enumerate(self.a):
            if isinstance(x, Fraction):
                raise ContractError(f"coefficient {n} is not a count: {x}")
            out.append(int(x))
        return out

    def __getitem__(self, n: int) -> Fraction:
        return Fraction(self.a[n]) / math.factorial(n)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExactSeries):
            return NotImplemented
        m = min(self.order, other.order)
        return all(self.a[i] == other.a[i] for i in range(m + 1))

    def __hash__(self):
        return hash(tuple(self.a))

    def __repr__(self) -> str:
        head = ", ".join(str(x) for x in self.a[:6])
        return f"ExactSeries(order={self.order}, labeled=[{head}{', ...' if self.order > 5 else ''}])"

    # -- arithmetic -------------------------------------------------------------

    def _common(self, other: ExactSeries) -> int:
        return min(self.order, other.order)

    def __add__(self, other):
        if not isinstance(other, ExactSeries):
            return ExactSeries([self.a[0] + other] + self.a[1:], self.order)
        n = self._common(other)
        return ExactSeries([self.a[i] + other.a[i] for i in range(n + 1)], n)

    __radd__ = __add__

    def __neg__(self):
        return ExactSeries([-x for x in self.a], self.order)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> ExactSeries:
        c = _norm(Fraction(c)) if not isinstance(c, int) else c
        return ExactSeries([c * x for x in self.a], self.order)

    def __mul__(self, other):
        if not isinstance(other, ExactSeries):
            return self.scale(other)
        n = self._common(other)
        a, b = self.a, other.a
        out = []
        for m in range(n + 1):
            row = BINOM.row(m)
            out.append(sum(row[k] * a[k] * b[m - k] for k in range(m + 1) if a[k] and b[m - k]))
        return ExactSeries(out, n)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> ExactSeries:
        if k < 0:
            return self.inverse() ** (-k)
        out = ExactSeries.constant(1, self.order)
        base = self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def shift(self, k: int) -> ExactSeries:
        """Multiply by ``z**k`` keeping the order."""
        if k == 0:
            return self
        # (z^k f)_n labeled = n!/(n-k)! * f_{n-k} labeled
        out = [0] * min(k, self.order + 1)
        for n in range(k, self.order + 1):
            out.append(math.perm(n, k) * self.a[n - k])
        return ExactSeries(out, self.order)

    def times_z_power(self, k: int, order: int) -> ExactSeries:
        """Multiply by ``z**k`` raising the order to ``order``."""
        out = [0] * (order + 1)
        for n in range(k, min(order, self.order + k) + 1):
            out[n] = math.perm(n, k) * self.a[n - k]
        return ExactSeries(out, order)

    def derive(self) -> ExactSeries:
        """Derivative; the order drops by one."""
        if self.order == 0:
            return ExactSeries.zero(0)
        return ExactSeries(self.a[1:], self.order - 1)

    def integrate(self) -> ExactSeries:
        return ExactSeries([0] + self.a, self.order + 1)

    def truncate(self, order: int) -> ExactSeries:
        return ExactSeries(self.a, min(order, self.order))

    def exp(self) -> ExactSeries:
        """``exp`` of a series with zero constant term."""
        if self.a[0] != 0:
            raise ContractError("exp needs a zero constant term")
        b = self.a
        e = [1]
        for n in range(1, self.order + 1):
            row = BINOM.row(n - 1)
            e.append(sum(row[k - 1] * b[k] * e[n - k] for k in range(1, n + 1) if b[k]))
        return ExactSeries(e, self.order)

    def inverse(self) -> ExactSeries:
        """``1 / f`` for ``f(0) != 0``."""
        a0 = self.a[0]
        if a0 == 0:
            raise ContractError("series with zero constant term has no inverse")
        inv0 = Fraction(1) / Fraction(a0)
        out = [_norm(inv0)]
        for n in range(1, self.order + 1):
            row = BINOM.row(n)
            s = sum(row[k] * self.a[k] * out[n - k] for k in range(1, n + 1) if self.a[k])
            out.append(_norm(-s * inv0))
        return ExactSeries(out, self.order)

    def log(self) -> ExactSeries:
        """``log f`` for ``f(0) = 1``."""
        if self.a[0] != 1:
            raise ContractError("log needs constant term 1")
        if self.order == 0:
            return ExactSeries.zero(0)
        q = self.derive() * self.truncate(self.order - 1).inverse()
        return q.integrate()

    def compose(self, inner: ExactSeries) -> ExactSeries:
        """``self(inner)``; ``inner`` must have zero constant term."""
        if inner.a[0] != 0:
            raise ContractError("compose needs inner(0) = 0")
        n = self._common(inner)
        total = [0] * (n + 1)
        # powers[n] holds inner**j / j! (labeled), built one factor at a time
        power = [1] + [0] * n
        for j in range(n + 1):
            fj = self.a[j]
            if fj:
                for m in range(n + 1):
                    if power[m]:
                        total[m] += fj * power[m]
            if j == n:
                break
            power = _set_step(power, inner.a, j + 1, n)
        return ExactSeries(total, n)


def _set_step(prev: Sequence, b: Sequence, j: int, n: int) -> list:
    """``prev * b / j`` for ``prev = B**(j-1)/(j-1)!``: the next power ``B**j / j!``.

    Uses the component containing the smallest label, which keeps the
    arithmetic division-free: ``u_j[m] = sum C(m-1, i-1) b[i] u_{j-1}[m-i]``.
    """
    out = [0] * (n + 1)
    for m in range(j, n + 1):
        row = BINOM.row(m - 1)
        out[m] = sum(row[i - 1] * b[i] * prev[m - i] for i in range(1, m - j + 2) if b[i] and prev[m - i])
    return out


# -- the tree system -------------------------------------------------------------


@dataclass
class SeriesBundle:
    """Generating series of trees of the class, all truncated at ``order``."""

    order: int
    T: ExactSeries
    T_not_join: ExactSeries
    T_join: ExactSeries
    T_not_join_join: ExactSeries
    T_not_join_union: ExactSeries
    T_blo: ExactSeries
    T_not_join_blo: ExactSeries
    exp_neg_A: ExactSeries
    prime_class: PrimeClass | None = None


def tree_counts(cls: PrimeClass, order: int) -> dict[str, list[int]]:
    """Labeled counts of the tree grammar up to ``order``.

    ``alpha``: trees whose root is not a join (leaf, prime or union root);
    ``sigma``: join-rooted trees (equal to union-rooted ones by symmetry);
    ``tau = alpha + sigma``: all trees; ``pi``: prime-rooted trees.
    A join-rooted tree splits as the not-join subtree holding the smallest
    label and a nonempty set of the others, so
    ``sigma_n = sum C(n-1, m-1) alpha_m E_{n-m}`` with ``E = exp(T_not_join)``.
    """
    alpha = [0]
    sigma = [0]
    tau = [0]
    pi = [0]
    E = [1]  # exp(alpha): E_n = tau_n for n >= 1
    paths = isinstance(cls, PathClass)
    # paths: sequences of >= j trees, W_j = T W_{j-1}, W_0 = 1 + T W_0
    W = [[1], [0], [0], [0], [0]] if paths else None
    powers: dict[int, list] = {0: [1]}
    if not paths:
        sizes = [k for k in cls.sizes(order) if k >= 2]
        for j in range(1, (max(sizes) if sizes else 0) + 1):
            powers[j] = [0]
    for n in range(1, order + 1):
        if paths:
            row = BINOM.row(n)
            w4 = sum(row[m] * tau[m] * W[3][n - m] for m in range(1, n - 2))
            p = w4 // 2
        else:
            p = 0
            for j in range(1, len(powers)):
                powers[j].append(None)
            if sizes:
                # the new column of T^j/j! at n only uses tau_m with m <= n-j+1
                rowm = BINOM.row(n - 1)
                for j in range(len(powers) - 1, 1, -1):
                    prev = powers[j - 1]
                    powers[j][n] = sum(rowm[m - 1] * tau[m] * prev[n - m] for m in range(1, n - j + 2))
                p = sum(cls.count(k) * powers[k][n] for k in sizes if k <= n)
        rowm = BINOM.row(n - 1)
        s = sum(rowm[m - 1] * alpha[m] * E[n - m] for m in range(1, n))
        a = (1 if n == 1 else 0) + p + s
        alpha.append(a)
        sigma.append(s)
        pi.append(p)
        tau.append(a + s)
        E.append(a + s)
        if paths:
            W[4].append(w4)
            row = BINOM.row(n)
            for j in (3, 2, 1):
                W[j].append(sum(row[m] * tau[m] * W[j - 1][n - m] for m in range(1, n - j + 2)))
            W[0].append(sum(row[m] * tau[m] * W[0][n - m] for m in range(1, n + 1)))
        elif sizes:
            powers[1][n] = tau[n]
    out = {"alpha": alpha, "sigma": sigma, "tau": tau, "pi": pi, "E": E}
    if paths:
        out.update({f"W{j}": W[j] for j in range(5)})
    else:
        out.update({f"U{j}": powers[j] for j in powers if j >= 1})
    return out


def solve_tree_series(cls: PrimeClass, order: int) -> SeriesBundle:
    """Solve ``A = z + P(e^A - 1) + e^A - 1 - A`` and derive the blossomed series.

    ``A`` is ``T_not_join``; ``T = e^A - 1``; ``T_blo = T'``;
    ``T_join = T' e^-A``; ``T_not_join_union = T_join e^-A``;
    ``T_not_join_join = (T_join - 1) e^-A``.
    """
    if order < 1:
        raise ContractError("order must be at least 1")
    counts = tree_counts(cls, order + 1)
    A = ExactSeries(counts["alpha"])
    T = ExactSeries(counts["tau"])
    exp_neg = (-A).exp()
    dT = T.derive()
    e = exp_neg.truncate(order)
    t_join = dT * e
    return SeriesBundle(
        order=order,
        T=T.truncate(order),
        T_not_join=A.truncate(order),
        T_join=t_join,
        T_not_join_join=(t_join - 1) * e,
        T_not_join_union=t_join * e,
        T_blo=dT,
        T_not_join_blo=A.derive(),
        exp_neg_A=e,
        prime_class=cls,
    )


def class_counts(cls: PrimeClass, order: int) -> list[int]:
    """Number of labeled graphs of each size ``0..order`` in the class."""
    return tree_counts(cls, order)["tau"]


# -- trees with a prescribed induced subtree ---------------------------------------------


def occ_series(cls: PrimeClass, pattern: LabeledGraph, order: int) -> ExactSeries:
    return ExactSeries.from_coeffs(cls.occ_series_coefficients(pattern, order), order)


@dataclass(frozen=True)
class EdgeProfile:
    """Edge statistics of ``tau`` relative to a node subset ``N``.

    ``bar`` denotes internal nodes outside ``N``.  Edges are parent to child.
    """

    d_eq: int
    d_neq: int
    d_bar_to_n: int
    d_n_to_bar: int
    d_n_to_n: int
    d_bar_to_leaf: int
    d_n_to_leaf: int
    n_bar: int
    edges: int

    def check(self) -> None:
        total = self.d_eq + self.d_neq + self.d_bar_to_n + self.d_n_to_bar + self.d_n_to_n
        total += self.d_bar_to_leaf + self.d_n_to_leaf
        if total != self.edges:
            raise AssertionError("edge profile does not add up")


def internal_paths(tau: Tree) -> list[tuple[int, ...]]:
    return [p for p, _ in iter_nodes(tau)]


def edge_profile(tau: Tree, nset: Iterable[tuple[int, ...]]) -> EdgeProfile:
    nset = set(nset)
    counts = dict.fromkeys(["eq", "neq", "bn", "nb", "nn", "bl", "nl"], 0)
    n_bar = 0
    edges = 0
    for path, node in iter_nodes(tau):
        inside = path in nset
        if not inside:
            n_bar += 1
        for i, c in enumerate(node.children):
            edges += 1
            if isinstance(c, Leaf):
                counts["nl" if inside else "bl"] += 1
                continue
            c_inside = path + (i,) in nset
            if inside:
                counts["nn" if c_inside else "nb"] += 1
            elif c_inside:
                counts["bn"] += 1
            else:
                counts["eq" if c.dec == node.dec else "neq"] += 1
    prof = EdgeProfile(
        counts["eq"], counts["neq"], counts["bn"], counts["nb"], counts["nn"], counts["bl"], counts["nl"], n_bar, edges
    )
    prof.check()
    return prof


def admissible_node_sets(tau: Tree) -> list[frozenset]:
    """Sets of internal nodes (as paths) containing every non-linear node."""
    nodes = list(iter_nodes(tau))
    forced = [p for p, nd in nodes if not is_linear(nd.dec)]
    free = [p for p, nd in nodes if is_linear(nd.dec)]
    out = []
    for r in range(len(free) + 1):
        for extra in itertools.combinations(free, r):
            out.append(frozenset(forced) | frozenset(extra))
    return out


def _check_tau(tau: Tree, nset) -> None:
    if isinstance(tau, Leaf):
        raise ContractError("tau must have at least 2 leaves")
    if sorted(tau.leaves()) != list(range(1, tau.size + 1)):
        raise ContractError("tau must be reduced")
    paths = {p: nd for p, nd in iter_nodes(tau)}
    for p in nset:
        if p not in paths:
            raise ContractError(f"{p} is not an internal node of tau")
    for p, nd in paths.items():
        if not is_linear(nd.dec) and p not in nset:
            raise ContractError("node set must contain every non-linear node")


def _occ_product(tau: Tree, nset, cls: PrimeClass, T: ExactSeries, order: int) -> ExactSeries:
    out = ExactSeries.constant(1, order)
    for p, nd in iter_nodes(tau):
        if p in nset:
            g = dec_graph(nd.dec, len(nd.children))
            out = out * occ_series(cls, g, order).compose(T.truncate(order))
    return out


def t_tau_series(tau: Tree, nset, cls: PrimeClass, bundle: SeriesBundle) -> ExactSeries:
    """Marked trees ``(t, I)`` with ``t_I = tau`` whose nodes over ``nset`` are prime.

    ``z^|tau| T_root (T_join)^e exp(c T_not_join) prod Occ_dec(T)`` where ``c``
    collects the edge statistics and ``T_root`` is ``T_join`` or ``T'``.
    """
    nset = frozenset(nset)
    _check_tau(tau, nset)
    N = bundle.order
    ell = tau.size
    if ell > N:
        return ExactSeries.zero(N)
    prof = edge_profile(tau, nset)
    inner = N - ell
    b = bundle
    root = b.T_blo if () in nset else b.T_join
    c = prof.d_n_to_leaf + prof.d_n_to_n + prof.n_bar - prof.d_eq - prof.d_neq
    out = root.truncate(inner) * b.T_join.truncate(inner) ** prof.edges
    out = out * b.T_not_join.truncate(inner).scale(c).exp()
    out = out * _occ_product(tau, nset, cls, b.T, inner)
    return ExactSeries(out.a, inner).times_z_power(ell, N)


def t_tau_series_long(tau: Tree, nset, cls: PrimeClass, bundle: SeriesBundle) -> ExactSeries:
    """The same series from the unsimplified product of blossomed series."""
    nset = frozenset(nset)
    _check_tau(tau, nset)
    N = bundle.order
    ell = tau.size
    if ell > N:
        return ExactSeries.zero(N)
    prof = edge_profile(tau, nset)
    inner = N - ell
    b = bundle
    A = b.T_not_join.truncate(inner)

    def tr(s: ExactSeries) -> ExactSeries:
        return s.truncate(inner)

    out = tr(b.T_blo if () in nset else b.T_join)
    out = out * tr(b.T_not_join_join) ** prof.d_eq * tr(b.T_not_join_union) ** prof.d_neq
    out = out * tr(b.T_not_join_blo) ** (prof.d_bar_to_n + prof.d_bar_to_leaf)
    out = out * A.scale(prof.n_bar).exp()
    out = out * tr(b.T_join) ** prof.d_n_to_bar * tr(b.T_blo) ** (prof.d_n_to_n + prof.d_n_to_leaf)
    out = out * _occ_product(tau, nset, cls, b.T, inner)
    return ExactSeries(out.a, inner).times_z_power(ell, N)


def t_tau_total(tau: Tree, cls: PrimeClass, bundle: SeriesBundle) -> ExactSeries:
    """Sum of :func:`t_tau_series` over every admissible node set."""
    total = ExactSeries.zero(bundle.order)
    for nset in admissible_node_sets(tau):
        total = total + t_tau_series(tau, nset, cls, bundle)
    return total

