"""Sets of prime graphs closed under relabeling, and their generating functions.

A class is described by its labeled counts ``|P_n|`` and by the occurrence
totals ``sum over H in P_n of Occ_G(H)`` for small patterns ``G``.  Occurrences
here are labeled: an injection ``I`` counts when ``H_I`` equals ``G`` exactly.
"""

from __future__ import annotations

import itertools
import json
import math
from collections.abc import Callable, Iterable
from fractions import Fraction
from functools import lru_cache

from .graph import (
    ContractError,
    LabeledGraph,
    automorphism_count,
    canonical_form,
    format_graph,
    is_prime,
    labeling_count,
    occ_count_labeled,
    parse_graph,
)


class DivergenceError(ArithmeticError):
    """Evaluation point outside the disc of convergence."""


class TruncationError(ArithmeticError):
    """A truncated series could not reach the requested tolerance."""


MAX_TERMS = 100_000
TAIL_SAFETY = 10.0


def _falling(n: int, j: int) -> int:
    return math.prod(range(n - j + 1, n + 1))


def sum_series(term: Callable[[int], float], start: int, tol: float, max_terms: int = MAX_TERMS) -> float:
    """Sum ``term(n)`` for ``n >= start`` with a ratio-test tail estimate.

    The remaining tail after the last term ``a`` with observed ratio ``q < 1``
    is taken as ``a * q / (1 - q)``, inflated by a safety factor of 10.
    """
    total = 0.0
    prev = None
    for n in range(start, start + max_terms):
        a = term(n)
        total += a
        if prev and a > 0:
            q = a / prev
            if q < 1 and TAIL_SAFETY * a * q / (1 - q) < tol:
                return total
        elif prev is not None and a == 0 and prev == 0 and n > start + 64:
            return total
        prev = a
    raise TruncationError(f"series did not reach tolerance {tol} within {max_terms} terms")


class PrimeClass:
    """Interface of a prime class; see the concrete subclasses."""

    name = "class"
    r0 = math.inf

    def count(self, n: int) -> int:
        raise NotImplementedError

    def contains(self, g: LabeledGraph) -> bool:
        raise NotImplementedError

    def occ_coefficient(self, pattern: LabeledGraph, n: int) -> int:
        """``sum over H in P_n of Occ_pattern(H)`` (labeled occurrences)."""
        raise NotImplementedError

    def sizes(self, limit: int) -> list[int]:
        return [k for k in range(1, limit + 1) if self.count(k)]

    def representatives(self, k: int) -> list[tuple[LabeledGraph, int]]:
        """Isomorphism representatives of ``P_k`` with their labeling counts."""
        raise NotImplementedError

    @property
    def max_size(self) -> int | None:
        return None

    # -- the series P and its derivatives -----------------------------------

    def egf_coefficients(self, order: int) -> list[Fraction]:
        return [Fraction(self.count(n), math.factorial(n)) for n in range(order + 1)]

    def p_eval(self, z: float, derivative: int = 0, tol: float = 1e-15) -> float:
        if z < 0:
            raise ContractError("evaluation point must be nonnegative")
        if z >= self.r0:
            raise DivergenceError(f"P diverges at {z} >= r0 = {self.r0}")
        j = derivative
        return sum_series(lambda n: self.count(n) / math.factorial(n - j) * z ** (n - j), max(j, 1), tol)

    def occ_series_coefficients(self, pattern: LabeledGraph, order: int) -> list[Fraction]:
        """Coefficients of ``Occ_{pattern,P}(z)`` up to ``z**order``."""
        k = pattern.n
        return [Fraction(self.occ_coefficient(pattern, k + j), math.factorial(k + j)) for j in range(order + 1)]

    def to_obj(self):
        raise ContractError(f"{self.name} has no file form")

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name}>"


class FiniteClass(PrimeClass):
    """Finitely many prime graphs, one stored representative per isomorphism class."""

    def __init__(self, graphs: Iterable[LabeledGraph] = (), name: str | None = None):
        reps: dict[tuple[int, int], LabeledGraph] = {}
        for g in graphs:
            if not is_prime(g):
                raise ContractError(f"{g!r} is not prime")
            reps.setdefault(canonical_form(g), g)
        self._reps = sorted(reps.values(), key=lambda g: (g.n, canonical_form(g)))
        self._keys = set(reps)
        self._by_size: dict[int, list[tuple[LabeledGraph, int]]] = {}
        for g in self._reps:
            self._by_size.setdefault(g.n, []).append((g, labeling_count(g)))
        self.name = name or ("empty" if not self._reps else f"finite[{len(self._reps)}]")
        self._occ_cache: dict[tuple[LabeledGraph, int], int] = {}

    @property
    def graphs(self) -> list[LabeledGraph]:
        return list(self._reps)

    @property
    def max_size(self) -> int:
        return max(self._by_size, default=0)

    def count(self, n: int) -> int:
        return sum(c for _, c in self._by_size.get(n, ()))

    def contains(self, g: LabeledGraph) -> bool:
        return g.n in self._by_size and canonical_form(g) in self._keys

    def representatives(self, k: int) -> list[tuple[LabeledGraph, int]]:
        return list(self._by_size.get(k, ()))

    def sizes(self, limit: int) -> list[int]:
        return sorted(k for k in self._by_size if k <= limit)

    def occ_coefficient(self, pattern: LabeledGraph, n: int) -> int:
        key = (pattern, n)
        if key not in self._occ_cache:
            # every labeling of a representative contributes the same amount
            self._occ_cache[key] = sum(c * occ_count_labeled(pattern, g) for g, c in self._by_size.get(n, ()))
        return self._occ_cache[key]

    def p_eval(self, z: float, derivative: int = 0, tol: float = 0.0) -> float:
        j = derivative
        return sum(self.count(n) / math.factorial(n - j) * z ** (n - j) for n in self._by_size if n >= j)

    def to_obj(self):
        return {"kind": "finite", "graphs": [format_graph(g) for g in self._reps]}


def _linear_forest_parts(g: LabeledGraph) -> list[int] | None:
    """Component sizes if ``g`` is a disjoint union of paths, else ``None``."""
    seen = 0
    parts = []
    for v in range(1, g.n + 1):
        if (seen >> (v - 1)) & 1:
            continue
        comp = {v}
        stack = [v]
        while stack:
            u = stack.pop()
            for w in g.neighbors(u):
                if w not in comp:
                    comp.add(w)
                    stack.append(w)
        for u in comp:
            seen |= 1 << (u - 1)
        edges = sum(g.degree(u) for u in comp) // 2
        if edges != len(comp) - 1 or any(g.degree(u) > 2 for u in comp):
            return None
        parts.append(len(comp))
    return sorted(parts)


def _compositions(k: int) -> Iterable[tuple[int, ...]]:
    for m in range(1, k + 1):
        for cuts in itertools.combinations(range(1, k), m - 1):
            bounds = (0,) + cuts + (k,)
            yield tuple(bounds[i + 1] - bounds[i] for i in range(m))


class PathClass(PrimeClass):
    """All paths with at least 4 vertices: ``P(z) = z**4 / (2 (1 - z))``."""

    name = "paths"
    r0 = 1.0

    def count(self, n: int) -> int:
        return math.factorial(n) // 2 if n >= 4 else 0

    def contains(self, g: LabeledGraph) -> bool:
        return g.n >= 4 and _linear_forest_parts(g) == [g.n]

    def representatives(self, k: int) -> list[tuple[LabeledGraph, int]]:
        return [(LabeledGraph.path(k), self.count(k))] if k >= 4 else []

    def sizes(self, limit: int) -> list[int]:
        return list(range(4, limit + 1))

    @staticmethod
    @lru_cache(maxsize=None)
    def _path_occ(pattern: LabeledGraph, n: int) -> int:
        # k-subsets of a path split into runs of consecutive vertices; runs of
        # lengths r_1..r_m in order can be placed in C(n - k + 1, m) ways
        k = pattern.n
        if k > n:
            return 0
        parts = _linear_forest_parts(pattern)
        if parts is None:
            return 0
        subsets = sum(math.comb(n - k + 1, len(c)) for c in _compositions(k) if sorted(c) == parts)
        return subsets * automorphism_count(pattern)

    def occ_coefficient(self, pattern: LabeledGraph, n: int) -> int:
        if n < 4:
            return 0
        return self.count(n) * self._path_occ(pattern, n)

    def p_eval(self, z: float, derivative: int = 0, tol: float = 0.0) -> float:
        if z < 0:
            raise ContractError("evaluation point must be nonnegative")
        if z >= 1:
            raise DivergenceError(f"P diverges at {z} >= 1")
        # z^4/(1-z) = 1/(1-z) - (1 + z + z^2 + z^3)
        j = derivative
        pole = math.factorial(j) / (1 - z) ** (j + 1)
        poly = sum(_falling(i, j) * z ** (i - j) for i in range(j, 4))
        return 0.5 * (pole - poly)

    def to_obj(self):
        return {"kind": "paths"}


class CustomClass(PrimeClass):
    """A class given by code: labeled counts and occurrence totals as callables."""

    def __init__(
        self,
        count: Callable[[int], int],
        occ: Callable[[LabeledGraph, int], int],
        r0: float,
        contains: Callable[[LabeledGraph], bool] | None = None,
        representatives: Callable[[int], list[tuple[LabeledGraph, int]]] | None = None,
        name: str = "custom",
    ):
        self._count = count
        self._occ = occ
        self.r0 = r0
        self._contains = contains
        self._reps = representatives
        self.name = name

    def count(self, n: int) -> int:
        return self._count(n)

    def occ_coefficient(self, pattern: LabeledGraph, n: int) -> int:
        return self._occ(pattern, n)

    def contains(self, g: LabeledGraph) -> bool:
        if self._contains is None:
            raise ContractError("this custom class has no membership test")
        return self._contains(g)

    def representatives(self, k: int) -> list[tuple[LabeledGraph, int]]:
        if self._reps is None:
            raise ContractError("this custom class cannot be sampled")
        return self._reps(k)


EMPTY = FiniteClass([], name="empty")


def p4_class() -> FiniteClass:
    return FiniteClass([LabeledGraph.path(4)], name="p4")


# -- evaluation of Lambda and occurrence series --------------------------------


def lambda_eval(cls: PrimeClass, w: float, order: int = 0, tol: float = 1e-15) -> float:
    """``Lambda(w) = P(exp(w) - 1) + exp(w) - 1 - w`` or its first two derivatives."""
    if w < 0:
        raise ContractError("w must be nonnegative")
    u = math.expm1(w)
    if u >= cls.r0:
        raise DivergenceError(f"Lambda diverges at w = {w} >= log(1 + r0)")
    e = u + 1
    if order == 0:
        return cls.p_eval(u, 0, tol) + u - w
    if order == 1:
        return e * cls.p_eval(u, 1, tol / e) + u
    if order == 2:
        return e * e * cls.p_eval(u, 2, tol / (2 * e * e)) + e * cls.p_eval(u, 1, tol / (2 * e)) + e
    raise ContractError("order must be 0, 1 or 2")


def occ_series_eval(cls: PrimeClass, pattern: LabeledGraph, x: float, tol: float = 1e-14) -> float:
    """``Occ_{pattern,P}(x) = sum over H in P of Occ_pattern(H) x^(|H|-|pattern|) / |H|!``."""
    if x < 0:
        raise ContractError("x must be nonnegative")
    k = pattern.n
    if cls.max_size is not None:
        return sum(cls.occ_coefficient(pattern, n) / math.factorial(n) * x ** (n - k) for n in range(k, cls.max_size + 1))
    if x >= cls.r0:
        raise DivergenceError("occurrence series evaluated outside its disc")
    start = max(k, 1)
    return sum_series(lambda n: cls.occ_coefficient(pattern, n) / math.factorial(n) * x ** (n - k), start, tol)


def check_condition_c(cls: PrimeClass) -> tuple[bool, dict]:
    """Whether ``r0 > 0`` and ``Lambda'(log(1 + r0)^-) > 1``, with a diagnostic."""
    diag: dict = {"r0": cls.r0}
    if not cls.r0 > 0:
        diag["failed"] = "r0 must be positive"
        return False, diag
    hi_w = math.log1p(cls.r0) if math.isfinite(cls.r0) else math.inf
    if math.isinf(hi_w):
        w = 1.0
        while lambda_eval(cls, w, 1) <= 1:
            w *= 2
        diag["bracket"] = (0.0, w)
        diag["lambda1_limit"] = math.inf
        return True, diag
    # Lambda' is increasing: probe towards the boundary from inside
    best = 0.0
    for k in range(1, 40):
        w = hi_w * (1 - 2.0**-k)
        try:
            val = lambda_eval(cls, w, 1, tol=1e-12)
        except (DivergenceError, TruncationError):
            break
        best = val
        if val > 1:
            diag["bracket"] = (0.0, w)
            diag["lambda1_limit"] = math.inf if isinstance(cls, PathClass) else None
            return True, diag
    diag["lambda1_limit"] = best
    diag["failed"] = "Lambda'(log(1 + r0)) does not exceed 1"
    return False, diag


# -- class specification files --------------------------------------------------------


def class_from_obj(obj) -> PrimeClass:
    kind = obj.get("kind")
    if kind == "paths":
        return PathClass()
    if kind == "empty":
        return FiniteClass([], name="empty")
    if kind == "finite":
        return FiniteClass((parse_graph(t) for t in obj.get("graphs", [])), name=obj.get("name"))
    raise ValueError(f"unknown class kind {kind!r}")


def load_class(spec: str) -> PrimeClass:
    """``builtin:paths``, ``builtin:empty``, ``builtin:p4`` or a path to a class file."""
    if spec.startswith("builtin:"):
        which = spec.split(":", 1)[1]
        if which == "paths":
            return PathClass()
        if which == "empty":
            return FiniteClass([], name="empty")
        if which == "p4":
            return p4_class()
        raise ValueError(f"unknown builtin class {which!r}")
    with open(spec) as fh:
        return class_from_obj(json.load(fh))


def dump_class(cls: PrimeClass) -> str:
    return json.dumps(cls.to_obj(), indent=1) + "\n"
