"""Exhaustive enumerators used as independent oracles by the acceptance checks and the tests.

Nothing here uses the series, the decomposition algorithm or the sampler.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

from .graph import all_labeled_graphs
from .tree import JOIN, UNION, Leaf, Node, induced_subtree


def set_partitions(items):
    """All set partitions of a tuple, blocks in order of their first element."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for sub in set_partitions(rest):
        yield [(first,)] + sub
        for i in range(len(sub)):
            yield sub[:i] + [(first,) + sub[i]] + sub[i + 1 :]


def labeled_members(cls, k):
    """Every labeled graph of size ``k`` in the class."""
    out = set()
    for rep, _ in cls.representatives(k):
        for perm in itertools.permutations(range(1, k + 1)):
            out.add(rep.relabel(perm))
    return sorted(out, key=lambda g: g.rows)


def class_trees(cls, n):
    """All modular decomposition trees on labels 1..n whose primes lie in ``cls``."""
    sizes = [k for k in range(4, n + 1) if cls.count(k)]
    primes = {k: labeled_members(cls, k) for k in sizes}

    @lru_cache(maxsize=None)
    def trees(labels, forbid):
        if len(labels) == 1:
            return (Leaf(labels[0]),)
        out = []
        for part in set_partitions(labels):
            k = len(part)
            if k < 2:
                continue
            blocks = sorted(part, key=min)
            for dec in (JOIN, UNION):
                if dec == forbid:
                    continue
                for ch in itertools.product(*(trees(b, dec) for b in blocks)):
                    out.append(Node(dec, ch))
            for g in primes.get(k, ()):
                for ch in itertools.product(*(trees(b, None) for b in blocks)):
                    out.append(Node(g, ch))
        return tuple(out)

    return list(trees(tuple(range(1, n + 1)), None))


def injections(n, ell):
    """Injections from subsets of {1..n} onto {1..ell}, as dicts."""
    for dom in itertools.permutations(range(1, n + 1), ell):
        yield {d: i + 1 for i, d in enumerate(dom)}


def class_graph_counts(cls, n, member):
    """Number of labeled graphs on ``n`` vertices accepted by ``member(g, cls)``."""
    return sum(1 for g in all_labeled_graphs(n) if member(g, cls))


def marked_tree_count(cls, tau, n):
    """Number of pairs (tree on n leaves, injection onto the leaves of tau) inducing ``tau``.

    By symmetry this is ``(n)_l`` times the number of trees whose subtree on
    ``{1..l}`` with the identity marking equals ``tau``.
    """
    ell = tau.size
    if n < ell:
        return 0
    ident = {i: i for i in range(1, ell + 1)}
    hits = sum(1 for t in class_trees(cls, n) if induced_subtree(t, ident) == tau)
    out = hits
    for i in range(ell):
        out *= n - i
    return out
