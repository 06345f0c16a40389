"""Substitution trees and the modular decomposition.

A tree is either a :class:`Leaf` or a :class:`Node`.  A node decoration is
``JOIN`` (the complete graph), ``UNION`` (the edgeless graph) or a
:class:`~modgraphs.graph.LabeledGraph` whose vertex ``i`` is attached to the
``i``-th child, children being ordered by their minimal leaf label.
"""

from __future__ import annotations

import itertools
import json
import math
from collections.abc import Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

from .graph import (
    ContractError,
    LabeledGraph,
    _bits,
    format_graph,
    induced_subgraph,
    is_prime,
    parse_graph,
)

JOIN = "join"
UNION = "union"

Decoration = Union[str, LabeledGraph]


def is_linear(dec: Decoration) -> bool:
    return dec is JOIN or dec is UNION or dec == JOIN or dec == UNION


def dec_graph(dec: Decoration, k: int) -> LabeledGraph:
    """The decoration as a graph on ``k`` vertices."""
    if dec == JOIN:
        return LabeledGraph.complete(k)
    if dec == UNION:
        return LabeledGraph.empty(k)
    return dec


def normalize_dec(dec: Decoration) -> Decoration:
    """Complete and edgeless graph decorations become ``JOIN`` / ``UNION``."""
    if isinstance(dec, LabeledGraph):
        if dec.is_complete():
            return JOIN
        if dec.is_edgeless():
            return UNION
    return dec


@dataclass(frozen=True, slots=True)
class Leaf:
    label: int

    @property
    def size(self) -> int:
        return 1

    @property
    def min_label(self) -> int:
        return self.label

    def leaves(self) -> list[int]:
        return [self.label]


@dataclass(frozen=True)
class Node:
    dec: Decoration
    children: tuple[Tree, ...]
    size: int = field(init=False, compare=False, repr=False)
    min_label: int = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        ch = self.children
        if len(ch) < 2:
            raise ContractError("internal nodes need at least 2 children")
        if not is_linear(self.dec) and self.dec.n != len(ch):
            raise ContractError("decoration size must equal child count")
        mins = [c.min_label for c in ch]
        if any(a >= b for a, b in zip(mins, mins[1:])):
            raise ContractError("children must be sorted by minimal leaf label")
        object.__setattr__(self, "size", sum(c.size for c in ch))
        object.__setattr__(self, "min_label", mins[0])

    @classmethod
    def build(cls, dec: Decoration, children: Sequence[Tree]) -> Node:
        """Node from children in any order; a graph decoration follows the given order."""
        order = sorted(range(len(children)), key=lambda i: children[i].min_label)
        dec = normalize_dec(dec)
        if not is_linear(dec):
            if dec.n != len(children):
                raise ContractError("decoration size must equal child count")
            rank = [0] * len(children)
            for r, i in enumerate(order):
                rank[i] = r + 1
            dec = dec.relabel(rank)
        return cls(dec, tuple(children[i] for i in order))

    def leaves(self) -> list[int]:
        out: list[int] = []
        stack: list[Tree] = [self]
        while stack:
            t = stack.pop()
            if isinstance(t, Leaf):
                out.append(t.label)
            else:
                stack.extend(t.children)
        return out


Tree = Union[Leaf, Node]


# -- traversal helpers -----------------------------------------------------------


def iter_nodes(t: Tree, path: tuple[int, ...] = ()) -> Iterator[tuple[tuple[int, ...], Node]]:
    """Internal nodes with their child-index paths from the root (preorder)."""
    if isinstance(t, Node):
        yield path, t
        for i, c in enumerate(t.children):
            yield from iter_nodes(c, path + (i,))


def node_at(t: Tree, path: Sequence[int]) -> Tree:
    for i in path:
        t = t.children[i]
    return t


def replace_at(t: Tree, path: Sequence[int], new: Tree) -> Tree:
    if not path:
        return new
    kids = list(t.children)
    kids[path[0]] = replace_at(kids[path[0]], path[1:], new)
    return Node.build(t.dec, kids)


def edge_count(t: Tree) -> int:
    return sum(len(node.children) for _, node in iter_nodes(t))


def relabel_leaves(t: Tree, mapping: Mapping[int, int]) -> Tree:
    if isinstance(t, Leaf):
        return Leaf(mapping[t.label])
    return Node.build(t.dec, [relabel_leaves(c, mapping) for c in t.children])


def is_reduced(t: Tree) -> bool:
    labels = t.leaves()
    return sorted(labels) == list(range(1, len(labels) + 1))


# -- Graph(t) ----------------------------------------------------------------------


def graph_of(t: Tree) -> LabeledGraph:
    """Expand the substitution tree ``t`` into its labeled graph."""
    n = t.size
    if not is_reduced(t):
        raise ContractError("graph_of needs leaf labels 1..n")
    rows = [0] * n

    def walk(node: Tree) -> int:
        if isinstance(node, Leaf):
            return 1 << (node.label - 1)
        masks = [walk(c) for c in node.children]
        g = dec_graph(node.dec, len(masks))
        for i, mi in enumerate(masks):
            seen = 0
            for j in _bits(g.rows[i]):
                seen |= masks[j]
            if seen:
                for u in _bits(mi):
                    rows[u] |= seen
        return sum(masks)

    walk(t)
    return LabeledGraph(n, tuple(rows))


# -- modular decomposition --------------------------------------------------------


def _components(rows: Sequence[int], mask: int, complement: bool) -> list[int]:
    comps = []
    left = mask
    while left:
        low = left & -left
        comp = low
        frontier = low
        while frontier:
            nxt = 0
            for v in _bits(frontier):
                nb = (~rows[v] & ~(1 << v)) if complement else rows[v]
                nxt |= nb
            nxt &= mask & ~comp
            comp |= nxt
            frontier = nxt
        comps.append(comp)
        left &= ~comp
    return comps


def _closure(rows: Sequence[int], mask: int, universe: int) -> int:
    while True:
        grow = 0
        for z in _bits(universe & ~mask):
            seen = rows[z] & mask
            if seen and seen != mask:
                grow |= 1 << z
        if not grow:
            return mask
        mask |= grow


def _quotient(rows: Sequence[int], parts: Sequence[int]) -> LabeledGraph:
    reps = [(p & -p).bit_length() - 1 for p in parts]
    k = len(reps)
    out = []
    for a in range(k):
        mask = 0
        for b in range(k):
            if (rows[reps[a]] >> reps[b]) & 1:
                mask |= 1 << b
        out.append(mask)
    return LabeledGraph(k, tuple(out))


def _md(rows: Sequence[int], mask: int) -> Tree:
    if mask & (mask - 1) == 0:
        return Leaf(mask.bit_length())
    comps = _components(rows, mask, complement=False)
    if len(comps) > 1:
        return Node(UNION, tuple(_md(rows, c) for c in comps))
    cocomps = _components(rows, mask, complement=True)
    if len(cocomps) > 1:
        return Node(JOIN, tuple(_md(rows, c) for c in cocomps))
    # both connected: maximal proper modules partition the vertex set
    parts = []
    left = mask
    while left:
        v = left & -left
        part = v
        for w in _bits(mask & ~part):
            if (part >> w) & 1:
                continue
            c = _closure(rows, v | (1 << w), mask)
            if c != mask:
                part |= c
        parts.append(part)
        left &= ~part
    parts.sort(key=lambda p: p & -p)
    return Node(_quotient(rows, parts), tuple(_md(rows, p) for p in parts))


def modular_decomposition(g: LabeledGraph) -> Tree:
    """The unique modular decomposition tree of ``g``."""
    if g.n < 1:
        raise ContractError("modular decomposition needs at least one vertex")
    return _md(g.rows, (1 << g.n) - 1)


def is_md_tree(t: Tree) -> bool:
    """No JOIN under JOIN, no UNION under UNION, every graph decoration prime."""
    for _, node in iter_nodes(t):
        if is_linear(node.dec):
            if any(isinstance(c, Node) and c.dec == node.dec for c in node.children):
                return False
        elif not is_prime(node.dec):
            return False
    return True


def prime_decorations(t: Tree) -> list[LabeledGraph]:
    return [node.dec for _, node in iter_nodes(t) if not is_linear(node.dec)]


# -- induced subtrees ----------------------------------------------------------------


def induced_subtree(t: Tree, injection: Mapping[int, int]) -> Tree:
    """The subtree induced by the marked leaves, leaves relabeled by ``injection``."""
    if not injection:
        raise ContractError("induced subtree needs at least one marked leaf")
    if sorted(injection.values()) != list(range(1, len(injection) + 1)):
        raise ContractError("injection image must be {1..k}")

    def rec(node: Tree) -> Tree | None:
        if isinstance(node, Leaf):
            mark = injection.get(node.label)
            return None if mark is None else Leaf(mark)
        hits = []
        for k, c in enumerate(node.children):
            sub = rec(c)
            if sub is not None:
                hits.append((k, sub))
        if not hits:
            return None
        if len(hits) == 1:
            return hits[0][1]
        subs = [s for _, s in hits]
        if is_linear(node.dec):
            return Node.build(node.dec, subs)
        # vertex k of the decoration gets the rank of its child's minimal mark
        ranked = sorted(range(len(hits)), key=lambda r: subs[r].min_label)
        relab = {}
        for rank, r in enumerate(ranked):
            relab[hits[r][0] + 1] = rank + 1
        dec = induced_subgraph(node.dec, relab)
        return Node.build(normalize_dec(dec), [subs[r] for r in ranked])

    out = rec(t)
    missing = set(injection) - set(t.leaves())
    if missing:
        raise ContractError(f"marked labels {sorted(missing)} are not leaves")
    return out


# -- binary trees, inflation, expanded trees -------------------------------------------


def binary_trees(labels: Sequence[int], dec: Decoration) -> Iterator[Tree]:
    """All non-plane binary trees with the given leaf labels, every node decorated ``dec``.

    Built by inserting leaves one at a time on any of the ``2k - 3`` edges.
    """
    labels = list(labels)
    if len(labels) == 1:
        yield Leaf(labels[0])
        return
    last = labels[-1]
    for smaller in binary_trees(labels[:-1], dec):
        yield from _insert_everywhere(smaller, Leaf(last), dec)


def _insert_everywhere(t: Tree, leaf: Leaf, dec: Decoration) -> Iterator[Tree]:
    yield Node.build(dec, [t, leaf])
    if isinstance(t, Node):
        for i, c in enumerate(t.children):
            for new_c in _insert_everywhere(c, leaf, dec):
                kids = list(t.children)
                kids[i] = new_c
                yield Node.build(t.dec, kids)


def double_factorial(k: int) -> int:
    return math.prod(range(k, 0, -2)) if k > 0 else 1


def inflate(t: Tree, path: Sequence[int], tau: Tree) -> Tree:
    """Replace the node at ``path`` by ``tau``, leaf ``j`` of ``tau`` becoming its ``j``-th child."""
    node = node_at(t, path)
    if not isinstance(node, Node):
        raise ContractError("inflation happens at an internal node")
    k = len(node.children)
    if tau.size != k or not is_reduced(tau):
        raise ContractError("tau must be a reduced tree with one leaf per child")
    if graph_of(tau) != dec_graph(node.dec, k):
        raise ContractError("tau is not a substitution tree of the decoration")

    def graft(s: Tree) -> Tree:
        if isinstance(s, Leaf):
            return node.children[s.label - 1]
        return Node.build(s.dec, [graft(c) for c in s.children])

    return replace_at(t, path, graft(tau))


def expanded_trees(g: LabeledGraph) -> tuple[int, Iterator[Tree]]:
    """Count and enumerate the expanded trees of ``g``."""
    md = modular_decomposition(g)
    linear = [(p, node) for p, node in iter_nodes(md) if is_linear(node.dec)]
    count = math.prod(double_factorial(2 * len(node.children) - 3) for _, node in linear)

    def rebuild(t: Tree, choices: Iterator[Tree]) -> Tree:
        # consume one binary tree per linear node in preorder
        if isinstance(t, Leaf):
            return t
        if is_linear(t.dec):
            shape = next(choices)
            kids = [rebuild(c, choices) for c in t.children]

            def graft(s: Tree) -> Tree:
                if isinstance(s, Leaf):
                    return kids[s.label - 1]
                return Node.build(s.dec, [graft(c) for c in s.children])

            return graft(shape)
        return Node(t.dec, tuple(rebuild(c, choices) for c in t.children))

    def gen() -> Iterator[Tree]:
        options = [list(binary_trees(range(1, len(node.children) + 1), node.dec)) for _, node in linear]
        for combo in itertools.product(*options):
            yield rebuild(md, iter(combo))

    return count, gen()


def beta(g: LabeledGraph) -> Fraction:
    """Half the total excess child count of the prime nodes of the MD tree."""
    if g.n == 0:
        return Fraction(0)
    md = modular_decomposition(g)
    return Fraction(sum(len(node.children) - 2 for _, node in iter_nodes(md) if not is_linear(node.dec)), 2)


def is_in_class(g: LabeledGraph, prime_class) -> bool:
    if g.n == 0:
        return True
    return all(prime_class.contains(d) for d in prime_decorations(modular_decomposition(g)))


# -- structured text format ----------------------------------------------------------------


def tree_to_obj(t: Tree):
    if isinstance(t, Leaf):
        return {"leaf": t.label}
    if t.dec == JOIN or t.dec == UNION:
        dec = t.dec
    elif is_prime(t.dec):
        dec = {"prime": format_graph(t.dec)}
    else:
        dec = {"graph": format_graph(t.dec)}
    return {"dec": dec, "children": [tree_to_obj(c) for c in t.children]}


def tree_from_obj(obj) -> Tree:
    if not isinstance(obj, dict):
        raise ValueError(f"tree node must be an object, got {type(obj).__name__}")
    if "leaf" in obj:
        return Leaf(int(obj["leaf"]))
    dec = obj.get("dec")
    if dec in (JOIN, UNION):
        dec = JOIN if dec == JOIN else UNION
    elif isinstance(dec, dict) and ("prime" in dec or "graph" in dec):
        dec = parse_graph(dec.get("prime", dec.get("graph")))
        if "prime" in obj["dec"] and not is_prime(dec):
            raise ValueError("prime decoration is not a prime graph")
    else:
        raise ValueError(f"unknown decoration {dec!r}")
    children = [tree_from_obj(c) for c in obj.get("children", [])]
    return Node.build(dec, children)


def dump_tree(t: Tree) -> str:
    return json.dumps(tree_to_obj(t), indent=1) + "\n"


def load_tree(text: str) -> Tree:
    return tree_from_obj(json.loads(text))
