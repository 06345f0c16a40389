"""Labeled simple graphs stored as rows of bitmasks.

Vertex ``v`` (1-based) owns bit ``v - 1`` in every row.  Graphs are
immutable and hashable, so they can be used as dictionary keys and as
tree decorations.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


class ContractError(ValueError):
    """Raised when an operation is called outside its precondition."""


class GraphFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def _bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass(frozen=True, slots=True)
class LabeledGraph:
    n: int
    rows: tuple[int, ...]

    def __post_init__(self):
        if len(self.rows) != self.n:
            raise ContractError("row count must equal n")
        full = (1 << self.n) - 1
        for i, row in enumerate(self.rows):
            if row & ~full or (row >> i) & 1:
                raise ContractError(f"bad adjacency row for vertex {i + 1}")
            for j in _bits(row):
                if not (self.rows[j] >> i) & 1:
                    raise ContractError("adjacency is not symmetric")

    # -- constructors -----------------------------------------------------

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> LabeledGraph:
        rows = [0] * n
        for u, v in edges:
            if u == v:
                raise ContractError(f"self-loop at {u}")
            if not (1 <= u <= n and 1 <= v <= n):
                raise ContractError(f"edge ({u}, {v}) out of range 1..{n}")
            rows[u - 1] |= 1 << (v - 1)
            rows[v - 1] |= 1 << (u - 1)
        return cls(n, tuple(rows))

    @classmethod
    def empty(cls, n: int) -> LabeledGraph:
        return cls(n, (0,) * n)

    @classmethod
    def complete(cls, n: int) -> LabeledGraph:
        full = (1 << n) - 1
        return cls(n, tuple(full ^ (1 << i) for i in range(n)))

    @classmethod
    def path(cls, n: int) -> LabeledGraph:
        return cls.from_edges(n, ((i, i + 1) for i in range(1, n)))

    @classmethod
    def cycle(cls, n: int) -> LabeledGraph:
        edges = [(i, i + 1) for i in range(1, n)] + [(n, 1)]
        return cls.from_edges(n, edges)

    @classmethod
    def from_numpy(cls, adj: np.ndarray) -> LabeledGraph:
        adj = np.asarray(adj, dtype=bool)
        n = adj.shape[0]
        if n == 0:
            return cls(0, ())
        # little-endian bit order puts column j at bit j
        packed = np.packbits(adj, axis=1, bitorder="little")
        rows = tuple(int.from_bytes(r.tobytes(), "little") for r in packed)
        return cls(n, rows)

    # -- queries ----------------------------------------------------------

    def has_edge(self, u: int, v: int) -> bool:
        return bool((self.rows[u - 1] >> (v - 1)) & 1)

    def neighbors(self, v: int) -> list[int]:
        return [j + 1 for j in _bits(self.rows[v - 1])]

    def degree(self, v: int) -> int:
        return self.rows[v - 1].bit_count()

    def edges(self) -> Iterator[tuple[int, int]]:
        for i, row in enumerate(self.rows):
            for j in _bits(row >> (i + 1)):
                yield i + 1, i + j + 2

    def edge_count(self) -> int:
        return sum(r.bit_count() for r in self.rows) // 2

    def complement(self) -> LabeledGraph:
        full = (1 << self.n) - 1
        return LabeledGraph(self.n, tuple((full ^ r) & ~(1 << i) for i, r in enumerate(self.rows)))

    def is_complete(self) -> bool:
        return self.edge_count() == self.n * (self.n - 1) // 2

    def is_edgeless(self) -> bool:
        return not any(self.rows)

    def relabel(self, perm: Sequence[int]) -> LabeledGraph:
        """Return the graph where vertex ``v`` becomes ``perm[v - 1]``."""
        rows = [0] * self.n
        for i, row in enumerate(self.rows):
            target = perm[i] - 1
            mask = 0
            for j in _bits(row):
                mask |= 1 << (perm[j] - 1)
            rows[target] = mask
        return LabeledGraph(self.n, tuple(rows))

    def to_numpy(self) -> np.ndarray:
        out = np.zeros((self.n, self.n), dtype=bool)
        for i, row in enumerate(self.rows):
            for j in _bits(row):
                out[i, j] = True
        return out

    def __repr__(self) -> str:
        return f"LabeledGraph(n={self.n}, edges={list(self.edges())})"


@dataclass(frozen=True)
class WeakGraph:
    """Graph whose vertices carry distinct positive labels, not necessarily 1..n."""

    adj: Mapping[int, frozenset[int]]

    @property
    def labels(self) -> list[int]:
        return sorted(self.adj)

    def reduced(self) -> LabeledGraph:
        order = {lab: i + 1 for i, lab in enumerate(self.labels)}
        edges = [(order[u], order[v]) for u in self.adj for v in self.adj[u] if u < v]
        return LabeledGraph.from_edges(len(order), edges)

    @classmethod
    def from_labeled(cls, g: LabeledGraph, labels: Sequence[int] | None = None) -> WeakGraph:
        labels = list(labels) if labels is not None else list(range(1, g.n + 1))
        return cls({labels[i]: frozenset(labels[j] for j in _bits(g.rows[i])) for i in range(g.n)})


# -- induced subgraphs and occurrences ---------------------------------------


def induced_subgraph(g: LabeledGraph, injection: Mapping[int, int]) -> LabeledGraph:
    """Subgraph on the domain of ``injection``, vertex ``l`` relabeled ``injection[l]``.

    The image must be exactly ``{1..k}``.
    """
    k = len(injection)
    if sorted(injection.values()) != list(range(1, k + 1)):
        raise ContractError("injection image must be {1..k}")
    for lab in injection:
        if not 1 <= lab <= g.n:
            raise ContractError(f"label {lab} not a vertex")
    inv = [0] * k
    for lab, img in injection.items():
        inv[img - 1] = lab - 1
    rows = []
    for a in range(k):
        row_a = g.rows[inv[a]]
        mask = 0
        for b in range(k):
            if (row_a >> inv[b]) & 1:
                mask |= 1 << b
        rows.append(mask)
    return LabeledGraph(k, tuple(rows))


def _tuple_code(g: LabeledGraph, verts: Sequence[int]) -> int:
    # adjacency bits of the ordered tuple, upper triangle row by row
    code = 0
    bit = 0
    for a in range(len(verts)):
        row = g.rows[verts[a]]
        for b in range(a + 1, len(verts)):
            if (row >> verts[b]) & 1:
                code |= 1 << bit
            bit += 1
    return code


def graph_code(g: LabeledGraph) -> int:
    return _tuple_code(g, range(g.n))


def occ_count_labeled(g: LabeledGraph, h: LabeledGraph) -> int:
    """Number of injections ``I`` onto ``{1..|g|}`` with ``h_I == g`` exactly."""
    k = g.n
    if k > h.n:
        return 0
    target = graph_code(g)
    return sum(1 for verts in itertools.permutations(range(h.n), k) if _tuple_code(h, verts) == target)


def occ_count(g: LabeledGraph, h: LabeledGraph) -> int:
    """Number of injections ``I`` onto ``{1..|g|}`` with ``h_I`` isomorphic to ``g``."""
    k = g.n
    if k > h.n:
        return 0
    key = canonical_form(g)
    count = 0
    for subset in itertools.combinations(range(1, h.n + 1), k):
        sub = induced_subgraph(h, {lab: i + 1 for i, lab in enumerate(subset)})
        if canonical_form(sub) == key:
            count += 1
    return count * math.factorial(k)


# -- modules and primality -----------------------------------------------------


def _mask_of(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << (v - 1)
    return m


def is_module_mask(g: LabeledGraph, mask: int) -> bool:
    outside = ((1 << g.n) - 1) & ~mask
    for z in _bits(outside):
        seen = g.rows[z] & mask
        if seen and seen != mask:
            return False
    return True


def is_module(g: LabeledGraph, vertices: Iterable[int]) -> bool:
    vs = list(vertices)
    if any(not 1 <= v <= g.n for v in vs):
        raise ContractError("vertex set must lie in 1..n")
    return is_module_mask(g, _mask_of(vs))


def module_closure(g: LabeledGraph, mask: int) -> int:
    """Smallest module containing the vertex set ``mask``."""
    full = (1 << g.n) - 1
    while True:
        grow = 0
        for z in _bits(full & ~mask):
            seen = g.rows[z] & mask
            if seen and seen != mask:
                grow |= 1 << z
        if not grow:
            return mask
        mask |= grow


SUBSET_PRIME_LIMIT = 12


def is_prime(g: LabeledGraph) -> bool:
    if g.n < 3:
        return False
    if g.n <= SUBSET_PRIME_LIMIT:
        full = (1 << g.n) - 1
        for mask in range(3, full):
            if mask & (mask - 1) and is_module_mask(g, mask):
                return False
        return True
    # closure of every pair must be the whole vertex set
    full = (1 << g.n) - 1
    for a in range(g.n):
        for b in range(a + 1, g.n):
            if module_closure(g, (1 << a) | (1 << b)) != full:
                return False
    return True


# -- substitution ---------------------------------------------------------------


def substitute(g: LabeledGraph, parts: Sequence[WeakGraph | LabeledGraph]) -> WeakGraph:
    """The graph ``g[H_1, ..., H_n]``."""
    if len(parts) != g.n:
        raise ContractError(f"need {g.n} parts, got {len(parts)}")
    weak = [p if isinstance(p, WeakGraph) else WeakGraph.from_labeled(p) for p in parts]
    seen: set[int] = set()
    for p in weak:
        if seen & p.adj.keys():
            raise ContractError("part label sets overlap")
        seen |= p.adj.keys()
    adj: dict[int, set[int]] = {}
    for p in weak:
        for lab, nbrs in p.adj.items():
            adj[lab] = set(nbrs)
    for i, j in g.edges():
        a, b = weak[i - 1], weak[j - 1]
        for u in a.adj:
            adj[u].update(b.adj)
        for v in b.adj:
            adj[v].update(a.adj)
    return WeakGraph({k: frozenset(v) for k, v in adj.items()})


# -- isomorphism -----------------------------------------------------------------


def _refine(g: LabeledGraph) -> list[list[int]]:
    """Ordered partition of vertex indices by iterated neighbour-colour counts."""
    colors = [0] * g.n
    ncolors = 1
    while True:
        sigs = []
        for v in range(g.n):
            counts = [0] * ncolors
            for u in _bits(g.rows[v]):
                counts[colors[u]] += 1
            sigs.append((colors[v], tuple(counts)))
        order = sorted(set(sigs))
        index = {s: i for i, s in enumerate(order)}
        new = [index[s] for s in sigs]
        if len(order) == ncolors:
            break
        colors, ncolors = new, len(order)
    cells: list[list[int]] = [[] for _ in range(ncolors)]
    for v, c in enumerate(colors):
        cells[c].append(v)
    return cells


@lru_cache(maxsize=1 << 16)
def canonical_form(g: LabeledGraph) -> tuple[int, int]:
    """Isomorphism-invariant key: ``(n, minimal code over cell-respecting orders)``."""
    cells = _refine(g)
    best = None
    for choice in itertools.product(*(itertools.permutations(c) for c in cells)):
        order = [v for cell in choice for v in cell]
        code = _tuple_code(g, order)
        if best is None or code < best:
            best = code
    return g.n, best if best is not None else 0


def are_isomorphic(g: LabeledGraph, h: LabeledGraph) -> bool:
    if g.n != h.n or g.edge_count() != h.edge_count():
        return False
    if sorted(g.degree(v) for v in range(1, g.n + 1)) != sorted(h.degree(v) for v in range(1, h.n + 1)):
        return False
    return canonical_form(g) == canonical_form(h)


@lru_cache(maxsize=4096)
def automorphism_count(g: LabeledGraph) -> int:
    cells = _refine(g)
    target = graph_code(g)
    count = 0
    for choice in itertools.product(*(itertools.permutations(c) for c in cells)):
        perm = [0] * g.n
        for cell, image in zip(cells, choice):
            for v, w in zip(cell, image):
                perm[v] = w
        if _tuple_code(g, perm) == target:
            count += 1
    return count


def labeling_count(g: LabeledGraph) -> int:
    """Number of distinct labeled graphs isomorphic to ``g``."""
    return math.factorial(g.n) // automorphism_count(g)


def all_labeled_graphs(n: int) -> Iterator[LabeledGraph]:
    pairs = list(itertools.combinations(range(1, n + 1), 2))
    for bits in range(1 << len(pairs)):
        yield LabeledGraph.from_edges(n, (pairs[i] for i in range(len(pairs)) if (bits >> i) & 1))


def iso_classes(n: int) -> list[LabeledGraph]:
    """One representative per isomorphism class on ``n`` vertices."""
    reps: dict[tuple[int, int], LabeledGraph] = {}
    for g in all_labeled_graphs(n):
        reps.setdefault(canonical_form(g), g)
    return list(reps.values())


# -- text format --------------------------------------------------------------------


def parse_graph(text: str) -> LabeledGraph:
    lines = [(i + 1, ln.strip()) for i, ln in enumerate(text.splitlines())]
    lines = [(i, ln) for i, ln in lines if ln]
    if not lines:
        raise GraphFormatError("empty input", 1)
    first, head = lines[0]
    try:
        n = int(head)
    except ValueError:
        raise GraphFormatError(f"expected vertex count, got {head!r}", first) from None
    if n < 0:
        raise GraphFormatError("negative vertex count", first)
    rows = [0] * n
    for lineno, ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 2:
            raise GraphFormatError(f"expected 'u v', got {ln!r}", lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError(f"non-integer vertex in {ln!r}", lineno) from None
        if not (1 <= u <= n and 1 <= v <= n):
            raise GraphFormatError(f"vertex out of range 1..{n}", lineno)
        if u == v:
            raise GraphFormatError(f"self-loop at {u}", lineno)
        if (rows[u - 1] >> (v - 1)) & 1:
            raise GraphFormatError(f"duplicate edge {u} {v}", lineno)
        rows[u - 1] |= 1 << (v - 1)
        rows[v - 1] |= 1 << (u - 1)
    return LabeledGraph(n, tuple(rows))


def format_graph(g: LabeledGraph) -> str:
    out = [str(g.n)]
    out.extend(f"{u} {v}" for u, v in g.edges())
    return "\n".join(out) + "\n"
