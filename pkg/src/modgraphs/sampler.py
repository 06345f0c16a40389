"""Uniform random trees and graphs of a class, and samples of the limit graphon.

Trees are drawn by the recursive method on the grammar

    T = A + join(Set>=2(A)),   A = leaf + prime(P; T, ..., T) + union(Set>=2(A')),

with ``A'`` (root not a union) counted like ``A`` by complementation.  Shapes
are generated with contiguous canonical labels and then relabeled by a uniform
permutation: since every shape is drawn with probability proportional to its
number of labelings, this gives the uniform distribution on labeled trees.

Choices are made on float tables scaled by ``R^n / n!``.  A choice whose
uniform lands within ``GUARD`` (relative) of a cell boundary is redone with
exact integer counts, reading further random bits as needed, so the output
distribution is exactly uniform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import gmpy2
import numpy as np

from . import _kernels_py as kp
from . import kernels
from .analytic import solve_constants
from .classes import FiniteClass, PathClass, PrimeClass
from .graph import ContractError, LabeledGraph
from .series import BINOM, tree_counts
from .tree import JOIN, UNION, Leaf, Node, Tree, graph_of

GUARD = 1e-9
MP_PREC = 256
MP_EPS = 2.0**-192


class NoObjectError(ValueError):
    """No object of the requested size exists in the class."""


@dataclass(frozen=True)
class RngStream:
    """Philox4x64 generator keyed by ``SeedSequence(seed, spawn_key=(stream,))``.

    Equal ``(seed, stream)`` give equal sequences; ``sub(k)`` derives further
    independent streams for auxiliary draws.
    """

    seed: int
    stream: int = 0
    path: tuple[int, ...] = ()

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream,) + self.path)
        return np.random.Generator(np.random.Philox(ss))

    def sub(self, *keys: int) -> RngStream:
        return RngStream(self.seed, self.stream, self.path + tuple(keys))


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    return RngStream(int(rng)).generator()


# -- count tables ------------------------------------------------------------------------


def _conv(x: np.ndarray, y: np.ndarray, lo: int, hi: int, n: int, weight: np.ndarray | None = None):
    """``sum_{m=lo}^{hi} w_m x_m y_{n-m}`` (float, or the entry type of object arrays)."""
    if hi < lo:
        return 0.0 if x.dtype != object else x[0] * 0
    xs = x[lo : hi + 1]
    if weight is not None:
        xs = xs * weight[lo : hi + 1]
    out = np.dot(xs, y[n - hi : n - lo + 1][::-1])
    return float(out) if x.dtype != object else out


class CountCache:
    """Float and exact count tables of the tree grammar up to size ``order``.

    Float rows (scaled by ``rho^n / n!``): ``a`` not-join trees, ``s``
    join-rooted trees, ``t`` all trees, ``e`` sets of not-join trees, ``pi``
    prime-rooted trees, then ``u_1..u_K`` (sets of ``k`` trees) for finite
    classes or ``w_0..w_4`` (sequences of at least ``j`` trees) for paths.
    Exact labeled counts of the same symbols are computed on first use.
    """

    def __init__(self, cls: PrimeClass, order: int, rho: float | None = None):
        if not isinstance(cls, (FiniteClass, PathClass)):
            raise ContractError("sampling needs a finite class or the path class")
        if order < 1:
            raise ContractError("order must be positive")
        self.cls = cls
        self.order = order
        self.paths = isinstance(cls, PathClass)
        self.rho = float(rho) if rho is not None else solve_constants(cls).R
        self._exact: dict[str, list[int]] | None = None
        self._exact_order = 0
        self._mp: np.ndarray | None = None
        self._setup_class()
        self.tab = self._float_tables()

    def _setup_class(self):
        cls = self.cls
        if self.paths:
            self.sizes = np.zeros(0, dtype=np.int64)
            self.size_weights = np.zeros(0)
            self.rep_offsets = np.zeros(1, dtype=np.int64)
            self.rep_weights = np.zeros(0)
            self.reps: list[LabeledGraph] = []
            self.rep_k = 1
            self.rep_adj = np.zeros((1, 1), dtype=np.uint8)
            return
        sizes = [k for k in cls.sizes(self.order)]
        reps, offsets, weights = [], [0], []
        for k in sizes:
            for g, c in cls.representatives(k):
                reps.append(g)
                weights.append(float(c))
            offsets.append(len(reps))
        self.sizes = np.array(sizes, dtype=np.int64)
        self.size_weights = np.array([float(cls.count(k)) for k in sizes])
        self.rep_offsets = np.array(offsets, dtype=np.int64)
        self.rep_weights = np.array(weights)
        self.rep_label_counts = [c for k in sizes for _, c in cls.representatives(k)]
        self.reps = reps
        self.rep_k = max(sizes, default=1)
        K = self.rep_k
        adj = np.zeros((max(len(reps), 1), K * K), dtype=np.uint8)
        for r, g in enumerate(reps):
            for i, j in g.edges():
                adj[r, (i - 1) * K + (j - 1)] = adj[r, (j - 1) * K + (i - 1)] = 1
        self.rep_adj = adj

    def _float_tables(self) -> np.ndarray:
        return self._tables(self.order, float, np.float64)

    def _tables(self, N: int, num, dtype) -> np.ndarray:
        """Scaled count tables up to ``N`` with entries of type ``num`` (float or mpfr)."""
        rho = num(self.rho)
        extra = 5 if self.paths else self.rep_k
        zero = num(0)
        tab = np.empty((5 + extra, N + 1), dtype=dtype)
        tab[:] = zero
        a, s, t, e, pi = tab[0], tab[1], tab[2], tab[3], tab[4]
        e[0] = num(1)
        if self.paths:
            w = [tab[5 + j] for j in range(5)]
            w[0][0] = num(1)
        else:
            u = {j: tab[4 + j] for j in range(1, extra + 1)}
            ks = [int(k) for k in self.sizes]
            cs = [num(int(self.cls.count(k))) for k in ks]
        ratio = np.empty(N + 2, dtype=dtype)
        ratio[:] = zero
        for n in range(1, N + 1):
            ratio[1 : n + 1] = [num(m) / num(n) for m in range(1, n + 1)] if dtype is object else np.arange(1, n + 1) / n
            if self.paths:
                w4 = _conv(t, w[3], 1, n - 3, n)
                p = w4 / 2
            else:
                for j in range(extra, 1, -1):
                    u[j][n] = _conv(t, u[j - 1], 1, n - j + 1, n, ratio)
                p = sum((c * u[k][n] for k, c in zip(ks, cs) if k <= n), zero)
            sn = _conv(a, e, 1, n - 1, n, ratio)
            an = (rho if n == 1 else zero) + p + sn
            a[n], s[n], pi[n] = an, sn, p
            t[n] = e[n] = an + sn
            if self.paths:
                w[4][n] = w4
                for j in (3, 2, 1):
                    w[j][n] = _conv(t, w[j - 1], 1, n - j + 1, n)
                w[0][n] = _conv(t, w[0], 1, n, n)
            elif extra >= 1:
                u[1][n] = t[n]
        return tab

    def mp_tables(self, upto: int) -> np.ndarray:
        """The scaled tables in ``MP_PREC``-bit floating point, at least up to ``upto``."""
        have = self._mp.shape[1] - 1 if self._mp is not None else 0
        if have < upto:
            need = min(self.order, max(upto, 2 * have))
            with gmpy2.context(gmpy2.get_context(), precision=MP_PREC):
                self._mp = self._tables(need, gmpy2.mpfr, object)
        return self._mp

    # -- exact counts -----------------------------------------------------------

    def exact(self, upto: int | None = None) -> dict[str, list[int]]:
        """Exact labeled counts of the grammar symbols, at least up to ``upto``."""
        need = self.order if upto is None else upto
        if self._exact is None or self._exact_order < need:
            self._exact = tree_counts(self.cls, need)
            self._exact_order = need
        return self._exact

    def count(self, n: int) -> int:
        return self.exact(n)["tau"][n]

    def float_count_check(self, n: int) -> float:
        """Relative gap between the float table and the exact count at size ``n``."""
        exact = self.exact(n)["tau"][n]
        if exact == 0:
            return abs(self.tab[2, n])
        log_exact = math.log(exact) + n * math.log(self.rho) - math.lgamma(n + 1)
        return abs(self.tab[2, n] / math.exp(log_exact) - 1)


# -- exact resolution of ambiguous choices ------------------------------------------------


class _Resolver:
    """Decides a choice the float tables left open, from the same uniform refined with more bits.

    First with the scaled tables in ``MP_PREC``-bit precision, whose relative
    error is below ``MP_EPS`` (all terms are positive, so rounding errors only
    accumulate along the recurrence); if the uniform is still too close to a
    boundary, with exact integer counts.  Either way the chosen cell is the
    one the infinitely precise uniform falls in.
    """

    def __init__(self, cache: CountCache, uniforms, bits_stream: RngStream, n: int):
        self.cache = cache
        self.uniforms = uniforms
        self.bits_stream = bits_stream
        self.n = n

    def exact_weights(self, dkind, params):
        c = self.cache
        if dkind == kp.D_REP:
            idx = params[0]
            r0, r1 = int(c.rep_offsets[idx]), int(c.rep_offsets[idx + 1])
            return list(range(r0, r1)), c.rep_label_counts[r0:r1]
        if dkind == kp.D_PERM:
            return list(range(params[0])), [1] * params[0]
        m = params[0]
        ex = c.exact(m)
        if dkind == kp.D_TOP:
            return [0, 1], [ex["alpha"][m], ex["sigma"][m]]
        if dkind == kp.D_NOT:
            return [0, 1], [ex["pi"][m], ex["sigma"][m]]
        if dkind in (kp.D_SET_FIRST, kp.D_SET_REST):
            hi = m - 1 if dkind == kp.D_SET_FIRST else m
            row = BINOM.row(m - 1)
            outs = list(kp.zigzag(1, hi))
            return outs, [row[j - 1] * ex["alpha"][j] * ex["E"][m - j] for j in outs]
        if dkind == kp.D_PRIME_K:
            outs = list(range(len(c.sizes)))
            ws = []
            for i in outs:
                k = int(c.sizes[i])
                ws.append(c.cls.count(k) * ex[f"U{k}"][m] if k <= m else 0)
            return outs, ws
        if dkind == kp.D_SETK:
            k = params[1]
            row = BINOM.row(m - 1)
            outs = list(kp.zigzag(1, m - k + 1))
            prev = ex[f"U{k - 1}"]
            return outs, [row[j - 1] * ex["tau"][j] * prev[m - j] for j in outs]
        if dkind == kp.D_SEQ:
            jj = max(params[1] - 1, 0)
            row = BINOM.row(m)
            outs = list(kp.zigzag(1, m - jj))
            prev = ex[f"W{jj}"]
            return outs, [row[i] * ex["tau"][i] * prev[m - i] for i in outs]
        raise ValueError(f"unknown decision {dkind}")

    def mp_weights(self, dkind, params):
        """Weights proportional to the exact ones, from the high-precision scaled tables."""
        m = params[0]
        tab = self.cache.mp_tables(m)
        a, s, t, e, pi = tab[0], tab[1], tab[2], tab[3], tab[4]
        mf = gmpy2.mpfr(int(m))
        if dkind == kp.D_TOP:
            return [0, 1], [a[m], s[m]]
        if dkind == kp.D_NOT:
            return [0, 1], [pi[m], s[m]]
        if dkind in (kp.D_SET_FIRST, kp.D_SET_REST):
            hi = m - 1 if dkind == kp.D_SET_FIRST else m
            outs = list(kp.zigzag(1, hi))
            return outs, [gmpy2.mpfr(int(j)) / mf * a[j] * e[m - j] for j in outs]
        if dkind == kp.D_PRIME_K:
            c = self.cache
            outs = list(range(len(c.sizes)))
            ws = []
            for i in outs:
                k = int(c.sizes[i])
                ws.append(c.cls.count(k) * tab[4 + k][m] if k <= m else gmpy2.mpfr(0))
            return outs, ws
        if dkind == kp.D_SETK:
            k = params[1]
            outs = list(kp.zigzag(1, m - k + 1))
            prev = tab[4 + k - 1]
            return outs, [gmpy2.mpfr(int(j)) / mf * t[j] * prev[m - j] for j in outs]
        if dkind == kp.D_SEQ:
            jj = max(params[1] - 1, 0)
            outs = list(kp.zigzag(1, m - jj))
            prev = tab[5 + jj]
            return outs, [t[i] * prev[m - i] for i in outs]
        raise ValueError(f"unknown decision {dkind}")

    def __call__(self, dkind, params, ui):
        # the uniform is k / 2^bits, refined by further random words when needed
        state = [int(self.uniforms[ui] * 2.0**53), 53]
        more = self.bits_stream.sub(ui).generator()

        def refine():
            state[0] = (state[0] << 64) | int(more.integers(0, 2**64, dtype=np.uint64))
            state[1] += 64

        if dkind not in (kp.D_REP, kp.D_PERM):
            with gmpy2.context(gmpy2.get_context(), precision=MP_PREC + 64):
                outs, ws = self.mp_weights(dkind, params)
                total = sum(ws, gmpy2.mpfr(0))
                slack = 4 * MP_EPS * total
                cums = [gmpy2.mpfr(0)]
                for w in ws:
                    cums.append(cums[-1] + w)
                while state[1] <= MP_PREC - 64:
                    lo_val = gmpy2.mpfr(state[0]) * total / gmpy2.mpfr(2) ** state[1]
                    hi_val = gmpy2.mpfr(state[0] + 1) * total / gmpy2.mpfr(2) ** state[1]
                    for i in range(len(ws)):
                        if cums[i] + slack <= lo_val and hi_val <= cums[i + 1] - slack:
                            return outs[i]
                    refine()
        outs, ws = self.exact_weights(dkind, params)
        total = sum(ws)
        cums = [0]
        for w in ws:
            cums.append(cums[-1] + w)
        while True:
            k, bits = state
            lo_val = k * total
            hi_val = (k + 1) * total
            scale = 1 << bits
            for i in range(len(ws)):
                if cums[i] * scale <= lo_val and hi_val <= cums[i + 1] * scale:
                    return outs[i]
            refine()


# -- sampled shapes --------------------------------------------------------------------


@dataclass
class Shape:
    """A tree drawn with canonical labels: subtree leaves form contiguous ranges."""

    n: int
    kind: np.ndarray
    lo: np.ndarray
    size: np.ndarray
    parent: np.ndarray
    aux: np.ndarray
    perm_data: np.ndarray
    cache: CountCache
    exact_path: bool = False

    @cached_property
    def children(self) -> list[list[int]]:
        ch: list[list[int]] = [[] for _ in range(len(self.kind))]
        par = self.parent.tolist()
        for i in range(1, len(par)):
            ch[par[i]].append(i)
        return ch

    def decoration(self, i: int):
        k = int(self.kind[i])
        if k == kp.JOIN:
            return JOIN
        if k == kp.UNION:
            return UNION
        nch = len(self.children[i])
        if k == kp.PATH:
            return LabeledGraph.path(nch)
        off = int(self.aux[i])
        rep = self.cache.reps[int(self.perm_data[off])]
        perm = [int(x) for x in self.perm_data[off + 1 : off + 1 + nch]]
        edges = [(x + 1, y + 1) for x in range(nch) for y in range(x + 1, nch) if rep.has_edge(perm[x] + 1, perm[y] + 1)]
        return LabeledGraph.from_edges(nch, edges)

    def to_tree(self, labels: np.ndarray | None = None) -> Tree:
        """The tree, leaf at canonical position ``c`` labeled ``labels[c]`` (default ``c + 1``)."""
        built: list[Tree | None] = [None] * len(self.kind)
        kinds = self.kind.tolist()
        los = self.lo.tolist()
        for i in range(len(kinds) - 1, -1, -1):
            if kinds[i] == kp.LEAF:
                c = los[i]
                built[i] = Leaf(int(labels[c]) if labels is not None else c + 1)
            else:
                built[i] = Node.build(self.decoration(i), [built[c] for c in self.children[i]])
        return built[0]

    def adjacency(self) -> np.ndarray:
        """Adjacency matrix in canonical labels (``uint8``)."""
        adj = np.zeros((self.n, self.n), dtype=np.uint8)
        c = self.cache
        kernels.fill_adjacency(
            adj, len(self.kind), self.kind, self.lo, self.size, self.parent, self.aux, self.perm_data, c.rep_adj, c.rep_k
        )
        return adj

    def leaf_paths(self):
        """For each canonical leaf position, the item index of that leaf."""
        out = np.empty(self.n, dtype=np.int64)
        leaves = np.nonzero(self.kind == kp.LEAF)[0]
        out[self.lo[leaves]] = leaves
        return out


def sample_shape(cache: CountCache, n: int, rng: RngStream, backend: str | None = None) -> Shape:
    """Draw a canonical shape of size ``n``; exact fallback on ambiguous choices."""
    if n < 1 or n > cache.order:
        raise ContractError(f"size {n} outside 1..{cache.order}")
    if cache.tab[2, n] <= 0:
        raise NoObjectError(f"no tree of size {n} in the class")
    gen = rng.generator()
    buf = gen.random(4 * n + 64)
    cap = 2 * n + 1
    outs = [np.empty(cap, dtype=np.int64) for _ in range(5)]
    perm_out = np.empty(2 * n + 2, dtype=np.int64)
    fn = kernels.generate_shape if backend != "python" else kernels.generate_shape_py
    args = (cache.tab, cache.paths, cache.sizes, cache.size_weights, cache.rep_offsets, cache.rep_weights, n)
    exact_path = False
    resolver = None
    while True:
        status, items, plen, _ = fn(*args, buf, GUARD, *outs, perm_out, resolve=resolver)
        if status == kp.NEED_MORE:
            buf = np.concatenate([buf, gen.random(len(buf))])
            continue
        if status == kp.AMBIGUOUS:
            fn = kernels.generate_shape_py
            resolver = _Resolver(cache, buf, rng.sub(2), n)
            exact_path = True
            continue
        break
    kind, lo, size, parent, aux = (o[:items].copy() for o in outs)
    return Shape(n, kind, lo, size, parent, aux, perm_out[:plen].copy(), cache, exact_path)


def _relabeling(n: int, rng: RngStream) -> np.ndarray:
    return rng.sub(1).generator().permutation(n)


def sample_uniform_tree(cls: PrimeClass, n: int, cache: CountCache, rng: RngStream) -> Tree:
    """Uniform tree of ``T_P`` with ``n`` leaves."""
    if cache.cls is not cls and cache.cls.to_obj() != cls.to_obj():
        raise ContractError("cache was built for another class")
    shape = sample_shape(cache, n, rng)
    sigma = _relabeling(n, rng)
    return shape.to_tree(sigma + 1)


def sample_adjacency(cache: CountCache, n: int, rng: RngStream, relabel: bool = True) -> np.ndarray:
    shape = sample_shape(cache, n, rng)
    adj = shape.adjacency()
    if relabel:
        inv = np.argsort(_relabeling(n, rng))
        adj = adj[np.ix_(inv, inv)]
    return adj


def sample_uniform_graph(cls: PrimeClass, n: int, cache: CountCache, rng: RngStream) -> LabeledGraph:
    """Uniform graph of ``G_P`` with ``n`` vertices (the graph of a uniform tree)."""
    if cache.cls is not cls and cache.cls.to_obj() != cls.to_obj():
        raise ContractError("cache was built for another class")
    return LabeledGraph.from_numpy(sample_adjacency(cache, n, rng).astype(bool))


# -- limit objects and injections ---------------------------------------------------------------


def sample_binary_tree(k: int, p: float, rng) -> Tree:
    """Uniform binary tree on leaves ``1..k`` (leaf insertion), join w.p. ``p`` at each node."""
    gen = _as_rng(rng)
    if k < 1:
        raise ContractError("k must be positive")
    # node table: parent pointers; leaves 0..k-1 are nodes 0..k-1
    parent = [-1]
    is_leaf = [True]
    label = [1]
    for j in range(2, k + 1):
        v = int(gen.integers(len(parent)))
        w = len(parent)
        parent.append(parent[v])
        is_leaf.append(False)
        label.append(0)
        parent[v] = w
        parent.append(w)
        is_leaf.append(True)
        label.append(j)
    decs = [JOIN if gen.random() < p else UNION for _ in parent]
    kids: list[list[int]] = [[] for _ in parent]
    root = -1
    for v, pv in enumerate(parent):
        if pv < 0:
            root = v
        else:
            kids[pv].append(v)

    def build(v):
        if is_leaf[v]:
            return Leaf(label[v])
        return Node.build(decs[v], [build(c) for c in kids[v]])

    return build(root)


def sample_brownian_cographon(k: int, p: float, rng) -> LabeledGraph:
    """Graph on ``k`` points sampled from the Brownian cographon with parameter ``p``."""
    if not 0 <= p <= 1:
        raise ContractError("p must lie in [0, 1]")
    return graph_of(sample_binary_tree(k, p, rng))


def sample_injection(n: int, ell: int, rng) -> dict[int, int]:
    """Uniform injection from a subset of ``{1..n}`` onto ``{1..ell}``."""
    if ell > n or ell < 0:
        raise ContractError("need 0 <= ell <= n")
    gen = _as_rng(rng)
    dom = gen.choice(n, size=ell, replace=False) + 1
    return {int(d): i + 1 for i, d in enumerate(dom)}
