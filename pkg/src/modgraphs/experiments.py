"""Monte Carlo experiments that compare uniform random graphs of a class with the limit predictions.

Every sample ``i`` of size ``n`` is drawn from its own stream
``RngStream(seed, n, (i,))``, so a report depends only on the seed and the
configuration, not on how samples are split between workers.

All statistics here are invariant under relabeling of the vertices (they
average over uniform injections), so they are computed on the canonical
shape without applying the final uniform permutation.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels_py as kp
from .analytic import (
    decorated_binary_trees,
    predict_KH,
    predict_sample_prob,
    predict_subtree_prob,
    solve_constants,
)
from .classes import load_class
from .graph import ContractError, LabeledGraph, canonical_form, graph_code, induced_subgraph, iso_classes
from .sampler import CountCache, RngStream, Shape, sample_shape
from .tree import Leaf, Node, Tree, is_linear, normalize_dec

MAX_PATTERN = 7
STDERR_TARGET = 0.05

CLAIM_DENSITY = "pattern density of uniform graphs tends to the sampling probability of the limit graphon"
CLAIM_SUBTREE = "induced subtree on uniform leaves tends to a uniform binary tree with iid join/union labels"
CLAIM_SCALING = "expected occurrence count grows like K_H n^(|H|-beta(H))"


@dataclass
class ExperimentConfig:
    cls_spec: str
    sizes: list[int]
    samples: int
    patterns: list[LabeledGraph] = field(default_factory=list)
    seed: int = 0
    out: str | None = None
    injections: int | None = None
    subtree_size: int = 0
    subtree_injections: int = 100
    exhaustive_budget: int = 200_000
    injection_budget: int = 10**9
    jobs: int = 1
    order: int | None = None

    def check(self):
        if self.samples < 1:
            raise ContractError("samples must be at least 1")
        if not self.sizes or min(self.sizes) < 1:
            raise ContractError("sizes must be positive")
        if self.order is not None and max(self.sizes) > self.order:
            raise ContractError(f"size {max(self.sizes)} exceeds cache order {self.order}")
        for h in self.patterns:
            if h.n > MAX_PATTERN:
                raise ContractError(f"pattern too large: {h.n} > {MAX_PATTERN}")


@dataclass
class ReportRow:
    claim: str
    size: int
    statistic: str
    samples: int
    empirical: float
    stderr: float
    predicted: float
    ratio: float
    flag: str = ""


@dataclass
class ExperimentReport:
    rows: list[ReportRow] = field(default_factory=list)
    partial: bool = False

    def row(self, size: int, statistic: str) -> ReportRow:
        for r in self.rows:
            if r.size == size and r.statistic == statistic:
                return r
        raise KeyError((size, statistic))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["claim", "size", "statistic", "samples", "empirical", "stderr", "predicted", "ratio", "flag"])
        for r in self.rows:
            w.writerow([r.claim, r.size, r.statistic, r.samples, repr(r.empirical), repr(r.stderr),
                        repr(r.predicted), repr(r.ratio), r.flag])
        return buf.getvalue()

    def write(self, path: str | None):
        text = self.to_csv()
        if path is None or path == "-":
            print(text, end="")
        else:
            with open(path, "w", newline="") as fh:
                fh.write(text)


def _summary(claim, n, statistic, values: np.ndarray, predicted: float, flag: str = "") -> ReportRow:
    m = len(values)
    mean = float(values.mean())
    se = float(values.std(ddof=1) / math.sqrt(m)) if m > 1 else float("nan")
    ratio = mean / predicted if predicted else float("nan")
    return ReportRow(claim, n, statistic, m, mean, se, predicted, ratio, flag)


# -- injections --------------------------------------------------------------------------


def falling(n: int, k: int) -> int:
    out = 1
    for i in range(k):
        out *= n - i
    return out


def random_tuples(n: int, ell: int, m: int, gen: np.random.Generator) -> np.ndarray:
    """``m`` uniform ordered tuples of ``ell`` distinct vertices of ``{0..n-1}`` (rejection)."""
    if ell > n:
        raise ContractError("tuple longer than the vertex set")
    out = np.empty((m, ell), dtype=np.int64)
    filled = 0
    while filled < m:
        need = m - filled
        draw = gen.integers(0, n, size=(need + need // 8 + 16, ell))
        ok = np.ones(len(draw), dtype=bool)
        for a, b in itertools.combinations(range(ell), 2):
            ok &= draw[:, a] != draw[:, b]
        good = draw[ok][:need]
        out[filled : filled + len(good)] = good
        filled += len(good)
    return out


_ALL_TUPLES: dict[tuple[int, int], np.ndarray] = {}


def all_tuples(n: int, ell: int) -> np.ndarray:
    key = (n, ell)
    if key not in _ALL_TUPLES:
        _ALL_TUPLES[key] = np.array(list(itertools.permutations(range(n), ell)), dtype=np.int64).reshape(-1, ell)
    return _ALL_TUPLES[key]


def tuple_codes(adj: np.ndarray, tuples: np.ndarray) -> np.ndarray:
    """Adjacency bits of each ordered tuple, in the bit order of ``graph_code``."""
    ell = tuples.shape[1]
    code = np.zeros(len(tuples), dtype=np.int64)
    bit = 0
    for a in range(ell):
        for b in range(a + 1, ell):
            code |= adj[tuples[:, a], tuples[:, b]].astype(np.int64) << bit
            bit += 1
    return code


def _code_graph(code: int, ell: int) -> LabeledGraph:
    edges = []
    bit = 0
    for a in range(ell):
        for b in range(a + 1, ell):
            if (code >> bit) & 1:
                edges.append((a + 1, b + 1))
            bit += 1
    return LabeledGraph.from_edges(ell, edges)


_ISO_TABLE: dict[int, np.ndarray] = {}


def iso_code_table(ell: int) -> tuple[np.ndarray, list[LabeledGraph]]:
    """Index of the isomorphism class of every ``ell``-vertex code, and one graph per class."""
    classes = iso_classes(ell)
    keys = {canonical_form(g): i for i, g in enumerate(classes)}
    if ell not in _ISO_TABLE:
        npairs = ell * (ell - 1) // 2
        _ISO_TABLE[ell] = np.array([keys[canonical_form(_code_graph(c, ell))] for c in range(1 << npairs)],
                                   dtype=np.int64)
    return _ISO_TABLE[ell], classes


# -- induced subtrees on shapes ---------------------------------------------------------------


def shape_induced_subtree(shape: Shape, leaves, item_of: np.ndarray | None = None) -> Tree:
    """Induced subtree on canonical leaf positions ``leaves``; the ``i``-th one becomes leaf ``i+1``.

    Same tree as ``induced_subtree(shape.to_tree(), ...)`` without building the
    whole tree: only the ancestors of the marked leaves are visited.
    """
    if item_of is None:
        item_of = shape.leaf_paths()
    parent = shape.parent
    chains = []
    for c in leaves:
        chain = []
        i = int(item_of[int(c)])
        while i >= 0:
            chain.append(i)
            i = int(parent[i])
        chains.append(chain[::-1])
    children = shape.children

    def rec(marks: list[int], depth: int) -> Tree:
        if len(marks) == 1:
            return Leaf(marks[0] + 1)
        # descend while all marks share the next ancestor
        while all(len(chains[m]) > depth + 1 for m in marks) and len({chains[m][depth + 1] for m in marks}) == 1:
            depth += 1
        node = chains[marks[0]][depth]
        groups: dict[int, list[int]] = {}
        for m in marks:
            groups.setdefault(chains[m][depth + 1], []).append(m)
        dec = shape.decoration(node)
        subs = [(child, rec(g, depth + 1)) for child, g in groups.items()]
        if is_linear(dec):
            return Node.build(dec, [s for _, s in subs])
        subs.sort(key=lambda cs: cs[1].min_label)
        index = {ch: k for k, ch in enumerate(children[node])}
        relab = {index[ch] + 1: rank + 1 for rank, (ch, _) in enumerate(subs)}
        return Node.build(normalize_dec(induced_subgraph(dec, relab)), [s for _, s in subs])

    return rec(list(range(len(chains))), 0)


def tree_key(t: Tree) -> str:
    """Compact text of a decorated tree, e.g. ``join(union(1,2),3)``."""
    if isinstance(t, Leaf):
        return str(t.label)
    inner = ",".join(tree_key(c) for c in t.children)
    if is_linear(t.dec):
        return f"{t.dec}({inner})"
    return f"prime[{graph_code(t.dec)}]({inner})"


def is_binary(t: Tree) -> bool:
    if isinstance(t, Leaf):
        return True
    return len(t.children) == 2 and is_linear(t.dec) and all(is_binary(c) for c in t.children)


# -- workers ----------------------------------------------------------------------------------------

_WORKER: dict = {}


def _cache(cls_spec: str, order: int) -> CountCache:
    key = (cls_spec, order)
    if _WORKER.get("key") != key:
        _WORKER["key"] = key
        _WORKER["cache"] = CountCache(load_class(cls_spec), order)
    return _WORKER["cache"]


def _density_task(args):
    """Per-sample values for samples ``lo..hi-1`` of size ``n``."""
    cls_spec, order, seed, n, lo, hi, plan, sub_ell, sub_m, sub_keys = args
    cache = _cache(cls_spec, order)
    out = {key: np.zeros(hi - lo) for key in plan["keys"]}
    for key in sub_keys:
        out[key] = np.zeros(hi - lo)
    for j, i in enumerate(range(lo, hi)):
        rng = RngStream(seed, n, (i,))
        shape = sample_shape(cache, n, rng)
        adj = shape.adjacency() if plan["need_adj"] else None
        if plan["edges"]:
            out["K2"][j] = 2.0 * int(adj.sum(dtype=np.int64) // 2) / n**2
        for ell, (m, stats) in plan["tuples"].items():
            if m is None:
                tup = all_tuples(n, ell)
            else:
                tup = random_tuples(n, ell, m, rng.sub(3, ell).generator())
            codes = tuple_codes(adj, tup)
            scale = falling(n, ell) / n**ell / len(tup)
            for key, kind, target in stats:
                if kind == "iso":
                    hits = int(np.count_nonzero(plan["iso"][ell][codes] == target))
                else:
                    hits = int(np.count_nonzero(codes == target))
                out[key][j] = hits * scale
        if sub_ell:
            gen = rng.sub(4).generator()
            tally: dict[str, int] = {}
            nonbin = 0
            item_of = shape.leaf_paths()
            for _ in range(sub_m):
                leaves = gen.choice(n, size=sub_ell, replace=False)
                t = shape_induced_subtree(shape, leaves, item_of)
                if not is_binary(t):
                    nonbin += 1
                    continue
                k = tree_key(t)
                tally[k] = tally.get(k, 0) + 1
            for k in sub_keys:
                if k == "non-binary":
                    out[k][j] = nonbin / sub_m
                else:
                    out[k][j] = tally.get(k, 0) / sub_m
    return lo, out


def _run_tasks(config: ExperimentConfig, n: int, make_args):
    chunk = max(1, -(-config.samples // (4 * max(config.jobs, 1))))
    bounds = [(lo, min(lo + chunk, config.samples)) for lo in range(0, config.samples, chunk)]
    tasks = [make_args(lo, hi) for lo, hi in bounds]
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as ex:
            results = list(ex.map(_density_task, tasks))
    else:
        results = [_density_task(t) for t in tasks]
    merged: dict[str, np.ndarray] = {}
    for _, part in sorted(results, key=lambda r: r[0]):
        for k, v in part.items():
            merged.setdefault(k, []).append(v)
    return {k: np.concatenate(v) for k, v in merged.items()}


def _auto_injections(config: ExperimentConfig, predicted_hit: float) -> int:
    # enough injections that the injection noise alone stays below the stderr target
    if config.injections is not None:
        return config.injections
    if predicted_hit <= 0:
        return 1000
    total = 1.0 / (STDERR_TARGET**2 * predicted_hit)
    return max(100, math.ceil(total / config.samples))


def _setup(config: ExperimentConfig):
    config.check()
    cls = load_class(config.cls_spec)
    order = config.order or max(config.sizes)
    consts = solve_constants(cls)
    return cls, order, consts


def run_density(config: ExperimentConfig) -> ExperimentReport:
    """Empirical ``E[Occ_H] / n^|H|`` (isomorphic copies) and induced subtree frequencies."""
    cls, order, c = _setup(config)
    report = ExperimentReport()
    predicted: dict[str, float] = {}
    for h in config.patterns:
        predicted[pattern_name(h)] = predict_sample_prob(h, c.p)
    sub_keys: list[str] = []
    sub_pred: dict[str, float] = {}
    if config.subtree_size >= 2:
        for tau in decorated_binary_trees(config.subtree_size):
            k = tree_key(tau)
            sub_keys.append(k)
            sub_pred[k] = predict_subtree_prob(tau, c.p)
        sub_keys.append("non-binary")
        sub_pred["non-binary"] = 0.0
    for n in config.sizes:
        plan = _density_plan(config, n, predicted)
        vals = _run_tasks(config, n, lambda lo, hi: (config.cls_spec, order, config.seed, n, lo, hi, plan,
                                                     config.subtree_size, config.subtree_injections, sub_keys))
        for h in config.patterns:
            key = pattern_name(h)
            report.rows.append(_summary(CLAIM_DENSITY, n, key, vals[key], predicted[key], plan["flags"].get(key, "")))
        for k in sub_keys:
            report.rows.append(_summary(CLAIM_SUBTREE, n, "subtree " + k, vals[k], sub_pred[k]))
        report.partial |= any(plan["flags"].values())
    _flag_noisy(report)
    return report


def pattern_name(h: LabeledGraph) -> str:
    if h.n == 2 and h.edge_count() == 1:
        return "K2"
    return f"n{h.n}:" + ",".join(f"{a}-{b}" for a, b in h.edges())


def _density_plan(config: ExperimentConfig, n: int, predicted: dict[str, float], labeled: bool = False) -> dict:
    plan = {"keys": [], "tuples": {}, "iso": {}, "edges": False, "need_adj": False, "flags": {}}
    for h in config.patterns:
        key = pattern_name(h)
        plan["keys"].append(key)
        plan["need_adj"] = True
        if h.n > n:
            plan["flags"][key] = "pattern larger than graph"
            continue
        if key == "K2":
            plan["edges"] = True
            continue
        ell = h.n
        if labeled:
            kind, target = "labeled", graph_code(h)
        else:
            table, classes = iso_code_table(ell)
            plan["iso"][ell] = table
            kind, target = "iso", int(table[graph_code(h)])
        if ell not in plan["tuples"]:
            if falling(n, ell) <= config.exhaustive_budget:
                m = None
            else:
                hit = min(predicted.get(key, 0.0) * n**ell / falling(n, ell), 1.0)
                m = _auto_injections(config, hit)
                if m * config.samples > config.injection_budget:
                    m = max(1, config.injection_budget // config.samples)
                    plan["flags"][key] = "injection budget exhausted"
            plan["tuples"][ell] = (m, [])
        plan["tuples"][ell][1].append((key, kind, target))
    return plan


def _flag_noisy(report: ExperimentReport):
    for r in report.rows:
        if r.predicted and not r.flag and r.stderr > STDERR_TARGET * abs(r.predicted):
            r.flag = "stderr above target"


def run_scaling(config: ExperimentConfig) -> ExperimentReport:
    """Empirical ``E[Occ_H] n^(beta(H) - |H|)`` (labeled copies) against ``K_H``."""
    cls, order, c = _setup(config)
    report = ExperimentReport()
    for n in config.sizes:
        preds = {}
        for h in config.patterns:
            pred = predict_KH(h, c, cls)
            preds[pattern_name(h)] = (pred.K_H, float(pred.exponent))
        # predicted labeled density at this n, used only to size the injection sample
        dens = {k: kh * n**e / n ** _size_of(config, k) for k, (kh, e) in preds.items()}
        plan = _density_plan(config, n, dens, labeled=True)
        vals = _run_tasks(config, n, lambda lo, hi: (config.cls_spec, order, config.seed, n, lo, hi, plan, 0, 0, []))
        for h in config.patterns:
            key = pattern_name(h)
            kh, e = preds[key]
            # values are Occ / n^|H|; rescale to Occ / n^(|H| - beta)
            scaled = vals[key] * n ** (h.n - e)
            report.rows.append(_summary(CLAIM_SCALING, n, key, scaled, kh, plan["flags"].get(key, "")))
        report.partial |= any(plan["flags"].values())
    _flag_noisy(report)
    return report


def _size_of(config: ExperimentConfig, key: str) -> int:
    for h in config.patterns:
        if pattern_name(h) == key:
            return h.n
    raise KeyError(key)

