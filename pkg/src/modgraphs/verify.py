"""Acceptance checks: exact oracles and Monte Carlo comparisons with the limit predictions.

Each check returns a :class:`CriterionResult`; :func:`run` runs a selection and
:func:`summary` turns the results into a JSON-ready dict.  Seeds are fixed
constants so every run gives the same verdicts.
"""

from __future__ import annotations

import functools
import math
import time
from collections import Counter
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from . import oracles
from .analytic import (
    K2,
    count_ratio,
    identity_residuals,
    solve_constants,
)
from .classes import EMPTY, PathClass, load_class, p4_class
from .experiments import ExperimentConfig, pattern_name, run_density, run_scaling, tuple_codes
from .graph import LabeledGraph, all_labeled_graphs, are_isomorphic, graph_code, iso_classes
from .sampler import CountCache, RngStream, sample_adjacency, sample_brownian_cographon
from .series import admissible_node_sets, class_counts, solve_tree_series, t_tau_series_long, t_tau_total
from .tree import (
    JOIN,
    UNION,
    Leaf,
    Node,
    double_factorial,
    edge_count,
    expanded_trees,
    graph_of,
    is_in_class,
    is_linear,
    is_md_tree,
    iter_nodes,
    modular_decomposition,
)

SEED = 20250601

# Monte Carlo sizes
DRAWS_SAMPLER = 100_000
DRAWS_GRAPHON = 100_000
DENSITY_N = 2000
DENSITY_SAMPLES = 1000
DENSITY_INJECTIONS = 2000
SUBTREE_N = 1000
SUBTREE_SAMPLES = 1000
SUBTREE_INJECTIONS = 100
SCALING_SIZES = (250, 500, 1000)
SCALING_SAMPLES = 100_000
SCALING_INJECTIONS = 20_000

PATHS_P_TARGET = 0.288


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"criterion {self.number:2d} {verdict}: {self.name}: {self.detail} ({self.seconds:.1f} s)"


def _classes():
    return {"empty": EMPTY, "p4": p4_class(), "paths": PathClass()}


# -- exact checks ---------------------------------------------------------------------------


def criterion_1() -> tuple[bool, str]:
    parts = []
    ok = True
    for name in ("empty", "p4"):
        cls = _classes()[name]
        series = class_counts(cls, 6)[1:7]
        brute = [oracles.class_graph_counts(cls, n, is_in_class) for n in range(1, 7)]
        ok &= series == brute
        parts.append(f"{name} series {series} brute {brute}")
    ok &= class_counts(EMPTY, 6)[1:7] == [1, 2, 8, 52, 472, 5504]
    return ok, "; ".join(parts)


def criterion_2() -> tuple[bool, str]:
    checked = 0
    for n in range(1, 7):
        for g in all_labeled_graphs(n):
            t = modular_decomposition(g)
            if graph_of(t) != g or not is_md_tree(t):
                return False, f"round trip failed on {g}"
            checked += 1
    return True, f"{checked} graphs"


def _derivative_coeffs(cls, k: int, order: int) -> list[Fraction]:
    # P^(k)(z) = sum_j p_{j+k} z^j / j!
    p = cls.egf_coefficients(order + k)
    return [p[j + k] * math.factorial(j + k) / math.factorial(j) for j in range(order + 1)]


def criterion_3() -> tuple[bool, str]:
    order = 10
    ok = True
    parts = []
    for name, ks in (("p4", range(1, 5)), ("paths", range(1, 4))):
        cls = _classes()[name]
        for k in ks:
            total = [Fraction(0)] * (order + 1)
            for g in all_labeled_graphs(k):
                for j, c in enumerate(cls.occ_series_coefficients(g, order)):
                    total[j] += c
            good = total == _derivative_coeffs(cls, k, order)
            ok &= good
            parts.append(f"{name} k={k} {'ok' if good else 'mismatch'}")
    return ok, ", ".join(parts)


def criterion_4() -> tuple[bool, str]:
    c = solve_constants(EMPTY)
    gaps = {
        "kappa": abs(c.kappa - math.log(2)),
        "R": abs(c.R - (2 * math.log(2) - 1)),
        "K": abs(c.K - 1),
        "p": abs(c.p - 0.5),
    }
    ok = all(v < 1e-9 for v in gaps.values())
    idents = {}
    for name, cls in _classes().items():
        res = identity_residuals(cls, solve_constants(cls))["K"]
        idents[name] = res
        ok &= res < 1e-9
    detail = ", ".join(f"|{k} gap| {v:.1e}" for k, v in gaps.items())
    detail += "; identity residuals " + ", ".join(f"{k} {v:.1e}" for k, v in idents.items())
    return ok, detail


def criterion_5() -> tuple[bool, str]:
    p = solve_constants(PathClass()).p
    return abs(p - PATHS_P_TARGET) <= 1e-3, f"p = {p:.9f}, target {PATHS_P_TARGET} +- 0.001"


def criterion_6() -> tuple[bool, str]:
    ok = True
    parts = []
    for name in ("empty", "p4"):
        cls = _classes()[name]
        counts = class_counts(cls, 200)
        c = solve_constants(cls)
        r50 = count_ratio(counts[50], 50, c)
        r200 = count_ratio(counts[200], 200, c)
        good = 0.9 <= r200 <= 1.1 and abs(r200 - 1) < abs(r50 - 1)
        ok &= good
        parts.append(f"{name} ratio n=50 {r50:.6f}, n=200 {r200:.6f}")
    return ok, "; ".join(parts)


# -- sampler checks --------------------------------------------------------------------------


def _code_of(adj: np.ndarray) -> int:
    n = adj.shape[0]
    return int(tuple_codes(adj, np.arange(n, dtype=np.int64)[None, :])[0])


def criterion_7() -> tuple[bool, str]:
    from scipy.stats import chisquare

    cache = CountCache(EMPTY, 4)
    allowed = sorted(graph_code(g) for g in all_labeled_graphs(4) if is_in_class(g, EMPTY))
    tally = Counter(_code_of(sample_adjacency(cache, 4, RngStream(SEED, 7, (i,)))) for i in range(DRAWS_SAMPLER))
    outside = sum(v for k, v in tally.items() if k not in set(allowed))
    observed = [tally.get(k, 0) for k in allowed]
    pval = float(chisquare(observed).pvalue)
    ok = outside == 0 and len(allowed) == 52 and pval > 1e-3
    parts = [f"empty: {len(allowed)} cographs, chi-square p-value {pval:.4f}, {outside} outside"]

    cache = CountCache(p4_class(), 4)
    p4 = LabeledGraph.path(4)
    p4_codes = {graph_code(g) for g in all_labeled_graphs(4) if are_isomorphic(g, p4)}
    hits = sum(_code_of(sample_adjacency(cache, 4, RngStream(SEED, 8, (i,)))) in p4_codes for i in range(DRAWS_SAMPLER))
    freq = hits / DRAWS_SAMPLER
    target = 12 / 64
    sigma = math.sqrt(target * (1 - target) / DRAWS_SAMPLER)
    good = abs(freq - target) <= 3 * sigma
    parts.append(f"p4: P4 frequency {freq:.5f}, target {target:.5f} +- {3 * sigma:.5f}")
    return ok and good, "; ".join(parts)


def criterion_8() -> tuple[bool, str]:
    ok = True
    parts = []
    k3 = LabeledGraph.complete(3)
    for j, p in enumerate((0.288, 0.5)):
        gen = np.random.Generator(np.random.Philox(np.random.SeedSequence(SEED, spawn_key=(80 + j,))))
        tri = edge = 0
        cographs = True
        for _ in range(DRAWS_GRAPHON):
            g3 = sample_brownian_cographon(3, p, gen)
            g2 = sample_brownian_cographon(2, p, gen)
            tri += are_isomorphic(g3, k3)
            edge += g2.edge_count() == 1
            cographs &= is_in_class(g3, EMPTY) and is_in_class(g2, EMPTY)
        f3, f2 = tri / DRAWS_GRAPHON, edge / DRAWS_GRAPHON
        s3 = math.sqrt(p**2 * (1 - p**2) / DRAWS_GRAPHON)
        s2 = math.sqrt(p * (1 - p) / DRAWS_GRAPHON)
        good = abs(f3 - p**2) <= 3 * s3 and abs(f2 - p) <= 3 * s2 and cographs
        ok &= good
        parts.append(f"p={p}: K3 {f3:.5f} vs {p**2:.5f}+-{3 * s3:.5f}, edge {f2:.5f} vs {p}+-{3 * s2:.5f}")
    return ok, "; ".join(parts)


def cographs_of_size(k: int) -> list[LabeledGraph]:
    return [g for g in iso_classes(k) if is_in_class(g, EMPTY)]


@functools.cache
def density_measurements() -> dict[str, dict]:
    """Densities at ``DENSITY_N`` for the empty and path classes (computed once)."""
    out = {}
    patterns = [K2] + cographs_of_size(4)
    for spec in ("builtin:empty", "builtin:paths"):
        p = solve_constants(load_class(spec)).p
        cfg = ExperimentConfig(spec, [DENSITY_N], DENSITY_SAMPLES, patterns, seed=SEED + 9,
                               injections=DENSITY_INJECTIONS)
        rep = run_density(cfg)
        gaps = {pattern_name(h): abs(rep.row(DENSITY_N, pattern_name(h)).empirical
                                     - rep.row(DENSITY_N, pattern_name(h)).predicted) for h in patterns[1:]}
        out[spec] = {"p": p, "k2": rep.row(DENSITY_N, "K2").empirical, "gaps": gaps}
    return out


def criterion_9() -> tuple[bool, str]:
    ok = True
    parts = []
    data = density_measurements()
    for spec, k2_target in (("builtin:empty", 0.5), ("builtin:paths", PATHS_P_TARGET)):
        d = data[spec]
        worst = max(d["gaps"].values())
        ok &= abs(d["k2"] - k2_target) <= 0.02 and worst <= 0.02
        parts.append(f"{spec}: K2 density {d['k2']:.4f} (target {k2_target}, class p {d['p']:.4f}), "
                     f"max |H|=4 gap {worst:.4f}")
    return ok, "; ".join(parts)


def criterion_10() -> tuple[bool, str]:
    cfg = ExperimentConfig("builtin:p4", [SUBTREE_N], SUBTREE_SAMPLES, [], seed=SEED + 10, subtree_size=3,
                           subtree_injections=SUBTREE_INJECTIONS)
    rep = run_density(cfg)
    rows = [r for r in rep.rows if r.statistic.startswith("subtree ")]
    nonbin = next(r for r in rows if r.statistic == "subtree non-binary").empirical
    shapes = [r for r in rows if r.statistic != "subtree non-binary"]
    worst = max(abs(r.empirical - r.predicted) for r in shapes)
    ok = len(shapes) == 12 and worst <= 0.02 and nonbin < 0.05
    return ok, f"{len(shapes)} binary shapes, max gap {worst:.4f}, non-binary frequency {nonbin:.4f}"


def criterion_11() -> tuple[bool, str]:
    cfg = ExperimentConfig("builtin:p4", list(SCALING_SIZES), SCALING_SAMPLES, [LabeledGraph.path(4)],
                           seed=SEED + 11, injections=SCALING_INJECTIONS)
    rep = run_scaling(cfg)
    ratios = [r.ratio for r in rep.rows]
    kh = rep.rows[0].predicted
    gaps = [abs(r - 1) for r in ratios]
    band = 0.5 <= ratios[-1] <= 2.0
    mono = all(a >= b for a, b in zip(gaps, gaps[1:]))
    desc = ", ".join(f"n={r.size} {r.empirical:.5f}+-{r.stderr:.5f} (ratio {r.ratio:.4f})" for r in rep.rows)
    return band and mono, f"K_H {kh:.6f}; {desc}"


def criterion_12() -> tuple[bool, str]:
    taus = {
        "join cherry": Node(JOIN, (Leaf(1), Leaf(2))),
        "union cherry": Node(UNION, (Leaf(1), Leaf(2))),
        "join(union(1,2),3)": Node.build(JOIN, [Node(UNION, (Leaf(1), Leaf(2))), Leaf(3)]),
    }
    ok = True
    parts = []
    for name in ("empty", "p4"):
        cls = _classes()[name]
        bundle = solve_tree_series(cls, 7)
        for label, tau in taus.items():
            series = t_tau_total(tau, cls, bundle).counts()[1:8]
            long_form = None
            for ns in admissible_node_sets(tau):
                s = t_tau_series_long(tau, ns, cls, bundle)
                long_form = s if long_form is None else long_form + s
            brute = [oracles.marked_tree_count(cls, tau, n) for n in range(1, 8)]
            good = series == brute and long_form.counts()[1:8] == brute
            ok &= good
            parts.append(f"{name} {label} {'ok' if good else f'{series} vs {brute}'}")
    return ok, ", ".join(parts)


def criterion_13() -> tuple[bool, str]:
    checked = trees = 0
    for n in range(1, 6):
        for g in all_labeled_graphs(n):
            md = modular_decomposition(g)
            expected = math.prod(double_factorial(2 * len(nd.children) - 3)
                                 for _, nd in iter_nodes(md) if is_linear(nd.dec))
            count, gen = expanded_trees(g)
            listed = list(gen)
            if count != expected or len(listed) != expected or len(set(listed)) != expected:
                return False, f"count mismatch on {g}"
            edges = 2 * n - 2 - sum(len(nd.children) - 2 for _, nd in iter_nodes(md) if not is_linear(nd.dec))
            for t in listed:
                if edge_count(t) != (edges if n > 1 else 0) or graph_of(t) != g:
                    return False, f"bad expanded tree of {g}"
            checked += 1
            trees += len(listed)
    return True, f"{checked} graphs, {trees} expanded trees"


CRITERIA = {
    1: ("exact counts vs brute force", criterion_1),
    2: ("decomposition round trip", criterion_2),
    3: ("occurrence series sum to derivatives", criterion_3),
    4: ("closed-form constants and identity", criterion_4),
    5: ("edge density constant of the path class", criterion_5),
    6: ("count asymptotics", criterion_6),
    7: ("sampler exactness", criterion_7),
    8: ("limit graphon sampler", criterion_8),
    9: ("pattern densities at n=2000", criterion_9),
    10: ("induced subtree distribution", criterion_10),
    11: ("occurrence scaling", criterion_11),
    12: ("marked tree series vs brute force", criterion_12),
    13: ("expanded trees", criterion_13),
}


def run(selected=None, echo=None) -> list[CriterionResult]:
    out = []
    for num in selected or sorted(CRITERIA):
        name, fn = CRITERIA[num]
        t0 = time.perf_counter()
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash is a failure of that criterion
            ok, detail = False, f"error: {exc!r}"
        res = CriterionResult(num, name, bool(ok), detail, time.perf_counter() - t0)
        out.append(res)
        if echo is not None:
            echo(res.line())
    return out


def summary(results: list[CriterionResult]) -> dict:
    return {
        "passed": all(r.passed for r in results),
        "criteria": [asdict(r) for r in results],
    }
