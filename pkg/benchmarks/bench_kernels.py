"""Compare the compiled and pure-Python sampling kernels.

    python benchmarks/bench_kernels.py --sizes 100 500 2000 --reps 20

For every size the same uniform buffer is fed to both implementations; the
shapes must agree item for item, then the two are timed separately.
"""

from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from modgraphs import _kernels_py, kernels
from modgraphs.classes import load_class
from modgraphs.sampler import GUARD, CountCache, RngStream

try:
    from modgraphs import _kernels as compiled
except ImportError:
    compiled = None


def run_shape(fn, cache, n, buf):
    cap = 2 * n + 1
    outs = [np.empty(cap, dtype=np.int64) for _ in range(5)]
    perm = np.empty(2 * n + 2, dtype=np.int64)
    args = (cache.tab, cache.paths, cache.sizes, cache.size_weights, cache.rep_offsets, cache.rep_weights, n)
    status, items, plen, used = fn(*args, buf, GUARD, *outs, perm)
    return status, [o[:items].copy() for o in outs], perm[:plen].copy()


def run_fill(fn, cache, n, shape):
    (kind, lo, size, parent, aux), perm = shape
    adj = np.zeros((n, n), dtype=np.uint8)
    fn(adj, len(kind), kind, lo, size, parent, aux, perm, cache.rep_adj, cache.rep_k)
    return adj


def timed(f, reps):
    out = []
    for _ in range(reps):
        t0 = time.perf_counter()
        f()
        out.append(time.perf_counter() - t0)
    return statistics.median(out)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--class", dest="cls", default="builtin:p4")
    ap.add_argument("--sizes", type=int, nargs="+", default=[100, 500, 2000])
    ap.add_argument("--reps", type=int, default=10)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args(argv)

    if compiled is None:
        print("compiled kernels not built; only the pure-Python timings are shown")
    cache = CountCache(load_class(args.cls), max(args.sizes))
    print(f"class {args.cls}, backend in use: {kernels.backend()}")
    print(f"{'n':>6} {'kernel':>14} {'python ms':>11} {'compiled ms':>12} {'speedup':>8}")
    for n in args.sizes:
        buf = RngStream(args.seed, n).generator().random(8 * n + 64)
        st_py, outs_py, perm_py = run_shape(_kernels_py.generate_shape, cache, n, buf)
        if st_py != _kernels_py.OK:
            print(f"{n:>6} shape status {st_py}, pick another seed")
            continue
        shape = (outs_py, perm_py)
        t_py = timed(lambda: run_shape(_kernels_py.generate_shape, cache, n, buf), args.reps)
        f_py = timed(lambda: run_fill(_kernels_py.fill_adjacency, cache, n, shape), args.reps)
        if compiled is not None:
            st_c, outs_c, perm_c = run_shape(compiled.generate_shape, cache, n, buf)
            same = st_c == st_py and all(np.array_equal(a, b) for a, b in zip(outs_c, outs_py))
            same &= np.array_equal(perm_c, perm_py)
            same &= np.array_equal(run_fill(compiled.fill_adjacency, cache, n, shape),
                                   run_fill(_kernels_py.fill_adjacency, cache, n, shape))
            if not same:
                raise SystemExit(f"compiled and pure kernels disagree at n={n}")
            t_c = timed(lambda: run_shape(compiled.generate_shape, cache, n, buf), args.reps)
            f_c = timed(lambda: run_fill(compiled.fill_adjacency, cache, n, shape), args.reps)
            print(f"{n:>6} {'shape':>14} {1e3 * t_py:>11.3f} {1e3 * t_c:>12.3f} {t_py / t_c:>8.1f}")
            print(f"{n:>6} {'adjacency':>14} {1e3 * f_py:>11.3f} {1e3 * f_c:>12.3f} {f_py / f_c:>8.1f}")
        else:
            print(f"{n:>6} {'shape':>14} {1e3 * t_py:>11.3f} {'-':>12} {'-':>8}")
            print(f"{n:>6} {'adjacency':>14} {1e3 * f_py:>11.3f} {'-':>12} {'-':>8}")


if __name__ == "__main__":
    main()
