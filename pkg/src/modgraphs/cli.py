"""Command-line front end: ``modgraphs <subcommand> [options]``."""

from __future__ import annotations

import argparse
import json
import sys

from .analytic import ConditionError, count_ratio, predict_count, solve_constants
from .classes import load_class
from .experiments import ExperimentConfig, run_density, run_scaling
from .graph import ContractError, GraphFormatError, LabeledGraph, format_graph, occ_count, occ_count_labeled, parse_graph
from .sampler import CountCache, NoObjectError, RngStream, sample_adjacency
from .series import class_counts
from .tree import dump_tree, modular_decomposition

BUILTIN_PATTERNS = {
    "K2": LabeledGraph.complete(2),
    "K3": LabeledGraph.complete(3),
    "P3": LabeledGraph.path(3),
    "P4": LabeledGraph.path(4),
    "C4": LabeledGraph.cycle(4),
    "K4": LabeledGraph.complete(4),
}


class UsageError(Exception):
    pass


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _write(args, text: str):
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)


def _class(args):
    try:
        return load_class(args.cls)
    except FileNotFoundError:
        raise UsageError(f"class file not found: {args.cls}") from None


def _pattern(spec: str) -> LabeledGraph:
    if spec in BUILTIN_PATTERNS:
        return BUILTIN_PATTERNS[spec]
    return parse_graph(_read_text(spec))


def _patterns(specs: list[str]) -> list[LabeledGraph]:
    out = []
    for s in specs:
        if s == "cographs4":
            from .verify import cographs_of_size

            out.extend(cographs_of_size(4))
        else:
            out.append(_pattern(s))
    return out


# -- subcommands -------------------------------------------------------------------------------


def cmd_decompose(args) -> int:
    g = parse_graph(_read_text(args.graph))
    _write(args, dump_tree(modular_decomposition(g)))
    return 0


def cmd_counts(args) -> int:
    cls = _class(args)
    order = args.n if args.n is not None else args.order
    counts = class_counts(cls, order)
    try:
        c = solve_constants(cls)
    except ConditionError as exc:
        print(f"note: no prediction, class fails the growth condition ({exc})", file=sys.stderr)
        c = None
    lines = []
    for n in range(1, order + 1):
        row = [str(n), str(counts[n])]
        if c is not None:
            row += [f"{predict_count(n, c):.12g}", f"{count_ratio(counts[n], n, c):.12g}"]
        lines.append("\t".join(row))
    _write(args, "\n".join(lines) + "\n")
    return 0


def cmd_constants(args) -> int:
    c = solve_constants(_class(args))
    _write(args, "".join(f"{k}\t{v:#.12g}\n" for k, v in c.as_dict().items()))
    return 0


def cmd_sample(args) -> int:
    cls = _class(args)
    cache = CountCache(cls, max(args.n, 1))
    texts = []
    for i in range(args.count):
        adj = sample_adjacency(cache, args.n, RngStream(args.seed, args.n, (i,)))
        texts.append(format_graph(LabeledGraph.from_numpy(adj.astype(bool))))
    if args.split:
        if args.out in (None, "-"):
            raise UsageError("--split needs --out")
        width = len(str(args.count - 1))
        for i, t in enumerate(texts):
            with open(f"{args.out}.{i:0{width}d}", "w") as fh:
                fh.write(t)
    else:
        _write(args, "\n".join(texts))
    return 0


def cmd_occ(args) -> int:
    h = _pattern(args.pattern)
    g = parse_graph(_read_text(args.graph))
    _write(args, f"isomorphic\t{occ_count(h, g)}\nlabeled\t{occ_count_labeled(h, g)}\n")
    return 0


def _config(args) -> ExperimentConfig:
    return ExperimentConfig(
        cls_spec=args.cls,
        sizes=args.sizes,
        samples=args.samples,
        patterns=_patterns(args.pattern or []),
        seed=args.seed,
        out=args.out,
        injections=args.injections,
        jobs=args.jobs,
        order=args.order if args.order_given else None,
        **({"subtree_size": args.subtree, "subtree_injections": args.subtree_injections}
           if hasattr(args, "subtree") else {}),
    )


def cmd_density(args) -> int:
    _class(args)
    report = run_density(_config(args))
    report.write(args.out)
    if report.partial:
        print("note: report is partial (see flag column)", file=sys.stderr)
    return 0


def cmd_scaling(args) -> int:
    _class(args)
    report = run_scaling(_config(args))
    report.write(args.out)
    if report.partial:
        print("note: report is partial (see flag column)", file=sys.stderr)
    return 0


def cmd_verify(args) -> int:
    from . import verify

    selected = args.only or None
    results = verify.run(selected, echo=lambda line: print(line, file=sys.stderr, flush=True))
    text = json.dumps(verify.summary(results), indent=1) + "\n"
    _write(args, text)
    return 0 if all(r.passed for r in results) else 1


# -- parser --------------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    # global flags are accepted before or after the subcommand; the copy on the
    # subcommands has no defaults so it does not overwrite the global value
    def flags(parser, defaults=True):
        d = (lambda v: v) if defaults else (lambda v: argparse.SUPPRESS)
        parser.add_argument("--class", dest="cls", default=d("builtin:empty"),
                            help="class file or builtin:paths|builtin:empty|builtin:p4")
        parser.add_argument("--seed", type=int, default=d(0))
        parser.add_argument("--order", type=int, default=d(None), help="series / cache order")
        parser.add_argument("--out", default=d(None), help="output path (default stdout)")
        parser.add_argument("--jobs", type=int, default=d(1))
        return parser

    common = flags(argparse.ArgumentParser(add_help=False), defaults=False)
    p = flags(argparse.ArgumentParser(prog="modgraphs", description=__doc__))
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("decompose", parents=[common], help="modular decomposition tree of a graph file")
    s.add_argument("graph")
    s.set_defaults(func=cmd_decompose)

    s = sub.add_parser("counts", parents=[common], help="exact counts and asymptotic prediction")
    s.add_argument("n", type=int, nargs="?")
    s.set_defaults(func=cmd_counts)

    s = sub.add_parser("constants", parents=[common], help="singularity constants of the class")
    s.set_defaults(func=cmd_constants)

    s = sub.add_parser("sample", parents=[common], help="uniform random graphs of the class")
    s.add_argument("n", type=int)
    s.add_argument("--count", type=int, default=1)
    s.add_argument("--split", action="store_true", help="one file per sample: OUT.0, OUT.1, ...")
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("occ", parents=[common], help="occurrences of a pattern in a graph")
    s.add_argument("pattern", help="graph file or one of " + ", ".join(BUILTIN_PATTERNS))
    s.add_argument("graph")
    s.set_defaults(func=cmd_occ)

    for name, func, helptext in (("density", cmd_density, "pattern densities and induced subtrees"),
                                 ("scaling", cmd_scaling, "growth of expected occurrence counts")):
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("--sizes", type=int, nargs="+", required=True)
        s.add_argument("--samples", type=int, default=100)
        s.add_argument("--pattern", action="append", help="graph file, builtin name or cographs4; repeatable")
        s.add_argument("--injections", type=int, default=None, help="random injections per graph")
        if name == "density":
            s.add_argument("--subtree", type=int, default=0, help="leaves of the induced subtree statistic")
            s.add_argument("--subtree-injections", type=int, default=100)
        s.set_defaults(func=func)

    s = sub.add_parser("verify", parents=[common], help="run the acceptance checks")
    s.add_argument("--only", type=int, nargs="+", help="criterion numbers")
    s.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.order_given = args.order is not None
    if args.order is None:
        args.order = 20
    try:
        return args.func(args)
    except GraphFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (UsageError, ContractError, NoObjectError, ConditionError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
