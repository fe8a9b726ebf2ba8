"""Command line front end: ``streamspanner gen|build|verify``.

Exit codes: 0 success, 1 a verification check failed, 2 usage error,
3 bad input (parse error, weight-order violation, guard exceeded).
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from dataclasses import dataclass

from . import graph_io, streamsort
from .core import build_sampling_hierarchy
from .graph_io import GraphFormatError
from .incremental import InvariantViolation, WeightOrderError, run_single_pass, run_sorted_weighted
from .runtime import StreamSortRuntime
from .verifier import (
    GuardExceeded,
    VerificationReport,
    check_cluster_invariants,
    check_cluster_radius,
    check_deletion_witnesses,
    check_property_P,
    check_streamsort_accounting,
    check_stretch,
)

MODELS = ("single-pass", "sorted-weighted", "streamsort")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INPUT = 0, 1, 2, 3


@dataclass
class RunConfig:
    command: str
    k: int = 2
    seed: int = 0
    model: str = "single-pass"
    input: str | None = None
    output: str | None = None
    check_invariants: bool = False
    guard: int = 3000

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _weight_range(text: str | None):
    if text is None:
        return None
    try:
        lo, hi = (int(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError("weights must look like LO:HI") from None
    if lo < 0 or hi < lo:
        raise argparse.ArgumentTypeError("need 0 <= LO <= HI")
    return lo, hi


def _generate(args) -> graph_io.EdgeStream:
    if args.gnp:
        n, p = int(args.gnp[0]), float(args.gnp[1])
        return graph_io.gen_gnp(n, p, args.seed, args.weights)
    if args.complete:
        return graph_io.gen_complete(args.complete, args.seed, args.weights)
    rows, cols = args.grid
    return graph_io.gen_grid(rows, cols, args.seed, args.weights)


def _add_generator_flags(p: argparse.ArgumentParser, required: bool) -> None:
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--gnp", nargs=2, metavar=("N", "P"), help="Erdos-Renyi G(N, P)")
    g.add_argument("--complete", type=int, metavar="N", help="complete graph on N vertices")
    g.add_argument("--grid", nargs=2, type=int, metavar=("R", "C"), help="R x C grid")
    p.add_argument("--weights", type=_weight_range, metavar="LO:HI",
                   help="integer weights uniform in [LO, HI] (default: unweighted)")


# -- build ---------------------------------------------------------------------------


def build(stream: graph_io.EdgeStream, cfg: RunConfig, presort: bool = False,
          storage: str = "memory") -> tuple[set, VerificationReport, object]:
    """Run one builder; returns (spanner edges, counters report, raw result)."""
    report = VerificationReport()
    report.metrics.update(model=cfg.model, k=cfg.k, seed=cfg.seed, n=stream.n)
    start = time.perf_counter()
    if cfg.model == "streamsort":
        with StreamSortRuntime(storage=storage) as rt:
            result = streamsort.run(cfg.k, cfg.seed, stream, stream.n, runtime=rt,
                                    snapshots=cfg.check_invariants)
        spanner = result.edge_set()
        report.metrics.update(
            m=sum(1 for _ in stream), spanner_size=len(spanner),
            pass_constant=streamsort.PASS_CONSTANT,
        )
        report.merge(check_streamsort_accounting(result))
        for line in result.accounting.report_lines():
            key, _, val = line.partition("=")
            report.metrics.setdefault(key, val)
        if cfg.check_invariants:
            for snap in result.snapshots:
                report.merge(check_property_P(snap, stream.n))
            report.merge(check_deletion_witnesses(result))
    else:
        h = build_sampling_hierarchy(stream.n, cfg.k, cfg.seed)
        if cfg.model == "sorted-weighted":
            source = graph_io.sort_by_weight(stream) if presort else stream
            state = run_sorted_weighted(h, source, check_invariants=cfg.check_invariants)
        else:
            state = run_single_pass(h, stream, check_invariants=cfg.check_invariants)
        result = state
        spanner = state.spanner_edges()
        report.metrics.update(m=state.edges_processed, spanner_size=len(spanner), **state.counters())
        if cfg.check_invariants:
            report.merge(check_cluster_invariants(state)).merge(check_cluster_radius(state))
    report.metrics["self_loops_dropped"] = stream.self_loops
    report.metrics["seconds"] = round(time.perf_counter() - start, 4)
    return spanner, report, result


def cmd_gen(args) -> int:
    stream = _generate(args)
    graph_io.write_edge_list(args.output, stream.n, stream, stream.weighted)
    return EXIT_OK


def cmd_build(args) -> int:
    cfg = RunConfig("build", k=args.k, seed=args.seed, model=args.model, input=args.input,
                    output=args.output, check_invariants=args.check_invariants)
    stream = graph_io.read_edge_stream(cfg.input)
    spanner, report, _ = build(stream, cfg, presort=args.presort, storage=args.storage)
    edges = sorted(spanner)
    if cfg.output:
        graph_io.write_edge_list(cfg.output, stream.n, edges, stream.weighted)
    _emit_report(report, args.report, to_stderr=cfg.output in (None, "-"))
    if cfg.output is None:
        graph_io.write_edge_list("-", stream.n, edges, stream.weighted)
    return EXIT_OK if report.ok else EXIT_FAIL


def _emit_report(report: VerificationReport, path: str | None, to_stderr: bool = False) -> None:
    text = "\n".join(report.lines()) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        (sys.stderr if to_stderr else sys.stdout).write(text)


def _stretch_target(args) -> float:
    if args.t is not None:
        return args.t
    return 2 * args.k - 1


def cmd_verify(args) -> int:
    if args.batch:
        return _verify_batch(args)
    g = graph_io.read_edge_stream(args.graph)
    s = graph_io.read_edge_stream(args.spanner)
    report = check_stretch(g.n, g, s, _stretch_target(args), mode=args.mode, guard=args.guard)
    _emit_report(report, args.report)
    if args.summary:
        report.write_summary(args.summary)
    return EXIT_OK if report.ok else EXIT_FAIL


def _verify_batch(args) -> int:
    failures = 0
    rows = []
    t = _stretch_target(args)
    for seed in range(args.seed, args.seed + args.seeds):
        args_seed = argparse.Namespace(**{**vars(args), "seed": seed})
        stream = _generate(args_seed)
        cfg = RunConfig("verify", k=args.k, seed=seed, model=args.model,
                        check_invariants=args.check_invariants, guard=args.guard)
        source = graph_io.sort_by_weight(stream) if cfg.model == "sorted-weighted" else stream
        spanner, report, _ = build(source, cfg)
        report.merge(check_stretch(stream.n, stream, spanner, t, mode=args.mode, guard=args.guard))
        failures += not report.ok
        rows.append((seed, report.metrics["m"], len(spanner), report.metrics["max_stretch_ratio"],
                     "pass" if report.ok else "FAIL"))
    print(f"{'seed':>6} {'m':>8} {'size':>8} {'stretch':>8} status")
    for seed, m, size, ratio, status in rows:
        print(f"{seed:>6} {m:>8} {size:>8} {ratio:>8.3f} {status}")
    print(f"runs={len(rows)} failures={failures} t={t}")
    return EXIT_OK if failures == 0 else EXIT_FAIL


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="streamspanner", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a generated graph as an edge list")
    _add_generator_flags(p, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("build", help="build a (2k-1)-spanner of an edge-list file")
    p.add_argument("input", help="edge-list file ('-' for stdin)")
    p.add_argument("--model", choices=MODELS, default="single-pass")
    p.add_argument("-k", type=_positive, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", help="spanner edge-list file (default: stdout)")
    p.add_argument("--report", help="write the key=value report here instead of the terminal")
    p.add_argument("--presort", action="store_true",
                   help="sorted-weighted model: sort by weight first instead of rejecting unsorted input")
    p.add_argument("--storage", choices=("memory", "file"), default="memory",
                   help="streamsort model: keep streams in memory or in temp files")
    p.add_argument("--check-invariants", action="store_true")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("verify", help="check stretch of a spanner against its graph")
    p.add_argument("graph", nargs="?")
    p.add_argument("spanner", nargs="?")
    p.add_argument("-t", type=float, help="stretch bound (default 2k-1)")
    p.add_argument("-k", type=_positive, default=2)
    p.add_argument("--mode", choices=("edges", "pairs"), default="edges")
    p.add_argument("--guard", type=int, default=3000, help="largest n the oracle accepts")
    p.add_argument("--report")
    p.add_argument("--summary", help="also write a JSON summary")
    p.add_argument("--batch", action="store_true", help="generate, build and verify over many seeds")
    p.add_argument("--seeds", type=int, default=25)
    p.add_argument("--seed", type=int, default=0, help="first seed in batch mode")
    p.add_argument("--model", choices=MODELS, default="single-pass")
    p.add_argument("--check-invariants", action="store_true")
    _add_generator_flags(p, required=False)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "verify" and args.batch and not (args.gnp or args.complete or args.grid):
        parser.error("--batch needs a generator (--gnp, --complete or --grid)")
    if args.command == "verify" and not args.batch and not (args.graph and args.spanner):
        parser.error("verify needs GRAPH and SPANNER files, or --batch")
    try:
        return args.func(args)
    except (GraphFormatError, WeightOrderError, GuardExceeded, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
