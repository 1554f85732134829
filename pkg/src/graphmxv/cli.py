"""``graphmxv`` command line: BFS/SSSP runs, matvec sweeps, ablation, RMAT output."""

from __future__ import annotations

import argparse
import sys
from contextlib import contextmanager

import numpy as np

from . import bench
from .algorithms import BfsOptions, SsspOptions, bfs_reference, sssp, sssp_reference
from .containers import Toggles
from .graphio import generate_rmat, load_graph, preprocess, write_graph
from .kernels import set_threads

MODE_NAMES = {
    "push": "push_only",
    "push-only": "push_only",
    "pull": "pull_only",
    "pull-only": "pull_only",
    "do": "direction_optimized",
}


class CliError(Exception):
    pass


@contextmanager
def _output(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _info(msg: str) -> None:
    print(msg, file=sys.stderr)


def _load(args, weighted: bool = False):
    if not args.graph:
        raise CliError("--graph is required")
    e = preprocess(load_graph(args.graph, args.format), make_undirected=args.undirected)
    if e.num_rows != e.num_cols:
        raise CliError(f"graph must be square, got {e.num_rows}x{e.num_cols}")
    A = e.to_matrix()
    return A if weighted else A.pattern()


def _sources(args, A) -> list[int]:
    if args.source is not None:
        if not 0 <= args.source < A.num_rows:
            raise CliError(f"source {args.source} out of range for {A.num_rows} vertices")
        return [args.source]
    if A.num_rows == 0:
        raise CliError("graph has no vertices")
    return bench.pick_sources(A, args.sources, args.seed, not args.any_source)


def _toggles(args) -> Toggles:
    return Toggles(
        masking=not args.no_masking,
        early_exit=not args.no_early_exit,
        operand_reuse=not args.no_operand_reuse,
        structure_only=not args.no_structure_only,
        change_of_direction=not args.no_direction,
    )


def cmd_bfs(args) -> int:
    A = _load(args)
    sources = _sources(args, A)
    mode = MODE_NAMES[args.mode]
    combos = bench.toggle_matrix() if args.all_toggles_matrix else [_toggles(args)]
    columns = bench.TRACE_COLUMNS
    if args.all_toggles_matrix:
        columns = Toggles.NAMES + columns

    rows, ok = [], True
    first_report = None
    for tog in combos:
        opts = BfsOptions(args.alpha, args.beta, mode, tog, args.switchpoint)
        report = bench.run_bfs(A, sources, opts, args.repeats)
        first_report = first_report or report
        flags = {k: int(v) for k, v in tog.as_dict().items()}
        rows += [dict(flags, **r) for r in report.trace_rows()]
        if args.verify:
            for rec in report.records:
                ok &= bool(np.array_equal(rec.depths, bfs_reference(A, rec.source)))

    with _output(args.out) as fh:
        bench.write_csv(rows, columns, fh)
    if args.depths:
        _write_depths(args.depths, first_report, args.hops)
    agg = first_report.aggregate()
    _info(
        f"bfs: {agg['sources']} source(s), mean {agg['time_ns_mean'] / 1e6:.3f} ms, "
        f"mean {agg['mteps_mean']:.2f} MTEPS"
    )
    if args.verify:
        print("PASS" if ok else "FAIL", file=sys.stderr)
        return 0 if ok else 1
    return 0


def _write_depths(path, report, hops: bool) -> None:
    name = "hops" if hops else "depth"
    rows = []
    for rec in report.records:
        vals = rec.depths - 1 if hops else rec.depths
        rows += [{"source": rec.source, "vertex": v, name: int(d)} for v, d in enumerate(vals)]
    with _output(path) as fh:
        bench.write_csv(rows, ("source", "vertex", name), fh)


def cmd_sssp(args) -> int:
    A = _load(args, weighted=True)
    sources = _sources(args, A)
    opts = SsspOptions(alpha=args.alpha, change_of_direction=not args.no_direction)
    rows, ok = [], True
    results = []
    for s in sources:
        res = sssp(A, s, opts)
        results.append(res)
        for it, (d, c) in enumerate(zip(res.directions, res.counters), 1):
            rows.append(
                {
                    "source": s,
                    "iteration": it,
                    "direction": d,
                    "matrix_reads": c.matrix_reads,
                    "merge_comparisons": c.merge_comparisons,
                    "mask_checks": c.mask_checks,
                }
            )
        if args.verify:
            ok &= bool(np.array_equal(res.distances, sssp_reference(A, s)))
    cols = ("source", "iteration", "direction", "matrix_reads", "merge_comparisons", "mask_checks")
    with _output(args.out) as fh:
        bench.write_csv(rows, cols, fh)
    if args.distances:
        drows = [
            {"source": r.source, "vertex": v, "distance": repr(float(d))}
            for r in results
            for v, d in enumerate(r.distances)
        ]
        with _output(args.distances) as fh:
            bench.write_csv(drows, ("source", "vertex", "distance"), fh)
    if args.verify:
        print("PASS" if ok else "FAIL", file=sys.stderr)
        return 0 if ok else 1
    return 0


def _parse_sweep(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(t) for t in text.split(","))
    except ValueError:
        raise CliError(f"bad --sweep {text!r}; expected comma-separated fractions") from None
    if not all(0 < v <= 1 for v in vals):
        raise CliError("--sweep fractions must be in (0, 1]")
    return vals


def cmd_microbench(args) -> int:
    A = _load(args)
    rows = []
    if args.protocol in ("random", "both"):
        rows += bench.microbench_random(A, _parse_sweep(args.sweep), args.seed)
    if args.protocol in ("bfs", "both"):
        rows += bench.microbench_bfs(A, _sources(args, A))
    with _output(args.out) as fh:
        bench.write_csv(rows, bench.MICRO_COLUMNS, fh)
    return 0


def cmd_ablation(args) -> int:
    A = _load(args)
    rows = bench.ablation(A, _sources(args, A), args.alpha, args.beta)
    with _output(args.out) as fh:
        bench.write_csv(rows, bench.ABLATION_COLUMNS, fh)
    return 0


def cmd_generate(args) -> int:
    if args.out is None:
        raise CliError("generate needs --out PATH")
    e = generate_rmat(args.scale, args.edge_factor, args.seed)
    if not args.raw:
        e = preprocess(e, make_undirected=True)
    write_graph(args.out, e, args.format)
    _info(f"generate: {e.num_rows} vertices, {len(e)} edges -> {args.out}")
    return 0


def _fraction(text: str) -> float:
    v = float(text)
    if not 0 < v <= 1:
        raise argparse.ArgumentTypeError(f"{text} is not in (0, 1]")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"{text} must be a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--graph", metavar="PATH")
    common.add_argument("--format", choices=("mtx", "edgelist"))
    common.add_argument("--undirected", action="store_true", help="mirror every edge")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=_positive, default=None, help="default: all cores")
    common.add_argument("--out", metavar="PATH", help="CSV output (default stdout)")
    common.add_argument("--repeats", type=_positive, default=10)

    src = argparse.ArgumentParser(add_help=False)
    g = src.add_mutually_exclusive_group()
    g.add_argument("--source", type=int)
    g.add_argument("--sources", type=_positive, default=1, metavar="K", help="K random sources")
    src.add_argument(
        "--any-source",
        action="store_true",
        help="draw random sources from all vertices, not just the largest component",
    )

    heur = argparse.ArgumentParser(add_help=False)
    heur.add_argument("--alpha", type=_fraction, default=0.01)
    heur.add_argument("--beta", type=_fraction, default=0.01)

    p = argparse.ArgumentParser(prog="graphmxv", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bfs", parents=[common, src, heur], help="run BFS and emit a trace CSV")
    b.add_argument("--all-toggles-matrix", action="store_true")
    b.add_argument("--mode", choices=sorted(MODE_NAMES), default="do")
    b.add_argument("--switchpoint", type=_fraction, default=0.01)
    for name in ("masking", "early-exit", "operand-reuse", "structure-only", "direction"):
        b.add_argument(f"--no-{name}", action="store_true")
    b.add_argument("--verify", action="store_true", help="compare with a queue BFS")
    b.add_argument("--depths", metavar="PATH", help="also write per-vertex depths")
    b.add_argument("--hops", action="store_true", help="write depth-1 (unreached = -1)")
    b.set_defaults(func=cmd_bfs)

    s = sub.add_parser("sssp", parents=[common, src], help="run min-plus SSSP")
    s.add_argument("--alpha", type=_fraction, default=0.01)
    s.add_argument("--no-direction", action="store_true")
    s.add_argument("--verify", action="store_true", help="compare with Dijkstra")
    s.add_argument("--distances", metavar="PATH")
    s.set_defaults(func=cmd_sssp)

    m = sub.add_parser("microbench", parents=[common, src], help="sweep the four matvec kernels")
    m.add_argument("--protocol", choices=("random", "bfs", "both"), default="both")
    m.add_argument("--sweep", default=",".join(str(x) for x in bench.DEFAULT_SWEEP))
    m.set_defaults(func=cmd_microbench, sources=10)

    a = sub.add_parser("ablation", parents=[common, src, heur], help="cumulative toggle table")
    a.set_defaults(func=cmd_ablation)

    gen = sub.add_parser("generate", parents=[common], help="write an RMAT graph")
    gen.add_argument("--scale", type=int, required=True)
    gen.add_argument("--edge-factor", type=int, default=16)
    gen.add_argument("--raw", action="store_true", help="skip cleanup and mirroring")
    gen.set_defaults(func=cmd_generate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        set_threads(args.threads)
        return args.func(args)
    except (CliError, OSError, ValueError, IndexError) as exc:
        print(f"graphmxv: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
