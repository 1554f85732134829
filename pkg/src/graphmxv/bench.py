"""Benchmark harness: BFS run reports, matvec sweeps and the toggle ablation.

Every table carries deterministic access counts next to wall time.  Only
the ``time_ns`` and ``mteps`` columns vary between runs with the same seed.
"""

from __future__ import annotations

import csv
import io
import itertools
import time
from dataclasses import dataclass

import numpy as np

from .algebra import boolean_lor_land
from .algorithms import BfsOptions, bfs, largest_component
from .containers import (
    Descriptor,
    DualMatrix,
    Mask,
    SparseVector,
    Toggles,
    dense_to_sparse,
    sparse_to_dense,
)
from .kernels import AccessCounter, col_masked_mxv, col_mxv, row_masked_mxv, row_mxv

TRACE_COLUMNS = (
    "source",
    "iteration",
    "direction",
    "nnz_f",
    "unvisited",
    "r",
    "matrix_reads",
    "merge_comparisons",
    "mask_checks",
    "time_ns",
)
VARIANTS = ("row_mxv", "row_masked_mxv", "col_mxv", "col_masked_mxv")
MICRO_COLUMNS = (
    "protocol",
    "point",
    "variant",
    "nnz_f",
    "nnz_m",
    "matrix_reads",
    "merge_comparisons",
    "mask_checks",
    "vector_reads",
    "time_ns",
)
ABLATION_STACK = (
    "baseline",
    "structure_only",
    "change_of_direction",
    "masking",
    "early_exit",
    "operand_reuse",
)
ABLATION_COLUMNS = (
    "row",
    "mode",
    "matrix_reads",
    "merge_comparisons",
    "mask_checks",
    "total",
    "step_ratio",
    "cumulative_ratio",
    "time_ns",
)
DEFAULT_SWEEP = (0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0)


def write_csv(rows, columns, fh=None) -> str:
    """Write dict rows in ``columns`` order; returns the text when ``fh`` is None."""
    buf = io.StringIO() if fh is None else fh
    w = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for row in rows:
        w.writerow(row)
    return buf.getvalue() if fh is None else ""


def pick_sources(A: DualMatrix, k: int, seed: int = 0, in_largest_component: bool = True) -> list[int]:
    """``k`` distinct uniform sources, by default within the largest component."""
    pool = largest_component(A) if in_largest_component else np.arange(A.num_rows)
    rng = np.random.default_rng(seed)
    k = min(k, pool.size)
    return sorted(int(s) for s in rng.choice(pool, size=k, replace=False))


# ---------------------------------------------------------------- BFS runs


@dataclass(frozen=True)
class SourceRecord:
    source: int
    time_ns: float
    edges_traversed: int
    depths: np.ndarray
    rows: tuple[dict, ...]

    @property
    def mteps(self) -> float:
        if self.time_ns <= 0:
            return 0.0
        return self.edges_traversed / (self.time_ns * 1e-9) / 1e6


@dataclass(frozen=True)
class RunReport:
    records: tuple[SourceRecord, ...]

    def trace_rows(self) -> list[dict]:
        return [row for rec in self.records for row in rec.rows]

    def aggregate(self) -> dict:
        if not self.records:
            return {}
        t = np.array([r.time_ns for r in self.records], dtype=float)
        m = np.array([r.mteps for r in self.records])
        return {
            "sources": len(self.records),
            "time_ns_mean": float(t.mean()),
            "time_ns_min": float(t.min()),
            "time_ns_max": float(t.max()),
            "mteps_mean": float(m.mean()),
            "mteps_min": float(m.min()),
            "mteps_max": float(m.max()),
        }


def _trace_row(source: int, rec, time_ns: float) -> dict:
    c = rec.counter
    return {
        "source": source,
        "iteration": rec.iteration,
        "direction": rec.direction,
        "nnz_f": rec.nnz_f,
        "unvisited": rec.unvisited,
        "r": repr(rec.r),
        "matrix_reads": c.matrix_reads,
        "merge_comparisons": c.merge_comparisons,
        "mask_checks": c.mask_checks,
        "time_ns": int(round(time_ns)),
    }


def run_bfs(A: DualMatrix, sources, opts: BfsOptions, repeats: int = 10) -> RunReport:
    """Run each source ``repeats`` times and average the per-iteration times.

    Counters do not vary between repeats, so they come from the first one.
    """
    if repeats < 1:
        raise ValueError("repeats must be at least 1")
    records = []
    if len(sources):
        bfs(A, int(sources[0]), opts)  # warm-up: first calls load compiled helpers
    for s in sources:
        runs = [bfs(A, int(s), opts) for _ in range(repeats)]
        first = runs[0]
        per_iter = np.mean([[rec.time_ns for rec in r.trace] for r in runs], axis=0)
        rows = tuple(_trace_row(int(s), rec, t) for rec, t in zip(first.trace, per_iter))
        total = float(np.mean([r.time_ns for r in runs]))
        records.append(SourceRecord(int(s), total, first.edges_traversed, first.depths, rows))
    return RunReport(tuple(records))


def toggle_matrix() -> list[Toggles]:
    """All 32 toggle combinations, all-off first."""
    return [Toggles(*bits) for bits in itertools.product((False, True), repeat=5)]


# ------------------------------------------------------------ microbench


def _timed(fn):
    t0 = time.perf_counter_ns()
    out = fn()
    return out, time.perf_counter_ns() - t0


def _variant_rows(At: DualMatrix, f: SparseVector, m_row: Mask, m_col: Mask, scmp: bool, base: dict):
    """Run all four kernels on one (frontier, mask) point."""
    s = boolean_lor_land()
    desc = Descriptor(scmp=scmp, toggles=Toggles(early_exit=False, structure_only=False))
    fd = sparse_to_dense(f)
    nnz_m_row = int(m_row.pass_indices(scmp).size)
    nnz_m_col = int(m_col.pass_indices(scmp).size)
    calls = {
        "row_mxv": (lambda c: row_mxv(At, fd, s, c), 0),
        "row_masked_mxv": (lambda c: row_masked_mxv(At, fd, m_row, desc, s, c), nnz_m_row),
        "col_mxv": (lambda c: col_mxv(At, f, s, desc, c), 0),
        "col_masked_mxv": (lambda c: col_masked_mxv(At, f, m_col, desc, s, c), nnz_m_col),
    }
    rows = []
    for name in VARIANTS:
        fn, nnz_m = calls[name]
        c = AccessCounter()
        _, dt = _timed(lambda: fn(c))
        rows.append(
            dict(
                base,
                variant=name,
                nnz_f=f.nnz,
                nnz_m=nnz_m,
                matrix_reads=c.matrix_reads,
                merge_comparisons=c.merge_comparisons,
                mask_checks=c.mask_checks,
                vector_reads=c.vector_reads,
                time_ns=dt,
            )
        )
    return rows


def microbench_random(A: DualMatrix, sweep=DEFAULT_SWEEP, seed: int = 0) -> list[dict]:
    """Random frontiers and masks with ``nnz(f) = nnz(m) = frac * M``.

    The column-masked variant gets a mask passing two thirds of ``nnz(f)``.
    """
    if A.dtype != np.bool_:
        A = A.pattern()
    At = A.T
    n = A.num_rows
    rng = np.random.default_rng(seed)
    rows = []
    for point, frac in enumerate(sweep):
        k = max(1, min(n, int(round(frac * n))))
        fi = np.sort(rng.choice(n, size=k, replace=False))
        f = SparseVector(n, fi, np.ones(k, np.bool_), np.False_, check=False)
        m_row = Mask.from_indices(n, rng.choice(n, size=k, replace=False))
        kc = int(round(2 * k / 3))
        m_col = Mask.from_indices(n, rng.choice(n, size=kc, replace=False))
        rows += _variant_rows(At, f, m_row, m_col, False, {"protocol": "random", "point": point})
    return rows


def microbench_bfs(A: DualMatrix, sources, opts: BfsOptions | None = None) -> list[dict]:
    """Frontiers and visited masks sampled from real BFS iterations."""
    if A.dtype != np.bool_:
        A = A.pattern()
    At = A.T
    snaps = []

    def hook(d, direction, f, visited):
        fs = f if isinstance(f, SparseVector) else dense_to_sparse(f)
        snaps.append((fs, visited.copy()))

    for s in sources:
        bfs(A, int(s), opts, hook=hook)
    rows = []
    for point, (f, visited) in enumerate(snaps):
        m = Mask(visited, np.False_)
        rows += _variant_rows(At, f, m, m, True, {"protocol": "bfs", "point": point})
    return rows


# -------------------------------------------------------------- ablation


def ablation_configs() -> list[tuple[str, str, Toggles]]:
    """The six cumulative stacks, each adding one optimization."""
    t = Toggles.none()
    out = [("baseline", "push_only", t)]
    t = t.with_(structure_only=True)
    out.append(("structure_only", "push_only", t))
    t = t.with_(change_of_direction=True)
    out.append(("change_of_direction", "direction_optimized", t))
    for name in ("masking", "early_exit", "operand_reuse"):
        t = t.with_(**{name: True})
        out.append((name, "direction_optimized", t))
    return out


def ablation(A: DualMatrix, sources, alpha: float = 0.01, beta: float = 0.01) -> list[dict]:
    """Total counts per stack summed over ``sources``, with step ratios."""
    rows = []
    prev = None
    base = None
    for name, mode, tog in ablation_configs():
        opts = BfsOptions(alpha=alpha, beta=beta, mode=mode, toggles=tog)
        c = AccessCounter()
        elapsed = 0
        for s in sources:
            res = bfs(A, int(s), opts)
            c.add(res.totals())
            elapsed += res.time_ns
        total = c.total
        base = total if base is None else base
        rows.append(
            {
                "row": name,
                "mode": mode,
                "matrix_reads": c.matrix_reads,
                "merge_comparisons": c.merge_comparisons,
                "mask_checks": c.mask_checks,
                "total": total,
                "step_ratio": _ratio(prev, total),
                "cumulative_ratio": _ratio(base, total),
                "time_ns": elapsed,
            }
        )
        prev = total
    return rows


def _ratio(before, after) -> str:
    if before is None:
        return "1.000"
    if after == 0:
        return "inf"
    return f"{before / after:.3f}"
