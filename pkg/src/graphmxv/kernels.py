"""The four matvec variants, instrumented under a RAM cost model.

Every kernel takes the matrix "as given": ``row_*`` kernels walk the row
form, ``col_*`` kernels walk the column form.  A traversal step over a
graph with adjacency ``A`` therefore passes ``A.T``.

Counters are exact.  ``matrix_reads`` is one per stored entry touched,
``vector_reads`` one per input-vector fetch, ``mask_checks`` one per mask
entry tested and ``merge_comparisons`` counts element moves of a balanced
pairwise merge tree over the gathered columns.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace

import numpy as np

from ._segments import first_hits, gather_positions, pairwise_merge_moves, present_entries
from .algebra import Monoid, Semiring, supports_early_exit
from .containers import (
    DenseVector,
    Descriptor,
    DimensionError,
    Mask,
    SparseVector,
    DualMatrix,
    convert,
    dense_to_sparse,
    elementwise_mask_apply,
    sparse_to_dense,
)

_PARALLEL_MIN_ROWS = 8192
_threads = 1
_pool: ThreadPoolExecutor | None = None


class DispatchError(TypeError):
    pass


def set_threads(n: int | None) -> int:
    """Set worker count for kernel data parallelism; ``None`` means all cores."""
    global _threads, _pool
    n = (os.cpu_count() or 1) if n is None else int(n)
    if n < 1:
        raise ValueError("thread count must be positive")
    if n != _threads and _pool is not None:
        _pool.shutdown()
        _pool = None
    _threads = n
    return n


def get_threads() -> int:
    return _threads


def _map_chunks(fn, items: np.ndarray) -> list:
    """Apply ``fn`` to contiguous chunks of ``items``, results in chunk order."""
    global _pool
    if _threads == 1 or items.size < _PARALLEL_MIN_ROWS:
        return [fn(items)]
    if _pool is None:
        _pool = ThreadPoolExecutor(max_workers=_threads)
    return list(_pool.map(fn, np.array_split(items, _threads)))


@dataclass
class AccessCounter:
    matrix_reads: int = 0
    merge_comparisons: int = 0
    mask_checks: int = 0
    vector_reads: int = 0
    early_exits: int = 0
    early_exit_skipped: bool = False
    last_kernel: str | None = None

    @property
    def total(self) -> int:
        """Accesses attributed to the matrix side: reads, merge traffic, mask tests."""
        return self.matrix_reads + self.merge_comparisons + self.mask_checks

    def add(self, other: "AccessCounter") -> "AccessCounter":
        self.matrix_reads += other.matrix_reads
        self.merge_comparisons += other.merge_comparisons
        self.mask_checks += other.mask_checks
        self.vector_reads += other.vector_reads
        self.early_exits += other.early_exits
        self.early_exit_skipped |= other.early_exit_skipped
        return self

    def snapshot(self) -> "AccessCounter":
        return replace(self)

    def as_dict(self) -> dict:
        return asdict(self)


def _segment_starts(seg: np.ndarray) -> np.ndarray:
    if seg.size == 0:
        return np.empty(0, dtype=np.int64)
    flag = np.empty(seg.size, dtype=bool)
    flag[0] = True
    np.not_equal(seg[1:], seg[:-1], out=flag[1:])
    return np.flatnonzero(flag)


def merge_moves(lengths) -> int:
    """Element moves of a balanced pairwise merge of runs with ``lengths``.

    No element takes part in more than ``ceil(log2(k))`` levels, so the
    result is bounded by ``n * ceil(log2(max(k, 2)))``.
    """
    return int(pairwise_merge_moves(np.asarray(lengths, dtype=np.int64)))


def merge_bound(n: int, k: int) -> int:
    return n * int(np.ceil(np.log2(max(k, 2))))


def frontier_edge_count(A: DualMatrix, v, direction: str = "outgoing") -> int:
    """Sum of out- (row) or in- (column) degrees over the support of ``v``."""
    if direction == "outgoing":
        deg, n = A.row_degrees(), A.num_rows
    elif direction == "incoming":
        deg, n = A.col_degrees(), A.num_cols
    else:
        raise ValueError(f"unknown direction {direction!r}")
    if v.length != n:
        raise DimensionError(f"vector length {v.length} does not match {n}")
    idx = v.indices if isinstance(v, SparseVector) else v.nonzero()
    return int(deg[idx].sum())


def _check_len(v, n: int, what: str) -> None:
    if v.length != n:
        raise DimensionError(f"{what} length {v.length}, expected {n}")


def _fold_rows(A: DualMatrix, xv, s: Semiring, rows: np.ndarray, early_exit: bool):
    """Fold the selected rows against dense ``xv``.

    Returns ``(out_rows, out_vals, reads, early_exits)`` where ``out_rows``
    lists rows with a non-empty fold.
    """
    if early_exit:
        hit, reads = first_hits(A.row_indptr, A.row_indices, rows, xv, s.identity)
        has = hit >= 0
        hp = hit[has]
        vals = s.multiply(A.row_values[hp], xv[A.row_indices[hp]]).astype(s.dtype, copy=False)
        return rows[has], vals, int(reads), int(hp.size)

    seg, pos, reads = present_entries(A.row_indptr, A.row_indices, rows, xv, s.identity)
    if pos.size == 0:
        return rows[:0], np.empty(0, s.dtype), int(reads), 0
    prods = s.multiply(A.row_values[pos], xv[A.row_indices[pos]]).astype(s.dtype, copy=False)
    starts = _segment_starts(seg)
    vals = s.add.op.reduceat(prods, starts).astype(s.dtype, copy=False)
    return rows[seg[starts]], vals, int(reads), 0


def _fold_rows_parallel(A, xv, s, rows, early_exit, c: AccessCounter):
    parts = _map_chunks(lambda r: _fold_rows(A, xv, s, r, early_exit), rows)
    out_rows = np.concatenate([p[0] for p in parts])
    out_vals = np.concatenate([p[1] for p in parts]).astype(s.dtype, copy=False)
    reads = sum(p[2] for p in parts)
    c.matrix_reads += reads
    c.vector_reads += reads
    c.early_exits += sum(p[3] for p in parts)
    return out_rows, out_vals


def row_mxv(
    A: DualMatrix, x: DenseVector, s: Semiring, c: AccessCounter | None = None
) -> DenseVector:
    """``w(i) = add over j of A(i, j) * x(j)``; touches every stored entry."""
    _check_len(x, A.num_cols, "input vector")
    c = c if c is not None else AccessCounter()
    c.last_kernel = "row_mxv"
    xv = x.values
    if A.nnz == 0:
        return DenseVector.full(A.num_rows, s.identity, s.dtype)

    rows = np.arange(A.num_rows, dtype=np.int64)
    if _threads > 1 and rows.size >= _PARALLEL_MIN_ROWS:
        out_rows, out_vals = _fold_rows_parallel(A, xv, s, rows, False, c)
    else:
        # whole-matrix fast path: no position gather needed
        present = xv[A.row_indices] != s.identity
        c.matrix_reads += A.nnz
        c.vector_reads += A.nnz
        sel = np.flatnonzero(present)
        if sel.size == 0:
            return DenseVector.full(A.num_rows, s.identity, s.dtype)
        prods = s.multiply(A.row_values[sel], xv[A.row_indices[sel]])
        seg = A.row_ids[sel]
        starts = _segment_starts(seg)
        out_rows = seg[starts]
        out_vals = s.add.op.reduceat(prods.astype(s.dtype, copy=False), starts)
    out = np.full(A.num_rows, s.identity, dtype=s.dtype)
    out[out_rows] = out_vals
    return DenseVector(out, s.identity)


def row_masked_mxv(
    A: DualMatrix,
    x: DenseVector,
    m: Mask,
    desc: Descriptor,
    s: Semiring,
    c: AccessCounter | None = None,
    candidates: np.ndarray | None = None,
    out: DenseVector | None = None,
    accum_op: Monoid | None = None,
) -> DenseVector:
    """Row-based matvec restricted to rows where the mask passes.

    ``candidates`` is the pass-set, when the caller already has it (the
    SPA complement list); otherwise the whole mask is scanned.  Under a
    short-circuiting semiring with ``desc.toggles.early_exit`` each row
    stops at its first contributing entry.
    """
    _check_len(x, A.num_cols, "input vector")
    if m.length != A.num_rows:
        raise DimensionError(f"mask length {m.length}, expected {A.num_rows}")
    c = c if c is not None else AccessCounter()
    c.last_kernel = "row_masked_mxv"

    if candidates is None:
        rows = np.flatnonzero(m.passes(desc.scmp))
        c.mask_checks += m.length
    else:
        rows = np.asarray(candidates, dtype=np.int64)
        c.mask_checks += rows.size

    early = desc.toggles.early_exit and supports_early_exit(s)
    if desc.toggles.early_exit and not early:
        c.early_exit_skipped = True

    out_rows, out_vals = _fold_rows_parallel(A, x.values, s, rows, early, c)

    if desc.accum and out is not None:
        op = (accum_op or s.add).op
        w = out.values.astype(s.dtype, copy=True)
        w[out_rows] = op(w[out_rows], out_vals)
        return DenseVector(w, s.identity)
    w = np.full(A.num_rows, s.identity, dtype=s.dtype)
    w[out_rows] = out_vals
    return DenseVector(w, s.identity)


def _col_merge(A: DualMatrix, x: SparseVector, s: Semiring, key_only: bool, c: AccessCounter):
    """Gather the frontier's columns, sort by row index, reduce duplicates."""
    xi = x.indices

    def gather(part: np.ndarray):
        starts = np.searchsorted(xi, part[0]) if part.size else 0
        pos, lens = gather_positions(A.col_indptr, part)
        keys = A.col_indices[pos]
        if key_only:
            return keys, None, lens
        xs = np.repeat(x.values[starts : starts + part.size], lens)
        return keys, s.multiply(A.col_values[pos], xs).astype(s.dtype, copy=False), lens

    parts = _map_chunks(gather, xi)
    keys = np.concatenate([p[0] for p in parts])
    lens = np.concatenate([p[2] for p in parts])
    c.matrix_reads += int(keys.size)
    c.vector_reads += int(xi.size)

    moves = merge_moves(lens)
    c.merge_comparisons += (moves + 1) // 2 if key_only else moves

    if keys.size == 0:
        return np.empty(0, np.int64), np.empty(0, s.dtype)
    # stable: equal rows reduce in frontier order
    order = np.argsort(keys, kind="stable")
    keys = keys[order]
    starts = _segment_starts(keys)
    idx = keys[starts]
    if key_only:
        return idx, np.ones(idx.size, dtype=np.bool_)
    vals = np.concatenate([p[1] for p in parts])[order]
    red = s.add.op.reduceat(vals, starts).astype(s.dtype, copy=False)
    keep = red != s.identity
    return idx[keep], red[keep]


def _key_only(desc: Descriptor | None, s: Semiring) -> bool:
    return bool(desc is not None and desc.toggles.structure_only and s.is_boolean)


def col_mxv(
    A: DualMatrix,
    x: SparseVector,
    s: Semiring,
    desc: Descriptor | None = None,
    c: AccessCounter | None = None,
) -> SparseVector:
    """``w = add over i in supp(x) of A(:, i) * x(i)`` as a multiway merge."""
    _check_len(x, A.num_cols, "input vector")
    c = c if c is not None else AccessCounter()
    c.last_kernel = "col_mxv"
    idx, vals = _col_merge(A, x, s, _key_only(desc, s), c)
    return SparseVector(A.num_rows, idx, vals, s.identity, check=False)


def _sparse_accumulate(prev: SparseVector, new: SparseVector, op) -> SparseVector:
    idx = np.concatenate((prev.indices, new.indices))
    vals = np.concatenate((prev.values, new.values.astype(prev.values.dtype)))
    order = np.argsort(idx, kind="stable")
    idx, vals = idx[order], vals[order]
    starts = _segment_starts(idx)
    if starts.size == 0:
        return SparseVector(prev.length, idx, vals, prev.identity, check=False)
    red = op.reduceat(vals, starts)
    keep = red != prev.identity
    return SparseVector(prev.length, idx[starts][keep], red[keep], prev.identity, check=False)


def col_masked_mxv(
    A: DualMatrix,
    x: SparseVector,
    m: Mask,
    desc: Descriptor,
    s: Semiring,
    c: AccessCounter | None = None,
    out: SparseVector | None = None,
    accum_op: Monoid | None = None,
) -> SparseVector:
    """Column-based matvec followed by a mask filter on the merged output.

    Gather and merge cost the same as :func:`col_mxv`; the mask only
    adds one check per output candidate.
    """
    _check_len(x, A.num_cols, "input vector")
    if m.length != A.num_rows:
        raise DimensionError(f"mask length {m.length}, expected {A.num_rows}")
    c = c if c is not None else AccessCounter()
    idx, vals = _col_merge(A, x, s, _key_only(desc, s), c)
    c.last_kernel = "col_masked_mxv"
    c.mask_checks += int(idx.size)
    ok = (m.indicator[idx] != m.identity) ^ desc.scmp
    w = SparseVector(A.num_rows, idx[ok], vals[ok], s.identity, check=False)
    if desc.accum and out is not None:
        return _sparse_accumulate(out, w, (accum_op or s.add).op)
    return w


def mxv(
    m: Mask | None,
    A: DualMatrix,
    v,
    s: Semiring,
    desc: Descriptor | None = None,
    c: AccessCounter | None = None,
    out=None,
    accum_op: Monoid | None = None,
):
    """Dispatch ``w = A v (.* m)`` to one of the four kernels.

    The vector's storage decides the direction: sparse runs column-based
    (push), dense runs row-based (pull).  ``desc.direction`` forces a
    format first; ``"auto"`` applies :func:`convert` with the descriptor's
    switchpoint unless change of direction is disabled.  With masking
    toggled off a mask is applied as a separate filter after the
    unmasked kernel.
    """
    desc = desc if desc is not None else Descriptor()
    c = c if c is not None else AccessCounter()
    if not isinstance(v, (SparseVector, DenseVector)):
        raise DispatchError(f"cannot dispatch on {type(v).__name__}")
    tog = desc.toggles

    if desc.direction == "push":
        if isinstance(v, DenseVector):
            v = dense_to_sparse(v)
    elif desc.direction == "pull":
        if isinstance(v, SparseVector):
            v = sparse_to_dense(v)
    elif tog.change_of_direction:
        prev = v.convert_nnz
        v, nnz = convert(v, desc.switchpoint, prev)
        v.convert_nnz = nnz

    if m is not None and m.length != A.num_rows:
        raise DimensionError(f"mask length {m.length}, expected {A.num_rows}")
    accum = out if desc.accum else None

    if isinstance(v, SparseVector):
        if m is None:
            return col_mxv(A, v, s, desc, c)
        if tog.masking:
            return col_masked_mxv(A, v, m, desc, s, c, out=accum, accum_op=accum_op)
        w = col_mxv(A, v, s, desc, c)
        c.mask_checks += w.nnz
        return elementwise_mask_apply(w, m, desc.scmp, s.identity)

    if m is None:
        return row_mxv(A, v, s, c)
    if tog.masking:
        candidates = None
        if desc.scmp:
            if m.stale:
                c.mask_checks += m.length
            candidates = m.complement_list
        return row_masked_mxv(A, v, m, desc, s, c, candidates, out=accum, accum_op=accum_op)
    w = row_mxv(A, v, s, c)
    c.mask_checks += m.length
    return elementwise_mask_apply(w, m, desc.scmp, s.identity)
