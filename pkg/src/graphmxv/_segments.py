"""Compiled index helpers for segment gathers over compressed storage.

These never apply a semiring operator; they only locate stored entries,
so the kernels stay generic while the per-element loops run compiled.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def gather_positions(indptr, sel):
    """Storage positions of segments ``sel`` concatenated, and segment lengths."""
    k = sel.size
    lens = np.empty(k, dtype=np.int64)
    total = 0
    for t in range(k):
        n = indptr[sel[t] + 1] - indptr[sel[t]]
        lens[t] = n
        total += n
    pos = np.empty(total, dtype=np.int64)
    w = 0
    for t in range(k):
        lo = indptr[sel[t]]
        for p in range(lo, lo + lens[t]):
            pos[w] = p
            w += 1
    return pos, lens


@njit(cache=True)
def present_entries(indptr, indices, rows, xv, identity):
    """Entries of ``rows`` whose column hits a non-identity ``xv``.

    Returns ``(seg, pos, reads)``: index into ``rows`` and storage position
    of every contributing entry, and the number of entries inspected.
    """
    reads = 0
    for t in range(rows.size):
        reads += indptr[rows[t] + 1] - indptr[rows[t]]
    seg = np.empty(reads, dtype=np.int64)
    pos = np.empty(reads, dtype=np.int64)
    w = 0
    for t in range(rows.size):
        for p in range(indptr[rows[t]], indptr[rows[t] + 1]):
            if xv[indices[p]] != identity:
                seg[w] = t
                pos[w] = p
                w += 1
    return seg[:w], pos[:w], reads


@njit(cache=True)
def first_hits(indptr, indices, rows, xv, identity):
    """Position of the first contributing entry per row (-1 if none).

    ``reads`` counts entries inspected when each row stops at its hit.
    """
    hit = np.full(rows.size, -1, dtype=np.int64)
    reads = 0
    for t in range(rows.size):
        lo = indptr[rows[t]]
        hi = indptr[rows[t] + 1]
        for p in range(lo, hi):
            reads += 1
            if xv[indices[p]] != identity:
                hit[t] = p
                break
    return hit, reads


@njit(cache=True)
def pairwise_merge_moves(lengths):
    """Element moves of a balanced pairwise merge tree over run ``lengths``."""
    runs = lengths.astype(np.int64)
    k = runs.size
    moves = 0
    while k > 1:
        half = k // 2
        for t in range(half):
            merged = runs[2 * t] + runs[2 * t + 1]
            moves += merged
            runs[t] = merged
        if k % 2:
            runs[half] = runs[k - 1]
            k = half + 1
        else:
            k = half
    return moves
