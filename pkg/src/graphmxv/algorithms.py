"""Direction-optimized BFS, two-phase SSSP and their reference oracles."""

from __future__ import annotations

import heapq
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np

from .algebra import boolean_lor_land, min_plus
from .containers import (
    DenseVector,
    Descriptor,
    DualMatrix,
    Mask,
    SparseVector,
    Toggles,
    dense_to_sparse,
    sparse_to_dense,
)
from .kernels import AccessCounter, col_masked_mxv, col_mxv, mxv, row_masked_mxv, row_mxv

Mode = Literal["push_only", "pull_only", "direction_optimized"]
MODES: tuple[Mode, ...] = ("push_only", "pull_only", "direction_optimized")


def _check_fraction(name: str, x: float) -> None:
    if not 0 < x <= 1:
        raise ValueError(f"{name} must be in (0, 1], got {x}")


@dataclass(frozen=True)
class BfsOptions:
    alpha: float = 0.01
    beta: float = 0.01
    mode: Mode = "direction_optimized"
    toggles: Toggles = field(default_factory=Toggles)
    switchpoint: float = 0.01

    def __post_init__(self):
        _check_fraction("alpha", self.alpha)
        _check_fraction("beta", self.beta)
        _check_fraction("switchpoint", self.switchpoint)
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    direction: str
    nnz_f: int
    unvisited: int
    r: float
    counter: AccessCounter
    early_exit: bool
    time_ns: int


@dataclass(frozen=True)
class BfsResult:
    """``depths`` is 1 at the source, 0 for unreached vertices."""

    source: int
    depths: np.ndarray
    trace: tuple[IterationRecord, ...]
    edges_traversed: int

    @property
    def hops(self) -> np.ndarray:
        return self.depths - 1

    @property
    def directions(self) -> list[str]:
        return [rec.direction for rec in self.trace]

    def totals(self) -> AccessCounter:
        c = AccessCounter()
        for rec in self.trace:
            c.add(rec.counter)
        return c

    @property
    def time_ns(self) -> int:
        return sum(rec.time_ns for rec in self.trace)


def direction_decision(
    r_prev: float, r: float, current: str, alpha: float = 0.01, beta: float = 0.01
) -> str:
    """Switch push to pull on a rising frontier above ``alpha``, back below ``beta``."""
    if current == "push" and r > r_prev and r > alpha:
        return "pull"
    if current == "pull" and r < r_prev and r < beta:
        return "push"
    return current


IterationHook = Callable[[int, str, object, np.ndarray], None]


def bfs(
    A: DualMatrix,
    source: int,
    opts: BfsOptions | None = None,
    hook: IterationHook | None = None,
) -> BfsResult:
    """Level-synchronous BFS as repeated ``f = A^T f .* !v`` over OR/AND.

    ``hook(iteration, direction, frontier, visited)`` runs before each
    matvec with the live frontier vector and visited flags; it must not
    mutate them.
    """
    opts = opts if opts is not None else BfsOptions()
    if A.num_rows != A.num_cols:
        raise ValueError(f"BFS needs a square matrix, got {A.shape}")
    n = A.num_rows
    if not 0 <= source < n:
        raise IndexError(f"source {source} out of range for {n} vertices")
    if A.dtype != np.bool_:
        A = A.pattern()
    At = A.T
    s = boolean_lor_land()
    tog = opts.toggles

    depths = np.zeros(n, dtype=np.int64)
    visited = Mask(np.zeros(n, dtype=np.bool_), np.False_)
    f = SparseVector(n, [source], np.ones(1, np.bool_), np.False_, check=False)
    direction = "pull" if opts.mode == "pull_only" else "push"
    r_prev = 0.0
    d = 1
    seen = 0
    trace = []
    descs = {
        way: Descriptor(scmp=True, switchpoint=opts.switchpoint, direction=way, toggles=tog)
        for way in ("push", "pull")
    }

    while True:
        new = f.indices if isinstance(f, SparseVector) else f.nonzero()
        if new.size == 0:
            break
        depths[new] = d
        seen += new.size
        visited.set_passing(new)
        r = new.size / n

        if opts.mode == "direction_optimized" and d > 1 and tog.change_of_direction:
            direction = direction_decision(r_prev, r, direction, opts.alpha, opts.beta)

        operand = f
        if direction == "pull" and tog.operand_reuse:
            operand = DenseVector(visited.indicator, np.False_)
        if hook is not None:
            hook(d, direction, f, visited.indicator)

        c = AccessCounter()
        unvisited = n - seen
        t0 = time.perf_counter_ns()
        f = mxv(visited, At, operand, s, descs[direction], c)
        elapsed = time.perf_counter_ns() - t0

        trace.append(
            IterationRecord(
                iteration=d,
                direction=direction,
                nnz_f=int(new.size),
                unvisited=unvisited,
                r=r,
                counter=c,
                early_exit=direction == "pull" and tog.masking and tog.early_exit,
                time_ns=elapsed,
            )
        )
        r_prev = r
        d += 1

    reached = depths > 0
    edges = int(A.row_degrees()[reached].sum())
    return BfsResult(source, depths, tuple(trace), edges)


def bfs_reference(A: DualMatrix, source: int) -> np.ndarray:
    """Queue-based BFS over out-edges, same 1-based depth convention."""
    n = A.num_rows
    if not 0 <= source < n:
        raise IndexError(f"source {source} out of range for {n} vertices")
    indptr = A.row_indptr.tolist()
    indices = A.row_indices.tolist()
    depth = [0] * n
    depth[source] = 1
    q = deque([source])
    while q:
        u = q.popleft()
        du = depth[u] + 1
        for k in range(indptr[u], indptr[u + 1]):
            w = indices[k]
            if depth[w] == 0:
                depth[w] = du
                q.append(w)
    return np.array(depth, dtype=np.int64)


def direction_costs(A: DualMatrix, frontier, visited: np.ndarray) -> dict[str, AccessCounter]:
    """Counters for one BFS step done both ways.

    ``push`` is the masked column-based step on the frontier; ``pull`` is
    the masked row-based step with early exit.
    """
    if A.dtype != np.bool_:
        A = A.pattern()
    At = A.T
    s = boolean_lor_land()
    f_sparse = frontier if isinstance(frontier, SparseVector) else dense_to_sparse(frontier)
    f_dense = frontier if isinstance(frontier, DenseVector) else sparse_to_dense(frontier)
    mask = Mask(np.asarray(visited, dtype=np.bool_).copy(), np.False_)
    desc = Descriptor(scmp=True, toggles=Toggles())
    push, pull = AccessCounter(), AccessCounter()
    col_masked_mxv(At, f_sparse, mask, desc, s, push)
    row_masked_mxv(At, f_dense, mask, desc, s, pull, candidates=mask.complement_list)
    return {"push": push, "pull": pull}


@dataclass(frozen=True)
class SsspOptions:
    alpha: float = 0.01
    change_of_direction: bool = True

    def __post_init__(self):
        _check_fraction("alpha", self.alpha)


@dataclass(frozen=True)
class SsspResult:
    source: int
    distances: np.ndarray
    directions: tuple[str, ...]
    counters: tuple[AccessCounter, ...]


def sssp(A: DualMatrix, source: int, opts: SsspOptions | None = None) -> SsspResult:
    """Bellman-Ford over min-plus with an active-vertex frontier.

    Starts column-based and switches once to row-based when the active
    set exceeds ``alpha * M``.  No masking or early exit: neither is
    valid outside Boolean semirings.
    """
    opts = opts if opts is not None else SsspOptions()
    n = A.num_rows
    if A.num_rows != A.num_cols:
        raise ValueError(f"SSSP needs a square matrix, got {A.shape}")
    if not 0 <= source < n:
        raise IndexError(f"source {source} out of range for {n} vertices")
    if A.nnz and A.row_values.min() < 0:
        raise ValueError("negative edge weight")
    At = A.T
    s = min_plus()
    inf = s.identity

    dist = np.full(n, inf)
    dist[source] = 0.0
    frontier = SparseVector(n, [source], np.zeros(1), inf, check=False)
    direction = "push"
    directions, counters = [], []

    for _ in range(n + 1):
        if frontier.nnz == 0:
            break
        if direction == "push" and opts.change_of_direction and frontier.nnz / n > opts.alpha:
            direction = "pull"
        c = AccessCounter()
        if direction == "push":
            cand = col_mxv(At, frontier, s, None, c)
        else:
            cand = dense_to_sparse(row_mxv(At, sparse_to_dense(frontier), s, c))
        better = cand.values < dist[cand.indices]
        idx = cand.indices[better]
        dist[idx] = cand.values[better]
        frontier = SparseVector(n, idx, cand.values[better], inf, check=False)
        directions.append(direction)
        counters.append(c)
    else:
        raise RuntimeError("SSSP did not converge within the Bellman-Ford bound")
    return SsspResult(source, dist, tuple(directions), tuple(counters))


def sssp_reference(A: DualMatrix, source: int) -> np.ndarray:
    """Binary-heap Dijkstra; unreachable vertices stay at +inf."""
    n = A.num_rows
    indptr = A.row_indptr.tolist()
    indices = A.row_indices.tolist()
    weights = A.row_values.astype(np.float64).tolist()
    dist = [float("inf")] * n
    dist[source] = 0.0
    heap = [(0.0, source)]
    while heap:
        du, u = heapq.heappop(heap)
        if du > dist[u]:
            continue
        for k in range(indptr[u], indptr[u + 1]):
            w = indices[k]
            nd = du + weights[k]
            if nd < dist[w]:
                dist[w] = nd
                heapq.heappush(heap, (nd, w))
    return np.array(dist)


def largest_component(A: DualMatrix) -> np.ndarray:
    """Vertices of the largest weakly connected component."""
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import connected_components

    g = csr_matrix(
        (np.ones(A.nnz, dtype=np.int8), A.row_indices, A.row_indptr), shape=A.shape
    )
    _, labels = connected_components(g, directed=True, connection="weak")
    biggest = np.bincount(labels).argmax()
    return np.flatnonzero(labels == biggest)
