"""Graph ingestion: Matrix Market and edge-list files, cleanup, RMAT."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .containers import DualMatrix, matrix_from_arrays

MAX_RMAT_SCALE = 24
# Graph500 quadrant probabilities (a, b, c, d)
RMAT_PROBS = (0.57, 0.19, 0.19, 0.05)


class MatrixMarketError(ValueError):
    pass


class UnsupportedFormatError(MatrixMarketError):
    pass


@dataclass
class EdgeList:
    num_rows: int
    num_cols: int
    src: np.ndarray
    dst: np.ndarray
    weight: np.ndarray

    def __post_init__(self):
        self.src = np.asarray(self.src, dtype=np.int64)
        self.dst = np.asarray(self.dst, dtype=np.int64)
        self.weight = np.asarray(self.weight)

    @classmethod
    def from_tuples(cls, num_rows: int, num_cols: int, edges) -> "EdgeList":
        edges = list(edges)
        src = [e[0] for e in edges]
        dst = [e[1] for e in edges]
        w = [e[2] if len(e) > 2 else 1 for e in edges]
        return cls(num_rows, num_cols, src, dst, np.array(w, dtype=np.float64))

    def __len__(self) -> int:
        return int(self.src.size)

    @property
    def edges(self) -> list[tuple[int, int, float]]:
        return [
            (int(a), int(b), w.item()) for a, b, w in zip(self.src, self.dst, self.weight)
        ]

    def pairs(self) -> list[tuple[int, int]]:
        return list(zip(self.src.tolist(), self.dst.tolist()))

    def to_matrix(self, dtype=np.float64) -> DualMatrix:
        return matrix_from_arrays(
            self.src, self.dst, self.weight.astype(dtype), self.num_rows, self.num_cols
        )


def _parse_banner(line: str) -> tuple[str, str]:
    parts = line.strip().lower().split()
    if len(parts) != 5 or parts[0] != "%%matrixmarket" or parts[1] != "matrix":
        raise MatrixMarketError(f"line 1: bad banner {line.strip()!r}")
    layout, field, symmetry = parts[2:]
    if layout == "array":
        raise UnsupportedFormatError("line 1: dense array format is not supported")
    if layout != "coordinate":
        raise MatrixMarketError(f"line 1: unknown layout {layout!r}")
    if field not in ("pattern", "integer", "real"):
        raise UnsupportedFormatError(f"line 1: unsupported field {field!r}")
    if symmetry not in ("general", "symmetric"):
        raise UnsupportedFormatError(f"line 1: unsupported symmetry {symmetry!r}")
    return field, symmetry


def load_matrix_market(path) -> EdgeList:
    """Read a coordinate-format Matrix Market file into 0-based edges.

    Symmetric files are expanded to both orientations (diagonal once);
    pattern entries get weight 1.
    """
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise MatrixMarketError("line 1: empty file")
    field, symmetry = _parse_banner(lines[0])

    lineno = 1
    size = None
    for lineno in range(2, len(lines) + 1):
        text = lines[lineno - 1].strip()
        if text and not text.startswith("%"):
            size = text.split()
            break
    if size is None:
        raise MatrixMarketError(f"line {lineno}: missing size line")
    try:
        m, n, nnz = (int(t) for t in size)
    except ValueError:
        raise MatrixMarketError(f"line {lineno}: bad size line {' '.join(size)!r}") from None

    want = 2 if field == "pattern" else 3
    src, dst, val = [], [], []
    for k in range(lineno + 1, len(lines) + 1):
        text = lines[k - 1].strip()
        if not text or text.startswith("%"):
            continue
        tok = text.split()
        if len(tok) != want:
            raise MatrixMarketError(f"line {k}: expected {want} fields, got {len(tok)}")
        try:
            i, j = int(tok[0]), int(tok[1])
            w = 1.0 if field == "pattern" else (
                float(int(tok[2])) if field == "integer" else float(tok[2])
            )
        except ValueError:
            raise MatrixMarketError(f"line {k}: cannot parse {text!r}") from None
        if not (1 <= i <= m and 1 <= j <= n):
            raise MatrixMarketError(f"line {k}: index ({i}, {j}) outside 1..{m} x 1..{n}")
        src.append(i - 1)
        dst.append(j - 1)
        val.append(w)
    if len(src) != nnz:
        raise MatrixMarketError(f"size line declares {nnz} entries, found {len(src)}")

    src = np.array(src, dtype=np.int64)
    dst = np.array(dst, dtype=np.int64)
    val = np.array(val, dtype=np.float64)
    if symmetry == "symmetric":
        off = src != dst
        src, dst, val = (
            np.concatenate((src, dst[off])),
            np.concatenate((dst, src[off])),
            np.concatenate((val, val[off])),
        )
    return EdgeList(m, n, src, dst, val)


def write_matrix_market(path, e: EdgeList, field: str = "real") -> None:
    """Write a general coordinate file (1-based)."""
    if field not in ("pattern", "integer", "real"):
        raise ValueError(f"unknown field {field!r}")
    with open(path, "w") as fh:
        fh.write(f"%%MatrixMarket matrix coordinate {field} general\n")
        fh.write(f"{e.num_rows} {e.num_cols} {len(e)}\n")
        for a, b, w in zip(e.src.tolist(), e.dst.tolist(), e.weight.tolist()):
            if field == "pattern":
                fh.write(f"{a + 1} {b + 1}\n")
            elif field == "integer":
                fh.write(f"{a + 1} {b + 1} {int(w)}\n")
            else:
                fh.write(f"{a + 1} {b + 1} {w!r}\n")


def load_edgelist(path, num_vertices: int | None = None) -> EdgeList:
    """Whitespace-separated ``src dst [w]`` lines, 0-based; ``#`` starts a comment."""
    src, dst, val = [], [], []
    with open(path) as fh:
        for k, line in enumerate(fh, 1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            tok = text.split()
            if len(tok) not in (2, 3):
                raise ValueError(f"line {k}: expected 'src dst [w]', got {text!r}")
            try:
                a, b = int(tok[0]), int(tok[1])
                w = float(tok[2]) if len(tok) == 3 else 1.0
            except ValueError:
                raise ValueError(f"line {k}: cannot parse {text!r}") from None
            if a < 0 or b < 0:
                raise ValueError(f"line {k}: negative vertex id")
            src.append(a)
            dst.append(b)
            val.append(w)
    n = num_vertices
    if n is None:
        n = max(max(src, default=-1), max(dst, default=-1)) + 1
    return EdgeList(n, n, np.array(src, np.int64), np.array(dst, np.int64), np.array(val))


def write_edgelist(path, e: EdgeList) -> None:
    with open(path, "w") as fh:
        for a, b, w in zip(e.src.tolist(), e.dst.tolist(), e.weight.tolist()):
            fh.write(f"{a} {b} {w!r}\n")


def load_graph(path, fmt: str | None = None) -> EdgeList:
    """Dispatch on ``fmt`` (``mtx`` or ``edgelist``), else on the suffix."""
    if fmt is None:
        fmt = "mtx" if Path(path).suffix.lower() == ".mtx" else "edgelist"
    if fmt == "mtx":
        return load_matrix_market(path)
    if fmt == "edgelist":
        return load_edgelist(path)
    raise ValueError(f"unknown graph format {fmt!r}")


def write_graph(path, e: EdgeList, fmt: str | None = None) -> None:
    if fmt is None:
        fmt = "mtx" if Path(path).suffix.lower() == ".mtx" else "edgelist"
    if fmt == "mtx":
        write_matrix_market(path, e)
    elif fmt == "edgelist":
        write_edgelist(path, e)
    else:
        raise ValueError(f"unknown graph format {fmt!r}")


def preprocess(e: EdgeList, make_undirected: bool = False) -> EdgeList:
    """Drop self-loops, optionally mirror edges, collapse duplicates.

    The first occurrence of a duplicate keeps its weight; mirrored copies
    come after all original edges.  Output is sorted by ``(src, dst)``.
    """
    src, dst, w = e.src, e.dst, e.weight
    keep = src != dst
    src, dst, w = src[keep], dst[keep], w[keep]
    if make_undirected:
        src, dst, w = (
            np.concatenate((src, dst)),
            np.concatenate((dst, src)),
            np.concatenate((w, w)),
        )
    order = np.lexsort((dst, src))  # stable, so first occurrence leads
    src, dst, w = src[order], dst[order], w[order]
    if src.size:
        first = np.ones(src.size, dtype=bool)
        first[1:] = (src[1:] != src[:-1]) | (dst[1:] != dst[:-1])
        src, dst, w = src[first], dst[first], w[first]
    return EdgeList(e.num_rows, e.num_cols, src, dst, w)


def generate_rmat(scale: int, edge_factor: int = 16, seed: int = 0) -> EdgeList:
    """Raw recursive-quadrant samples: ``edge_factor * 2**scale`` edges on ``2**scale`` vertices.

    Duplicates and self-loops are left in; run :func:`preprocess` after.
    """
    if scale < 0 or edge_factor < 0:
        raise ValueError("scale and edge_factor must be non-negative")
    if scale > MAX_RMAT_SCALE:
        raise ValueError(f"scale {scale} exceeds the desk-scale limit of {MAX_RMAT_SCALE}")
    n = 1 << scale
    m = edge_factor * n
    rng = np.random.default_rng(seed)
    a, b, c, _ = RMAT_PROBS
    src = np.zeros(m, dtype=np.int64)
    dst = np.zeros(m, dtype=np.int64)
    for bit in range(scale):
        u = rng.random(m)
        src_bit = u >= a + b
        dst_bit = ((u >= a) & (u < a + b)) | (u >= a + b + c)
        src |= src_bit.astype(np.int64) << bit
        dst |= dst_bit.astype(np.int64) << bit
    return EdgeList(n, n, src, dst, np.ones(m))


def rmat_graph(scale: int, edge_factor: int = 16, seed: int = 0) -> DualMatrix:
    """Undirected, cleaned RMAT adjacency matrix."""
    return preprocess(generate_rmat(scale, edge_factor, seed), make_undirected=True).to_matrix()


def grid_graph(rows: int, cols: int) -> DualMatrix:
    """Undirected 4-neighbour lattice."""
    ids = np.arange(rows * cols).reshape(rows, cols)
    right = np.column_stack((ids[:, :-1].ravel(), ids[:, 1:].ravel()))
    down = np.column_stack((ids[:-1, :].ravel(), ids[1:, :].ravel()))
    e = np.vstack((right, down))
    el = EdgeList(rows * cols, rows * cols, e[:, 0], e[:, 1], np.ones(len(e)))
    return preprocess(el, make_undirected=True).to_matrix()
