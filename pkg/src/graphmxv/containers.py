"""Matrix and vector storage, masks, descriptors and format conversion."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Literal

import numpy as np

Direction = Literal["auto", "push", "pull"]


class DimensionError(ValueError):
    pass


class MatrixConstructionError(ValueError):
    pass


def _offsets(keys: np.ndarray, n: int) -> np.ndarray:
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(keys, minlength=n), out=indptr[1:])
    return indptr


class DualMatrix:
    """Sparse matrix kept in both compressed-row and compressed-column form.

    ``row_*`` arrays are CSR of the matrix, ``col_*`` arrays are CSR of its
    transpose.  Indices within every row and column are strictly
    increasing.  Instances are treated as immutable; :attr:`T` swaps the
    two forms without copying.
    """

    __slots__ = (
        "num_rows",
        "num_cols",
        "row_indptr",
        "row_indices",
        "row_values",
        "col_indptr",
        "col_indices",
        "col_values",
        "symmetric",
        "_row_ids",
        "_transpose",
    )

    def __init__(
        self,
        num_rows: int,
        num_cols: int,
        row_indptr: np.ndarray,
        row_indices: np.ndarray,
        row_values: np.ndarray,
        col_indptr: np.ndarray,
        col_indices: np.ndarray,
        col_values: np.ndarray,
        symmetric: bool = False,
    ):
        self.num_rows = int(num_rows)
        self.num_cols = int(num_cols)
        self.row_indptr = row_indptr
        self.row_indices = row_indices
        self.row_values = row_values
        self.col_indptr = col_indptr
        self.col_indices = col_indices
        self.col_values = col_values
        self.symmetric = bool(symmetric)
        self._row_ids = None
        self._transpose = None

    @property
    def shape(self) -> tuple[int, int]:
        return self.num_rows, self.num_cols

    @property
    def nnz(self) -> int:
        return int(self.row_indptr[-1])

    @property
    def dtype(self) -> np.dtype:
        return self.row_values.dtype

    @property
    def avg_degree(self) -> float:
        return self.nnz / self.num_rows if self.num_rows else 0.0

    @property
    def T(self) -> "DualMatrix":
        if self._transpose is None:
            t = DualMatrix(
                self.num_cols,
                self.num_rows,
                self.col_indptr,
                self.col_indices,
                self.col_values,
                self.row_indptr,
                self.row_indices,
                self.row_values,
                self.symmetric,
            )
            t._transpose = self
            self._transpose = t
        return self._transpose

    @property
    def row_ids(self) -> np.ndarray:
        """Row index of every stored entry, in row-form order."""
        if self._row_ids is None:
            self._row_ids = np.repeat(
                np.arange(self.num_rows, dtype=np.int64), np.diff(self.row_indptr)
            )
        return self._row_ids

    def row_degrees(self) -> np.ndarray:
        return np.diff(self.row_indptr)

    def col_degrees(self) -> np.ndarray:
        return np.diff(self.col_indptr)

    def row(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.row_indptr[i], self.row_indptr[i + 1]
        return self.row_indices[lo:hi], self.row_values[lo:hi]

    def col(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.col_indptr[j], self.col_indptr[j + 1]
        return self.col_indices[lo:hi], self.col_values[lo:hi]

    def row_triples(self) -> list[tuple[int, int, object]]:
        return [
            (int(i), int(j), v.item())
            for i, j, v in zip(self.row_ids, self.row_indices, self.row_values)
        ]

    def col_triples(self) -> list[tuple[int, int, object]]:
        """Triples read from the column form, reported as (row, col, value)."""
        cols = np.repeat(np.arange(self.num_cols, dtype=np.int64), self.col_degrees())
        return sorted(
            (int(i), int(j), v.item())
            for j, i, v in zip(cols, self.col_indices, self.col_values)
        )

    def pattern(self) -> "DualMatrix":
        """Same structure with every stored value set to ``True``."""
        rv = np.ones(self.nnz, dtype=np.bool_)
        cv = rv if self.symmetric else np.ones(self.nnz, dtype=np.bool_)
        return DualMatrix(
            self.num_rows,
            self.num_cols,
            self.row_indptr,
            self.row_indices,
            rv,
            self.col_indptr,
            self.col_indices,
            cv,
            self.symmetric,
        )

    def to_dense(self, fill=0) -> np.ndarray:
        out = np.full(self.shape, fill, dtype=self.dtype)
        out[self.row_ids, self.row_indices] = self.row_values
        return out

    def __repr__(self) -> str:
        return (
            f"DualMatrix({self.num_rows}x{self.num_cols}, nnz={self.nnz}, "
            f"dtype={self.dtype}, symmetric={self.symmetric})"
        )


def matrix_from_edges(
    edges,
    num_rows: int,
    num_cols: int | None = None,
    dtype=None,
    identity=None,
) -> DualMatrix:
    """Build a :class:`DualMatrix` from ``(src, dst[, value])`` edges.

    ``edges`` may be a sequence of tuples or an ``(n, 2|3)`` array.  Edges
    without a value get 1.  Entries equal to ``identity`` are dropped.
    """
    if num_cols is None:
        num_cols = num_rows
    src, dst, val = _split_edges(edges, dtype)
    return matrix_from_arrays(src, dst, val, num_rows, num_cols, identity)


def matrix_from_arrays(
    src: np.ndarray,
    dst: np.ndarray,
    val: np.ndarray,
    num_rows: int,
    num_cols: int,
    identity=None,
) -> DualMatrix:
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    val = np.asarray(val)
    if identity is not None and val.size:
        keep = val != identity
        src, dst, val = src[keep], dst[keep], val[keep]

    bad = (src < 0) | (src >= num_rows) | (dst < 0) | (dst >= num_cols)
    if bad.any():
        k = int(np.flatnonzero(bad)[0])
        raise MatrixConstructionError(
            f"edge #{k} ({int(src[k])}, {int(dst[k])}) out of bounds for "
            f"{num_rows}x{num_cols} matrix"
        )

    order = np.lexsort((dst, src))
    rs, rd, rv = src[order], dst[order], val[order]
    if rs.size > 1:
        dup = (rs[1:] == rs[:-1]) & (rd[1:] == rd[:-1])
        if dup.any():
            k = int(np.flatnonzero(dup)[0])
            raise MatrixConstructionError(
                f"duplicate edge ({int(rs[k])}, {int(rd[k])}); preprocess first"
            )
    row_indptr = _offsets(rs, num_rows)

    order = np.lexsort((src, dst))
    cs, cd, cv = src[order], dst[order], val[order]
    col_indptr = _offsets(cd, num_cols)

    symmetric = (
        num_rows == num_cols
        and np.array_equal(row_indptr, col_indptr)
        and np.array_equal(rd, cs)
        and np.array_equal(rv, cv)
    )
    if symmetric:
        col_indptr, cs, cv = row_indptr, rd, rv
    return DualMatrix(
        num_rows, num_cols, row_indptr, rd, rv, col_indptr, cs, cv, symmetric
    )


def _split_edges(edges, dtype) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if isinstance(edges, np.ndarray):
        arr = edges
        if arr.size == 0:
            arr = arr.reshape(0, 2)
        src = arr[:, 0].astype(np.int64)
        dst = arr[:, 1].astype(np.int64)
        val = arr[:, 2] if arr.shape[1] > 2 else np.ones(len(arr))
    else:
        edges = list(edges)
        src = np.array([e[0] for e in edges], dtype=np.int64)
        dst = np.array([e[1] for e in edges], dtype=np.int64)
        if edges and len(edges[0]) > 2:
            val = np.array([e[2] for e in edges])
        else:
            val = np.ones(len(edges), dtype=np.int64)
    if dtype is not None:
        val = np.asarray(val).astype(dtype)
    return src, dst, np.asarray(val)


class SparseVector:
    """Sorted ``(index, value)`` list; no stored value equals ``identity``."""

    __slots__ = ("length", "indices", "values", "identity", "convert_nnz")

    def __init__(self, length: int, indices, values, identity, check: bool = True):
        self.length = int(length)
        self.indices = np.asarray(indices, dtype=np.int64)
        self.values = np.asarray(values)
        self.identity = identity
        self.convert_nnz: int | None = None
        if check:
            self.validate()

    @classmethod
    def from_pairs(cls, length: int, pairs: Iterable[tuple[int, object]], identity, dtype=None):
        pairs = sorted(pairs)
        idx = np.array([p[0] for p in pairs], dtype=np.int64)
        val = np.array([p[1] for p in pairs], dtype=dtype)
        return cls(length, idx, val, identity)

    @classmethod
    def empty(cls, length: int, identity, dtype) -> "SparseVector":
        return cls(length, np.empty(0, np.int64), np.empty(0, dtype), identity, check=False)

    def validate(self) -> None:
        if self.indices.shape != self.values.shape:
            raise ValueError("indices and values differ in length")
        if self.indices.size:
            if self.indices[0] < 0 or self.indices[-1] >= self.length:
                raise DimensionError("sparse index out of range")
            if np.any(np.diff(self.indices) <= 0):
                raise ValueError("sparse indices must be strictly increasing")
            if np.any(self.values == self.identity):
                raise ValueError("sparse vector stores an identity value")

    @property
    def nnz(self) -> int:
        return int(self.indices.size)

    @property
    def dtype(self) -> np.dtype:
        return self.values.dtype

    def to_pairs(self) -> list[tuple[int, object]]:
        return [(int(i), v.item()) for i, v in zip(self.indices, self.values)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseVector):
            return NotImplemented
        return (
            self.length == other.length
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.values, other.values)
        )

    def __repr__(self) -> str:
        return f"SparseVector(length={self.length}, nnz={self.nnz})"


class DenseVector:
    """Full array where ``identity`` marks an absent entry."""

    __slots__ = ("values", "identity", "_nnz", "convert_nnz")

    def __init__(self, values, identity, nnz: int | None = None):
        self.values = np.asarray(values)
        self.identity = identity
        self._nnz = nnz
        self.convert_nnz: int | None = None

    @classmethod
    def full(cls, length: int, identity, dtype) -> "DenseVector":
        return cls(np.full(length, identity, dtype=dtype), identity, 0)

    @property
    def length(self) -> int:
        return int(self.values.size)

    @property
    def dtype(self) -> np.dtype:
        return self.values.dtype

    @property
    def nnz(self) -> int:
        if self._nnz is None:
            self._nnz = int(np.count_nonzero(self.values != self.identity))
        return self._nnz

    def assign(self, indices, value) -> None:
        """Set ``values[indices] = value`` keeping the non-identity count exact."""
        indices = np.asarray(indices, dtype=np.int64)
        if self._nnz is not None:
            before = int(np.count_nonzero(self.values[indices] != self.identity))
            self.values[indices] = value
            after = int(np.count_nonzero(self.values[indices] != self.identity))
            self._nnz += after - before
        else:
            self.values[indices] = value

    def invalidate(self) -> None:
        self._nnz = None

    def nonzero(self) -> np.ndarray:
        return np.flatnonzero(self.values != self.identity)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DenseVector):
            return NotImplemented
        return np.array_equal(self.values, other.values)

    def __repr__(self) -> str:
        return f"DenseVector(length={self.length}, nnz={self.nnz})"


Vector = SparseVector | DenseVector


class Mask:
    """Output-sparsity indicator with a cached list of blocked positions.

    The blocked list is the sparse half of a SPA: when the structural
    complement is requested the kernels visit only those positions.  Use
    :meth:`set_passing` to flip entries so the list is updated in place
    instead of being rebuilt by a full scan.
    """

    def __init__(self, indicator, identity=None):
        if isinstance(indicator, DenseVector):
            if identity is None:
                identity = indicator.identity
            indicator = indicator.values
        self.indicator = np.asarray(indicator)
        self.identity = (
            identity if identity is not None else self.indicator.dtype.type(0)
        )
        self._complement: np.ndarray | None = None
        self.stale = True

    @classmethod
    def from_indices(cls, length: int, indices) -> "Mask":
        """Boolean mask that passes exactly ``indices``."""
        ind = np.zeros(length, dtype=np.bool_)
        ind[np.asarray(indices, dtype=np.int64)] = True
        return cls(ind, np.False_)

    @property
    def length(self) -> int:
        return int(self.indicator.size)

    def blocked(self) -> np.ndarray:
        return self.indicator == self.identity

    def passes(self, scmp: bool = False) -> np.ndarray:
        b = self.blocked()
        return b if scmp else ~b

    @property
    def complement_list(self) -> np.ndarray:
        """Sorted indices whose indicator equals the identity."""
        if self.stale or self._complement is None:
            self._complement = np.flatnonzero(self.blocked())
            self.stale = False
        return self._complement

    def pass_indices(self, scmp: bool = False) -> np.ndarray:
        if scmp:
            return self.complement_list
        return np.flatnonzero(~self.blocked())

    def set_passing(self, indices, value=True) -> None:
        """Write a non-identity ``value`` at ``indices``, shrinking the blocked list."""
        indices = np.asarray(indices, dtype=np.int64)
        self.indicator[indices] = value
        if not self.stale and self._complement is not None:
            c = self._complement
            self._complement = c[self.indicator[c] == self.identity]

    def touch(self) -> None:
        """Mark the blocked list stale after writing ``indicator`` directly."""
        self.stale = True

    def complement(self) -> "Mask":
        flipped = self.blocked().astype(self.indicator.dtype)
        return Mask(flipped, self.indicator.dtype.type(0))

    def __repr__(self) -> str:
        return f"Mask(length={self.length}, blocked={int(self.blocked().sum())})"


@dataclass(frozen=True)
class Toggles:
    masking: bool = True
    early_exit: bool = True
    operand_reuse: bool = True
    structure_only: bool = True
    change_of_direction: bool = True

    NAMES = ("masking", "early_exit", "operand_reuse", "structure_only", "change_of_direction")

    @classmethod
    def none(cls) -> "Toggles":
        return cls(False, False, False, False, False)

    def with_(self, **kw) -> "Toggles":
        return replace(self, **kw)

    def as_dict(self) -> dict[str, bool]:
        return {n: getattr(self, n) for n in self.NAMES}


@dataclass(frozen=True)
class Descriptor:
    scmp: bool = False
    accum: bool = False
    switchpoint: float = 0.01
    direction: Direction = "auto"
    toggles: Toggles = field(default_factory=Toggles)

    def __post_init__(self):
        if not 0 < self.switchpoint <= 1:
            raise ValueError(f"switchpoint must be in (0, 1], got {self.switchpoint}")
        if self.direction not in ("auto", "push", "pull"):
            raise ValueError(f"unknown direction {self.direction!r}")


def sparse_to_dense(v: SparseVector, identity=None) -> DenseVector:
    if identity is None:
        identity = v.identity
    out = np.full(v.length, identity, dtype=v.values.dtype)
    out[v.indices] = v.values
    return DenseVector(out, identity, v.nnz)


def dense_to_sparse(v: DenseVector, identity=None) -> SparseVector:
    if identity is None:
        identity = v.identity
    idx = np.flatnonzero(v.values != identity)
    return SparseVector(v.length, idx, v.values[idx], identity, check=False)


def convert(v: Vector, switchpoint: float = 0.01, prev_nnz: int | None = None):
    """Switch ``v`` between dense and sparse storage.

    Dense goes sparse when its fill ratio is below ``switchpoint`` and has
    dropped since ``prev_nnz``; sparse goes dense when the ratio is above
    ``switchpoint`` and has grown.  Ties keep the format.  ``prev_nnz=None``
    means no history, so only the threshold applies.

    Returns ``(vector, nnz)``; pass ``nnz`` back as ``prev_nnz`` next time.
    """
    if not 0 < switchpoint <= 1:
        raise ValueError(f"switchpoint must be in (0, 1], got {switchpoint}")
    nnz = v.nnz
    ratio = nnz / v.length if v.length else 0.0
    if isinstance(v, DenseVector):
        if ratio < switchpoint and (prev_nnz is None or nnz < prev_nnz):
            v = dense_to_sparse(v)
    elif isinstance(v, SparseVector):
        if ratio > switchpoint and (prev_nnz is None or nnz > prev_nnz):
            v = sparse_to_dense(v)
    else:
        raise TypeError(f"not a vector: {type(v).__name__}")
    return v, nnz


def elementwise_mask_apply(w: Vector, m: Mask, scmp: bool = False, identity=None) -> Vector:
    """Keep ``w(i)`` where the mask passes, identity elsewhere."""
    if w.length != m.length:
        raise DimensionError(f"vector length {w.length} != mask length {m.length}")
    if identity is None:
        identity = w.identity
    if isinstance(w, DenseVector):
        ok = m.passes(scmp)
        return DenseVector(np.where(ok, w.values, identity).astype(w.dtype), identity)
    ok = m.passes(scmp)[w.indices] if w.nnz else np.zeros(0, dtype=bool)
    return SparseVector(w.length, w.indices[ok], w.values[ok], identity, check=False)
