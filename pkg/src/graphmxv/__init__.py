"""Masked semiring matvec kernels and direction-optimized BFS on CPU."""

from .algebra import Monoid, Semiring, boolean_lor_land, min_plus, plus_times, supports_early_exit
from .algorithms import (
    BfsOptions,
    BfsResult,
    SsspOptions,
    SsspResult,
    bfs,
    bfs_reference,
    direction_decision,
    sssp,
    sssp_reference,
)
from .containers import (
    DenseVector,
    Descriptor,
    DimensionError,
    DualMatrix,
    Mask,
    MatrixConstructionError,
    SparseVector,
    Toggles,
    convert,
    dense_to_sparse,
    elementwise_mask_apply,
    matrix_from_edges,
    sparse_to_dense,
)
from .graphio import EdgeList, generate_rmat, load_matrix_market, preprocess, write_matrix_market
from .kernels import (
    AccessCounter,
    col_masked_mxv,
    col_mxv,
    frontier_edge_count,
    mxv,
    row_masked_mxv,
    row_mxv,
    set_threads,
)

__version__ = "0.1.0"

__all__ = [
    "AccessCounter",
    "BfsOptions",
    "BfsResult",
    "DenseVector",
    "Descriptor",
    "DimensionError",
    "DualMatrix",
    "EdgeList",
    "Mask",
    "MatrixConstructionError",
    "Monoid",
    "Semiring",
    "SparseVector",
    "SsspOptions",
    "SsspResult",
    "Toggles",
    "bfs",
    "bfs_reference",
    "boolean_lor_land",
    "col_masked_mxv",
    "col_mxv",
    "convert",
    "dense_to_sparse",
    "direction_decision",
    "elementwise_mask_apply",
    "frontier_edge_count",
    "generate_rmat",
    "load_matrix_market",
    "matrix_from_edges",
    "min_plus",
    "mxv",
    "plus_times",
    "preprocess",
    "row_masked_mxv",
    "row_mxv",
    "set_threads",
    "sparse_to_dense",
    "sssp",
    "sssp_reference",
    "supports_early_exit",
    "write_matrix_market",
]
